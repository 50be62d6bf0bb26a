//! Exact von Neumann measurements with Gaussian pointers.
//!
//! A pointer of width `Δ` starts in `ψ_0(x) ∝ exp(-x²/(2Δ²))`; an impulsive
//! coupling at a marked point translates the pointer by `δ = εΔ` on every
//! branch of the particle occupying that mode. Pointer wavefunctions are
//! kept as finite sums of equal-width Gaussians, so overlaps, means and
//! densities are all closed form:
//! `<ψ_a|ψ_b> = exp(-(a-b)²/(4Δ²))`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, PostSelection};
use crate::error::{Error, Result};
use crate::state::{PureState, Space};
use crate::tsvf::{WeakValue, IMPOSSIBLE_OVERLAP};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointerConfig {
    width: f64,
    epsilon: f64,
}

impl PointerConfig {
    pub fn new(width: f64, epsilon: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidPointer(format!(
                "width must be positive, got {width}"
            )));
        }
        if !epsilon.is_finite() {
            return Err(Error::InvalidPointer(format!(
                "epsilon must be finite, got {epsilon}"
            )));
        }
        Ok(Self { width, epsilon })
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `δ = εΔ`.
    pub fn shift(&self) -> f64 {
        self.epsilon * self.width
    }
}

/// `<ψ_a|ψ_b>` for unit-norm Gaussians of width `width`.
pub fn gaussian_overlap(width: f64, a: f64, b: f64) -> f64 {
    let d = a - b;
    (-d * d / (4.0 * width * width)).exp()
}

/// Unit-norm pointer wavefunction centered at `a`.
pub fn gaussian(width: f64, a: f64, x: f64) -> f64 {
    let d = x - a;
    (PI * width * width).powf(-0.25) * (-d * d / (2.0 * width * width)).exp()
}

/// A single pointer wavefunction `Σ w_i ψ_{a_i}(x)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaussianSum {
    pub width: f64,
    pub terms: Vec<(Complex64, f64)>,
}

impl GaussianSum {
    pub fn new(width: f64, terms: Vec<(Complex64, f64)>) -> Self {
        Self { width, terms }
    }

    pub fn single(width: f64, center: f64) -> Self {
        Self::new(width, vec![(Complex64::new(1.0, 0.0), center)])
    }

    fn pair_sum(&self, f: impl Fn(f64, f64) -> Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (wi, ai) in &self.terms {
            for (wj, aj) in &self.terms {
                acc += wi.conj() * wj * gaussian_overlap(self.width, *ai, *aj) * f(*ai, *aj);
            }
        }
        acc
    }

    pub fn norm_sqr(&self) -> f64 {
        self.pair_sum(|_, _| Complex64::new(1.0, 0.0)).re
    }

    /// Exact `<x>`.
    pub fn expectation(&self) -> Result<f64> {
        let norm = self.norm_sqr();
        if norm <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(self.pair_sum(|a, b| Complex64::new((a + b) / 2.0, 0.0)).re / norm)
    }

    /// Exact `<p>` in units where ħ = 1.
    pub fn momentum_expectation(&self) -> Result<f64> {
        let norm = self.norm_sqr();
        if norm <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        let w2 = self.width * self.width;
        Ok(self
            .pair_sum(|a, b| Complex64::new(0.0, (a - b) / (2.0 * w2)))
            .re
            / norm)
    }

    pub fn wavefunction(&self, x: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(w, a)| w * gaussian(self.width, *a, x))
            .sum()
    }

    /// Unnormalized density `|ψ(x)|²`.
    pub fn density(&self, x: f64) -> f64 {
        self.wavefunction(x).norm_sqr()
    }
}

/// A joint wavefunction of several pointers:
/// `Σ_t w_t Π_k ψ_{a_{t,k}}(x_k)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointerState {
    pub points: Vec<String>,
    pub widths: Vec<f64>,
    pub terms: Vec<(Complex64, Vec<f64>)>,
}

impl PointerState {
    pub fn num_pointers(&self) -> usize {
        self.points.len()
    }

    pub fn index_of(&self, point: &str) -> Result<usize> {
        self.points
            .iter()
            .position(|p| p == point)
            .ok_or_else(|| Error::UncoupledPoint(point.to_string()))
    }

    /// `Π_{k ≠ skip} <ψ_{a_ik}|ψ_{a_jk}>`.
    pub(crate) fn cross_overlap(&self, i: usize, j: usize, skip: Option<usize>) -> f64 {
        let (ci, cj) = (&self.terms[i].1, &self.terms[j].1);
        (0..self.widths.len())
            .filter(|k| Some(*k) != skip)
            .map(|k| gaussian_overlap(self.widths[k], ci[k], cj[k]))
            .product()
    }

    fn pair_sum(&self, k: Option<usize>, f: impl Fn(f64, f64) -> Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.terms.len() {
            for j in 0..self.terms.len() {
                let w = self.terms[i].0.conj() * self.terms[j].0 * self.cross_overlap(i, j, None);
                let g = match k {
                    Some(k) => f(self.terms[i].1[k], self.terms[j].1[k]),
                    None => Complex64::new(1.0, 0.0),
                };
                acc += w * g;
            }
        }
        acc
    }

    pub fn norm_sqr(&self) -> f64 {
        self.pair_sum(None, |_, _| Complex64::new(1.0, 0.0)).re
    }

    fn checked_norm(&self) -> Result<f64> {
        let n = self.norm_sqr();
        if n > 0.0 {
            Ok(n)
        } else {
            Err(Error::ZeroNorm)
        }
    }

    /// Exact mean position of pointer `k`, other pointers traced out.
    pub fn marginal_mean(&self, k: usize) -> Result<f64> {
        let norm = self.checked_norm()?;
        Ok(self
            .pair_sum(Some(k), |a, b| Complex64::new((a + b) / 2.0, 0.0))
            .re
            / norm)
    }

    /// Exact mean momentum of pointer `k` (ħ = 1).
    pub fn marginal_momentum(&self, k: usize) -> Result<f64> {
        let norm = self.checked_norm()?;
        let w2 = self.widths[k] * self.widths[k];
        Ok(self
            .pair_sum(Some(k), |a, b| Complex64::new(0.0, (a - b) / (2.0 * w2)))
            .re
            / norm)
    }

    /// The marginal of pointer `k` as a normal mixture: `(weight, mean)`
    /// pairs of components with standard deviation `Δ_k/√2`. Weights sum
    /// to one; individual weights may be negative (interference).
    pub fn marginal_mixture(&self, k: usize) -> Result<Vec<(f64, f64)>> {
        let norm = self.checked_norm()?;
        let mut out = Vec::with_capacity(self.terms.len().pow(2));
        for i in 0..self.terms.len() {
            for j in 0..self.terms.len() {
                let w =
                    (self.terms[i].0.conj() * self.terms[j].0).re * self.cross_overlap(i, j, None);
                let m = (self.terms[i].1[k] + self.terms[j].1[k]) / 2.0;
                out.push((w / norm, m));
            }
        }
        Ok(out)
    }

    /// Normalized marginal density of pointer `k`.
    pub fn marginal_density(&self, k: usize, x: f64) -> Result<f64> {
        let w = self.widths[k];
        let norm_const = 1.0 / (PI.sqrt() * w);
        Ok(self
            .marginal_mixture(k)?
            .into_iter()
            .map(|(wt, m)| wt * norm_const * (-(x - m).powi(2) / (w * w)).exp())
            .sum())
    }

    /// Normalized marginal cumulative distribution of pointer `k`.
    pub fn marginal_cdf(&self, k: usize, x: f64) -> Result<f64> {
        let w = self.widths[k];
        Ok(self
            .marginal_mixture(k)?
            .into_iter()
            .map(|(wt, m)| wt * 0.5 * (1.0 + libm::erf((x - m) / w)))
            .sum())
    }

    /// The single-pointer wavefunction, when exactly one pointer exists.
    pub fn as_gaussian_sum(&self) -> Option<GaussianSum> {
        (self.num_pointers() == 1).then(|| {
            GaussianSum::new(
                self.widths[0],
                self.terms.iter().map(|(w, c)| (*w, c[0])).collect(),
            )
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub point: String,
    pub config: PointerConfig,
}

impl Coupling {
    pub fn new(point: impl Into<String>, config: PointerConfig) -> Self {
        Self {
            point: point.into(),
            config,
        }
    }
}

/// One product term of the joint particle–pointer state: pointer centers
/// and the particle amplitudes that carry them.
#[derive(Clone, Debug, PartialEq)]
pub struct JointTerm {
    pub centers: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
}

/// `Σ_t |χ_t> ⊗ Π_k |ψ_{a_{t,k}}>`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointState {
    space: Arc<Space>,
    couplings: Vec<Coupling>,
    boundary: usize,
    terms: Vec<JointTerm>,
}

fn same_centers(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

fn merge_terms(terms: Vec<JointTerm>) -> Vec<JointTerm> {
    let mut out: Vec<JointTerm> = Vec::with_capacity(terms.len());
    for t in terms {
        match out
            .iter_mut()
            .find(|o| same_centers(&o.centers, &t.centers))
        {
            Some(o) => {
                for (x, y) in o.amplitudes.iter_mut().zip(&t.amplitudes) {
                    *x += y;
                }
            }
            None => out.push(t),
        }
    }
    out.retain(|t| t.amplitudes.iter().any(|a| a.norm() > 0.0));
    out
}

impl JointState {
    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn couplings(&self) -> &[Coupling] {
        &self.couplings
    }

    pub fn boundary(&self) -> usize {
        self.boundary
    }

    pub fn terms(&self) -> &[JointTerm] {
        &self.terms
    }

    pub fn coupling_index(&self, point: &str) -> Result<usize> {
        self.couplings
            .iter()
            .position(|c| c.point == point)
            .ok_or_else(|| Error::UncoupledPoint(point.to_string()))
    }

    fn pointer_overlap(&self, a: &[f64], b: &[f64]) -> f64 {
        self.couplings
            .iter()
            .enumerate()
            .map(|(k, c)| gaussian_overlap(c.config.width(), a[k], b[k]))
            .product()
    }

    fn weighted_norm(&self, mask: impl Fn(usize) -> bool) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for ti in &self.terms {
            for tj in &self.terms {
                let ov = self.pointer_overlap(&ti.centers, &tj.centers);
                let inner: Complex64 = ti
                    .amplitudes
                    .iter()
                    .zip(&tj.amplitudes)
                    .enumerate()
                    .filter(|(idx, _)| mask(*idx))
                    .map(|(_, (x, y))| x.conj() * y)
                    .sum();
                acc += inner * ov;
            }
        }
        acc.re
    }

    pub fn norm_sqr(&self) -> f64 {
        self.weighted_norm(|_| true)
    }

    /// Probability of finding the particle in `mode` at this slice.
    pub fn mode_probability(&self, mode: &str) -> Result<f64> {
        let p = self
            .space
            .path_index(mode)
            .ok_or_else(|| Error::UnknownLabel(mode.to_string()))?;
        let space = self.space.clone();
        Ok(self.weighted_norm(move |idx| space.split(idx).0 == p))
    }

    /// Projects the particle onto `state` (left as an unnormalized joint state).
    fn project_particle(&self, state: &PureState) -> JointState {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let c: Complex64 = state
                    .amplitudes()
                    .iter()
                    .zip(&t.amplitudes)
                    .map(|(p, x)| p.conj() * x)
                    .sum();
                JointTerm {
                    centers: t.centers.clone(),
                    amplitudes: state.amplitudes().iter().map(|p| p * c).collect(),
                }
            })
            .collect();
        JointState {
            space: self.space.clone(),
            couplings: self.couplings.clone(),
            boundary: self.boundary,
            terms: merge_terms(terms),
        }
    }
}

/// Evolves the particle from the input to the final slice, coupling the
/// pointers at their marked points.
pub fn couple(circuit: &Circuit, pre: &PureState, couplings: &[Coupling]) -> Result<JointState> {
    couple_until(circuit, pre, couplings, circuit.final_boundary())
}

/// As [`couple`], stopping at `boundary`. Couplings beyond it stay idle.
pub fn couple_until(
    circuit: &Circuit,
    pre: &PureState,
    couplings: &[Coupling],
    boundary: usize,
) -> Result<JointState> {
    if **pre.space() != **circuit.space() {
        return Err(Error::SpaceMismatch(
            "pre-selected state is not on the circuit's space".into(),
        ));
    }
    if boundary > circuit.final_boundary() {
        return Err(Error::BoundaryOutOfRange {
            boundary,
            stages: circuit.num_stages(),
        });
    }
    let mut sites = Vec::with_capacity(couplings.len());
    for (k, c) in couplings.iter().enumerate() {
        if couplings[..k].iter().any(|o| o.point == c.point) {
            return Err(Error::DuplicateCoupling(c.point.clone()));
        }
        let point = circuit.point(&c.point)?;
        let mode = circuit
            .space()
            .path_index(&point.mode)
            .expect("validated point");
        sites.push((point.boundary, mode, c.config.shift()));
    }

    let space = circuit.space().clone();
    let inner = space.inner_dim();
    let mut terms = vec![JointTerm {
        centers: vec![0.0; couplings.len()],
        amplitudes: pre.amplitudes().to_vec(),
    }];
    for b in 0..=boundary {
        for (k, &(site_boundary, mode, shift)) in sites.iter().enumerate() {
            if site_boundary != b {
                continue;
            }
            let mut next = Vec::with_capacity(terms.len() * 2);
            for mut t in terms {
                let block = mode * inner..(mode + 1) * inner;
                let mut moved = vec![Complex64::new(0.0, 0.0); t.amplitudes.len()];
                moved[block.clone()].copy_from_slice(&t.amplitudes[block.clone()]);
                if moved.iter().all(|a| a.norm() == 0.0) {
                    next.push(t);
                    continue;
                }
                t.amplitudes[block]
                    .iter_mut()
                    .for_each(|a| *a = Complex64::new(0.0, 0.0));
                let mut centers = t.centers.clone();
                centers[k] += shift;
                next.push(t);
                next.push(JointTerm {
                    centers,
                    amplitudes: moved,
                });
            }
            terms = merge_terms(next);
        }
        if b < boundary {
            for t in &mut terms {
                circuit.apply_stage(b, &mut t.amplitudes);
            }
        }
    }
    Ok(JointState {
        space,
        couplings: couplings.to_vec(),
        boundary,
        terms,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Postselected {
    /// Unnormalized pointer wavefunction given the detector outcome.
    pub pointers: PointerState,
    /// Its squared norm: the probability of the outcome.
    pub probability: f64,
}

impl Postselected {
    /// Conditional mean shift of the pointer coupled at `point`.
    pub fn mean_shift(&self, point: &str) -> Result<f64> {
        self.pointers.marginal_mean(self.pointers.index_of(point)?)
    }

    pub fn mean_momentum(&self, point: &str) -> Result<f64> {
        self.pointers
            .marginal_momentum(self.pointers.index_of(point)?)
    }
}

fn check_final(circuit: &Circuit, joint: &JointState) -> Result<()> {
    if joint.boundary != circuit.final_boundary() {
        return Err(Error::BoundaryOutOfRange {
            boundary: joint.boundary,
            stages: circuit.num_stages(),
        });
    }
    Ok(())
}

/// Projects the joint state onto a detector outcome.
pub fn postselect(
    circuit: &Circuit,
    joint: &JointState,
    post: &PostSelection,
) -> Result<Postselected> {
    check_final(circuit, joint)?;
    let detector = circuit.detector_state(post)?;
    let terms: Vec<(Complex64, Vec<f64>)> = joint
        .terms
        .iter()
        .map(|t| {
            let c: Complex64 = detector
                .amplitudes()
                .iter()
                .zip(&t.amplitudes)
                .map(|(p, x)| p.conj() * x)
                .sum();
            (c, t.centers.clone())
        })
        .filter(|(c, _)| c.norm() > 0.0)
        .collect();
    let mut pointers = PointerState {
        points: joint.couplings.iter().map(|c| c.point.clone()).collect(),
        widths: joint.couplings.iter().map(|c| c.config.width()).collect(),
        terms,
    };
    let mut probability = pointers.norm_sqr().max(0.0);
    // Rounding residue of an exactly dark outcome counts as zero, on the
    // same scale as an impossible ideal post-selection.
    if probability <= IMPOSSIBLE_OVERLAP * IMPOSSIBLE_OVERLAP * joint.norm_sqr() {
        pointers.terms.clear();
        probability = 0.0;
    }
    Ok(Postselected {
        pointers,
        probability,
    })
}

/// Probability of every complete detector outcome.
pub fn outcome_probabilities(
    circuit: &Circuit,
    joint: &JointState,
) -> Result<Vec<(PostSelection, f64)>> {
    circuit
        .outcomes()
        .into_iter()
        .map(|post| {
            let p = postselect(circuit, joint, &post)?.probability;
            Ok((post, p))
        })
        .collect()
}

/// Result of projecting one pointer onto its initial state or its
/// orthogonal complement.
#[derive(Clone, Debug)]
pub struct Readout {
    pub found_initial: f64,
    pub found_orthogonal: f64,
    pub initial: JointState,
    pub orthogonal: JointState,
}

/// Projective readout of the pointer at `point`. When `post` is given the
/// particle is first projected on that detector outcome, so the reported
/// probabilities are joint with the click.
pub fn projective_readout(
    circuit: &Circuit,
    joint: &JointState,
    post: Option<&PostSelection>,
    point: &str,
) -> Result<Readout> {
    let k = joint.coupling_index(point)?;
    let base = match post {
        Some(p) => {
            check_final(circuit, joint)?;
            joint.project_particle(&circuit.detector_state(p)?)
        }
        None => joint.clone(),
    };
    let width = base.couplings[k].config.width();
    let mut initial_terms = Vec::with_capacity(base.terms.len());
    let mut orthogonal_terms = Vec::with_capacity(base.terms.len() * 2);
    for t in &base.terms {
        let ov = gaussian_overlap(width, t.centers[k], 0.0);
        let mut centers = t.centers.clone();
        centers[k] = 0.0;
        let back = JointTerm {
            centers,
            amplitudes: t.amplitudes.iter().map(|a| a * ov).collect(),
        };
        orthogonal_terms.push(t.clone());
        orthogonal_terms.push(JointTerm {
            centers: back.centers.clone(),
            amplitudes: back.amplitudes.iter().map(|a| -a).collect(),
        });
        initial_terms.push(back);
    }
    let initial = JointState {
        terms: merge_terms(initial_terms),
        ..base.clone()
    };
    let orthogonal = JointState {
        terms: merge_terms(orthogonal_terms),
        ..base
    };
    Ok(Readout {
        found_initial: initial.norm_sqr().max(0.0),
        found_orthogonal: orthogonal.norm_sqr().max(0.0),
        initial,
        orthogonal,
    })
}

/// `δ · Re(A_w)`.
pub fn first_order_shift(wv: &WeakValue, cfg: &PointerConfig) -> f64 {
    cfg.shift() * wv.value.re
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LeakRatio {
    pub exact: f64,
    pub asymptotic: f64,
}

/// Flux leaking through a dark port when a pointer is coupled on one of
/// the interfering arms, relative to the flux of the other arm:
/// `(1 - exp(-ε²/4))/2`, and its leading term `ε²/8`.
pub fn leak_ratio(epsilon: f64) -> Result<LeakRatio> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::InvalidPointer(format!(
            "epsilon must be >= 0, got {epsilon}"
        )));
    }
    let x = epsilon * epsilon / 4.0;
    Ok(LeakRatio {
        exact: -(-x).exp_m1() / 2.0,
        asymptotic: epsilon * epsilon / 8.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(PointerConfig::new(0.0, 0.1).is_err());
        assert!(PointerConfig::new(1.0, f64::NAN).is_err());
        let c = PointerConfig::new(2.0, 0.1).unwrap();
        assert_eq!(c.shift(), 0.2);
    }

    #[test]
    fn single_gaussian_mean() {
        let g = GaussianSum::single(1.3, 0.7);
        assert!((g.expectation().unwrap() - 0.7).abs() < 1e-15);
        assert!((g.norm_sqr() - 1.0).abs() < 1e-15);
        assert!(g.momentum_expectation().unwrap().abs() < 1e-15);
    }

    #[test]
    fn equal_mixture_sits_halfway() {
        let d = 0.01;
        let one = Complex64::new(1.0, 0.0);
        let g = GaussianSum::new(1.0, vec![(one, 0.0), (one, d)]);
        assert!((g.expectation().unwrap() - d / 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_norm_is_an_error() {
        let g = GaussianSum::new(1.0, vec![]);
        assert!(matches!(g.expectation(), Err(Error::ZeroNorm)));
    }

    #[test]
    fn momentum_tracks_imaginary_weights() {
        // w = 1 + i*k at center δ: <p> is odd in the imaginary part.
        let one = Complex64::new(1.0, 0.0);
        let plus = GaussianSum::new(1.0, vec![(one, 0.0), (Complex64::new(0.0, 0.3), 0.1)]);
        let minus = GaussianSum::new(1.0, vec![(one, 0.0), (Complex64::new(0.0, -0.3), 0.1)]);
        let p = plus.momentum_expectation().unwrap();
        let m = minus.momentum_expectation().unwrap();
        assert!(p.abs() > 1e-3);
        assert!((p + m).abs() < 1e-15);
    }

    #[test]
    fn leak_ratio_values() {
        let zero = leak_ratio(0.0).unwrap();
        assert_eq!((zero.exact, zero.asymptotic), (0.0, 0.0));
        let r = leak_ratio(0.1).unwrap();
        assert!((r.exact - 0.001_248_438_801_269_938).abs() < 1e-15);
        assert!((r.asymptotic - 0.00125).abs() < 1e-18);
        let tiny = leak_ratio(1e-3).unwrap();
        assert!((tiny.exact / tiny.asymptotic - 1.0).abs() < 1e-6);
        assert!(leak_ratio(-1.0).is_err());
    }

    #[test]
    fn marginal_cdf_and_density_are_consistent() {
        let one = Complex64::new(1.0, 0.0);
        let ps = PointerState {
            points: vec!["X".into(), "Y".into()],
            widths: vec![1.0, 0.5],
            terms: vec![
                (one, vec![0.0, 0.0]),
                (Complex64::new(-0.4, 0.2), vec![0.3, 0.0]),
                (Complex64::new(0.1, 0.0), vec![0.0, 0.2]),
            ],
        };
        for k in 0..2 {
            assert!((ps.marginal_cdf(k, 50.0).unwrap() - 1.0).abs() < 1e-12);
            assert!(ps.marginal_cdf(k, -50.0).unwrap().abs() < 1e-12);
            let (x, h) = (0.17, 1e-5);
            let fd = (ps.marginal_cdf(k, x + h).unwrap() - ps.marginal_cdf(k, x - h).unwrap())
                / (2.0 * h);
            assert!((fd - ps.marginal_density(k, x).unwrap()).abs() < 1e-8);
        }
    }
}
