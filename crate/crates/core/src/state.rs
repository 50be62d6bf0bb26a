//! Composite single-particle Hilbert spaces, pure states and local projectors.
//!
//! A [`Space`] is the product of up to three factors in a fixed order:
//! spatial path (a list of symbolic mode names), polarization `{H, V}` and a
//! two-level ancilla `{up, down}`. Labels stay symbolic; the dense index is
//! path-major and computed from the factor layout.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for analytic identities (normalization, idempotence).
pub const EXACT_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ancilla {
    Up,
    Down,
}

impl Polarization {
    pub const ALL: [Polarization; 2] = [Polarization::H, Polarization::V];

    fn index(self) -> usize {
        self as usize
    }
}

impl Ancilla {
    pub const ALL: [Ancilla; 2] = [Ancilla::Up, Ancilla::Down];

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarization::H => "H",
            Polarization::V => "V",
        })
    }
}

impl fmt::Display for Ancilla {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ancilla::Up => "up",
            Ancilla::Down => "down",
        })
    }
}

impl FromStr for Polarization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "H" | "h" => Ok(Polarization::H),
            "V" | "v" => Ok(Polarization::V),
            _ => Err(Error::Parse(format!("unknown polarization `{s}`"))),
        }
    }
}

impl FromStr for Ancilla {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "up" | "Up" => Ok(Ancilla::Up),
            "down" | "Down" => Ok(Ancilla::Down),
            _ => Err(Error::Parse(format!("unknown ancilla level `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Factor {
    Path,
    Polarization,
    Ancilla,
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Factor::Path => "path",
            Factor::Polarization => "polarization",
            Factor::Ancilla => "ancilla",
        })
    }
}

/// One basis vector of a [`Space`]. Absent factors are `None`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisLabel {
    pub path: Option<String>,
    pub polarization: Option<Polarization>,
    pub ancilla: Option<Ancilla>,
}

impl BasisLabel {
    pub fn path(name: impl Into<String>) -> Self {
        Self {
            path: Some(name.into()),
            polarization: None,
            ancilla: None,
        }
    }

    pub fn with_polarization(mut self, pol: Polarization) -> Self {
        self.polarization = Some(pol);
        self
    }

    pub fn with_ancilla(mut self, anc: Ancilla) -> Self {
        self.ancilla = Some(anc);
        self
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::with_capacity(3);
        if let Some(p) = &self.path {
            parts.push(p.clone());
        }
        if let Some(p) = self.polarization {
            parts.push(p.to_string());
        }
        if let Some(a) = self.ancilla {
            parts.push(a.to_string());
        }
        f.write_str(&parts.join(","))
    }
}

impl FromStr for BasisLabel {
    type Err = Error;

    /// Parses `path[,H|V][,up|down]`. A leading polarization or ancilla
    /// token is accepted for spaces without a path factor.
    fn from_str(s: &str) -> Result<Self> {
        let mut label = BasisLabel {
            path: None,
            polarization: None,
            ancilla: None,
        };
        for (i, tok) in s.split(',').map(str::trim).enumerate() {
            if tok.is_empty() {
                return Err(Error::Parse(format!("empty component in label `{s}`")));
            }
            if let Ok(p) = tok.parse::<Polarization>() {
                if label.polarization.replace(p).is_some() {
                    return Err(Error::Parse(format!("duplicate polarization in `{s}`")));
                }
            } else if let Ok(a) = tok.parse::<Ancilla>() {
                if label.ancilla.replace(a).is_some() {
                    return Err(Error::Parse(format!("duplicate ancilla in `{s}`")));
                }
            } else if i == 0 {
                label.path = Some(tok.to_string());
            } else {
                return Err(Error::Parse(format!(
                    "unexpected component `{tok}` in `{s}`"
                )));
            }
        }
        Ok(label)
    }
}

/// Factor layout of a composite space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Space {
    paths: Option<Vec<String>>,
    polarization: bool,
    ancilla: bool,
}

impl Space {
    pub fn new(paths: Option<Vec<String>>, polarization: bool, ancilla: bool) -> Result<Self> {
        if let Some(paths) = &paths {
            if paths.is_empty() {
                return Err(Error::InvalidSpace("empty path factor".into()));
            }
            let unique: BTreeSet<&String> = paths.iter().collect();
            if unique.len() != paths.len() {
                return Err(Error::InvalidSpace("duplicate path labels".into()));
            }
        } else if !polarization && !ancilla {
            return Err(Error::InvalidSpace(
                "a space needs at least one factor".into(),
            ));
        }
        Ok(Self {
            paths,
            polarization,
            ancilla,
        })
    }

    pub fn paths<S: Into<String>>(paths: impl IntoIterator<Item = S>) -> Result<Self> {
        Self::new(
            Some(paths.into_iter().map(Into::into).collect()),
            false,
            false,
        )
    }

    pub fn polarization_only() -> Self {
        Self {
            paths: None,
            polarization: true,
            ancilla: false,
        }
    }

    pub fn ancilla_only() -> Self {
        Self {
            paths: None,
            polarization: false,
            ancilla: true,
        }
    }

    pub fn path_labels(&self) -> &[String] {
        self.paths.as_deref().unwrap_or(&[])
    }

    pub fn has(&self, factor: Factor) -> bool {
        match factor {
            Factor::Path => self.paths.is_some(),
            Factor::Polarization => self.polarization,
            Factor::Ancilla => self.ancilla,
        }
    }

    pub fn factors(&self) -> Vec<Factor> {
        [Factor::Path, Factor::Polarization, Factor::Ancilla]
            .into_iter()
            .filter(|f| self.has(*f))
            .collect()
    }

    pub fn path_dim(&self) -> usize {
        self.paths.as_ref().map_or(1, Vec::len)
    }

    pub fn pol_dim(&self) -> usize {
        if self.polarization {
            2
        } else {
            1
        }
    }

    pub fn anc_dim(&self) -> usize {
        if self.ancilla {
            2
        } else {
            1
        }
    }

    /// Dimension of the internal (polarization x ancilla) block per path.
    pub fn inner_dim(&self) -> usize {
        self.pol_dim() * self.anc_dim()
    }

    pub fn dim(&self) -> usize {
        self.path_dim() * self.inner_dim()
    }

    pub fn path_index(&self, name: &str) -> Option<usize> {
        self.paths.as_ref()?.iter().position(|p| p == name)
    }

    pub fn index(&self, path: usize, pol: usize, anc: usize) -> usize {
        (path * self.pol_dim() + pol) * self.anc_dim() + anc
    }

    /// Splits a dense index into (path, polarization, ancilla) indices.
    pub fn split(&self, idx: usize) -> (usize, usize, usize) {
        let anc = idx % self.anc_dim();
        let rest = idx / self.anc_dim();
        (rest / self.pol_dim(), rest % self.pol_dim(), anc)
    }

    pub fn index_of(&self, label: &BasisLabel) -> Result<usize> {
        let missing = || Error::UnknownLabel(label.to_string());
        let path = match (&self.paths, &label.path) {
            (Some(_), Some(p)) => self.path_index(p).ok_or_else(missing)?,
            (None, None) => 0,
            _ => return Err(missing()),
        };
        let pol = match (self.polarization, label.polarization) {
            (true, Some(p)) => p.index(),
            (false, None) => 0,
            _ => return Err(missing()),
        };
        let anc = match (self.ancilla, label.ancilla) {
            (true, Some(a)) => a.index(),
            (false, None) => 0,
            _ => return Err(missing()),
        };
        Ok(self.index(path, pol, anc))
    }

    pub fn label(&self, idx: usize) -> BasisLabel {
        let (p, pol, anc) = self.split(idx);
        BasisLabel {
            path: self.paths.as_ref().map(|v| v[p].clone()),
            polarization: self.polarization.then(|| Polarization::ALL[pol]),
            ancilla: self.ancilla.then(|| Ancilla::ALL[anc]),
        }
    }

    pub fn labels(&self) -> impl Iterator<Item = BasisLabel> + '_ {
        (0..self.dim()).map(|i| self.label(i))
    }

    /// Product space. Fails if both spaces carry the same factor.
    pub fn tensor(&self, other: &Space) -> Result<Space> {
        for f in self.factors() {
            if other.has(f) {
                return Err(Error::OverlappingFactors(f.to_string()));
            }
        }
        Ok(Space {
            paths: self.paths.clone().or_else(|| other.paths.clone()),
            polarization: self.polarization || other.polarization,
            ancilla: self.ancilla || other.ancilla,
        })
    }

    /// The space made of a single factor of `self`.
    pub fn factor_space(&self, factor: Factor) -> Result<Space> {
        if !self.has(factor) {
            return Err(Error::FactorAbsent(factor.to_string()));
        }
        Ok(match factor {
            Factor::Path => Space {
                paths: self.paths.clone(),
                polarization: false,
                ancilla: false,
            },
            Factor::Polarization => Space::polarization_only(),
            Factor::Ancilla => Space::ancilla_only(),
        })
    }

    /// Index of the basis vector along `factor` for a dense index.
    pub(crate) fn factor_coord(&self, idx: usize, factor: Factor) -> usize {
        let (p, pol, anc) = self.split(idx);
        match factor {
            Factor::Path => p,
            Factor::Polarization => pol,
            Factor::Ancilla => anc,
        }
    }
}

/// A (not necessarily normalized) pure state over a [`Space`].
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    space: Arc<Space>,
    amplitudes: Vec<Complex64>,
    normalized: bool,
}

impl PureState {
    pub fn from_vec(space: Arc<Space>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::SpaceMismatch(format!(
                "{} amplitudes for a space of dimension {}",
                amplitudes.len(),
                space.dim()
            )));
        }
        Ok(Self::new_unchecked(space, amplitudes))
    }

    pub(crate) fn new_unchecked(space: Arc<Space>, amplitudes: Vec<Complex64>) -> Self {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        Self {
            space,
            amplitudes,
            normalized: (norm - 1.0).abs() <= EXACT_TOL,
        }
    }

    pub fn zero(space: Arc<Space>) -> Self {
        let dim = space.dim();
        Self::new_unchecked(space, vec![ZERO; dim])
    }

    pub fn basis(space: Arc<Space>, label: &BasisLabel) -> Result<Self> {
        let idx = space.index_of(label)?;
        let mut amps = vec![ZERO; space.dim()];
        amps[idx] = ONE;
        Ok(Self::new_unchecked(space, amps))
    }

    /// Builds a state from `(label, amplitude)` pairs; repeated labels add.
    pub fn from_terms<'a>(
        space: Arc<Space>,
        terms: impl IntoIterator<Item = (&'a BasisLabel, Complex64)>,
    ) -> Result<Self> {
        let mut amps = vec![ZERO; space.dim()];
        for (label, amp) in terms {
            amps[space.index_of(label)?] += amp;
        }
        Ok(Self::new_unchecked(space, amps))
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn amplitude(&self, label: &BasisLabel) -> Result<Complex64> {
        Ok(self.amplitudes[self.space.index_of(label)?])
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scale(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new_unchecked(
            self.space.clone(),
            self.amplitudes.iter().map(|a| a * c).collect(),
        )
    }

    pub fn add(&self, other: &PureState) -> Result<Self> {
        self.check_space(other)?;
        Ok(Self::new_unchecked(
            self.space.clone(),
            self.amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    fn check_space(&self, other: &PureState) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch(
                "states are defined on different spaces".into(),
            ));
        }
        Ok(())
    }

    /// `<self|ket>`, conjugate-linear in `self`.
    pub fn inner(&self, ket: &PureState) -> Result<Complex64> {
        self.check_space(ket)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&ket.amplitudes)
            .map(|(b, k)| b.conj() * k)
            .sum())
    }

    pub fn tensor(&self, other: &PureState) -> Result<Self> {
        let space = Arc::new(self.space.tensor(&other.space)?);
        let mut amps = vec![ZERO; space.dim()];
        for (idx, amp) in amps.iter_mut().enumerate() {
            let (p, pol, anc) = space.split(idx);
            let pick = |s: &Space| {
                s.index(
                    if s.paths.is_some() { p } else { 0 },
                    if s.polarization { pol } else { 0 },
                    if s.ancilla { anc } else { 0 },
                )
            };
            *amp = self.amplitudes[pick(&self.space)] * other.amplitudes[pick(&other.space)];
        }
        Ok(Self::new_unchecked(space, amps))
    }

    /// Largest amplitude-wise distance to `other`.
    pub fn max_abs_diff(&self, other: &PureState) -> Result<f64> {
        self.check_space(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `|<self|other>| / (|self| |other|)`; 1 iff equal up to a global phase.
    pub fn fidelity_modulus(&self, other: &PureState) -> Result<f64> {
        let denom = self.norm() * other.norm();
        if denom == 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(self.inner(other)?.norm() / denom)
    }

    /// Nonzero amplitudes keyed by label, in basis order.
    pub fn terms(&self) -> Vec<(BasisLabel, Complex64)> {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > 0.0)
            .map(|(i, a)| (self.space.label(i), *a))
            .collect()
    }
}

impl fmt::Display for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = terms
            .iter()
            .map(|(l, a)| format!("({:.6}{:+.6}i)|{}>", a.re, a.im, l))
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Selects a polarization factor for a local projector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PolarizationFilter {
    H,
    V,
    /// Rank-1 projector onto [`CIRCULAR_STATE`].
    #[serde(rename = "circular")]
    Circular,
}

/// Circular polarization convention: `(|H> + i|V>)/sqrt(2)`.
pub const CIRCULAR_STATE: [Complex64; 2] = [
    Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
    Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2),
];

/// Human-readable form of [`CIRCULAR_STATE`], echoed in run records.
pub const CIRCULAR_CONVENTION: &str = "(|H> + i|V>)/sqrt(2)";

type Mat2 = [[Complex64; 2]; 2];

fn rank_one(v: [Complex64; 2]) -> Mat2 {
    let mut m = [[ZERO; 2]; 2];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = v[i] * v[j].conj();
        }
    }
    m
}

impl PolarizationFilter {
    fn matrix(self) -> Mat2 {
        match self {
            PolarizationFilter::H => rank_one([ONE, ZERO]),
            PolarizationFilter::V => rank_one([ZERO, ONE]),
            PolarizationFilter::Circular => rank_one(CIRCULAR_STATE),
        }
    }
}

impl fmt::Display for PolarizationFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolarizationFilter::H => "H",
            PolarizationFilter::V => "V",
            PolarizationFilter::Circular => "circ",
        })
    }
}

/// Product of per-factor projectors: a diagonal projector onto a set of
/// paths, and optional rank-1 projectors on the polarization and ancilla
/// factors. `None` means identity on that factor.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalProjector {
    paths: Option<BTreeSet<String>>,
    polarization: Option<PolarizationFilter>,
    ancilla: Option<Ancilla>,
}

impl LocalProjector {
    pub fn identity() -> Self {
        Self {
            paths: None,
            polarization: None,
            ancilla: None,
        }
    }

    pub fn on_path(name: impl Into<String>) -> Self {
        Self::on_paths([name.into()])
    }

    pub fn on_paths<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        Self {
            paths: Some(names.into_iter().map(Into::into).collect()),
            polarization: None,
            ancilla: None,
        }
    }

    pub fn with_polarization(mut self, filter: PolarizationFilter) -> Self {
        self.polarization = Some(filter);
        self
    }

    pub fn with_ancilla(mut self, level: Ancilla) -> Self {
        self.ancilla = Some(level);
        self
    }

    pub fn paths(&self) -> Option<&BTreeSet<String>> {
        self.paths.as_ref()
    }

    /// Applies the projector; the result is generally unnormalized.
    pub fn apply(&self, state: &PureState) -> Result<PureState> {
        let space = state.space();
        let path_mask: Vec<bool> = match &self.paths {
            None => vec![true; space.path_dim()],
            Some(set) => {
                if !space.has(Factor::Path) {
                    return Err(Error::FactorAbsent(Factor::Path.to_string()));
                }
                for p in set {
                    if space.path_index(p).is_none() {
                        return Err(Error::UnknownLabel(p.clone()));
                    }
                }
                space
                    .path_labels()
                    .iter()
                    .map(|p| set.contains(p))
                    .collect()
            }
        };
        if self.polarization.is_some() && !space.has(Factor::Polarization) {
            return Err(Error::FactorAbsent(Factor::Polarization.to_string()));
        }
        if self.ancilla.is_some() && !space.has(Factor::Ancilla) {
            return Err(Error::FactorAbsent(Factor::Ancilla.to_string()));
        }

        let mut amps: Vec<Complex64> = state
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(i, a)| {
                if path_mask[space.split(i).0] {
                    *a
                } else {
                    ZERO
                }
            })
            .collect();
        if let Some(filter) = self.polarization {
            apply_factor(space, &mut amps, Factor::Polarization, &filter.matrix());
        }
        if let Some(level) = self.ancilla {
            let v = match level {
                Ancilla::Up => [ONE, ZERO],
                Ancilla::Down => [ZERO, ONE],
            };
            apply_factor(space, &mut amps, Factor::Ancilla, &rank_one(v));
        }
        Ok(PureState::new_unchecked(space.clone(), amps))
    }

    pub fn description(&self) -> String {
        let mut parts = Vec::new();
        match &self.paths {
            Some(set) => parts.push(format!(
                "P[{}]",
                set.iter().cloned().collect::<Vec<_>>().join("+")
            )),
            None if self.polarization.is_none() && self.ancilla.is_none() => {
                parts.push("1".to_string())
            }
            None => {}
        }
        if let Some(p) = self.polarization {
            parts.push(format!("P[{p}]"));
        }
        if let Some(a) = self.ancilla {
            parts.push(format!("P[{a}]"));
        }
        parts.join("·")
    }
}

/// Applies a 2x2 matrix on one two-level factor of the space.
pub(crate) fn apply_factor(space: &Space, amps: &mut [Complex64], factor: Factor, m: &Mat2) {
    for idx in 0..amps.len() {
        if space.factor_coord(idx, factor) != 0 {
            continue;
        }
        let (p, pol, anc) = space.split(idx);
        let partner = match factor {
            Factor::Polarization => space.index(p, 1, anc),
            Factor::Ancilla => space.index(p, pol, 1),
            Factor::Path => unreachable!("path factor is not two-level"),
        };
        let (a0, a1) = (amps[idx], amps[partner]);
        amps[idx] = m[0][0] * a0 + m[0][1] * a1;
        amps[partner] = m[1][0] * a0 + m[1][1] * a1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn abc() -> Arc<Space> {
        Arc::new(Space::paths(["A", "B", "C"]).unwrap())
    }

    fn nested_pair(space: &Arc<Space>) -> (PureState, PureState) {
        let r2 = 2f64.sqrt();
        let psi = PureState::from_vec(
            space.clone(),
            vec![c(r2 / 2.0, 0.0), c(0.5, 0.0), c(0.5, 0.0)],
        )
        .unwrap();
        let phi = PureState::from_vec(
            space.clone(),
            vec![c(r2 / 2.0, 0.0), c(0.5, 0.0), c(-0.5, 0.0)],
        )
        .unwrap();
        (psi, phi)
    }

    #[test]
    fn label_round_trip() {
        let l = BasisLabel::path("B")
            .with_polarization(Polarization::V)
            .with_ancilla(Ancilla::Down);
        assert_eq!(l.to_string(), "B,V,down");
        assert_eq!(l.to_string().parse::<BasisLabel>().unwrap(), l);
        assert!("B,Q".parse::<BasisLabel>().is_err());
    }

    #[test]
    fn duplicate_paths_rejected() {
        assert!(Space::paths(["A", "A"]).is_err());
        assert!(Space::new(None, false, false).is_err());
    }

    #[test]
    fn inner_product_examples() {
        let space = abc();
        let (psi, phi) = nested_pair(&space);
        assert!((psi.inner(&psi).unwrap() - 1.0).norm() < EXACT_TOL);
        // 2/4 + 1/4 - 1/4
        assert!((phi.inner(&psi).unwrap() - 0.5).norm() < EXACT_TOL);
        let a = PureState::basis(space.clone(), &BasisLabel::path("A")).unwrap();
        let b = PureState::basis(space, &BasisLabel::path("B")).unwrap();
        assert_eq!(a.inner(&b).unwrap(), ZERO);
    }

    #[test]
    fn inner_product_space_mismatch() {
        let a = PureState::basis(abc(), &BasisLabel::path("A")).unwrap();
        let other = Arc::new(Space::paths(["A", "B"]).unwrap());
        let b = PureState::basis(other, &BasisLabel::path("A")).unwrap();
        assert!(matches!(a.inner(&b), Err(Error::SpaceMismatch(_))));
    }

    #[test]
    fn apply_examples() {
        let space = abc();
        let (psi, _) = nested_pair(&space);
        let pa = LocalProjector::on_path("A").apply(&psi).unwrap();
        let expected =
            PureState::from_vec(space.clone(), vec![c(FRAC_1_SQRT_2, 0.0), ZERO, ZERO]).unwrap();
        assert!(pa.max_abs_diff(&expected).unwrap() < EXACT_TOL);
        assert_eq!(LocalProjector::identity().apply(&psi).unwrap(), psi);
        let a = PureState::basis(space, &BasisLabel::path("A")).unwrap();
        assert_eq!(
            LocalProjector::on_path("B").apply(&a).unwrap().norm_sqr(),
            0.0
        );
    }

    #[test]
    fn apply_on_absent_factor_fails() {
        let a = PureState::basis(abc(), &BasisLabel::path("A")).unwrap();
        let p = LocalProjector::identity().with_polarization(PolarizationFilter::H);
        assert!(matches!(p.apply(&a), Err(Error::FactorAbsent(_))));
        let q = LocalProjector::on_path("Z");
        assert!(matches!(q.apply(&a), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn tensor_examples() {
        let paths = Arc::new(Space::paths(["A", "B"]).unwrap());
        let pol = Arc::new(Space::polarization_only());
        let a = PureState::basis(paths.clone(), &BasisLabel::path("A")).unwrap();
        let b = PureState::basis(paths.clone(), &BasisLabel::path("B")).unwrap();
        let h = PureState::from_vec(pol.clone(), vec![ONE, ZERO]).unwrap();
        let v = PureState::from_vec(pol.clone(), vec![ZERO, ONE]).unwrap();

        let ah = a.tensor(&h).unwrap();
        let label = BasisLabel::path("A").with_polarization(Polarization::H);
        assert_eq!(ah.amplitude(&label).unwrap(), ONE);
        assert!((ah.norm_sqr() - 1.0).abs() < EXACT_TOL);

        let plus = a.add(&b).unwrap().scale(c(FRAC_1_SQRT_2, 0.0));
        let ph = plus.tensor(&h).unwrap();
        let bh = BasisLabel::path("B").with_polarization(Polarization::H);
        assert!((ph.amplitude(&bh).unwrap() - FRAC_1_SQRT_2).norm() < EXACT_TOL);
        assert!(ph.is_normalized());

        // (|A,H> + |B,V>)/sqrt2
        let marked = a
            .tensor(&h)
            .unwrap()
            .add(&b.tensor(&v).unwrap())
            .unwrap()
            .scale(c(FRAC_1_SQRT_2, 0.0));
        assert!((marked.norm() - 1.0).abs() < EXACT_TOL);
        assert!(marked.is_normalized());

        assert!(matches!(h.tensor(&v), Err(Error::OverlappingFactors(_))));
    }

    #[test]
    fn circular_projector_is_rank_one_idempotent() {
        let m = PolarizationFilter::Circular.matrix();
        for i in 0..2 {
            for j in 0..2 {
                let sq: Complex64 = (0..2).map(|k| m[i][k] * m[k][j]).sum();
                assert!((sq - m[i][j]).norm() < EXACT_TOL);
                assert!((m[i][j] - m[j][i].conj()).norm() < EXACT_TOL);
            }
        }
        let trace = m[0][0] + m[1][1];
        assert!((trace - 1.0).norm() < EXACT_TOL);
    }

    fn full_space() -> Arc<Space> {
        Arc::new(Space::new(Some(vec!["A".into(), "B".into(), "C".into()]), true, true).unwrap())
    }

    fn arb_state() -> impl Strategy<Value = PureState> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 12).prop_map(|v| {
            PureState::from_vec(full_space(), v.into_iter().map(|(r, i)| c(r, i)).collect())
                .unwrap()
        })
    }

    fn arb_projector() -> impl Strategy<Value = LocalProjector> {
        let paths = prop::option::of(prop::sample::subsequence(vec!["A", "B", "C"], 0..=3));
        let pol = prop::option::of(prop::sample::select(vec![
            PolarizationFilter::H,
            PolarizationFilter::V,
            PolarizationFilter::Circular,
        ]));
        let anc = prop::option::of(prop::sample::select(vec![Ancilla::Up, Ancilla::Down]));
        (paths, pol, anc).prop_map(|(paths, pol, anc)| {
            let mut p = match paths {
                Some(v) => LocalProjector::on_paths(v),
                None => LocalProjector::identity(),
            };
            if let Some(f) = pol {
                p = p.with_polarization(f);
            }
            if let Some(a) = anc {
                p = p.with_ancilla(a);
            }
            p
        })
    }

    proptest! {
        #[test]
        fn inner_product_is_hermitian(phi in arb_state(), psi in arb_state()) {
            let a = phi.inner(&psi).unwrap();
            let b = psi.inner(&phi).unwrap();
            prop_assert!((a - b.conj()).norm() < EXACT_TOL);
        }

        #[test]
        fn projectors_are_idempotent_and_hermitian(p in arb_projector(), phi in arb_state(), psi in arb_state()) {
            let once = p.apply(&psi).unwrap();
            let twice = p.apply(&once).unwrap();
            prop_assert!(once.max_abs_diff(&twice).unwrap() < EXACT_TOL);
            // <phi|P psi> = <P phi|psi>
            let l = phi.inner(&once).unwrap();
            let r = p.apply(&phi).unwrap().inner(&psi).unwrap();
            prop_assert!((l - r).norm() < EXACT_TOL);
        }

        #[test]
        fn tensor_norm_is_product(
            p in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3),
            q in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2),
        ) {
            let s1 = PureState::from_vec(abc(), p.into_iter().map(|(r, i)| c(r, i)).collect()).unwrap();
            let s2 = PureState::from_vec(Arc::new(Space::polarization_only()), q.into_iter().map(|(r, i)| c(r, i)).collect()).unwrap();
            let t = s1.tensor(&s2).unwrap();
            prop_assert!((t.norm() - s1.norm() * s2.norm()).abs() < EXACT_TOL);
        }
    }
}
