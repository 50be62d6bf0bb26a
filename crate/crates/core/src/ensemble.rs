//! Monte Carlo ensembles of pre- and post-selected runs.
//!
//! Every trial draws a detector outcome from the exact outcome
//! probabilities and, when the outcome is the configured post-selection,
//! samples every coupled pointer from the exact conditional joint density
//! (one pointer at a time, each conditioned on the ones already drawn).
//! Trial `i` seeds its own generator from `(seed, i)`, so results do not
//! depend on how trials are spread over threads.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, PostSelection};
use crate::error::{Error, Result};
use crate::output::csv_opt;
use crate::pointer::{
    couple, outcome_probabilities, postselect, Coupling, PointerConfig, PointerState,
};
use crate::scenarios;
use crate::state::PureState;

/// Points of the inverse-CDF grid per pointer.
pub const GRID_POINTS: usize = 4096;
/// Grid padding beyond the extreme pointer centers, in pointer widths.
pub const GRID_PADDING: f64 = 6.0;
/// Generator and sub-seeding scheme, echoed in run records.
pub const RNG_SCHEME: &str = "ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(trial)))";

pub const CSV_HEADER: &str =
    "point,weak_value_re,weak_value_im,predicted_shift,estimated_shift,stderr,n_postselected,z";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCoupling {
    pub point: String,
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub scenario: String,
    pub post: String,
    pub couplings: Vec<PointCoupling>,
    pub width: f64,
    pub trials: u64,
    pub seed: u64,
    /// Caps worker threads; results are identical for any value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl EnsembleConfig {
    /// Couples every marked point of a scenario with the same strength.
    pub fn all_points(
        scenario: &str,
        post: &str,
        epsilon: f64,
        width: f64,
        trials: u64,
        seed: u64,
    ) -> Result<Self> {
        let preset = scenarios::load(scenario)?;
        Ok(Self {
            scenario: scenario.to_string(),
            post: post.to_string(),
            couplings: preset
                .circuit
                .marked_points()
                .keys()
                .map(|p| PointCoupling {
                    point: p.clone(),
                    epsilon,
                })
                .collect(),
            width,
            trials,
            seed,
            threads: None,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidEnsemble("trials must be at least 1".into()));
        }
        if let Some(c) = self.couplings.iter().find(|c| !c.epsilon.is_finite()) {
            return Err(Error::InvalidEnsemble(format!(
                "non-finite epsilon at {}",
                c.point
            )));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidEnsemble("threads must be at least 1".into()));
        }
        Ok(())
    }

    pub fn pointer_couplings(&self) -> Result<Vec<Coupling>> {
        self.couplings
            .iter()
            .map(|c| {
                Ok(Coupling::new(
                    c.point.clone(),
                    PointerConfig::new(self.width, c.epsilon)?,
                ))
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointEstimate {
    pub point: String,
    pub epsilon: f64,
    /// Sample mean of the pointer position over post-selected trials.
    pub mean: Option<f64>,
    /// Sample standard deviation over `sqrt(count)`; needs two samples.
    pub stderr: Option<f64>,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleResult {
    pub scenario: String,
    pub post: String,
    pub width: f64,
    pub trials: u64,
    pub seed: u64,
    pub rng: &'static str,
    pub points: Vec<PointEstimate>,
    pub detector_counts: BTreeMap<String, u64>,
    pub postselected: u64,
    pub postselection_rate: f64,
    /// Exact probability of the post-selection with the pointers coupled.
    pub exact_postselection_probability: f64,
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stateless per-trial seed.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    splitmix64(seed ^ splitmix64(trial))
}

/// Neumaier-compensated sum.
#[derive(Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Grid inverse-CDF data for one pointer in the sampling chain.
struct PointerGrid {
    lo: f64,
    dx: f64,
    width: f64,
    /// Per-term centers of this pointer.
    centers: Vec<f64>,
    /// For each term pair `(i, j)`: index into `cumulative`.
    pair_mean: Vec<usize>,
    /// For each pair: overlaps of this pointer and every later one.
    pair_factor: Vec<f64>,
    /// Trapezoid cumulative integral of `exp(-(x-m)²/Δ²)` for each
    /// distinct pair mean `m`, on the grid.
    cumulative: Vec<Vec<f64>>,
}

impl PointerGrid {
    fn cdf_at(&self, coef: &[f64], j: usize) -> f64 {
        coef.iter()
            .zip(&self.cumulative)
            .map(|(c, cum)| c * cum[j])
            .sum()
    }

    /// Inverts the piecewise-linear grid CDF at fraction `u`.
    fn invert(&self, coef: &[f64], u: f64) -> f64 {
        let n = GRID_POINTS;
        let total = self.cdf_at(coef, n - 1);
        let target = u * total;
        // Last node whose CDF does not exceed the target.
        let (mut lo, mut hi) = (0usize, n - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.cdf_at(coef, mid) <= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (f0, f1) = (self.cdf_at(coef, lo), self.cdf_at(coef, hi));
        let frac = if f1 > f0 {
            ((target - f0) / (f1 - f0)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        self.lo + self.dx * (lo as f64 + frac)
    }
}

/// Draws all pointer positions from the exact joint density of a
/// post-selected pointer state by chained conditional inverse-CDF draws.
pub struct PointerSampler {
    weights: Vec<Complex64>,
    grids: Vec<PointerGrid>,
}

impl PointerSampler {
    pub fn new(state: &PointerState) -> Result<Self> {
        if state.norm_sqr() <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        let t = state.terms.len();
        let k_total = state.num_pointers();
        let mut grids = Vec::with_capacity(k_total);
        for k in 0..k_total {
            let width = state.widths[k];
            let centers: Vec<f64> = state.terms.iter().map(|(_, c)| c[k]).collect();
            let min = centers.iter().copied().fold(f64::INFINITY, f64::min);
            let max = centers.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = min - GRID_PADDING * width;
            let hi = max + GRID_PADDING * width;
            let dx = (hi - lo) / (GRID_POINTS - 1) as f64;

            let mut means: Vec<f64> = Vec::new();
            let mut pair_mean = Vec::with_capacity(t * t);
            let mut pair_factor = Vec::with_capacity(t * t);
            for i in 0..t {
                for j in 0..t {
                    let m = (centers[i] + centers[j]) / 2.0;
                    let idx = match means.iter().position(|x| x.to_bits() == m.to_bits()) {
                        Some(idx) => idx,
                        None => {
                            means.push(m);
                            means.len() - 1
                        }
                    };
                    pair_mean.push(idx);
                    let later: f64 = (k..k_total)
                        .map(|l| {
                            let (a, b) = (state.terms[i].1[l], state.terms[j].1[l]);
                            crate::pointer::gaussian_overlap(state.widths[l], a, b)
                        })
                        .product();
                    pair_factor.push(later);
                }
            }
            let cumulative = means
                .iter()
                .map(|m| {
                    let f = |j: usize| {
                        let x = lo + dx * j as f64;
                        (-(x - m).powi(2) / (width * width)).exp()
                    };
                    let mut cum = Vec::with_capacity(GRID_POINTS);
                    let mut acc = 0.0;
                    let mut prev = f(0);
                    cum.push(0.0);
                    for j in 1..GRID_POINTS {
                        let cur = f(j);
                        acc += 0.5 * (prev + cur) * dx;
                        cum.push(acc);
                        prev = cur;
                    }
                    cum
                })
                .collect();
            grids.push(PointerGrid {
                lo,
                dx,
                width,
                centers,
                pair_mean,
                pair_factor,
                cumulative,
            });
        }
        Ok(Self {
            weights: state.terms.iter().map(|(w, _)| *w).collect(),
            grids,
        })
    }

    /// One joint draw, in pointer order.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let t = self.weights.len();
        let mut weights = self.weights.clone();
        let mut out = Vec::with_capacity(self.grids.len());
        for grid in &self.grids {
            let mut coef = vec![0.0; grid.cumulative.len()];
            for i in 0..t {
                for j in 0..t {
                    let p = i * t + j;
                    coef[grid.pair_mean[p]] +=
                        (weights[i].conj() * weights[j]).re * grid.pair_factor[p];
                }
            }
            let u: f64 = rng.random();
            let x = grid.invert(&coef, u);
            let w2 = 2.0 * grid.width * grid.width;
            for (w, a) in weights.iter_mut().zip(&grid.centers) {
                *w *= (-(x - a).powi(2) / w2).exp();
            }
            out.push(x);
        }
        out
    }
}

/// Runs an ensemble on an explicit circuit.
pub fn simulate(
    circuit: &Circuit,
    pre: &PureState,
    post: &PostSelection,
    couplings: &[Coupling],
    trials: u64,
    seed: u64,
    threads: Option<usize>,
) -> Result<SimulationOutput> {
    let joint = couple(circuit, pre, couplings)?;
    let outcomes = outcome_probabilities(circuit, &joint)?;
    let target = outcomes
        .iter()
        .position(|(o, _)| o == post)
        .ok_or_else(|| Error::UnknownDetector(post.to_string()))?;
    let mut cumulative = Vec::with_capacity(outcomes.len());
    let mut acc = 0.0;
    for (_, p) in &outcomes {
        acc += p;
        cumulative.push(acc);
    }
    let selected = postselect(circuit, &joint, post)?;
    let sampler = if selected.probability > 0.0 {
        Some(PointerSampler::new(&selected.pointers)?)
    } else {
        None
    };

    let run_trial = |i: u64| -> (usize, Option<Vec<f64>>) {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, i));
        let u: f64 = rng.random::<f64>() * acc;
        let outcome = cumulative
            .iter()
            .position(|c| u < *c)
            .unwrap_or(cumulative.len() - 1);
        let positions = match (&sampler, outcome == target) {
            (Some(s), true) => Some(s.sample(&mut rng)),
            _ => None,
        };
        (outcome, positions)
    };
    let draws: Vec<(usize, Option<Vec<f64>>)> = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::ThreadPool(e.to_string()))?
            .install(|| (0..trials).into_par_iter().map(run_trial).collect()),
        None => (0..trials).into_par_iter().map(run_trial).collect(),
    };

    let mut counts = vec![0u64; outcomes.len()];
    let k_total = couplings.len();
    let mut samples: Vec<Vec<f64>> = vec![Vec::new(); k_total];
    for (outcome, positions) in draws {
        counts[outcome] += 1;
        if let Some(xs) = positions {
            for (k, x) in xs.into_iter().enumerate() {
                samples[k].push(x);
            }
        }
    }
    let postselected = counts[target];
    let points = couplings
        .iter()
        .zip(&samples)
        .map(|(c, xs)| estimate(c, xs))
        .collect();
    Ok(SimulationOutput {
        points,
        detector_counts: outcomes
            .iter()
            .zip(&counts)
            .map(|((o, _), n)| (o.to_string(), *n))
            .collect(),
        outcome_probabilities: outcomes.iter().map(|(o, p)| (o.to_string(), *p)).collect(),
        postselected,
        exact_postselection_probability: selected.probability,
        pointers: selected.pointers,
    })
}

fn estimate(coupling: &Coupling, xs: &[f64]) -> PointEstimate {
    let n = xs.len();
    let mean = (n > 0).then(|| {
        let mut s = CompensatedSum::default();
        xs.iter().for_each(|x| s.add(*x));
        s.value() / n as f64
    });
    let stderr = match (mean, n) {
        (Some(m), n) if n >= 2 => {
            let mut s = CompensatedSum::default();
            xs.iter().for_each(|x| s.add((x - m).powi(2)));
            Some((s.value() / (n - 1) as f64).sqrt() / (n as f64).sqrt())
        }
        _ => None,
    };
    PointEstimate {
        point: coupling.point.clone(),
        epsilon: coupling.config.epsilon(),
        mean,
        stderr,
        count: n as u64,
    }
}

/// Raw output of [`simulate`].
#[derive(Clone, Debug)]
pub struct SimulationOutput {
    pub points: Vec<PointEstimate>,
    pub detector_counts: BTreeMap<String, u64>,
    pub outcome_probabilities: BTreeMap<String, f64>,
    pub postselected: u64,
    pub exact_postselection_probability: f64,
    pub pointers: PointerState,
}

/// Runs the ensemble for a named scenario.
pub fn run_ensemble(cfg: &EnsembleConfig) -> Result<EnsembleResult> {
    cfg.validate()?;
    let preset = scenarios::load(&cfg.scenario)?;
    let post = preset.post(&cfg.post)?;
    let couplings = cfg.pointer_couplings()?;
    let out = simulate(
        &preset.circuit,
        &preset.pre,
        &post,
        &couplings,
        cfg.trials,
        cfg.seed,
        cfg.threads,
    )?;
    Ok(EnsembleResult {
        scenario: cfg.scenario.clone(),
        post: post.to_string(),
        width: cfg.width,
        trials: cfg.trials,
        seed: cfg.seed,
        rng: RNG_SCHEME,
        points: out.points,
        detector_counts: out.detector_counts,
        postselected: out.postselected,
        postselection_rate: out.postselected as f64 / cfg.trials as f64,
        exact_postselection_probability: out.exact_postselection_probability,
    })
}

/// One CSV row of an ensemble report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub point: String,
    pub weak_value_re: Option<f64>,
    pub weak_value_im: Option<f64>,
    /// `δ · Re(A_w)`.
    pub predicted_shift: Option<f64>,
    /// Exact conditional mean with all configured couplings in place;
    /// `None` when the outcome cannot occur.
    pub exact_shift: Option<f64>,
    pub estimated_shift: Option<f64>,
    pub stderr: Option<f64>,
    pub n_postselected: u64,
    /// `|estimated_shift| / stderr`.
    pub z: Option<f64>,
    /// First-order z expected for this many trials.
    pub z_predicted: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleReport {
    pub result: EnsembleResult,
    pub rows: Vec<ReportRow>,
}

impl EnsembleReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(128 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let fields = [
                r.point.clone(),
                csv_opt(r.weak_value_re),
                csv_opt(r.weak_value_im),
                csv_opt(r.predicted_shift),
                csv_opt(r.estimated_shift),
                csv_opt(r.stderr),
                r.n_postselected.to_string(),
                csv_opt(r.z),
            ];
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

/// First-order z for a point: the predicted shift over the standard error
/// expected from `trials * rate` post-selected samples of a pointer whose
/// position spread is `Δ/√2`.
pub fn predicted_z(predicted_shift: f64, width: f64, trials: u64, rate: f64) -> f64 {
    let sigma = width / std::f64::consts::SQRT_2;
    predicted_shift.abs() * (trials as f64 * rate).sqrt() / sigma
}

/// Runs the ensemble and joins it with exact and first-order predictions.
pub fn run_report(cfg: &EnsembleConfig) -> Result<EnsembleReport> {
    let result = run_ensemble(cfg)?;
    let preset = scenarios::load(&cfg.scenario)?;
    let post = preset.post(&cfg.post)?;
    let couplings = cfg.pointer_couplings()?;
    let joint = couple(&preset.circuit, &preset.pre, &couplings)?;
    let selected = postselect(&preset.circuit, &joint, &post)?;
    let rows = result
        .points
        .iter()
        .zip(&couplings)
        .map(|(est, c)| {
            let wv = match preset.weak_value(&post, &c.point) {
                Ok(wv) => Some(wv.value),
                Err(Error::ImpossiblePostSelection { .. }) => None,
                Err(e) => return Err(e),
            };
            let predicted = wv.map(|w| c.config.shift() * w.re);
            let exact_shift = if selected.probability > 0.0 {
                Some(selected.mean_shift(&c.point)?)
            } else {
                None
            };
            let z = match (est.mean, est.stderr) {
                (Some(m), Some(s)) if s > 0.0 => Some(m.abs() / s),
                _ => None,
            };
            Ok(ReportRow {
                point: c.point.clone(),
                weak_value_re: wv.map(|w| w.re),
                weak_value_im: wv.map(|w| w.im),
                predicted_shift: predicted,
                exact_shift,
                estimated_shift: est.mean,
                stderr: est.stderr,
                n_postselected: est.count,
                z,
                z_predicted: predicted.map(|p| {
                    predicted_z(
                        p,
                        cfg.width,
                        cfg.trials,
                        result.exact_postselection_probability,
                    )
                }),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleReport { result, rows })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointDetectability {
    pub point: String,
    /// `None` when fewer than two post-selected samples exist.
    pub z_observed: Option<f64>,
    pub z_predicted: Option<f64>,
    pub stderr_defined: bool,
}

/// Observed and predicted significance of each point's shift.
pub fn detectability(cfg: &EnsembleConfig) -> Result<Vec<PointDetectability>> {
    let report = run_report(cfg)?;
    Ok(report
        .rows
        .into_iter()
        .map(|r| PointDetectability {
            point: r.point,
            z_observed: r.z,
            z_predicted: r.z_predicted,
            stderr_defined: r.stderr.is_some(),
        })
        .collect())
}
