//! Two-state vectors, weak values and subsystem reduction.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::circuit::{Circuit, PostSelection};
use crate::error::{Error, Result};
use crate::state::{Factor, LocalProjector, PureState};

/// Below this `|<Phi|Psi>| / (|Phi| |Psi|)` a post-selection is impossible.
pub const IMPOSSIBLE_OVERLAP: f64 = 1e-10;

/// Forward and backward states at one slice, with their cached overlap.
#[derive(Clone, Debug)]
pub struct TwoStateVector {
    forward: PureState,
    backward: PureState,
    boundary: usize,
    overlap: Complex64,
}

impl TwoStateVector {
    /// Pairs two states, rejecting orthogonal ones.
    pub fn new(forward: PureState, backward: PureState, boundary: usize) -> Result<Self> {
        let overlap = backward.inner(&forward)?;
        let scale = forward.norm() * backward.norm();
        if scale == 0.0 || overlap.norm() < IMPOSSIBLE_OVERLAP * scale {
            return Err(Error::ImpossiblePostSelection {
                forward: Box::new(forward),
                backward: Box::new(backward),
            });
        }
        Ok(Self {
            forward,
            backward,
            boundary,
            overlap,
        })
    }

    pub fn forward(&self) -> &PureState {
        &self.forward
    }

    pub fn backward(&self) -> &PureState {
        &self.backward
    }

    pub fn boundary(&self) -> usize {
        self.boundary
    }

    /// `<Phi|Psi>`.
    pub fn overlap(&self) -> Complex64 {
        self.overlap
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeakValue {
    pub value: Complex64,
    pub operator: String,
}

/// Two-state vector at a boundary.
pub fn two_state_at_boundary(
    circuit: &Circuit,
    pre: &PureState,
    post: &PostSelection,
    boundary: usize,
) -> Result<TwoStateVector> {
    let forward = circuit.forward_propagate(pre, boundary)?;
    let backward = circuit.backward_propagate(post, boundary)?;
    TwoStateVector::new(forward, backward, boundary)
}

/// Two-state vector at the slice of a marked point.
pub fn two_state_at(
    circuit: &Circuit,
    pre: &PureState,
    post: &PostSelection,
    point: &str,
) -> Result<TwoStateVector> {
    let boundary = circuit.point(point)?.boundary;
    two_state_at_boundary(circuit, pre, post, boundary)
}

/// `<Phi|O|Psi> / <Phi|Psi>`.
pub fn weak_value(tsv: &TwoStateVector, op: &LocalProjector) -> Result<WeakValue> {
    let numerator = tsv.backward.inner(&op.apply(&tsv.forward)?)?;
    Ok(WeakValue {
        value: numerator / tsv.overlap,
        operator: op.description(),
    })
}

/// Weak value of the projector onto a marked point's mode.
pub fn point_weak_value(
    circuit: &Circuit,
    pre: &PureState,
    post: &PostSelection,
    point: &str,
) -> Result<WeakValue> {
    let tsv = two_state_at(circuit, pre, post, point)?;
    let mut wv = weak_value(&tsv, &circuit.point_projector(point)?)?;
    wv.operator = format!("P_{point}");
    Ok(wv)
}

#[derive(Clone, Debug)]
pub enum Reduction {
    Reduced(TwoStateVector),
    /// The backward state is entangled across the kept factor.
    NotReducible,
}

impl Reduction {
    pub fn reduced(self) -> Option<TwoStateVector> {
        match self {
            Reduction::Reduced(t) => Some(t),
            Reduction::NotReducible => None,
        }
    }
}

/// Amplitudes as a `kept x rest` matrix, plus the two factor spaces.
fn bipartition(state: &PureState, keep: Factor) -> (Vec<Vec<Complex64>>, usize) {
    let space = state.space();
    let kdim = match keep {
        Factor::Path => space.path_dim(),
        Factor::Polarization => space.pol_dim(),
        Factor::Ancilla => space.anc_dim(),
    };
    let rdim = space.dim() / kdim;
    let mut m = vec![Vec::with_capacity(rdim); kdim];
    for (idx, amp) in state.amplitudes().iter().enumerate() {
        m[space.factor_coord(idx, keep)].push(*amp);
    }
    (m, rdim)
}

/// Writes `m ~ u v^T` if `m` has rank one (within tolerance).
fn rank_one_split(m: &[Vec<Complex64>]) -> Option<(Vec<Complex64>, Vec<Complex64>)> {
    let mut best = (0, 0, 0.0);
    for (i, row) in m.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            if x.norm() > best.2 {
                best = (i, j, x.norm());
            }
        }
    }
    let (i0, j0, max) = best;
    if max == 0.0 {
        return None;
    }
    let u: Vec<Complex64> = m.iter().map(|row| row[j0]).collect();
    let v: Vec<Complex64> = m[i0].iter().map(|x| x / m[i0][j0]).collect();
    for (i, row) in m.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            if (x - u[i] * v[j]).norm() > 1e-12 * max {
                return None;
            }
        }
    }
    Some((u, v))
}

/// Reduces a composite two-state vector to one factor.
///
/// Requires the backward state to be a product across `keep`; the kept
/// factor's effective forward state is then the partial overlap of the
/// forward state with the backward state of the rest. An entangled
/// backward state is reported as [`Reduction::NotReducible`].
pub fn reduce_subsystem(tsv: &TwoStateVector, keep: Factor) -> Result<Reduction> {
    let space = tsv.forward.space().clone();
    let kept_space = Arc::new(space.factor_space(keep)?);
    if space.factors().len() == 1 {
        return Ok(Reduction::Reduced(tsv.clone()));
    }
    let (back, _) = bipartition(&tsv.backward, keep);
    let Some((back_keep, back_rest)) = rank_one_split(&back) else {
        return Ok(Reduction::NotReducible);
    };
    let (fwd, _) = bipartition(&tsv.forward, keep);
    // <rest|Psi> as a vector over the kept factor.
    let rest_norm: f64 = back_rest.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let eff_forward: Vec<Complex64> = fwd
        .iter()
        .map(|row| {
            row.iter()
                .zip(&back_rest)
                .map(|(psi, r)| r.conj() * psi)
                .sum::<Complex64>()
                / rest_norm
        })
        .collect();
    let back_keep: Vec<Complex64> = back_keep.iter().map(|x| x * rest_norm).collect();

    let forward = PureState::from_vec(kept_space.clone(), eff_forward)?;
    let backward = PureState::from_vec(kept_space, back_keep)?;
    let forward = forward.normalize()?;
    let backward = backward.normalize()?;
    Ok(Reduction::Reduced(TwoStateVector::new(
        forward,
        backward,
        tsv.boundary,
    )?))
}
