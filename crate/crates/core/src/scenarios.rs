//! Frozen presets for the interferometer setups, with their expected
//! weak-value tables.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Deserialize;

use crate::circuit::{Circuit, OperatorSpec, PostSelection};
use crate::error::{Error, Result};
use crate::state::{BasisLabel, Factor, LocalProjector, PureState};
use crate::tsvf::{two_state_at, weak_value, WeakValue};

struct Embedded {
    id: &'static str,
    circuit: &'static str,
    expected: &'static str,
}

macro_rules! embed {
    ($id:literal) => {
        Embedded {
            id: $id,
            circuit: include_str!(concat!("../presets/", $id, ".circuit.json")),
            expected: include_str!(concat!("../presets/", $id, ".expected.json")),
        }
    };
}

const PRESETS: &[Embedded] = &[
    embed!("wheeler_open"),
    embed!("wheeler_closed"),
    embed!("nested_mzi"),
    embed!("polarization_marker"),
    embed!("ancilla_marker"),
];

pub fn list() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.id).collect()
}

/// Amplitudes keyed by basis label, complex numbers as `[re, im]`.
pub type AmplitudeMap = BTreeMap<String, [f64; 2]>;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceExpectation {
    pub post: String,
    pub boundary: usize,
    pub forward: AmplitudeMap,
    pub backward: AmplitudeMap,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReducedExpectation {
    pub post: String,
    pub keep: Factor,
    pub forward: AmplitudeMap,
    pub backward: AmplitudeMap,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpectedFile {
    scenario: String,
    provenance: String,
    weak_values: BTreeMap<String, BTreeMap<String, [f64; 2]>>,
    #[serde(default)]
    two_state: Vec<SliceExpectation>,
    #[serde(default)]
    reduced: Option<ReducedExpectation>,
}

#[derive(Clone, Debug)]
pub struct Preset {
    pub id: String,
    pub circuit: Circuit,
    pub pre: PureState,
    pub post_selections: Vec<(String, PostSelection)>,
    pub operators: BTreeMap<String, OperatorSpec>,
    /// Post-selection name to (point or operator name to weak value).
    pub expected: BTreeMap<String, BTreeMap<String, Complex64>>,
    pub two_state: Vec<SliceExpectation>,
    pub reduced: Option<ReducedExpectation>,
    pub provenance: String,
    /// The circuit definition as shipped.
    pub circuit_json: &'static str,
    pub expected_json: &'static str,
}

pub fn load(id: &str) -> Result<Preset> {
    let embedded = PRESETS
        .iter()
        .find(|p| p.id == id)
        .ok_or_else(|| Error::UnknownScenario(id.to_string()))?;
    let circuit = Circuit::from_json(embedded.circuit)?;
    let presets = circuit
        .definition()
        .presets
        .clone()
        .ok_or_else(|| Error::Parse(format!("preset `{id}` lacks selections")))?;
    let pre = circuit.input_state(&presets.pre.parse::<BasisLabel>()?)?;
    let post_selections = presets
        .post
        .iter()
        .map(|s| Ok((s.clone(), s.parse::<PostSelection>()?)))
        .collect::<Result<Vec<_>>>()?;
    let file: ExpectedFile = serde_json::from_str(embedded.expected)?;
    if file.scenario != id {
        return Err(Error::Parse(format!(
            "expected-values file names `{}`, not `{id}`",
            file.scenario
        )));
    }
    let expected = file
        .weak_values
        .into_iter()
        .map(|(post, table)| {
            let table = table
                .into_iter()
                .map(|(k, [re, im])| (k, Complex64::new(re, im)))
                .collect();
            (post, table)
        })
        .collect();
    Ok(Preset {
        id: id.to_string(),
        circuit,
        pre,
        post_selections,
        operators: presets.operators,
        expected,
        two_state: file.two_state,
        reduced: file.reduced,
        provenance: file.provenance,
        circuit_json: embedded.circuit,
        expected_json: embedded.expected,
    })
}

impl Preset {
    /// Looks up a post-selection by name. A bare detector name resolves
    /// when it matches exactly one allowed post-selection.
    pub fn post(&self, name: &str) -> Result<PostSelection> {
        if let Some((_, p)) = self.post_selections.iter().find(|(n, _)| n == name) {
            return Ok(p.clone());
        }
        let unknown = || Error::UnknownPostSelection {
            scenario: self.id.clone(),
            post: name.to_string(),
        };
        let parsed: PostSelection = name.parse().map_err(|_| unknown())?;
        if !self.circuit.detectors().contains_key(&parsed.detector) {
            return Err(Error::UnknownDetector(parsed.detector));
        }
        // Validates completeness against the circuit's factors.
        self.circuit.detector_state(&parsed)?;
        Ok(parsed)
    }

    /// Canonical name of a post-selection.
    pub fn post_name(&self, post: &PostSelection) -> String {
        post.to_string()
    }

    /// Point names followed by operator names.
    pub fn observables(&self) -> Vec<String> {
        self.circuit
            .marked_points()
            .keys()
            .cloned()
            .chain(self.operators.keys().cloned())
            .collect()
    }

    /// Projector for a point or named operator, and the point it lives at.
    pub fn observable(&self, name: &str) -> Result<(String, LocalProjector)> {
        if self.circuit.marked_points().contains_key(name) {
            return Ok((name.to_string(), self.circuit.point_projector(name)?));
        }
        let spec = self
            .operators
            .get(name)
            .ok_or_else(|| Error::UnknownOperator(name.to_string()))?;
        let mut op = self.circuit.point_projector(&spec.point)?;
        if let Some(p) = spec.polarization {
            op = op.with_polarization(p);
        }
        if let Some(a) = spec.ancilla {
            op = op.with_ancilla(a);
        }
        Ok((spec.point.clone(), op))
    }

    pub fn weak_value(&self, post: &PostSelection, name: &str) -> Result<WeakValue> {
        let (point, op) = self.observable(name)?;
        let tsv = two_state_at(&self.circuit, &self.pre, post, &point)?;
        let mut wv = weak_value(&tsv, &op)?;
        wv.operator = name.to_string();
        Ok(wv)
    }

    /// Fresh weak values for every point and operator.
    pub fn weak_value_table(&self, post: &PostSelection) -> Result<Vec<WeakValue>> {
        self.observables()
            .iter()
            .map(|name| self.weak_value(post, name))
            .collect()
    }

    /// Builds a state from an amplitude map on the circuit's space.
    pub fn state_from_map(&self, map: &AmplitudeMap) -> Result<PureState> {
        let labels = map
            .iter()
            .map(|(k, [re, im])| Ok((k.parse::<BasisLabel>()?, Complex64::new(*re, *im))))
            .collect::<Result<Vec<_>>>()?;
        PureState::from_terms(
            self.circuit.space().clone(),
            labels.iter().map(|(l, a)| (l, *a)),
        )
    }
}
