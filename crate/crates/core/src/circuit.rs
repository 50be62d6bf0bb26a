//! Declarative staged interferometer circuits.
//!
//! A circuit is a list of stages; every stage is a set of elements acting on
//! disjoint modes. Boundary `k` is the slice after stages `0..k` have been
//! applied, so boundary `0` is the input and boundary `stages.len()` the
//! final slice where detectors sit.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{
    apply_factor, Ancilla, BasisLabel, Factor, LocalProjector, Polarization, PureState, Space,
    EXACT_TOL,
};

type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Optical element. Angles are given in units of pi.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Element {
    /// `[[cos t, i e^{i phi} sin t], [i e^{-i phi} sin t, cos t]]` on `(modes[0], modes[1])`.
    BeamSplitter {
        modes: [String; 2],
        theta_pi: f64,
        #[serde(default)]
        phi_pi: f64,
    },
    /// Routes `from` into `to` (and `to` back into `from`).
    Mirror {
        from: String,
        to: String,
    },
    PhaseShifter {
        mode: String,
        phi_pi: f64,
    },
    /// Rotates `(H, V)` by `angle_pi * pi` on one mode; `0.5` maps H to V.
    PolarizationRotator {
        mode: String,
        angle_pi: f64,
    },
    /// Flips the ancilla when the particle occupies `mode`.
    AncillaFlip {
        mode: String,
    },
    Detector {
        mode: String,
        name: String,
    },
}

impl Element {
    pub fn beam_splitter(a: &str, b: &str, theta_pi: f64, phi_pi: f64) -> Self {
        Element::BeamSplitter {
            modes: [a.to_string(), b.to_string()],
            theta_pi,
            phi_pi,
        }
    }

    pub fn phase_shifter(mode: &str, phi_pi: f64) -> Self {
        Element::PhaseShifter {
            mode: mode.to_string(),
            phi_pi,
        }
    }

    pub fn detector(mode: &str, name: &str) -> Self {
        Element::Detector {
            mode: mode.to_string(),
            name: name.to_string(),
        }
    }

    pub fn modes(&self) -> Vec<&str> {
        match self {
            Element::BeamSplitter { modes, .. } => vec![&modes[0], &modes[1]],
            Element::Mirror { from, to } => vec![from, to],
            Element::PhaseShifter { mode, .. }
            | Element::PolarizationRotator { mode, .. }
            | Element::AncillaFlip { mode }
            | Element::Detector { mode, .. } => vec![mode],
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Element::BeamSplitter { .. } => "beam_splitter",
            Element::Mirror { .. } => "mirror",
            Element::PhaseShifter { .. } => "phase_shifter",
            Element::PolarizationRotator { .. } => "polarization_rotator",
            Element::AncillaFlip { .. } => "ancilla_flip",
            Element::Detector { .. } => "detector",
        }
    }

    /// The 2x2 block this element applies (on a mode pair or on a
    /// two-level factor). Phase shifters use `diag(e^{i phi}, 1)`.
    fn block(&self) -> Mat2 {
        match self {
            Element::BeamSplitter {
                theta_pi, phi_pi, ..
            } => {
                let (s, c) = (theta_pi * PI).sin_cos();
                let e = Complex64::from_polar(1.0, phi_pi * PI);
                let i = Complex64::i();
                [[c.into(), i * e * s], [i * e.conj() * s, c.into()]]
            }
            Element::Mirror { .. } | Element::AncillaFlip { .. } => [[ZERO, ONE], [ONE, ZERO]],
            Element::PhaseShifter { phi_pi, .. } => {
                [[Complex64::from_polar(1.0, phi_pi * PI), ZERO], [ZERO, ONE]]
            }
            Element::PolarizationRotator { angle_pi, .. } => {
                let (s, c) = (angle_pi * PI).sin_cos();
                [[c.into(), (-s).into()], [s.into(), c.into()]]
            }
            Element::Detector { .. } => [[ONE, ZERO], [ZERO, ONE]],
        }
    }

    fn required_factor(&self) -> Option<Factor> {
        match self {
            Element::PolarizationRotator { .. } => Some(Factor::Polarization),
            Element::AncillaFlip { .. } => Some(Factor::Ancilla),
            _ => None,
        }
    }
}

fn unitarity_defect(m: &Mat2) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let v: Complex64 = (0..2).map(|k| m[k][i].conj() * m[k][j]).sum();
            let target = if i == j { ONE } else { ZERO };
            let d = (v - target).norm();
            worst = worst.max(if d.is_nan() { f64::INFINITY } else { d });
        }
    }
    worst
}

fn adjoint(m: &Mat2) -> Mat2 {
    [
        [m[0][0].conj(), m[1][0].conj()],
        [m[0][1].conj(), m[1][1].conj()],
    ]
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkedPoint {
    pub boundary: usize,
    pub mode: String,
}

/// A post-selection: a detector click, plus the observed outcome on each
/// internal factor the space carries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PostSelection {
    pub detector: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polarization: Option<Polarization>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ancilla: Option<Ancilla>,
}

impl PostSelection {
    pub fn detector(name: impl Into<String>) -> Self {
        Self {
            detector: name.into(),
            polarization: None,
            ancilla: None,
        }
    }

    pub fn with_polarization(mut self, p: Polarization) -> Self {
        self.polarization = Some(p);
        self
    }

    pub fn with_ancilla(mut self, a: Ancilla) -> Self {
        self.ancilla = Some(a);
        self
    }
}

impl fmt::Display for PostSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.detector)?;
        if let Some(p) = self.polarization {
            write!(f, ":{p}")?;
        }
        if let Some(a) = self.ancilla {
            write!(f, ":{a}")?;
        }
        Ok(())
    }
}

impl FromStr for PostSelection {
    type Err = Error;

    /// `D2`, `D2:H`, `D2:up`, `D2:H:up`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':').map(str::trim);
        let detector = parts
            .next()
            .filter(|d| !d.is_empty())
            .ok_or_else(|| Error::Parse(format!("empty post-selection `{s}`")))?;
        let mut post = PostSelection::detector(detector);
        for tok in parts {
            if let Ok(p) = tok.parse::<Polarization>() {
                post.polarization = Some(p);
            } else if let Ok(a) = tok.parse::<Ancilla>() {
                post.ancilla = Some(a);
            } else {
                return Err(Error::Parse(format!("unknown outcome `{tok}` in `{s}`")));
            }
        }
        Ok(post)
    }
}

/// Pre-selection and the named post-selections shipped with a circuit file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionPresets {
    /// Basis label of the input, e.g. `"a,H"`.
    pub pre: String,
    pub post: Vec<String>,
    /// Named local operators beyond the plain point projectors.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub operators: BTreeMap<String, OperatorSpec>,
}

/// A local operator at a marked point: the point's path projector times
/// optional factor projectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    pub point: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polarization: Option<crate::state::PolarizationFilter>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ancilla: Option<Ancilla>,
}

/// On-disk circuit definition (JSON).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitDefinition {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub modes: Vec<String>,
    /// Internal factors besides the path: `polarization`, `ancilla`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub factors: Vec<Factor>,
    pub stages: Vec<Vec<Element>>,
    #[serde(default)]
    pub marked_points: BTreeMap<String, MarkedPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub presets: Option<SelectionPresets>,
}

impl CircuitDefinition {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn has_factor(&self, f: Factor) -> bool {
        self.factors.contains(&f)
    }
}

/// A structural problem reported by [`validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Diagnostic {
    EmptyModes,
    DuplicateMode(String),
    UnknownMode {
        stage: usize,
        element: usize,
        mode: String,
    },
    ModeCollision {
        stage: usize,
        mode: String,
    },
    SelfCoupling {
        stage: usize,
        element: usize,
    },
    NonUnitary {
        stage: usize,
        element: usize,
        defect: f64,
    },
    MissingFactor {
        stage: usize,
        element: usize,
        factor: Factor,
    },
    DuplicateFactor(Factor),
    DetectorNotFinal {
        stage: usize,
    },
    MixedFinalStage,
    DuplicateDetector(String),
    UndetectedMode(String),
    DanglingPoint {
        name: String,
        reason: String,
    },
    BadPreset(String),
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::EmptyModes => write!(f, "circuit declares no modes"),
            Diagnostic::DuplicateMode(m) => write!(f, "mode `{m}` declared twice"),
            Diagnostic::UnknownMode {
                stage,
                element,
                mode,
            } => write!(
                f,
                "stage {stage}, element {element}: undeclared mode `{mode}`"
            ),
            Diagnostic::ModeCollision { stage, mode } => {
                write!(
                    f,
                    "stage {stage}: mode `{mode}` touched by more than one element"
                )
            }
            Diagnostic::SelfCoupling { stage, element } => {
                write!(
                    f,
                    "stage {stage}, element {element}: two-mode element uses the same mode twice"
                )
            }
            Diagnostic::NonUnitary {
                stage,
                element,
                defect,
            } => write!(
                f,
                "stage {stage}, element {element}: non-unitary parameters (defect {defect:e})"
            ),
            Diagnostic::MissingFactor {
                stage,
                element,
                factor,
            } => write!(
                f,
                "stage {stage}, element {element}: requires the {factor} factor"
            ),
            Diagnostic::DuplicateFactor(fac) => write!(f, "factor `{fac}` listed twice"),
            Diagnostic::DetectorNotFinal { stage } => {
                write!(
                    f,
                    "stage {stage}: detectors may only appear in the final stage"
                )
            }
            Diagnostic::MixedFinalStage => {
                write!(f, "final stage mixes detectors with other elements")
            }
            Diagnostic::DuplicateDetector(n) => write!(f, "detector `{n}` defined twice"),
            Diagnostic::UndetectedMode(m) => write!(f, "mode `{m}` ends without a detector"),
            Diagnostic::DanglingPoint { name, reason } => {
                write!(f, "marked point `{name}`: {reason}")
            }
            Diagnostic::BadPreset(msg) => write!(f, "presets: {msg}"),
        }
    }
}

/// Collects every structural violation in a definition.
pub fn validate(def: &CircuitDefinition) -> std::result::Result<(), Vec<Diagnostic>> {
    let mut diags = Vec::new();
    if def.modes.is_empty() {
        diags.push(Diagnostic::EmptyModes);
    }
    let mut seen = BTreeSet::new();
    for m in &def.modes {
        if !seen.insert(m.as_str()) {
            diags.push(Diagnostic::DuplicateMode(m.clone()));
        }
    }
    let mut seen_factors = Vec::new();
    for f in &def.factors {
        if *f == Factor::Path || seen_factors.contains(f) {
            diags.push(Diagnostic::DuplicateFactor(*f));
        }
        seen_factors.push(*f);
    }

    let last = def.stages.len().checked_sub(1);
    let mut detectors: BTreeMap<&str, &str> = BTreeMap::new();
    let mut detected_modes = BTreeSet::new();
    for (s, stage) in def.stages.iter().enumerate() {
        let mut touched = BTreeSet::new();
        let has_detector = stage.iter().any(|e| matches!(e, Element::Detector { .. }));
        if has_detector && Some(s) != last {
            diags.push(Diagnostic::DetectorNotFinal { stage: s });
        }
        if has_detector && stage.iter().any(|e| !matches!(e, Element::Detector { .. })) {
            diags.push(Diagnostic::MixedFinalStage);
        }
        for (i, el) in stage.iter().enumerate() {
            let modes = el.modes();
            if modes.len() == 2 && modes[0] == modes[1] {
                diags.push(Diagnostic::SelfCoupling {
                    stage: s,
                    element: i,
                });
            }
            for m in &modes {
                if !seen.contains(m) {
                    diags.push(Diagnostic::UnknownMode {
                        stage: s,
                        element: i,
                        mode: m.to_string(),
                    });
                }
                if !touched.insert(*m) && !(modes.len() == 2 && modes[0] == modes[1]) {
                    diags.push(Diagnostic::ModeCollision {
                        stage: s,
                        mode: m.to_string(),
                    });
                }
            }
            let defect = unitarity_defect(&el.block());
            if defect.is_nan() || defect > EXACT_TOL {
                diags.push(Diagnostic::NonUnitary {
                    stage: s,
                    element: i,
                    defect,
                });
            }
            if let Some(f) = el.required_factor() {
                if !def.has_factor(f) {
                    diags.push(Diagnostic::MissingFactor {
                        stage: s,
                        element: i,
                        factor: f,
                    });
                }
            }
            if let Element::Detector { mode, name } = el {
                if detectors.insert(name, mode).is_some() {
                    diags.push(Diagnostic::DuplicateDetector(name.clone()));
                }
                detected_modes.insert(mode.as_str());
            }
        }
    }
    if !detectors.is_empty() {
        for m in &def.modes {
            if !detected_modes.contains(m.as_str()) {
                diags.push(Diagnostic::UndetectedMode(m.clone()));
            }
        }
    }

    for (name, p) in &def.marked_points {
        if p.boundary > def.stages.len() {
            diags.push(Diagnostic::DanglingPoint {
                name: name.clone(),
                reason: format!(
                    "boundary {} beyond the last boundary {}",
                    p.boundary,
                    def.stages.len()
                ),
            });
        }
        if !seen.contains(p.mode.as_str()) {
            diags.push(Diagnostic::DanglingPoint {
                name: name.clone(),
                reason: format!("undeclared mode `{}`", p.mode),
            });
        }
    }

    if let Some(presets) = &def.presets {
        match presets.pre.parse::<BasisLabel>() {
            Ok(label) => {
                let ok = label.path.as_deref().is_some_and(|p| seen.contains(p))
                    && label.polarization.is_some() == def.has_factor(Factor::Polarization)
                    && label.ancilla.is_some() == def.has_factor(Factor::Ancilla);
                if !ok {
                    diags.push(Diagnostic::BadPreset(format!(
                        "pre-selection `{}` does not match the circuit's factors",
                        presets.pre
                    )));
                }
            }
            Err(e) => diags.push(Diagnostic::BadPreset(e.to_string())),
        }
        for post in &presets.post {
            match post.parse::<PostSelection>() {
                Ok(p) if !detectors.contains_key(p.detector.as_str()) => diags.push(
                    Diagnostic::BadPreset(format!("post-selection `{post}`: unknown detector")),
                ),
                Ok(_) => {}
                Err(e) => diags.push(Diagnostic::BadPreset(e.to_string())),
            }
        }
        for (name, op) in &presets.operators {
            if !def.marked_points.contains_key(&op.point) {
                diags.push(Diagnostic::BadPreset(format!(
                    "operator `{name}` refers to unknown point `{}`",
                    op.point
                )));
            }
            if op.polarization.is_some() && !def.has_factor(Factor::Polarization)
                || op.ancilla.is_some() && !def.has_factor(Factor::Ancilla)
            {
                diags.push(Diagnostic::BadPreset(format!(
                    "operator `{name}` acts on a factor the circuit lacks"
                )));
            }
        }
    }

    if diags.is_empty() {
        Ok(())
    } else {
        Err(diags)
    }
}

#[derive(Clone, Debug)]
enum Action {
    TwoMode {
        a: usize,
        b: usize,
        m: Mat2,
    },
    Phase {
        mode: usize,
        phase: Complex64,
    },
    Internal {
        mode: usize,
        factor: Factor,
        m: Mat2,
    },
    Identity,
}

impl Action {
    fn compile(el: &Element, space: &Space) -> Self {
        let idx = |m: &str| space.path_index(m).expect("validated mode");
        match el {
            Element::BeamSplitter { modes, .. } => Action::TwoMode {
                a: idx(&modes[0]),
                b: idx(&modes[1]),
                m: el.block(),
            },
            Element::Mirror { from, to } => Action::TwoMode {
                a: idx(from),
                b: idx(to),
                m: el.block(),
            },
            Element::PhaseShifter { mode, .. } => Action::Phase {
                mode: idx(mode),
                phase: el.block()[0][0],
            },
            Element::PolarizationRotator { mode, .. } => Action::Internal {
                mode: idx(mode),
                factor: Factor::Polarization,
                m: el.block(),
            },
            Element::AncillaFlip { mode } => Action::Internal {
                mode: idx(mode),
                factor: Factor::Ancilla,
                m: el.block(),
            },
            Element::Detector { .. } => Action::Identity,
        }
    }

    fn adjoint(&self) -> Self {
        match self {
            Action::TwoMode { a, b, m } => Action::TwoMode {
                a: *a,
                b: *b,
                m: adjoint(m),
            },
            Action::Phase { mode, phase } => Action::Phase {
                mode: *mode,
                phase: phase.conj(),
            },
            Action::Internal { mode, factor, m } => Action::Internal {
                mode: *mode,
                factor: *factor,
                m: adjoint(m),
            },
            Action::Identity => Action::Identity,
        }
    }

    fn apply(&self, space: &Space, amps: &mut [Complex64]) {
        let inner = space.inner_dim();
        match self {
            Action::TwoMode { a, b, m } => {
                for r in 0..inner {
                    let (ia, ib) = (a * inner + r, b * inner + r);
                    let (x, y) = (amps[ia], amps[ib]);
                    amps[ia] = m[0][0] * x + m[0][1] * y;
                    amps[ib] = m[1][0] * x + m[1][1] * y;
                }
            }
            Action::Phase { mode, phase } => {
                for amp in &mut amps[mode * inner..(mode + 1) * inner] {
                    *amp *= phase;
                }
            }
            Action::Internal { mode, factor, m } => {
                // Restrict to the block of this mode: it is itself a space
                // without a path factor.
                let sub = Space::new(
                    None,
                    space.has(Factor::Polarization),
                    space.has(Factor::Ancilla),
                )
                .expect("internal factors present");
                apply_factor(
                    &sub,
                    &mut amps[mode * inner..(mode + 1) * inner],
                    *factor,
                    m,
                );
            }
            Action::Identity => {}
        }
    }
}

/// A validated, immutable circuit.
#[derive(Clone, Debug)]
pub struct Circuit {
    definition: CircuitDefinition,
    space: Arc<Space>,
    forward: Vec<Vec<Action>>,
    backward: Vec<Vec<Action>>,
    detectors: BTreeMap<String, String>,
}

impl Circuit {
    pub fn new(definition: CircuitDefinition) -> Result<Self> {
        validate(&definition).map_err(Error::InvalidCircuit)?;
        let space = Arc::new(Space::new(
            Some(definition.modes.clone()),
            definition.has_factor(Factor::Polarization),
            definition.has_factor(Factor::Ancilla),
        )?);
        let forward: Vec<Vec<Action>> = definition
            .stages
            .iter()
            .map(|stage| stage.iter().map(|el| Action::compile(el, &space)).collect())
            .collect();
        let backward = forward
            .iter()
            .map(|stage| stage.iter().map(Action::adjoint).collect())
            .collect();
        let detectors = definition
            .stages
            .iter()
            .flatten()
            .filter_map(|el| match el {
                Element::Detector { mode, name } => Some((name.clone(), mode.clone())),
                _ => None,
            })
            .collect();
        Ok(Self {
            definition,
            space,
            forward,
            backward,
            detectors,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::new(CircuitDefinition::from_json(text)?)
    }

    pub fn definition(&self) -> &CircuitDefinition {
        &self.definition
    }

    pub fn name(&self) -> &str {
        &self.definition.name
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn num_stages(&self) -> usize {
        self.forward.len()
    }

    pub fn final_boundary(&self) -> usize {
        self.forward.len()
    }

    pub fn marked_points(&self) -> &BTreeMap<String, MarkedPoint> {
        &self.definition.marked_points
    }

    pub fn point(&self, name: &str) -> Result<&MarkedPoint> {
        self.definition
            .marked_points
            .get(name)
            .ok_or_else(|| Error::UnknownPoint(name.to_string()))
    }

    /// Projector onto the mode of a marked point.
    pub fn point_projector(&self, name: &str) -> Result<LocalProjector> {
        Ok(LocalProjector::on_path(self.point(name)?.mode.clone()))
    }

    /// Detector name to mode.
    pub fn detectors(&self) -> &BTreeMap<String, String> {
        &self.detectors
    }

    pub fn input_state(&self, label: &BasisLabel) -> Result<PureState> {
        PureState::basis(self.space.clone(), label)
    }

    fn check_boundary(&self, boundary: usize) -> Result<()> {
        if boundary > self.num_stages() {
            return Err(Error::BoundaryOutOfRange {
                boundary,
                stages: self.num_stages(),
            });
        }
        Ok(())
    }

    fn check_space(&self, state: &PureState) -> Result<()> {
        if **state.space() != *self.space {
            return Err(Error::SpaceMismatch(
                "state is not defined on the circuit's space".into(),
            ));
        }
        Ok(())
    }

    /// Applies stage `stage` in place.
    pub(crate) fn apply_stage(&self, stage: usize, amps: &mut [Complex64]) {
        for action in &self.forward[stage] {
            action.apply(&self.space, amps);
        }
    }

    pub(crate) fn apply_stage_adjoint(&self, stage: usize, amps: &mut [Complex64]) {
        for action in &self.backward[stage] {
            action.apply(&self.space, amps);
        }
    }

    /// Evolves a state given at boundary `from` forward to boundary `to`.
    pub fn evolve(&self, state: &PureState, from: usize, to: usize) -> Result<PureState> {
        self.check_space(state)?;
        self.check_boundary(from)?;
        self.check_boundary(to)?;
        let mut amps = state.amplitudes().to_vec();
        if to >= from {
            for s in from..to {
                self.apply_stage(s, &mut amps);
            }
        } else {
            for s in (to..from).rev() {
                self.apply_stage_adjoint(s, &mut amps);
            }
        }
        PureState::from_vec(self.space.clone(), amps)
    }

    /// The pre-selected state at `boundary`.
    pub fn forward_propagate(&self, input: &PureState, boundary: usize) -> Result<PureState> {
        self.evolve(input, 0, boundary)
    }

    /// The post-selected state seeded at the final boundary and evolved
    /// backward to `boundary` (returned as a ket; the bra is its adjoint).
    pub fn backward_propagate(&self, post: &PostSelection, boundary: usize) -> Result<PureState> {
        let seed = self.detector_state(post)?;
        self.evolve(&seed, self.final_boundary(), boundary)
    }

    /// The basis state at the final boundary selected by a detector click.
    pub fn detector_state(&self, post: &PostSelection) -> Result<PureState> {
        let mode = self
            .detectors
            .get(&post.detector)
            .ok_or_else(|| Error::UnknownDetector(post.detector.clone()))?;
        let mut label = BasisLabel::path(mode.clone());
        match (self.space.has(Factor::Polarization), post.polarization) {
            (true, Some(p)) => label.polarization = Some(p),
            (true, None) => {
                return Err(Error::IncompletePostSelection {
                    detector: post.detector.clone(),
                    factor: "polarization",
                    example: "H",
                })
            }
            (false, Some(_)) => return Err(Error::FactorAbsent(Factor::Polarization.to_string())),
            (false, None) => {}
        }
        match (self.space.has(Factor::Ancilla), post.ancilla) {
            (true, Some(a)) => label.ancilla = Some(a),
            (true, None) => {
                return Err(Error::IncompletePostSelection {
                    detector: post.detector.clone(),
                    factor: "ancilla",
                    example: "up",
                })
            }
            (false, Some(_)) => return Err(Error::FactorAbsent(Factor::Ancilla.to_string())),
            (false, None) => {}
        }
        PureState::basis(self.space.clone(), &label)
    }

    /// Every complete detector outcome (detector x internal basis states),
    /// in a fixed order.
    pub fn outcomes(&self) -> Vec<PostSelection> {
        let pols: Vec<Option<Polarization>> = if self.space.has(Factor::Polarization) {
            Polarization::ALL.iter().copied().map(Some).collect()
        } else {
            vec![None]
        };
        let ancs: Vec<Option<Ancilla>> = if self.space.has(Factor::Ancilla) {
            Ancilla::ALL.iter().copied().map(Some).collect()
        } else {
            vec![None]
        };
        let mut out = Vec::new();
        for name in self.detectors.keys() {
            for p in &pols {
                for a in &ancs {
                    out.push(PostSelection {
                        detector: name.clone(),
                        polarization: *p,
                        ancilla: *a,
                    });
                }
            }
        }
        out
    }
}
