use serde::Serialize;
use serde_json::Value;
use tsvf_lab::state::CIRCULAR_CONVENTION;

/// Everything needed to reproduce an output.
#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub command: String,
    /// Fully resolved configuration, defaults included.
    pub config: Value,
    pub tool: &'static str,
    pub version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub timestamp: String,
    /// Files written, or `"stdout"`.
    pub outputs: Vec<String>,
    pub conventions: Conventions,
}

#[derive(Clone, Debug, Serialize)]
pub struct Conventions {
    pub beam_splitter: &'static str,
    pub phase_shifter: &'static str,
    pub pointer_wavefunction: &'static str,
    pub circular_polarization: &'static str,
    pub shift_units: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rng: Option<&'static str>,
}

impl RunRecord {
    pub fn new(command: &str, config: Value) -> Self {
        Self {
            command: command.to_string(),
            config,
            tool: "tsvf-lab",
            version: env!("CARGO_PKG_VERSION"),
            seed: None,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            outputs: vec!["stdout".to_string()],
            conventions: Conventions {
                beam_splitter: "[[cos t, i e^{i p} sin t], [i e^{-i p} sin t, cos t]], angles in units of pi",
                phase_shifter: "e^{i phi} on the named mode, phi in units of pi",
                pointer_wavefunction: "psi_a(x) ~ exp(-(x-a)^2/(2 width^2)), shift delta = epsilon * width",
                circular_polarization: CIRCULAR_CONVENTION,
                shift_units: "weak-value tables give shifts in units of delta; pointer outputs in position units",
                rng: None,
            },
        }
    }

    pub fn with_seed(mut self, seed: u64, rng: &'static str) -> Self {
        self.seed = Some(seed);
        self.conventions.rng = Some(rng);
        self
    }

    pub fn with_outputs(mut self, outputs: Vec<String>) -> Self {
        self.outputs = outputs;
        self
    }
}
