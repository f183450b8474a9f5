//! Declarative experiment configuration.
//!
//! A config file fully determines a run: physical parameters, the scenario that
//! produces records (simulation, classical oracle, or files on disk), and the list
//! of analyses to apply. Unknown fields are rejected so typos fail loudly instead
//! of silently running defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use weakmeas::{DensityMatrix, DetectorParams, OracleKind, QubitParams, Scheme};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub seed: u64,
    /// Default output directory; the command line can override it. Never echoed
    /// into reports, so the same config reproduces byte-identical `report.json`
    /// regardless of where the artifacts land.
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
    pub detector: DetectorParams,
    /// Required by the quantum scenario and by analytic comparisons.
    #[serde(default)]
    pub qubit: Option<QubitParams>,
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub analyses: Vec<AnalysisConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioConfig {
    /// Conditioned quantum trajectories producing decimated detector records.
    QuantumSim {
        n_records: usize,
        dt: f64,
        /// Recorded span per record, in time units (steps = duration / dt).
        duration: f64,
        /// Transient evolved and dropped before recording starts.
        #[serde(default)]
        discard_duration: f64,
        scheme: Scheme,
        /// Full-rate steps averaged into one output sample.
        decimate: usize,
        #[serde(default = "default_renormalize_every")]
        renormalize_every: u64,
        initial: InitialState,
    },
    /// Classical stochastic process behind the same detector model.
    ClassicalOracle {
        n_records: usize,
        oracle: OracleKind,
        dt: f64,
        duration: f64,
        #[serde(default)]
        phase_diffusion: f64,
        #[serde(default)]
        telegraph_rate: f64,
    },
    /// Records read from disk (base paths of .f64/.json pairs).
    ExternalRecord { paths: Vec<PathBuf> },
    /// The quantum scenario run twice, once per integration scheme, on identical
    /// noise streams; analyses compare the two pooled correlators.
    SchemeComparison {
        n_records: usize,
        dt: f64,
        duration: f64,
        #[serde(default)]
        discard_duration: f64,
        decimate: usize,
        #[serde(default = "default_renormalize_every")]
        renormalize_every: u64,
        initial: InitialState,
    },
}

fn default_renormalize_every() -> u64 {
    100
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    Mixed,
    Up,
    Down,
}

impl InitialState {
    pub fn density_matrix(self) -> DensityMatrix {
        match self {
            InitialState::Mixed => DensityMatrix::mixed(),
            InitialState::Up => DensityMatrix::pointer_up(),
            InitialState::Down => DensityMatrix::new(0.0, 0.0, 0.0).expect("valid state"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnalysisConfig {
    /// Pooled lag correlators with batch-mean errors; `cross` adds the noise-signal
    /// estimator when records carry truth channels.
    Correlator {
        max_lag: usize,
        n_batches: usize,
        #[serde(default = "default_true")]
        cross: bool,
    },
    /// Pooled Welch spectrum plus peak metrics and the Gaussian-filtered area.
    Spectrum {
        segment_len: usize,
        /// Window and peak-search center; defaults to the qubit/oracle carrier.
        #[serde(default)]
        peak_center: Option<f64>,
        /// Pedestal exclusion half-width; defaults to 10x the expected line width.
        #[serde(default)]
        exclusion_halfwidth: Option<f64>,
        /// Gaussian window width for the filtered area; skip the area when absent.
        #[serde(default)]
        window_delta: Option<f64>,
    },
    /// Two-time combinations `K(t1) + K(t2) - K(t1+t2)` against the classical bound:
    /// explicit pairs plus optionally `random_pairs` drawn on the lag grid.
    TwoTimeInequality {
        #[serde(default)]
        pairs: Vec<[f64; 2]>,
        #[serde(default)]
        random_pairs: usize,
        /// Smallest lag index a random tau may take; defaults to 1.
        #[serde(default)]
        random_min_lag: Option<usize>,
        /// Largest lag index a random tau may take; defaults to half the
        /// correlator range so `tau1 + tau2` always stays inside it.
        #[serde(default)]
        random_max_lag: Option<usize>,
    },
    /// Frequency-side vs time-side Gaussian window identity on the scaled signal
    /// truth of each record.
    WindowEquivalence { center: f64, delta: f64 },
    /// Persist every record as a binary block plus sidecar.
    SaveRecords {},
    /// Full-resolution dump of the first steps of record 0 (quantum scenario only).
    TrajectoryDump { n_steps: u64 },
}

fn default_true() -> bool {
    true
}

/// Configuration problems map to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(ConfigError(format!(
                "schema_version {} unsupported (expected {CONFIG_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.detector
            .validate()
            .map_err(|e| ConfigError(format!("detector: {e}")))?;
        match &self.scenario {
            ScenarioConfig::QuantumSim {
                n_records,
                dt,
                duration,
                discard_duration,
                decimate,
                ..
            }
            | ScenarioConfig::SchemeComparison {
                n_records,
                dt,
                duration,
                discard_duration,
                decimate,
                ..
            } => {
                if self.qubit.is_none() {
                    return Err(ConfigError("quantum scenario needs a [qubit] table".into()));
                }
                if *n_records == 0 {
                    return Err(ConfigError("n_records must be positive".into()));
                }
                if !(dt.is_finite() && *dt > 0.0) {
                    return Err(ConfigError("dt must be positive".into()));
                }
                if !(duration.is_finite() && *duration > 0.0) {
                    return Err(ConfigError("duration must be positive".into()));
                }
                if !(discard_duration.is_finite() && *discard_duration >= 0.0) {
                    return Err(ConfigError("discard_duration must be non-negative".into()));
                }
                if *decimate == 0 {
                    return Err(ConfigError("decimate must be positive".into()));
                }
                let steps = (duration / dt).round();
                if !(2.0..=1e10).contains(&steps) {
                    return Err(ConfigError("duration/dt out of range".into()));
                }
            }
            ScenarioConfig::ClassicalOracle {
                n_records,
                oracle,
                dt,
                duration,
                phase_diffusion,
                telegraph_rate,
            } => {
                if *n_records == 0 {
                    return Err(ConfigError("n_records must be positive".into()));
                }
                if !(dt.is_finite() && *dt > 0.0 && duration.is_finite() && *duration > 0.0) {
                    return Err(ConfigError("dt and duration must be positive".into()));
                }
                match oracle {
                    OracleKind::RectangularPhaseDiffusion | OracleKind::CosinePhaseDiffusion => {
                        if self.qubit.is_none() {
                            return Err(ConfigError(
                                "phase-diffusion oracles take their carrier from [qubit]".into(),
                            ));
                        }
                        if !(phase_diffusion.is_finite() && *phase_diffusion >= 0.0) {
                            return Err(ConfigError("phase_diffusion must be non-negative".into()));
                        }
                    }
                    OracleKind::RandomTelegraph => {
                        if !(telegraph_rate.is_finite() && *telegraph_rate > 0.0) {
                            return Err(ConfigError("telegraph_rate must be positive".into()));
                        }
                    }
                }
            }
            ScenarioConfig::ExternalRecord { paths } => {
                if paths.is_empty() {
                    return Err(ConfigError(
                        "external_record needs at least one path".into(),
                    ));
                }
            }
        }
        let mut have_correlator = false;
        for a in &self.analyses {
            match a {
                AnalysisConfig::Correlator {
                    max_lag, n_batches, ..
                } => {
                    if *max_lag == 0 || *n_batches < 2 {
                        return Err(ConfigError(
                            "correlator needs max_lag >= 1 and n_batches >= 2".into(),
                        ));
                    }
                    have_correlator = true;
                }
                AnalysisConfig::Spectrum {
                    segment_len,
                    peak_center,
                    window_delta,
                    ..
                } => {
                    if *segment_len < 8 || segment_len % 2 != 0 {
                        return Err(ConfigError("segment_len must be even and >= 8".into()));
                    }
                    if let Some(d) = window_delta {
                        if !(d.is_finite() && *d > 0.0) {
                            return Err(ConfigError("window_delta must be positive".into()));
                        }
                    }
                    if peak_center.is_none() && self.carrier().is_none() {
                        return Err(ConfigError(
                            "spectrum needs peak_center when no [qubit] carrier is set".into(),
                        ));
                    }
                }
                AnalysisConfig::TwoTimeInequality {
                    pairs,
                    random_pairs,
                    ..
                } => {
                    if pairs.is_empty() && *random_pairs == 0 {
                        return Err(ConfigError(
                            "two_time_inequality needs pairs or random_pairs".into(),
                        ));
                    }
                    for [t1, t2] in pairs {
                        if !(t1.is_finite() && *t1 > 0.0 && t2.is_finite() && *t2 > 0.0) {
                            return Err(ConfigError("tau pairs must be positive".into()));
                        }
                    }
                    if !have_correlator {
                        return Err(ConfigError(
                            "two_time_inequality reuses the pooled estimate of a correlator \
                             analysis listed before it"
                                .into(),
                        ));
                    }
                }
                AnalysisConfig::WindowEquivalence { center, delta } => {
                    if !(center.is_finite() && *center > 0.0 && delta.is_finite() && *delta > 0.0) {
                        return Err(ConfigError(
                            "window_equivalence needs positive center and delta".into(),
                        ));
                    }
                }
                AnalysisConfig::SaveRecords {} => {}
                AnalysisConfig::TrajectoryDump { n_steps } => {
                    if *n_steps < 2 {
                        return Err(ConfigError("trajectory_dump needs n_steps >= 2".into()));
                    }
                    if !matches!(self.scenario, ScenarioConfig::QuantumSim { .. }) {
                        return Err(ConfigError(
                            "trajectory_dump applies to the quantum scenario only".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Carrier frequency analyses center on by default.
    pub fn carrier(&self) -> Option<f64> {
        self.qubit.map(|q| q.omega)
    }
}

/// Sweepable parameter paths. Physical paths rewrite the model; analysis paths
/// rewrite every matching analysis entry (`analysis.tau` replaces the pair list of
/// each two-time analysis with one equal-time pair, `analysis.window_delta` sets the
/// Gaussian width of each spectrum analysis).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    DetectorS0,
    DetectorEta,
    DetectorDeltaI,
    QubitOmega,
    PhaseDiffusion,
    TelegraphRate,
    AnalysisTau,
    AnalysisWindowDelta,
}

impl SweepParam {
    pub fn parse(name: &str) -> Result<Self, ConfigError> {
        match name {
            "detector.s0" => Ok(Self::DetectorS0),
            "detector.eta" => Ok(Self::DetectorEta),
            "detector.delta_i" => Ok(Self::DetectorDeltaI),
            "qubit.omega" => Ok(Self::QubitOmega),
            "scenario.phase_diffusion" => Ok(Self::PhaseDiffusion),
            "scenario.telegraph_rate" => Ok(Self::TelegraphRate),
            "analysis.tau" => Ok(Self::AnalysisTau),
            "analysis.window_delta" => Ok(Self::AnalysisWindowDelta),
            other => Err(ConfigError(format!(
                "unknown sweep parameter `{other}` (expected detector.s0, detector.eta, \
                 detector.delta_i, qubit.omega, scenario.phase_diffusion, \
                 scenario.telegraph_rate, analysis.tau, analysis.window_delta)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::DetectorS0 => "detector.s0",
            Self::DetectorEta => "detector.eta",
            Self::DetectorDeltaI => "detector.delta_i",
            Self::QubitOmega => "qubit.omega",
            Self::PhaseDiffusion => "scenario.phase_diffusion",
            Self::TelegraphRate => "scenario.telegraph_rate",
            Self::AnalysisTau => "analysis.tau",
            Self::AnalysisWindowDelta => "analysis.window_delta",
        }
    }

    /// Return a copy of `cfg` with this parameter set to `value`.
    pub fn apply(
        self,
        cfg: &ExperimentConfig,
        value: f64,
    ) -> Result<ExperimentConfig, ConfigError> {
        let mut out = cfg.clone();
        match self {
            Self::DetectorS0 => out.detector.s0 = value,
            Self::DetectorEta => out.detector.eta = value,
            Self::DetectorDeltaI => out.detector.delta_i = value,
            Self::QubitOmega => {
                let q = out
                    .qubit
                    .as_mut()
                    .ok_or_else(|| ConfigError("config has no [qubit] table".into()))?;
                q.omega = value;
            }
            Self::PhaseDiffusion => match &mut out.scenario {
                ScenarioConfig::ClassicalOracle {
                    phase_diffusion, ..
                } => *phase_diffusion = value,
                _ => {
                    return Err(ConfigError(
                        "scenario.phase_diffusion needs a classical_oracle scenario".into(),
                    ))
                }
            },
            Self::TelegraphRate => match &mut out.scenario {
                ScenarioConfig::ClassicalOracle { telegraph_rate, .. } => *telegraph_rate = value,
                _ => {
                    return Err(ConfigError(
                        "scenario.telegraph_rate needs a classical_oracle scenario".into(),
                    ))
                }
            },
            Self::AnalysisTau => {
                let mut touched = false;
                for a in &mut out.analyses {
                    if let AnalysisConfig::TwoTimeInequality {
                        pairs,
                        random_pairs,
                        ..
                    } = a
                    {
                        *pairs = vec![[value, value]];
                        *random_pairs = 0;
                        touched = true;
                    }
                }
                if !touched {
                    return Err(ConfigError(
                        "analysis.tau needs a two_time_inequality analysis".into(),
                    ));
                }
            }
            Self::AnalysisWindowDelta => {
                let mut touched = false;
                for a in &mut out.analyses {
                    if let AnalysisConfig::Spectrum { window_delta, .. } = a {
                        *window_delta = Some(value);
                        touched = true;
                    }
                }
                if !touched {
                    return Err(ConfigError(
                        "analysis.window_delta needs a spectrum analysis".into(),
                    ));
                }
            }
        }
        out.validate()?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema_version = 1
seed = 7

[detector]
i0 = 0.0
delta_i = 2.0
s0 = 10.0
eta = 1.0

[qubit]
omega = 1.0

[scenario]
kind = "quantum_sim"
n_records = 2
dt = 0.005
duration = 100.0
discard_duration = 10.0
scheme = "heun_stratonovich"
decimate = 20
initial = "mixed"

[[analyses]]
kind = "correlator"
max_lag = 50
n_batches = 4
"#;

    #[test]
    fn minimal_quantum_config_parses() {
        let cfg: ExperimentConfig = toml::from_str(MINIMAL).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.seed, 7);
        assert!(matches!(
            cfg.scenario,
            ScenarioConfig::QuantumSim {
                n_records: 2,
                renormalize_every: 100,
                ..
            }
        ));
        match &cfg.analyses[0] {
            AnalysisConfig::Correlator { cross, .. } => assert!(*cross, "cross defaults on"),
            other => panic!("unexpected analysis {other:?}"),
        }
    }

    #[test]
    fn unknown_fields_and_bad_versions_are_rejected() {
        let typo = MINIMAL.replace("[detector]", "[detector]\nbogus_field = 3");
        assert!(toml::from_str::<ExperimentConfig>(&typo).is_err());
        let v2 = MINIMAL.replace("schema_version = 1", "schema_version = 2");
        let cfg: ExperimentConfig = toml::from_str(&v2).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn quantum_scenario_requires_qubit_table() {
        let stripped = MINIMAL.replace("[qubit]\nomega = 1.0\n", "");
        let cfg: ExperimentConfig = toml::from_str(&stripped).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn sweep_param_round_trip_and_application() {
        let cfg: ExperimentConfig = toml::from_str(MINIMAL).unwrap();
        for name in [
            "detector.s0",
            "detector.eta",
            "detector.delta_i",
            "qubit.omega",
        ] {
            let p = SweepParam::parse(name).unwrap();
            assert_eq!(p.name(), name);
        }
        assert!(SweepParam::parse("detector.nope").is_err());
        let swept = SweepParam::DetectorS0.apply(&cfg, 5.0).unwrap();
        assert_eq!(swept.detector.s0, 5.0);
        assert_eq!(cfg.detector.s0, 10.0, "original untouched");
        assert!(SweepParam::PhaseDiffusion.apply(&cfg, 0.1).is_err());
        assert!(
            SweepParam::DetectorEta.apply(&cfg, 1.5).is_err(),
            "applied value must re-validate"
        );
        assert!(
            SweepParam::AnalysisTau.apply(&cfg, 1.0).is_err(),
            "no two-time analysis in the minimal config"
        );
        let with_lg =
            format!("{MINIMAL}\n[[analyses]]\nkind = \"two_time_inequality\"\nrandom_pairs = 10\n");
        let cfg: ExperimentConfig = toml::from_str(&with_lg).unwrap();
        let swept = SweepParam::AnalysisTau.apply(&cfg, 0.7).unwrap();
        match &swept.analyses[1] {
            AnalysisConfig::TwoTimeInequality {
                pairs,
                random_pairs,
                ..
            } => {
                assert_eq!(pairs.as_slice(), &[[0.7, 0.7]]);
                assert_eq!(*random_pairs, 0, "sweep pins the pair list");
            }
            other => panic!("unexpected analysis {other:?}"),
        }
    }

    #[test]
    fn analysis_validation_catches_degenerate_settings() {
        let no_pairs = MINIMAL.replace(
            "kind = \"correlator\"\nmax_lag = 50\nn_batches = 4",
            "kind = \"two_time_inequality\"",
        );
        let cfg: ExperimentConfig = toml::from_str(&no_pairs).unwrap();
        assert!(cfg.validate().is_err());
        let dump = MINIMAL.replace(
            "kind = \"correlator\"\nmax_lag = 50\nn_batches = 4",
            "kind = \"trajectory_dump\"\nn_steps = 100",
        );
        let cfg: ExperimentConfig = toml::from_str(&dump).unwrap();
        cfg.validate().unwrap();
    }
}
