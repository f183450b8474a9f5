//! Scenario execution, analysis orchestration, and artifact writing.
//!
//! Every numeric output is a deterministic function of (config, seed): records
//! derive from fixed per-record RNG streams and collect in index order, analyses
//! pool over that order single-threaded, and parallelism only distributes
//! per-record work. `report.json` therefore reproduces byte for byte.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use weakmeas::{
    analytic_filtered_area, analytic_spectrum, classical_three_point_max, estimate_auto_correlator,
    estimate_cross_correlator, estimate_spectrum, filtered_peak_area, generate_oracle_records,
    generate_quantum_records, lg_combination, peak_metrics, pool_correlators, pool_spectra,
    read_record_binary, relative_rms_error, simulate, stream_rng, verify_window_equivalence,
    write_correlator_csv, write_record_binary, write_spectrum_csv, write_trajectory_csv,
    AnalyticModel, CorrelatorEstimate, ModelError, OracleConfig, PhysicalConfig, RecordStreams,
    Scheme, SignalRecord, SimConfig, SpectrumEstimate, StationaryMoments, TrajectoryMoments,
};

use crate::config::{AnalysisConfig, ConfigError, ExperimentConfig, ScenarioConfig, SweepParam};
use crate::report::{
    render_summary, AnalysisReport, CorrelatorReport, FilteredAreaReport, IntegratorReport,
    LemmaPoint, MomentsReport, PeakReport, RecordsReport, Report, SaveRecordsReport,
    SchemeGapReport, SeriesComparison, SpectrumModelReport, SpectrumReport, Timings,
    TrajectoryDumpReport, TwoTimePoint, TwoTimeReport, WindowEquivalenceReport,
    REPORT_SCHEMA_VERSION, SEED_DERIVATION,
};

/// Stream index for the random tau pair draws, far above any record stream.
const PAIR_STREAM: u64 = 1_000_003;

/// Failure split mirroring the exit-code contract: config errors are detectable
/// before any computation starts (exit 2), runtime errors surface while records
/// are generated or analyzed (exit 3).
#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Runtime(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => e.fmt(f),
            RunError::Runtime(msg) => write!(f, "runtime error: {msg}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<ModelError> for RunError {
    fn from(e: ModelError) -> Self {
        RunError::Runtime(e.to_string())
    }
}

impl RunError {
    /// Prefix the message with the analysis step it came from.
    fn in_analysis(self, idx: usize, kind: &str) -> RunError {
        match self {
            RunError::Config(ConfigError(msg)) => {
                RunError::Config(ConfigError(format!("analysis {idx} ({kind}): {msg}")))
            }
            RunError::Runtime(msg) => RunError::Runtime(format!("analysis {idx} ({kind}): {msg}")),
        }
    }
}

fn io_err(ctx: &str, e: std::io::Error) -> RunError {
    RunError::Runtime(format!("{ctx}: {e}"))
}

/// Everything a completed run hands back to the caller.
pub struct RunOutcome {
    pub report: Report,
    pub summary: String,
    pub report_path: PathBuf,
}

/// Records produced by the scenario, plus the context analyses need.
struct RecordSet {
    scenario: &'static str,
    records: Vec<SignalRecord>,
    /// Per-record full-resolution moments; empty unless the scenario simulates.
    moments: Vec<TrajectoryMoments>,
    /// Alternate-scheme records (scheme-comparison scenario only).
    alt_records: Vec<SignalRecord>,
    phys: Option<PhysicalConfig>,
}

fn step_count(duration: f64, dt: f64) -> u64 {
    (duration / dt).round() as u64
}

fn build_records(cfg: &ExperimentConfig) -> Result<RecordSet, RunError> {
    let cfg_err = |e: ModelError| RunError::Config(ConfigError(e.to_string()));
    match &cfg.scenario {
        ScenarioConfig::QuantumSim {
            n_records,
            dt,
            duration,
            discard_duration,
            scheme,
            decimate,
            renormalize_every,
            initial,
        } => {
            let qubit = cfg.qubit.expect("validated");
            let phys = PhysicalConfig::new(cfg.detector, qubit).map_err(cfg_err)?;
            let sim = SimConfig {
                dt: *dt,
                n_steps: step_count(*duration, *dt),
                discard_steps: step_count(*discard_duration, *dt),
                scheme: *scheme,
                initial: initial.density_matrix(),
                renormalize_every: *renormalize_every,
                decimate: *decimate as u64,
            };
            sim.validate().map_err(cfg_err)?;
            let pairs = generate_quantum_records(&phys, &sim, *n_records, cfg.seed)?;
            let (records, moments) = pairs.into_iter().unzip();
            Ok(RecordSet {
                scenario: "quantum_sim",
                records,
                moments,
                alt_records: Vec::new(),
                phys: Some(phys),
            })
        }
        ScenarioConfig::SchemeComparison {
            n_records,
            dt,
            duration,
            discard_duration,
            decimate,
            renormalize_every,
            initial,
        } => {
            let qubit = cfg.qubit.expect("validated");
            let phys = PhysicalConfig::new(cfg.detector, qubit).map_err(cfg_err)?;
            let mut sim = SimConfig {
                dt: *dt,
                n_steps: step_count(*duration, *dt),
                discard_steps: step_count(*discard_duration, *dt),
                scheme: Scheme::HeunStratonovich,
                initial: initial.density_matrix(),
                renormalize_every: *renormalize_every,
                decimate: *decimate as u64,
            };
            sim.validate().map_err(cfg_err)?;
            // Identical seed and stream layout: both schemes see the same noise
            // realizations, so their correlator difference isolates the scheme.
            let heun = generate_quantum_records(&phys, &sim, *n_records, cfg.seed)?;
            sim.scheme = Scheme::ItoEuler;
            let ito = generate_quantum_records(&phys, &sim, *n_records, cfg.seed)?;
            let (records, moments) = heun.into_iter().unzip();
            Ok(RecordSet {
                scenario: "scheme_comparison",
                records,
                moments,
                alt_records: ito.into_iter().map(|(r, _)| r).collect(),
                phys: Some(phys),
            })
        }
        ScenarioConfig::ClassicalOracle {
            n_records,
            oracle,
            dt,
            duration,
            phase_diffusion,
            telegraph_rate,
        } => {
            let ocfg = OracleConfig {
                kind: *oracle,
                omega: cfg.carrier().unwrap_or(0.0),
                phase_diffusion: *phase_diffusion,
                telegraph_rate: *telegraph_rate,
                dt: *dt,
                n_samples: step_count(*duration, *dt) as usize,
            };
            ocfg.validate().map_err(cfg_err)?;
            let records = generate_oracle_records(&ocfg, &cfg.detector, *n_records, cfg.seed)?;
            Ok(RecordSet {
                scenario: "classical_oracle",
                records,
                moments: Vec::new(),
                alt_records: Vec::new(),
                phys: None,
            })
        }
        ScenarioConfig::ExternalRecord { paths } => {
            let records: Vec<SignalRecord> = paths
                .iter()
                .map(|p| {
                    read_record_binary(p)
                        .map_err(|e| RunError::Runtime(format!("reading {}: {e}", p.display())))
                })
                .collect::<Result<_, _>>()?;
            let first = &records[0];
            for (i, r) in records.iter().enumerate() {
                if r.samples.len() != first.samples.len() || r.dt != first.dt {
                    return Err(RunError::Runtime(format!(
                        "record {} ({}) disagrees with record 0 on grid: {} samples at dt = {} \
                         vs {} at {}",
                        i,
                        paths[i].display(),
                        r.samples.len(),
                        r.dt,
                        first.samples.len(),
                        first.dt
                    )));
                }
            }
            Ok(RecordSet {
                scenario: "external_record",
                records,
                moments: Vec::new(),
                alt_records: Vec::new(),
                phys: None,
            })
        }
    }
}

fn records_report(set: &RecordSet) -> RecordsReport {
    let r0 = &set.records[0];
    let n = set.moments.len() as f64;
    let moments = (!set.moments.is_empty()).then(|| MomentsReport {
        mean_q: set.moments.iter().map(|m| m.mean_q).sum::<f64>() / n,
        q_sq_mean: set.moments.iter().map(|m| m.q_sq_mean).sum::<f64>() / n,
        two_im_rho_q_mean: set.moments.iter().map(|m| m.im_rho_q_mean).sum::<f64>() / n,
    });
    let integrator = (!set.moments.is_empty()).then(|| IntegratorReport {
        max_positivity_deficit: set
            .moments
            .iter()
            .map(|m| m.max_positivity_deficit)
            .fold(0.0, f64::max),
        max_population_excess: set
            .moments
            .iter()
            .map(|m| m.max_population_excess)
            .fold(0.0, f64::max),
        population_clamps: set.moments.iter().map(|m| m.population_clamps).sum(),
        coherence_shrinks: set.moments.iter().map(|m| m.coherence_shrinks).sum(),
    });
    RecordsReport {
        scenario: set.scenario,
        n_records: set.records.len(),
        samples_per_record: r0.samples.len(),
        dt: r0.dt,
        duration_per_record: r0.samples.len() as f64 * r0.dt,
        moments,
        integrator,
    }
}

fn pooled_correlator(
    records: &[SignalRecord],
    f: impl Fn(&SignalRecord) -> Result<CorrelatorEstimate, ModelError> + Sync,
) -> Result<CorrelatorEstimate, RunError> {
    let parts: Vec<CorrelatorEstimate> = records.par_iter().map(&f).collect::<Result<_, _>>()?;
    Ok(pool_correlators(&parts)?)
}

/// Pointwise z-scores of an estimate against a reference curve over a lag range.
fn compare_series(
    est: &CorrelatorEstimate,
    reference: &dyn Fn(f64) -> f64,
    first_lag: usize,
    with_rel_rms: bool,
) -> Result<SeriesComparison, RunError> {
    let last = est.max_lag();
    let mut max_abs_z = 0.0_f64;
    let mut max_abs_z_lag = first_lag;
    let mut n_beyond = 0usize;
    let mut chi2 = 0.0;
    for m in first_lag..=last {
        let z = (est.values[m] - reference(est.lag_time(m))) / est.stderr[m];
        chi2 += z * z;
        if z.abs() > 3.0 {
            n_beyond += 1;
        }
        if z.abs() > max_abs_z {
            max_abs_z = z.abs();
            max_abs_z_lag = m;
        }
    }
    let dof = (last - first_lag + 1) as f64;
    let relative_rms = if with_rel_rms {
        Some(relative_rms_error(est, first_lag..=last, reference)?)
    } else {
        None
    };
    Ok(SeriesComparison {
        first_lag,
        last_lag: last,
        relative_rms,
        max_abs_z,
        max_abs_z_lag,
        n_beyond_3sigma: n_beyond,
        chi2_per_dof: chi2 / dof,
    })
}

/// Exact full width at half maximum of the analytic line: the lineshape in omega^2
/// is a Lorentzian-like rational whose half-height crossings solve a quadratic.
fn analytic_fwhm(model: &AnalyticModel) -> f64 {
    let g = model.gamma_total;
    let w2 = model.omega * model.omega;
    let root = g * (4.0 * w2 - g * g).sqrt();
    let hi = w2 + 0.5 * (-g * g + root);
    let lo = w2 + 0.5 * (-g * g - root);
    hi.sqrt() - lo.sqrt()
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn run_analyses(
    cfg: &ExperimentConfig,
    set: &RecordSet,
    out_dir: &Path,
) -> Result<Vec<AnalysisReport>, RunError> {
    // Overdamped simulations run fine; only the analytic comparisons drop out.
    let model = set.phys.as_ref().and_then(|p| AnalyticModel::new(p).ok());
    let n_m = set.moments.len() as f64;
    let measured_moments = (!set.moments.is_empty()).then(|| StationaryMoments {
        q_sq: set.moments.iter().map(|m| m.q_sq_mean).sum::<f64>() / n_m,
        two_im_rho_q: set.moments.iter().map(|m| m.im_rho_q_mean).sum::<f64>() / n_m,
    });

    let mut out = Vec::with_capacity(cfg.analyses.len());
    let mut last_auto: Option<CorrelatorEstimate> = None;

    for (idx, analysis) in cfg.analyses.iter().enumerate() {
        let mut step = || -> Result<(), RunError> {
            match analysis {
                AnalysisConfig::Correlator {
                    max_lag,
                    n_batches,
                    cross,
                } => {
                    let auto = pooled_correlator(&set.records, |r| {
                        estimate_auto_correlator(r, *max_lag, *n_batches)
                    })?;
                    let cross_est = if *cross {
                        Some(pooled_correlator(&set.records, |r| {
                            estimate_cross_correlator(r, *max_lag, *n_batches)
                        })?)
                    } else {
                        None
                    };
                    let csv = format!("correlator_{idx:02}.csv");
                    write_correlator_csv(&out_dir.join(&csv), &auto, cross_est.as_ref())?;

                    let mut auto_vs_model = None;
                    let mut cross_vs_model = None;
                    let mut cross_vs_zero = None;
                    if let Some(m) = &model {
                        auto_vs_model = Some(compare_series(
                            &auto,
                            &|t| m.detector_correlator(t),
                            1,
                            true,
                        )?);
                        if let (Some(ce), Some(mom)) = (&cross_est, &measured_moments) {
                            cross_vs_model = Some(compare_series(
                                ce,
                                &|t| m.cross_correlator(mom, t),
                                1,
                                true,
                            )?);
                        }
                    } else if set.phys.is_none() {
                        if let Some(ce) = &cross_est {
                            cross_vs_zero = Some(compare_series(ce, &|_| 0.0, 0, false)?);
                        }
                    }

                    let scheme_comparison = if set.alt_records.is_empty() {
                        None
                    } else {
                        let alt = pooled_correlator(&set.alt_records, |r| {
                            estimate_auto_correlator(r, *max_lag, *n_batches)
                        })?;
                        let alt_csv = format!("correlator_{idx:02}_alt.csv");
                        write_correlator_csv(&out_dir.join(&alt_csv), &alt, None)?;
                        let peak_lag = (1..=auto.max_lag())
                            .max_by(|&a, &b| auto.values[a].abs().total_cmp(&auto.values[b].abs()))
                            .expect("max_lag >= 1");
                        let heun_value = auto.values[peak_lag];
                        let ito_value = alt.values[peak_lag];
                        Some(SchemeGapReport {
                            peak_lag,
                            peak_tau: auto.lag_time(peak_lag),
                            heun_value,
                            ito_value,
                            relative_gap_at_peak: (heun_value - ito_value).abs() / heun_value.abs(),
                            ito_values: alt.values,
                            ito_stderr: alt.stderr,
                        })
                    };

                    out.push(AnalysisReport::Correlator(CorrelatorReport {
                        analysis_index: idx,
                        dt: auto.dt,
                        max_lag: *max_lag,
                        n_batches_per_record: *n_batches,
                        n_batches_pooled: auto.batch_values.len(),
                        csv,
                        auto_values: auto.values.clone(),
                        auto_stderr: auto.stderr.clone(),
                        cross_values: cross_est.as_ref().map(|c| c.values.clone()),
                        cross_stderr: cross_est.as_ref().map(|c| c.stderr.clone()),
                        auto_vs_model,
                        cross_vs_model,
                        cross_vs_zero,
                        scheme_comparison,
                    }));
                    last_auto = Some(auto);
                }

                AnalysisConfig::Spectrum {
                    segment_len,
                    peak_center,
                    exclusion_halfwidth,
                    window_delta,
                } => {
                    let center = peak_center.or(cfg.carrier()).expect("validated");
                    let exclusion = exclusion_halfwidth
                        .unwrap_or_else(|| window_delta.map_or(0.5, |d| (5.0 * d).max(0.5)));
                    let specs: Vec<SpectrumEstimate> = set
                        .records
                        .par_iter()
                        .map(|r| estimate_spectrum(r, *segment_len))
                        .collect::<Result<_, _>>()?;
                    let pooled = pool_spectra(&specs)?;
                    let csv = format!("spectrum_{idx:02}.csv");
                    write_spectrum_csv(&out_dir.join(&csv), &pooled)?;
                    let pm = peak_metrics(&pooled, center, exclusion)?;

                    let filtered_area = match window_delta {
                        Some(delta) => {
                            // One area per record, each against its own pedestal, so the
                            // spread across records is a fair error bar.
                            let per_record: Vec<f64> = specs
                                .iter()
                                .map(|sp| {
                                    let ped = peak_metrics(sp, center, exclusion)?.pedestal;
                                    filtered_peak_area(sp, center, *delta, ped)
                                })
                                .collect::<Result<_, _>>()?;
                            let (mean, stderr) = mean_and_stderr(&per_record);
                            Some(FilteredAreaReport {
                                center,
                                delta: *delta,
                                per_record,
                                mean,
                                stderr,
                            })
                        }
                        None => None,
                    };
                    let model_rep = model.as_ref().map(|m| SpectrumModelReport {
                        peak_height: analytic_spectrum(m, m.omega),
                        fwhm: analytic_fwhm(m),
                        filtered_area: window_delta.map(|d| analytic_filtered_area(m, center, d)),
                    });

                    out.push(AnalysisReport::Spectrum(SpectrumReport {
                        analysis_index: idx,
                        segment_len: *segment_len,
                        n_segments_per_record: specs[0].n_segments,
                        n_segments_pooled: pooled.n_segments,
                        bin_width: pooled.bin_width(),
                        csv,
                        peak_center: center,
                        exclusion_halfwidth: exclusion,
                        peak: PeakReport {
                            omega_peak: pm.omega_peak,
                            height: pm.height,
                            fwhm: pm.fwhm,
                            pedestal: pm.pedestal,
                        },
                        filtered_area,
                        model: model_rep,
                    }));
                }

                AnalysisConfig::TwoTimeInequality {
                    pairs,
                    random_pairs,
                    random_min_lag,
                    random_max_lag,
                } => {
                    let est = last_auto.as_ref().expect("validated: correlator precedes");
                    let amplitude = cfg.detector.signal_scale();
                    let analytic = |t1: f64, t2: f64| {
                        model.as_ref().map(|m| {
                            (m.detector_correlator(t1) + m.detector_correlator(t2)
                                - m.detector_correlator(t1 + t2))
                                / m.amplitude
                        })
                    };
                    let to_point = |p: weakmeas::LgPoint| TwoTimePoint {
                        tau1: p.tau1,
                        tau2: p.tau2,
                        lhs: p.lhs,
                        stderr: p.stderr,
                        excess_sigma: p.excess_sigma,
                        analytic_lhs: analytic(p.tau1, p.tau2),
                    };
                    let explicit: Vec<TwoTimePoint> = pairs
                        .iter()
                        .map(|[t1, t2]| lg_combination(est, amplitude, *t1, *t2).map(&to_point))
                        .collect::<Result<_, _>>()?;
                    let mut random = Vec::with_capacity(*random_pairs);
                    if *random_pairs > 0 {
                        let min = random_min_lag.unwrap_or(1).max(1);
                        let max = random_max_lag.unwrap_or(est.max_lag() / 2);
                        if min > max || 2 * max > est.max_lag() {
                            return Err(RunError::Config(ConfigError(format!(
                                "random lag range [{min}, {max}] does not fit twice into \
                             max_lag {}",
                                est.max_lag()
                            ))));
                        }
                        let mut rng = stream_rng(cfg.seed, PAIR_STREAM);
                        for _ in 0..*random_pairs {
                            let m1 = rng.random_range(min..=max);
                            let m2 = rng.random_range(min..=max);
                            let p = lg_combination(
                                est,
                                amplitude,
                                m1 as f64 * est.dt,
                                m2 as f64 * est.dt,
                            )?;
                            random.push(to_point(p));
                        }
                    }
                    let n_random_violations_3sigma = random
                        .iter()
                        .filter(|p| p.lhs > 1.0 && p.excess_sigma >= 3.0)
                        .count();
                    let max_excess_sigma = explicit
                        .iter()
                        .chain(&random)
                        .map(|p| p.excess_sigma)
                        .fold(f64::NEG_INFINITY, f64::max);
                    out.push(AnalysisReport::TwoTimeInequality(TwoTimeReport {
                        analysis_index: idx,
                        amplitude,
                        brute_force_bound: classical_three_point_max(201),
                        explicit,
                        random,
                        n_random_violations_3sigma,
                        max_excess_sigma,
                    }));
                }

                AnalysisConfig::WindowEquivalence { center, delta } => {
                    let half_di = 0.5 * cfg.detector.delta_i;
                    let per_record: Vec<LemmaPoint> = set
                        .records
                        .par_iter()
                        .map(|r| {
                            let q = r.q_truth.as_ref().ok_or(ModelError::MissingTruthChannels)?;
                            let series: Vec<f64> = q.iter().map(|&v| half_di * v).collect();
                            let l = verify_window_equivalence(&series, r.dt, *center, *delta)?;
                            Ok(LemmaPoint {
                                frequency_side: l.frequency_side,
                                time_side: l.time_side,
                                relative_gap: l.relative_gap,
                            })
                        })
                        .collect::<Result<_, ModelError>>()?;
                    let n = per_record.len() as f64;
                    out.push(AnalysisReport::WindowEquivalence(WindowEquivalenceReport {
                        analysis_index: idx,
                        center: *center,
                        delta: *delta,
                        max_relative_gap: per_record
                            .iter()
                            .map(|p| p.relative_gap)
                            .fold(0.0, f64::max),
                        mean_frequency_side: per_record
                            .iter()
                            .map(|p| p.frequency_side)
                            .sum::<f64>()
                            / n,
                        mean_time_side: per_record.iter().map(|p| p.time_side).sum::<f64>() / n,
                        per_record,
                    }));
                }

                AnalysisConfig::SaveRecords {} => {
                    let files: Vec<String> = (0..set.records.len())
                        .map(|i| format!("records/record_{i:03}"))
                        .collect();
                    for (base, rec) in files.iter().zip(&set.records) {
                        write_record_binary(&out_dir.join(base), rec)?;
                    }
                    out.push(AnalysisReport::SaveRecords(SaveRecordsReport {
                        analysis_index: idx,
                        files,
                    }));
                }

                AnalysisConfig::TrajectoryDump { n_steps } => {
                    let ScenarioConfig::QuantumSim {
                        dt,
                        discard_duration,
                        scheme,
                        renormalize_every,
                        initial,
                        ..
                    } = &cfg.scenario
                    else {
                        unreachable!("validated: quantum scenario only");
                    };
                    let phys = set.phys.as_ref().expect("quantum scenario");
                    let sim = SimConfig {
                        dt: *dt,
                        n_steps: *n_steps,
                        discard_steps: step_count(*discard_duration, *dt),
                        scheme: *scheme,
                        initial: initial.density_matrix(),
                        renormalize_every: *renormalize_every,
                        decimate: 1,
                    };
                    // Same stream as record 0, so the dump is that record's opening.
                    let mut streams = RecordStreams::new(cfg.seed, 0);
                    let traj = simulate(phys, &sim, &mut streams.noise)?;
                    let file = format!("trajectory_{idx:02}.csv");
                    write_trajectory_csv(&out_dir.join(&file), &traj)?;
                    out.push(AnalysisReport::TrajectoryDump(TrajectoryDumpReport {
                        analysis_index: idx,
                        file,
                        n_steps: *n_steps,
                    }));
                }
            }
            Ok(())
        };
        step().map_err(|e| e.in_analysis(idx, analysis_kind_name(analysis)))?;
    }
    Ok(out)
}

fn analysis_kind_name(a: &AnalysisConfig) -> &'static str {
    match a {
        AnalysisConfig::Correlator { .. } => "correlator",
        AnalysisConfig::Spectrum { .. } => "spectrum",
        AnalysisConfig::TwoTimeInequality { .. } => "two_time_inequality",
        AnalysisConfig::WindowEquivalence { .. } => "window_equivalence",
        AnalysisConfig::SaveRecords {} => "save_records",
        AnalysisConfig::TrajectoryDump { .. } => "trajectory_dump",
    }
}

/// Execute one config: generate records, run analyses, write artifacts.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunOutcome, RunError> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| io_err("creating output dir", e))?;
    let t_start = Instant::now();
    let set = build_records(cfg)?;
    let generation_s = t_start.elapsed().as_secs_f64();

    let t_analysis = Instant::now();
    let analyses = run_analyses(cfg, &set, out_dir)?;
    let report = Report {
        schema_version: REPORT_SCHEMA_VERSION,
        seed: cfg.seed,
        seed_derivation: SEED_DERIVATION,
        config: cfg.clone(),
        records: records_report(&set),
        analyses,
    };
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| RunError::Runtime(format!("serializing report: {e}")))?;
    let report_path = out_dir.join("report.json");
    std::fs::write(&report_path, json + "\n").map_err(|e| io_err("writing report.json", e))?;
    let analysis_s = t_analysis.elapsed().as_secs_f64();

    let timings = Timings {
        generation_s,
        analysis_s,
        total_s: t_start.elapsed().as_secs_f64(),
    };
    let summary = render_summary(&report, &timings);
    std::fs::write(out_dir.join("summary.txt"), &summary)
        .map_err(|e| io_err("writing summary.txt", e))?;
    Ok(RunOutcome {
        report,
        summary,
        report_path,
    })
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// Verdict margins of one sweep member, extracted from its full report (which
/// stays available under the member's run directory).
#[derive(Debug, Clone, serde::Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub seed: u64,
    pub run_dir: String,
    pub lg_tau1: Option<f64>,
    pub lg_tau2: Option<f64>,
    pub lg_lhs: Option<f64>,
    pub lg_stderr: Option<f64>,
    pub lg_excess_sigma: Option<f64>,
    pub lg_analytic: Option<f64>,
    pub area_mean: Option<f64>,
    pub area_stderr: Option<f64>,
    pub lemma_max_gap: Option<f64>,
    pub scheme_gap: Option<f64>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SweepSummary {
    pub schema_version: u32,
    pub param: &'static str,
    pub rows: Vec<SweepRow>,
}

pub struct SweepOutcome {
    pub summary: SweepSummary,
    pub csv_path: PathBuf,
}

fn extract_row(value: f64, rep: &Report, run_dir: String) -> SweepRow {
    let mut row = SweepRow {
        value,
        seed: rep.seed,
        run_dir,
        lg_tau1: None,
        lg_tau2: None,
        lg_lhs: None,
        lg_stderr: None,
        lg_excess_sigma: None,
        lg_analytic: None,
        area_mean: None,
        area_stderr: None,
        lemma_max_gap: None,
        scheme_gap: None,
    };
    for a in &rep.analyses {
        match a {
            AnalysisReport::TwoTimeInequality(tt) if row.lg_lhs.is_none() => {
                // Prefer the first explicit pair; fall back to the worst random one.
                let point = tt.explicit.first().or_else(|| {
                    tt.random
                        .iter()
                        .max_by(|a, b| a.excess_sigma.total_cmp(&b.excess_sigma))
                });
                if let Some(p) = point {
                    row.lg_tau1 = Some(p.tau1);
                    row.lg_tau2 = Some(p.tau2);
                    row.lg_lhs = Some(p.lhs);
                    row.lg_stderr = Some(p.stderr);
                    row.lg_excess_sigma = Some(p.excess_sigma);
                    row.lg_analytic = p.analytic_lhs;
                }
            }
            AnalysisReport::Spectrum(sp) if row.area_mean.is_none() => {
                if let Some(fa) = &sp.filtered_area {
                    row.area_mean = Some(fa.mean);
                    row.area_stderr = Some(fa.stderr);
                }
            }
            AnalysisReport::WindowEquivalence(w) if row.lemma_max_gap.is_none() => {
                row.lemma_max_gap = Some(w.max_relative_gap);
            }
            AnalysisReport::Correlator(c) if row.scheme_gap.is_none() => {
                if let Some(g) = &c.scheme_comparison {
                    row.scheme_gap = Some(g.relative_gap_at_peak);
                }
            }
            _ => {}
        }
    }
    row
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Run the config once per value with derived seeds (base seed + value index),
/// in parallel, then assemble the margin table single-threaded.
pub fn run_sweep(
    base: &ExperimentConfig,
    param: SweepParam,
    values: &[f64],
    out_root: &Path,
) -> Result<SweepOutcome, RunError> {
    base.validate()?;
    if values.is_empty() {
        return Err(RunError::Config(ConfigError(
            "sweep needs at least one value".into(),
        )));
    }
    let mut members = Vec::with_capacity(values.len());
    for (i, &v) in values.iter().enumerate() {
        let mut cfg = param.apply(base, v)?;
        cfg.seed = base.seed + i as u64;
        members.push((format!("value_{i:02}"), v, cfg));
    }
    std::fs::create_dir_all(out_root).map_err(|e| io_err("creating sweep dir", e))?;

    let reports: Vec<Report> = members
        .par_iter()
        .map(|(dir, _, cfg)| run_experiment(cfg, &out_root.join(dir)).map(|o| o.report))
        .collect::<Result<_, _>>()?;

    let rows: Vec<SweepRow> = members
        .iter()
        .zip(&reports)
        .map(|((dir, v, _), rep)| extract_row(*v, rep, dir.clone()))
        .collect();

    let mut csv = String::from(
        "value,seed,run_dir,lg_tau1,lg_tau2,lg_lhs,lg_stderr,lg_excess_sigma,lg_analytic,\
         area_mean,area_stderr,lemma_max_gap,scheme_gap\n",
    );
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.value,
            r.seed,
            r.run_dir,
            opt_cell(r.lg_tau1),
            opt_cell(r.lg_tau2),
            opt_cell(r.lg_lhs),
            opt_cell(r.lg_stderr),
            opt_cell(r.lg_excess_sigma),
            opt_cell(r.lg_analytic),
            opt_cell(r.area_mean),
            opt_cell(r.area_stderr),
            opt_cell(r.lemma_max_gap),
            opt_cell(r.scheme_gap),
        ));
    }
    let csv_path = out_root.join("sweep_margins.csv");
    std::fs::write(&csv_path, &csv).map_err(|e| io_err("writing sweep_margins.csv", e))?;

    let summary = SweepSummary {
        schema_version: REPORT_SCHEMA_VERSION,
        param: param.name(),
        rows,
    };
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| RunError::Runtime(format!("serializing sweep summary: {e}")))?;
    std::fs::write(out_root.join("sweep_summary.json"), json + "\n")
        .map_err(|e| io_err("writing sweep_summary.json", e))?;
    Ok(SweepOutcome { summary, csv_path })
}
