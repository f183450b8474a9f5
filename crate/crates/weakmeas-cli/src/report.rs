//! Machine-readable run report and the human-readable summary rendered from it.
//!
//! `report.json` is the deterministic artifact: identical config and seed reproduce
//! it byte for byte, so it holds no wall-clock data and no absolute paths (artifact
//! references are relative to the output directory). Wall-clock timings go to
//! `summary.txt` only. Every number printed in the summary is read back out of the
//! report, never computed on the side.

use serde::Serialize;

use crate::config::ExperimentConfig;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// How record and analysis substreams derive from the master seed. Echoed in every
/// report so an external reimplementation can line up its RNG consumption.
pub const SEED_DERIVATION: &str = "ChaCha8(seed): record j reads noise from stream 2j \
     and its signal process from stream 2j+1; random tau pairs read stream 1000003";

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub seed: u64,
    pub seed_derivation: &'static str,
    /// Effective config after command-line overrides (output directory excluded).
    pub config: ExperimentConfig,
    pub records: RecordsReport,
    pub analyses: Vec<AnalysisReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecordsReport {
    pub scenario: &'static str,
    pub n_records: usize,
    pub samples_per_record: usize,
    /// Sample spacing of the analyzed records (after any decimation).
    pub dt: f64,
    pub duration_per_record: f64,
    /// Full-resolution stationary averages, pooled over records (simulation only).
    pub moments: Option<MomentsReport>,
    /// Integrator hygiene counters, pooled over records (simulation only).
    pub integrator: Option<IntegratorReport>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MomentsReport {
    pub mean_q: f64,
    pub q_sq_mean: f64,
    pub two_im_rho_q_mean: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IntegratorReport {
    pub max_positivity_deficit: f64,
    pub max_population_excess: f64,
    pub population_clamps: u64,
    pub coherence_shrinks: u64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
// A run produces a handful of these, so boxing the large variants buys nothing.
#[allow(clippy::large_enum_variant)]
pub enum AnalysisReport {
    Correlator(CorrelatorReport),
    Spectrum(SpectrumReport),
    TwoTimeInequality(TwoTimeReport),
    WindowEquivalence(WindowEquivalenceReport),
    SaveRecords(SaveRecordsReport),
    TrajectoryDump(TrajectoryDumpReport),
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrelatorReport {
    /// Position in the config's analysis list; artifact files carry the same index.
    pub analysis_index: usize,
    pub dt: f64,
    pub max_lag: usize,
    pub n_batches_per_record: usize,
    pub n_batches_pooled: usize,
    /// Relative path of the columnar artifact.
    pub csv: String,
    pub auto_values: Vec<f64>,
    pub auto_stderr: Vec<f64>,
    pub cross_values: Option<Vec<f64>>,
    pub cross_stderr: Option<Vec<f64>>,
    /// Detector correlator vs the analytic form (simulation scenarios).
    pub auto_vs_model: Option<SeriesComparison>,
    /// Noise-signal correlator vs the analytic back-action form with measured
    /// moments (simulation scenarios).
    pub cross_vs_model: Option<SeriesComparison>,
    /// Noise-signal correlator against zero (classical and external records,
    /// where the output noise never steers the signal).
    pub cross_vs_zero: Option<SeriesComparison>,
    /// Integration-scheme cross-check (scheme-comparison scenario).
    pub scheme_comparison: Option<SchemeGapReport>,
}

/// Pointwise comparison of an estimated lag series against a reference curve,
/// using the estimate's batch-mean errors.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeriesComparison {
    pub first_lag: usize,
    pub last_lag: usize,
    /// Relative RMS mismatch over the lag range; absent for a zero reference.
    pub relative_rms: Option<f64>,
    pub max_abs_z: f64,
    pub max_abs_z_lag: usize,
    pub n_beyond_3sigma: usize,
    pub chi2_per_dof: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SchemeGapReport {
    /// Lag of the largest |K| on the primary (Stratonovich) estimate, excluding zero.
    pub peak_lag: usize,
    pub peak_tau: f64,
    pub heun_value: f64,
    pub ito_value: f64,
    pub relative_gap_at_peak: f64,
    /// Full alternate-scheme estimate for plotting the gap lag by lag.
    pub ito_values: Vec<f64>,
    pub ito_stderr: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub analysis_index: usize,
    pub segment_len: usize,
    pub n_segments_per_record: usize,
    pub n_segments_pooled: usize,
    pub bin_width: f64,
    pub csv: String,
    pub peak_center: f64,
    pub exclusion_halfwidth: f64,
    pub peak: PeakReport,
    pub filtered_area: Option<FilteredAreaReport>,
    pub model: Option<SpectrumModelReport>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PeakReport {
    pub omega_peak: f64,
    pub height: f64,
    pub fwhm: f64,
    pub pedestal: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FilteredAreaReport {
    pub center: f64,
    pub delta: f64,
    /// One area per record, each with its own pedestal; the spread across records
    /// gives an error bar free of within-spectrum bin correlations.
    pub per_record: Vec<f64>,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectrumModelReport {
    /// Analytic peak height including the pedestal.
    pub peak_height: f64,
    pub fwhm: f64,
    /// Analytic value of the same Gaussian-filtered area, when one was measured.
    pub filtered_area: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TwoTimeReport {
    pub analysis_index: usize,
    /// Normalization `(dI/2)^2`; every lhs below is divided by it, bound = 1.
    pub amplitude: f64,
    /// Grid maximum of `k1 + k2 - k12` over realizable classical correlation
    /// triples (201 points per axis); the bound the measurements are held to.
    pub brute_force_bound: f64,
    pub explicit: Vec<TwoTimePoint>,
    pub random: Vec<TwoTimePoint>,
    pub n_random_violations_3sigma: usize,
    /// Largest `(lhs - 1) / stderr` over all points, explicit and random.
    pub max_excess_sigma: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TwoTimePoint {
    pub tau1: f64,
    pub tau2: f64,
    pub lhs: f64,
    pub stderr: f64,
    pub excess_sigma: f64,
    /// Analytic lhs from the stationary detector correlator (simulation scenarios).
    pub analytic_lhs: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowEquivalenceReport {
    pub analysis_index: usize,
    pub center: f64,
    pub delta: f64,
    pub per_record: Vec<LemmaPoint>,
    pub max_relative_gap: f64,
    pub mean_frequency_side: f64,
    pub mean_time_side: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LemmaPoint {
    pub frequency_side: f64,
    pub time_side: f64,
    pub relative_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SaveRecordsReport {
    pub analysis_index: usize,
    /// Relative base paths; each base has a `.f64` block and a `.json` sidecar.
    pub files: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryDumpReport {
    pub analysis_index: usize,
    pub file: String,
    pub n_steps: u64,
}

/// Wall-clock phases, printed in the summary only.
#[derive(Debug, Clone, Default)]
pub struct Timings {
    pub generation_s: f64,
    pub analysis_s: f64,
    pub total_s: f64,
}

pub fn render_summary(report: &Report, timings: &Timings) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    let r = &report.records;
    let _ = writeln!(s, "seed {}  scenario {}", report.seed, r.scenario);
    let _ = writeln!(
        s,
        "records: {} x {} samples at dt = {}  (duration {} per record)",
        r.n_records, r.samples_per_record, r.dt, r.duration_per_record
    );
    if let Some(m) = &r.moments {
        let _ = writeln!(
            s,
            "stationary moments: <Q> = {:+.4}  <Q^2> = {:.4}  <2 Im(rho12) Q> = {:+.4}",
            m.mean_q, m.q_sq_mean, m.two_im_rho_q_mean
        );
    }
    if let Some(i) = &r.integrator {
        let _ = writeln!(
            s,
            "integrator: worst positivity deficit {:.2e}, worst population excess {:.2e}, \
             {} clamps, {} shrinks",
            i.max_positivity_deficit,
            i.max_population_excess,
            i.population_clamps,
            i.coherence_shrinks
        );
    }
    for a in &report.analyses {
        let _ = writeln!(s);
        match a {
            AnalysisReport::Correlator(c) => {
                let _ = writeln!(
                    s,
                    "[{}] correlator: {} lags at dt = {}, {} pooled batches -> {}",
                    c.analysis_index, c.max_lag, c.dt, c.n_batches_pooled, c.csv
                );
                if let Some(m) = &c.auto_vs_model {
                    let _ = writeln!(
                        s,
                        "    detector correlator vs analytic: rel RMS {:.2}% over lags \
                         {}..={}, max |z| = {:.2} at lag {}, {} lags beyond 3 sigma",
                        m.relative_rms.unwrap_or(f64::NAN) * 100.0,
                        m.first_lag,
                        m.last_lag,
                        m.max_abs_z,
                        m.max_abs_z_lag,
                        m.n_beyond_3sigma
                    );
                }
                if let Some(m) = &c.cross_vs_model {
                    let _ = writeln!(
                        s,
                        "    noise-signal correlator vs back-action form: rel RMS {:.2}%, \
                         max |z| = {:.2}, chi2/dof = {:.3}",
                        m.relative_rms.unwrap_or(f64::NAN) * 100.0,
                        m.max_abs_z,
                        m.chi2_per_dof
                    );
                }
                if let Some(m) = &c.cross_vs_zero {
                    let _ = writeln!(
                        s,
                        "    noise-signal correlator vs zero: max |z| = {:.2}, \
                         chi2/dof = {:.3} over lags {}..={}",
                        m.max_abs_z, m.chi2_per_dof, m.first_lag, m.last_lag
                    );
                }
                if let Some(g) = &c.scheme_comparison {
                    let _ = writeln!(
                        s,
                        "    scheme gap at peak lag {} (tau = {}): heun {:.6} vs ito {:.6} \
                         -> {:.3}% relative",
                        g.peak_lag,
                        g.peak_tau,
                        g.heun_value,
                        g.ito_value,
                        g.relative_gap_at_peak * 100.0
                    );
                }
            }
            AnalysisReport::Spectrum(sp) => {
                let _ = writeln!(
                    s,
                    "[{}] spectrum: {} segments of {} -> {}",
                    sp.analysis_index, sp.n_segments_pooled, sp.segment_len, sp.csv
                );
                let _ = writeln!(
                    s,
                    "    peak at omega = {:.4}: height {:.3}, fwhm {:.4}, pedestal {:.4}",
                    sp.peak.omega_peak, sp.peak.height, sp.peak.fwhm, sp.peak.pedestal
                );
                if let Some(m) = &sp.model {
                    let _ = writeln!(
                        s,
                        "    analytic: height {:.3}, fwhm {:.4}",
                        m.peak_height, m.fwhm
                    );
                }
                if let Some(fa) = &sp.filtered_area {
                    let _ = writeln!(
                        s,
                        "    filtered area (delta = {}): {:.4} +- {:.4} over {} records",
                        fa.delta,
                        fa.mean,
                        fa.stderr,
                        fa.per_record.len()
                    );
                    if let Some(m) = &sp.model {
                        if let Some(a) = m.filtered_area {
                            let _ = writeln!(s, "    analytic filtered area: {a:.4}");
                        }
                    }
                }
            }
            AnalysisReport::TwoTimeInequality(tt) => {
                let _ = writeln!(
                    s,
                    "[{}] two-time inequality, normalized by amplitude {:.4} \
                     (classical bound 1, brute-force grid max {:.6}):",
                    tt.analysis_index, tt.amplitude, tt.brute_force_bound
                );
                for p in &tt.explicit {
                    let verdict = if p.excess_sigma >= 3.0 {
                        "VIOLATED"
                    } else {
                        "not violated"
                    };
                    let _ = writeln!(
                        s,
                        "    tau = ({:.4}, {:.4}): lhs = {:.4} +- {:.4}  bound = 1  \
                         -> {} ({:+.1} sigma)",
                        p.tau1, p.tau2, p.lhs, p.stderr, verdict, p.excess_sigma
                    );
                    if let Some(a) = p.analytic_lhs {
                        let _ = writeln!(s, "       analytic lhs {a:.4}");
                    }
                }
                if !tt.random.is_empty() {
                    let _ = writeln!(
                        s,
                        "    random pairs: {} tested, {} violations at 3 sigma, \
                         max excess {:+.2} sigma",
                        tt.random.len(),
                        tt.n_random_violations_3sigma,
                        tt.max_excess_sigma
                    );
                }
            }
            AnalysisReport::WindowEquivalence(w) => {
                let _ = writeln!(
                    s,
                    "[{}] window identity (center = {}, delta = {}): max relative gap \
                     {:.3}% over {} records (freq {:.5}, time {:.5})",
                    w.analysis_index,
                    w.center,
                    w.delta,
                    w.max_relative_gap * 100.0,
                    w.per_record.len(),
                    w.mean_frequency_side,
                    w.mean_time_side
                );
            }
            AnalysisReport::SaveRecords(sr) => {
                let _ = writeln!(
                    s,
                    "[{}] saved {} records under records/",
                    sr.analysis_index,
                    sr.files.len()
                );
            }
            AnalysisReport::TrajectoryDump(td) => {
                let _ = writeln!(
                    s,
                    "[{}] trajectory dump: {} steps -> {}",
                    td.analysis_index, td.n_steps, td.file
                );
            }
        }
    }
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "timing: generation {:.2} s, analysis {:.2} s, total {:.2} s",
        timings.generation_s, timings.analysis_s, timings.total_s
    );
    s
}
