//! Continuous weak-measurement simulator and signal analysis for a single qubit.

pub mod correlator;
pub mod ensemble;
pub mod error;
pub mod model;
pub mod oracle;
pub mod record_io;
pub mod rng;
pub mod spectrum;
pub mod trajectory;

pub use correlator::{
    classical_three_point_max, estimate_auto_correlator, estimate_cross_correlator, lg_combination,
    pool_correlators, relative_rms_error, AnalyticModel, CorrelatorEstimate, LgPoint,
    StationaryMoments,
};
pub use ensemble::{generate_oracle_records, generate_quantum_records};
pub use error::ModelError;
pub use model::{
    derive_rates, sample_noise, DensityMatrix, DetectorParams, PhysicalConfig, QubitParams, Rates,
    SignalRecord, STATE_TOL,
};
pub use oracle::{generate_oracle, rectangular_q, OracleConfig, OracleKind};
pub use record_io::{
    read_record_binary, write_correlator_csv, write_record_binary, write_spectrum_csv,
    write_trajectory_csv, RecordSidecar,
};
pub use rng::{stream_rng, RecordStreams};
pub use spectrum::{
    analytic_filtered_area, analytic_spectrum, estimate_spectrum, filtered_peak_area, peak_metrics,
    pool_spectra, verify_window_equivalence, LemmaReport, PeakMetrics, SpectrumEstimate,
    COSINE_FUNDAMENTAL_WEIGHT, RECT_FUNDAMENTAL_WEIGHT,
};
pub use trajectory::{
    simulate, simulate_signal, Scheme, SimConfig, TrajectoryMoments, TrajectoryRecord,
};
