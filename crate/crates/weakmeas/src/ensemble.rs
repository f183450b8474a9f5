//! Parallel generation of record ensembles with deterministic stream assignment.
//!
//! Record `j` of a run with master seed `s` always consumes the same random streams
//! (`RecordStreams::new(s, j)`) no matter how work lands on threads, and results
//! collect in index order, so every ensemble quantity is reproducible bit for bit
//! across thread counts. Quantum records draw only background noise; oracle records
//! additionally draw their signal process from the paired stream, which keeps the
//! noise realization of record `j` identical across scenario kinds.

use rayon::prelude::*;

use crate::error::ModelError;
use crate::model::{DetectorParams, PhysicalConfig, SignalRecord};
use crate::oracle::{generate_oracle, OracleConfig};
use crate::rng::RecordStreams;
use crate::trajectory::{simulate_signal, SimConfig, TrajectoryMoments};

/// Simulate `n_records` independent conditioned records in parallel.
pub fn generate_quantum_records(
    phys: &PhysicalConfig,
    sim: &SimConfig,
    n_records: usize,
    seed: u64,
) -> Result<Vec<(SignalRecord, TrajectoryMoments)>, ModelError> {
    if n_records == 0 {
        return Err(ModelError::InvalidParameter { name: "n_records" });
    }
    (0..n_records)
        .into_par_iter()
        .map(|idx| {
            let mut streams = RecordStreams::new(seed, idx as u64);
            simulate_signal(phys, sim, &mut streams.noise)
        })
        .collect()
}

/// Generate `n_records` independent oracle records in parallel.
pub fn generate_oracle_records(
    cfg: &OracleConfig,
    detector: &DetectorParams,
    n_records: usize,
    seed: u64,
) -> Result<Vec<SignalRecord>, ModelError> {
    if n_records == 0 {
        return Err(ModelError::InvalidParameter { name: "n_records" });
    }
    (0..n_records)
        .into_par_iter()
        .map(|idx| {
            let mut streams = RecordStreams::new(seed, idx as u64);
            generate_oracle(cfg, detector, &mut streams)
        })
        .collect()
}
