//! On-disk formats for records and analysis results.
//!
//! Text outputs are CSV with fixed headers:
//! * trajectory: `t,rho11,re_rho12,im_rho12,q,xi,i`
//! * correlators: `tau,k_i,k_i_stderr,k_xi_q,k_xi_q_stderr` (cross columns empty
//!   when the record carries no truth channels)
//! * spectrum: `omega,s_i,s_i_stderr`
//!
//! Floats print in Rust's shortest round-trip form, so files are byte-stable across
//! runs with identical inputs.
//!
//! Records travel as raw little-endian f64 blocks with a JSON sidecar: for a base
//! path `rec`, the data live in `rec.f64` and the metadata in `rec.json`. Channels
//! are concatenated in the order the sidecar lists them (`i` first, then optional
//! `q_truth` and `xi_truth`), each `n_samples` long.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::correlator::CorrelatorEstimate;
use crate::error::ModelError;
use crate::model::SignalRecord;
use crate::spectrum::SpectrumEstimate;
use crate::trajectory::TrajectoryRecord;

/// Sidecar metadata stored next to the raw sample block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordSidecar {
    pub schema_version: u32,
    pub dt: f64,
    pub i0: f64,
    pub n_samples: usize,
    /// Channel blocks in file order.
    pub channels: Vec<String>,
    pub byte_order: String,
    pub dtype: String,
}

pub const SIDECAR_SCHEMA_VERSION: u32 = 1;

fn sidecar_path(base: &Path) -> PathBuf {
    base.with_extension("json")
}

fn data_path(base: &Path) -> PathBuf {
    base.with_extension("f64")
}

/// Write a record as `base.f64` plus `base.json`.
pub fn write_record_binary(base: &Path, record: &SignalRecord) -> Result<(), ModelError> {
    let mut channels = vec!["i".to_string()];
    let mut blocks: Vec<&[f64]> = vec![&record.samples];
    if let Some(q) = &record.q_truth {
        channels.push("q_truth".to_string());
        blocks.push(q);
    }
    if let Some(xi) = &record.xi_truth {
        channels.push("xi_truth".to_string());
        blocks.push(xi);
    }
    let sidecar = RecordSidecar {
        schema_version: SIDECAR_SCHEMA_VERSION,
        dt: record.dt,
        i0: record.i0,
        n_samples: record.samples.len(),
        channels,
        byte_order: "little".to_string(),
        dtype: "f64".to_string(),
    };
    let mut bytes = Vec::with_capacity(8 * record.samples.len() * blocks.len());
    for block in blocks {
        for v in block {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    if let Some(dir) = base.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(data_path(base), &bytes)?;
    let json = serde_json::to_string_pretty(&sidecar).map_err(|e| ModelError::Malformed {
        detail: e.to_string(),
    })?;
    fs::write(sidecar_path(base), json + "\n")?;
    Ok(())
}

/// Read a record written by `write_record_binary` (or any tool following the
/// sidecar layout).
pub fn read_record_binary(base: &Path) -> Result<SignalRecord, ModelError> {
    let json = fs::read_to_string(sidecar_path(base))?;
    let sidecar: RecordSidecar =
        serde_json::from_str(&json).map_err(|e| ModelError::Malformed {
            detail: e.to_string(),
        })?;
    if sidecar.schema_version != SIDECAR_SCHEMA_VERSION {
        return Err(ModelError::Malformed {
            detail: format!("unsupported schema_version {}", sidecar.schema_version),
        });
    }
    if sidecar.byte_order != "little" || sidecar.dtype != "f64" {
        return Err(ModelError::Malformed {
            detail: format!(
                "unsupported layout: byte_order {}, dtype {}",
                sidecar.byte_order, sidecar.dtype
            ),
        });
    }
    let bytes = fs::read(data_path(base))?;
    let expect = 8 * sidecar.n_samples * sidecar.channels.len();
    if bytes.len() != expect {
        return Err(ModelError::Malformed {
            detail: format!(
                "data block is {} bytes, sidecar implies {expect}",
                bytes.len()
            ),
        });
    }
    let mut blocks: Vec<Vec<f64>> = Vec::with_capacity(sidecar.channels.len());
    for c in 0..sidecar.channels.len() {
        let lo = 8 * sidecar.n_samples * c;
        let block: Vec<f64> = (0..sidecar.n_samples)
            .map(|i| {
                let at = lo + 8 * i;
                f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap())
            })
            .collect();
        blocks.push(block);
    }
    let mut samples = None;
    let mut q_truth = None;
    let mut xi_truth = None;
    for (name, block) in sidecar.channels.iter().zip(blocks) {
        match name.as_str() {
            "i" => samples = Some(block),
            "q_truth" => q_truth = Some(block),
            "xi_truth" => xi_truth = Some(block),
            other => {
                return Err(ModelError::Malformed {
                    detail: format!("unknown channel `{other}`"),
                })
            }
        }
    }
    let samples = samples.ok_or(ModelError::Malformed {
        detail: "missing `i` channel".to_string(),
    })?;
    SignalRecord::new(sidecar.dt, sidecar.i0, samples, q_truth, xi_truth)
}

/// Full-resolution trajectory dump.
pub fn write_trajectory_csv(path: &Path, rec: &TrajectoryRecord) -> Result<(), ModelError> {
    let mut out = String::from("t,rho11,re_rho12,im_rho12,q,xi,i\n");
    for n in 0..rec.len() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            rec.t[n], rec.rho11[n], rec.re_rho12[n], rec.im_rho12[n], rec.q[n], rec.xi[n], rec.i[n]
        ));
    }
    write_atomic(path, out.as_bytes())
}

/// Correlator table; the cross columns stay empty when no cross estimate exists.
pub fn write_correlator_csv(
    path: &Path,
    auto: &CorrelatorEstimate,
    cross: Option<&CorrelatorEstimate>,
) -> Result<(), ModelError> {
    if let Some(c) = cross {
        if c.max_lag() != auto.max_lag() || (c.dt - auto.dt).abs() > 1e-12 * auto.dt {
            return Err(ModelError::InvalidParameter { name: "cross" });
        }
    }
    let mut out = String::from("tau,k_i,k_i_stderr,k_xi_q,k_xi_q_stderr\n");
    for m in 0..=auto.max_lag() {
        let (kxq, kxq_err) = match cross {
            Some(c) => (c.values[m].to_string(), c.stderr[m].to_string()),
            None => (String::new(), String::new()),
        };
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            auto.lag_time(m),
            auto.values[m],
            auto.stderr[m],
            kxq,
            kxq_err
        ));
    }
    write_atomic(path, out.as_bytes())
}

/// One-sided spectrum table.
pub fn write_spectrum_csv(path: &Path, est: &SpectrumEstimate) -> Result<(), ModelError> {
    let mut out = String::from("omega,s_i,s_i_stderr\n");
    for k in 0..est.omega.len() {
        out.push_str(&format!(
            "{},{},{}\n",
            est.omega[k], est.values[k], est.stderr[k]
        ));
    }
    write_atomic(path, out.as_bytes())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), ModelError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn sample_record(with_truth: bool) -> SignalRecord {
        let samples = vec![0.5, -1.25, 2.0, 0.125];
        let q = with_truth.then(|| vec![1.0, -1.0, 1.0, 1.0]);
        let xi = with_truth.then(|| vec![0.25, -0.5, 0.75, -0.125]);
        SignalRecord::new(0.1, 0.25, samples, q, xi).unwrap()
    }

    #[test]
    fn binary_round_trip_preserves_every_bit() {
        let dir = tempdir().unwrap();
        for with_truth in [false, true] {
            let rec = sample_record(with_truth);
            let base = dir.path().join(format!("rec_{with_truth}"));
            write_record_binary(&base, &rec).unwrap();
            let back = read_record_binary(&base).unwrap();
            assert_eq!(rec, back, "round trip must be exact (truth: {with_truth})");
        }
    }

    #[test]
    fn sidecar_mismatches_are_rejected() {
        let dir = tempdir().unwrap();
        let base = dir.path().join("rec");
        write_record_binary(&base, &sample_record(true)).unwrap();

        // Truncated data block.
        let data = fs::read(base.with_extension("f64")).unwrap();
        fs::write(base.with_extension("f64"), &data[..data.len() - 8]).unwrap();
        assert!(matches!(
            read_record_binary(&base),
            Err(ModelError::Malformed { .. })
        ));
        fs::write(base.with_extension("f64"), &data).unwrap();

        // Foreign schema version.
        let json = fs::read_to_string(base.with_extension("json")).unwrap();
        fs::write(
            base.with_extension("json"),
            json.replace("\"schema_version\": 1", "\"schema_version\": 9"),
        )
        .unwrap();
        assert!(matches!(
            read_record_binary(&base),
            Err(ModelError::Malformed { .. })
        ));
    }

    #[test]
    fn csv_headers_and_layout_are_pinned() {
        let dir = tempdir().unwrap();
        let auto = CorrelatorEstimate {
            dt: 0.5,
            values: vec![2.0, -0.5],
            stderr: vec![0.25, 0.125],
            batch_values: vec![vec![2.0, -0.5], vec![2.0, -0.5]],
        };
        let path = dir.path().join("corr.csv");
        write_correlator_csv(&path, &auto, None).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "tau,k_i,k_i_stderr,k_xi_q,k_xi_q_stderr\n0,2,0.25,,\n0.5,-0.5,0.125,,\n"
        );

        let cross = CorrelatorEstimate {
            dt: 0.5,
            values: vec![0.5, 0.0],
            stderr: vec![0.0625, 0.03125],
            batch_values: vec![vec![0.5, 0.0], vec![0.5, 0.0]],
        };
        write_correlator_csv(&path, &auto, Some(&cross)).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "tau,k_i,k_i_stderr,k_xi_q,k_xi_q_stderr\n0,2,0.25,0.5,0.0625\n0.5,-0.5,0.125,0,0.03125\n"
        );

        let spec = SpectrumEstimate {
            dt: 0.5,
            omega: vec![0.0, 1.5],
            values: vec![10.0, 2.5],
            stderr: vec![1.0, 0.5],
            n_segments: 4,
        };
        let spath = dir.path().join("spec.csv");
        write_spectrum_csv(&spath, &spec).unwrap();
        assert_eq!(
            fs::read_to_string(&spath).unwrap(),
            "omega,s_i,s_i_stderr\n0,10,1\n1.5,2.5,0.5\n"
        );
    }

    #[test]
    fn trajectory_csv_has_pinned_header_and_one_row_per_point() {
        use crate::model::{DensityMatrix, DetectorParams, PhysicalConfig, QubitParams};
        use crate::trajectory::{simulate, Scheme, SimConfig};

        let phys = PhysicalConfig::new(
            DetectorParams {
                i0: 0.0,
                delta_i: 2.0,
                s0: 10.0,
                eta: 1.0,
            },
            QubitParams { omega: 1.0 },
        )
        .unwrap();
        let sim = SimConfig {
            dt: 0.01,
            n_steps: 8,
            discard_steps: 0,
            scheme: Scheme::HeunStratonovich,
            initial: DensityMatrix::pointer_up(),
            renormalize_every: 100,
            decimate: 1,
        };
        let rec = simulate(&phys, &sim, &mut crate::rng::stream_rng(7, 0)).unwrap();
        let dir = tempdir().unwrap();
        let path = dir.path().join("traj.csv");
        write_trajectory_csv(&path, &rec).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,rho11,re_rho12,im_rho12,q,xi,i");
        assert_eq!(lines.count(), rec.len(), "one row per stored point");
    }

    #[test]
    fn mismatched_cross_grid_is_rejected() {
        let auto = CorrelatorEstimate {
            dt: 0.5,
            values: vec![1.0, 0.5],
            stderr: vec![0.0, 0.0],
            batch_values: vec![vec![1.0, 0.5], vec![1.0, 0.5]],
        };
        let cross = CorrelatorEstimate {
            dt: 0.25,
            values: vec![1.0, 0.5],
            stderr: vec![0.0, 0.0],
            batch_values: vec![vec![1.0, 0.5], vec![1.0, 0.5]],
        };
        let dir = tempdir().unwrap();
        assert!(write_correlator_csv(&dir.path().join("x.csv"), &auto, Some(&cross)).is_err());
    }
}
