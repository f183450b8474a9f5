//! Classical oracle processes: stochastic two-level signals that mimic the qubit's
//! detector output without any quantum back-action.
//!
//! Each oracle produces a record `I_n = I0 + (dI/2) q_n + xi_n` where `q_n` is a
//! classical process with `|q| <= 1` and `xi` is the same white background noise the
//! quantum simulation uses. Because `q` is generated independently of `xi`, every
//! noise-signal cross correlator vanishes identically: the oracles are the null
//! hypothesis for any back-action signature, and their correlators obey the classical
//! bound `K(t1) + K(t2) - K(t1 + t2) <= K(0)` by construction.
//!
//! Kinds:
//! * `RectangularPhaseDiffusion` — unit square wave of a phase that drifts at `omega`
//!   and diffuses with `<dphi^2> = d_phi dt`. Its correlator is the odd-harmonic series
//!   `(8/pi^2) sum_k cos(k omega tau) exp(-k^2 d_phi tau / 2) / k^2`, `k` odd, so the
//!   fundamental spectral peak carries the fraction `8/pi^2` of the total power.
//! * `CosinePhaseDiffusion` — cosine of the same diffusing phase; correlator
//!   `(1/2) cos(omega tau) exp(-d_phi tau / 2)`, a single pair of peaks with half the
//!   square wave's total power.
//! * `RandomTelegraph` — +/-1 jump process with rate `r` per direction; correlator
//!   `exp(-2 r tau)`, a zero-frequency Lorentzian.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::model::{DetectorParams, SignalRecord};
use crate::rng::RecordStreams;

/// Classical signal process behind the detector record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    RectangularPhaseDiffusion,
    CosinePhaseDiffusion,
    RandomTelegraph,
}

/// Parameters of an oracle record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub kind: OracleKind,
    /// Carrier frequency of the phase-diffusion kinds (ignored by the telegraph).
    pub omega: f64,
    /// Phase diffusion constant `d_phi` (ignored by the telegraph).
    pub phase_diffusion: f64,
    /// Per-direction jump rate of the telegraph (ignored by the phase kinds).
    pub telegraph_rate: f64,
    /// Sample spacing of the generated record.
    pub dt: f64,
    pub n_samples: usize,
}

impl OracleConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(ModelError::InvalidParameter { name: "dt" });
        }
        if self.n_samples < 2 {
            return Err(ModelError::RecordTooShort {
                len: self.n_samples,
                min: 2,
            });
        }
        match self.kind {
            OracleKind::RectangularPhaseDiffusion | OracleKind::CosinePhaseDiffusion => {
                if !(self.omega.is_finite() && self.omega >= 0.0) {
                    return Err(ModelError::InvalidParameter { name: "omega" });
                }
                if !(self.phase_diffusion.is_finite() && self.phase_diffusion >= 0.0) {
                    return Err(ModelError::InvalidParameter {
                        name: "phase_diffusion",
                    });
                }
            }
            OracleKind::RandomTelegraph => {
                if !(self.telegraph_rate.is_finite() && self.telegraph_rate > 0.0) {
                    return Err(ModelError::InvalidParameter {
                        name: "telegraph_rate",
                    });
                }
            }
        }
        Ok(())
    }
}

/// Unit square wave of the phase: +1 on `[0, pi)`, -1 on `[pi, 2 pi)`, periodic.
pub fn rectangular_q(theta: f64) -> f64 {
    if theta.rem_euclid(std::f64::consts::TAU) < std::f64::consts::PI {
        1.0
    } else {
        -1.0
    }
}

/// Generate one oracle record. The noise stream drives `xi`, the process stream the
/// signal randomness (initial phase, diffusion kicks, telegraph flips), so a given
/// record index reuses the same noise realization across oracle kinds.
pub fn generate_oracle(
    cfg: &OracleConfig,
    detector: &DetectorParams,
    streams: &mut RecordStreams,
) -> Result<SignalRecord, ModelError> {
    cfg.validate()?;
    detector.validate()?;
    let q = match cfg.kind {
        OracleKind::RectangularPhaseDiffusion => {
            phase_diffusion_q(cfg, &mut streams.process, rectangular_q)
        }
        OracleKind::CosinePhaseDiffusion => phase_diffusion_q(cfg, &mut streams.process, f64::cos),
        OracleKind::RandomTelegraph => telegraph_q(cfg, &mut streams.process),
    };
    let sigma = (detector.s0 / (2.0 * cfg.dt)).sqrt();
    let half_di = 0.5 * detector.delta_i;
    let mut samples = Vec::with_capacity(cfg.n_samples);
    let mut xi = Vec::with_capacity(cfg.n_samples);
    for &q_n in &q {
        let z: f64 = StandardNormal.sample(&mut streams.noise);
        let xi_n = sigma * z;
        samples.push(detector.i0 + half_di * q_n + xi_n);
        xi.push(xi_n);
    }
    SignalRecord::new(cfg.dt, detector.i0, samples, Some(q), Some(xi))
}

fn phase_diffusion_q<R: Rng>(cfg: &OracleConfig, rng: &mut R, wave: fn(f64) -> f64) -> Vec<f64> {
    let kick = (cfg.phase_diffusion * cfg.dt).sqrt();
    let mut phase: f64 = rng.random::<f64>() * std::f64::consts::TAU;
    let mut q = Vec::with_capacity(cfg.n_samples);
    for n in 0..cfg.n_samples {
        q.push(wave(cfg.omega * n as f64 * cfg.dt + phase));
        let z: f64 = StandardNormal.sample(rng);
        phase += kick * z;
    }
    q
}

fn telegraph_q<R: Rng>(cfg: &OracleConfig, rng: &mut R) -> Vec<f64> {
    // Exact discrete-time representation: flipping with this probability per sample
    // gives <q_n q_{n+m}> = exp(-2 r m dt) with no time-step error.
    let flip_prob = 0.5 * (1.0 - (-2.0 * cfg.telegraph_rate * cfg.dt).exp());
    let mut value = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let mut q = Vec::with_capacity(cfg.n_samples);
    for _ in 0..cfg.n_samples {
        q.push(value);
        if rng.random::<f64>() < flip_prob {
            value = -value;
        }
    }
    q
}
