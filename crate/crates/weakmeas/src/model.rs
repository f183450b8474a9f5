//! Physical model of a two-level system monitored by a weakly coupled linear detector.
//!
//! The detector output is
//!
//! ```text
//! I(t) = I0 + (dI/2) Q(t) + xi(t),      Q = rho11 - rho22,
//! ```
//!
//! where `xi` is white background noise with correlator `<xi(t) xi(t+tau)> = (S0/2) delta(tau)`
//! (two-sided spectral density `S0`). Three rates follow from the detector parameters:
//!
//! * `gamma  = (1/eta - 1) (dI)^2 / (4 S0)` — extra dephasing from information the detector
//!   discards (vanishes for an ideal, quantum-limited detector, `eta = 1`),
//! * `gamma_total = (dI)^2 / (4 S0 eta)` — total ensemble decoherence rate,
//! * `omega_tilde = sqrt(omega^2 - gamma_total^2/4)` — observed oscillation frequency, defined
//!   in the underdamped regime `omega > gamma_total/2` only.
//!
//! Units: hbar = 1, time in 1/omega-like units, currents in arbitrary detector units.
//! `(dI/2)^2` is the natural scale for every current correlator in the crate.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Tolerance for state-vector invariants held by construction (trace, positivity).
pub const STATE_TOL: f64 = 1e-9;

/// Linear detector parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorParams {
    /// Average output current, midpoint between the two pointer levels.
    pub i0: f64,
    /// Full response `dI = I1 - I2` between the pointer levels (positive).
    pub delta_i: f64,
    /// Two-sided white-noise spectral density of the output.
    pub s0: f64,
    /// Quantum efficiency in `(0, 1]`; 1 is an ideal detector.
    pub eta: f64,
}

impl DetectorParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let check = |name: &'static str, ok: bool| {
            if ok {
                Ok(())
            } else {
                Err(ModelError::InvalidParameter { name })
            }
        };
        check("delta_i", self.delta_i.is_finite() && self.delta_i > 0.0)?;
        check("s0", self.s0.is_finite() && self.s0 > 0.0)?;
        check(
            "eta",
            self.eta.is_finite() && self.eta > 0.0 && self.eta <= 1.0,
        )?;
        check("i0", self.i0.is_finite())
    }

    /// Natural scale of every current correlator: `(dI/2)^2`.
    pub fn signal_scale(&self) -> f64 {
        let half = 0.5 * self.delta_i;
        half * half
    }
}

/// Coherent two-level parameters: tunneling amplitude `omega/2` between the pointer states,
/// giving free oscillation `Q(t) = cos(omega t)` from `rho = diag(1, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitParams {
    pub omega: f64,
}

impl QubitParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.omega.is_finite() && self.omega >= 0.0 {
            Ok(())
        } else {
            Err(ModelError::InvalidParameter { name: "omega" })
        }
    }
}

/// Rates derived from detector and qubit parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    /// Extra dephasing from discarded information, `(1/eta - 1)(dI)^2/(4 S0)`.
    pub gamma: f64,
    /// Total ensemble decoherence rate, `(dI)^2/(4 S0 eta)`.
    pub gamma_total: f64,
    /// `sqrt(omega^2 - gamma_total^2/4)`; `None` when overdamped (`omega <= gamma_total/2`).
    pub omega_tilde: Option<f64>,
}

/// Derive the dephasing/decoherence rates and the shifted oscillation frequency.
pub fn derive_rates(detector: &DetectorParams, qubit: &QubitParams) -> Rates {
    let coupling = detector.delta_i * detector.delta_i / (4.0 * detector.s0);
    let gamma = (1.0 / detector.eta - 1.0) * coupling;
    let gamma_total = coupling / detector.eta;
    let discr = qubit.omega * qubit.omega - 0.25 * gamma_total * gamma_total;
    let omega_tilde = (discr > 0.0).then(|| discr.sqrt());
    Rates {
        gamma,
        gamma_total,
        omega_tilde,
    }
}

/// Full physical configuration: detector, qubit, and the rates derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConfig {
    pub detector: DetectorParams,
    pub qubit: QubitParams,
    pub rates: Rates,
}

impl PhysicalConfig {
    pub fn new(detector: DetectorParams, qubit: QubitParams) -> Result<Self, ModelError> {
        detector.validate()?;
        qubit.validate()?;
        let rates = derive_rates(&detector, &qubit);
        Ok(Self {
            detector,
            qubit,
            rates,
        })
    }

    /// `omega_tilde`, or an error for analytic formulas that need the underdamped regime.
    pub fn underdamped_omega(&self) -> Result<f64, ModelError> {
        self.rates.omega_tilde.ok_or(ModelError::Overdamped {
            omega: self.qubit.omega,
            gamma_total: self.rates.gamma_total,
        })
    }
}

/// Qubit state in the pointer basis, stored as three reals; the trace is eliminated
/// (`rho22 = 1 - rho11`), so trace preservation holds by representation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    pub rho11: f64,
    pub re_rho12: f64,
    pub im_rho12: f64,
}

impl DensityMatrix {
    /// Ground-state-like pointer state `diag(1, 0)`.
    pub fn pointer_up() -> Self {
        Self {
            rho11: 1.0,
            re_rho12: 0.0,
            im_rho12: 0.0,
        }
    }

    /// Maximally mixed state.
    pub fn mixed() -> Self {
        Self {
            rho11: 0.5,
            re_rho12: 0.0,
            im_rho12: 0.0,
        }
    }

    pub fn new(rho11: f64, re_rho12: f64, im_rho12: f64) -> Result<Self, ModelError> {
        let state = Self {
            rho11,
            re_rho12,
            im_rho12,
        };
        state.validate(STATE_TOL)?;
        Ok(state)
    }

    pub fn rho22(&self) -> f64 {
        1.0 - self.rho11
    }

    /// Measured population difference `Q = rho11 - rho22 = 2 rho11 - 1`, in `[-1, 1]`.
    pub fn q(&self) -> f64 {
        2.0 * self.rho11 - 1.0
    }

    /// `rho11 rho22 - |rho12|^2`; non-negative for a physical state, zero iff pure.
    pub fn positivity_defect(&self) -> f64 {
        self.rho11 * self.rho22() - self.coherence_sq()
    }

    pub fn coherence_sq(&self) -> f64 {
        self.re_rho12 * self.re_rho12 + self.im_rho12 * self.im_rho12
    }

    /// `Tr rho^2 = 1 - 2 (rho11 rho22 - |rho12|^2)`; 1 iff pure.
    pub fn purity(&self) -> f64 {
        1.0 - 2.0 * self.positivity_defect()
    }

    /// Check population bounds and positive semidefiniteness within `tol`.
    pub fn validate(&self, tol: f64) -> Result<(), ModelError> {
        if !(self.rho11.is_finite() && self.re_rho12.is_finite() && self.im_rho12.is_finite()) {
            return Err(ModelError::NonFiniteState);
        }
        if self.rho11 < -tol || self.rho11 > 1.0 + tol {
            return Err(ModelError::PopulationOutOfRange { rho11: self.rho11 });
        }
        let defect = self.positivity_defect();
        if defect < -tol {
            return Err(ModelError::PositivityViolated { defect });
        }
        Ok(())
    }
}

/// One sample of the detector background noise: Gaussian, mean zero, variance `S0/(2 dt)`.
///
/// This is the discrete-time representation of white noise of two-sided density `S0`;
/// the variance diverges as `dt -> 0` exactly so that `<xi_n xi_m> dt -> (S0/2) delta(tau)`.
pub fn sample_noise<R: Rng + ?Sized>(s0: f64, dt: f64, rng: &mut R) -> f64 {
    let sigma = (s0 / (2.0 * dt)).sqrt();
    let z: f64 = StandardNormal.sample(rng);
    sigma * z
}

/// A uniformly sampled detector output record, optionally carrying the simulation truth
/// channels (signal part and background noise) that a real experiment would not have.
///
/// Sample `n` stands for the interval `[n dt, (n+1) dt)`: a physical detector
/// integrates over the sample bin, so decimated simulator output stores bin
/// averages in all three channels, keeping them on a common time centroid.
/// Oracle generators point-sample their processes instead; every check run on
/// them (cross-null, bound ratios, window identity) is insensitive to that
/// distinction, while the quantum noise-signal comparison is not.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalRecord {
    /// Sample spacing.
    pub dt: f64,
    /// Detector midpoint current, subtracted by every correlator estimator.
    pub i0: f64,
    /// Output samples, `samples[n] = i0 + (dI/2) q_truth[n] + xi_truth[n]`.
    pub samples: Vec<f64>,
    /// Population difference over each sample bin, when known.
    pub q_truth: Option<Vec<f64>>,
    /// Background noise over each sample bin, when known.
    pub xi_truth: Option<Vec<f64>>,
}

impl SignalRecord {
    pub fn new(
        dt: f64,
        i0: f64,
        samples: Vec<f64>,
        q_truth: Option<Vec<f64>>,
        xi_truth: Option<Vec<f64>>,
    ) -> Result<Self, ModelError> {
        let record = Self {
            dt,
            i0,
            samples,
            q_truth,
            xi_truth,
        };
        record.validate()?;
        Ok(record)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Record duration `len * dt`.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.dt
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(ModelError::InvalidParameter { name: "dt" });
        }
        if self.samples.len() < 2 {
            return Err(ModelError::RecordTooShort {
                len: self.samples.len(),
                min: 2,
            });
        }
        for values in [&self.q_truth, &self.xi_truth].into_iter().flatten() {
            if values.len() != self.samples.len() {
                return Err(ModelError::TruthLengthMismatch {
                    samples: self.samples.len(),
                    truth: values.len(),
                });
            }
        }
        if let Some(q) = &self.q_truth {
            // Block-averaged or sampled Q stays inside the physical band.
            if q.iter()
                .any(|v| !v.is_finite() || v.abs() > 1.0 + STATE_TOL)
            {
                return Err(ModelError::InvalidParameter { name: "q_truth" });
            }
        }
        Ok(())
    }
}
