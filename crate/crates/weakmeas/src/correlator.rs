//! Lag correlators of detector records, their analytic stationary forms, and the
//! two-time inequality that separates the quantum signal from classical mimics.
//!
//! Estimators. For a record `I_0..I_{N-1}` with configured baseline `I0` the signal
//! autocorrelator at lag `m` is
//!
//! ```text
//! K_I(m dt) = (1 / (N - m)) sum_n (I_n - I0) (I_{n+m} - I0)
//! ```
//!
//! and the noise-signal cross correlator (available when the record carries truth
//! channels) is `K_xiQ(m dt) = (1 / (N - m)) sum_n xi_n q_{n+m}`, one-sided in the
//! causal direction: the noise at time `t` can only influence the signal later.
//! Error bars come from batch means over disjoint contiguous segments.
//!
//! Analytic forms. For an underdamped oscillation (`omega_tilde^2 = omega^2 -
//! gamma_total^2/4 > 0`) the stationary detector correlator is
//!
//! ```text
//! K_I(tau) = (dI/2)^2 e^{-gamma_total tau / 2}
//!            (cos omega_tilde tau + gamma_total/(2 omega_tilde) sin omega_tilde tau)
//! ```
//!
//! This splits exactly into an amplified signal part and a noise back-action part,
//! `K_I = (dI/2)^2 K_QQ + (dI/2) K_xiQ`, with
//!
//! ```text
//! K_QQ(tau)  = <Q^2> E (cos + b sin) - <2 y Q> E (omega/omega_tilde) sin
//! K_xiQ(tau) = (dI/2) [ (1 - <Q^2>) E (cos + b sin) + <2 y Q> E (omega/omega_tilde) sin ]
//! ```
//!
//! where `E = e^{-gamma_total tau/2}`, `b = gamma_total/(2 omega_tilde)`, and the
//! trig arguments are `omega_tilde tau`. The split holds identically for any value
//! of the stationary moments `<Q^2>` and `<2 y Q>`; the cross part is the piece no
//! noise-independent classical signal can reproduce.
//!
//! Two-time inequality. Any classical signal bounded by `|q| <= 1` obeys
//! `K(t1) + K(t2) - K(t1 + t2) <= K(0) <= (dI/2)^2` for its detector correlator at
//! positive lags (`classical_three_point_max` verifies the bound by brute force over
//! realizable correlation triples). The damped oscillation exceeds it near
//! `tau = pi / (3 omega)`, which is the operational signature targeted here.

use crate::error::ModelError;
use crate::model::{PhysicalConfig, SignalRecord};
use crate::trajectory::TrajectoryMoments;

/// Relative slack when snapping a requested lag time onto the record grid.
const LAG_SNAP_TOL: f64 = 1e-6;

/// Lag correlator estimate with batch-mean error bars.
///
/// `values[m]` estimates the correlator at lag `m * dt` for `m = 0..=max_lag`.
/// `batch_values[b][m]` is the same estimator restricted to the `b`-th disjoint
/// segment of the record; `stderr` is the standard error of the batch means.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatorEstimate {
    pub dt: f64,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub batch_values: Vec<Vec<f64>>,
}

impl CorrelatorEstimate {
    pub fn max_lag(&self) -> usize {
        self.values.len() - 1
    }

    pub fn lag_time(&self, m: usize) -> f64 {
        m as f64 * self.dt
    }

    /// Snap a lag time onto the grid. Errors when `tau` is negative, off the grid
    /// by more than a rounding slack, or beyond the estimated range.
    pub fn lag_index(&self, tau: f64) -> Result<usize, ModelError> {
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(ModelError::InvalidParameter { name: "tau" });
        }
        let m = (tau / self.dt).round();
        if m as usize > self.max_lag() {
            return Err(ModelError::InvalidParameter { name: "tau" });
        }
        Ok(m as usize)
    }

    /// Correlator value at the grid point nearest `tau`.
    pub fn value_at(&self, tau: f64) -> Result<f64, ModelError> {
        Ok(self.values[self.lag_index(tau)?])
    }
}

fn lag_sums(series_a: &[f64], series_b: &[f64], max_lag: usize) -> Vec<f64> {
    let n = series_a.len();
    let mut out = Vec::with_capacity(max_lag + 1);
    for m in 0..=max_lag {
        let pairs = n - m;
        let mut acc = 0.0;
        for i in 0..pairs {
            acc += series_a[i] * series_b[i + m];
        }
        out.push(acc / pairs as f64);
    }
    out
}

fn estimate_lagged(
    series_a: &[f64],
    series_b: &[f64],
    dt: f64,
    max_lag: usize,
    n_batches: usize,
) -> Result<CorrelatorEstimate, ModelError> {
    let n = series_a.len();
    if max_lag == 0 || n_batches < 2 {
        return Err(ModelError::InvalidParameter {
            name: "max_lag/n_batches",
        });
    }
    let batch_len = n / n_batches;
    // Each disjoint batch must resolve the longest lag.
    if batch_len <= max_lag {
        return Err(ModelError::RecordTooShort {
            len: n,
            min: (max_lag + 1) * n_batches,
        });
    }
    let values = lag_sums(series_a, series_b, max_lag);
    let batch_values: Vec<Vec<f64>> = (0..n_batches)
        .map(|b| {
            let lo = b * batch_len;
            let hi = lo + batch_len;
            lag_sums(&series_a[lo..hi], &series_b[lo..hi], max_lag)
        })
        .collect();
    let stderr = batch_stderr(&batch_values, max_lag);
    Ok(CorrelatorEstimate {
        dt,
        values,
        stderr,
        batch_values,
    })
}

fn batch_stderr(batch_values: &[Vec<f64>], max_lag: usize) -> Vec<f64> {
    let b = batch_values.len() as f64;
    (0..=max_lag)
        .map(|m| {
            let mean = batch_values.iter().map(|v| v[m]).sum::<f64>() / b;
            let var = batch_values
                .iter()
                .map(|v| (v[m] - mean).powi(2))
                .sum::<f64>()
                / (b - 1.0);
            (var / b).sqrt()
        })
        .collect()
}

/// Autocorrelator of the detector output around the configured baseline.
/// Includes the white-noise variance at lag zero.
pub fn estimate_auto_correlator(
    record: &SignalRecord,
    max_lag: usize,
    n_batches: usize,
) -> Result<CorrelatorEstimate, ModelError> {
    let centered: Vec<f64> = record.samples.iter().map(|&s| s - record.i0).collect();
    estimate_lagged(&centered, &centered, record.dt, max_lag, n_batches)
}

/// Causal noise-signal cross correlator `<xi(t) q(t + tau)>`, `tau >= 0`. Requires
/// the record's truth channels.
pub fn estimate_cross_correlator(
    record: &SignalRecord,
    max_lag: usize,
    n_batches: usize,
) -> Result<CorrelatorEstimate, ModelError> {
    let (Some(xi), Some(q)) = (&record.xi_truth, &record.q_truth) else {
        return Err(ModelError::MissingTruthChannels);
    };
    estimate_lagged(xi, q, record.dt, max_lag, n_batches)
}

/// Pool estimates from statistically equivalent records (same grid and length):
/// values average with equal weight, batches concatenate and error bars shrink.
pub fn pool_correlators(parts: &[CorrelatorEstimate]) -> Result<CorrelatorEstimate, ModelError> {
    let first = parts
        .first()
        .ok_or(ModelError::InvalidParameter { name: "parts" })?;
    let max_lag = first.max_lag();
    for p in parts {
        if (p.dt - first.dt).abs() > 1e-12 * first.dt || p.max_lag() != max_lag {
            return Err(ModelError::InvalidParameter { name: "parts" });
        }
    }
    let r = parts.len() as f64;
    let values: Vec<f64> = (0..=max_lag)
        .map(|m| parts.iter().map(|p| p.values[m]).sum::<f64>() / r)
        .collect();
    let batch_values: Vec<Vec<f64>> = parts
        .iter()
        .flat_map(|p| p.batch_values.iter().cloned())
        .collect();
    let stderr = batch_stderr(&batch_values, max_lag);
    Ok(CorrelatorEstimate {
        dt: first.dt,
        values,
        stderr,
        batch_values,
    })
}

/// Relative root-mean-square mismatch between an estimate and a reference curve
/// over the closed lag range, normalized by the reference's rms.
pub fn relative_rms_error(
    est: &CorrelatorEstimate,
    lags: std::ops::RangeInclusive<usize>,
    reference: impl Fn(f64) -> f64,
) -> Result<f64, ModelError> {
    if *lags.end() > est.max_lag() || lags.is_empty() {
        return Err(ModelError::InvalidParameter { name: "lags" });
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for m in lags {
        let r = reference(est.lag_time(m));
        num += (est.values[m] - r).powi(2);
        den += r * r;
    }
    if den == 0.0 {
        return Err(ModelError::InvalidParameter { name: "reference" });
    }
    Ok((num / den).sqrt())
}

// ---------------------------------------------------------------------------
// Analytic stationary forms
// ---------------------------------------------------------------------------

/// Stationary second moments entering the conditional correlator split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryMoments {
    /// `<Q^2>` in the stationary measure.
    pub q_sq: f64,
    /// `<2 Im(rho12) Q>` in the stationary measure.
    pub two_im_rho_q: f64,
}

impl StationaryMoments {
    /// Idealized moments of the symmetric stationary measure.
    pub fn ideal() -> Self {
        Self {
            q_sq: 0.5,
            two_im_rho_q: 0.0,
        }
    }

    pub fn from_trajectory(m: &TrajectoryMoments) -> Self {
        Self {
            q_sq: m.q_sq_mean,
            two_im_rho_q: m.im_rho_q_mean,
        }
    }
}

/// Frozen stationary-correlator parameters for an underdamped configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticModel {
    /// `(dI/2)^2`, the detector correlator amplitude.
    pub amplitude: f64,
    /// Half the detector gain, `dI/2`.
    pub half_di: f64,
    /// Background noise density `S0`.
    pub s0: f64,
    /// Total coherence decay rate.
    pub gamma_total: f64,
    pub omega: f64,
    pub omega_tilde: f64,
}

impl AnalyticModel {
    pub fn new(phys: &PhysicalConfig) -> Result<Self, ModelError> {
        let omega_tilde = phys.underdamped_omega()?;
        Ok(Self {
            amplitude: phys.detector.signal_scale(),
            half_di: 0.5 * phys.detector.delta_i,
            s0: phys.detector.s0,
            gamma_total: phys.rates.gamma_total,
            omega: phys.qubit.omega,
            omega_tilde,
        })
    }

    /// Damped oscillation envelope and phase factors shared by all three forms.
    fn envelope(&self, tau: f64) -> (f64, f64, f64) {
        let e = (-0.5 * self.gamma_total * tau).exp();
        let c = (self.omega_tilde * tau).cos();
        let s = (self.omega_tilde * tau).sin();
        (e, c, s)
    }

    /// Stationary detector correlator at `tau` (symmetric in `tau`; the white-noise
    /// delta at `tau = 0` is not included).
    pub fn detector_correlator(&self, tau: f64) -> f64 {
        let tau = tau.abs();
        let (e, c, s) = self.envelope(tau);
        let b = self.gamma_total / (2.0 * self.omega_tilde);
        self.amplitude * e * (c + b * s)
    }

    /// Stationary signal correlator `<Q(t) Q(t + tau)>` for the given moments.
    pub fn signal_correlator(&self, moments: &StationaryMoments, tau: f64) -> f64 {
        let tau = tau.abs();
        let (e, c, s) = self.envelope(tau);
        let b = self.gamma_total / (2.0 * self.omega_tilde);
        let ratio = self.omega / self.omega_tilde;
        moments.q_sq * e * (c + b * s) - moments.two_im_rho_q * e * ratio * s
    }

    /// Causal noise-signal cross correlator `<xi(t) q(t + tau)>`; zero for `tau < 0`.
    pub fn cross_correlator(&self, moments: &StationaryMoments, tau: f64) -> f64 {
        if tau < 0.0 {
            return 0.0;
        }
        let (e, c, s) = self.envelope(tau);
        let b = self.gamma_total / (2.0 * self.omega_tilde);
        let ratio = self.omega / self.omega_tilde;
        self.half_di
            * ((1.0 - moments.q_sq) * e * (c + b * s) + moments.two_im_rho_q * e * ratio * s)
    }

    /// Equal-time-spacing inequality combination `(2 K(tau) - K(2 tau)) / amplitude`.
    /// Classical bounded signals keep this at or below 1.
    pub fn lg_equal_tau(&self, tau: f64) -> f64 {
        (2.0 * self.detector_correlator(tau) - self.detector_correlator(2.0 * tau)) / self.amplitude
    }
}

// ---------------------------------------------------------------------------
// Two-time inequality on estimates
// ---------------------------------------------------------------------------

/// One evaluation of the two-time combination on an estimated correlator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LgPoint {
    /// Lag times snapped to the record grid.
    pub tau1: f64,
    pub tau2: f64,
    /// `(K(tau1) + K(tau2) - K(tau1 + tau2)) / amplitude`.
    pub lhs: f64,
    /// Batch-mean standard error of `lhs`.
    pub stderr: f64,
    /// Classical bound for the normalized combination.
    pub bound: f64,
    /// `(lhs - bound) / stderr`.
    pub excess_sigma: f64,
}

impl LgPoint {
    pub fn violates_classical_bound(&self, n_sigma: f64) -> bool {
        self.lhs > self.bound && self.excess_sigma >= n_sigma
    }
}

/// Evaluate `K(tau1) + K(tau2) - K(tau1 + tau2)` on an estimate, normalized by the
/// configured amplitude `(dI/2)^2`. All three lags must land on the grid at `m >= 1`
/// so the white-noise variance at lag zero never enters.
pub fn lg_combination(
    est: &CorrelatorEstimate,
    amplitude: f64,
    tau1: f64,
    tau2: f64,
) -> Result<LgPoint, ModelError> {
    if !(amplitude.is_finite() && amplitude > 0.0) {
        return Err(ModelError::InvalidParameter { name: "amplitude" });
    }
    let m1 = est.lag_index(tau1)?;
    let m2 = est.lag_index(tau2)?;
    let m12 = m1 + m2;
    if m1 == 0 || m2 == 0 {
        return Err(ModelError::InvalidParameter { name: "tau" });
    }
    if m12 > est.max_lag() {
        return Err(ModelError::InvalidParameter { name: "tau" });
    }
    let comb = |k: &[f64]| (k[m1] + k[m2] - k[m12]) / amplitude;
    let lhs = comb(&est.values);
    let b = est.batch_values.len() as f64;
    let batch_lhs: Vec<f64> = est.batch_values.iter().map(|v| comb(v)).collect();
    let mean = batch_lhs.iter().sum::<f64>() / b;
    let var = batch_lhs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (b - 1.0);
    let stderr = (var / b).sqrt();
    Ok(LgPoint {
        tau1: est.lag_time(m1),
        tau2: est.lag_time(m2),
        lhs,
        stderr,
        bound: 1.0,
        excess_sigma: (lhs - 1.0) / stderr,
    })
}

/// Brute-force maximum of `k1 + k2 - k12` over all realizable correlation triples
/// of three +/-1 variables, scanning an `n`-point grid per axis. Realizability is
/// the four two-sided constraints `1 +/- k1 +/- k2 +/- k12 >= 0` with an even
/// number of minus signs; the result is the classical bound (exactly 1).
///
/// Grid points are `(2i - (n-1)) / (n-1)`, so both the constraints and the
/// objective are evaluated on integer numerators: no rounding can push the
/// reported maximum off the exact bound.
pub fn classical_three_point_max(n: usize) -> f64 {
    let d = (n - 1) as i64;
    let coord = |i: usize| 2 * i as i64 - d;
    let mut best = i64::MIN;
    for i in 0..n {
        let k1 = coord(i);
        for j in 0..n {
            let k2 = coord(j);
            for k in 0..n {
                let k12 = coord(k);
                let feasible = d + k1 + k2 + k12 >= 0
                    && d + k1 - k2 - k12 >= 0
                    && d - k1 + k2 - k12 >= 0
                    && d - k1 - k2 + k12 >= 0;
                if feasible {
                    best = best.max(k1 + k2 - k12);
                }
            }
        }
    }
    best as f64 / d as f64
}

/// Check that `tau` sits on the grid within a relative slack before snapping.
/// Unlike `lag_index` this rejects times that would snap across a bin.
pub fn on_grid(tau: f64, dt: f64) -> bool {
    let m = (tau / dt).round();
    (tau - m * dt).abs() <= LAG_SNAP_TOL * dt.max(tau.abs())
}
