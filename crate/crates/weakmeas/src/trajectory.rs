//! Stochastic integration of the conditioned qubit state under continuous monitoring.
//!
//! With the innovation `u(t) = I(t) - I0` and coupling `c = dI/S0`, the conditional
//! evolution in Stratonovich form is
//!
//! ```text
//! drho11/dt  =  2 c rho11 rho22 u            - omega Im rho12
//! dRe r12/dt = -(c u Q + gamma) Re rho12
//! dIm r12/dt = -(c u Q + gamma) Im rho12     + (omega/2) Q
//! ```
//!
//! The flow preserves the trace by representation and keeps the pure manifold
//! `rho11 rho22 = |rho12|^2` exactly invariant: the positivity defect `P` obeys
//! `dP/dt = -2 c u Q P`. Converting to Ito form adds the noise-induced drift
//!
//! ```text
//! corr_rho11 = -4 gm Q rho11 rho22,   corr_r12 = gm (2 Q^2 - 1) rho12,
//! ```
//!
//! with the measurement rate `gm = (dI)^2 / (4 S0)`. In Ito form with `omega = 0`
//! the population difference is a bounded martingale, `dQ = c (1 - Q^2) xi dt`,
//! which reproduces Born-rule collapse statistics; ensemble means obey
//! `d<Q>/dt = -2 omega <Im rho12>`, `d<Im rho12>/dt = (omega/2)<Q> - gamma_total <Im rho12>`.
//!
//! Both schemes discretize the same process: `HeunStratonovich` (the default) holds the
//! record value fixed across a predictor-corrector step, `ItoEuler` is an Euler-Maruyama
//! step on the Ito form and is kept as an independent cross-check.
//!
//! Discretization lets the state leak off the physical set by small, mean-zero,
//! self-reverting amounts. The integrator therefore clamps only the population each
//! step (the output channel must satisfy `|Q| <= 1`), guards against divergence, and
//! projects the coherences back into the positivity cone only at a coarse interval:
//! correcting the symmetric leak one-sidedly every step would rectify it into a
//! systematic dephasing bias.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::model::{DensityMatrix, PhysicalConfig, SignalRecord, STATE_TOL};

/// Pre-clamp population excursions beyond this are integration failure, not rounding;
/// the drift is self-limiting near the poles, so legitimate overshoot is tiny.
const POPULATION_GUARD: f64 = 1e-3;
/// Divergence tripwire for the positivity defect. The defect leaked by discretization
/// is mean-reverting with excursions of order sqrt(gm dt) (measured: ~7e-2 worst case
/// for the Euler scheme at gm dt = 5e-4 over 2e6 steps); a blown-up integrator crosses
/// this immediately.
const DEFECT_GUARD: f64 = 0.25;

#[inline]
fn sample_standard<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Integration scheme for the conditional state equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Predictor-corrector on the Stratonovich form with the record held fixed
    /// across the step.
    HeunStratonovich,
    /// Euler-Maruyama on the equivalent Ito form.
    ItoEuler,
}

/// Simulation controls shared by the full-resolution and decimated entry points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Integration step.
    pub dt: f64,
    /// Recorded full-resolution steps, counted after the discarded transient.
    pub n_steps: u64,
    /// Steps evolved and thrown away before recording starts.
    pub discard_steps: u64,
    pub scheme: Scheme,
    pub initial: DensityMatrix,
    /// Interval in steps at which the state is projected exactly onto the physical
    /// set (coherences shrunk into the positivity cone); 0 disables projection.
    /// The population clamp and divergence guards run every step regardless.
    ///
    /// Keep this at tens of steps or more: the discretization leak off the pure
    /// manifold is symmetric with mean zero, so projecting every step rectifies
    /// it into a systematic dephasing bias (severe for the Euler scheme, whose
    /// per-step leak is O(dt)); at the default of 100 steps the projection is
    /// measurably bias-free for both schemes.
    pub renormalize_every: u64,
    /// Block size for the decimated record of [`simulate_signal`]; each output
    /// sample is the exact average of `decimate` consecutive full-rate samples.
    pub decimate: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(ModelError::InvalidParameter { name: "dt" });
        }
        if self.n_steps == 0 {
            return Err(ModelError::InvalidParameter { name: "n_steps" });
        }
        if self.decimate == 0 || !self.n_steps.is_multiple_of(self.decimate) {
            return Err(ModelError::InvalidParameter { name: "decimate" });
        }
        if self.n_steps / self.decimate < 2 {
            return Err(ModelError::RecordTooShort {
                len: (self.n_steps / self.decimate) as usize,
                min: 2,
            });
        }
        self.initial.validate(STATE_TOL)
    }
}

/// Full-resolution trajectory. Index `n` holds the state at `t_n = n dt` together with
/// the noise sample `xi_n` and output `I_n` that drive the step from `t_n` to `t_{n+1}`;
/// the final index carries a freshly drawn noise value so all columns have equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub dt: f64,
    pub i0: f64,
    pub t: Vec<f64>,
    pub rho11: Vec<f64>,
    pub re_rho12: Vec<f64>,
    pub im_rho12: Vec<f64>,
    pub q: Vec<f64>,
    pub xi: Vec<f64>,
    pub i: Vec<f64>,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// View the trajectory as a full-rate detector record with truth channels.
    ///
    /// The channels are node-sampled (instantaneous grid-point values), unlike
    /// [`simulate_signal`], whose record holds step-interval averages. Use this
    /// for dumps and inspection, not for noise-signal cross statistics.
    pub fn signal_record(&self) -> Result<SignalRecord, ModelError> {
        SignalRecord::new(
            self.dt,
            self.i0,
            self.i.clone(),
            Some(self.q.clone()),
            Some(self.xi.clone()),
        )
    }
}

/// Time averages and integrator diagnostics accumulated over the retained steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMoments {
    /// Full-resolution samples entering the averages.
    pub n_samples: u64,
    pub mean_q: f64,
    pub q_sq_mean: f64,
    /// Time average of `2 Im(rho12) Q`, the oscillator cross moment.
    pub im_rho_q_mean: f64,
    /// Worst negative excursion of the positivity defect between projections
    /// (magnitude; 0 when the state never left the physical set).
    pub max_positivity_deficit: f64,
    /// Worst pre-clamp distance of `rho11` outside `[0, 1]`.
    pub max_population_excess: f64,
    pub population_clamps: u64,
    pub coherence_shrinks: u64,
    pub final_state: DensityMatrix,
}

#[derive(Debug, Default, Clone, Copy)]
struct RepairStats {
    max_positivity_deficit: f64,
    max_population_excess: f64,
    population_clamps: u64,
    coherence_shrinks: u64,
}

/// Per-step hygiene: reject non-finite or diverged states, clamp the population.
/// The positivity defect is only guarded here, never corrected: its discretization
/// leak is symmetric with mean zero and self-reverting, so one-sided per-step
/// correction would rectify it into a systematic dephasing bias.
fn guard_and_clamp(state: &mut DensityMatrix, stats: &mut RepairStats) -> Result<(), String> {
    if !(state.rho11.is_finite() && state.re_rho12.is_finite() && state.im_rho12.is_finite()) {
        return Err("non-finite state".to_owned());
    }
    let excess = (-state.rho11).max(state.rho11 - 1.0);
    if excess > 0.0 {
        if excess > POPULATION_GUARD {
            return Err(format!("rho11 = {} beyond physical guard", state.rho11));
        }
        stats.max_population_excess = stats.max_population_excess.max(excess);
        stats.population_clamps += 1;
        state.rho11 = state.rho11.clamp(0.0, 1.0);
    }
    let defect = state.positivity_defect();
    if defect < -DEFECT_GUARD {
        return Err(format!(
            "positivity defect {defect} beyond divergence guard; reduce dt"
        ));
    }
    stats.max_positivity_deficit = stats.max_positivity_deficit.max(-defect);
    Ok(())
}

/// Exact projection onto the physical set: shrink the coherences into the
/// positivity cone, preserving `Q`. Run periodically, not per step (see
/// [`SimConfig::renormalize_every`]).
fn project(state: &mut DensityMatrix, stats: &mut RepairStats) {
    let defect = state.positivity_defect();
    if defect < 0.0 {
        stats.coherence_shrinks += 1;
        // defect < 0 implies |rho12|^2 > rho11 rho22 >= 0, so the ratio is finite.
        let scale = ((state.rho11 * state.rho22()).max(0.0) / state.coherence_sq()).sqrt();
        state.re_rho12 *= scale;
        state.im_rho12 *= scale;
    }
}

/// Precomputed step constants.
struct Stepper {
    half_di: f64,
    c: f64,
    gamma: f64,
    gamma_meas: f64,
    omega: f64,
    dt: f64,
    scheme: Scheme,
}

impl Stepper {
    fn new(phys: &PhysicalConfig, dt: f64, scheme: Scheme) -> Self {
        let d = &phys.detector;
        Self {
            half_di: 0.5 * d.delta_i,
            c: d.delta_i / d.s0,
            gamma: phys.rates.gamma,
            gamma_meas: d.delta_i * d.delta_i / (4.0 * d.s0),
            omega: phys.qubit.omega,
            dt,
            scheme,
        }
    }

    /// Stratonovich drift at fixed innovation `u = I - I0`.
    #[inline]
    fn drift(&self, s: &DensityMatrix, u: f64) -> [f64; 3] {
        let q = s.q();
        let pop = s.rho11 * s.rho22();
        let damp = self.c * u * q + self.gamma;
        [
            2.0 * self.c * pop * u - self.omega * s.im_rho12,
            -damp * s.re_rho12,
            -damp * s.im_rho12 + 0.5 * self.omega * q,
        ]
    }

    /// Stratonovich-to-Ito drift correction.
    #[inline]
    fn ito_correction(&self, s: &DensityMatrix) -> [f64; 3] {
        let q = s.q();
        let pop = s.rho11 * s.rho22();
        let coh = self.gamma_meas * (2.0 * q * q - 1.0);
        [
            -4.0 * self.gamma_meas * q * pop,
            coh * s.re_rho12,
            coh * s.im_rho12,
        ]
    }

    #[inline]
    fn advanced(s: &DensityMatrix, d: [f64; 3], h: f64) -> DensityMatrix {
        DensityMatrix {
            rho11: s.rho11 + h * d[0],
            re_rho12: s.re_rho12 + h * d[1],
            im_rho12: s.im_rho12 + h * d[2],
        }
    }

    /// One integration step driven by the noise sample `xi`; no repair applied.
    #[inline]
    fn step(&self, s: &DensityMatrix, xi: f64) -> DensityMatrix {
        let u = self.half_di * s.q() + xi;
        match self.scheme {
            Scheme::HeunStratonovich => {
                let k1 = self.drift(s, u);
                let predictor = Self::advanced(s, k1, self.dt);
                let k2 = self.drift(&predictor, u);
                let mean = [
                    0.5 * (k1[0] + k2[0]),
                    0.5 * (k1[1] + k2[1]),
                    0.5 * (k1[2] + k2[2]),
                ];
                Self::advanced(s, mean, self.dt)
            }
            Scheme::ItoEuler => {
                let k = self.drift(s, u);
                let corr = self.ito_correction(s);
                let total = [k[0] + corr[0], k[1] + corr[1], k[2] + corr[2]];
                Self::advanced(s, total, self.dt)
            }
        }
    }
}

fn advance_and_guard(
    stepper: &Stepper,
    state: &mut DensityMatrix,
    xi: f64,
    step_index: u64,
    project_every: u64,
    stats: &mut RepairStats,
) -> Result<(), ModelError> {
    *state = stepper.step(state, xi);
    guard_and_clamp(state, stats).map_err(|detail| ModelError::StateEscape {
        step: step_index,
        detail,
    })?;
    if project_every != 0 && (step_index + 1).is_multiple_of(project_every) {
        project(state, stats);
    }
    Ok(())
}

/// Simulate one conditioned trajectory at full resolution.
///
/// `noise_rng` supplies the detector background noise; the dynamics consume no other
/// randomness. The transient (`discard_steps`) is evolved before recording starts.
pub fn simulate(
    phys: &PhysicalConfig,
    sim: &SimConfig,
    noise_rng: &mut impl Rng,
) -> Result<TrajectoryRecord, ModelError> {
    sim.validate()?;
    let stepper = Stepper::new(phys, sim.dt, sim.scheme);
    let sigma = (phys.detector.s0 / (2.0 * sim.dt)).sqrt();
    let i0 = phys.detector.i0;
    let mut state = sim.initial;
    let mut stats = RepairStats::default();

    for n in 0..sim.discard_steps {
        let xi = sigma * sample_standard(noise_rng);
        advance_and_guard(
            &stepper,
            &mut state,
            xi,
            n,
            sim.renormalize_every,
            &mut stats,
        )?;
    }

    let len = sim.n_steps as usize + 1;
    let mut rec = TrajectoryRecord {
        dt: sim.dt,
        i0,
        t: Vec::with_capacity(len),
        rho11: Vec::with_capacity(len),
        re_rho12: Vec::with_capacity(len),
        im_rho12: Vec::with_capacity(len),
        q: Vec::with_capacity(len),
        xi: Vec::with_capacity(len),
        i: Vec::with_capacity(len),
    };

    for n in 0..=sim.n_steps {
        let xi = sigma * sample_standard(noise_rng);
        let q = state.q();
        rec.t.push(n as f64 * sim.dt);
        rec.rho11.push(state.rho11);
        rec.re_rho12.push(state.re_rho12);
        rec.im_rho12.push(state.im_rho12);
        rec.q.push(q);
        rec.xi.push(xi);
        rec.i.push(i0 + stepper.half_di * q + xi);
        if n < sim.n_steps {
            advance_and_guard(
                &stepper,
                &mut state,
                xi,
                sim.discard_steps + n,
                sim.renormalize_every,
                &mut stats,
            )?;
        }
    }
    Ok(rec)
}

/// Simulate a long record in streaming fashion, keeping only the block-averaged
/// detector output plus truth channels, and the running moments.
///
/// Each output sample averages `decimate` consecutive full-rate samples exactly, so the
/// identity `I_bar = I0 + (dI/2) Q_bar + xi_bar` carries over to the decimated record.
/// Block averaging is plain low-pass filtering of the stationary record: it attenuates
/// correlators at lag `m dt_out` by a known sinc^2-scale factor that is negligible when
/// `dt_out` is small against every dynamical time (quantified in the correlator tests).
///
/// Step-size guidance: finite-step integration leaves a scheme-specific bias on
/// simulated correlation functions. For the Heun scheme at the reference point
/// (`omega = 1`, `gamma_total = 0.1`) the bias is a flat -0.24% of the correlator
/// at `dt = 0.005` and falls faster than linearly in `dt`; pooled-ensemble studies
/// that resolve the 0.1% scale should run `dt <= 0.0025`. The Euler scheme instead
/// renormalizes the effective decay rate by ~2% at `dt = 0.005`.
pub fn simulate_signal(
    phys: &PhysicalConfig,
    sim: &SimConfig,
    noise_rng: &mut impl Rng,
) -> Result<(SignalRecord, TrajectoryMoments), ModelError> {
    sim.validate()?;
    let stepper = Stepper::new(phys, sim.dt, sim.scheme);
    let sigma = (phys.detector.s0 / (2.0 * sim.dt)).sqrt();
    let mut state = sim.initial;
    let mut stats = RepairStats::default();

    for n in 0..sim.discard_steps {
        let xi = sigma * sample_standard(noise_rng);
        advance_and_guard(
            &stepper,
            &mut state,
            xi,
            n,
            sim.renormalize_every,
            &mut stats,
        )?;
    }

    let n_out = (sim.n_steps / sim.decimate) as usize;
    let mut samples = Vec::with_capacity(n_out);
    let mut q_truth = Vec::with_capacity(n_out);
    let mut xi_truth = Vec::with_capacity(n_out);
    let inv_block = 1.0 / sim.decimate as f64;

    let (mut sum_q, mut sum_q_sq, mut sum_yq) = (0.0_f64, 0.0_f64, 0.0_f64);
    let (mut block_q, mut block_xi) = (0.0_f64, 0.0_f64);

    for n in 0..sim.n_steps {
        let xi = sigma * sample_standard(noise_rng);
        let q = state.q();
        sum_q += q;
        sum_q_sq += q * q;
        sum_yq += 2.0 * state.im_rho12 * q;
        advance_and_guard(
            &stepper,
            &mut state,
            xi,
            sim.discard_steps + n,
            sim.renormalize_every,
            &mut stats,
        )?;
        // The noise sample stands for the step-interval average, so the recorded
        // signal must too: accumulate the trapezoid of Q over the step. Start-point
        // sampling would put the truth channels half a step apart and skew the
        // noise-signal correlator by `dt/2`.
        block_q += 0.5 * (q + state.q());
        block_xi += xi;
        if (n + 1).is_multiple_of(sim.decimate) {
            let q_bar = block_q * inv_block;
            let xi_bar = block_xi * inv_block;
            samples.push(phys.detector.i0 + stepper.half_di * q_bar + xi_bar);
            q_truth.push(q_bar);
            xi_truth.push(xi_bar);
            block_q = 0.0;
            block_xi = 0.0;
        }
    }

    let record = SignalRecord::new(
        sim.dt * sim.decimate as f64,
        phys.detector.i0,
        samples,
        Some(q_truth),
        Some(xi_truth),
    )?;
    let n = sim.n_steps as f64;
    let moments = TrajectoryMoments {
        n_samples: sim.n_steps,
        mean_q: sum_q / n,
        q_sq_mean: sum_q_sq / n,
        im_rho_q_mean: sum_yq / n,
        max_positivity_deficit: stats.max_positivity_deficit,
        max_population_excess: stats.max_population_excess,
        population_clamps: stats.population_clamps,
        coherence_shrinks: stats.coherence_shrinks,
        final_state: state,
    };
    Ok((record, moments))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DetectorParams, QubitParams};
    use crate::rng::stream_rng;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const SEED: u64 = 0x5eed_0001;

    fn desk_config() -> PhysicalConfig {
        PhysicalConfig::new(
            DetectorParams {
                i0: 0.0,
                delta_i: 2.0,
                s0: 10.0,
                eta: 1.0,
            },
            QubitParams { omega: 1.0 },
        )
        .unwrap()
    }

    fn sim_config(dt: f64, n_steps: u64, scheme: Scheme) -> SimConfig {
        SimConfig {
            dt,
            n_steps,
            discard_steps: 0,
            scheme,
            initial: DensityMatrix::pointer_up(),
            renormalize_every: 100,
            decimate: 1,
        }
    }

    /// With the detector essentially decoupled the dynamics reduce to free oscillation
    /// Q(t) = cos(omega t); the second-order deterministic accuracy of the Heun step
    /// should hold it to ~1e-5 over ten periods.
    #[test]
    fn decoupled_limit_is_free_oscillation() {
        let phys = PhysicalConfig::new(
            DetectorParams {
                i0: 0.0,
                delta_i: 1e-8,
                s0: 1.0,
                eta: 1.0,
            },
            QubitParams { omega: 1.0 },
        )
        .unwrap();
        let sim = sim_config(1e-3, 10_000, Scheme::HeunStratonovich);
        let rec = simulate(&phys, &sim, &mut stream_rng(SEED, 0)).unwrap();
        let worst = rec
            .t
            .iter()
            .zip(&rec.q)
            .map(|(t, q)| (q - t.cos()).abs())
            .fold(0.0_f64, f64::max);
        assert!(worst < 1e-4, "free-oscillation error {worst} too large");
    }

    /// A pure state must stay near the pure manifold: the exact flow gives
    /// dP/dt = -2 c u Q P, so P = 0 is invariant, only discretization leaks, and the
    /// leak is mean-reverting. Unphysical (negative-defect) excursions must stay at
    /// the discretization scale over a long run.
    #[test]
    fn positivity_leak_stays_small_over_long_run() {
        let phys = desk_config();
        let mut sim = sim_config(5e-3, 100_000, Scheme::HeunStratonovich);
        sim.decimate = 100;
        let (_, moments) = simulate_signal(&phys, &sim, &mut stream_rng(SEED, 2)).unwrap();
        assert!(
            moments.max_positivity_deficit < 2e-3,
            "worst unphysical excursion {} exceeds the discretization budget",
            moments.max_positivity_deficit
        );
        // Periodic projection plus guards keep the end state physical to rounding.
        assert!(
            moments.final_state.positivity_defect() > -2e-3,
            "final state left the physical set"
        );
    }

    /// In Ito form with omega = 0 the population difference is a martingale:
    /// the ensemble mean of Q(T) must equal Q(0) while individual runs collapse.
    #[test]
    fn born_rule_martingale_without_tunneling() {
        let phys = PhysicalConfig::new(
            DetectorParams {
                i0: 0.0,
                delta_i: 2.0,
                s0: 10.0,
                eta: 1.0,
            },
            QubitParams { omega: 0.0 },
        )
        .unwrap();
        let q0 = 0.4;
        let initial = DensityMatrix::new(0.7, 0.0, 0.0).unwrap();
        let paths = 1500;
        let n_steps = 1000;
        let stepper = Stepper::new(&phys, 0.01, Scheme::ItoEuler);
        let sigma = (phys.detector.s0 / (2.0 * 0.01)).sqrt();
        let (mut sum_q, mut sum_q_sq) = (0.0, 0.0);
        for path in 0..paths {
            let mut rng = stream_rng(SEED, path);
            let mut state = initial;
            let mut stats = RepairStats::default();
            for n in 0..n_steps {
                let xi = sigma * sample_standard(&mut rng);
                advance_and_guard(&stepper, &mut state, xi, n, 0, &mut stats).unwrap();
            }
            sum_q += state.q();
            sum_q_sq += state.q() * state.q();
        }
        let mean = sum_q / paths as f64;
        let second = sum_q_sq / paths as f64;
        // Var(Q_T) <= 1 - q0^2, so 4 standard errors stay below 0.1.
        assert!(
            (mean - q0).abs() < 0.1,
            "martingale mean {mean} drifted from {q0}"
        );
        assert!(
            second > q0 * q0 + 0.15,
            "no collapse progress: <Q^2> = {second}"
        );
    }

    /// Ensemble averages must reproduce the damped oscillation
    /// <Q(t)> = exp(-Gt/2) (cos wt + (G/2w) sin wt) of the unconditioned evolution.
    #[test]
    fn ensemble_mean_follows_damped_oscillation() {
        let phys = desk_config();
        let gamma = phys.rates.gamma_total;
        let omega_t = phys.rates.omega_tilde.unwrap();
        let dt = 5e-3;
        let n_steps = 2000; // T = 10
        let paths = 6000u64;
        let checkpoints = [500usize, 1000, 1500, 2000];
        let stepper = Stepper::new(&phys, dt, Scheme::HeunStratonovich);
        let sigma = (phys.detector.s0 / (2.0 * dt)).sqrt();
        let mut sums = [0.0_f64; 4];
        for path in 0..paths {
            let mut rng = stream_rng(SEED, path);
            let mut state = DensityMatrix::pointer_up();
            let mut stats = RepairStats::default();
            for n in 0..n_steps {
                let xi = sigma * sample_standard(&mut rng);
                advance_and_guard(&stepper, &mut state, xi, n as u64, 0, &mut stats).unwrap();
                if let Some(k) = checkpoints.iter().position(|&c| c == n + 1) {
                    sums[k] += state.q();
                }
            }
        }
        for (k, &cp) in checkpoints.iter().enumerate() {
            let t = cp as f64 * dt;
            let expected = (-0.5 * gamma * t).exp()
                * ((omega_t * t).cos() + 0.5 * gamma / omega_t * (omega_t * t).sin());
            let mean = sums[k] / paths as f64;
            assert!(
                (mean - expected).abs() < 0.06,
                "<Q({t})> = {mean}, analytic {expected}"
            );
        }
    }

    /// Both schemes discretize the same process, so with a shared noise path their
    /// endpoints converge to each other; the gap is dominated by the Euler scheme's
    /// strong order 1/2 and must shrink when the step is halved. The horizon is kept
    /// short because conditioned trajectories separate exponentially in path space
    /// (statistical equivalence over long records is checked elsewhere).
    #[test]
    fn schemes_converge_to_each_other() {
        let phys = desk_config();
        let t_final = 1.0;
        let rms_gap = |dt: f64| {
            let n_steps = (t_final / dt).round() as u64;
            let sigma = (phys.detector.s0 / (2.0 * dt)).sqrt();
            let heun = Stepper::new(&phys, dt, Scheme::HeunStratonovich);
            let ito = Stepper::new(&phys, dt, Scheme::ItoEuler);
            let mut sum_sq = 0.0;
            let paths = 80u64;
            for path in 0..paths {
                let mut state_h = DensityMatrix::pointer_up();
                let mut state_i = DensityMatrix::pointer_up();
                let mut stats = RepairStats::default();
                let mut rng = stream_rng(SEED, 1000 + path);
                for n in 0..n_steps {
                    let xi = sigma * sample_standard(&mut rng);
                    advance_and_guard(&heun, &mut state_h, xi, n, 0, &mut stats).unwrap();
                    advance_and_guard(&ito, &mut state_i, xi, n, 0, &mut stats).unwrap();
                }
                let gap = state_h.q() - state_i.q();
                sum_sq += gap * gap;
            }
            (sum_sq / paths as f64).sqrt()
        };
        let coarse = rms_gap(2e-3);
        let fine = rms_gap(1e-3);
        assert!(coarse < 0.05, "schemes disagree too much: rms gap {coarse}");
        assert!(
            fine < 0.85 * coarse,
            "gap did not shrink with the step: {fine} vs {coarse}"
        );
    }

    /// The decimated record must satisfy the output identity exactly and match
    /// block averages of a full-resolution run with the same noise stream.
    #[test]
    fn decimated_record_matches_block_averages() {
        let phys = desk_config();
        let mut sim = sim_config(5e-3, 4000, Scheme::HeunStratonovich);
        sim.decimate = 20;
        let (rec, moments) = simulate_signal(&phys, &sim, &mut stream_rng(SEED, 9)).unwrap();
        assert_eq!(rec.len(), 200);
        assert_relative_eq!(rec.dt, 0.1, max_relative = 1e-15);

        let q_bar = rec.q_truth.as_ref().unwrap();
        let xi_bar = rec.xi_truth.as_ref().unwrap();
        for m in 0..rec.len() {
            let reconstructed = rec.i0 + 0.5 * phys.detector.delta_i * q_bar[m] + xi_bar[m];
            assert_relative_eq!(rec.samples[m], reconstructed, max_relative = 1e-12);
        }

        sim.decimate = 1;
        let full = simulate(&phys, &sim, &mut stream_rng(SEED, 9)).unwrap();
        for m in 0..rec.len() {
            // Q channel is the trapezoid average over the block interval, so the
            // reference uses the node pairs (q[n] + q[n+1]) / 2 of each step.
            let mean: f64 = (20 * m..20 * (m + 1))
                .map(|n| 0.5 * (full.q[n] + full.q[n + 1]))
                .sum::<f64>()
                / 20.0;
            assert_relative_eq!(q_bar[m], mean, epsilon = 1e-12);
            let block_xi = &full.xi[20 * m..20 * (m + 1)];
            let mean_xi: f64 = block_xi.iter().sum::<f64>() / 20.0;
            assert_relative_eq!(xi_bar[m], mean_xi, epsilon = 1e-10);
        }

        let q_sq = full.q[..4000].iter().map(|q| q * q).sum::<f64>() / 4000.0;
        assert_relative_eq!(moments.q_sq_mean, q_sq, epsilon = 1e-12);
    }

    #[test]
    fn full_resolution_record_has_aligned_columns() {
        let phys = desk_config();
        let sim = sim_config(5e-3, 100, Scheme::HeunStratonovich);
        let rec = simulate(&phys, &sim, &mut stream_rng(SEED, 4)).unwrap();
        assert_eq!(rec.len(), 101, "n_steps + 1 points including the endpoint");
        for n in 0..rec.len() {
            assert_relative_eq!(rec.q[n], 2.0 * rec.rho11[n] - 1.0, epsilon = 1e-15);
            let reconstructed = rec.i0 + 0.5 * phys.detector.delta_i * rec.q[n] + rec.xi[n];
            assert_relative_eq!(rec.i[n], reconstructed, max_relative = 1e-12);
        }
        let signal = rec.signal_record().unwrap();
        assert_eq!(signal.len(), rec.len());
    }

    #[test]
    fn guards_clamp_and_projection_shrinks() {
        let mut stats = RepairStats::default();
        // Slight population overshoot: clamped, recorded, not fatal.
        let mut state = DensityMatrix {
            rho11: 1.0 + 5e-4,
            re_rho12: 0.0,
            im_rho12: 0.0,
        };
        guard_and_clamp(&mut state, &mut stats).unwrap();
        assert_eq!(state.rho11, 1.0);
        assert!(stats.population_clamps == 1 && stats.max_population_excess > 0.0);

        // Small coherence excess: guarded and tracked but left untouched per step.
        let mut state = DensityMatrix {
            rho11: 0.5,
            re_rho12: 0.5002,
            im_rho12: 0.0,
        };
        guard_and_clamp(&mut state, &mut stats).unwrap();
        assert_eq!(state.re_rho12, 0.5002, "per-step guard must not rectify");
        assert!(stats.max_positivity_deficit > 0.0);

        // Projection shrinks the coherences into the cone, preserving Q.
        project(&mut state, &mut stats);
        assert_eq!(state.q(), 0.0);
        assert!(state.positivity_defect() >= -1e-15);
        assert!(state.re_rho12 < 0.5002 && state.re_rho12 > 0.49);
        assert_eq!(stats.coherence_shrinks, 1);

        // Far outside the guards: integration failure.
        for bad in [
            DensityMatrix {
                rho11: 1.1,
                re_rho12: 0.0,
                im_rho12: 0.0,
            },
            DensityMatrix {
                rho11: 0.5,
                re_rho12: 0.8,
                im_rho12: 0.0,
            },
            DensityMatrix {
                rho11: f64::NAN,
                re_rho12: 0.0,
                im_rho12: 0.0,
            },
        ] {
            let mut state = bad;
            assert!(
                guard_and_clamp(&mut state, &mut stats).is_err(),
                "state {bad:?} should trip the guards"
            );
        }
    }

    #[test]
    fn sim_config_validation() {
        let good = sim_config(0.01, 100, Scheme::HeunStratonovich);
        assert!(good.validate().is_ok());
        assert!(SimConfig { dt: 0.0, ..good }.validate().is_err());
        assert!(SimConfig { n_steps: 0, ..good }.validate().is_err());
        assert!(
            SimConfig {
                decimate: 7,
                ..good
            }
            .validate()
            .is_err(),
            "block size must divide the step count"
        );
        assert!(
            SimConfig {
                decimate: 100,
                ..good
            }
            .validate()
            .is_err(),
            "decimated record would be shorter than two samples"
        );
    }

    proptest! {
        /// Any valid state stepped with any plausible noise value keeps its
        /// output channel bounded and stays inside the divergence guards, under
        /// both schemes; projection steps restore exact physicality.
        #[test]
        fn step_preserves_physicality(
            rho11 in 0.0f64..=1.0,
            angle in 0.0f64..std::f64::consts::TAU,
            r in 0.0f64..=1.0,
            z in proptest::collection::vec(-5.0f64..5.0, 40),
            ito in proptest::bool::ANY,
        ) {
            let phys = desk_config();
            let dt = 5e-3;
            let scheme = if ito { Scheme::ItoEuler } else { Scheme::HeunStratonovich };
            let stepper = Stepper::new(&phys, dt, scheme);
            let sigma = (phys.detector.s0 / (2.0 * dt)).sqrt();
            let max_coh = (rho11 * (1.0 - rho11)).sqrt();
            let mut state = DensityMatrix {
                rho11,
                re_rho12: r * max_coh * angle.cos(),
                im_rho12: r * max_coh * angle.sin(),
            };
            let mut stats = RepairStats::default();
            for (n, z_n) in z.iter().enumerate() {
                advance_and_guard(&stepper, &mut state, sigma * z_n, n as u64, 5, &mut stats)
                    .expect("plausible noise must not trip the divergence guards");
                prop_assert!(state.q().abs() <= 1.0);
                prop_assert!(state.positivity_defect() >= -DEFECT_GUARD);
                if (n + 1) % 5 == 0 {
                    prop_assert!(state.positivity_defect() >= -1e-12);
                }
            }
        }
    }
}
