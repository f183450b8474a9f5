//! Spectral estimation and peak analysis of detector records.
//!
//! Convention: `S(omega) = 2 * Integral K(tau) e^{i omega tau} d tau`, so flat white
//! background noise with `<xi xi'> = (S0/2) delta(tau)` sits at `S = S0` and the
//! coherent peak of an underdamped oscillation carries the one-sided area
//! `(1/2pi) Integral_0^inf (S - S0) d omega = (dI/2)^2`. The analytic signal part is
//!
//! ```text
//! S(omega) - S0 = (dI/2)^2 * 4 omega0^2 gamma / ((omega^2 - omega0^2)^2 + gamma^2 omega^2)
//! ```
//!
//! with peak height `4 (dI/2)^2 / gamma` at the carrier and full width `gamma` at
//! half maximum.
//!
//! Estimation is Welch's method: Hann-windowed segments, 50% overlap, periodogram
//! `P_k = (2 dt / sum w^2) |DFT(w (x - I0))|^2`, averaged across segments. Bins run
//! over `omega_k = 2 pi k / (L dt)` up to the Nyquist rate.
//!
//! The filtered-area functions integrate the spectrum against a Gaussian window
//! `f(omega) = e^{-(omega - center)^2 / (2 delta^2)}`. The window pair lemma used by
//! `verify_window_equivalence` states that the same number is a time-domain object:
//! demodulating the record at the carrier with the kernel
//! `g(tau) = sqrt(2) delta e^{-delta^2 tau^2}` and averaging the squared magnitude,
//!
//! ```text
//! (1/2pi) Int S(omega) f(omega - Omega) d omega  =  (1/pi) < |J(Omega, t)|^2 >_t ,
//! J(Omega, t) = Int I(s) g(s - t) e^{-i Omega s} ds ,
//! ```
//!
//! because the Fourier transform of `g * g` reproduces `f`. The two sides are
//! computed through unrelated numerical routes (DFT bins against direct
//! convolution), so their agreement is a real consistency check of both.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::correlator::AnalyticModel;
use crate::error::ModelError;
use crate::model::SignalRecord;

/// Fraction of total power a unit square wave carries in its fundamental.
pub const RECT_FUNDAMENTAL_WEIGHT: f64 = 8.0 / (std::f64::consts::PI * std::f64::consts::PI);

/// Fraction of total power a unit cosine carries in its (single) line.
pub const COSINE_FUNDAMENTAL_WEIGHT: f64 = 0.5;

/// One-sided Welch spectrum estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEstimate {
    pub dt: f64,
    /// Angular frequencies `0 ..= pi/dt`, spacing `2 pi / (L dt)`.
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
    /// Per-bin standard error over segments. Overlapping segments are mildly
    /// correlated, so this is a slight underestimate; treat it as a weight.
    pub stderr: Vec<f64>,
    pub n_segments: usize,
}

impl SpectrumEstimate {
    pub fn bin_width(&self) -> f64 {
        self.omega[1] - self.omega[0]
    }
}

/// Welch estimate with Hann window and 50% overlap, centered on the configured
/// baseline (not the sample mean, which would hide a miscalibrated offset).
pub fn estimate_spectrum(
    record: &SignalRecord,
    segment_len: usize,
) -> Result<SpectrumEstimate, ModelError> {
    let n = record.samples.len();
    if segment_len < 8 || !segment_len.is_multiple_of(2) {
        return Err(ModelError::InvalidParameter {
            name: "segment_len",
        });
    }
    if n < segment_len {
        return Err(ModelError::RecordTooShort {
            len: n,
            min: segment_len,
        });
    }
    let l = segment_len;
    let dt = record.dt;
    let window: Vec<f64> = (0..l)
        .map(|i| 0.5 * (1.0 - (std::f64::consts::TAU * i as f64 / l as f64).cos()))
        .collect();
    let window_power: f64 = window.iter().map(|w| w * w).sum();
    let scale = 2.0 * dt / window_power;

    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(l);
    let hop = l / 2;
    let n_segments = (n - l) / hop + 1;
    let n_bins = l / 2 + 1;

    let mut sum = vec![0.0; n_bins];
    let mut sum_sq = vec![0.0; n_bins];
    let mut buf = vec![Complex::new(0.0, 0.0); l];
    for s in 0..n_segments {
        let lo = s * hop;
        for i in 0..l {
            buf[i] = Complex::new((record.samples[lo + i] - record.i0) * window[i], 0.0);
        }
        fft.process(&mut buf);
        for k in 0..n_bins {
            let p = scale * buf[k].norm_sqr();
            sum[k] += p;
            sum_sq[k] += p * p;
        }
    }
    let m = n_segments as f64;
    let values: Vec<f64> = sum.iter().map(|s| s / m).collect();
    let stderr: Vec<f64> = (0..n_bins)
        .map(|k| {
            if n_segments < 2 {
                f64::NAN
            } else {
                let var = (sum_sq[k] - sum[k] * sum[k] / m) / (m - 1.0);
                (var.max(0.0) / m).sqrt()
            }
        })
        .collect();
    let omega: Vec<f64> = (0..n_bins)
        .map(|k| std::f64::consts::TAU * k as f64 / (l as f64 * dt))
        .collect();
    Ok(SpectrumEstimate {
        dt,
        omega,
        values,
        stderr,
        n_segments,
    })
}

/// Pool spectra of statistically equivalent records (same bin grid): values average
/// with equal weight, per-bin errors combine in quadrature and shrink accordingly.
pub fn pool_spectra(parts: &[SpectrumEstimate]) -> Result<SpectrumEstimate, ModelError> {
    let first = parts
        .first()
        .ok_or(ModelError::InvalidParameter { name: "parts" })?;
    for p in parts {
        if p.omega.len() != first.omega.len() || (p.dt - first.dt).abs() > 1e-12 * first.dt {
            return Err(ModelError::InvalidParameter { name: "parts" });
        }
    }
    let r = parts.len() as f64;
    let n_bins = first.omega.len();
    let values: Vec<f64> = (0..n_bins)
        .map(|k| parts.iter().map(|p| p.values[k]).sum::<f64>() / r)
        .collect();
    let stderr: Vec<f64> = (0..n_bins)
        .map(|k| {
            parts
                .iter()
                .map(|p| p.stderr[k] * p.stderr[k])
                .sum::<f64>()
                .sqrt()
                / r
        })
        .collect();
    Ok(SpectrumEstimate {
        dt: first.dt,
        omega: first.omega.clone(),
        values,
        stderr,
        n_segments: parts.iter().map(|p| p.n_segments).sum(),
    })
}

/// Analytic stationary detector spectrum, background included.
pub fn analytic_spectrum(model: &AnalyticModel, omega: f64) -> f64 {
    let w2 = omega * omega;
    let o2 = model.omega * model.omega;
    let g = model.gamma_total;
    model.s0 + model.amplitude * 4.0 * o2 * g / ((w2 - o2).powi(2) + g * g * w2)
}

/// Peak descriptors extracted from an estimated spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakMetrics {
    pub omega_peak: f64,
    /// Peak value above the pedestal.
    pub height: f64,
    /// Full width at half maximum, from linear interpolation of the crossings.
    pub fwhm: f64,
    /// Background level: median of bins outside the exclusion band around the peak.
    pub pedestal: f64,
}

/// Locate the peak near `omega_guess` and measure height, width, and background.
/// `exclusion_halfwidth` sets the band treated as peak when estimating the pedestal.
pub fn peak_metrics(
    est: &SpectrumEstimate,
    omega_guess: f64,
    exclusion_halfwidth: f64,
) -> Result<PeakMetrics, ModelError> {
    if !(omega_guess.is_finite() && omega_guess > 0.0 && exclusion_halfwidth > 0.0) {
        return Err(ModelError::InvalidParameter {
            name: "omega_guess",
        });
    }
    let mut outside: Vec<f64> = est
        .omega
        .iter()
        .zip(&est.values)
        .filter(|(w, _)| (**w - omega_guess).abs() > exclusion_halfwidth)
        .map(|(_, v)| *v)
        .collect();
    if outside.len() < 16 {
        return Err(ModelError::InvalidParameter {
            name: "exclusion_halfwidth",
        });
    }
    outside.sort_by(|a, b| a.total_cmp(b));
    let pedestal = 0.5 * (outside[(outside.len() - 1) / 2] + outside[outside.len() / 2]);

    let band: Vec<usize> = (0..est.omega.len())
        .filter(|&k| (est.omega[k] - omega_guess).abs() <= exclusion_halfwidth)
        .collect();
    let &peak_idx = band
        .iter()
        .max_by(|&&a, &&b| est.values[a].total_cmp(&est.values[b]))
        .ok_or(ModelError::InvalidParameter {
            name: "exclusion_halfwidth",
        })?;
    let height = est.values[peak_idx] - pedestal;
    if height <= 0.0 {
        return Err(ModelError::InvalidParameter {
            name: "omega_guess",
        });
    }
    let half = pedestal + 0.5 * height;

    // Walk outward to the first half-maximum crossings and interpolate.
    let cross = |mut k: usize, step: isize| -> Option<f64> {
        loop {
            let next = k as isize + step;
            if next < 0 || next as usize >= est.values.len() {
                return None;
            }
            let next = next as usize;
            if est.values[next] < half {
                let frac = (est.values[k] - half) / (est.values[k] - est.values[next]);
                return Some(est.omega[k] + frac * (est.omega[next] - est.omega[k]));
            }
            k = next;
        }
    };
    let left = cross(peak_idx, -1);
    let right = cross(peak_idx, 1);
    let fwhm = match (left, right) {
        (Some(a), Some(b)) => b - a,
        // Peak butting against the spectrum edge: mirror the visible half.
        (None, Some(b)) => 2.0 * (b - est.omega[peak_idx]),
        (Some(a), None) => 2.0 * (est.omega[peak_idx] - a),
        (None, None) => {
            return Err(ModelError::InvalidParameter {
                name: "omega_guess",
            });
        }
    };
    Ok(PeakMetrics {
        omega_peak: est.omega[peak_idx],
        height,
        fwhm,
        pedestal,
    })
}

/// Gaussian-filtered area of the background-subtracted spectrum:
/// `(1/2pi) sum_k (S_k - pedestal) f(omega_k - center) d omega`.
pub fn filtered_peak_area(
    est: &SpectrumEstimate,
    center: f64,
    delta: f64,
    pedestal: f64,
) -> Result<f64, ModelError> {
    if !(delta.is_finite() && delta > 0.0 && center.is_finite()) {
        return Err(ModelError::InvalidParameter { name: "delta" });
    }
    let dw = est.bin_width();
    let mut acc = 0.0;
    for (w, v) in est.omega.iter().zip(&est.values) {
        let z = (w - center) / delta;
        acc += (v - pedestal) * (-0.5 * z * z).exp();
    }
    Ok(acc * dw / std::f64::consts::TAU)
}

/// Same Gaussian-filtered area evaluated on the analytic spectrum by Simpson
/// quadrature over `center +- 10 delta` (the window kills everything beyond).
pub fn analytic_filtered_area(model: &AnalyticModel, center: f64, delta: f64) -> f64 {
    let lo = center - 10.0 * delta;
    let hi = center + 10.0 * delta;
    let f = |w: f64| {
        let z = (w - center) / delta;
        (analytic_spectrum(model, w) - model.s0) * (-0.5 * z * z).exp()
    };
    simpson(f, lo, hi, 8000) / std::f64::consts::TAU
}

fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    // n must be even; panics on zero-size ranges are prevented by callers.
    let n = n + n % 2;
    let h = (hi - lo) / n as f64;
    let mut acc = f(lo) + f(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + i as f64 * h);
    }
    acc * h / 3.0
}

/// Both sides of the window-pair identity evaluated on one series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaReport {
    /// `(1/2pi) sum_k S_k f(omega_k - center) d omega` from the series' periodogram.
    pub frequency_side: f64,
    /// `(1/pi) <|J|^2>` from direct demodulation with the matched time kernel.
    pub time_side: f64,
    /// `|freq - time| / max(|freq|, |time|)`.
    pub relative_gap: f64,
}

/// Verify the frequency/time window equivalence on a noiseless series (pass the
/// scaled signal truth, e.g. `(dI/2) q`, so no background subtraction is needed).
/// The kernel is truncated at `|tau| <= 5/delta` and the time average discards the
/// edge margin where the kernel would overhang the record.
pub fn verify_window_equivalence(
    series: &[f64],
    dt: f64,
    center: f64,
    delta: f64,
) -> Result<LemmaReport, ModelError> {
    if !(dt > 0.0 && delta > 0.0 && center > 0.0) {
        return Err(ModelError::InvalidParameter { name: "delta" });
    }
    let n = series.len();
    let halfwidth = (5.0 / (delta * dt)).ceil() as usize;
    if n < 4 * halfwidth {
        return Err(ModelError::RecordTooShort {
            len: n,
            min: 4 * halfwidth,
        });
    }

    // Frequency side: raw full-length periodogram, rectangular window, summed
    // against the Gaussian. One-sided bins suffice: the window at -center is
    // negligible for any delta well below the carrier.
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let mut buf: Vec<Complex<f64>> = series.iter().map(|&x| Complex::new(x, 0.0)).collect();
    fft.process(&mut buf);
    let dw = std::f64::consts::TAU / (n as f64 * dt);
    let scale = 2.0 * dt / n as f64;
    let mut frequency_side = 0.0;
    for (k, c) in buf.iter().enumerate().take(n / 2 + 1) {
        let w = k as f64 * dw;
        let z = (w - center) / delta;
        frequency_side += scale * c.norm_sqr() * (-0.5 * z * z).exp();
    }
    frequency_side *= dw / std::f64::consts::TAU;

    // Time side: direct truncated convolution with g(tau) = sqrt(2) delta
    // exp(-delta^2 tau^2), demodulated at the carrier.
    let kernel: Vec<f64> = (0..=2 * halfwidth)
        .map(|i| {
            let tau = (i as f64 - halfwidth as f64) * dt;
            std::f64::consts::SQRT_2 * delta * (-delta * delta * tau * tau).exp()
        })
        .collect();
    let mut sum_sq = 0.0;
    let mut count = 0usize;
    // Stride keeps the cost linear-ish; |J|^2 varies on the kernel scale, so
    // sampling every few points loses nothing.
    let stride = (halfwidth / 32).max(1);
    let mut t_idx = halfwidth;
    while t_idx + halfwidth < n {
        let mut re = 0.0;
        let mut im = 0.0;
        for (i, g) in kernel.iter().enumerate() {
            let s_idx = t_idx + i - halfwidth;
            let phase = center * (s_idx as f64) * dt;
            let x = series[s_idx] * g * dt;
            re += x * phase.cos();
            im -= x * phase.sin();
        }
        sum_sq += re * re + im * im;
        count += 1;
        t_idx += stride;
    }
    let time_side = sum_sq / count as f64 / std::f64::consts::PI;
    let relative_gap =
        (frequency_side - time_side).abs() / frequency_side.abs().max(time_side.abs());
    Ok(LemmaReport {
        frequency_side,
        time_side,
        relative_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DetectorParams, PhysicalConfig, QubitParams};
    use crate::oracle::{generate_oracle, OracleConfig, OracleKind};
    use crate::rng::{stream_rng, RecordStreams};
    use approx::assert_relative_eq;
    use rand_distr::{Distribution, StandardNormal};

    const SEED: u64 = 0x5bec_0002;

    /// Independently derived filtered area of the desk spectrum, window at the
    /// carrier, delta = 0.3 (gamma_total = 0.1, amplitude 1).
    const FILTERED_AREA_DESK: f64 = 0.8889839060718138;

    fn desk_model() -> AnalyticModel {
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
        AnalyticModel::new(&phys).unwrap()
    }

    #[test]
    fn white_noise_spectrum_sits_at_s0() {
        let dt = 0.1;
        let s0: f64 = 10.0;
        let sigma = (s0 / (2.0 * dt)).sqrt();
        let mut rng = stream_rng(SEED, 0);
        let samples: Vec<f64> = (0..200_000)
            .map(|_| {
                sigma * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
            })
            .collect();
        let rec = SignalRecord::new(dt, 0.0, samples, None, None).unwrap();
        let est = estimate_spectrum(&rec, 4096).unwrap();
        let mean: f64 = est.values.iter().sum::<f64>() / est.values.len() as f64;
        assert_relative_eq!(mean, s0, max_relative = 0.02);
        assert_relative_eq!(
            est.omega.last().unwrap(),
            &(std::f64::consts::PI / dt),
            epsilon = 1e-9,
        );
        // Error bars should describe the scatter: most bins within 4 sigma.
        let bad = est
            .values
            .iter()
            .zip(&est.stderr)
            .filter(|(v, e)| (**v - s0).abs() > 4.0 * **e)
            .count();
        assert!(
            bad < est.values.len() / 100,
            "{bad} of {} bins off by more than 4 sigma",
            est.values.len()
        );
    }

    #[test]
    fn sinusoid_line_carries_half_squared_amplitude() {
        let dt = 0.1;
        let l = 4096;
        // Put the line exactly on a bin so leakage plays no role.
        let omega0 = std::f64::consts::TAU * 100.0 / (l as f64 * dt);
        let a = 3.0;
        let samples: Vec<f64> = (0..200_000)
            .map(|n| a * (omega0 * n as f64 * dt).cos())
            .collect();
        let rec = SignalRecord::new(dt, 0.0, samples, None, None).unwrap();
        let est = estimate_spectrum(&rec, l).unwrap();
        let metrics = peak_metrics(&est, omega0, 0.5).unwrap();
        assert!(
            (metrics.omega_peak - omega0).abs() < est.bin_width() / 2.0,
            "line found at {} instead of {omega0}",
            metrics.omega_peak
        );
        assert!(metrics.pedestal.abs() < 1e-6 * metrics.height);
        let area = filtered_peak_area(&est, omega0, 0.3, 0.0).unwrap();
        assert_relative_eq!(area, a * a / 2.0, max_relative = 0.01);
    }

    #[test]
    fn phase_diffused_square_wave_peak_has_expected_shape() {
        // d_phi = 0.1 puts the fundamental's full width at 0.1, wide enough to
        // resolve against the bin spacing and narrow enough to sit in the window.
        let d_phi = 0.1;
        let detector = DetectorParams {
            i0: 0.0,
            delta_i: 2.0,
            s0: 10.0,
            eta: 1.0,
        };
        let cfg = OracleConfig {
            kind: OracleKind::RectangularPhaseDiffusion,
            omega: 1.0,
            phase_diffusion: d_phi,
            telegraph_rate: 0.0,
            dt: 0.1,
            n_samples: 400_000,
        };
        let rec = generate_oracle(&cfg, &detector, &mut RecordStreams::new(SEED, 2)).unwrap();
        let est = estimate_spectrum(&rec, 4096).unwrap();
        let metrics = peak_metrics(&est, 1.0, 1.0).unwrap();
        assert_relative_eq!(metrics.pedestal, detector.s0, max_relative = 0.05);
        // Lorentzian line of weight 8/pi^2 and half-width d_phi/2 on top of S0.
        let expected_height = 2.0 * RECT_FUNDAMENTAL_WEIGHT / (d_phi / 2.0);
        assert_relative_eq!(metrics.height, expected_height, max_relative = 0.25);
        assert!(
            (0.06..0.16).contains(&metrics.fwhm),
            "fwhm {} should be near {d_phi}",
            metrics.fwhm
        );
        assert!((metrics.omega_peak - 1.0).abs() < 0.05);
    }

    #[test]
    fn analytic_area_matches_independent_quadrature() {
        let model = desk_model();
        assert_relative_eq!(
            analytic_filtered_area(&model, 1.0, 0.3),
            FILTERED_AREA_DESK,
            max_relative = 1e-9,
        );
        // One-sided total area of the signal peak is the squared half-gain.
        let total = simpson(
            |w| analytic_spectrum(&model, w) - model.s0,
            0.0,
            200.0,
            400_000,
        ) / std::f64::consts::TAU;
        assert_relative_eq!(total, model.amplitude, max_relative = 1e-4);
    }

    #[test]
    fn analytic_peak_height_and_width_are_consistent() {
        let model = desk_model();
        let g = model.gamma_total;
        assert_relative_eq!(
            analytic_spectrum(&model, 1.0) - model.s0,
            4.0 * model.amplitude / model.gamma_total,
            epsilon = 1e-9,
        );
        // Exact half-maximum crossings: omega^2 = 1 + (-g^2 +- g sqrt(4 - g^2)) / 2.
        // Their separation is the full width, equal to g up to O(g^2).
        let peak_val = analytic_spectrum(&model, (1.0 - g * g / 2.0).sqrt()) - model.s0;
        let x_hi = 0.5 * (-g * g + g * (4.0 - g * g).sqrt());
        let x_lo = 0.5 * (-g * g - g * (4.0 - g * g).sqrt());
        let (w_hi, w_lo) = ((1.0 + x_hi).sqrt(), (1.0 + x_lo).sqrt());
        for w in [w_hi, w_lo] {
            assert_relative_eq!(
                analytic_spectrum(&model, w) - model.s0,
                peak_val / 2.0,
                max_relative = 1e-9,
            );
        }
        assert_relative_eq!(w_hi - w_lo, g, max_relative = 0.01);
    }

    #[test]
    fn window_equivalence_holds_for_sinusoid() {
        let dt = 0.1;
        let omega0 = 1.0;
        let samples: Vec<f64> = (0..100_000)
            .map(|n| (omega0 * n as f64 * dt).cos())
            .collect();
        let report = verify_window_equivalence(&samples, dt, omega0, 0.3).unwrap();
        assert!(report.relative_gap < 0.02, "sides disagree: {report:?}");
        assert_relative_eq!(report.frequency_side, 0.5, max_relative = 0.02);
    }

    #[test]
    fn window_equivalence_holds_for_phase_diffused_cosine() {
        let detector = DetectorParams {
            i0: 0.0,
            delta_i: 2.0,
            s0: 10.0,
            eta: 1.0,
        };
        let cfg = OracleConfig {
            kind: OracleKind::CosinePhaseDiffusion,
            omega: 1.0,
            phase_diffusion: 0.01,
            telegraph_rate: 0.0,
            dt: 0.1,
            n_samples: 200_000,
        };
        let rec = generate_oracle(&cfg, &detector, &mut RecordStreams::new(SEED, 3)).unwrap();
        let q = rec.q_truth.as_ref().unwrap();
        let half_di = 0.5 * detector.delta_i;
        let signal: Vec<f64> = q.iter().map(|&v| half_di * v).collect();
        let report = verify_window_equivalence(&signal, rec.dt, 1.0, 0.3).unwrap();
        assert!(report.relative_gap < 0.02, "sides disagree: {report:?}");
        // Single record, so only loose agreement with the ensemble value.
        assert_relative_eq!(
            report.frequency_side,
            COSINE_FUNDAMENTAL_WEIGHT * detector.signal_scale(),
            max_relative = 0.2,
        );
    }

    #[test]
    fn estimator_validation_rejects_bad_input() {
        let rec = SignalRecord::new(0.1, 0.0, vec![0.0; 100], None, None).unwrap();
        assert!(estimate_spectrum(&rec, 7).is_err());
        assert!(estimate_spectrum(&rec, 9).is_err(), "odd segment length");
        assert!(
            estimate_spectrum(&rec, 128).is_err(),
            "record shorter than one segment"
        );
        assert!(verify_window_equivalence(&[0.0; 100], 0.1, 1.0, 0.3).is_err());
        let rec = SignalRecord::new(0.1, 0.0, vec![1.0; 4096], None, None).unwrap();
        let est = estimate_spectrum(&rec, 1024).unwrap();
        assert!(peak_metrics(&est, -1.0, 0.5).is_err());
        assert!(filtered_peak_area(&est, 1.0, 0.0, 0.0).is_err());
    }
}
