//! Criterion benches for the per-sample hot paths: the two trajectory
//! integrators, the lag-domain correlator, Welch averaging, oracle record
//! generation, and the two-sided window identity.
//!
//! Inputs are sized so a full `cargo bench` stays in minutes and the
//! single-pass run under `cargo test` is near-instant.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use weakmeas::{
    estimate_auto_correlator, estimate_spectrum, generate_oracle_records, simulate_signal,
    verify_window_equivalence, DensityMatrix, DetectorParams, OracleConfig, OracleKind,
    PhysicalConfig, QubitParams, RecordStreams, Scheme, SignalRecord, SimConfig,
};

const SEED: u64 = 31;

fn desk() -> PhysicalConfig {
    PhysicalConfig::new(
        DetectorParams {
            i0: 0.0,
            delta_i: 2.0,
            s0: 10.0,
            eta: 1.0,
        },
        QubitParams { omega: 1.0 },
    )
    .expect("desk parameters are valid")
}

fn sim_config(scheme: Scheme, n_steps: u64) -> SimConfig {
    SimConfig {
        dt: 0.005,
        n_steps,
        discard_steps: 0,
        scheme,
        initial: DensityMatrix::mixed(),
        renormalize_every: 100,
        decimate: 20,
    }
}

/// One decimated quantum record of `n_steps` full-resolution steps.
fn quantum_record(n_steps: u64) -> SignalRecord {
    let mut streams = RecordStreams::new(SEED, 0);
    simulate_signal(
        &desk(),
        &sim_config(Scheme::HeunStratonovich, n_steps),
        &mut streams.noise,
    )
    .expect("simulation succeeds")
    .0
}

fn bench_integrators(c: &mut Criterion) {
    let phys = desk();
    let n_steps: u64 = 200_000;
    let mut group = c.benchmark_group("integrator");
    group.throughput(Throughput::Elements(n_steps));
    for (name, scheme) in [
        ("heun_stratonovich", Scheme::HeunStratonovich),
        ("ito_euler", Scheme::ItoEuler),
    ] {
        let sim = sim_config(scheme, n_steps);
        group.bench_function(BenchmarkId::new("steps", name), |b| {
            b.iter(|| {
                let mut streams = RecordStreams::new(SEED, 0);
                simulate_signal(&phys, &sim, &mut streams.noise).expect("simulation succeeds")
            })
        });
    }
    group.finish();
}

fn bench_correlator(c: &mut Criterion) {
    let record = quantum_record(2_000_000); // 100k samples after decimation
    let n = record.samples.len() as u64;
    let mut group = c.benchmark_group("correlator");
    group.throughput(Throughput::Elements(n));
    for max_lag in [50usize, 200] {
        group.bench_function(BenchmarkId::new("auto", max_lag), |b| {
            b.iter(|| estimate_auto_correlator(&record, max_lag, 8).expect("record long enough"))
        });
    }
    group.finish();
}

fn bench_spectrum(c: &mut Criterion) {
    let record = quantum_record(2_000_000);
    let n = record.samples.len() as u64;
    let mut group = c.benchmark_group("spectrum");
    group.throughput(Throughput::Elements(n));
    group.bench_function("welch_16384", |b| {
        b.iter(|| estimate_spectrum(&record, 16384).expect("record long enough"))
    });
    group.finish();
}

fn bench_oracle(c: &mut Criterion) {
    let detector = DetectorParams {
        i0: 0.0,
        delta_i: 2.0,
        s0: 10.0,
        eta: 1.0,
    };
    let cfg = OracleConfig {
        kind: OracleKind::RectangularPhaseDiffusion,
        omega: 1.0,
        phase_diffusion: 0.01,
        telegraph_rate: 0.0,
        dt: 0.1,
        n_samples: 100_000,
    };
    let mut group = c.benchmark_group("oracle");
    group.throughput(Throughput::Elements(cfg.n_samples as u64));
    group.bench_function("rect_record", |b| {
        b.iter(|| generate_oracle_records(&cfg, &detector, 1, SEED).expect("oracle generates"))
    });
    group.finish();
}

fn bench_window_identity(c: &mut Criterion) {
    let record = quantum_record(2_000_000);
    // Unit gain: the identity is checked on Q itself.
    let series: Vec<f64> = record
        .q_truth
        .clone()
        .expect("simulated records carry the truth channel");
    let mut group = c.benchmark_group("window_identity");
    group.throughput(Throughput::Elements(series.len() as u64));
    group.bench_function("both_sides", |b| {
        b.iter(|| verify_window_equivalence(&series, record.dt, 1.0, 0.3).expect("series valid"))
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_integrators,
    bench_correlator,
    bench_spectrum,
    bench_oracle,
    bench_window_identity
);
criterion_main!(benches);
