//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line with its measured values (visible with `--nocapture`).
//!
//! Run with `cargo test -p sensorprint --release --test acceptance`.
//! The statistical criteria use the default experiment configuration
//! (four builtin models, three instances each, seed 42, 1000 matchings).

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use sensorprint::agent::{DeviceAgent, SimulatedAgent};
use sensorprint::eval::{
    build_bench, compute_confusion, compute_p_sweep, compute_theta_sweep, run_confusion, Bench,
    ExperimentConfig,
};
use sensorprint::registry::{AuthStatus, Registry};
use sensorprint::server::VerifierServer;
use sensorprint::session::{run_auth_session, Verifier};
use sensorprint::{agent::WireClient, fpfile};
use sensorprint_core::fingerprint::{
    expected_fn_after_retries, match_partial, schedule_challenges, FingerprintEntry,
    FrequencyGrid, FullFingerprint, PartialFingerprint, ProbePoint,
};
use sensorprint_core::seed::derive_seed;
use sensorprint_core::sensor::{instantiate, Environment, SensorModel};
use sensorprint_core::signal::{rms, synthesize_sine, ConverterSpec};

fn default_bench() -> &'static Bench {
    static BENCH: OnceLock<Bench> = OnceLock::new();
    BENCH.get_or_init(|| build_bench(&ExperimentConfig::default()).expect("bench builds"))
}

fn finish(criterion: &str, start: Instant, budget: Duration, detail: &str) {
    let elapsed = start.elapsed();
    println!("{criterion}: PASS in {elapsed:.2?} (budget {budget:?}) — {detail}");
    assert!(
        elapsed < budget,
        "{criterion} exceeded its runtime budget: {elapsed:?} >= {budget:?}"
    );
}

/// Criterion 1: RMS of a synthesized unit sine matches 1/sqrt(2) and an
/// independent 10x-oversampled numerical integration oracle.
#[test]
fn c01_rms_identity_and_integration_oracle() {
    let start = Instant::now();
    let spec = ConverterSpec::new(24, -2.0, 2.0, 64_000_000.0).unwrap();
    let frequency = 1_000_000.0; // 64 samples per period
    let w = synthesize_sine(frequency, 1.0, 0.0, &spec, 16).unwrap();
    assert!(w.len() >= 16 * 64);
    let measured = rms(&w).unwrap();

    let analytic = std::f64::consts::FRAC_1_SQRT_2;
    let rel = (measured - analytic).abs() / analytic;
    assert!(rel < 1e-3, "rms {measured} vs 1/sqrt(2): rel {rel}");

    // Brute-force midpoint integration of the squared sine at 10x density,
    // independent of the synthesis and feature paths.
    let n = w.len() as u64 * 10;
    let duration = 16.0 / frequency;
    let dt = duration / n as f64;
    let mut acc = 0.0;
    for k in 0..n {
        let t = (k as f64 + 0.5) * dt;
        let v = (2.0 * std::f64::consts::PI * frequency * t).sin();
        acc += v * v;
    }
    let oracle = (acc / n as f64).sqrt();
    let rel_oracle = (measured - oracle).abs() / oracle;
    assert!(rel_oracle < 1e-4, "rms {measured} vs oracle {oracle}");

    finish(
        "criterion 01",
        start,
        Duration::from_secs(1),
        &format!("rms {measured:.6}, analytic rel {rel:.1e}, oracle rel {rel_oracle:.1e}"),
    );
}

/// Criterion 2: the matcher's epsilon equals a naive reference loop to
/// 1e-12 relative over 10_000 random pairs of lengths 1..=1000.
#[test]
fn c02_rmse_equals_naive_loop() {
    use rand::{Rng, SeedableRng};
    let start = Instant::now();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20_240_817);
    let grid = FrequencyGrid::new(1_000.0, 1_000_000.0, 1_000.0).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let len = rng.random_range(1..=1000);
        let reference: Vec<f64> = (0..len).map(|_| rng.random_range(0.0..3.3)).collect();
        let probes: Vec<f64> = (0..len).map(|_| rng.random_range(0.0..3.3)).collect();

        let full = FullFingerprint {
            device_id: "ref".into(),
            grid,
            entries: (0..1000)
                .map(|i| FingerprintEntry {
                    frequency_hz: grid.frequency(i),
                    mean_rms_v: if i < len { reference[i] } else { 0.0 },
                    mean_variance_v2: 0.0,
                    std_rms_v: 0.0,
                })
                .collect(),
            n_repeats: 1,
            bootstrap_temperature_c: 25.0,
        };
        let partial = PartialFingerprint {
            device_id: "probe".into(),
            points: probes
                .iter()
                .enumerate()
                .map(|(i, &v)| ProbePoint {
                    frequency_hz: grid.frequency(i),
                    rms_v: v,
                })
                .collect(),
            timestamp: 0,
        };
        let epsilon = match_partial(&full, &partial, 0.01).unwrap().epsilon;

        let mut acc = 0.0;
        for i in 0..len {
            let d = reference[i] - probes[i];
            acc += d * d;
        }
        let naive = (acc / len as f64).sqrt();
        let rel = (epsilon - naive).abs() / naive.max(1e-300);
        worst = worst.max(rel);
        assert!(rel <= 1e-12, "epsilon {epsilon} vs naive {naive}: rel {rel}");
    }
    finish(
        "criterion 02",
        start,
        Duration::from_secs(10),
        &format!("10000 pairs, worst relative deviation {worst:.2e}"),
    );
}

/// Criterion 3: the challenge scheduler reproduces golden vectors frozen
/// from an independent reference implementation, and P = N covers the grid.
#[test]
fn c03_scheduler_golden_vectors() {
    let start = Instant::now();
    let grid = FrequencyGrid::default();

    let got = schedule_challenges(1_700_000_000, "sensor-A", 10, &grid).unwrap();
    let expected = [
        673_000.0, 468_000.0, 422_000.0, 161_000.0, 694_000.0, 502_000.0, 785_000.0, 479_000.0,
        11_000.0, 471_000.0,
    ];
    assert_eq!(got, expected, "golden vector sensor-A/1700000000/P=10");

    let got = schedule_challenges(1_723_456_789, "node-7", 10, &grid).unwrap();
    let expected = [
        64_000.0, 581_000.0, 727_000.0, 188_000.0, 521_000.0, 123_000.0, 582_000.0, 540_000.0,
        951_000.0, 175_000.0,
    ];
    assert_eq!(got, expected, "golden vector node-7/1723456789/P=10");

    let mut all = schedule_challenges(1_700_000_000, "sensor-A", 1000, &grid).unwrap();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let want: Vec<f64> = grid.frequencies().collect();
    assert_eq!(all, want, "P = N must cover every grid frequency once");

    finish(
        "criterion 03",
        start,
        Duration::from_secs(1),
        "2 golden vectors + full-grid permutation",
    );
}

/// Criterion 4: zero inter-model acceptances over 1000 impostor matchings
/// per ordered model pair at (P=10, theta=0.01).
#[test]
fn c04_inter_model_separation() {
    use rand::SeedableRng;
    let start = Instant::now();
    let config = ExperimentConfig::default();
    let bench = default_bench();
    let n_models = bench.model_names.len();
    let mut accepts = 0u64;
    let mut total = 0u64;
    for source_model in 0..n_models {
        for target_model in 0..n_models {
            if source_model == target_model {
                continue;
            }
            for m in 0..1000u32 {
                let source_idx =
                    bench.by_model[source_model][m as usize % bench.by_model[source_model].len()];
                let target_idx =
                    bench.by_model[target_model][m as usize % bench.by_model[target_model].len()];
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(derive_seed(
                    config.base_seed,
                    "acceptance-inter",
                    &[source_model as u64, target_model as u64, m as u64],
                ));
                let partial = bench
                    .probe_session(&config, &bench.devices[source_idx], 10, &mut rng)
                    .unwrap();
                let result =
                    match_partial(&bench.devices[target_idx].full, &partial, 0.01).unwrap();
                total += 1;
                if result.accepted {
                    accepts += 1;
                }
            }
        }
    }
    assert_eq!(accepts, 0, "inter-model acceptances out of {total}");
    finish(
        "criterion 04",
        start,
        Duration::from_secs(120),
        &format!("{total} ordered-pair impostor matchings, 0 accepted"),
    );
}

/// Criterion 5: intra-device RMSE exceeds target-device RMSE for every P in
/// {5, 10, 20, 50, 100} and the separation widens from P=5 to P=100.
#[test]
fn c05_p_sweep_trend() {
    let start = Instant::now();
    let config = ExperimentConfig::default();
    let rows = compute_p_sweep(&config, default_bench()).unwrap();
    assert_eq!(
        rows.iter().map(|r| r.p).collect::<Vec<_>>(),
        vec![5, 10, 20, 50, 100]
    );
    for r in &rows {
        assert!(
            r.mean_rmse_intra > r.mean_rmse_target,
            "P={}: intra {} <= target {}",
            r.p,
            r.mean_rmse_intra,
            r.mean_rmse_target
        );
    }
    let gap_5 = rows[0].mean_rmse_intra - rows[0].mean_rmse_target;
    let gap_100 = rows[4].mean_rmse_intra - rows[4].mean_rmse_target;
    assert!(
        gap_100 > gap_5,
        "separation must widen: gap(5) {gap_5} vs gap(100) {gap_100}"
    );
    finish(
        "criterion 05",
        start,
        Duration::from_secs(300),
        &format!("gap(5) {gap_5:.5}, gap(100) {gap_100:.5}"),
    );
}

/// Criterion 6: F1 over 20 thresholds in [0.001, 0.02] peaks strictly
/// inside the interval and recall is non-decreasing.
#[test]
fn c06_theta_sweep_shape() {
    let start = Instant::now();
    let config = ExperimentConfig::default();
    let rows = compute_theta_sweep(&config, default_bench(), 10).unwrap();
    assert_eq!(rows.len(), 20);
    assert_eq!(rows[0].theta, 0.001);
    assert_eq!(rows[19].theta, 0.02);

    let best = rows
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.counts.f1.total_cmp(&b.1.counts.f1))
        .map(|(i, _)| i)
        .unwrap();
    assert!(
        best > 0 && best < rows.len() - 1,
        "F1 argmax at index {best} is not interior"
    );
    assert!(rows[best].counts.f1 > rows[0].counts.f1);
    assert!(rows[best].counts.f1 > rows[rows.len() - 1].counts.f1);

    for pair in rows.windows(2) {
        assert!(
            pair[1].counts.recall >= pair[0].counts.recall,
            "recall must be non-decreasing in theta"
        );
    }
    finish(
        "criterion 06",
        start,
        Duration::from_secs(300),
        &format!(
            "F1 peaks at theta {} (index {best}), F1 {:.3}",
            rows[best].theta, rows[best].counts.f1
        ),
    );
}

/// Criterion 7: the retry arithmetic is the exact square, and Monte Carlo
/// two-attempt sessions reproduce it within 3 sigma.
#[test]
fn c07_retry_arithmetic_and_monte_carlo() {
    let start = Instant::now();

    // Exact in IEEE-754: the function is the plain product. The decimal
    // constant 0.000841 is one ulp below the exact square of f64(0.029),
    // so the decimal identity is asserted at ulp resolution.
    let exact = expected_fn_after_retries(0.029, 2).unwrap();
    assert_eq!(exact, 0.029f64 * 0.029f64);
    let ulp = 0.000841f64 * f64::EPSILON;
    assert!(
        (exact - 0.000841).abs() <= ulp,
        "{exact} vs 0.000841 differs by more than one ulp"
    );

    // Monte Carlo: two-attempt sessions of a genuine noisy device.
    let dir = tempfile::tempdir().unwrap();
    let registry = Registry::open(dir.path()).unwrap();
    let model = SensorModel::preset("LM61").unwrap();
    let instance = instantiate(&model, 1).unwrap();
    let grid = FrequencyGrid::default();
    let mut agent = SimulatedAgent::new("lm61-mc", instance, grid, 10, 9000);
    let fingerprint = agent.bootstrap_fingerprint(3).unwrap();
    registry
        .enroll_fingerprint(&fingerprint, 0.01, 10, 2, 0)
        .unwrap();

    let sessions: u64 = 10_000;
    let mut first_fail = 0u64;
    let mut final_fail = 0u64;
    for s in 0..sessions {
        let now = 1_700_000_000 + s * 10;
        let outcome = run_auth_session(&mut agent, &registry, now).unwrap();
        match outcome.status {
            AuthStatus::Accepted => {
                if outcome.attempts_used > 1 {
                    first_fail += 1;
                }
            }
            AuthStatus::Rejected => {
                first_fail += 1;
                final_fail += 1;
            }
            other => panic!("unexpected session outcome {other:?}"),
        }
    }
    let p1 = first_fail as f64 / sessions as f64;
    let p2 = final_fail as f64 / sessions as f64;
    let predicted = expected_fn_after_retries(p1, 2).unwrap();
    let sigma = (predicted * (1.0 - predicted) / sessions as f64).sqrt();
    assert!(
        (p2 - predicted).abs() <= 3.0 * sigma,
        "final FN {p2} vs predicted {predicted} (sigma {sigma})"
    );
    assert!(p1 > 0.0, "single-attempt FN must be observable");
    finish(
        "criterion 07",
        start,
        Duration::from_secs(300),
        &format!(
            "single FN {:.3}%, final FN {:.4}% vs predicted {:.4}% (3 sigma {:.4}%)",
            100.0 * p1,
            100.0 * p2,
            100.0 * predicted,
            300.0 * sigma
        ),
    );
}

/// Criterion 8: quirk reproduction. The shutdown band zeroes the sweep
/// exactly; the variance-capped model never exceeds 1e-6 V^2; the flat-band
/// model has the highest intra-model false-positive rate.
#[test]
fn c08_quirk_reproduction() {
    let start = Instant::now();
    let config = ExperimentConfig::default();
    let bench = default_bench();

    let mcp = bench
        .model_names
        .iter()
        .position(|n| n == "MCP9700")
        .unwrap();
    for &device_idx in &bench.by_model[mcp] {
        for e in &bench.devices[device_idx].full.entries {
            if e.frequency_hz >= 90_000.0 && e.frequency_hz <= 110_000.0 {
                assert_eq!(e.mean_rms_v, 0.0, "rms at {} Hz", e.frequency_hz);
                assert_eq!(e.std_rms_v, 0.0);
            } else {
                assert!(e.mean_rms_v > 0.0, "rms at {} Hz", e.frequency_hz);
            }
        }
    }

    let tmp = bench.model_names.iter().position(|n| n == "TMP36").unwrap();
    let mut max_var: f64 = 0.0;
    for &device_idx in &bench.by_model[tmp] {
        for e in &bench.devices[device_idx].full.entries {
            max_var = max_var.max(e.mean_variance_v2);
        }
    }
    assert!(max_var <= 1e-6, "TMP36 variance {max_var} exceeds 1e-6");

    let rows = compute_confusion(&config, bench, 10, 0.01).unwrap();
    let lmt = rows.iter().find(|r| r.model == "LMT85").unwrap();
    for r in &rows {
        if r.model != "LMT85" {
            assert!(
                lmt.fp_intra_rate() > r.fp_intra_rate(),
                "LMT85 {:.3} must exceed {} {:.3}",
                lmt.fp_intra_rate(),
                r.model,
                r.fp_intra_rate()
            );
        }
    }
    finish(
        "criterion 08",
        start,
        Duration::from_secs(180),
        &format!(
            "shutdown band exact zeros; TMP36 max variance {max_var:.2e}; LMT85 FP-intra {:.1}% is the maximum",
            100.0 * lmt.fp_intra_rate()
        ),
    );
}

/// Criterion 9: protocol suite. Noiseless enroll/verify round trip with
/// epsilon 0, replay rejection across a verifier restart, challenge-set
/// tamper detection, and 100 concurrent sessions without cross-talk.
#[test]
fn c09_protocol_suite() {
    let start = Instant::now();

    // Noiseless genuine agent accepts with epsilon exactly 0.
    let mut model = SensorModel::preset("MCP9700").unwrap();
    model.noise_rms_v = 0.0;
    let instance = instantiate(&model, 77).unwrap();
    let grid = FrequencyGrid::default();
    let mut agent = SimulatedAgent::new("dev-noiseless", instance, grid, 10, 5);
    agent.env = Environment::new(25.0, 0.0);
    let fingerprint = agent.bootstrap_fingerprint(3).unwrap();

    let dir = tempfile::tempdir().unwrap();
    {
        let registry = Registry::open(dir.path()).unwrap();
        registry
            .enroll_fingerprint(&fingerprint, 0.01, 10, 2, 0)
            .unwrap();
        let outcome = run_auth_session(&mut agent, &registry, 1_700_000_000).unwrap();
        assert_eq!(outcome.status, AuthStatus::Accepted);
        assert_eq!(outcome.epsilon, Some(0.0));
        assert_eq!(outcome.attempts_used, 1);
    }

    // Replay of a consumed timestamp is rejected across a restart.
    {
        let registry = Registry::open(dir.path()).unwrap();
        let attempt = agent.create_attempt(1_700_000_000, 1).unwrap();
        let outcome = registry.verify(&attempt, 1_700_000_000).unwrap();
        assert_eq!(outcome.status, AuthStatus::ReplayRejected);

        // Tampering with any single frequency yields MalformedChallengeSet.
        let good = agent.create_attempt(1_700_000_050, 1).unwrap();
        for position in 0..good.points.len() {
            let mut bad = good.clone();
            let replacement = fingerprint
                .grid
                .frequencies()
                .find(|f| !good.points.iter().any(|p| p.frequency_hz == *f))
                .unwrap();
            bad.points[position].frequency_hz = replacement;
            let outcome = registry.verify(&bad, 1_700_000_050).unwrap();
            assert_eq!(outcome.status, AuthStatus::MalformedChallengeSet);
        }
        // The probe set itself is still fresh and valid afterward.
        assert_eq!(
            registry.verify(&good, 1_700_000_050).unwrap().status,
            AuthStatus::Accepted
        );
    }

    // 100 devices authenticate concurrently over TCP without cross-talk.
    let dir2 = tempfile::tempdir().unwrap();
    let registry = std::sync::Arc::new(Registry::open(dir2.path()).unwrap());
    let small_grid = FrequencyGrid::new(10_000.0, 1_000_000.0, 10_000.0).unwrap();
    let mut agents = Vec::new();
    for k in 0..100u64 {
        let mut m = SensorModel::preset(["TMP36", "LM61", "MCP9700", "LMT85"][k as usize % 4])
            .unwrap();
        m.noise_rms_v = 0.0;
        let inst = instantiate(&m, 1000 + k).unwrap();
        let mut a = SimulatedAgent::new(format!("node-{k:03}"), inst, small_grid, 10, k);
        a.env = Environment::new(25.0, 0.0);
        let fp = a.bootstrap_fingerprint(1).unwrap();
        registry.enroll_fingerprint(&fp, 0.01, 10, 2, 0).unwrap();
        agents.push(a);
    }
    let server = VerifierServer::new(registry.clone())
        .with_clock(|| 1_800_000_000)
        .spawn("127.0.0.1:0")
        .unwrap();
    let addr = server.addr();
    let handles: Vec<_> = agents
        .into_iter()
        .map(|mut agent| {
            std::thread::spawn(move || {
                let client = WireClient::connect(addr).unwrap();
                let attempt = agent.create_attempt(1_800_000_000, 1).unwrap();
                let outcome = client.verify_attempt(&attempt, 1_800_000_000).unwrap();
                (agent.device_id().to_string(), outcome)
            })
        })
        .collect();
    for handle in handles {
        let (device_id, outcome) = handle.join().unwrap();
        assert_eq!(
            outcome.status,
            AuthStatus::Accepted,
            "{device_id} was not accepted"
        );
        assert_eq!(outcome.epsilon, Some(0.0), "{device_id} saw cross-talk");
    }
    server.shutdown();

    finish(
        "criterion 09",
        start,
        Duration::from_secs(60),
        "round-trip, restart replay, 10x tamper detection, 100 concurrent sessions",
    );
}

/// Criterion 10: two confusion runs with the same config produce
/// byte-identical CSV output.
#[test]
fn c10_confusion_determinism() {
    let start = Instant::now();
    let mut bytes = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let mut config = ExperimentConfig::default();
        config.output_dir = dir.path().to_path_buf();
        let (_, path) = run_confusion(&config, 10, 0.01).unwrap();
        bytes.push(std::fs::read(path).unwrap());
    }
    assert_eq!(bytes[0], bytes[1], "confusion CSVs differ between runs");
    finish(
        "criterion 10",
        start,
        Duration::from_secs(240),
        &format!("two runs, {} identical bytes", bytes[0].len()),
    );
}

/// The acceptance bench itself: fingerprint files written by the bench
/// round-trip bit-exactly (exercises the persistence path at full scale).
#[test]
fn bench_fingerprints_roundtrip() {
    let bench = default_bench();
    let dir = tempfile::tempdir().unwrap();
    for device in &bench.devices {
        let path = dir.path().join(format!("{}.fp", device.device_id));
        fpfile::write_fingerprint(&path, &device.full).unwrap();
        assert_eq!(fpfile::read_fingerprint(&path).unwrap(), device.full);
    }
}
