//! Acceptance battery: the guarantees this artifact ships with, one test
//! per guarantee, each printing a PASS line with its measured margin.
//!
//! The battery covers the link budget table, steering-vector identities,
//! detector closed forms against a generic-combiner oracle, the zero-forcing
//! power bound, interference ordering, a fading-channel rate oracle, the
//! two-user good/bad experiment, gain-statistics calibration, and bitwise
//! reproducibility across thread counts.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use arraylink_core::budget::{BudgetRow, LinkBudget};
use arraylink_core::channel::{complex_gaussian, los_channel};
use arraylink_core::detectors::{
    ergodic_rate, instantaneous_rates, mrc_sinr, pairwise_sir, zf_power_bound, zf_sinr,
};
use arraylink_core::gain::{
    builtin_dipole, builtin_patch, db_to_linear, dynamic_range_profile, max_pairwise_variation,
    panel_map,
};
use arraylink_core::geometry::steering_vector;
use arraylink_core::scenario::{run_scenario, Detector, UserClass};
use arraylink_core::{
    ArrayGeometry, ChannelMatrix, Direction, GainPattern, ScenarioConfig, Substreams, UserSpec,
    SPEED_OF_LIGHT_M_S,
};
use rand::Rng;

fn default_geometry() -> ArrayGeometry {
    ArrayGeometry::new(4, 8, 0.071, SPEED_OF_LIGHT_M_S / 2.6e9).unwrap()
}

#[test]
fn a1_link_budget_reproduces_the_indoor_table() {
    let budget = LinkBudget {
        tx_power_dbm: 20.0,
        tx_gain_dbi: 8.8,
        rx_gain_dbi: 6.0,
        distance_m: 7.0,
        wavelength_m: SPEED_OF_LIGHT_M_S / 2.6e9,
        extra_items: vec![
            BudgetRow { label: "penetration loss (dB)".into(), value_db: -23.4 },
            BudgetRow { label: "array gain (dB)".into(), value_db: 33.5 },
        ],
    };
    let received = budget.received_power_dbm().unwrap();
    let path_loss = -budget.path_loss_db().unwrap();
    assert!(
        (received - -12.7).abs() < 0.05,
        "received level {received} dBm, expected -12.7 +/- 0.05"
    );
    assert!((path_loss - 57.6).abs() < 0.1, "path loss {path_loss} dB, expected 57.6 +/- 0.1");
    println!(
        "PASS a1 link budget: received {received:.4} dBm (target -12.7 +/- 0.05), \
         path loss {path_loss:.4} dB (target 57.6 +/- 0.1)"
    );
}

#[test]
fn a2_steering_vector_identities_hold_on_random_geometries() {
    let start = Instant::now();
    let streams = Substreams::new(2024);
    let mut worst_modulus = 0.0f64;
    let mut worst_norm = 0.0f64;
    let mut worst_conjugate = 0.0f64;
    for draw in 0..1_000u64 {
        let mut rng = streams.rng([70, draw, 0, 0]);
        let rows = rng.random_range(1..=12usize);
        let cols = rng.random_range(1..=12usize);
        let spacing = rng.random_range(0.01..0.15);
        let wavelength = SPEED_OF_LIGHT_M_S / rng.random_range(1.0e9..6.0e9);
        let geom = ArrayGeometry::new(rows, cols, spacing, wavelength).unwrap();
        let theta = rng.random_range(-1.55f64..1.55);
        let phi = rng.random_range(-3.2f64..3.2);
        let dir = Direction::new(theta, phi).unwrap();

        let a = steering_vector(&geom, dir);
        let m = rows * cols;
        assert_eq!(a.len(), m);
        for entry in &a {
            worst_modulus = worst_modulus.max((entry.norm() - 1.0).abs());
        }
        let norm2: f64 = a.iter().map(|e| e.norm_sqr()).sum();
        worst_norm = worst_norm.max((norm2 - m as f64).abs() / m as f64);

        let mirrored = steering_vector(&geom, dir.mirrored());
        for (x, y) in a.iter().zip(&mirrored) {
            worst_conjugate = worst_conjugate.max((x.conj() - y).norm());
        }

        let boresight = steering_vector(&geom, Direction::new(0.0, 0.0).unwrap());
        assert!(boresight.iter().all(|e| (e - Complex64::new(1.0, 0.0)).norm() == 0.0));
    }
    assert!(worst_modulus < 1e-12, "unit modulus off by {worst_modulus:.3e}");
    assert!(worst_norm < 1e-12, "norm identity off by {worst_norm:.3e}");
    assert!(worst_conjugate < 1e-12, "conjugate symmetry off by {worst_conjugate:.3e}");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}, budget 1 s");
    println!(
        "PASS a2 steering identities: 1000 random geometries, worst modulus error \
         {worst_modulus:.2e}, worst norm error {worst_norm:.2e}, worst conjugate error \
         {worst_conjugate:.2e} (all < 1e-12) in {elapsed:?}"
    );
}

/// Random complex Gaussian channel with matched random powers; shapes span
/// 1 <= K <= min(8, M) <= 16.
fn random_channel(streams: &Substreams, draw: u64) -> (ChannelMatrix, Vec<f64>) {
    let mut rng = streams.rng([71, draw, 0, 0]);
    let m = rng.random_range(1..=16usize);
    let k = rng.random_range(1..=m.min(8));
    let mat = DMatrix::from_fn(m, k, |_, _| complex_gaussian(&mut rng));
    let powers: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..10.0)).collect();
    (ChannelMatrix::from_matrix(mat).unwrap(), powers)
}

/// Output SINR of an arbitrary linear combiner `w` applied to user `k`:
/// signal power over interference plus combiner-shaped unit noise.
fn combiner_sinr(w: &DVector<Complex64>, d: &ChannelMatrix, powers: &[f64], k: usize) -> f64 {
    let signal = powers[k] * w.dotc(&d.column(k)).norm_sqr();
    let mut interference = 0.0;
    for (i, x) in powers.iter().enumerate() {
        if i != k {
            interference += x * w.dotc(&d.column(i)).norm_sqr();
        }
    }
    signal / (interference + w.norm_squared())
}

#[test]
fn a3_detector_closed_forms_match_the_generic_combiner_oracle() {
    let start = Instant::now();
    let streams = Substreams::new(31);
    let mut worst_mrc = 0.0f64;
    let mut worst_zf = 0.0f64;
    let mut degenerate = 0u32;
    for draw in 0..10_000u64 {
        let (d, powers) = random_channel(&streams, draw);
        let gram = d.as_matrix().ad_mul(d.as_matrix());
        let inverse = match gram.clone().try_inverse() {
            Some(inv) => inv,
            None => {
                degenerate += 1;
                continue;
            }
        };
        for k in 0..d.users() {
            let closed = mrc_sinr(&d, &powers, k).unwrap();
            let oracle = combiner_sinr(&DVector::from(d.column(k)), &d, &powers, k);
            worst_mrc = worst_mrc.max((closed - oracle).abs() / oracle);

            let zf = match zf_sinr(&d, &powers, k) {
                Ok(v) => v,
                Err(_) => {
                    degenerate += 1;
                    continue;
                }
            };
            let w = d.as_matrix() * inverse.column(k);
            let oracle = combiner_sinr(&w, &d, &powers, k);
            worst_zf = worst_zf.max((zf - oracle).abs() / oracle);
        }
    }
    assert!(worst_mrc < 1e-9, "MRC closed form off by {worst_mrc:.3e} relative");
    assert!(worst_zf < 1e-9, "ZF closed form off by {worst_zf:.3e} relative");
    assert!(degenerate < 10, "{degenerate} draws were numerically degenerate");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}, budget 10 s");
    println!(
        "PASS a3 detector oracle: 10000 random channels, worst MRC error {worst_mrc:.2e}, \
         worst ZF error {worst_zf:.2e} (both < 1e-9 relative) in {elapsed:?}"
    );
}

#[test]
fn a4_zero_forcing_power_bound_holds_and_tightens_when_orthogonal() {
    let streams = Substreams::new(31);
    let mut worst_violation = f64::NEG_INFINITY;
    for draw in 0..10_000u64 {
        let (d, powers) = random_channel(&streams, draw);
        for (k, x) in powers.iter().enumerate() {
            let (exact, bound) = match zf_power_bound(&d, k) {
                Ok(pair) => pair,
                Err(_) => continue,
            };
            // Scale-free check; the bound statement is per unit power and
            // multiplying both sides by x_k preserves it.
            worst_violation = worst_violation.max((exact - bound) / bound);
            assert!(
                x * exact <= x * bound * (1.0 + 1e-12),
                "draw {draw} user {k}: {exact} > {bound}"
            );
        }
    }
    assert!(worst_violation <= 1e-12, "bound violated by {worst_violation:.3e} relative");

    // Orthonormal columns (thin QR of a random tall matrix) must meet the
    // bound with equality.
    let mut worst_equality_gap = 0.0f64;
    for draw in 0..200u64 {
        let mut rng = streams.rng([72, draw, 0, 0]);
        let m = rng.random_range(2..=16usize);
        let k = rng.random_range(1..=m.min(8));
        let mat = DMatrix::from_fn(m, k, |_, _| complex_gaussian(&mut rng));
        let q = mat.qr().q();
        let d = ChannelMatrix::from_matrix(q).unwrap();
        for user in 0..k {
            let (exact, bound) = zf_power_bound(&d, user).unwrap();
            worst_equality_gap = worst_equality_gap.max((exact - bound).abs() / bound);
        }
    }
    assert!(worst_equality_gap < 1e-9, "orthogonal equality off by {worst_equality_gap:.3e}");

    // Hand-checked two-user fixture: unit column against its 45-degree
    // rotation at unit power.
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let d = ChannelMatrix::from_matrix(DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(1.0, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(s, 0.0),
        ],
    ))
    .unwrap();
    let rates = instantaneous_rates(&d, &[1.0, 1.0]).unwrap();
    let zf = rates.zf.unwrap();
    for user in 0..2 {
        assert!((rates.mrc.rate[user] - 0.737).abs() < 1e-3, "MRC {:?}", rates.mrc.rate);
        assert!((zf.rate[user] - 0.585).abs() < 1e-3, "ZF {:?}", zf.rate);
    }
    println!(
        "PASS a4 power bound: worst signed slack {worst_violation:.2e}, orthogonal equality gap \
         {worst_equality_gap:.2e}, fixture rates MRC {:.4}/ZF {:.4}",
        rates.mrc.rate[0], zf.rate[0]
    );
}

#[test]
fn a5_interference_ratio_orders_by_channel_norm() {
    let geom = default_geometry();
    let pattern = GainPattern::Synthetic(builtin_patch(geom.elements()).unwrap());
    let streams = Substreams::new(55);
    let mut violations = 0u32;
    for draw in 0..10_000u64 {
        let mut rng = streams.rng([73, draw, 0, 0]);
        let mut random_dir = || {
            let theta = rng.random_range(-75.0f64..75.0).to_radians();
            let phi = rng.random_range(88.0f64..92.0).to_radians();
            Direction::new(theta, phi).unwrap()
        };
        let users = vec![
            UserSpec::los(1.0, 1.0, random_dir()).unwrap(),
            UserSpec::los(1.0, 1.0, random_dir()).unwrap(),
        ];
        let d = los_channel(&geom, &pattern, &users).unwrap();
        let norm = |k: usize| d.column(k).iter().map(|e| e.norm_sqr()).sum::<f64>();
        let (sir_0, sir_1) = pairwise_sir(d.column_slice(0), d.column_slice(1), 1.0, 1.0).unwrap();
        let ordered = if norm(0) <= norm(1) { sir_0 <= sir_1 } else { sir_1 <= sir_0 };
        if !ordered {
            violations += 1;
        }
    }
    assert_eq!(violations, 0, "norm/SIR ordering violated on {violations} of 10000 draws");
    println!("PASS a5 interference ordering: 10000 equal-power two-user draws, 0 violations");
}

/// Composite-Simpson value of the single-antenna fading rate integral
/// `int_0^inf log2(1+t) exp(-t) dt`, truncated where the tail is below
/// double precision.
fn simpson_rate_oracle() -> f64 {
    let (a, b, n) = (0.0f64, 50.0f64, 500_000usize);
    let h = (b - a) / n as f64;
    let f = |t: f64| (1.0 + t).log2() * (-t).exp();
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let weight = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += weight * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

#[test]
fn a6_single_antenna_fading_rate_matches_the_integral_oracle() {
    let start = Instant::now();
    let oracle = simpson_rate_oracle();
    assert!((oracle - 0.8603).abs() < 5e-4, "integral oracle drifted: {oracle}");

    let streams = Substreams::new(606);
    let sample = |trial: u64| {
        let mut rng = streams.rng([74, trial, 0, 0]);
        ChannelMatrix::from_matrix(DMatrix::from_element(1, 1, complex_gaussian(&mut rng)))
    };
    let rates = ergodic_rate(sample, &[1.0], 1_000_000).unwrap();
    let mc = rates.mrc_mean[0];
    let gap = (mc - oracle).abs();
    assert!(gap <= 0.01, "Monte Carlo {mc} vs oracle {oracle} (gap {gap:.4})");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}, budget 30 s");
    println!(
        "PASS a6 fading rate oracle: Monte Carlo {mc:.5} vs integral {oracle:.5} \
         (gap {gap:.2e} <= 0.01, {} trials) in {elapsed:?}",
        rates.trials
    );
}

#[test]
fn a7_good_and_bad_user_rates_order_correctly_at_25_db() {
    let start = Instant::now();
    let config = ScenarioConfig { snr_sweep_db: vec![25.0], ..ScenarioConfig::default() };
    assert_eq!(config.trials, 10_000);
    let curves = run_scenario(&config).unwrap();
    let record = |array: &str, detector: Detector, class: UserClass| {
        curves
            .records
            .iter()
            .find(|r| r.array == array && r.detector == detector && r.user_class == class)
            .unwrap_or_else(|| panic!("missing record {array}/{detector}/{class}"))
    };

    let reference_mrc = record("reference", Detector::Mrc, UserClass::Reference);
    let mut gaps = Vec::new();
    for array in ["patch", "dipole"] {
        let good = record(array, Detector::Mrc, UserClass::Good).mean_rate_bps_hz;
        let bad = record(array, Detector::Mrc, UserClass::Bad).mean_rate_bps_hz;
        assert!(
            good > reference_mrc.mean_rate_bps_hz && reference_mrc.mean_rate_bps_hz > bad,
            "{array}: want good {good} > reference {} > bad {bad}",
            reference_mrc.mean_rate_bps_hz
        );
        gaps.push(good - bad);
    }
    let (patch_gap, dipole_gap) = (gaps[0], gaps[1]);
    assert!(
        dipole_gap > patch_gap,
        "unfairness gap: dipole {dipole_gap} must exceed patch {patch_gap}"
    );

    let patch_zf_bad = record("patch", Detector::Zf, UserClass::Bad).mean_rate_bps_hz;
    let dipole_zf_bad = record("dipole", Detector::Zf, UserClass::Bad).mean_rate_bps_hz;
    assert!(
        patch_zf_bad > dipole_zf_bad,
        "ZF bad-user rate: patch {patch_zf_bad} must exceed dipole {dipole_zf_bad}"
    );

    let reference_zf = record("reference", Detector::Zf, UserClass::Reference);
    for array in ["patch", "dipole"] {
        for class in [UserClass::Good, UserClass::Bad] {
            let r = record(array, Detector::Zf, class);
            let band = 3.0 * (reference_zf.std_error.powi(2) + r.std_error.powi(2)).sqrt();
            assert!(
                r.mean_rate_bps_hz <= reference_zf.mean_rate_bps_hz + band,
                "{array}/{class}: ZF mean {} above reference {} + {band}",
                r.mean_rate_bps_hz,
                reference_zf.mean_rate_bps_hz
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}, budget 120 s");
    println!(
        "PASS a7 two-user experiment: unfairness gaps dipole {dipole_gap:.3} > patch \
         {patch_gap:.3} bits/s/Hz, ZF bad patch {patch_zf_bad:.3} > dipole {dipole_zf_bad:.3}, \
         all ZF means within 3 SE below reference, in {elapsed:?}"
    );
}

#[test]
fn a8_gain_statistics_meet_their_calibration_targets() {
    let geom = default_geometry();
    let m = geom.elements();
    let phis_deg = [88.0, 89.0, 90.0, 91.0, 92.0];

    let uniform = GainPattern::uniform(m, 0.0).unwrap();
    let mut theta = -75.0f64;
    while theta <= 75.0 {
        for phi in phis_deg {
            let dir = Direction::from_degrees(theta, phi).unwrap();
            assert_eq!(max_pairwise_variation(&uniform, dir).unwrap(), 0.0);
        }
        theta += 1.5;
    }

    let patch = GainPattern::Synthetic(builtin_patch(m).unwrap());
    let dipole = GainPattern::Synthetic(builtin_dipole(m).unwrap());
    let thetas_rad: Vec<f64> =
        (0..=399).map(|i| (-59.85 + i as f64 * 0.3).to_radians()).collect();
    let phis_rad: Vec<f64> = phis_deg.iter().map(|p| p.to_radians()).collect();
    let patch_profile = dynamic_range_profile(&patch, &thetas_rad, &phis_rad).unwrap();
    let dipole_profile = dynamic_range_profile(&dipole, &thetas_rad, &phis_rad).unwrap();
    let patch_worst = patch_profile.iter().map(|p| p.range_db()).fold(0.0, f64::max);
    let mut min_excess = f64::INFINITY;
    for (p, d) in patch_profile.iter().zip(&dipole_profile) {
        min_excess = min_excess.min(d.range_db() - p.range_db());
    }
    assert!(patch_worst <= 5.0, "patch dynamic range {patch_worst} dB exceeds 5 dB");
    assert!(
        min_excess >= 4.0,
        "dipole dynamic range exceeds patch by only {min_excess} dB somewhere"
    );

    let mut worst_identity = 0.0f64;
    for pattern in [&patch, &dipole, &uniform] {
        for theta in [-40.0, 40.0] {
            let map = panel_map(pattern, Direction::from_degrees(theta, 90.0).unwrap()).unwrap();
            assert_eq!(map.len(), m);
            let linear_sum: f64 = map.iter().map(|v| db_to_linear(*v)).sum();
            worst_identity = worst_identity.max((linear_sum - m as f64).abs() / m as f64);
        }
    }
    assert!(worst_identity < 1e-9, "panel normalization off by {worst_identity:.3e}");
    println!(
        "PASS a8 gain statistics: uniform variation 0 everywhere, patch range {patch_worst:.3} dB \
         <= 5 dB inside 60 deg, dipole exceeds patch by >= {min_excess:.3} dB (>= 4), panel \
         identity error {worst_identity:.2e}"
    );
}

#[test]
fn a9_simulate_is_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        r#"{"snr_sweep_db": [0.0, 25.0], "trials": 6000, "seed": 7}"#,
    )
    .unwrap();
    let run = |threads: &str, out: &str| {
        let out_dir = dir.path().join(out);
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_arraylink"))
            .args(["simulate", "--config", config.to_str().unwrap(), "--out"])
            .arg(&out_dir)
            .env("RAYON_NUM_THREADS", threads)
            .status()
            .unwrap();
        assert!(status.success(), "simulate failed with {threads} threads");
        out_dir
    };
    let single = run("1", "single");
    let multi = run("4", "multi");
    let results_single = std::fs::read(single.join("results.csv")).unwrap();
    let results_multi = std::fs::read(multi.join("results.csv")).unwrap();
    assert_eq!(results_single, results_multi, "results.csv differs across thread counts");
    assert_eq!(
        std::fs::read(single.join("manifest.json")).unwrap(),
        std::fs::read(multi.join("manifest.json")).unwrap(),
        "manifest.json differs across thread counts"
    );
    assert!(!results_single.is_empty());
    println!(
        "PASS a9 determinism: 1-thread and 4-thread runs byte-identical ({} bytes of results)",
        results_single.len()
    );
}
