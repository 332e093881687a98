//! End-to-end scenario pipeline: JSON config in, validated run,
//! deterministic artifacts out.

use arraylink_core::report::{emit_results, results_csv};
use arraylink_core::scenario::{
    place_users, run_scenario, ArrayCase, Detector, PatternSpec, UserClass,
};
use arraylink_core::ScenarioConfig;

#[test]
fn json_config_runs_and_round_trips_through_artifacts() {
    let json = r#"{
        "geometry": {"rows": 4, "cols": 4, "spacing_m": 0.071, "freq_hz": 2.6e9},
        "array_cases": [
            {"label": "reference", "pattern": {"kind": "uniform"}},
            {"label": "patch", "pattern": {"kind": "builtin_patch"}}
        ],
        "good_thetas_deg": [-20.0, 0.0, 20.0],
        "bad_thetas_deg": [-60.0, 60.0],
        "phis_deg": [89.0, 90.0, 91.0],
        "snr_sweep_db": [0.0, 25.0],
        "trials": 120,
        "seed": 9
    }"#;
    let config: ScenarioConfig = serde_json::from_str(json).unwrap();
    config.validate().unwrap();
    let curves = run_scenario(&config).unwrap();

    // One pooled class for the uniform case, two for the patch case, both
    // detectors, every SNR.
    assert_eq!(curves.records.len(), 2 * 2 * (1 + 2));
    for r in &curves.records {
        assert!(r.mean_rate_bps_hz.is_finite() && r.mean_rate_bps_hz > 0.0);
        assert!(r.std_error.is_finite() && r.std_error >= 0.0);
    }

    let dir = tempfile::tempdir().unwrap();
    emit_results(&curves, dir.path()).unwrap();

    let csv_text = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), curves.records.len());
    for (row, rec) in rows.iter().zip(&curves.records) {
        assert_eq!(row[4].parse::<f64>().unwrap(), rec.mean_rate_bps_hz);
    }

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    let echoed: ScenarioConfig = serde_json::from_value(manifest["config"].clone()).unwrap();
    assert_eq!(echoed, config);
    assert_eq!(manifest["seed"], 9);
}

#[test]
fn thread_pool_size_does_not_change_estimates() {
    let config = ScenarioConfig {
        array_cases: vec![ArrayCase { label: "patch".into(), pattern: PatternSpec::BuiltinPatch }],
        snr_sweep_db: vec![25.0],
        trials: 9_000,
        seed: 3,
        ..ScenarioConfig::default()
    };
    let run_with = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_scenario(&config).unwrap())
    };
    let serial = run_with(1);
    let parallel = run_with(4);
    assert_eq!(serial.records, parallel.records);
    assert_eq!(results_csv(&serial), results_csv(&parallel));
}

#[test]
fn flat_synthetic_pattern_reports_symmetric_classes() {
    // Zero spread makes the synthetic gain constant over angle, so the good
    // and bad user see identical channel statistics; the pattern is still
    // classified as angle-dependent and reported per class, which must then
    // agree to numerical precision.
    let flat = PatternSpec::Synthetic {
        peak_db: -2.0,
        envelope_db: vec![(0.0, 0.0), (75.0, 0.0)],
        spread_db: vec![(0.0, 0.0), (75.0, 0.0)],
        kappa: 6.0,
        pattern_seed: 5,
    };
    let config = ScenarioConfig {
        array_cases: vec![ArrayCase { label: "flat".into(), pattern: flat }],
        snr_sweep_db: vec![25.0],
        trials: 2_000,
        ..ScenarioConfig::default()
    };
    let curves = run_scenario(&config).unwrap();
    assert_eq!(curves.records.len(), 4);
    for detector in [Detector::Mrc, Detector::Zf] {
        let class_mean = |class: UserClass| {
            curves
                .records
                .iter()
                .find(|r| r.detector == detector && r.user_class == class)
                .unwrap()
                .mean_rate_bps_hz
        };
        let good = class_mean(UserClass::Good);
        let bad = class_mean(UserClass::Bad);
        assert!(
            (good - bad).abs() <= 1e-9 * good.abs(),
            "{detector}: good {good} vs bad {bad}"
        );
    }
}

#[test]
fn placement_covers_angle_grids_uniformly() {
    let config = ScenarioConfig::default();
    let n = 100_000u64;
    let mut good_theta = vec![0u64; config.good_thetas_deg.len()];
    let mut bad_theta = vec![0u64; config.bad_thetas_deg.len()];
    let mut phi = vec![0u64; config.phis_deg.len()];

    let nearest = |grid: &[f64], value_deg: f64| {
        let mut best = 0usize;
        let mut best_gap = f64::INFINITY;
        for (i, g) in grid.iter().enumerate() {
            let gap = (g - value_deg).abs();
            if gap < best_gap {
                best_gap = gap;
                best = i;
            }
        }
        assert!(best_gap < 1e-9, "draw {value_deg} deg is off-grid");
        best
    };

    for trial in 0..n {
        let (good, bad) = place_users(&config, trial).unwrap();
        good_theta[nearest(&config.good_thetas_deg, good.theta().to_degrees())] += 1;
        bad_theta[nearest(&config.bad_thetas_deg, bad.theta().to_degrees())] += 1;
        phi[nearest(&config.phis_deg, good.phi().to_degrees())] += 1;
        phi[nearest(&config.phis_deg, bad.phi().to_degrees())] += 1;
    }

    // Pearson statistic stays within mean + 5 sqrt(2 df) of its chi-square
    // law for a uniform draw; far beyond any plausible seed fluctuation.
    let chi_square = |counts: &[u64], total: u64| {
        let expected = total as f64 / counts.len() as f64;
        counts.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum::<f64>()
    };
    let limit = |bins: usize| {
        let df = (bins - 1) as f64;
        df + 5.0 * (2.0 * df).sqrt()
    };
    let good_stat = chi_square(&good_theta, n);
    let bad_stat = chi_square(&bad_theta, n);
    let phi_stat = chi_square(&phi, 2 * n);
    assert!(good_stat < limit(good_theta.len()), "good thetas: chi^2 = {good_stat}");
    assert!(bad_stat < limit(bad_theta.len()), "bad thetas: chi^2 = {bad_stat}");
    assert!(phi_stat < limit(phi.len()), "phis: chi^2 = {phi_stat}");
    assert!(good_theta.iter().all(|&c| c > 0));
    assert!(bad_theta.iter().all(|&c| c > 0));
}

#[test]
fn malformed_configs_are_rejected_with_useful_errors() {
    let unknown: Result<ScenarioConfig, _> = serde_json::from_str(r#"{"trails": 10}"#);
    let msg = unknown.unwrap_err().to_string();
    assert!(msg.contains("trails"), "{msg}");

    let overlap = ScenarioConfig {
        good_thetas_deg: vec![0.0, 30.0],
        bad_thetas_deg: vec![30.0, 60.0],
        ..ScenarioConfig::default()
    };
    let msg = overlap.validate().unwrap_err().to_string();
    assert!(msg.contains("30"), "{msg}");

    let zero_trials = ScenarioConfig { trials: 0, ..ScenarioConfig::default() };
    assert!(zero_trials.validate().is_err());
}
