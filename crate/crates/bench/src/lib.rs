//! Shared fixtures for the benchmark targets: a stock geometry, patterns,
//! and channels sized like the default experiment.

use arraylink_core::channel::los_channel;
use arraylink_core::gain::builtin_patch;
use arraylink_core::{
    ArrayGeometry, ChannelMatrix, Direction, GainPattern, ScenarioConfig, UserSpec,
    SPEED_OF_LIGHT_M_S,
};

/// The default 4x8 panel at 2.6 GHz with 71 mm spacing.
pub fn default_geometry() -> ArrayGeometry {
    ArrayGeometry::new(4, 8, 0.071, SPEED_OF_LIGHT_M_S / 2.6e9).unwrap()
}

/// The stock patch-like pattern sized for `geom`.
pub fn patch_pattern(geom: &ArrayGeometry) -> GainPattern {
    GainPattern::Synthetic(builtin_patch(geom.elements()).unwrap())
}

/// A broadside direction fixture inside every grid used here.
pub fn probe_direction() -> Direction {
    Direction::from_degrees(25.0, 90.0).unwrap()
}

/// Two-user channel matching the experiment's shape: one user well inside
/// the main lobe, one far out.
pub fn two_user_channel(geom: &ArrayGeometry, pattern: &GainPattern) -> ChannelMatrix {
    let users = vec![
        UserSpec::los(1.0, 1.0, Direction::from_degrees(10.0, 90.0).unwrap()).unwrap(),
        UserSpec::los(1.0, 1.0, Direction::from_degrees(-65.0, 91.0).unwrap()).unwrap(),
    ];
    los_channel(geom, pattern, &users).unwrap()
}

/// A deliberately small scenario: default arrays and angle sets, one SNR
/// point, few trials, so one run stays in the millisecond range.
pub fn small_scenario() -> ScenarioConfig {
    ScenarioConfig { snr_sweep_db: vec![25.0], trials: 256, ..ScenarioConfig::default() }
}
