//! File outputs: rate curves, run manifests, and gain-statistics tables.
//!
//! All files are UTF-8 with LF line endings and are built deterministically
//! from their inputs (no timestamps, no environment), so identical runs
//! produce byte-identical outputs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gain::{dynamic_range_profile, max_pairwise_variation, panel_map, GainPattern};
use crate::geometry::{element_positions, ArrayGeometry, Direction};
use crate::scenario::RateCurves;

/// Column order of `results.csv`.
pub const RESULTS_HEADER: &str =
    "snr_db,array,detector,user_class,mean_rate_bps_hz,std_error,excluded_trials";

fn write_file(dir: &Path, name: &str, content: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, content)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", dir.display()))))
}

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'a str,
    seed: u64,
    trials: u64,
    config: &'a crate::scenario::ScenarioConfig,
}

/// Renders `results.csv` content for `curves`.
pub fn results_csv(curves: &RateCurves) -> String {
    let mut out = String::with_capacity(64 * (curves.records.len() + 1));
    out.push_str(RESULTS_HEADER);
    out.push('\n');
    for r in &curves.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.snr_db,
            r.array,
            r.detector,
            r.user_class,
            r.mean_rate_bps_hz,
            r.std_error,
            r.excluded_trials
        );
    }
    out
}

/// Writes `results.csv` and `manifest.json` under `dest`, creating the
/// directory if needed. The manifest echoes the exact config (plus seed,
/// trial count, and library version) so a run can be reproduced from its
/// outputs alone.
pub fn emit_results(curves: &RateCurves, dest: &Path) -> Result<()> {
    create_dir(dest)?;
    write_file(dest, "results.csv", &results_csv(curves))?;
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        seed: curves.config.seed,
        trials: curves.config.trials,
        config: &curves.config,
    };
    let mut json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::invalid(format!("manifest serialization: {e}")))?;
    json.push('\n');
    write_file(dest, "manifest.json", &json)
}

/// Writes three gain-statistics tables under `dest`:
///
/// * `variation.csv` - worst pairwise element gain difference per queried
///   direction (`theta_deg,phi_deg,variation_db`);
/// * `dynamic_range.csv` - per-zenith extremes and linear-power mean over
///   elements and the azimuth grid
///   (`theta_deg,max_db,min_db,mean_db,range_db`);
/// * `panel_maps.csv` - mean-normalized per-element gains at each probe
///   direction, with element grid coordinates for rendering
///   (`theta_deg,phi_deg,element,x_m,y_m,gain_db`).
pub fn gain_stats_report(
    pattern: &GainPattern,
    geom: &ArrayGeometry,
    thetas_deg: &[f64],
    phis_deg: &[f64],
    panel_dirs: &[Direction],
    dest: &Path,
) -> Result<()> {
    if pattern.elements() != geom.elements() {
        return Err(Error::invalid(format!(
            "pattern has {} elements but the geometry has {}",
            pattern.elements(),
            geom.elements()
        )));
    }
    if thetas_deg.is_empty() || phis_deg.is_empty() {
        return Err(Error::invalid("gain statistics need nonempty theta and phi grids"));
    }
    create_dir(dest)?;

    let mut variation = String::from("theta_deg,phi_deg,variation_db\n");
    for &theta in thetas_deg {
        for &phi in phis_deg {
            let v = max_pairwise_variation(pattern, Direction::from_degrees(theta, phi)?)?;
            let _ = writeln!(variation, "{theta},{phi},{v}");
        }
    }
    write_file(dest, "variation.csv", &variation)?;

    let thetas_rad: Vec<f64> = thetas_deg.iter().map(|t| t.to_radians()).collect();
    let phis_rad: Vec<f64> = phis_deg.iter().map(|p| p.to_radians()).collect();
    let profile = dynamic_range_profile(pattern, &thetas_rad, &phis_rad)?;
    let mut range = String::from("theta_deg,max_db,min_db,mean_db,range_db\n");
    for (theta, point) in thetas_deg.iter().zip(&profile) {
        let _ = writeln!(
            range,
            "{theta},{},{},{},{}",
            point.max_db,
            point.min_db,
            point.mean_db,
            point.range_db()
        );
    }
    write_file(dest, "dynamic_range.csv", &range)?;

    let positions = element_positions(geom);
    let mut panels = String::from("theta_deg,phi_deg,element,x_m,y_m,gain_db\n");
    for dir in panel_dirs {
        let map = panel_map(pattern, *dir)?;
        let theta = dir.theta().to_degrees();
        let phi = dir.phi().to_degrees();
        for (m, (gain, (x, y))) in map.iter().zip(&positions).enumerate() {
            let _ = writeln!(panels, "{theta},{phi},{m},{x},{y},{gain}");
        }
    }
    write_file(dest, "panel_maps.csv", &panels)
}
