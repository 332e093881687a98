//! Config-driven rate experiments.
//!
//! The default scenario places two users per trial, one drawn from a set of
//! near-boresight zenith angles (the "good" user) and one from a set of
//! wide angles (the "bad" user), builds the uplink channel for each
//! configured array, and averages both detectors' per-user rates over
//! trials and a transmit-power sweep. Arrays with direction-dependent
//! element gains report the two users separately; arrays with a uniform
//! pattern report a single pooled "reference" class, since there the two
//! users are statistically identical.
//!
//! Everything is driven by one master seed. Placement, fading, and cluster
//! draws are keyed by trial index (see [`crate::substream`]), and trials
//! are accumulated in fixed-size chunks merged in order, so results are
//! byte-identical at any thread count.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use rayon::prelude::*;

use crate::channel::{
    los_channel, multipath_channel, random_visibility, ClusterSpec, SmallScaleFading, UserSpec,
};
use crate::detectors::{gram_matrix, mrc_sinr_from_gram, zf_inverse_diag, TRIAL_CHUNK};
use crate::error::{Error, Result};
use crate::gain::{
    builtin_dipole, builtin_patch, load_pattern_table, synthesize_pattern, GainPattern,
    PiecewiseLinear, SyntheticParams, BUILTIN_KAPPA,
};
use crate::geometry::{ArrayGeometry, Direction};
use crate::stats::Welford;
use crate::substream::{purpose, Substreams};
use crate::SPEED_OF_LIGHT_M_S;

/// Array layout and carrier, as configured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub rows: usize,
    pub cols: usize,
    pub spacing_m: f64,
    pub freq_hz: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self { rows: 4, cols: 8, spacing_m: 0.071, freq_hz: 2.6e9 }
    }
}

impl GeometryConfig {
    pub fn build(&self) -> Result<ArrayGeometry> {
        if !(self.freq_hz.is_finite() && self.freq_hz > 0.0) {
            return Err(Error::invalid(format!(
                "carrier frequency must be positive and finite, got {} Hz",
                self.freq_hz
            )));
        }
        ArrayGeometry::new(self.rows, self.cols, self.spacing_m, SPEED_OF_LIGHT_M_S / self.freq_hz)
    }
}

/// Where an array case gets its per-element gains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum PatternSpec {
    /// Identical isotropic elements.
    Uniform {
        #[serde(default)]
        gain_db: f64,
    },
    /// The stock patch-like synthetic array.
    BuiltinPatch,
    /// The stock dipole-like synthetic array.
    BuiltinDipole,
    /// A custom synthetic family; knot abscissas in degrees of `|theta|`,
    /// `envelope_db` relative to `peak_db`.
    Synthetic {
        peak_db: f64,
        envelope_db: Vec<(f64, f64)>,
        spread_db: Vec<(f64, f64)>,
        #[serde(default = "default_kappa")]
        kappa: f64,
        pattern_seed: u64,
    },
    /// Per-element gains loaded from a CSV table.
    Table { path: PathBuf },
}

fn default_kappa() -> f64 {
    BUILTIN_KAPPA
}

impl PatternSpec {
    /// Uniform patterns make the two user classes statistically identical,
    /// so such cases report one pooled class.
    fn is_uniform(&self) -> bool {
        matches!(self, PatternSpec::Uniform { .. })
    }

    fn build(&self, elements: usize) -> Result<GainPattern> {
        match self {
            PatternSpec::Uniform { gain_db } => GainPattern::uniform(elements, *gain_db),
            PatternSpec::BuiltinPatch => Ok(GainPattern::Synthetic(builtin_patch(elements)?)),
            PatternSpec::BuiltinDipole => Ok(GainPattern::Synthetic(builtin_dipole(elements)?)),
            PatternSpec::Synthetic { peak_db, envelope_db, spread_db, kappa, pattern_seed } => {
                let degree_knots = |knots: &[(f64, f64)]| {
                    PiecewiseLinear::new(
                        knots.iter().map(|(x, y)| (x.to_radians(), *y)).collect(),
                    )
                };
                let params = SyntheticParams {
                    peak_db: *peak_db,
                    envelope: degree_knots(envelope_db)?,
                    spread: degree_knots(spread_db)?,
                    kappa: *kappa,
                };
                Ok(GainPattern::Synthetic(synthesize_pattern(params, *pattern_seed, elements)?))
            }
            PatternSpec::Table { path } => {
                let file = File::open(path).map_err(|e| {
                    Error::Io(std::io::Error::new(
                        e.kind(),
                        format!("{}: {e}", path.display()),
                    ))
                })?;
                let table = load_pattern_table(BufReader::new(file), elements)?;
                Ok(GainPattern::Tabulated(table))
            }
        }
    }
}

/// One array under test: a label for the output files and a gain source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayCase {
    pub label: String,
    pub pattern: PatternSpec,
}

/// How a multipath cluster sum is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterScaling {
    /// Divide by the cluster count: mean column power decays with the
    /// number of clusters.
    Count,
    /// Divide by the square root of the cluster count: mean column power is
    /// independent of the number of clusters.
    Sqrt,
}

/// Channel model for the experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum ChannelModel {
    /// Deterministic line-of-sight channel at the placed directions.
    Los,
    /// Each user scatters over `clusters` directions drawn from its own
    /// angle sets, with complex Gaussian per-cluster fading and optional
    /// random element visibility.
    Multipath {
        clusters: usize,
        /// Probability that a cluster reaches a given element; at least one
        /// element always survives.
        #[serde(default = "default_visibility")]
        visibility_prob: f64,
        #[serde(default = "default_scaling")]
        scaling: ClusterScaling,
    },
}

fn default_visibility() -> f64 {
    1.0
}

fn default_scaling() -> ClusterScaling {
    ClusterScaling::Count
}

/// Full experiment description. Deserializes from JSON with every field
/// optional (defaults below) and unknown keys rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub geometry: GeometryConfig,
    pub array_cases: Vec<ArrayCase>,
    /// Zenith angles the well-placed user is drawn from, degrees.
    pub good_thetas_deg: Vec<f64>,
    /// Zenith angles the poorly placed user is drawn from, degrees.
    pub bad_thetas_deg: Vec<f64>,
    /// Azimuths both users are drawn from, degrees.
    pub phis_deg: Vec<f64>,
    /// Per-user transmit powers over unit noise, decibels.
    pub snr_sweep_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub channel: ChannelModel,
}

fn steps(lo: i32, hi: i32, step: i32) -> impl Iterator<Item = f64> {
    (lo..=hi).step_by(step as usize).map(f64::from)
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            geometry: GeometryConfig::default(),
            array_cases: vec![
                ArrayCase {
                    label: "reference".into(),
                    pattern: PatternSpec::Uniform { gain_db: 0.0 },
                },
                ArrayCase { label: "patch".into(), pattern: PatternSpec::BuiltinPatch },
                ArrayCase { label: "dipole".into(), pattern: PatternSpec::BuiltinDipole },
            ],
            good_thetas_deg: steps(-35, 35, 5).collect(),
            bad_thetas_deg: steps(-75, -40, 5).chain(steps(40, 75, 5)).collect(),
            phis_deg: steps(88, 92, 1).collect(),
            snr_sweep_db: steps(0, 40, 5).collect(),
            trials: 10_000,
            seed: 1,
            channel: ChannelModel::Los,
        }
    }
}

/// Which linear detector produced a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Detector {
    Mrc,
    Zf,
}

impl Detector {
    pub fn as_str(&self) -> &'static str {
        match self {
            Detector::Mrc => "MRC",
            Detector::Zf => "ZF",
        }
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which placement population a record averages over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UserClass {
    /// The near-boresight user of gain-varying arrays.
    Good,
    /// The wide-angle user of gain-varying arrays.
    Bad,
    /// Uniform-pattern arrays: per-trial mean of both users' rates.
    Reference,
}

impl UserClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            UserClass::Good => "good",
            UserClass::Bad => "bad",
            UserClass::Reference => "reference",
        }
    }
}

impl fmt::Display for UserClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One cell of the result grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRecord {
    pub snr_db: f64,
    pub array: String,
    pub detector: Detector,
    pub user_class: UserClass,
    /// Mean achievable rate in bits/s/Hz; NaN if every trial was excluded.
    pub mean_rate_bps_hz: f64,
    pub std_error: f64,
    /// Trials this record's detector had to skip (degenerate realizations);
    /// always zero for maximum-ratio combining.
    pub excluded_trials: u64,
}

/// Everything a run produced: the records plus the exact config that made
/// them, for reproducibility manifests.
#[derive(Debug, Clone, PartialEq)]
pub struct RateCurves {
    pub config: ScenarioConfig,
    pub records: Vec<RateRecord>,
}

/// Config after validation: angles in radians, patterns realized, powers
/// linear.
struct Prepared {
    geom: ArrayGeometry,
    arrays: Vec<PreparedArray>,
    good_thetas: Vec<f64>,
    bad_thetas: Vec<f64>,
    phis: Vec<f64>,
    /// `(snr_db, linear per-user power)` pairs, in sweep order.
    powers: Vec<(f64, f64)>,
}

struct PreparedArray {
    label: String,
    pattern: GainPattern,
    pooled: bool,
}

fn checked_thetas(label: &str, degs: &[f64]) -> Result<Vec<f64>> {
    if degs.is_empty() {
        return Err(Error::invalid(format!("{label} must not be empty")));
    }
    for &d in degs {
        if !(d.is_finite() && d.abs() < 90.0) {
            return Err(Error::invalid(format!(
                "{label} entries must satisfy |angle| < 90 degrees, got {d}"
            )));
        }
    }
    Ok(degs.iter().map(|d| d.to_radians()).collect())
}

fn checked_phis(degs: &[f64]) -> Result<Vec<f64>> {
    if degs.is_empty() {
        return Err(Error::invalid("phis_deg must not be empty"));
    }
    for &d in degs {
        if !d.is_finite() {
            return Err(Error::invalid(format!("phis_deg entries must be finite, got {d}")));
        }
    }
    Ok(degs.iter().map(|d| d.to_radians()).collect())
}

impl ScenarioConfig {
    fn prepare(&self) -> Result<Prepared> {
        let geom = self.geometry.build()?;
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.array_cases.is_empty() {
            return Err(Error::invalid("at least one array case is required"));
        }
        let mut labels = HashSet::new();
        for case in &self.array_cases {
            if case.label.is_empty()
                || !case.label.chars().all(|c| c.is_ascii_alphanumeric() || "_-.".contains(c))
            {
                return Err(Error::invalid(format!(
                    "array label '{}' must be nonempty and use only letters, digits, '_', '-', '.'",
                    case.label
                )));
            }
            if !labels.insert(case.label.as_str()) {
                return Err(Error::invalid(format!("duplicate array label '{}'", case.label)));
            }
        }

        let good_thetas = checked_thetas("good_thetas_deg", &self.good_thetas_deg)?;
        let bad_thetas = checked_thetas("bad_thetas_deg", &self.bad_thetas_deg)?;
        let phis = checked_phis(&self.phis_deg)?;
        for g in &self.good_thetas_deg {
            if self.bad_thetas_deg.iter().any(|b| b == g) {
                return Err(Error::invalid(format!(
                    "good and bad theta sets must be disjoint; both contain {g} degrees"
                )));
            }
        }

        if self.snr_sweep_db.is_empty() {
            return Err(Error::invalid("snr_sweep_db must not be empty"));
        }
        let mut powers = Vec::with_capacity(self.snr_sweep_db.len());
        for &db in &self.snr_sweep_db {
            if !db.is_finite() {
                return Err(Error::invalid(format!("snr_sweep_db entries must be finite, got {db}")));
            }
            powers.push((db, 10f64.powf(db / 10.0)));
        }

        if let ChannelModel::Multipath { clusters, visibility_prob, .. } = self.channel {
            if clusters == 0 {
                return Err(Error::invalid("multipath needs at least one cluster"));
            }
            if !(visibility_prob > 0.0 && visibility_prob <= 1.0) {
                return Err(Error::invalid(format!(
                    "visibility_prob must be in (0, 1], got {visibility_prob}"
                )));
            }
        }

        let elements = geom.elements();
        let mut arrays = Vec::with_capacity(self.array_cases.len());
        for case in &self.array_cases {
            let pattern = case.pattern.build(elements)?;
            // Tabulated patterns refuse extrapolation, so make sure every
            // direction this run can ever query is inside the table now
            // rather than thousands of trials in.
            if let GainPattern::Tabulated(table) = &pattern {
                for &theta in good_thetas.iter().chain(&bad_thetas) {
                    for &phi in &phis {
                        let dir = Direction::new(theta, phi)?;
                        if !table.covers(dir) {
                            return Err(Error::OutsideGrid(format!(
                                "array '{}': table does not cover theta {:.3} deg, phi {:.3} deg",
                                case.label,
                                theta.to_degrees(),
                                phi.to_degrees()
                            )));
                        }
                    }
                }
            }
            arrays.push(PreparedArray {
                label: case.label.clone(),
                pattern,
                pooled: case.pattern.is_uniform(),
            });
        }

        Ok(Prepared { geom, arrays, good_thetas, bad_thetas, phis, powers })
    }

    /// Validates without running; the error is the one `run_scenario` would
    /// return.
    pub fn validate(&self) -> Result<()> {
        self.prepare().map(|_| ())
    }
}

fn pick<'a>(rng: &mut impl rand::Rng, values: &'a [f64]) -> &'a f64 {
    &values[rng.random_range(0..values.len())]
}

fn place_from(
    streams: &Substreams,
    trial: u64,
    good_thetas: &[f64],
    bad_thetas: &[f64],
    phis: &[f64],
) -> Result<(Direction, Direction)> {
    let mut rng = streams.rng([purpose::PLACEMENT, trial, 0, 0]);
    let good = Direction::new(*pick(&mut rng, good_thetas), *pick(&mut rng, phis))?;
    let bad = Direction::new(*pick(&mut rng, bad_thetas), *pick(&mut rng, phis))?;
    Ok((good, bad))
}

/// The directions trial `trial` of a run with this config places its good
/// and bad user at. Pure: same config and trial, same placement.
pub fn place_users(config: &ScenarioConfig, trial: u64) -> Result<(Direction, Direction)> {
    let good = checked_thetas("good_thetas_deg", &config.good_thetas_deg)?;
    let bad = checked_thetas("bad_thetas_deg", &config.bad_thetas_deg)?;
    let phis = checked_phis(&config.phis_deg)?;
    place_from(&Substreams::new(config.seed), trial, &good, &bad, &phis)
}

/// Channel sampler for one trial: shared by every array so that array
/// cases are compared on identical placements and fading.
fn trial_users(
    prep: &Prepared,
    config: &ScenarioConfig,
    streams: &Substreams,
    trial: u64,
) -> Result<Vec<UserSpec>> {
    let (good, bad) = place_from(streams, trial, &prep.good_thetas, &prep.bad_thetas, &prep.phis)?;
    match config.channel {
        ChannelModel::Los => Ok(vec![UserSpec::los(1.0, 1.0, good)?, UserSpec::los(1.0, 1.0, bad)?]),
        ChannelModel::Multipath { clusters, visibility_prob, scaling } => {
            let m = prep.geom.elements();
            let mut users = Vec::with_capacity(2);
            for (k, thetas) in [&prep.good_thetas, &prep.bad_thetas].into_iter().enumerate() {
                let mut specs = Vec::with_capacity(clusters);
                for c in 0..clusters {
                    let mut dir_rng =
                        streams.rng([purpose::CLUSTER_DIRECTION, trial, k as u64, c as u64]);
                    let dir =
                        Direction::new(*pick(&mut dir_rng, thetas), *pick(&mut dir_rng, &prep.phis))?;
                    let spec = if visibility_prob < 1.0 {
                        let mut vis_rng =
                            streams.rng([purpose::VISIBILITY, trial, k as u64, c as u64]);
                        ClusterSpec::masked(dir, random_visibility(m, visibility_prob, &mut vis_rng)?)?
                    } else {
                        ClusterSpec::fully_visible(dir)
                    };
                    specs.push(spec);
                }
                // The channel builder divides cluster sums by the cluster
                // count; square-root scaling is that same sum with the
                // large-scale coefficient inflated by the count.
                let alpha = match scaling {
                    ClusterScaling::Count => 1.0,
                    ClusterScaling::Sqrt => clusters as f64,
                };
                users.push(UserSpec::new(alpha, 1.0, specs)?);
            }
            Ok(users)
        }
    }
}

/// Rate accumulators of one array case inside one chunk of trials:
/// `[snr][class slot]` per detector.
#[derive(Clone)]
struct ArrayAcc {
    mrc: Vec<Vec<Welford>>,
    zf: Vec<Vec<Welford>>,
    zf_excluded: u64,
}

impl ArrayAcc {
    fn new(snrs: usize, slots: usize) -> Self {
        Self {
            mrc: vec![vec![Welford::default(); slots]; snrs],
            zf: vec![vec![Welford::default(); slots]; snrs],
            zf_excluded: 0,
        }
    }

    fn merge(&mut self, other: &ArrayAcc) {
        for (a, b) in self.mrc.iter_mut().zip(&other.mrc).chain(self.zf.iter_mut().zip(&other.zf)) {
            for (x, y) in a.iter_mut().zip(b) {
                *x = x.merge(*y);
            }
        }
        self.zf_excluded += other.zf_excluded;
    }
}

fn class_slots(pooled: bool) -> &'static [UserClass] {
    if pooled {
        &[UserClass::Reference]
    } else {
        &[UserClass::Good, UserClass::Bad]
    }
}

/// Folds one user pair's rates into the class slots: separate good/bad
/// samples, or their mean for pooled (uniform) arrays.
fn push_rates(acc: &mut [Welford], pooled: bool, rates: [f64; 2]) {
    if pooled {
        acc[0].push((rates[0] + rates[1]) / 2.0);
    } else {
        acc[0].push(rates[0]);
        acc[1].push(rates[1]);
    }
}

/// Runs the experiment described by `config`.
///
/// Record order: transmit-power sweep (outer), then array cases in config
/// order, then detector (MRC before ZF), then user class (good, bad / the
/// pooled reference class). Identical config gives byte-identical records
/// at any thread count.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RateCurves> {
    let prep = config.prepare()?;
    let streams = Substreams::new(config.seed);
    let snrs = prep.powers.len();

    let chunk_count = config.trials.div_ceil(TRIAL_CHUNK);
    let fresh = || -> Vec<ArrayAcc> {
        prep.arrays.iter().map(|a| ArrayAcc::new(snrs, class_slots(a.pooled).len())).collect()
    };

    let chunks: Vec<Vec<ArrayAcc>> = (0..chunk_count)
        .into_par_iter()
        .map(|ci| {
            let lo = ci * TRIAL_CHUNK;
            let hi = (lo + TRIAL_CHUNK).min(config.trials);
            let mut accs = fresh();
            for trial in lo..hi {
                let users = trial_users(&prep, config, &streams, trial)?;
                for (array, acc) in prep.arrays.iter().zip(&mut accs) {
                    let d = match config.channel {
                        ChannelModel::Los => los_channel(&prep.geom, &array.pattern, &users)?,
                        ChannelModel::Multipath { .. } => multipath_channel(
                            &prep.geom,
                            &array.pattern,
                            &users,
                            SmallScaleFading::Random { streams: &streams, trial },
                        )?,
                    };
                    let gram = gram_matrix(&d);
                    // One factorization per (trial, array); the power sweep
                    // reuses it, so equal placements are compared at every
                    // power and the sweep is monotone trial by trial.
                    let zf_diag = match zf_inverse_diag(&gram) {
                        Ok(diag) => Some(diag),
                        Err(Error::DegenerateChannel(_)) => {
                            acc.zf_excluded += 1;
                            None
                        }
                        Err(e) => return Err(e),
                    };
                    for (si, &(_, x)) in prep.powers.iter().enumerate() {
                        let powers = [x, x];
                        let mrc = [
                            rate(mrc_sinr_from_gram(&gram, &powers, 0, false)),
                            rate(mrc_sinr_from_gram(&gram, &powers, 1, false)),
                        ];
                        push_rates(&mut acc.mrc[si], array.pooled, mrc);
                        if let Some(diag) = &zf_diag {
                            let zf = [rate(x / diag[0]), rate(x / diag[1])];
                            push_rates(&mut acc.zf[si], array.pooled, zf);
                        }
                    }
                }
            }
            Ok(accs)
        })
        .collect::<Result<_>>()?;

    let mut totals = fresh();
    for chunk in &chunks {
        for (into, from) in totals.iter_mut().zip(chunk) {
            into.merge(from);
        }
    }

    let mut records = Vec::with_capacity(snrs * totals.len() * 2 * 2);
    for (si, &(snr_db, _)) in prep.powers.iter().enumerate() {
        for (array, acc) in prep.arrays.iter().zip(&totals) {
            for detector in [Detector::Mrc, Detector::Zf] {
                let (cells, excluded) = match detector {
                    Detector::Mrc => (&acc.mrc[si], 0),
                    Detector::Zf => (&acc.zf[si], acc.zf_excluded),
                };
                for (slot, class) in class_slots(array.pooled).iter().enumerate() {
                    debug_assert_eq!(cells[slot].count() + excluded, config.trials);
                    records.push(RateRecord {
                        snr_db,
                        array: array.label.clone(),
                        detector,
                        user_class: *class,
                        mean_rate_bps_hz: cells[slot].mean(),
                        std_error: cells[slot].std_error(),
                        excluded_trials: excluded,
                    });
                }
            }
        }
    }

    Ok(RateCurves { config: config.clone(), records })
}

fn rate(sinr: f64) -> f64 {
    (1.0 + sinr).log2()
}
