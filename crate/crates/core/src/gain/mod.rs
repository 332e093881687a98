//! Per-element embedded gain patterns and their summary statistics.
//!
//! A pattern assigns every array element a direction-dependent realized
//! gain in dB. Three families are supported: [`UniformPattern`] (all
//! elements identical, the idealized baseline), [`TabulatedPattern`]
//! (interpolated measurement grids), and [`SyntheticPattern`] (calibrated
//! fabricated ripple). The statistics here quantify how unequal the
//! elements are: pairwise variation at a direction, dynamic range across a
//! zenith sweep, and per-element panel maps around the array mean.
//!
//! Linear power gains are `10^(dB/10)`; channel columns take amplitude
//! weights `10^(dB/20)`.

mod curve;
mod synthetic;
mod table;

pub use curve::PiecewiseLinear;
pub use synthetic::{
    builtin_dipole, builtin_patch, dipole_params, patch_params, synthesize_pattern,
    SyntheticParams, SyntheticPattern, BUILTIN_KAPPA, DIPOLE_PATTERN_SEED, PATCH_PATTERN_SEED,
};
pub use table::{load_pattern_table, TabulatedPattern};

use crate::error::{Error, Result};
use crate::geometry::Direction;

/// Every element radiates the same `gain_db` in every direction.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformPattern {
    elements: usize,
    gain_db: f64,
}

impl UniformPattern {
    pub fn new(elements: usize, gain_db: f64) -> Result<Self> {
        if elements == 0 {
            return Err(Error::invalid("uniform pattern needs at least one element"));
        }
        if !gain_db.is_finite() {
            return Err(Error::invalid(format!("uniform gain must be finite, got {gain_db}")));
        }
        Ok(Self { elements, gain_db })
    }

    pub fn gain_db(&self) -> f64 {
        self.gain_db
    }
}

/// Any supported gain pattern, queried uniformly by element and direction.
#[derive(Debug, Clone, PartialEq)]
pub enum GainPattern {
    Uniform(UniformPattern),
    Tabulated(TabulatedPattern),
    Synthetic(SyntheticPattern),
}

impl GainPattern {
    /// Idealized baseline: `elements` identical isotropic radiators.
    pub fn uniform(elements: usize, gain_db: f64) -> Result<Self> {
        Ok(GainPattern::Uniform(UniformPattern::new(elements, gain_db)?))
    }

    pub fn elements(&self) -> usize {
        match self {
            GainPattern::Uniform(p) => p.elements,
            GainPattern::Tabulated(p) => p.elements(),
            GainPattern::Synthetic(p) => p.elements(),
        }
    }

    /// Realized gain of one element toward `dir`, in dB.
    pub fn gain_db(&self, element: usize, dir: Direction) -> Result<f64> {
        if element >= self.elements() {
            return Err(Error::invalid(format!(
                "element {element} out of range for a {}-element pattern",
                self.elements()
            )));
        }
        match self {
            GainPattern::Uniform(p) => Ok(p.gain_db),
            GainPattern::Tabulated(p) => p.interpolate(element, dir),
            GainPattern::Synthetic(p) => Ok(p.gain_db_unchecked(element, dir)),
        }
    }

    /// Realized gains of all elements toward `dir`, in dB, element order.
    pub fn gains_db(&self, dir: Direction) -> Result<Vec<f64>> {
        (0..self.elements()).map(|m| self.gain_db(m, dir)).collect()
    }
}

/// Amplitude weights `10^(dB/20)` for all elements toward `dir`; these are
/// the square roots of the linear power gains and scale channel entries.
pub fn gain_amplitudes(pattern: &GainPattern, dir: Direction) -> Result<Vec<f64>> {
    Ok(pattern.gains_db(dir)?.iter().map(|db| db_to_amplitude(*db)).collect())
}

/// Largest gain difference between any two elements toward `dir`, in dB.
/// Zero for a single element and for any uniform pattern.
pub fn max_pairwise_variation(pattern: &GainPattern, dir: Direction) -> Result<f64> {
    let gains = pattern.gains_db(dir)?;
    let max = gains.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = gains.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(max - min)
}

/// One zenith sample of [`dynamic_range_profile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicRangePoint {
    /// Zenith angle the row describes, radians.
    pub theta_rad: f64,
    /// Best element gain over all elements and probed azimuths, dB.
    pub max_db: f64,
    /// Worst element gain over the same set, dB.
    pub min_db: f64,
    /// Mean taken in linear power over the same set, converted back to dB.
    pub mean_db: f64,
}

impl DynamicRangePoint {
    /// Spread between the best and worst element, dB.
    pub fn range_db(&self) -> f64 {
        self.max_db - self.min_db
    }
}

/// Sweeps zenith angles and reports, per angle, the extreme and mean element
/// gains taken jointly over all elements and all probed azimuths.
pub fn dynamic_range_profile(
    pattern: &GainPattern,
    thetas_rad: &[f64],
    phis_rad: &[f64],
) -> Result<Vec<DynamicRangePoint>> {
    if thetas_rad.is_empty() || phis_rad.is_empty() {
        return Err(Error::invalid("dynamic range profile needs nonempty angle grids"));
    }
    let mut out = Vec::with_capacity(thetas_rad.len());
    for &theta in thetas_rad {
        let mut max_db = f64::NEG_INFINITY;
        let mut min_db = f64::INFINITY;
        let mut linear_sum = 0.0;
        let mut count = 0usize;
        for &phi in phis_rad {
            let gains = pattern.gains_db(Direction::new(theta, phi)?)?;
            for g in gains {
                max_db = max_db.max(g);
                min_db = min_db.min(g);
                linear_sum += db_to_linear(g);
                count += 1;
            }
        }
        out.push(DynamicRangePoint {
            theta_rad: theta,
            max_db,
            min_db,
            mean_db: 10.0 * (linear_sum / count as f64).log10(),
        });
    }
    Ok(out)
}

/// Per-element gain toward `dir` relative to the array's linear-mean gain,
/// in dB and element order. The normalization makes the linear values of
/// the outputs sum to the element count, so panels of different absolute
/// efficiency compare on one color scale.
pub fn panel_map(pattern: &GainPattern, dir: Direction) -> Result<Vec<f64>> {
    let gains = pattern.gains_db(dir)?;
    let mean_linear = gains.iter().map(|g| db_to_linear(*g)).sum::<f64>() / gains.len() as f64;
    let mean_db = 10.0 * mean_linear.log10();
    Ok(gains.iter().map(|g| g - mean_db).collect())
}

/// `10^(dB/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `10^(dB/20)`.
pub fn db_to_amplitude(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}
