//! Planar array geometry and far-field steering vectors.
//!
//! Elements sit on a rectangular grid with uniform spacing. Grid position
//! `(p, q)` (row index `p`, column index `q`) maps to the flat element index
//! `m = p + q * rows`, i.e. columns are stacked. The steering phase at
//! `(p, q)` for a plane wave from direction `(theta, phi)` is
//! `2 * pi * (spacing / wavelength) * (p * sin(theta) + q * sin(phi))`,
//! so the two angles drive the two grid axes independently.
//!
//! # Example
//! ```
//! use arraylink_core::geometry::{steering_vector, ArrayGeometry, Direction};
//!
//! let geom = ArrayGeometry::new(4, 8, 0.071, 0.115).unwrap();
//! let a = steering_vector(&geom, Direction::from_degrees(30.0, 90.0).unwrap());
//! assert_eq!(a.len(), geom.elements());
//! ```

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Rectangular element grid evaluated at a fixed carrier wavelength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    rows: usize,
    cols: usize,
    spacing_m: f64,
    wavelength_m: f64,
}

impl ArrayGeometry {
    /// Builds a `rows x cols` grid with the given element spacing and
    /// carrier wavelength, both in meters and both strictly positive.
    pub fn new(rows: usize, cols: usize, spacing_m: f64, wavelength_m: f64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!(
                "array needs at least one row and one column, got {rows}x{cols}"
            )));
        }
        if !(spacing_m.is_finite() && spacing_m > 0.0) {
            return Err(Error::invalid(format!(
                "element spacing must be positive and finite, got {spacing_m}"
            )));
        }
        if !(wavelength_m.is_finite() && wavelength_m > 0.0) {
            return Err(Error::invalid(format!(
                "wavelength must be positive and finite, got {wavelength_m}"
            )));
        }
        Ok(Self { rows, cols, spacing_m, wavelength_m })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn spacing_m(&self) -> f64 {
        self.spacing_m
    }

    pub fn wavelength_m(&self) -> f64 {
        self.wavelength_m
    }

    /// Total element count `rows * cols`.
    pub fn elements(&self) -> usize {
        self.rows * self.cols
    }

    /// Spacing in wavelengths (the phase progression per grid step).
    pub fn spacing_wavelengths(&self) -> f64 {
        self.spacing_m / self.wavelength_m
    }
}

/// Arrival direction in radians: `theta` steers the row axis and is limited
/// to the open front hemisphere `(-pi/2, pi/2)`, `phi` steers the column
/// axis and is any finite angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    theta: f64,
    phi: f64,
}

impl Direction {
    pub fn new(theta_rad: f64, phi_rad: f64) -> Result<Self> {
        if !(theta_rad.is_finite() && theta_rad.abs() < FRAC_PI_2) {
            return Err(Error::invalid(format!(
                "theta must lie strictly inside (-pi/2, pi/2), got {theta_rad} rad"
            )));
        }
        if !phi_rad.is_finite() {
            return Err(Error::invalid(format!("phi must be finite, got {phi_rad}")));
        }
        Ok(Self { theta: theta_rad, phi: phi_rad })
    }

    pub fn from_degrees(theta_deg: f64, phi_deg: f64) -> Result<Self> {
        Self::new(theta_deg.to_radians(), phi_deg.to_radians())
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Mirror image through the array normal; steering vectors at mirrored
    /// directions are elementwise conjugates.
    pub fn mirrored(&self) -> Self {
        Self { theta: -self.theta, phi: -self.phi }
    }
}

/// Unit-modulus steering vector for a plane wave from `dir`, in flat element
/// order (`m = p + q * rows`). The squared norm equals the element count.
pub fn steering_vector(geom: &ArrayGeometry, dir: Direction) -> Vec<Complex64> {
    let rate = TAU * geom.spacing_wavelengths();
    let row_step = rate * dir.theta().sin();
    let col_step = rate * dir.phi().sin();
    let mut out = Vec::with_capacity(geom.elements());
    for q in 0..geom.cols {
        for p in 0..geom.rows {
            let phase = (p as f64) * row_step + (q as f64) * col_step;
            out.push(Complex64::from_polar(1.0, phase));
        }
    }
    out
}

/// In-plane element coordinates `(p * spacing, q * spacing)` in meters, in
/// the same flat order as [`steering_vector`].
pub fn element_positions(geom: &ArrayGeometry) -> Vec<(f64, f64)> {
    let s = geom.spacing_m;
    let mut out = Vec::with_capacity(geom.elements());
    for q in 0..geom.cols {
        for p in 0..geom.rows {
            out.push((p as f64 * s, q as f64 * s));
        }
    }
    out
}
