//! Piecewise-linear curves over a scalar abscissa.

use crate::error::{Error, Result};

/// Piecewise-linear interpolant through `(x, y)` knots with strictly
/// increasing `x`. Evaluation clamps to the end values outside the knot
/// span, so a curve defined up to 75 degrees keeps its edge value beyond.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    knots: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::invalid("piecewise-linear curve needs at least one knot"));
        }
        for (i, (x, y)) in knots.iter().enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::invalid(format!("curve knot {i} is not finite: ({x}, {y})")));
            }
            if i > 0 && *x <= knots[i - 1].0 {
                return Err(Error::invalid(format!(
                    "curve knots must have strictly increasing abscissae, knot {i} repeats or reverses"
                )));
            }
        }
        Ok(Self { knots })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = &self.knots;
        if x <= k[0].0 {
            return k[0].1;
        }
        if x >= k[k.len() - 1].0 {
            return k[k.len() - 1].1;
        }
        // partition_point > 0 and < len because x is strictly inside the span.
        let hi = k.partition_point(|(kx, _)| *kx < x);
        let (x0, y0) = k[hi - 1];
        let (x1, y1) = k[hi];
        let t = (x - x0) / (x1 - x0);
        y0 + t * (y1 - y0)
    }

    /// Smallest knot ordinate; handy for validating nonnegative curves.
    pub fn min_value(&self) -> f64 {
        self.knots.iter().map(|(_, y)| *y).fold(f64::INFINITY, f64::min)
    }
}
