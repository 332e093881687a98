//! Free-space link budget arithmetic.
//!
//! Everything here works in decibels on top of the free-space path model
//! `(wavelength / (4 pi distance))^2`; it exists to size the transmit
//! powers fed into the simulator against a physical deployment.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Free-space power ratio between isotropic antennas `distance_m` apart,
/// linear scale.
pub fn free_space_factor(wavelength_m: f64, distance_m: f64) -> Result<f64> {
    for (label, v) in [("wavelength", wavelength_m), ("distance", distance_m)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::invalid(format!(
                "{label} must be positive and finite, got {v} m"
            )));
        }
    }
    let ratio = wavelength_m / (4.0 * PI * distance_m);
    Ok(ratio * ratio)
}

/// One additive term of a budget, in decibels. Losses are negative.
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetRow {
    pub label: String,
    pub value_db: f64,
}

/// A point-to-point budget: transmit power plus antenna gains, free-space
/// path loss, and any further gains or losses, all summed in decibels.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget {
    pub tx_power_dbm: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    pub distance_m: f64,
    pub wavelength_m: f64,
    /// Extra named terms (cable losses, polarization mismatch, margins ...),
    /// each added as-is.
    pub extra_items: Vec<BudgetRow>,
}

impl LinkBudget {
    fn validate(&self) -> Result<()> {
        free_space_factor(self.wavelength_m, self.distance_m)?;
        for (label, v) in [
            ("transmit power", self.tx_power_dbm),
            ("transmit gain", self.tx_gain_dbi),
            ("receive gain", self.rx_gain_dbi),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(format!("{label} must be finite, got {v}")));
            }
        }
        for row in &self.extra_items {
            if !row.value_db.is_finite() {
                return Err(Error::invalid(format!(
                    "budget item '{}' must be finite, got {}",
                    row.label, row.value_db
                )));
            }
        }
        Ok(())
    }

    /// Free-space path loss of this link in decibels (a negative number).
    pub fn path_loss_db(&self) -> Result<f64> {
        Ok(10.0 * free_space_factor(self.wavelength_m, self.distance_m)?.log10())
    }

    /// Received power in dBm: the sum of every row of [`Self::breakdown`].
    pub fn received_power_dbm(&self) -> Result<f64> {
        Ok(self.breakdown()?.iter().map(|r| r.value_db).sum())
    }

    /// The budget as labeled rows: transmit power, both antenna gains, path
    /// loss, then the extra items in their given order. Summing the rows
    /// gives the received power.
    pub fn breakdown(&self) -> Result<Vec<BudgetRow>> {
        self.validate()?;
        let mut rows = vec![
            BudgetRow { label: "transmit power (dBm)".into(), value_db: self.tx_power_dbm },
            BudgetRow { label: "transmit antenna gain (dBi)".into(), value_db: self.tx_gain_dbi },
            BudgetRow { label: "receive antenna gain (dBi)".into(), value_db: self.rx_gain_dbi },
            BudgetRow { label: "free-space path loss (dB)".into(), value_db: self.path_loss_db()? },
        ];
        rows.extend(self.extra_items.iter().cloned());
        Ok(rows)
    }
}
