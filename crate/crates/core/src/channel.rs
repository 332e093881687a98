//! Uplink channel synthesis.
//!
//! Each user's channel column combines large-scale gain, per-element
//! embedded gains toward the arrival direction, steering phases, and (for
//! multipath) per-cluster visibility masks and small-scale fading:
//!
//! ```text
//! d_k = sqrt(alpha_k) / C_k * sum_c  G(dir_c) * mask_c * a(dir_c) * v_ck
//! ```
//!
//! where `G` holds the per-element amplitude gains, `a` the steering
//! vector, and `v_ck` the fading coefficient of cluster `c`. Line of sight
//! is the single-cluster, fully visible, `v = 1` special case. Receiver
//! noise is unit-variance complex Gaussian, so transmit powers double as
//! per-user SNRs.

use nalgebra::{DMatrix, DVector, DVectorView};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::gain::{gain_amplitudes, GainPattern};
use crate::geometry::{steering_vector, ArrayGeometry, Direction};
use crate::substream::{purpose, Substreams};

/// Which array elements a cluster illuminates.
#[derive(Debug, Clone, PartialEq)]
pub enum Visibility {
    /// Every element sees the cluster (the common case).
    Full,
    /// Explicit per-element mask; must match the array size when used.
    Mask(Vec<bool>),
}

/// One scattering cluster: an arrival direction plus the subset of elements
/// it illuminates.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSpec {
    direction: Direction,
    visibility: Visibility,
}

impl ClusterSpec {
    pub fn fully_visible(direction: Direction) -> Self {
        Self { direction, visibility: Visibility::Full }
    }

    /// A cluster seen only by the masked-in elements. At least one element
    /// must see it, otherwise the cluster would contribute nothing.
    pub fn masked(direction: Direction, mask: Vec<bool>) -> Result<Self> {
        if !mask.iter().any(|v| *v) {
            return Err(Error::invalid("cluster visibility mask must keep at least one element"));
        }
        Ok(Self { direction, visibility: Visibility::Mask(mask) })
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn visibility(&self) -> &Visibility {
        &self.visibility
    }

    fn covers_all(&self, elements: usize) -> bool {
        match &self.visibility {
            Visibility::Full => true,
            Visibility::Mask(mask) => mask.len() == elements && mask.iter().all(|v| *v),
        }
    }

    fn check_len(&self, elements: usize) -> Result<()> {
        if let Visibility::Mask(mask) = &self.visibility {
            if mask.len() != elements {
                return Err(Error::invalid(format!(
                    "visibility mask has {} entries for a {elements}-element array",
                    mask.len()
                )));
            }
        }
        Ok(())
    }
}

/// One uplink user: large-scale power gain, transmit power, and the
/// clusters its signal arrives through.
#[derive(Debug, Clone, PartialEq)]
pub struct UserSpec {
    alpha: f64,
    tx_power: f64,
    clusters: Vec<ClusterSpec>,
}

impl UserSpec {
    pub fn new(alpha: f64, tx_power: f64, clusters: Vec<ClusterSpec>) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::invalid(format!(
                "large-scale gain must be finite and nonnegative, got {alpha}"
            )));
        }
        if !(tx_power.is_finite() && tx_power >= 0.0) {
            return Err(Error::invalid(format!(
                "transmit power must be finite and nonnegative, got {tx_power}"
            )));
        }
        if clusters.is_empty() {
            return Err(Error::invalid("a user needs at least one cluster"));
        }
        Ok(Self { alpha, tx_power, clusters })
    }

    /// Single fully visible cluster: the line-of-sight special case.
    pub fn los(alpha: f64, tx_power: f64, direction: Direction) -> Result<Self> {
        Self::new(alpha, tx_power, vec![ClusterSpec::fully_visible(direction)])
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tx_power(&self) -> f64 {
        self.tx_power
    }

    pub fn clusters(&self) -> &[ClusterSpec] {
        &self.clusters
    }
}

/// Complex channel matrix, one column per user.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    mat: DMatrix<Complex64>,
}

impl ChannelMatrix {
    pub fn from_matrix(mat: DMatrix<Complex64>) -> Result<Self> {
        if mat.nrows() == 0 || mat.ncols() == 0 {
            return Err(Error::invalid("channel matrix must have at least one row and column"));
        }
        if mat.iter().any(|e| !(e.re.is_finite() && e.im.is_finite())) {
            return Err(Error::invalid("channel matrix entries must be finite"));
        }
        Ok(Self { mat })
    }

    pub fn from_columns(columns: &[DVector<Complex64>]) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::invalid("channel matrix must have at least one column"));
        }
        Self::from_matrix(DMatrix::from_columns(columns))
    }

    /// Antenna count (rows).
    pub fn antennas(&self) -> usize {
        self.mat.nrows()
    }

    /// User count (columns).
    pub fn users(&self) -> usize {
        self.mat.ncols()
    }

    pub fn column(&self, user: usize) -> DVectorView<'_, Complex64> {
        self.mat.column(user)
    }

    /// Column `user` as a contiguous slice (storage is column-major).
    pub fn column_slice(&self, user: usize) -> &[Complex64] {
        let m = self.mat.nrows();
        &self.mat.as_slice()[user * m..(user + 1) * m]
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }
}

/// Small-scale fading source for [`multipath_channel`].
#[derive(Debug, Clone, Copy)]
pub enum SmallScaleFading<'a> {
    /// Unit-variance complex Gaussian coefficients drawn from the
    /// per-(trial, user, cluster) substreams, independent of evaluation
    /// order.
    Random { streams: &'a Substreams, trial: u64 },
    /// Every coefficient forced to one: exposes the deterministic part of
    /// the model, under which a single fully visible cluster reduces
    /// exactly to [`los_channel`].
    Unit,
}

/// Line-of-sight channel: every user must consist of a single fully visible
/// cluster. Column `k` is `sqrt(alpha_k) * G(dir_k) * a(dir_k)`.
pub fn los_channel(
    geom: &ArrayGeometry,
    pattern: &GainPattern,
    users: &[UserSpec],
) -> Result<ChannelMatrix> {
    check_shapes(geom, pattern, users)?;
    let m = geom.elements();
    for (k, user) in users.iter().enumerate() {
        if user.clusters.len() != 1 || !user.clusters[0].covers_all(m) {
            return Err(Error::invalid(format!(
                "user {k} is not line-of-sight: needs exactly one fully visible cluster"
            )));
        }
    }
    let mut mat = DMatrix::zeros(m, users.len());
    for (k, user) in users.iter().enumerate() {
        let dir = user.clusters[0].direction();
        let amps = gain_amplitudes(pattern, dir)?;
        let steer = steering_vector(geom, dir);
        let scale = user.alpha.sqrt();
        for (i, entry) in mat.column_mut(k).iter_mut().enumerate() {
            *entry = steer[i] * (scale * amps[i]);
        }
    }
    ChannelMatrix::from_matrix(mat)
}

/// Multipath channel: each user's column averages its clusters' weighted
/// steering vectors (division by the cluster count keeps the column's mean
/// energy independent of how many clusters carry it), scaled by the user's
/// fading coefficients from `fading`.
pub fn multipath_channel(
    geom: &ArrayGeometry,
    pattern: &GainPattern,
    users: &[UserSpec],
    fading: SmallScaleFading<'_>,
) -> Result<ChannelMatrix> {
    check_shapes(geom, pattern, users)?;
    let m = geom.elements();
    let mut mat = DMatrix::zeros(m, users.len());
    for (k, user) in users.iter().enumerate() {
        for cluster in &user.clusters {
            cluster.check_len(m)?;
        }
        let prefactor = user.alpha.sqrt() / user.clusters.len() as f64;
        let mut column: DVector<Complex64> = DVector::zeros(m);
        for (c, cluster) in user.clusters.iter().enumerate() {
            let v = match fading {
                SmallScaleFading::Random { streams, trial } => {
                    let mut rng =
                        streams.rng([purpose::SMALL_SCALE, trial, k as u64, c as u64]);
                    complex_gaussian(&mut rng)
                }
                SmallScaleFading::Unit => Complex64::new(1.0, 0.0),
            };
            let amps = gain_amplitudes(pattern, cluster.direction())?;
            let steer = steering_vector(geom, cluster.direction());
            for i in 0..m {
                let visible = match &cluster.visibility {
                    Visibility::Full => true,
                    Visibility::Mask(mask) => mask[i],
                };
                if visible {
                    column[i] += steer[i] * amps[i] * v;
                }
            }
        }
        for (i, entry) in mat.column_mut(k).iter_mut().enumerate() {
            *entry = column[i] * prefactor;
        }
    }
    ChannelMatrix::from_matrix(mat)
}

/// Received vector `y = D * X^(1/2) * s + w` with unit-variance complex
/// Gaussian noise `w` drawn from `rng`.
pub fn apply_uplink(
    d: &ChannelMatrix,
    powers: &[f64],
    symbols: &[Complex64],
    rng: &mut impl Rng,
) -> Result<Vec<Complex64>> {
    let mut y = apply_uplink_noiseless(d, powers, symbols)?;
    for entry in &mut y {
        *entry += complex_gaussian(rng);
    }
    Ok(y)
}

/// [`apply_uplink`] with the noise term removed; isolates the signal part
/// for tests and calibration.
pub fn apply_uplink_noiseless(
    d: &ChannelMatrix,
    powers: &[f64],
    symbols: &[Complex64],
) -> Result<Vec<Complex64>> {
    check_powers(powers, d.users())?;
    if symbols.len() != d.users() {
        return Err(Error::invalid(format!(
            "got {} symbols for {} users",
            symbols.len(),
            d.users()
        )));
    }
    if symbols.iter().any(|s| !(s.re.is_finite() && s.im.is_finite())) {
        return Err(Error::invalid("symbols must be finite"));
    }
    let mut y = vec![Complex64::new(0.0, 0.0); d.antennas()];
    for k in 0..d.users() {
        let w = powers[k].sqrt() * symbols[k];
        for (i, e) in d.column_slice(k).iter().enumerate() {
            y[i] += e * w;
        }
    }
    Ok(y)
}

/// One draw of a unit-variance circularly symmetric complex Gaussian.
pub fn complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Bernoulli visibility mask with per-element keep probability
/// `keep_prob`; if no element survives, one uniformly chosen element is
/// kept so the mask stays usable.
pub fn random_visibility(elements: usize, keep_prob: f64, rng: &mut impl Rng) -> Result<Vec<bool>> {
    if elements == 0 {
        return Err(Error::invalid("visibility mask needs at least one element"));
    }
    if !(0.0..=1.0).contains(&keep_prob) {
        return Err(Error::invalid(format!("keep probability must be in [0, 1], got {keep_prob}")));
    }
    let mut mask: Vec<bool> = (0..elements).map(|_| rng.random_bool(keep_prob)).collect();
    if !mask.iter().any(|v| *v) {
        mask[rng.random_range(0..elements)] = true;
    }
    Ok(mask)
}

pub(crate) fn check_powers(powers: &[f64], users: usize) -> Result<()> {
    if powers.len() != users {
        return Err(Error::invalid(format!(
            "got {} transmit powers for {users} users",
            powers.len()
        )));
    }
    if powers.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::invalid("transmit powers must be finite and nonnegative"));
    }
    Ok(())
}

fn check_shapes(geom: &ArrayGeometry, pattern: &GainPattern, users: &[UserSpec]) -> Result<()> {
    if pattern.elements() != geom.elements() {
        return Err(Error::invalid(format!(
            "pattern covers {} elements but the array has {}",
            pattern.elements(),
            geom.elements()
        )));
    }
    if users.is_empty() {
        return Err(Error::invalid("channel needs at least one user"));
    }
    Ok(())
}
