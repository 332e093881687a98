//! Linear detectors and achievable rates.
//!
//! For a channel matrix `D` (one column `d_k` per user), transmit powers
//! `x_k`, and unit-variance receiver noise:
//!
//! * Maximum-ratio combining treats interference as noise; its output SINR
//!   has the closed form
//!   `x_k * ||d_k||^4 / (sum_{i != k} x_i * |d_k^H d_i|^2 + ||d_k||^2)`.
//! * Zero forcing nulls the other users exactly; its SINR is
//!   `x_k / [(D^H D)^{-1}]_{kk}` and requires linearly independent columns.
//!
//! Per-user achievable rate is `log2(1 + SINR)`; the ergodic rate averages
//! it over channel draws. A near-singular Gram matrix is reported as a
//! degenerate channel rather than silently amplified; Monte Carlo loops
//! count such trials and exclude them from the zero-forcing average only.

use nalgebra::{Cholesky, DMatrix};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::{check_powers, ChannelMatrix};
use crate::error::{Error, Result};
use crate::stats::Welford;

/// A Gram matrix whose spectral condition number exceeds this is treated as
/// rank deficient: zero-forcing answers from it would be numerical noise.
pub const GRAM_CONDITION_LIMIT: f64 = 1e12;

/// `D^H D`: user-by-user inner products. Diagonal entries are the squared
/// column norms; off-diagonal magnitudes drive inter-user interference.
pub(crate) fn gram_matrix(d: &ChannelMatrix) -> DMatrix<Complex64> {
    let m = d.as_matrix();
    m.ad_mul(m)
}

fn check_user(users: usize, k: usize) -> Result<()> {
    if k >= users {
        return Err(Error::invalid(format!("user index {k} out of range for {users} users")));
    }
    Ok(())
}

/// Maximum-ratio combining SINR of user `k`, each interferer weighted by
/// its own transmit power. A zero channel column yields SINR zero.
pub fn mrc_sinr(d: &ChannelMatrix, powers: &[f64], k: usize) -> Result<f64> {
    check_powers(powers, d.users())?;
    check_user(d.users(), k)?;
    Ok(mrc_sinr_from_gram(&gram_matrix(d), powers, k, false))
}

/// Variant of [`mrc_sinr`] that weights the whole interference sum by the
/// desired user's power instead of per-interferer powers. The two agree
/// whenever all users transmit at equal power.
pub fn mrc_sinr_desired_power(d: &ChannelMatrix, powers: &[f64], k: usize) -> Result<f64> {
    check_powers(powers, d.users())?;
    check_user(d.users(), k)?;
    Ok(mrc_sinr_from_gram(&gram_matrix(d), powers, k, true))
}

pub(crate) fn mrc_sinr_from_gram(
    gram: &DMatrix<Complex64>,
    powers: &[f64],
    k: usize,
    weight_by_desired: bool,
) -> f64 {
    let n2 = gram[(k, k)].re;
    if n2 <= 0.0 {
        return 0.0;
    }
    let mut interference = 0.0;
    for i in 0..gram.ncols() {
        if i != k {
            let weight = if weight_by_desired { powers[k] } else { powers[i] };
            interference += weight * gram[(k, i)].norm_sqr();
        }
    }
    powers[k] * n2 * n2 / (interference + n2)
}

/// Zero-forcing SINR of user `k`. Errors with a degenerate-channel report
/// when the Gram matrix is singular or conditioned beyond
/// [`GRAM_CONDITION_LIMIT`].
pub fn zf_sinr(d: &ChannelMatrix, powers: &[f64], k: usize) -> Result<f64> {
    check_powers(powers, d.users())?;
    check_user(d.users(), k)?;
    let inv_diag = zf_inverse_diag(&gram_matrix(d))?;
    Ok(powers[k] / inv_diag[k])
}

/// Diagonal of `(D^H D)^{-1}`, the per-user noise amplification of zero
/// forcing, via a Cholesky factorization guarded by an eigenvalue
/// condition check.
pub(crate) fn zf_inverse_diag(gram: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let eigenvalues = gram.symmetric_eigenvalues();
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for v in eigenvalues.iter() {
        min = min.min(*v);
        max = max.max(*v);
    }
    if !(min.is_finite() && min > 0.0) || max / min > GRAM_CONDITION_LIMIT {
        return Err(Error::DegenerateChannel(format!(
            "Gram matrix eigenvalues span [{min:.3e}, {max:.3e}]; channels are not separable"
        )));
    }
    let chol = Cholesky::new(gram.clone()).ok_or_else(|| {
        Error::DegenerateChannel("Gram matrix is not positive definite".into())
    })?;
    let inverse = chol.inverse();
    let mut out = Vec::with_capacity(gram.nrows());
    for k in 0..gram.nrows() {
        let v = inverse[(k, k)].re;
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::DegenerateChannel(format!(
                "inverse Gram diagonal entry {k} is {v}"
            )));
        }
        out.push(v);
    }
    Ok(out)
}

/// Two-user signal-to-interference ratios with noise ignored, as a pair
/// `(SIR of k, SIR of i)`. Orthogonal channels give infinite SIR. Because
/// both ratios share the same cross term, the user with the larger channel
/// norm always has the larger SIR at equal powers.
pub fn pairwise_sir(
    d_k: &[Complex64],
    d_i: &[Complex64],
    power_k: f64,
    power_i: f64,
) -> Result<(f64, f64)> {
    if d_k.len() != d_i.len() || d_k.is_empty() {
        return Err(Error::invalid(format!(
            "channel vectors must share a nonzero length, got {} and {}",
            d_k.len(),
            d_i.len()
        )));
    }
    for (label, power) in [("first", power_k), ("second", power_i)] {
        if !(power.is_finite() && power > 0.0) {
            return Err(Error::invalid(format!(
                "{label} transmit power must be positive and finite, got {power}"
            )));
        }
    }
    let mut cross = Complex64::new(0.0, 0.0);
    let mut n2_k = 0.0;
    let mut n2_i = 0.0;
    for (a, b) in d_k.iter().zip(d_i) {
        cross += a.conj() * b;
        n2_k += a.norm_sqr();
        n2_i += b.norm_sqr();
    }
    if n2_k == 0.0 || n2_i == 0.0 {
        return Err(Error::invalid("channel vectors must be nonzero"));
    }
    let c = cross.norm_sqr();
    if c == 0.0 {
        return Ok((f64::INFINITY, f64::INFINITY));
    }
    Ok((power_k * n2_k * n2_k / (power_i * c), power_i * n2_i * n2_i / (power_k * c)))
}

/// Post-zero-forcing effective channel power of user `k` next to its upper
/// bound, returned as `(exact, bound)` with `exact = 1 / [(D^H D)^{-1}]_{kk}`
/// and `bound = ||d_k||^2`. They meet exactly when column `k` is orthogonal
/// to all others; the shortfall is the power price of nulling.
pub fn zf_power_bound(d: &ChannelMatrix, k: usize) -> Result<(f64, f64)> {
    check_user(d.users(), k)?;
    let gram = gram_matrix(d);
    let inv_diag = zf_inverse_diag(&gram)?;
    Ok((1.0 / inv_diag[k], gram[(k, k)].re))
}

/// Per-user SINRs and rates for one detector.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorRates {
    /// Linear output SINR per user.
    pub sinr: Vec<f64>,
    /// Achievable rate `log2(1 + SINR)` per user, bits/s/Hz.
    pub rate: Vec<f64>,
}

/// Rates of both detectors for one channel realization. `zf` is `None`
/// when the realization is degenerate; maximum-ratio combining has no such
/// failure mode, so its entries are always present.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSample {
    pub mrc: DetectorRates,
    pub zf: Option<DetectorRates>,
}

/// Rates of both linear detectors for one channel realization.
pub fn instantaneous_rates(d: &ChannelMatrix, powers: &[f64]) -> Result<RateSample> {
    check_powers(powers, d.users())?;
    let gram = gram_matrix(d);
    let users = d.users();
    let mut mrc_sinr = Vec::with_capacity(users);
    for k in 0..users {
        mrc_sinr.push(mrc_sinr_from_gram(&gram, powers, k, false));
    }
    let zf = match zf_inverse_diag(&gram) {
        Ok(diag) => {
            let sinr: Vec<f64> = (0..users).map(|k| powers[k] / diag[k]).collect();
            Some(rates_from_sinr(sinr))
        }
        Err(Error::DegenerateChannel(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(RateSample { mrc: rates_from_sinr(mrc_sinr), zf })
}

fn rates_from_sinr(sinr: Vec<f64>) -> DetectorRates {
    let rate = sinr.iter().map(|s| (1.0 + s).log2()).collect();
    DetectorRates { sinr, rate }
}

/// Monte Carlo average of [`instantaneous_rates`] over channel draws.
#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicRates {
    /// Trials requested (and consumed from the sampler).
    pub trials: u64,
    /// Per-user mean rate under maximum-ratio combining, all trials.
    pub mrc_mean: Vec<f64>,
    /// Standard error of the matching mean.
    pub mrc_std_error: Vec<f64>,
    /// Per-user mean rate under zero forcing, degenerate trials excluded;
    /// NaN if every trial was excluded.
    pub zf_mean: Vec<f64>,
    /// Standard error of the matching mean.
    pub zf_std_error: Vec<f64>,
    /// Trials whose realization was degenerate for zero forcing.
    pub zf_excluded: u64,
}

/// Trials per parallel work unit. Fixed so that partial sums are grouped
/// identically for every thread count, which keeps results byte-stable.
pub(crate) const TRIAL_CHUNK: u64 = 4096;

/// Averages both detectors' rates over `trials` channel draws.
///
/// `sample_channel` maps a trial index to that trial's realization and must
/// derive any randomness from the index (see [`crate::substream`]), making
/// the average independent of evaluation order; trials are consumed in
/// fixed chunks in parallel. Degenerate draws are excluded from the
/// zero-forcing average and counted, never silently dropped.
pub fn ergodic_rate<F>(sample_channel: F, powers: &[f64], trials: u64) -> Result<ErgodicRates>
where
    F: Fn(u64) -> Result<ChannelMatrix> + Sync,
{
    if trials == 0 {
        return Err(Error::invalid("ergodic rate needs at least one trial"));
    }
    if powers.is_empty() {
        return Err(Error::invalid("ergodic rate needs at least one user"));
    }
    let users = powers.len();

    struct Chunk {
        mrc: Vec<Welford>,
        zf: Vec<Welford>,
        zf_excluded: u64,
    }

    let chunk_count = trials.div_ceil(TRIAL_CHUNK);
    let chunks: Vec<Chunk> = (0..chunk_count)
        .into_par_iter()
        .map(|ci| {
            let lo = ci * TRIAL_CHUNK;
            let hi = (lo + TRIAL_CHUNK).min(trials);
            let mut acc = Chunk {
                mrc: vec![Welford::default(); users],
                zf: vec![Welford::default(); users],
                zf_excluded: 0,
            };
            for trial in lo..hi {
                let d = sample_channel(trial)?;
                let sample = instantaneous_rates(&d, powers)?;
                for (w, r) in acc.mrc.iter_mut().zip(&sample.mrc.rate) {
                    w.push(*r);
                }
                match &sample.zf {
                    Some(zf) => {
                        for (w, r) in acc.zf.iter_mut().zip(&zf.rate) {
                            w.push(*r);
                        }
                    }
                    None => acc.zf_excluded += 1,
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;

    let mut mrc = vec![Welford::default(); users];
    let mut zf = vec![Welford::default(); users];
    let mut zf_excluded = 0;
    for chunk in chunks {
        for (into, from) in mrc.iter_mut().zip(chunk.mrc) {
            *into = into.merge(from);
        }
        for (into, from) in zf.iter_mut().zip(chunk.zf) {
            *into = into.merge(from);
        }
        zf_excluded += chunk.zf_excluded;
    }

    Ok(ErgodicRates {
        trials,
        mrc_mean: mrc.iter().map(Welford::mean).collect(),
        mrc_std_error: mrc.iter().map(Welford::std_error).collect(),
        zf_mean: zf.iter().map(Welford::mean).collect(),
        zf_std_error: zf.iter().map(Welford::std_error).collect(),
        zf_excluded,
    })
}
