//! An unbounded kernel whose centered U-statistic is asymptotically normal
//! but does not converge in probability.
//!
//! With weights `a_1 = 1`, `a_k = k^{3/2} - (k-1)^{3/2}`, the kernel along a
//! doubling-map orbit reduces almost surely to `h(X_i, X_j) = a_{j-i} b_{j+1}`
//! where `b_m` is the m-th binary digit of the origin. The centered
//! statistic is therefore
//!
//! ```text
//! Y_n = C(n,2)^{-1} Σ_{j=2}^{n} (j-1)^{3/2} (b_{j+1} - 1/2),
//! ```
//!
//! a weighted sum of the martingale differences `b_{j+1} - 1/2`. Its terms
//! satisfy `Σ_j d_{n,j}^2 = 1/4` identically, so `Y_n → N(0, 1/4)`, while
//! `Y_{2n} - Y_n` keeps a variance bounded away from zero.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::dyadic::{BitStream, Digits};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::stats::{ks_distance, mean_variance, normal_cdf, split_seed, CompensatedSum};
use crate::ustat::pairs;

/// Replicates used for the KS distance; larger runs use their first
/// `KS_SUBSAMPLE` values.
pub const KS_SUBSAMPLE: usize = 5000;

/// Added to the asymptotic 1.36/√M KS critical value to absorb the
/// finite-n departure from normality.
pub const KS_FINITE_N_SLACK: f64 = 0.0058;

/// `a_k`, computed as `(3k² - 3k + 1) / (k^{3/2} + (k-1)^{3/2})` to avoid
/// cancellation.
pub fn weight(k: u64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("weights are defined for k >= 1".into()));
    }
    Ok(weight_unchecked(k))
}

#[inline]
fn weight_unchecked(k: u64) -> f64 {
    if k == 1 {
        return 1.0;
    }
    let kf = k as f64;
    let km = kf - 1.0;
    (3.0 * kf * kf - 3.0 * kf + 1.0) / (kf * kf.sqrt() + km * km.sqrt())
}

/// `(j-1)^{3/2}`, the row weight of `b_{j+1}`.
#[inline]
fn row_weight(j: usize) -> f64 {
    let m = (j - 1) as f64;
    m * m.sqrt()
}

/// The kernel as seen along a doubling-map path, with its lag mean
/// `μ(k) = a_k / 2`. Needs the path's origin digits.
pub fn kernel() -> Kernel {
    Kernel::lag_only("weighted-shift-indicator", |path, i, j| {
        if i == j {
            return 0.0;
        }
        match &path.origin {
            Some(origin) if (j as u64 + 1) <= origin.len() => {
                weight_unchecked((j - i) as u64) * f64::from(origin.bit(j as u64 + 1))
            }
            _ => f64::NAN,
        }
    })
    .with_lag_mean(|k| weight_unchecked(k) / 2.0)
}

/// `Y_n` straight from the digits, in `O(n)`.
pub fn y_n<D: Digits>(point: &D, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Precondition(format!("need n >= 2, got {n}")));
    }
    let mut acc = CompensatedSum::new();
    for j in 2..=n {
        let b = point.digit(j as u64 + 1)?;
        acc.add(row_weight(j) * (f64::from(b) - 0.5));
    }
    Ok(acc.value() / pairs(n))
}

/// `(Y_n, Y_{2n})` from one pass over the digits.
fn y_pair<D: Digits>(point: &D, n: usize) -> Result<(f64, f64)> {
    let mut acc = CompensatedSum::new();
    let mut at_n = 0.0;
    for j in 2..=2 * n {
        let b = point.digit(j as u64 + 1)?;
        acc.add(row_weight(j) * (f64::from(b) - 0.5));
        if j == n {
            at_n = acc.value();
        }
    }
    Ok((at_n / pairs(n), acc.value() / pairs(2 * n)))
}

fn windows_equal<D: Digits>(point: &D, a: u64, b: u64, len: u32) -> Result<bool> {
    let mut done = 0u32;
    while done < len {
        let take = (len - done).min(64);
        let off = u64::from(done);
        if point.window(a + off, take)? != point.window(b + off, take)? {
            return Ok(false);
        }
        done += take;
    }
    Ok(true)
}

/// Digits compared when testing `T^k X_i = X_j`.
pub const ORACLE_GUARD_DIGITS: u32 = 128;

/// `Y_n` by the quadratic pair sum, evaluating each `h(X_i, X_j)` from the
/// definition `h(x, y) = Σ_k a_k (1_{G_k}(x, y) + 1_{G_k}(y, x))` with
/// `G_k = {(x, T^k x) : T^k x ∈ [1/2, 1)}`, then centering by
/// `E h(X_i, X_j) = a_{j-i}/2`. Candidate lags are `1..=n`.
pub fn pair_sum_oracle<D: Digits>(point: &D, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Precondition(format!("need n >= 2, got {n}")));
    }
    // (x, y) ∈ G_k with x = X_a = T^a x0, y = X_b
    let in_g = |a: u64, b: u64, k: u64| -> Result<bool> {
        Ok(point.digit(a + k + 1)? == 1 && windows_equal(point, a + k, b, ORACLE_GUARD_DIGITS)?)
    };
    let mut total = CompensatedSum::new();
    for j in 2..=n {
        for i in 1..j {
            let (iu, ju) = (i as u64, j as u64);
            let mut h = 0.0;
            for k in 1..=n as u64 {
                if in_g(iu, ju, k)? {
                    h += weight_unchecked(k);
                }
                if in_g(ju, iu, k)? {
                    h += weight_unchecked(k);
                }
            }
            total.add(h - weight_unchecked(ju - iu) / 2.0);
        }
    }
    Ok(total.value() / pairs(n))
}

/// The martingale-difference row `d_{n,1..n}` at a point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MartingaleRow {
    pub n: usize,
    pub d: Vec<f64>,
}

pub fn martingale_row<D: Digits>(point: &D, n: usize) -> Result<MartingaleRow> {
    if n < 2 {
        return Err(Error::Precondition(format!("need n >= 2, got {n}")));
    }
    let c = pairs(n);
    let mut d = vec![0.0];
    for j in 2..=n {
        let b = point.digit(j as u64 + 1)?;
        d.push(row_weight(j) * (f64::from(b) - 0.5) / c);
    }
    Ok(MartingaleRow { n, d })
}

/// Deterministic quantities behind the martingale CLT conditions.
#[derive(Clone, Debug, PartialEq)]
pub struct McLeish {
    pub n: usize,
    /// `max_j |d_{n,j}| = sqrt(radicand) / denominator`.
    pub max_abs_radicand: BigUint,
    pub max_abs_denominator: BigUint,
    pub max_abs: f64,
    /// `Σ_j d_{n,j}^2`, exact and point-independent.
    pub sum_squares: BigRational,
}

/// `max_j |d_{n,j}|` in surd form and `Σ_j d_{n,j}^2` in exact arithmetic.
///
/// Each squared term is `(j-1)^3 / (4 C(n,2)^2)` whatever the digits are,
/// so the sum of squares is summed term by term over a common denominator.
pub fn mcleish_diagnostics(n: usize) -> Result<McLeish> {
    if n < 2 {
        return Err(Error::Precondition(format!("need n >= 2, got {n}")));
    }
    let nn = BigUint::from(n as u64);
    let c: BigUint = (&nn * (&nn - 1u32)) >> 1u32;
    let mut numer = BigUint::zero();
    for j in 2..=n as u64 {
        let m = BigUint::from(j - 1);
        numer += &m * &m * &m;
    }
    let denom = &c * &c * 4u32;
    let sum_squares = BigRational::new(numer.into(), denom.into());
    let m = BigUint::from(n as u64 - 1);
    let radicand = &m * &m * &m;
    let max_den = &c * 2u32;
    let max_abs = radicand.to_f64().unwrap_or(f64::NAN).sqrt() / max_den.to_f64().unwrap_or(f64::NAN);
    Ok(McLeish {
        n,
        max_abs_radicand: radicand,
        max_abs_denominator: max_den,
        max_abs,
        sum_squares,
    })
}

/// Histogram over `[lo, hi)` with equal-width bins plus tail counts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub below: u64,
    pub above: u64,
}

impl Histogram {
    pub fn build(values: &[f64], lo: f64, hi: f64, bins: usize) -> Self {
        let mut counts = vec![0u64; bins];
        let (mut below, mut above) = (0, 0);
        let width = (hi - lo) / bins as f64;
        for &v in values {
            if v < lo {
                below += 1;
            } else if v >= hi {
                above += 1;
            } else {
                counts[(((v - lo) / width) as usize).min(bins - 1)] += 1;
            }
        }
        Self { lo, hi, counts, below, above }
    }
}

/// Thresholds a Monte-Carlo run of `Y_n` is held to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Thresholds {
    /// `3 · (1/2) / √M`.
    pub mean_abs: f64,
    /// `3 · (1/4) · √(2/(M-1))` around 1/4.
    pub variance_halfwidth: f64,
    /// `1.36/√M_ks + KS_FINITE_N_SLACK`.
    pub ks: f64,
}

impl Thresholds {
    pub fn for_reps(reps: usize) -> Self {
        let m = reps as f64;
        let m_ks = reps.min(KS_SUBSAMPLE) as f64;
        Self {
            mean_abs: 3.0 * 0.5 / m.sqrt(),
            variance_halfwidth: 3.0 * 0.25 * (2.0 / (m - 1.0)).sqrt(),
            ks: 1.36 / m_ks.sqrt() + KS_FINITE_N_SLACK,
        }
    }
}

/// Monte-Carlo picture of `Y_n` over independent points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistributionSummary {
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub mean: f64,
    pub variance: f64,
    /// KS distance to `N(0, 1/4)` over the first `ks_sample` values.
    pub ks: f64,
    pub ks_sample: usize,
    pub thresholds: Thresholds,
    pub mean_ok: bool,
    pub variance_ok: bool,
    pub ks_ok: bool,
    pub histogram: Histogram,
    #[serde(skip)]
    pub values: Vec<f64>,
}

impl DistributionSummary {
    pub fn passed(&self) -> bool {
        self.mean_ok && self.variance_ok && self.ks_ok
    }
}

fn check_reps(reps: usize, min: usize) -> Result<()> {
    if reps < min {
        return Err(Error::Precondition(format!("need at least {min} replicates, got {reps}")));
    }
    Ok(())
}

/// `Y_n` for replicates `0..reps`, each on its own point seeded by
/// `split_seed(seed, r)`. Output order is replicate order on any pool.
pub fn sample_y(n: usize, reps: usize, seed: u64) -> Result<Vec<f64>> {
    (0..reps as u64)
        .into_par_iter()
        .map(|r| y_n(&BitStream::new(split_seed(seed, r)), n))
        .collect()
}

/// Draws `reps` independent points and summarizes `Y_n` against
/// `N(0, 1/4)`.
pub fn sample_distribution(n: usize, reps: usize, seed: u64) -> Result<DistributionSummary> {
    if n < 2 {
        return Err(Error::Precondition(format!("need n >= 2, got {n}")));
    }
    check_reps(reps, 100)?;
    let values = sample_y(n, reps, seed)?;
    let (mean, variance) = mean_variance(&values);
    let ks_sample = reps.min(KS_SUBSAMPLE);
    let ks = ks_distance(&values[..ks_sample], |x| normal_cdf(x / 0.5));
    let thresholds = Thresholds::for_reps(reps);
    Ok(DistributionSummary {
        n,
        reps,
        seed,
        mean,
        variance,
        ks,
        ks_sample,
        thresholds,
        mean_ok: mean.abs() <= thresholds.mean_abs,
        variance_ok: (variance - 0.25).abs() <= thresholds.variance_halfwidth,
        ks_ok: ks <= thresholds.ks,
        histogram: Histogram::build(&values, -1.5, 1.5, 24),
        values,
    })
}

/// Coefficients `c_j` of `Y_{2n} - Y_n = Σ_j c_j (b_{j+1} - 1/2)`, for
/// `j = 2..=2n`.
pub fn gap_coefficients(n: usize) -> Vec<f64> {
    let (c2n, cn) = (pairs(2 * n), pairs(n));
    (2..=2 * n)
        .map(|j| {
            let w = row_weight(j);
            if j <= n {
                w / c2n - w / cn
            } else {
                w / c2n
            }
        })
        .collect()
}

/// `Var(Y_{2n} - Y_n) = (1/4) Σ_j c_j^2` by direct summation.
pub fn gap_exact_variance(n: usize) -> f64 {
    let mut s = CompensatedSum::new();
    gap_coefficients(n).iter().for_each(|c| s.add(c * c));
    s.value() / 4.0
}

/// Standard error of a sample variance of `M` draws of `Σ_j c_j ε_j / 2`
/// with independent signs `ε_j`, from its exact fourth moment.
fn gap_variance_stderr(n: usize, reps: usize) -> f64 {
    let mut s2 = CompensatedSum::new();
    let mut s4 = CompensatedSum::new();
    for c in gap_coefficients(n) {
        let v = c * c / 4.0;
        s2.add(v);
        s4.add(v * v);
    }
    let sigma2 = s2.value();
    // E Z^4 = 3 σ^4 - 2 Σ v_j^2 for sums of independent scaled signs
    let mu4 = 3.0 * sigma2 * sigma2 - 2.0 * s4.value();
    let m = reps as f64;
    (mu4 / m - sigma2 * sigma2 * (m - 3.0) / (m * (m - 1.0))).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapSummary {
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub empirical_variance: f64,
    pub exact_variance: f64,
    pub variance_stderr: f64,
    /// `|empirical - exact| ≤ 3 · stderr`.
    pub within_three_se: bool,
    #[serde(skip)]
    pub samples: Vec<f64>,
}

/// `Y_{2n} - Y_n` on `reps` independent points.
pub fn gap_statistic(n: usize, reps: usize, seed: u64) -> Result<GapSummary> {
    if n < 2 {
        return Err(Error::Precondition(format!("need n >= 2, got {n}")));
    }
    check_reps(reps, 2)?;
    let samples: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let (a, b) = y_pair(&BitStream::new(split_seed(seed, r)), n)?;
            Ok(b - a)
        })
        .collect::<Result<_>>()?;
    let (_, empirical_variance) = mean_variance(&samples);
    let exact_variance = gap_exact_variance(n);
    let variance_stderr = gap_variance_stderr(n, reps);
    Ok(GapSummary {
        n,
        reps,
        seed,
        empirical_variance,
        exact_variance,
        variance_stderr,
        within_three_se: (empirical_variance - exact_variance).abs() <= 3.0 * variance_stderr,
        samples,
    })
}

/// `(j, E|h(X_1, X_j)|) = (j, a_{j-1}/2)` for `2 ≤ j ≤ j_max`.
pub fn unbounded_mean_table(j_max: u64) -> Result<Vec<(u64, f64)>> {
    if j_max < 2 {
        return Err(Error::Precondition(format!("need j_max >= 2, got {j_max}")));
    }
    Ok((2..=j_max).map(|j| (j, weight_unchecked(j - 1) / 2.0)).collect())
}
