//! A bounded kernel whose U-statistics oscillate along the doubling map.
//!
//! Pairs `(X_i, X_j)` of the doubling-map orbit are linked by the kernel
//! exactly when their gap `j - i` falls in a lag set `I`, a union of integer
//! intervals `I_ℓ = (N'_ℓ, N_{ℓ+1}]` cut out by an index ladder
//! `N'_0 = 1`, `N_ℓ < N'_ℓ < N_{ℓ+1}`, `N'_ℓ ≥ ℓ N_ℓ`. The normalized pair
//! count `S(n) / (n(n-1))` with `S(n) = Σ_{k<n} (n-k) 1{k ∈ I}` then climbs
//! towards 1/2 at `n = N_ℓ` and falls back towards 0 at `n = N'_ℓ`.
//!
//! Everything here is exact: ladder entries are unbounded integers and the
//! normalized sums are rationals.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::dyadic::{BitStream, DigitSnapshot, Digits};
use crate::error::{Error, Result};
use crate::kernel::Kernel;

fn big(v: u64) -> BigUint {
    BigUint::from(v)
}

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// The interleaved sequences `N_1..N_L` and `N'_0..N'_L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexLadder {
    n: Vec<BigUint>,
    nprime: Vec<BigUint>,
}

/// One failed ladder invariant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LadderViolation {
    Shape { message: String },
    FirstPrimeNotOne,
    NotPositive { level: usize },
    NotBelowPrime { level: usize },
    PrimeNotBelowNext { level: usize },
    RatioTooSmall { level: usize },
    GrowthNotIncreasing { level: usize },
}

impl std::fmt::Display for LadderViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Shape { message } => write!(f, "malformed ladder: {message}"),
            Self::FirstPrimeNotOne => write!(f, "N'_0 = 1 fails"),
            Self::NotPositive { level } => write!(f, "N_ℓ ≥ 1 fails at ℓ={level}"),
            Self::NotBelowPrime { level } => write!(f, "N_ℓ < N'_ℓ fails at ℓ={level}"),
            Self::PrimeNotBelowNext { level } => {
                write!(f, "N'_ℓ < N_{{ℓ+1}} fails at ℓ={level}")
            }
            Self::RatioTooSmall { level } => write!(f, "N'_ℓ ≥ ℓ·N_ℓ fails at ℓ={level}"),
            Self::GrowthNotIncreasing { level } => write!(
                f,
                "N_{{ℓ+1}}/N'_ℓ strictly increasing fails at ℓ={level}"
            ),
        }
    }
}

impl IndexLadder {
    /// `n` holds `N_1..N_L`, `nprime` holds `N'_0..N'_L`.
    pub fn new(n: Vec<BigUint>, nprime: Vec<BigUint>) -> Result<Self> {
        let violations = Self::validate(&n, &nprime);
        if !violations.is_empty() {
            let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
            return Err(Error::Config(format!("invalid ladder: {}", list.join("; "))));
        }
        Ok(Self { n, nprime })
    }

    /// Lists every violated invariant, in level order.
    pub fn validate(n: &[BigUint], nprime: &[BigUint]) -> Vec<LadderViolation> {
        let mut out = Vec::new();
        if n.is_empty() {
            out.push(LadderViolation::Shape {
                message: "N must have at least one entry".into(),
            });
            return out;
        }
        if nprime.len() != n.len() + 1 {
            out.push(LadderViolation::Shape {
                message: format!(
                    "Nprime must have exactly one more entry than N ({} vs {})",
                    nprime.len(),
                    n.len()
                ),
            });
            return out;
        }
        if !nprime[0].is_one() {
            out.push(LadderViolation::FirstPrimeNotOne);
        }
        let levels = n.len();
        for l in 1..=levels {
            let nl = &n[l - 1];
            let npl = &nprime[l];
            if nl.is_zero() {
                out.push(LadderViolation::NotPositive { level: l });
            }
            if nl >= npl {
                out.push(LadderViolation::NotBelowPrime { level: l });
            }
            if l < levels && npl >= &n[l] {
                out.push(LadderViolation::PrimeNotBelowNext { level: l });
            }
            if *npl < nl * big(l as u64) {
                out.push(LadderViolation::RatioTooSmall { level: l });
            }
            // N_{l+1}/N'_l > N_l/N'_{l-1}, cross-multiplied
            if (2..levels).contains(&l) && &n[l] * &nprime[l - 1] <= &n[l - 1] * npl {
                out.push(LadderViolation::GrowthNotIncreasing { level: l });
            }
        }
        out
    }

    /// `N_1 = 2`, `N'_ℓ = max(ℓ, 2) N_ℓ`, `N_{ℓ+1} = 2^ℓ N'_ℓ`.
    pub fn default_ladder(levels: usize) -> Result<Self> {
        if levels == 0 {
            return Err(Error::Domain("a ladder needs at least one level".into()));
        }
        let mut n = vec![big(2)];
        let mut nprime = vec![big(1)];
        for l in 1..=levels {
            let np = &n[l - 1] * big(l.max(2) as u64);
            if l < levels {
                n.push(&np << l);
            }
            nprime.push(np);
        }
        Self::new(n, nprime)
    }

    pub fn levels(&self) -> usize {
        self.n.len()
    }

    /// `N_ℓ` for `1 ≤ ℓ ≤ L`.
    pub fn n(&self, level: usize) -> &BigUint {
        &self.n[level - 1]
    }

    /// `N'_ℓ` for `0 ≤ ℓ ≤ L`.
    pub fn nprime(&self, level: usize) -> &BigUint {
        &self.nprime[level]
    }

    pub fn to_file(&self) -> LadderFile {
        LadderFile {
            n: self.n.iter().map(ToString::to_string).collect(),
            nprime: self.nprime.iter().map(ToString::to_string).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("ladder serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: LadderFile = serde_json::from_str(text)?;
        let (n, nprime) = file.parse()?;
        Self::new(n, nprime)
    }
}

/// On-disk ladder: decimal strings, since entries outgrow machine words.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderFile {
    #[serde(rename = "N")]
    pub n: Vec<String>,
    #[serde(rename = "Nprime")]
    pub nprime: Vec<String>,
}

impl LadderFile {
    pub fn parse(&self) -> Result<(Vec<BigUint>, Vec<BigUint>)> {
        let conv = |v: &Vec<String>, field: &str| {
            v.iter()
                .map(|s| {
                    s.trim().parse::<BigUint>().map_err(|_| {
                        Error::Serde(format!("{field}: {s:?} is not a nonnegative integer"))
                    })
                })
                .collect::<Result<Vec<_>>>()
        };
        Ok((conv(&self.n, "N")?, conv(&self.nprime, "Nprime")?))
    }
}

/// `I = ∪_{ℓ=0}^{L-1} (N'_ℓ, N_{ℓ+1}]`.
///
/// Every lag up to `N'_L` is decided by the ladder, since the next interval
/// starts strictly above `N'_L`.
#[derive(Clone, Debug)]
pub struct LagSet {
    ladder: IndexLadder,
    intervals: Vec<(BigUint, BigUint)>,
    small: Vec<(u64, u64)>,
    limit: BigUint,
}

impl LagSet {
    pub fn new(ladder: IndexLadder) -> Self {
        let intervals: Vec<(BigUint, BigUint)> = (0..ladder.levels())
            .map(|l| (ladder.nprime(l).clone(), ladder.n(l + 1).clone()))
            .collect();
        let sat = |v: &BigUint| v.to_u64().unwrap_or(u64::MAX);
        let small = intervals.iter().map(|(lo, hi)| (sat(lo), sat(hi))).collect();
        let limit = ladder.nprime(ladder.levels()).clone();
        Self {
            ladder,
            intervals,
            small,
            limit,
        }
    }

    pub fn default_set(levels: usize) -> Result<Self> {
        Ok(Self::new(IndexLadder::default_ladder(levels)?))
    }

    pub fn ladder(&self) -> &IndexLadder {
        &self.ladder
    }

    /// Largest lag the ladder decides.
    pub fn limit(&self) -> &BigUint {
        &self.limit
    }

    /// `(N'_ℓ, N_{ℓ+1})`, the open-closed endpoints of `I_ℓ`.
    pub fn interval(&self, level: usize) -> (&BigUint, &BigUint) {
        let (lo, hi) = &self.intervals[level];
        (lo, hi)
    }

    /// Whether `k ∈ I`.
    pub fn contains(&self, k: &BigUint) -> Result<bool> {
        if k.is_zero() {
            return Err(Error::Domain("lags start at 1".into()));
        }
        if *k > self.limit {
            return Err(Error::Range(format!(
                "lag {k} beyond the ladder's decided range (N'_L = {})",
                self.limit
            )));
        }
        // last interval whose open left end is below k
        let idx = self.intervals.partition_point(|(lo, _)| lo < k);
        Ok(idx > 0 && *k <= self.intervals[idx - 1].1)
    }

    pub fn contains_u64(&self, k: u64) -> Result<bool> {
        self.contains(&big(k))
    }

    /// Fast membership for lags that fit a machine word; `None` beyond the
    /// decided range.
    #[inline]
    pub fn contains_small(&self, k: u64) -> Option<bool> {
        if k == 0 || self.limit.to_u64().is_some_and(|lim| k > lim) {
            return None;
        }
        let idx = self.small.partition_point(|&(lo, _)| lo < k);
        Some(idx > 0 && k <= self.small[idx - 1].1)
    }

    /// `S(n) = Σ_{k=1}^{n-1} (n-k) 1{k ∈ I}` with both normalizations,
    /// computed interval by interval.
    pub fn exact_sum(&self, n: &BigUint) -> Result<ExactSum> {
        if *n < big(2) {
            return Err(Error::Precondition(format!("need n >= 2, got {n}")));
        }
        if *n > self.limit {
            return Err(Error::Range(format!(
                "n = {n} beyond the ladder's decided range (N'_L = {})",
                self.limit
            )));
        }
        let last = n - 1u32;
        let mut s = BigUint::zero();
        for (lo, hi) in &self.intervals {
            if *lo >= last {
                break;
            }
            let first = lo + 1u32;
            let end = if *hi < last { hi } else { &last };
            s += series(n, &first, end);
        }
        Ok(ExactSum::new(n.clone(), s))
    }

    /// Splits the normalized sum at `N_ℓ` into the contribution `A`
    /// of intervals `I_0..I_{ℓ-2}` and the contribution `B` of `I_{ℓ-1}`.
    pub fn ab_decomposition(&self, level: usize) -> Result<AbDecomposition> {
        if level < 3 || level > self.ladder.levels() {
            return Err(Error::Range(format!(
                "decomposition needs 3 <= ℓ <= {}, got {level}",
                self.ladder.levels()
            )));
        }
        let nl = self.ladder.n(level);
        let denom = nl * (nl - 1u32);
        let mut a = BigUint::zero();
        for u in 0..=level - 2 {
            let (lo, hi) = &self.intervals[u];
            a += series(nl, &(lo + 1u32), hi);
        }
        let (lo, hi) = &self.intervals[level - 1];
        let b = series(nl, &(lo + 1u32), hi);
        let bound = ratio(self.ladder.n(level - 1) - 1u32, nl - 1u32);
        Ok(AbDecomposition {
            level,
            a: ratio(a, denom.clone()),
            b: ratio(b, denom),
            a_bound: bound,
        })
    }
}

/// `Σ_{k=first}^{last} (n - k)` for `first ≤ last ≤ n`; zero when empty.
fn series(n: &BigUint, first: &BigUint, last: &BigUint) -> BigUint {
    if first > last {
        return BigUint::zero();
    }
    let count = last - first + 1u32;
    let ends = (n - first) + (n - last);
    (count * ends) >> 1u32
}

/// Exact pair count and its two normalizations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactSum {
    pub n: BigUint,
    pub s: BigUint,
    /// `S / C(n, 2)`, the U-statistic.
    pub u_norm: BigRational,
    /// `S / (n(n-1))`.
    pub paper_norm: BigRational,
}

impl ExactSum {
    fn new(n: BigUint, s: BigUint) -> Self {
        let nn1 = &n * (&n - 1u32);
        let half: BigUint = &nn1 >> 1u32;
        Self {
            u_norm: ratio(s.clone(), half),
            paper_norm: ratio(s.clone(), nn1),
            n,
            s,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbDecomposition {
    pub level: usize,
    pub a: BigRational,
    pub b: BigRational,
    /// `(N_{ℓ-1} - 1)/(N_ℓ - 1)`.
    pub a_bound: BigRational,
}

/// Which subsequence a report row belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Which {
    #[serde(rename = "N")]
    N,
    #[serde(rename = "N'")]
    NPrime,
}

impl std::fmt::Display for Which {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Which::N => "N",
            Which::NPrime => "N'",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OscillationRow {
    pub level: usize,
    pub which: Which,
    pub sum: ExactSum,
}

/// Exact sums along `N_ℓ` and `N'_ℓ` for every level `ℓ ≥ 1`.
pub fn oscillation_report(lags: &LagSet) -> Result<Vec<OscillationRow>> {
    let ladder = lags.ladder();
    let mut rows = Vec::with_capacity(2 * ladder.levels());
    for l in 1..=ladder.levels() {
        for (which, n) in [(Which::N, ladder.n(l)), (Which::NPrime, ladder.nprime(l))] {
            rows.push(OscillationRow {
                level: l,
                which,
                sum: lags.exact_sum(n)?,
            });
        }
    }
    Ok(rows)
}

/// The kernel of the construction as seen along a doubling-map path:
/// `h(X_i, X_j) = 1{j - i ∈ I}` off the diagonal, 0 on it. Lags beyond the
/// ladder evaluate to NaN, which the U-statistic engine rejects.
pub fn kernel(lags: &LagSet) -> Kernel {
    let for_pairs = lags.clone();
    let for_mean = lags.clone();
    Kernel::lag_only("oscillating-lag-indicator", move |_, i, j| {
        if i == j {
            return 0.0;
        }
        match for_pairs.contains_small((j - i) as u64) {
            Some(true) => 1.0,
            Some(false) => 0.0,
            None => f64::NAN,
        }
    })
    .with_bound(1.0)
    .with_lag_mean(move |k| match for_mean.contains_small(k) {
        Some(true) => 1.0,
        Some(false) => 0.0,
        None => f64::NAN,
    })
}

/// Pairs where the kernel evaluated from its definition disagrees with the
/// lag indicator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub i: usize,
    pub j: usize,
    pub expected: u8,
    pub observed: u8,
    /// Lags `k ∈ I` with `T^k X_i = X_j` on the compared window.
    pub forward_lags: Vec<u64>,
    /// Lags `k ∈ I` with `T^k X_j = X_i` on the compared window.
    pub backward_lags: Vec<u64>,
    /// Leading digits of `X_i` and `X_j` (at most 32).
    pub window_i: String,
    pub window_j: String,
}

/// Outcome of [`simulate_check`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationCheck {
    pub n: usize,
    pub seed: u64,
    pub guard_digits: u32,
    pub mismatch_count: usize,
    /// The first [`MAX_REPORTED_MISMATCHES`] mismatches.
    pub mismatches: Vec<Mismatch>,
    pub pair_sum: u64,
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub u_simulated: BigRational,
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub u_exact: BigRational,
}

pub const MAX_REPORTED_MISMATCHES: usize = 100;

impl SimulationCheck {
    pub fn is_clean(&self) -> bool {
        self.mismatch_count == 0 && self.u_simulated == self.u_exact
    }
}

fn digits_equal(snap: &DigitSnapshot, a: u64, b: u64, len: u32) -> bool {
    let mut done = 0u32;
    while done < len {
        let take = (len - done).min(64);
        let off = u64::from(done);
        if snap.window(a + off, take).ok() != snap.window(b + off, take).ok() {
            return false;
        }
        done += take;
    }
    true
}

fn leading(snap: &DigitSnapshot, start: u64, len: u32) -> String {
    (1..=u64::from(len.min(32)))
        .map(|m| if snap.bit(start + m) == 1 { '1' } else { '0' })
        .collect()
}

/// Evaluates `h(X_i, X_j) = 1_G(X_i, X_j) + 1_G(X_j, X_i)` on a doubling-map
/// path straight from the definition of `G`, and compares it with the lag
/// indicator `1{j - i ∈ I}` on every pair.
///
/// `(X_i, X_j) ∈ G` iff `T^k X_i = X_j` for some `k ∈ I`; equality of two
/// orbit points is tested on `guard_digits` digits, and the candidate lags
/// are `I ∩ [1, n]`. Small windows produce spurious matches, which show up
/// as mismatches.
pub fn simulate_check(
    n: usize,
    seed: u64,
    lags: &LagSet,
    guard_digits: u32,
) -> Result<SimulationCheck> {
    if n < 2 {
        return Err(Error::Precondition(format!("need n >= 2, got {n}")));
    }
    if guard_digits == 0 {
        return Err(Error::Precondition("guard_digits must be positive".into()));
    }
    let candidates: Vec<u64> = (1..=n as u64)
        .map(|k| lags.contains_u64(k).map(|hit| (k, hit)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter_map(|(k, hit)| hit.then_some(k))
        .collect();
    let stream = BitStream::new(seed);
    let snap = stream.snapshot_to(2 * n as u64 + u64::from(guard_digits) + 64)?;

    let mut mismatches = Vec::new();
    let mut mismatch_count = 0usize;
    let mut pair_sum = 0u64;
    for j in 2..=n {
        for i in 1..j {
            let (iu, ju) = (i as u64, j as u64);
            let forward: Vec<u64> = candidates
                .iter()
                .copied()
                .filter(|&k| digits_equal(&snap, iu + k, ju, guard_digits))
                .collect();
            let backward: Vec<u64> = candidates
                .iter()
                .copied()
                .filter(|&k| digits_equal(&snap, ju + k, iu, guard_digits))
                .collect();
            let observed = u8::from(!forward.is_empty()) + u8::from(!backward.is_empty());
            let expected = u8::from(lags.contains_u64(ju - iu)?);
            pair_sum += u64::from(observed);
            if observed != expected {
                mismatch_count += 1;
                if mismatches.len() < MAX_REPORTED_MISMATCHES {
                    mismatches.push(Mismatch {
                        i,
                        j,
                        expected,
                        observed,
                        forward_lags: forward,
                        backward_lags: backward,
                        window_i: leading(&snap, iu, guard_digits),
                        window_j: leading(&snap, ju, guard_digits),
                    });
                }
            }
        }
    }
    let pairs = big(n as u64 * (n as u64 - 1) / 2);
    let u_simulated = ratio(big(pair_sum), pairs);
    let u_exact = lags.exact_sum(&big(n as u64))?.u_norm;
    Ok(SimulationCheck {
        n,
        seed,
        guard_digits,
        mismatch_count,
        mismatches,
        pair_sum,
        u_simulated,
        u_exact,
    })
}

/// Exact `S(n)` by enumerating all pairs with the lag indicator; quadratic.
pub fn brute_force_sum(n: u64, lags: &LagSet) -> Result<BigUint> {
    let mut s = 0u64;
    for j in 2..=n {
        for i in 1..j {
            s += u64::from(lags.contains_u64(j - i)?);
        }
    }
    Ok(big(s))
}

/// `x` rounded to an `f64` for display.
pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `lim sup − lim inf` witness: the smallest gap `paper_norm(N_ℓ) −
/// paper_norm(N'_ℓ)` over the given levels.
pub fn min_gap(rows: &[OscillationRow], levels: std::ops::RangeInclusive<usize>) -> Option<BigRational> {
    levels
        .filter_map(|l| {
            let at = |w| rows.iter().find(|r| r.level == l && r.which == w);
            Some(&at(Which::N)?.sum.paper_norm - &at(Which::NPrime)?.sum.paper_norm)
        })
        .min()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bigs(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| big(x)).collect()
    }

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn default_ladder_values() {
        let l = IndexLadder::default_ladder(3).unwrap();
        assert_eq!(l.n, bigs(&[2, 8, 64]));
        assert_eq!(l.nprime, bigs(&[1, 4, 16, 192]));
        let one = IndexLadder::default_ladder(1).unwrap();
        assert_eq!(one.n, bigs(&[2]));
        assert_eq!(one.nprime, bigs(&[1, 4]));
        assert!(IndexLadder::default_ladder(0).is_err());
    }

    #[test]
    fn default_ladders_satisfy_invariants() {
        for levels in 1..=16 {
            let l = IndexLadder::default_ladder(levels).unwrap();
            assert!(IndexLadder::validate(&l.n, &l.nprime).is_empty());
        }
    }

    #[test]
    fn membership_on_default_ladder() {
        let lags = LagSet::default_set(3).unwrap();
        assert!(lags.contains_u64(2).unwrap());
        assert!(!lags.contains_u64(1).unwrap());
        assert!(lags.contains_u64(5).unwrap());
        assert!(!lags.contains_u64(4).unwrap());
        assert!(lags.contains_u64(8).unwrap());
        assert!(!lags.contains_u64(9).unwrap());
        assert!(lags.contains_u64(64).unwrap());
        assert!(!lags.contains_u64(192).unwrap());
        assert!(matches!(lags.contains_u64(193), Err(Error::Range(_))));
        assert!(lags.contains_u64(0).is_err());
        assert_eq!(lags.contains_small(193), None);
        assert_eq!(lags.contains_small(17), Some(true));
    }

    #[test]
    fn exact_sums_by_hand() {
        let lags = LagSet::default_set(3).unwrap();
        assert_eq!(lags.exact_sum(&big(2)).unwrap().s, big(0));
        let six = lags.exact_sum(&big(6)).unwrap();
        assert_eq!(six.s, big(5));
        assert_eq!(six.u_norm, r(1, 3));
        assert_eq!(six.paper_norm, r(1, 6));
        assert_eq!(lags.exact_sum(&big(9)).unwrap().s, big(17));
        assert!(matches!(lags.exact_sum(&big(1)), Err(Error::Precondition(_))));
        assert!(matches!(lags.exact_sum(&big(193)), Err(Error::Range(_))));
    }

    #[test]
    fn ab_at_level_three() {
        let lags = LagSet::default_set(3).unwrap();
        let ab = lags.ab_decomposition(3).unwrap();
        assert_eq!(ab.a, r(292, 4032));
        assert_eq!(ab.b, r(1128, 4032));
        assert_eq!(&ab.a + &ab.b, lags.exact_sum(&big(64)).unwrap().paper_norm);
        assert!(lags.ab_decomposition(2).is_err());
        assert!(lags.ab_decomposition(4).is_err());
    }

    #[test]
    fn violations_are_named() {
        let v = IndexLadder::validate(&bigs(&[2, 8, 64]), &bigs(&[1, 2, 16, 192]));
        assert!(v.contains(&LadderViolation::NotBelowPrime { level: 1 }));
        assert_eq!(
            LadderViolation::NotBelowPrime { level: 1 }.to_string(),
            "N_ℓ < N'_ℓ fails at ℓ=1"
        );
        let v = IndexLadder::validate(&bigs(&[2, 8, 64]), &bigs(&[1, 4, 16, 128]));
        assert_eq!(v, vec![LadderViolation::RatioTooSmall { level: 3 }]);
        let v = IndexLadder::validate(&bigs(&[2, 8]), &bigs(&[2, 4, 16]));
        assert_eq!(v, vec![LadderViolation::FirstPrimeNotOne]);
        let v = IndexLadder::validate(&bigs(&[2, 8]), &bigs(&[1, 4]));
        assert!(matches!(v[0], LadderViolation::Shape { .. }));
        // N_3/N'_2 = 32/16 = 2 is not above N_2/N'_1 = 8/4 = 2
        let v = IndexLadder::validate(&bigs(&[2, 8, 32]), &bigs(&[1, 4, 16, 96]));
        assert!(v.contains(&LadderViolation::GrowthNotIncreasing { level: 2 }));
        let v = IndexLadder::validate(&bigs(&[2, 4]), &bigs(&[1, 4, 8]));
        assert!(v.contains(&LadderViolation::PrimeNotBelowNext { level: 1 }));
    }

    #[test]
    fn ladder_json_round_trip() {
        let l = IndexLadder::default_ladder(12).unwrap();
        let text = l.to_json();
        assert!(text.contains("\"Nprime\""));
        assert_eq!(IndexLadder::from_json(&text).unwrap(), l);
        assert!(IndexLadder::from_json(r#"{"N":["2"],"Nprime":["1","x"]}"#).is_err());
        assert!(IndexLadder::from_json(r#"{"N":["2"],"Nprime":["1","4"],"extra":1}"#).is_err());
    }

    #[test]
    fn two_point_simulation() {
        let lags = LagSet::default_set(4).unwrap();
        let c = simulate_check(2, 5, &lags, 128).unwrap();
        assert_eq!(c.pair_sum, 0);
        assert!(c.is_clean());
    }

    #[test]
    fn one_digit_window_is_uninformative() {
        let lags = LagSet::default_set(4).unwrap();
        let c = simulate_check(32, 3, &lags, 1).unwrap();
        assert!(c.mismatch_count > 0);
        assert!(!c.is_clean());
        let m = &c.mismatches[0];
        assert_ne!(m.expected, m.observed);
    }
}
