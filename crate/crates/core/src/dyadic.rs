//! Points of `[0, 1)` as binary digit streams.
//!
//! A point `x = Σ_m b_m 2^{-m}` is stored through its digits `b_1, b_2, …`,
//! generated lazily from a seed. The doubling map `T x = 2x mod 1` drops the
//! leading digit, so `T^k x` is a view of the same stream offset by `k`
//! digits. Iterating `T` on a float loses every bit of information after 53
//! steps; iterating it on digit indices never does.
//!
//! Digits are produced by a ChaCha8 keystream keyed by the seed: word `w`
//! of the keystream holds digits `64w + 1 ..= 64w + 64`, most significant
//! bit first. The keystream is a pure function of `(seed, position)`, so
//! digit `m` is a pure function of `(seed, m)` however it is requested.

use std::cell::RefCell;
use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::stats::unit_from_bits;

/// Materialization cap for a single stream.
pub const DEFAULT_DIGIT_CAP: u64 = 1 << 24;

/// Read access to the binary digits of a point of `[0, 1)`.
///
/// Digits are indexed from 1: `digit(1)` is the coefficient of `1/2`.
pub trait Digits {
    /// Returns `b_m` (0 or 1). `m` must be at least 1.
    fn digit(&self, m: u64) -> Result<u8>;

    /// Packs digits `start + 1 ..= start + len` into the low `len` bits of
    /// a word, first digit most significant. `len` is at most 64.
    fn window(&self, start: u64, len: u32) -> Result<u64> {
        debug_assert!(len <= 64);
        let mut w = 0u64;
        for m in 1..=u64::from(len) {
            w = (w << 1) | u64::from(self.digit(start + m)?);
        }
        Ok(w)
    }

    /// `T^k` applied to this point: a view whose digit `m` is digit `m + k`
    /// of `self`. Nothing is copied.
    fn shift(&self, k: u64) -> Shifted<'_, Self>
    where
        Self: Sized,
    {
        Shifted {
            inner: self,
            offset: k,
        }
    }

    /// `Σ_{i ≤ m} b_i 2^{-i}` as an exact rational.
    fn approx(&self, m: u64) -> Result<BigRational> {
        if m == 0 {
            return Err(Error::Domain("approx needs m >= 1".into()));
        }
        let mut numer = BigUint::zero();
        let mut done = 0u64;
        while done < m {
            let take = (m - done).min(64) as u32;
            let w = self.window(done, take)?;
            numer = (numer << take) + BigUint::from(w);
            done += u64::from(take);
        }
        let denom = BigUint::one() << m;
        Ok(BigRational::new(numer.into(), denom.into()))
    }

    /// `approx(m)` rounded to the nearest `f64` in `[0, 1)`. Digits past the
    /// 64th are ignored, since they are below double precision.
    fn approx_f64(&self, m: u64) -> Result<f64> {
        if m == 0 {
            return Err(Error::Domain("approx needs m >= 1".into()));
        }
        let take = m.min(64) as u32;
        let w = self.window(0, take)?;
        Ok(unit_from_bits(if take == 64 { w } else { w << (64 - take) }))
    }

    /// Whether the point lies in `iv`; reads exactly `iv.level()` digits.
    fn in_interval(&self, iv: DyadicInterval) -> Result<bool> {
        Ok(self.window(0, iv.level)? == iv.index - 1)
    }
}

/// A lazily materialized, seeded digit stream.
///
/// Extension goes through a `RefCell`, so a stream is single-writer and not
/// `Sync`. Use [`BitStream::snapshot`] to share materialized digits across
/// threads.
pub struct BitStream {
    seed: u64,
    cap: u64,
    state: RefCell<Lazy>,
}

struct Lazy {
    words: Vec<u64>,
    rng: ChaCha8Rng,
}

impl BitStream {
    /// A fresh point drawn from Lebesgue measure on `[0, 1)`.
    pub fn new(seed: u64) -> Self {
        Self::with_cap(seed, DEFAULT_DIGIT_CAP)
    }

    pub fn with_cap(seed: u64, cap: u64) -> Self {
        Self {
            seed,
            cap,
            state: RefCell::new(Lazy {
                words: Vec::new(),
                rng: ChaCha8Rng::seed_from_u64(seed),
            }),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    /// Number of digits generated so far (a multiple of 64).
    pub fn materialized_len(&self) -> u64 {
        self.state.borrow().words.len() as u64 * 64
    }

    /// Generates every digit up to `m`, each exactly once.
    pub fn materialize(&self, m: u64) -> Result<()> {
        if m > self.cap {
            return Err(Error::DigitCap {
                requested: m,
                cap: self.cap,
            });
        }
        let need = m.div_ceil(64) as usize;
        let mut st = self.state.borrow_mut();
        if st.words.len() < need {
            let Lazy { words, rng } = &mut *st;
            words.reserve(need - words.len());
            while words.len() < need {
                words.push(rng.next_u64());
            }
        }
        Ok(())
    }

    /// Immutable copy of the digits materialized so far.
    pub fn snapshot(&self) -> DigitSnapshot {
        DigitSnapshot {
            seed: self.seed,
            words: self.state.borrow().words.as_slice().into(),
        }
    }

    /// Materializes `m` digits and returns them as a snapshot.
    pub fn snapshot_to(&self, m: u64) -> Result<DigitSnapshot> {
        self.materialize(m)?;
        Ok(self.snapshot())
    }
}

impl Clone for BitStream {
    fn clone(&self) -> Self {
        let st = self.state.borrow();
        Self {
            seed: self.seed,
            cap: self.cap,
            state: RefCell::new(Lazy {
                words: st.words.clone(),
                rng: st.rng.clone(),
            }),
        }
    }
}

impl std::fmt::Debug for BitStream {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BitStream")
            .field("seed", &self.seed)
            .field("materialized_len", &self.materialized_len())
            .finish()
    }
}

#[inline]
fn word_digit(words: &[u64], m: u64) -> u8 {
    let idx = m - 1;
    ((words[(idx / 64) as usize] >> (63 - idx % 64)) & 1) as u8
}

#[inline]
fn word_window(words: &[u64], start: u64, len: u32) -> u64 {
    if len == 0 {
        return 0;
    }
    let q = (start / 64) as usize;
    let r = (start % 64) as u32;
    let hi = if r == 0 {
        words[q]
    } else {
        let next = words.get(q + 1).copied().unwrap_or(0);
        (words[q] << r) | (next >> (64 - r))
    };
    if len == 64 {
        hi
    } else {
        hi >> (64 - len)
    }
}

impl Digits for BitStream {
    fn digit(&self, m: u64) -> Result<u8> {
        if m == 0 {
            return Err(Error::Domain("digits are indexed from 1".into()));
        }
        self.materialize(m)?;
        Ok(word_digit(&self.state.borrow().words, m))
    }

    fn window(&self, start: u64, len: u32) -> Result<u64> {
        self.materialize(start + u64::from(len))?;
        Ok(word_window(&self.state.borrow().words, start, len))
    }
}

/// Frozen digits of a stream; cheap to clone and safe to share.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitSnapshot {
    seed: u64,
    words: Arc<[u64]>,
}

impl DigitSnapshot {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> u64 {
        self.words.len() as u64 * 64
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Digit `m` without range checking beyond a debug assertion.
    #[inline]
    pub fn bit(&self, m: u64) -> u8 {
        debug_assert!(m >= 1 && m <= self.len());
        word_digit(&self.words, m)
    }
}

impl Digits for DigitSnapshot {
    fn digit(&self, m: u64) -> Result<u8> {
        if m == 0 {
            return Err(Error::Domain("digits are indexed from 1".into()));
        }
        if m > self.len() {
            return Err(Error::DigitUnavailable {
                requested: m,
                available: self.len(),
            });
        }
        Ok(word_digit(&self.words, m))
    }

    fn window(&self, start: u64, len: u32) -> Result<u64> {
        let end = start + u64::from(len);
        if end > self.len() {
            return Err(Error::DigitUnavailable {
                requested: end,
                available: self.len(),
            });
        }
        Ok(word_window(&self.words, start, len))
    }
}

/// `T^k` view of another digit source.
#[derive(Clone, Copy, Debug)]
pub struct Shifted<'a, D: ?Sized> {
    inner: &'a D,
    offset: u64,
}

impl<D: Digits + ?Sized> Shifted<'_, D> {
    pub fn offset(&self) -> u64 {
        self.offset
    }
}

impl<D: Digits + ?Sized> Digits for Shifted<'_, D> {
    fn digit(&self, m: u64) -> Result<u8> {
        if m == 0 {
            return Err(Error::Domain("digits are indexed from 1".into()));
        }
        self.inner.digit(m + self.offset)
    }

    fn window(&self, start: u64, len: u32) -> Result<u64> {
        self.inner.window(start + self.offset, len)
    }
}

/// Digits given explicitly, padded with zeros. Handy for hand-built points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedDigits(pub Vec<u8>);

impl Digits for FixedDigits {
    fn digit(&self, m: u64) -> Result<u8> {
        if m == 0 {
            return Err(Error::Domain("digits are indexed from 1".into()));
        }
        Ok(self.0.get((m - 1) as usize).copied().unwrap_or(0))
    }
}

/// The dyadic interval `I_{j,ℓ} = [(ℓ-1)/2^j, ℓ/2^j)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DyadicInterval {
    level: u32,
    index: u64,
}

impl DyadicInterval {
    /// Levels are limited to `1..=63` so indices fit a machine word.
    pub fn new(level: u32, index: u64) -> Result<Self> {
        if !(1..=63).contains(&level) {
            return Err(Error::Domain(format!("level {level} outside 1..=63")));
        }
        if index == 0 || index > 1u64 << level {
            return Err(Error::Domain(format!(
                "index {index} outside 1..=2^{level}"
            )));
        }
        Ok(Self { level, index })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    /// Left endpoint `(ℓ-1)/2^j`.
    pub fn lower(&self) -> BigRational {
        BigRational::new(
            BigUint::from(self.index - 1).into(),
            (BigUint::one() << self.level).into(),
        )
    }

    /// Right endpoint `ℓ/2^j`.
    pub fn upper(&self) -> BigRational {
        BigRational::new(
            BigUint::from(self.index).into(),
            (BigUint::one() << self.level).into(),
        )
    }

    /// Whether the exact rational `x` lies in the interval.
    pub fn contains(&self, x: &BigRational) -> bool {
        *x >= self.lower() && *x < self.upper()
    }
}
