//! Stationary ergodic sample paths with known marginals.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dyadic::{BitStream, DigitSnapshot, Digits};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::stats::{inverse_normal_cdf, open_unit_from_bits, unit_from_bits, CompensatedSum, Estimate};

/// Digits of the origin used for each doubling-map value.
pub const DEFAULT_PRECISION: u32 = 64;

/// Default AR(1) coefficient when a spec omits `rho`.
pub const DEFAULT_RHO: f64 = 0.5;

/// The process generating a sample path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub enum ProcessSpec {
    /// `X_k = T^k x` for the doubling map, `x` uniform.
    DoublingMap,
    /// `X_k = x + kα mod 1`. `None` selects the golden-ratio angle.
    Rotation { alpha: Option<f64> },
    IidUniform,
    /// Unit-variance Gaussian AR(1): `X_{k+1} = ρ X_k + sqrt(1-ρ²) ε`.
    GaussianAr1 { rho: f64 },
}

/// Marginal law of a process.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Marginal {
    Uniform,
    StandardNormal,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
}

impl TryFrom<RawSpec> for ProcessSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        let spec = match raw.kind.as_str() {
            "doubling-map" => ProcessSpec::DoublingMap,
            "rotation" => ProcessSpec::Rotation { alpha: raw.alpha },
            "iid-uniform" => ProcessSpec::IidUniform,
            "gaussian-ar1" => ProcessSpec::GaussianAr1 {
                rho: raw.rho.unwrap_or(DEFAULT_RHO),
            },
            other => return Err(Error::Config(format!("unknown process kind {other:?}"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<ProcessSpec> for RawSpec {
    fn from(spec: ProcessSpec) -> Self {
        let (rho, alpha) = match spec {
            ProcessSpec::GaussianAr1 { rho } => (Some(rho), None),
            ProcessSpec::Rotation { alpha } => (None, alpha),
            _ => (None, None),
        };
        RawSpec {
            kind: spec.kind().to_string(),
            rho,
            alpha,
        }
    }
}

impl ProcessSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ProcessSpec::DoublingMap => "doubling-map",
            ProcessSpec::Rotation { .. } => "rotation",
            ProcessSpec::IidUniform => "iid-uniform",
            ProcessSpec::GaussianAr1 { .. } => "gaussian-ar1",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ProcessSpec::GaussianAr1 { rho } if rho.is_nan() || rho.abs() >= 1.0 => Err(Error::Config(format!(
                "AR(1) coefficient must satisfy |rho| < 1, got {rho}"
            ))),
            ProcessSpec::Rotation { alpha: Some(a) } if !(a > 0.0 && a < 1.0) => Err(
                Error::Config(format!("rotation angle must lie in (0, 1), got {a}")),
            ),
            _ => Ok(()),
        }
    }

    pub fn marginal(&self) -> Marginal {
        match self {
            ProcessSpec::GaussianAr1 { .. } => Marginal::StandardNormal,
            _ => Marginal::Uniform,
        }
    }

    /// Rotation dynamics cannot represent an irrational angle exactly.
    pub fn is_approximate(&self) -> bool {
        matches!(self, ProcessSpec::Rotation { .. })
    }

    /// Parses either a bare kind name or a JSON object.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.starts_with('{') {
            Ok(serde_json::from_str(text)?)
        } else {
            RawSpec {
                kind: text.to_string(),
                rho: None,
                alpha: None,
            }
            .try_into()
        }
    }
}

/// Fractional part of the golden ratio as a 128-bit binary fraction,
/// `floor(2^128 (sqrt(5) - 1) / 2)`.
pub fn golden_angle_fraction() -> u128 {
    let five_scaled = BigUint::from(5u32) << 256u32;
    let root = five_scaled.sqrt();
    let frac: BigUint = (root - (BigUint::from(1u32) << 128u32)) >> 1u32;
    frac.to_u128().expect("golden fraction fits in 128 bits")
}

fn angle_fraction(alpha: Option<f64>) -> u128 {
    match alpha {
        None => golden_angle_fraction(),
        // Scaling by powers of two is exact, so this is the binary expansion
        // of `a` truncated after 128 digits.
        Some(a) => {
            let scaled = a * 2f64.powi(64);
            let high = scaled.trunc() as u128;
            let low = (scaled.fract() * 2f64.powi(64)) as u128;
            (high << 64) | low
        }
    }
}

/// A finite stretch `X_1, …, X_n` of a stationary process.
#[derive(Clone, Debug)]
pub struct SamplePath {
    pub spec: ProcessSpec,
    pub seed: u64,
    pub values: Vec<f64>,
    /// Origin digits (doubling map only), at least `n + precision` long.
    pub origin: Option<DigitSnapshot>,
    pub precision: u32,
}

impl SamplePath {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `X_i` for `1 ≤ i ≤ n`.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.values[i - 1]
    }

    /// Builds a doubling-map path directly from a digit source.
    pub fn from_digits<D: Digits>(point: &D, n: usize, precision: u32, seed: u64) -> Result<Self> {
        let values = (1..=n as u64)
            .map(|i| point.shift(i).approx_f64(u64::from(precision)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spec: ProcessSpec::DoublingMap,
            seed,
            values,
            origin: None,
            precision,
        })
    }
}

/// Generates `X_1, …, X_n` with default precision.
pub fn generate(spec: ProcessSpec, n: usize, seed: u64) -> Result<SamplePath> {
    generate_with_precision(spec, n, seed, DEFAULT_PRECISION)
}

/// Generates `X_1, …, X_n`. For the doubling map `X_i` is the `precision`
/// digit approximation of `T^i x`, rounded to `f64`.
pub fn generate_with_precision(
    spec: ProcessSpec,
    n: usize,
    seed: u64,
    precision: u32,
) -> Result<SamplePath> {
    if n == 0 {
        return Err(Error::Precondition("path length must be at least 1".into()));
    }
    if precision == 0 {
        return Err(Error::Config("precision must be at least 1 digit".into()));
    }
    spec.validate()?;
    let mut origin = None;
    let values = match spec {
        ProcessSpec::DoublingMap => {
            let stream = BitStream::new(seed);
            let snap = stream.snapshot_to(n as u64 + u64::from(precision.max(64)))?;
            let take = precision.min(64);
            let values = (1..=n as u64)
                .map(|i| {
                    let w = snap.window(i, take)?;
                    Ok(unit_from_bits(if take == 64 { w } else { w << (64 - take) }))
                })
                .collect::<Result<Vec<_>>>()?;
            origin = Some(snap);
            values
        }
        ProcessSpec::Rotation { alpha } => {
            let step = angle_fraction(alpha);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let start = (u128::from(rng.next_u64()) << 64) | u128::from(rng.next_u64());
            (1..=n as u128)
                .map(|i| unit_from_bits((start.wrapping_add(step.wrapping_mul(i)) >> 64) as u64))
                .collect()
        }
        ProcessSpec::IidUniform => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| unit_from_bits(rng.next_u64())).collect()
        }
        ProcessSpec::GaussianAr1 { rho } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let innov = (1.0 - rho * rho).sqrt();
            let mut x = inverse_normal_cdf(open_unit_from_bits(rng.next_u64()));
            let mut out = Vec::with_capacity(n);
            out.push(x);
            for _ in 1..n {
                let e = inverse_normal_cdf(open_unit_from_bits(rng.next_u64()));
                x = rho * x + innov * e;
                out.push(x);
            }
            out
        }
    };
    Ok(SamplePath {
        spec,
        seed,
        values,
        origin,
        precision,
    })
}

/// Draws one value from the marginal law.
fn draw(marginal: Marginal, rng: &mut ChaCha8Rng) -> f64 {
    match marginal {
        Marginal::Uniform => unit_from_bits(rng.next_u64()),
        Marginal::StandardNormal => inverse_normal_cdf(open_unit_from_bits(rng.next_u64())),
    }
}

/// Monte-Carlo estimate of `∬ h dF dF` from `reps` independent pairs drawn
/// from `F × F`.
pub fn product_integral(
    spec: ProcessSpec,
    kernel: &Kernel,
    reps: usize,
    seed: u64,
) -> Result<Estimate> {
    if reps == 0 {
        return Err(Error::Precondition("reps must be at least 1".into()));
    }
    spec.validate()?;
    let h = kernel.point_fn().ok_or_else(|| {
        Error::Config(format!(
            "kernel {} has no pointwise form to integrate",
            kernel.name()
        ))
    })?;
    let marginal = spec.marginal();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = CompensatedSum::new();
    let mut values = Vec::with_capacity(reps);
    for _ in 0..reps {
        let x = draw(marginal, &mut rng);
        let y = draw(marginal, &mut rng);
        let v = h(x, y);
        if !v.is_finite() {
            return Err(Error::NonFinitePoint { x, y, value: v });
        }
        sum.add(v);
        values.push(v);
    }
    let mean = sum.value() / reps as f64;
    let mut ss = CompensatedSum::new();
    values.iter().for_each(|&v| ss.add((v - mean) * (v - mean)));
    let var = if reps > 1 { ss.value() / (reps - 1) as f64 } else { 0.0 };
    Ok(Estimate {
        mean,
        stderr: (var / reps as f64).sqrt(),
        count: reps,
    })
}
