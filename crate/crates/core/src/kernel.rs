//! Symmetric two-argument kernels with metadata.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::processes::SamplePath;

/// Pointwise evaluation `h(x, y)`.
pub type PointFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Lag representation: `h(X_i, X_j)` for `1 ≤ i ≤ j`, read off the path
/// (including its origin digits when present).
pub type LagFn = Arc<dyn Fn(&SamplePath, usize, usize) -> f64 + Send + Sync>;

/// `μ(k) = E h(X_i, X_{i+k})`.
pub type LagMeanFn = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

/// A symmetric kernel. At least one of the pointwise and lag forms is set;
/// when both are, the lag form is used on sample paths.
#[derive(Clone)]
pub struct Kernel {
    name: String,
    point: Option<PointFn>,
    bound: Option<f64>,
    lag_form: Option<LagFn>,
    lag_mean: Option<LagMeanFn>,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("name", &self.name)
            .field("pointwise", &self.point.is_some())
            .field("bound", &self.bound)
            .field("lag_form", &self.lag_form.is_some())
            .field("lag_mean", &self.lag_mean.is_some())
            .finish()
    }
}

impl Kernel {
    pub fn pointwise<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            point: Some(Arc::new(f)),
            bound: None,
            lag_form: None,
            lag_mean: None,
        }
    }

    pub fn lag_only<F>(name: impl Into<String>, g: F) -> Self
    where
        F: Fn(&SamplePath, usize, usize) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            point: None,
            bound: None,
            lag_form: Some(Arc::new(g)),
            lag_mean: None,
        }
    }

    pub fn with_bound(mut self, bound: f64) -> Self {
        self.bound = Some(bound);
        self
    }

    pub fn with_lag_form<F>(mut self, g: F) -> Self
    where
        F: Fn(&SamplePath, usize, usize) -> f64 + Send + Sync + 'static,
    {
        self.lag_form = Some(Arc::new(g));
        self
    }

    pub fn with_lag_mean<F>(mut self, mu: F) -> Self
    where
        F: Fn(u64) -> f64 + Send + Sync + 'static,
    {
        self.lag_mean = Some(Arc::new(mu));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn bound(&self) -> Option<f64> {
        self.bound
    }

    pub fn point_fn(&self) -> Option<&PointFn> {
        self.point.as_ref()
    }

    pub fn lag_fn(&self) -> Option<&LagFn> {
        self.lag_form.as_ref()
    }

    pub fn lag_mean(&self) -> Option<&LagMeanFn> {
        self.lag_mean.as_ref()
    }

    /// `h(x, y)` on raw points.
    pub fn evaluate(&self, x: f64, y: f64) -> Result<f64> {
        let h = self.point.as_ref().ok_or_else(|| {
            Error::Config(format!("kernel {} has no pointwise form", self.name))
        })?;
        Ok(h(x, y))
    }

    /// `h(X_i, X_j)` on a path, 1-based, `i ≤ j`.
    #[inline]
    pub fn pair(&self, path: &SamplePath, i: usize, j: usize) -> f64 {
        match (&self.lag_form, &self.point) {
            (Some(g), _) => g(path, i, j),
            (None, Some(h)) => h(path.x(i), path.x(j)),
            (None, None) => unreachable!("kernel without any evaluation form"),
        }
    }

    /// `h ≡ c`, with lag mean `c`.
    pub fn constant(c: f64) -> Self {
        Self::pointwise(format!("constant({c})"), move |_, _| c)
            .with_bound(c.abs())
            .with_lag_mean(move |_| c)
    }

    /// `h(x, y) = xy`. Unbounded on ℝ; bounded by 1 on `[0, 1)`.
    pub fn product() -> Self {
        Self::pointwise("product", |x, y| x * y)
    }

    /// `h(x, y) = (x - 1/2)(y - 1/2)`, bounded by 1/4 on `[0, 1)`.
    pub fn centered_product() -> Self {
        Self::pointwise("centered-product", |x, y| (x - 0.5) * (y - 0.5)).with_bound(0.25)
    }

    /// `h(x, y) = |x - y|`, bounded by 1 on `[0, 1)`.
    pub fn abs_diff() -> Self {
        Self::pointwise("abs-diff", |x, y| (x - y).abs()).with_bound(1.0)
    }

    /// `h(x, y) = cos(2π(x - y))`, bounded by 1.
    pub fn cos_diff() -> Self {
        Self::pointwise("cos-diff", |x, y| (TAU * (x - y)).cos()).with_bound(1.0)
    }

    /// Looks up a built-in kernel by name. `product` is marked bounded by 1
    /// when `unit_support` is set, i.e. when the marginal lives on `[0, 1)`.
    pub fn builtin(name: &str, unit_support: bool) -> Result<Self> {
        let k = match name {
            "product" if unit_support => Self::product().with_bound(1.0),
            "product" => Self::product(),
            "centered-product" => Self::centered_product(),
            "abs-diff" => Self::abs_diff(),
            "cos-diff" => Self::cos_diff(),
            _ => match name.strip_prefix("constant") {
                Some(rest) => {
                    let c = rest
                        .trim_start_matches([':', '(', '='])
                        .trim_end_matches(')');
                    let c = if c.is_empty() { 1.0 } else {
                        c.parse::<f64>()
                            .map_err(|_| Error::Config(format!("bad constant kernel {name:?}")))?
                    };
                    Self::constant(c)
                }
                None => return Err(Error::Config(format!("unknown kernel {name:?}"))),
            },
        };
        Ok(k)
    }

    /// Names accepted by [`Kernel::builtin`].
    pub const BUILTIN_NAMES: [&'static str; 5] =
        ["constant:<c>", "product", "centered-product", "abs-diff", "cos-diff"];
}
