//! Desk-scale checks of the positive convergence results: almost-sure
//! convergence of U-statistics for bounded kernels, L¹ convergence of the
//! error curve, and weak convergence of the empirical measure.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::processes::{generate, product_integral, Marginal, ProcessSpec};
use crate::stats::{estimate, split_seed, Estimate};
use crate::ustat::u_series;

/// Replicates used when a target has to be estimated by Monte Carlo.
pub const TARGET_REPS: usize = 200_000;

/// Closed-form `∬ h dF dF` for the built-in kernels, when known.
pub fn analytic_target(spec: ProcessSpec, kernel_name: &str) -> Option<f64> {
    if let Some(c) = kernel_name
        .strip_prefix("constant(")
        .and_then(|s| s.strip_suffix(')'))
        .and_then(|s| s.parse::<f64>().ok())
    {
        return Some(c);
    }
    match (spec.marginal(), kernel_name) {
        (Marginal::Uniform, "product") => Some(0.25),
        (Marginal::Uniform, "centered-product") => Some(0.0),
        (Marginal::Uniform, "abs-diff") => Some(1.0 / 3.0),
        (Marginal::Uniform, "cos-diff") => Some(0.0),
        (Marginal::StandardNormal, "product") => Some(0.0),
        (Marginal::StandardNormal, "centered-product") => Some(0.25),
        (Marginal::StandardNormal, "abs-diff") => Some(2.0 / std::f64::consts::PI.sqrt()),
        _ => None,
    }
}

/// The analytic target when one is known, else a Monte-Carlo estimate.
pub fn resolve_target(spec: ProcessSpec, kernel: &Kernel, seed: u64) -> Result<f64> {
    match analytic_target(spec, kernel.name()) {
        Some(t) => Ok(t),
        None => Ok(product_integral(spec, kernel, TARGET_REPS, seed)?.mean),
    }
}

#[derive(Clone, Debug)]
pub struct ConvergenceExperiment {
    pub spec: ProcessSpec,
    pub kernel: Kernel,
    pub target: f64,
    pub n_grid: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
}

impl ConvergenceExperiment {
    pub fn validate(&self) -> Result<()> {
        if !self.target.is_finite() {
            return Err(Error::Config("target must be finite".into()));
        }
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        if self.n_grid.is_empty() || self.n_grid[0] < 2 {
            return Err(Error::Config("grid must be non-empty and start at n >= 2".into()));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("grid must be strictly increasing".into()));
        }
        self.spec.validate()
    }

    pub fn n_max(&self) -> usize {
        self.n_grid[self.n_grid.len() - 1]
    }

    /// U-statistics along the grid for every replicate, in replicate order.
    fn trajectories(&self) -> Result<Vec<Vec<f64>>> {
        self.validate()?;
        (0..self.reps as u64)
            .into_par_iter()
            .map(|r| {
                let path = generate(self.spec, self.n_max(), split_seed(self.seed, r))?;
                Ok(u_series(&path, &self.kernel, &self.n_grid)?.u)
            })
            .collect()
    }
}

/// Geometric grid from 2 to `n_max` with about `points` entries; always
/// ends at `n_max`.
pub fn geometric_grid(n_max: usize, points: usize) -> Vec<usize> {
    let n_max = n_max.max(2);
    let points = points.max(2);
    let ratio = (n_max as f64 / 2.0).powf(1.0 / (points - 1) as f64);
    let mut grid: Vec<usize> = (0..points)
        .map(|i| (2.0 * ratio.powi(i as i32)).round() as usize)
        .collect();
    grid.push(n_max);
    grid.retain(|&n| (2..=n_max).contains(&n));
    grid.sort_unstable();
    grid.dedup();
    grid
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceTrace {
    pub grid: Vec<usize>,
    pub target: f64,
    /// `u[r][g]`: replicate `r` at grid point `g`.
    pub u: Vec<Vec<f64>>,
}

impl ConvergenceTrace {
    pub fn error(&self, r: usize, g: usize) -> f64 {
        (self.u[r][g] - self.target).abs()
    }

    /// Share of replicates with `|U_{n_max} - target| ≤ tol`.
    pub fn fraction_within(&self, tol: f64) -> f64 {
        let last = self.grid.len() - 1;
        let hits = (0..self.u.len()).filter(|&r| self.error(r, last) <= tol).count();
        hits as f64 / self.u.len() as f64
    }
}

/// Per-replicate U-statistic trajectories for a bounded kernel.
pub fn as_convergence_trace(exp: &ConvergenceExperiment) -> Result<ConvergenceTrace> {
    if exp.kernel.bound().is_none() {
        return Err(Error::Config(format!(
            "kernel {} carries no bound; the almost-sure theorem needs a bounded kernel",
            exp.kernel.name()
        )));
    }
    Ok(ConvergenceTrace {
        grid: exp.n_grid.clone(),
        target: exp.target,
        u: exp.trajectories()?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct L1Curve {
    pub grid: Vec<usize>,
    pub target: f64,
    /// Mean over replicates of `|U_n - target|` at each grid point.
    pub errors: Vec<Estimate>,
}

impl L1Curve {
    pub fn final_error(&self) -> Estimate {
        self.errors[self.errors.len() - 1]
    }

    /// The final point is the curve minimum up to one standard error.
    pub fn final_is_minimal(&self) -> bool {
        let last = self.final_error();
        let min = self.errors.iter().map(|e| e.mean).fold(f64::INFINITY, f64::min);
        last.mean <= min + last.stderr
    }
}

/// Monte-Carlo estimate of `E|U_n - target|` along the grid.
pub fn l1_error_curve(exp: &ConvergenceExperiment) -> Result<L1Curve> {
    if exp.reps < 30 {
        return Err(Error::Precondition(format!(
            "the L1 curve needs at least 30 replicates, got {}",
            exp.reps
        )));
    }
    let traj = exp.trajectories()?;
    let errors = (0..exp.n_grid.len())
        .map(|g| {
            let e: Vec<f64> = traj.iter().map(|u| (u[g] - exp.target).abs()).collect();
            estimate(&e)
        })
        .collect();
    Ok(L1Curve {
        grid: exp.n_grid.clone(),
        target: exp.target,
        errors,
    })
}

/// A trigonometric test function `cos(2πmx)` or `sin(2πmx)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TestFunction {
    Cos(u32),
    Sin(u32),
}

impl TestFunction {
    /// `cos(2πmx), sin(2πmx)` for `1 ≤ m ≤ 8`.
    pub fn family() -> Vec<TestFunction> {
        (1..=8).flat_map(|m| [TestFunction::Cos(m), TestFunction::Sin(m)]).collect()
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            TestFunction::Cos(m) => (TAU * f64::from(m) * x).cos(),
            TestFunction::Sin(m) => (TAU * f64::from(m) * x).sin(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeakConvergenceRow {
    pub n: usize,
    /// `max_i |∫ f_i dF_n - ∫ f_i dF|`.
    pub max_deviation: f64,
    pub worst: TestFunction,
}

/// Largest deviation of empirical integrals of the trigonometric family
/// from their uniform-measure values (all 0) along the grid.
pub fn weak_convergence_panel(
    spec: ProcessSpec,
    n_grid: &[usize],
    seed: u64,
) -> Result<Vec<WeakConvergenceRow>> {
    if spec.marginal() != Marginal::Uniform {
        return Err(Error::Config(format!(
            "the trigonometric panel needs a uniform marginal; {} is not uniform",
            spec.kind()
        )));
    }
    let first = *n_grid
        .first()
        .ok_or_else(|| Error::Config("empty grid".into()))?;
    if first < 1 || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("grid must be positive and strictly increasing".into()));
    }
    let n_max = n_grid[n_grid.len() - 1];
    let path = generate(spec, n_max, seed)?;
    let family = TestFunction::family();
    let mut sums = vec![0.0; family.len()];
    let mut rows = Vec::with_capacity(n_grid.len());
    let mut next = n_grid.iter().peekable();
    for n in 1..=n_max {
        let x = path.x(n);
        for (s, f) in sums.iter_mut().zip(&family) {
            *s += f.eval(x);
        }
        if next.peek() == Some(&&n) {
            next.next();
            let (idx, dev) = sums
                .iter()
                .map(|s| (s / n as f64).abs())
                .enumerate()
                .fold((0, 0.0), |acc, (i, d)| if d > acc.1 { (i, d) } else { acc });
            rows.push(WeakConvergenceRow {
                n,
                max_deviation: dev,
                worst: family[idx],
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape() {
        let g = geometric_grid(4096, 12);
        assert_eq!(g[0], 2);
        assert_eq!(*g.last().unwrap(), 4096);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(geometric_grid(2, 5), vec![2]);
    }

    #[test]
    fn constant_kernel_has_constant_trace() {
        let exp = ConvergenceExperiment {
            spec: ProcessSpec::DoublingMap,
            kernel: Kernel::constant(2.0),
            target: 0.5,
            n_grid: vec![2, 10, 40],
            reps: 3,
            seed: 9,
        };
        let t = as_convergence_trace(&exp).unwrap();
        for r in 0..3 {
            for g in 0..3 {
                assert_eq!(t.u[r][g], 2.0);
                assert_eq!(t.error(r, g), 1.5);
            }
        }
    }

    #[test]
    fn constant_kernel_has_zero_l1_curve() {
        let exp = ConvergenceExperiment {
            spec: ProcessSpec::IidUniform,
            kernel: Kernel::constant(0.75),
            target: 0.75,
            n_grid: vec![2, 8, 32],
            reps: 30,
            seed: 1,
        };
        let c = l1_error_curve(&exp).unwrap();
        assert!(c.errors.iter().all(|e| e.mean == 0.0 && e.stderr == 0.0));
        assert!(c.final_is_minimal());
    }

    #[test]
    fn hypotheses_are_enforced() {
        let mut exp = ConvergenceExperiment {
            spec: ProcessSpec::IidUniform,
            kernel: Kernel::product(),
            target: 0.25,
            n_grid: vec![2, 8],
            reps: 10,
            seed: 1,
        };
        assert!(matches!(as_convergence_trace(&exp), Err(Error::Config(_))));
        assert!(matches!(l1_error_curve(&exp), Err(Error::Precondition(_))));
        exp.kernel = Kernel::product().with_bound(1.0);
        exp.n_grid = vec![8, 2];
        assert!(as_convergence_trace(&exp).is_err());
        assert!(weak_convergence_panel(ProcessSpec::GaussianAr1 { rho: 0.5 }, &[10], 0).is_err());
    }

    #[test]
    fn single_point_panel_reports_the_point() {
        let rows = weak_convergence_panel(ProcessSpec::IidUniform, &[1], 4).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].max_deviation <= 1.0);
    }

    #[test]
    fn targets() {
        assert_eq!(analytic_target(ProcessSpec::IidUniform, "product"), Some(0.25));
        assert_eq!(analytic_target(ProcessSpec::GaussianAr1 { rho: 0.5 }, "product"), Some(0.0));
        assert_eq!(analytic_target(ProcessSpec::DoublingMap, "constant(3)"), Some(3.0));
    }
}
