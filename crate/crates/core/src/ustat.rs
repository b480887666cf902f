//! Order-2 U-statistics, V-statistics and centered U-statistics.
//!
//! Pair sums are always accumulated in the same order: rows `j = 2, 3, …`,
//! each row summing `h(X_i, X_j)` over `i = 1..j` ascending, and rows added
//! to the running total with compensated summation. Rows past
//! [`COMPENSATED_ROW_THRESHOLD`] are themselves summed with compensation.
//! Because the order depends only on `(i, j)`, the naive evaluation and the
//! incremental series agree bit for bit.

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::processes::SamplePath;
use crate::stats::CompensatedSum;

/// Rows longer than this are summed with compensation.
pub const COMPENSATED_ROW_THRESHOLD: usize = 10_000;

/// `C(n, 2)` as a float (exact for `n < 2^26`).
#[inline]
pub fn pairs(n: usize) -> f64 {
    (n as f64) * (n as f64 - 1.0) / 2.0
}

#[inline]
fn check(value: f64, i: usize, j: usize) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFiniteIndex { i, j, value })
    }
}

/// `Σ_{i<j} h(X_i, X_j)` for one row.
fn row_sum(path: &SamplePath, kernel: &Kernel, j: usize) -> Result<f64> {
    let compensated = j > COMPENSATED_ROW_THRESHOLD;
    let mut plain = 0.0;
    let mut comp = CompensatedSum::new();
    let mut push = |v: f64| {
        if compensated {
            comp.add(v)
        } else {
            plain += v
        }
    };
    match (kernel.lag_fn(), kernel.point_fn()) {
        (None, Some(h)) => {
            let xj = path.x(j);
            for (idx, &xi) in path.values[..j - 1].iter().enumerate() {
                push(check(h(xi, xj), idx + 1, j)?);
            }
        }
        _ => {
            for i in 1..j {
                push(check(kernel.pair(path, i, j), i, j)?);
            }
        }
    }
    Ok(if compensated { comp.value() } else { plain })
}

fn check_n(path: &SamplePath, n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Precondition(format!("need n >= 2, got {n}")));
    }
    if n > path.len() {
        return Err(Error::Precondition(format!(
            "n = {n} exceeds path length {}",
            path.len()
        )));
    }
    Ok(())
}

/// `C(n,2)^{-1} Σ_{1≤i<j≤n} h(X_i, X_j)` by a direct double loop.
pub fn u_naive(path: &SamplePath, kernel: &Kernel, n: usize) -> Result<f64> {
    check_n(path, n)?;
    let mut total = CompensatedSum::new();
    for j in 2..=n {
        let mut row = 0.0;
        let mut comp = CompensatedSum::new();
        for i in 1..j {
            let v = check(kernel.pair(path, i, j), i, j)?;
            if j > COMPENSATED_ROW_THRESHOLD {
                comp.add(v);
            } else {
                row += v;
            }
        }
        total.add(if j > COMPENSATED_ROW_THRESHOLD { comp.value() } else { row });
    }
    Ok(total.value() / pairs(n))
}

/// `n^{-2} Σ_{1≤i,j≤n} h(X_i, X_j)`, the integral of `h` against the
/// empirical product measure. Every ordered pair is evaluated.
pub fn v_plugin(path: &SamplePath, kernel: &Kernel, n: usize) -> Result<f64> {
    check_n(path, n)?;
    let mut total = CompensatedSum::new();
    for j in 1..=n {
        let mut row = CompensatedSum::new();
        for i in 1..=n {
            let v = match kernel.point_fn() {
                Some(h) if kernel.lag_fn().is_none() => h(path.x(i), path.x(j)),
                _ => kernel.pair(path, i.min(j), i.max(j)),
            };
            row.add(check(v, i, j)?);
        }
        total.add(row.value());
    }
    let nf = n as f64;
    Ok(total.value() / (nf * nf))
}

/// `Σ_{i≤n} h(X_i, X_i)`.
pub fn diagonal_sum(path: &SamplePath, kernel: &Kernel, n: usize) -> Result<f64> {
    check_n(path, n)?;
    let mut d = CompensatedSum::new();
    for i in 1..=n {
        d.add(check(kernel.pair(path, i, i), i, i)?);
    }
    Ok(d.value())
}

/// U, V and centered values along a grid of prefix lengths.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UStatSeries {
    pub grid: Vec<usize>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub centered: Option<Vec<f64>>,
}

fn check_grid(path: &SamplePath, grid: &[usize]) -> Result<()> {
    let first = *grid
        .first()
        .ok_or_else(|| Error::Precondition("empty grid".into()))?;
    if first < 2 {
        return Err(Error::Precondition("grid must start at n >= 2".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("grid must be strictly increasing".into()));
    }
    let last = grid[grid.len() - 1];
    if last > path.len() {
        return Err(Error::Precondition(format!(
            "grid reaches {last} beyond path length {}",
            path.len()
        )));
    }
    Ok(())
}

/// U- and V-statistics at every grid point, extending the raw pair sum one
/// row at a time: `O(n_max²)` kernel evaluations in total.
pub fn u_series(path: &SamplePath, kernel: &Kernel, grid: &[usize]) -> Result<UStatSeries> {
    check_grid(path, grid)?;
    let mut total = CompensatedSum::new();
    let mut diag = CompensatedSum::new();
    diag.add(check(kernel.pair(path, 1, 1), 1, 1)?);
    let mut u = Vec::with_capacity(grid.len());
    let mut v = Vec::with_capacity(grid.len());
    let mut next = grid.iter().peekable();
    for j in 2..=grid[grid.len() - 1] {
        total.add(row_sum(path, kernel, j)?);
        diag.add(check(kernel.pair(path, j, j), j, j)?);
        if next.peek() == Some(&&j) {
            next.next();
            let s = total.value();
            let nf = j as f64;
            u.push(s / pairs(j));
            v.push((2.0 * s + diag.value()) / (nf * nf));
        }
    }
    Ok(UStatSeries {
        grid: grid.to_vec(),
        u,
        v,
        centered: None,
    })
}

/// `Σ_{k=1}^{n-1} (n-k) μ(k)` for every `n` on the grid.
pub fn lag_mean_sums(grid: &[usize], mu: &dyn Fn(u64) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.len());
    let mut prefix = CompensatedSum::new(); // Σ_{k<n} μ(k)
    let mut weighted = CompensatedSum::new(); // Σ_{k<n} (n-k) μ(k)
    let mut next = grid.iter().peekable();
    let last = grid.last().copied().unwrap_or(0);
    for n in 2..=last {
        prefix.add(mu((n - 1) as u64));
        weighted.add(prefix.value());
        if next.peek() == Some(&&n) {
            next.next();
            out.push(weighted.value());
        }
    }
    out
}

/// Subtracts the expected pair mean: `centered_n = u_n - C(n,2)^{-1}
/// Σ_{k=1}^{n-1} (n-k) μ(k)`.
pub fn center(series: &UStatSeries, kernel: &Kernel) -> Result<UStatSeries> {
    let mu = kernel.lag_mean().ok_or_else(|| {
        Error::Config(format!("kernel {} has no lag mean", kernel.name()))
    })?;
    let sums = lag_mean_sums(&series.grid, mu.as_ref());
    let centered = series
        .grid
        .iter()
        .zip(&series.u)
        .zip(&sums)
        .map(|((&n, &u), &m)| u - m / pairs(n))
        .collect();
    Ok(UStatSeries {
        centered: Some(centered),
        ..series.clone()
    })
}

impl UStatSeries {
    /// CSV with columns `n,u,v,centered`; `centered` is empty when undefined.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,u,v,centered\n");
        for (idx, n) in self.grid.iter().enumerate() {
            let c = self
                .centered
                .as_ref()
                .map(|c| c[idx].to_string())
                .unwrap_or_default();
            out.push_str(&format!("{n},{},{},{c}\n", self.u[idx], self.v[idx]));
        }
        out
    }
}

/// Exact-arithmetic U and V: every kernel value is converted to the
/// rational it represents, then summed without rounding.
pub fn exact_u_v(path: &SamplePath, kernel: &Kernel, n: usize) -> Result<ExactUv> {
    check_n(path, n)?;
    let to_rat = |v: f64, i, j| {
        BigRational::from_float(check(v, i, j)?).ok_or(Error::NonFiniteIndex { i, j, value: v })
    };
    let mut off = BigRational::zero();
    let mut all = BigRational::zero();
    let mut diag = BigRational::zero();
    for j in 1..=n {
        for i in 1..=n {
            let v = to_rat(kernel.pair(path, i.min(j), i.max(j)), i, j)?;
            if i < j {
                off += &v;
            }
            if i == j {
                diag += &v;
            }
            all += v;
        }
    }
    let nn = BigRational::from_integer((n as u64).into());
    let pairs = &nn * (&nn - BigRational::from_integer(1.into())) / BigRational::from_integer(2.into());
    Ok(ExactUv {
        u: off / pairs,
        v: all / (&nn * &nn),
        diagonal: diag,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactUv {
    pub u: BigRational,
    pub v: BigRational,
    pub diagonal: BigRational,
}
