use ergodic_ustat::centered;
use ergodic_ustat::kernel::Kernel;
use ergodic_ustat::processes::{generate, ProcessSpec};
use ergodic_ustat::stats::{estimate, split_seed};
use ergodic_ustat::ustat::{center, diagonal_sum, exact_u_v, u_naive, u_series, v_plugin};
use num_rational::BigRational;
use proptest::prelude::*;

fn builtins() -> Vec<Kernel> {
    vec![
        Kernel::constant(0.75),
        Kernel::product(),
        Kernel::centered_product(),
        Kernel::abs_diff(),
        Kernel::cos_diff(),
    ]
}

fn ulps_apart(a: f64, b: f64) -> u64 {
    if a == b {
        return 0;
    }
    let key = |x: f64| {
        let bits = x.to_bits() as i64;
        if bits < 0 { i64::MIN - bits } else { bits }
    };
    key(a).abs_diff(key(b))
}

#[test]
fn series_matches_naive_on_every_prefix() {
    let path = generate(ProcessSpec::DoublingMap, 200, 1).unwrap();
    let grid: Vec<usize> = (2..=200).collect();
    for kernel in builtins() {
        let series = u_series(&path, &kernel, &grid).unwrap();
        for (&n, &u) in grid.iter().zip(&series.u) {
            assert_eq!(u, u_naive(&path, &kernel, n).unwrap(), "{} n = {n}", kernel.name());
        }
    }
}

#[test]
fn series_matches_naive_on_sparse_grids_and_other_processes() {
    for spec in [ProcessSpec::IidUniform, ProcessSpec::GaussianAr1 { rho: 0.5 }, ProcessSpec::Rotation { alpha: None }] {
        let path = generate(spec, 700, 4).unwrap();
        let grid = [2, 3, 17, 64, 255, 700];
        let kernel = Kernel::product();
        let series = u_series(&path, &kernel, &grid).unwrap();
        for (&n, &u) in grid.iter().zip(&series.u) {
            assert_eq!(u, u_naive(&path, &kernel, n).unwrap(), "{spec:?} n = {n}");
        }
    }
}

#[test]
fn u_v_identity_in_floating_point() {
    let path = generate(ProcessSpec::DoublingMap, 50, 2).unwrap();
    let n = 50;
    for kernel in builtins() {
        let u = u_naive(&path, &kernel, n).unwrap();
        let v = v_plugin(&path, &kernel, n).unwrap();
        let d = diagonal_sum(&path, &kernel, n).unwrap();
        let nf = n as f64;
        // n(n-1) U = n² V - D, rearranged for V
        let v_from_u = (nf * (nf - 1.0) * u + d) / (nf * nf);
        assert!(ulps_apart(v, v_from_u) <= 8, "{}: {v} vs {v_from_u}", kernel.name());
        let series = u_series(&path, &kernel, &[n]).unwrap();
        assert!(ulps_apart(series.v[0], v) <= 8, "{}", kernel.name());
    }
}

#[test]
fn u_v_identity_in_exact_arithmetic() {
    let path = generate(ProcessSpec::IidUniform, 40, 3).unwrap();
    let n = 40u64;
    for kernel in builtins() {
        let e = exact_u_v(&path, &kernel, n as usize).unwrap();
        let nn = BigRational::from_integer(n.into());
        let one = BigRational::from_integer(1.into());
        assert_eq!(&nn * (&nn - &one) * &e.u, &nn * &nn * &e.v - &e.diagonal, "{}", kernel.name());
    }
}

#[test]
fn kernels_are_symmetric() {
    let path = generate(ProcessSpec::IidUniform, 20_000, 5).unwrap();
    for kernel in builtins() {
        for k in 0..10_000 {
            let (x, y) = (path.values[2 * k], path.values[2 * k + 1]);
            assert_eq!(kernel.evaluate(x, y).unwrap(), kernel.evaluate(y, x).unwrap(), "{}", kernel.name());
        }
    }
}

#[test]
fn constant_kernel_is_a_fixed_point() {
    let path = generate(ProcessSpec::Rotation { alpha: None }, 300, 0).unwrap();
    let k = Kernel::constant(2.0);
    let s = u_series(&path, &k, &[2, 10, 300]).unwrap();
    assert!(s.u.iter().all(|&u| u == 2.0));
    let c = center(&s, &k).unwrap();
    assert!(c.centered.unwrap().iter().all(|&x| x == 0.0));
}

#[test]
fn centering_removes_the_pair_mean() {
    // the weighted digit kernel has a lag-dependent mean a_k/2; the centered
    // statistic averages to zero across seeds
    let kernel = centered::kernel();
    let n = 256;
    let values: Vec<f64> = (0..200)
        .map(|r| {
            let path = generate(ProcessSpec::DoublingMap, n, split_seed(3, r)).unwrap();
            let s = center(&u_series(&path, &kernel, &[n]).unwrap(), &kernel).unwrap();
            s.centered.unwrap()[0]
        })
        .collect();
    let e = estimate(&values);
    assert!(e.mean.abs() <= 3.0 * e.stderr, "{e:?}");
}

#[test]
fn centered_series_is_y_over_the_pair_count() {
    // Y_n is the centered pair sum divided by C(n, 2)
    let kernel = centered::kernel();
    for seed in 0..5 {
        let path = generate(ProcessSpec::DoublingMap, 128, seed).unwrap();
        let s = center(&u_series(&path, &kernel, &[16, 64, 128]).unwrap(), &kernel).unwrap();
        let origin = path.origin.as_ref().unwrap();
        for (&n, c) in s.grid.iter().zip(s.centered.unwrap()) {
            let y = centered::y_n(origin, n).unwrap();
            assert!((c - y).abs() <= 1e-12 * (1.0 + y.abs()), "n = {n}: {c} vs {y}");
        }
    }
}

proptest! {
    #[test]
    fn u_lies_within_the_kernel_bound(seed in any::<u64>(), n in 2usize..120) {
        let path = generate(ProcessSpec::IidUniform, n, seed).unwrap();
        for kernel in builtins() {
            let Some(b) = kernel.bound() else { continue };
            let s = u_series(&path, &kernel, &[n]).unwrap();
            prop_assert!(s.u[0].abs() <= b + 1e-12);
            // diagonal-removal consistency: |V - U| ≤ 2B/n
            prop_assert!((s.v[0] - s.u[0]).abs() <= 2.0 * b / n as f64 + 1e-12);
        }
    }
}
