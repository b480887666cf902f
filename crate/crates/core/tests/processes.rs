use ergodic_ustat::dyadic::FixedDigits;
use ergodic_ustat::kernel::Kernel;
use ergodic_ustat::processes::{generate, product_integral, ProcessSpec, SamplePath};
use ergodic_ustat::stats::{ks_two_sample, mean_variance, split_seed};
use ergodic_ustat::Error;

#[test]
fn iid_uniform_mean() {
    let p = generate(ProcessSpec::IidUniform, 10_000, 3).unwrap();
    let (m, _) = mean_variance(&p.values);
    assert!((m - 0.5).abs() <= 0.02, "mean {m}");
}

#[test]
fn doubling_orbit_of_three_eighths() {
    let p = SamplePath::from_digits(&FixedDigits(vec![0, 1, 1, 0]), 3, 8, 0).unwrap();
    let expected = [0.75, 0.5, 0.0];
    for (x, e) in p.values.iter().zip(expected) {
        assert!((x - e).abs() < 2f64.powi(-8));
    }
}

#[test]
fn doubling_values_are_shifted_approximations() {
    let p = generate(ProcessSpec::DoublingMap, 200, 11).unwrap();
    let origin = p.origin.as_ref().unwrap();
    assert!(origin.len() >= 264);
    for i in 1..=200u64 {
        use ergodic_ustat::dyadic::Digits;
        let exact = origin.shift(i).approx_f64(64).unwrap();
        assert_eq!(p.x(i as usize), exact);
        assert!((0.0..1.0).contains(&p.x(i as usize)));
    }
}

#[test]
fn ar1_autocorrelation_and_variance() {
    let p = generate(ProcessSpec::GaussianAr1 { rho: 0.5 }, 100_000, 5).unwrap();
    let (m, v) = mean_variance(&p.values);
    let n = p.values.len();
    let mut c = 0.0;
    for i in 0..n - 1 {
        c += (p.values[i] - m) * (p.values[i + 1] - m);
    }
    let rho_hat = c / (n - 1) as f64 / v;
    assert!((rho_hat - 0.5).abs() <= 0.02, "lag-1 autocorrelation {rho_hat}");
    // standard error of the variance of an AR(1) with ρ = 0.5 is about
    // sqrt(2(1+ρ²)/(1-ρ²)/n) ≈ 0.0058
    assert!((v - 1.0).abs() <= 3.0 * 0.0058, "variance {v}");
}

#[test]
fn generation_is_deterministic() {
    for spec in [
        ProcessSpec::DoublingMap,
        ProcessSpec::Rotation { alpha: None },
        ProcessSpec::Rotation { alpha: Some(0.3) },
        ProcessSpec::IidUniform,
        ProcessSpec::GaussianAr1 { rho: -0.4 },
    ] {
        let a = generate(spec, 500, 9).unwrap();
        let b = generate(spec, 500, 9).unwrap();
        assert_eq!(a.values, b.values, "{spec:?}");
        assert_ne!(a.values, generate(spec, 500, 10).unwrap().values);
    }
}

#[test]
fn rotation_steps_by_the_angle() {
    let p = generate(ProcessSpec::Rotation { alpha: Some(0.25) }, 8, 1).unwrap();
    for w in p.values.windows(2) {
        let step = (w[1] - w[0]).rem_euclid(1.0);
        assert!((step - 0.25).abs() < 1e-15);
    }
    let g = generate(ProcessSpec::Rotation { alpha: None }, 3, 1).unwrap();
    let step = (g.values[1] - g.values[0]).rem_euclid(1.0);
    assert!((step - 0.618_033_988_749_894_8).abs() < 1e-15);
}

#[test]
fn invalid_specs_are_configuration_errors() {
    for spec in [
        ProcessSpec::GaussianAr1 { rho: 1.0 },
        ProcessSpec::GaussianAr1 { rho: -1.5 },
        ProcessSpec::Rotation { alpha: Some(0.0) },
        ProcessSpec::Rotation { alpha: Some(1.2) },
    ] {
        assert!(matches!(generate(spec, 10, 0), Err(Error::Config(_))), "{spec:?}");
    }
    assert!(generate(ProcessSpec::IidUniform, 0, 0).is_err());
}

#[test]
fn spec_json() {
    let s: ProcessSpec = serde_json::from_str(r#"{"kind":"gaussian-ar1","rho":0.3}"#).unwrap();
    assert_eq!(s, ProcessSpec::GaussianAr1 { rho: 0.3 });
    let s: ProcessSpec = serde_json::from_str(r#"{"kind":"gaussian-ar1"}"#).unwrap();
    assert_eq!(s, ProcessSpec::GaussianAr1 { rho: 0.5 });
    let s: ProcessSpec = serde_json::from_str(r#"{"kind":"rotation"}"#).unwrap();
    assert_eq!(s, ProcessSpec::Rotation { alpha: None });
    assert!(serde_json::from_str::<ProcessSpec>(r#"{"kind":"gaussian-ar1","rho":2}"#).is_err());
    assert!(serde_json::from_str::<ProcessSpec>(r#"{"kind":"tent-map"}"#).is_err());
    assert!(serde_json::from_str::<ProcessSpec>(r#"{"kind":"iid-uniform","beta":1}"#).is_err());
    for spec in [
        ProcessSpec::DoublingMap,
        ProcessSpec::Rotation { alpha: Some(0.2) },
        ProcessSpec::GaussianAr1 { rho: 0.1 },
    ] {
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<ProcessSpec>(&text).unwrap(), spec);
    }
    assert_eq!(ProcessSpec::parse("doubling-map").unwrap(), ProcessSpec::DoublingMap);
    assert_eq!(
        ProcessSpec::parse(r#"{"kind":"rotation","alpha":0.5}"#).unwrap(),
        ProcessSpec::Rotation { alpha: Some(0.5) }
    );
}

#[test]
fn doubling_paths_are_stationary_across_seeds() {
    // (X_{k+1}, …, X_{k+m}) against (X_1, …, X_m) over M = 2000 replicates.
    // The 1% two-sample KS critical value at M = M' = 2000 is
    // 1.63·sqrt(2/2000) ≈ 0.0515.
    let (k, m, reps) = (37usize, 4usize, 2000u64);
    for offset in 0..m {
        let head: Vec<f64> = (0..reps)
            .map(|r| generate(ProcessSpec::DoublingMap, k + m, split_seed(1, r)).unwrap().values[offset])
            .collect();
        let tail: Vec<f64> = (0..reps)
            .map(|r| generate(ProcessSpec::DoublingMap, k + m, split_seed(1, r)).unwrap().values[k + offset])
            .collect();
        let d = ks_two_sample(&head, &tail);
        assert!(d < 0.0515, "offset {offset}: D = {d}");
    }
}

#[test]
fn product_integrals() {
    let one = product_integral(ProcessSpec::IidUniform, &Kernel::constant(1.0), 1000, 0).unwrap();
    assert_eq!((one.mean, one.stderr), (1.0, 0.0));
    let xy = product_integral(ProcessSpec::DoublingMap, &Kernel::product(), 100_000, 1).unwrap();
    assert!((xy.mean - 0.25).abs() <= 3.0 * xy.stderr, "{xy:?}");
    let cos = product_integral(ProcessSpec::IidUniform, &Kernel::cos_diff(), 100_000, 2).unwrap();
    assert!(cos.mean.abs() <= 3.0 * cos.stderr, "{cos:?}");
    let normal = product_integral(ProcessSpec::GaussianAr1 { rho: 0.5 }, &Kernel::product(), 100_000, 3).unwrap();
    assert!(normal.mean.abs() <= 3.0 * normal.stderr, "{normal:?}");
}

#[test]
fn product_integral_reports_the_bad_pair() {
    let k = Kernel::pointwise("log", |x, y| (x - y).ln());
    match product_integral(ProcessSpec::IidUniform, &k, 1000, 0) {
        Err(Error::NonFinitePoint { x, y, value }) => {
            assert!(x <= y);
            assert!(!value.is_finite());
        }
        other => panic!("expected a non-finite diagnostic, got {other:?}"),
    }
    let lag = Kernel::lag_only("lag", |_, _, _| 0.0);
    assert!(matches!(product_integral(ProcessSpec::IidUniform, &lag, 10, 0), Err(Error::Config(_))));
}
