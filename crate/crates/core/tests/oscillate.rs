use ergodic_ustat::oscillate::{
    min_gap, oscillation_report, simulate_check, to_f64, IndexLadder, LagSet, Which,
};
use ergodic_ustat::Error;
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;

fn big(x: u64) -> BigUint {
    BigUint::from(x)
}

fn q(n: u64, d: u64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Membership table for the default ladder, built from the recursion
/// directly rather than through `IndexLadder`.
fn lag_table(max: usize) -> Vec<bool> {
    let mut table = vec![false; max + 1];
    let (mut n, mut nprime) = (2u64, 1u64);
    let mut level = 0u64;
    loop {
        // I_level = (N'_level, N_{level+1}]
        for k in nprime + 1..=n {
            if k as usize <= max {
                table[k as usize] = true;
            }
        }
        level += 1;
        nprime = level.max(2) * n;
        if nprime as usize > max {
            return table;
        }
        n = (1u64 << level) * nprime;
    }
}

#[test]
fn closed_form_matches_pair_enumeration_up_to_2000() {
    let lags = LagSet::default_set(5).unwrap();
    let table = lag_table(2000);
    // running pair count, one new row of pairs (i, n) per step
    let mut brute = 0u64;
    for n in 2..=2000usize {
        brute += (1..n).filter(|&i| table[n - i]).count() as u64;
        let exact = lags.exact_sum(&big(n as u64)).unwrap();
        assert_eq!(exact.s, big(brute), "n = {n}");
    }
}

#[test]
fn default_ladder_first_levels() {
    let l = IndexLadder::default_ladder(4).unwrap();
    let ns: Vec<BigUint> = (1..=4).map(|i| l.n(i).clone()).collect();
    let nps: Vec<BigUint> = (0..=4).map(|i| l.nprime(i).clone()).collect();
    assert_eq!(ns, [2u64, 8, 64, 1536].map(big));
    assert_eq!(nps, [1u64, 4, 16, 192, 6144].map(big));
}

#[test]
fn decomposition_is_exact_and_a_is_bounded() {
    let lags = LagSet::default_set(12).unwrap();
    for l in 3..=12 {
        let ab = lags.ab_decomposition(l).unwrap();
        let full = lags.exact_sum(lags.ladder().n(l)).unwrap().paper_norm;
        assert_eq!(&ab.a + &ab.b, full, "ℓ = {l}");
        assert!(ab.a <= ab.a_bound, "ℓ = {l}");
        // B counts pairs with lag in (N'_{ℓ-1}, N_ℓ], a triangle of side
        // N_ℓ - N'_{ℓ-1} - 1
        let nl = lags.ladder().n(l);
        let side = nl - lags.ladder().nprime(l - 1) - 1u32;
        let tri = &side * (&side + 1u32) / 2u32;
        let b = BigRational::new(tri.into(), (nl * (nl - 1u32)).into());
        assert_eq!(ab.b, b, "ℓ = {l}");
    }
}

#[test]
fn a_vanishes_and_b_approaches_one_half() {
    let lags = LagSet::default_set(12).unwrap();
    let mut prev_a: Option<BigRational> = None;
    for l in 4..=12 {
        let ab = lags.ab_decomposition(l).unwrap();
        if let Some(p) = &prev_a {
            assert!(ab.a < *p, "A not decreasing at ℓ = {l}");
        }
        prev_a = Some(ab.a.clone());
    }
    let ab = lags.ab_decomposition(12).unwrap();
    let half = q(1, 2);
    assert!(to_f64(&(&half - &ab.b)).abs() <= 0.01);
    assert!(to_f64(&ab.a) <= 1e-3);
}

#[test]
fn twelve_level_report() {
    let lags = LagSet::default_set(12).unwrap();
    let rows = oscillation_report(&lags).unwrap();
    assert_eq!(rows.len(), 24);
    let at = |l, w| &rows.iter().find(|r| r.level == l && r.which == w).unwrap().sum;
    let top = &at(12, Which::N).paper_norm;
    assert!(*top >= q(49, 100) && *top <= q(51, 100), "{}", to_f64(top));
    // At N'_ℓ = ℓ·N_ℓ the interval I_{ℓ-1} still lies below the index, so the
    // value behaves like 1/ℓ - 1/(2ℓ²) and decays only harmonically.
    for l in 6..=12usize {
        let v = to_f64(&at(l, Which::NPrime).paper_norm);
        let lf = l as f64;
        let approx = 1.0 / lf - 1.0 / (2.0 * lf * lf);
        assert!((v - approx).abs() <= 0.05 * approx, "ℓ = {l}: {v} vs {approx}");
    }
    let bottom = to_f64(&at(12, Which::NPrime).paper_norm);
    assert!((0.0798..0.0799).contains(&bottom), "{bottom}");
    // limsup - liminf over ℓ in [8, 12]
    let hi = (8..=12).map(|l| at(l, Which::N).paper_norm.clone()).max().unwrap();
    let lo = (8..=12).map(|l| at(l, Which::NPrime).paper_norm.clone()).min().unwrap();
    assert!(&hi - &lo >= q(4, 10));
    let gap = min_gap(&rows, 10..=12).unwrap();
    assert!(gap >= q(4, 10), "{}", to_f64(&gap));
    // the U-statistic is twice the pair-count normalization
    for r in &rows {
        assert_eq!(r.sum.u_norm, &r.sum.paper_norm * BigRational::from_integer(2.into()));
        assert!(r.sum.u_norm <= BigRational::one());
    }
}

#[test]
fn a_wider_ladder_pushes_the_lower_subsequence_below_one_percent() {
    // N'_ℓ = 128·N_ℓ keeps every invariant and leaves I_{ℓ-1} a 1/128 share
    let mut n = vec![big(2)];
    let mut nprime = vec![big(1)];
    for l in 1..=12u32 {
        let np = n.last().unwrap() * 128u32;
        nprime.push(np.clone());
        if l < 12 {
            n.push(np << l);
        }
    }
    let lags = LagSet::new(IndexLadder::new(n, nprime).unwrap());
    let rows = oscillation_report(&lags).unwrap();
    let last = |w| &rows.iter().rev().find(|r| r.which == w).unwrap().sum.paper_norm;
    assert!(*last(Which::NPrime) <= q(1, 100), "{}", to_f64(last(Which::NPrime)));
    assert!(*last(Which::N) >= q(49, 100));
}

#[test]
fn membership_outside_the_decided_range() {
    let lags = LagSet::default_set(3).unwrap();
    assert_eq!(lags.limit(), &big(192));
    assert!(matches!(lags.contains_u64(193), Err(Error::Range(_))));
    assert!(matches!(lags.contains_u64(0), Err(Error::Domain(_))));
    assert_eq!(lags.contains_small(193), None);
    assert!(matches!(lags.exact_sum(&big(193)), Err(Error::Range(_))));
    assert!(matches!(lags.exact_sum(&big(1)), Err(Error::Precondition(_))));
    let table = lag_table(192);
    for k in 1..=192u64 {
        assert_eq!(lags.contains_u64(k).unwrap(), table[k as usize], "k = {k}");
    }
}

#[test]
fn simulation_reproduces_the_lag_indicator() {
    let lags = LagSet::default_set(6).unwrap();
    for seed in 0..10 {
        let check = simulate_check(64, seed, &lags, 128).unwrap();
        assert!(check.is_clean(), "seed {seed}: {:?}", check.mismatches.first());
        assert_eq!(check.u_simulated, check.u_exact);
    }
}

#[test]
fn ladder_violations_are_listed() {
    let bigs = |v: &[u64]| v.iter().map(|&x| big(x)).collect::<Vec<_>>();
    // N'_1 = N_1
    let v = IndexLadder::validate(&bigs(&[2, 8, 64]), &bigs(&[1, 2, 16, 192]));
    assert!(v.iter().any(|e| e.to_string() == "N_ℓ < N'_ℓ fails at ℓ=1"), "{v:?}");
    // N'_3 = 2·N_3
    let v = IndexLadder::validate(&bigs(&[2, 8, 64, 1536]), &bigs(&[1, 4, 16, 128, 6144]));
    assert!(v.iter().any(|e| e.to_string() == "N'_ℓ ≥ ℓ·N_ℓ fails at ℓ=3"), "{v:?}");
    let default = IndexLadder::default_ladder(12).unwrap();
    let back = IndexLadder::from_json(&default.to_json()).unwrap();
    assert_eq!(back, default);
}
