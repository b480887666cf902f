//! One function per subcommand. Each returns the report table, its built-in
//! assertions and any companion files; nothing here depends on wall time or
//! thread count.

use ergodic_ustat::centered;
use ergodic_ustat::kernel::Kernel;
use ergodic_ustat::lab::{
    as_convergence_trace, geometric_grid, l1_error_curve, resolve_target, weak_convergence_panel,
    ConvergenceExperiment, TestFunction,
};
use ergodic_ustat::oscillate::{min_gap, oscillation_report, to_f64, IndexLadder, LadderFile, LagSet, Which};
use ergodic_ustat::processes::{generate, Marginal, ProcessSpec};
use ergodic_ustat::report::{decimal_string, fraction_string, Assertion, ExperimentReport, Table};
use ergodic_ustat::ustat::{diagonal_sum, exact_u_v, u_naive, u_series, v_plugin};
use num_rational::BigRational;
use serde_json::{json, Value};

use crate::{
    EngineArgs, Example1Args, Example2Args, Example2Mode, Outcome, ProcessArgs, TheoremArgs,
    UsageError, ValidateArgs, WeakArgs,
};

type Result<T> = std::result::Result<T, UsageError>;

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

fn config<T: serde::Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("argument structs serialize")
}

fn outcome(report: ExperimentReport, assertions: Vec<Assertion>) -> Outcome {
    Outcome {
        report,
        assertions,
        extras: Vec::new(),
        summary: None,
    }
}

fn read(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn parse_ladder_file(text: &str) -> Result<(Vec<num_bigint::BigUint>, Vec<num_bigint::BigUint>)> {
    let file: LadderFile = serde_json::from_str(text).map_err(|e| usage(format!("bad ladder file: {e}")))?;
    Ok(file.parse()?)
}

pub fn process_spec(p: &ProcessArgs) -> Result<ProcessSpec> {
    let mut spec = ProcessSpec::parse(&p.process)?;
    if let Some(r) = p.rho {
        match &mut spec {
            ProcessSpec::GaussianAr1 { rho } => *rho = r,
            other => return Err(usage(format!("--rho does not apply to {}", other.kind()))),
        }
    }
    if let Some(a) = p.alpha {
        match &mut spec {
            ProcessSpec::Rotation { alpha } => *alpha = Some(a),
            other => return Err(usage(format!("--alpha does not apply to {}", other.kind()))),
        }
    }
    spec.validate()?;
    Ok(spec)
}

fn kernel_for(spec: ProcessSpec, name: &str) -> Result<Kernel> {
    Ok(Kernel::builtin(name, spec.marginal() == Marginal::Uniform)?)
}

pub fn example1(args: &Example1Args, seed: u64) -> Result<Outcome> {
    let lags = match &args.ladder_file {
        Some(path) => {
            let (n, nprime) = parse_ladder_file(&read(path)?)?;
            LagSet::new(IndexLadder::new(n, nprime)?)
        }
        None => LagSet::default_set(args.levels)?,
    };
    let levels = lags.ladder().levels();
    let rows = oscillation_report(&lags)?;
    let mut table = Table::new([
        "level", "n", "which", "S", "u_norm", "paper_norm", "u_norm_exact", "paper_norm_exact",
    ]);
    for r in &rows {
        table.push(vec![
            json!(r.level),
            json!(r.sum.n.to_string()),
            json!(r.which.to_string()),
            json!(r.sum.s.to_string()),
            json!(decimal_string(&r.sum.u_norm, 12)),
            json!(decimal_string(&r.sum.paper_norm, 12)),
            json!(fraction_string(&r.sum.u_norm)),
            json!(fraction_string(&r.sum.paper_norm)),
        ]);
    }

    let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
    let at = |w| &rows.iter().rev().find(|r| r.which == w).expect("non-empty report").sum.paper_norm;
    let (top, bottom) = (at(Which::N), at(Which::NPrime));
    let mut assertions = vec![
        Assertion::new(
            format!("paper_norm(N_{levels}) within 0.01 of 1/2"),
            (top - q(1, 2)) <= q(1, 100) && (q(1, 2) - top) <= q(1, 100),
            format!("value {}", decimal_string(top, 12)),
        ),
        Assertion::new(
            format!("paper_norm(N'_{levels}) within 0.01 of 0"),
            *bottom <= q(1, 100),
            format!("value {}", decimal_string(bottom, 12)),
        ),
    ];
    let mut ab_ok = true;
    let mut detail = String::from("checked levels 3..");
    for l in 3..=levels {
        let ab = lags.ab_decomposition(l)?;
        let full = lags.exact_sum(lags.ladder().n(l))?.paper_norm;
        if &ab.a + &ab.b != full || ab.a > ab.a_bound {
            ab_ok = false;
            detail = format!("fails at ℓ={l}");
            break;
        }
    }
    if ab_ok {
        detail.push_str(&levels.to_string());
    }
    assertions.push(Assertion::new("A_ℓ + B_ℓ exact and A_ℓ bounded", ab_ok, detail));

    let window = levels.saturating_sub(4).max(1)..=levels;
    let spread = {
        let hi = window.clone().filter_map(|l| rows.iter().find(|r| r.level == l && r.which == Which::N)).map(|r| to_f64(&r.sum.paper_norm)).fold(f64::NEG_INFINITY, f64::max);
        let lo = window.clone().filter_map(|l| rows.iter().find(|r| r.level == l && r.which == Which::NPrime)).map(|r| to_f64(&r.sum.paper_norm)).fold(f64::INFINITY, f64::min);
        hi - lo
    };
    let summary = json!({
        "levels": levels,
        "paper_norm_at_N_L": decimal_string(top, 12),
        "paper_norm_at_Nprime_L": decimal_string(bottom, 12),
        "levels_for_spread": [window.start(), window.end()],
        "limsup_minus_liminf": spread,
        "min_level_gap": min_gap(&rows, window).map(|g| decimal_string(&g, 12)),
    });
    Ok(Outcome {
        summary: Some(summary),
        ..outcome(ExperimentReport::new("example1", seed, config(args), table), assertions)
    })
}

pub fn example2(args: &Example2Args, seed: u64) -> Result<Outcome> {
    match args.mode {
        Example2Mode::Clt => {
            let s = centered::sample_distribution(args.n, args.reps, seed)?;
            let mut table = Table::new(["replicate", "value"]);
            for (r, v) in s.values.iter().enumerate() {
                table.push(vec![json!(r), json!(v)]);
            }
            let summary = json!({
                "n": s.n,
                "M": s.reps,
                "seed": s.seed,
                "mean": s.mean,
                "var": s.variance,
                "ks": s.ks,
                "ks_sample": s.ks_sample,
                "thresholds": s.thresholds,
                "mean_ok": s.mean_ok,
                "variance_ok": s.variance_ok,
                "ks_ok": s.ks_ok,
                "histogram": s.histogram,
            });
            let assertions = vec![
                Assertion::new("mean", s.mean_ok, format!("|{}| ≤ {}", s.mean, s.thresholds.mean_abs)),
                Assertion::new(
                    "variance",
                    s.variance_ok,
                    format!("|{} - 0.25| ≤ {}", s.variance, s.thresholds.variance_halfwidth),
                ),
                Assertion::new("ks", s.ks_ok, format!("{} ≤ {} on {} values", s.ks, s.thresholds.ks, s.ks_sample)),
            ];
            Ok(Outcome {
                report: ExperimentReport::new("example2", seed, config(args), table),
                assertions,
                extras: vec![(
                    "summary.json".into(),
                    serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n",
                )],
                summary: Some(summary),
            })
        }
        Example2Mode::Gap => {
            let g = centered::gap_statistic(args.n, args.reps, seed)?;
            let mut table = Table::new(["n", "exact_variance", "empirical_variance", "stderr"]);
            let mut ns: Vec<usize> = (3..=12).map(|e| 1usize << e).collect();
            if !ns.contains(&args.n) {
                ns.push(args.n);
                ns.sort_unstable();
            }
            let mut floor = f64::INFINITY;
            for &n in &ns {
                let exact = centered::gap_exact_variance(n);
                if n.is_power_of_two() && (8..=4096).contains(&n) {
                    floor = floor.min(exact);
                }
                let (emp, se) = if n == args.n {
                    (json!(g.empirical_variance), json!(g.variance_stderr))
                } else {
                    (Value::Null, Value::Null)
                };
                table.push(vec![json!(n), json!(exact), emp, se]);
            }
            let assertions = vec![
                Assertion::new("exact gap variance ≥ 0.05 for dyadic n in 8..4096", floor >= 0.05, format!("minimum {floor}")),
                Assertion::new(
                    format!("empirical variance at n={} within 3 standard errors", args.n),
                    g.within_three_se,
                    format!("{} vs {} (se {})", g.empirical_variance, g.exact_variance, g.variance_stderr),
                ),
            ];
            Ok(Outcome {
                summary: Some(serde_json::to_value(&g).expect("summary serializes")),
                ..outcome(ExperimentReport::new("example2", seed, config(args), table), assertions)
            })
        }
        Example2Mode::Mcleish => {
            if args.n < 2 {
                return Err(usage("--n must be at least 2"));
            }
            let quarter = BigRational::new(1.into(), 4.into());
            let mut table = Table::new(["n", "sum_squares", "max_abs"]);
            let mut bad = None;
            for n in 2..=args.n {
                let m = centered::mcleish_diagnostics(n)?;
                if m.sum_squares != quarter && bad.is_none() {
                    bad = Some(n);
                }
                table.push(vec![json!(n), json!(fraction_string(&m.sum_squares)), json!(m.max_abs)]);
            }
            let assertions = vec![Assertion::new(
                "sum of squares is exactly 1/4",
                bad.is_none(),
                bad.map_or_else(|| format!("n = 2..{}", args.n), |n| format!("fails at n={n}")),
            )];
            Ok(outcome(ExperimentReport::new("example2", seed, config(args), table), assertions))
        }
    }
}

fn experiment(args: &TheoremArgs, seed: u64) -> Result<ConvergenceExperiment> {
    let spec = process_spec(&args.process)?;
    let kernel = kernel_for(spec, &args.kernel)?;
    let target = match args.target {
        Some(t) => t,
        None => resolve_target(spec, &kernel, seed)?,
    };
    let n_grid = match &args.grid {
        Some(g) => g.clone(),
        None => geometric_grid(args.n, 12),
    };
    let exp = ConvergenceExperiment {
        spec,
        kernel,
        target,
        n_grid,
        reps: args.reps,
        seed,
    };
    exp.validate()?;
    Ok(exp)
}

pub fn theorem_as(args: &TheoremArgs, seed: u64) -> Result<Outcome> {
    let exp = experiment(args, seed)?;
    let trace = as_convergence_trace(&exp)?;
    let mut table = Table::new(["n", "replicate", "u", "error"]);
    for (r, traj) in trace.u.iter().enumerate() {
        for (g, &n) in trace.grid.iter().enumerate() {
            table.push(vec![json!(n), json!(r), json!(traj[g]), json!(trace.error(r, g))]);
        }
    }
    let fraction = trace.fraction_within(args.tol);
    let assertions = vec![Assertion::new(
        format!("|U_{} - target| ≤ {} in at least 95% of replicates", exp.n_max(), args.tol),
        fraction >= 0.95,
        format!("fraction {fraction}"),
    )];
    Ok(Outcome {
        summary: Some(json!({ "target": exp.target, "fraction_within": fraction, "approximate_dynamics": exp.spec.is_approximate() })),
        ..outcome(ExperimentReport::new("theorem-as", seed, config(args), table), assertions)
    })
}

pub fn theorem_l1(args: &TheoremArgs, seed: u64) -> Result<Outcome> {
    let exp = experiment(args, seed)?;
    let curve = l1_error_curve(&exp)?;
    let mut table = Table::new(["n", "replicate", "u", "error", "stderr"]);
    for (&n, e) in curve.grid.iter().zip(&curve.errors) {
        table.push(vec![json!(n), json!("mean"), Value::Null, json!(e.mean), json!(e.stderr)]);
    }
    let last = curve.final_error();
    let assertions = vec![
        Assertion::new(
            "final grid point minimizes the L1 curve up to one standard error",
            curve.final_is_minimal(),
            format!("final {} ± {}", last.mean, last.stderr),
        ),
        Assertion::new(
            format!("E|U_{} - target| ≤ {}", exp.n_max(), args.tol),
            last.mean <= args.tol,
            format!("final {}", last.mean),
        ),
    ];
    Ok(Outcome {
        summary: Some(json!({ "target": exp.target, "final_error": last.mean, "final_stderr": last.stderr })),
        ..outcome(ExperimentReport::new("theorem-l1", seed, config(args), table), assertions)
    })
}

fn describe(f: TestFunction) -> String {
    match f {
        TestFunction::Cos(m) => format!("cos(2π·{m}x)"),
        TestFunction::Sin(m) => format!("sin(2π·{m}x)"),
    }
}

pub fn weak_conv(args: &WeakArgs, seed: u64) -> Result<Outcome> {
    let spec = process_spec(&args.process)?;
    let rows = weak_convergence_panel(spec, &args.grid, seed)?;
    let mut table = Table::new(["n", "max_deviation", "worst"]);
    for r in &rows {
        table.push(vec![json!(r.n), json!(r.max_deviation), json!(describe(r.worst))]);
    }
    let last = rows.last().expect("grid is non-empty");
    let assertions = vec![Assertion::new(
        format!("max_i |∫f_i dF_n| ≤ {} at n={}", args.tol, last.n),
        last.max_deviation <= args.tol,
        format!("{} ({})", last.max_deviation, describe(last.worst)),
    )];
    Ok(outcome(ExperimentReport::new("weak-conv", seed, config(args), table), assertions))
}

fn ulps_apart(a: f64, b: f64) -> u64 {
    if a == b {
        return 0;
    }
    let key = |x: f64| {
        let bits = x.to_bits() as i64;
        if bits < 0 {
            i64::MIN - bits
        } else {
            bits
        }
    };
    key(a).abs_diff(key(b))
}

/// Every prefix up to 500, geometric beyond: the naive side is cubic.
fn engine_grid(n: usize) -> Vec<usize> {
    let mut grid: Vec<usize> = (2..=n.min(500)).collect();
    if n > 500 {
        grid.extend(geometric_grid(n, 24).into_iter().filter(|&m| m > 500));
    }
    grid
}

pub fn engine_check(args: &EngineArgs, seed: u64) -> Result<Outcome> {
    const EXACT_N: usize = 60;
    let spec = process_spec(&args.process)?;
    if args.n < 2 {
        return Err(usage("--n must be at least 2"));
    }
    let names: Vec<String> = match &args.kernel {
        Some(k) => vec![k.clone()],
        None => ["constant:0.75", "product", "centered-product", "abs-diff", "cos-diff"].map(String::from).to_vec(),
    };
    let path = generate(spec, args.n, seed)?;
    let grid = engine_grid(args.n);
    let mut table = Table::new(["kernel", "grid_points", "series_mismatches", "uv_ulps", "exact_identity"]);
    let mut assertions = Vec::new();
    for name in &names {
        let kernel = kernel_for(spec, name)?;
        let series = u_series(&path, &kernel, &grid)?;
        let mut mismatches = 0usize;
        for (&n, &u) in grid.iter().zip(&series.u) {
            if u != u_naive(&path, &kernel, n)? {
                mismatches += 1;
            }
        }
        let n = args.n;
        let nf = n as f64;
        let u = u_naive(&path, &kernel, n)?;
        let v = v_plugin(&path, &kernel, n)?;
        let d = diagonal_sum(&path, &kernel, n)?;
        let ulps = ulps_apart(v, (nf * (nf - 1.0) * u + d) / (nf * nf));
        let m = n.min(EXACT_N);
        let e = exact_u_v(&path, &kernel, m)?;
        let mm = BigRational::from_integer((m as u64).into());
        let one = BigRational::from_integer(1.into());
        let exact_ok = &mm * (&mm - &one) * &e.u == &mm * &mm * &e.v - &e.diagonal;
        table.push(vec![json!(kernel.name()), json!(grid.len()), json!(mismatches), json!(ulps), json!(exact_ok)]);
        assertions.push(Assertion::new(
            format!("{}: series equals naive evaluation", kernel.name()),
            mismatches == 0,
            format!("{mismatches} of {} grid points differ", grid.len()),
        ));
        assertions.push(Assertion::new(
            format!("{}: U/V identity within 8 ulp", kernel.name()),
            ulps <= 8,
            format!("{ulps} ulp at n={n}"),
        ));
        assertions.push(Assertion::new(
            format!("{}: exact U/V identity", kernel.name()),
            exact_ok,
            format!("n={m}"),
        ));
    }
    Ok(outcome(ExperimentReport::new("engine-check", seed, config(args), table), assertions))
}

pub fn validate_ladder(args: &ValidateArgs, seed: u64) -> Result<Outcome> {
    let (n, nprime) = parse_ladder_file(&read(&args.path)?)?;
    let violations = IndexLadder::validate(&n, &nprime);
    let mut table = Table::new(["violation"]);
    for v in &violations {
        table.push(vec![json!(v.to_string())]);
    }
    let assertions = vec![Assertion::new(
        "ladder satisfies every invariant",
        violations.is_empty(),
        format!("{} violation(s)", violations.len()),
    )];
    Ok(outcome(ExperimentReport::new("validate-ladder", seed, config(args), table), assertions))
}
