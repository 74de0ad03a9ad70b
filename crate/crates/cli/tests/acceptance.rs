//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! Closed-form expectations use statrs' gamma function, independent of the
//! library's own implementation.

use statrs::function::gamma::gamma;
use std::process::Command;
use std::time::{Duration, Instant};
use vofrac::identities::{green_sides, ibp_sides, verify_green, verify_ibp};
use vofrac::operators::evaluate;
use vofrac::quadrature::OuterRule;
use vofrac::specialfn::gamma_lower_bound_slack;
use vofrac::variational::{
    first_variation, functional_eval, green_transformed_variation, mode_fn, ritz_solve, BoundaryData, Lagrangian,
    Problem, RitzOptions,
};
use vofrac::{BoundMode, Interval, OperatorKind, QuadConfig, Rect2, SmoothFn1, SmoothFn2, VariableOrder};
use vofrac_cli::instances;

type Outcome = Result<String, String>;

/// Name, check and runtime limit in seconds.
type Criterion = (&'static str, fn() -> Outcome, u64);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn lib<T>(r: vofrac::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn samko_ross() -> Outcome {
    let iv = Interval::unit();
    let order = lib(VariableOrder::of_t(|t| (1.0 + t) / 4.0, iv, 2, BoundMode::Plain))?;
    let cfg = QuadConfig::default();
    let mut worst = 0.0f64;
    for g in [1.0, 2.0, 3.0] {
        let f = SmoothFn1::monomial(0.0, g);
        for i in 1..=20 {
            let t = i as f64 / 20.0;
            let a = (1.0 + t) / 4.0;
            let exact = gamma(g + 1.0) * t.powf(g + a) / gamma(g + a + 1.0);
            let got = lib(evaluate(OperatorKind::IntegralLeft, &f, &order, iv, t, &cfg))?;
            worst = worst.max((got - exact).abs() / exact);
        }
    }
    check(worst <= 1e-8, format!("max relative error {worst:.2e} (tol 1e-8)"))
}

/// `(t−a)^γ` on the left and `(b−t)^γ` on the right of `[0.5, 2]`, for γ = 0..3.
fn constant_order() -> Outcome {
    let iv = Interval::new(0.5, 2.0).unwrap();
    let cfg = QuadConfig::default();
    let (mut smooth, mut rl) = (0.0f64, 0.0f64);
    for alpha in [0.25, 0.5, 0.75] {
        let order = lib(VariableOrder::constant(alpha, iv))?;
        for g in 0..=3 {
            let gf = g as f64;
            let left = SmoothFn1::monomial(iv.a, gf);
            // (b − τ)^γ = (−1)^γ (τ − b)^γ
            let sign = if g % 2 == 0 { 1.0 } else { -1.0 };
            let right = SmoothFn1::new(move |x: f64| sign * (x - 2.0).powi(g)).with_derivative(move |x: f64| {
                if g == 0 {
                    0.0
                } else {
                    sign * gf * (x - 2.0).powi(g - 1)
                }
            });
            for i in 1..8 {
                let t = iv.lerp(i as f64 / 8.0);
                for kind in OperatorKind::ALL {
                    let (f, x) = match kind.side() {
                        vofrac::Side::Left => (&left, t - iv.a),
                        vofrac::Side::Right => (&right, iv.b - t),
                    };
                    let exact = match kind {
                        OperatorKind::IntegralLeft | OperatorKind::IntegralRight => {
                            gamma(gf + 1.0) * x.powf(gf + alpha) / gamma(gf + 1.0 + alpha)
                        }
                        OperatorKind::CaputoLeft | OperatorKind::CaputoRight if g == 0 => 0.0,
                        _ => gamma(gf + 1.0) * x.powf(gf - alpha) / gamma(gf + 1.0 - alpha),
                    };
                    let got = lib(evaluate(kind, f, &order, iv, t, &cfg))?;
                    let err = (got - exact).abs() / exact.abs().max(1.0);
                    match kind {
                        OperatorKind::RlLeft | OperatorKind::RlRight => rl = rl.max(err),
                        _ => smooth = smooth.max(err),
                    }
                }
            }
        }
    }
    check(
        smooth <= 1e-8 && rl <= 1e-6,
        format!("integrals/Caputo {smooth:.2e} (tol 1e-8), RL derivatives {rl:.2e} (tol 1e-6)"),
    )
}

/// The residual must at least halve from (16, 16) to (32, 32) unless it is
/// already below 1e-9.
fn halves(coarse: f64, fine: f64) -> bool {
    fine <= (coarse / 2.0).max(1e-9)
}

fn integration_by_parts() -> Outcome {
    let cfg = QuadConfig::default();
    let mut parts = Vec::new();
    let mut ok = true;
    for seed in 0..5 {
        let inst = lib(instances::ibp_instance(seed))?;
        let rep = lib(verify_ibp(&inst, 24, &cfg, 1e-5))?;
        let r = |n: usize| -> Result<f64, String> {
            let (l, r) = lib(ibp_sides(&inst, OuterRule::new(n), &cfg.with_panels(n)))?;
            Ok((l - r).abs())
        };
        let (r16, r32) = (r(16)?, r(32)?);
        ok &= rep.converged && halves(r16, r32);
        parts.push(format!("{:.1e} [{r16:.1e}->{r32:.1e}]", rep.residual.abs()));
    }
    check(ok, format!("residuals at 24 [16->32]: {}", parts.join(", ")))
}

fn green_formula() -> Outcome {
    let cfg = QuadConfig::default();
    let mut parts = Vec::new();
    let mut ok = true;
    for seed in 0..5 {
        let inst = lib(instances::green_instance(seed, true))?;
        let rep = lib(verify_green(&inst, 20, &cfg, 1e-4))?;
        let r = |n: usize| -> Result<f64, String> {
            let s = lib(green_sides(&inst, OuterRule::new(n), &cfg.with_panels(n)))?;
            Ok((s.lhs - s.rhs()).abs())
        };
        let (r16, r32) = (r(16)?, r(32)?);
        ok &= rep.converged && halves(r16, r32);
        parts.push(format!("{:.1e} [{r16:.1e}->{r32:.1e}]", rep.residual.abs()));
    }
    let mut contour = 0.0f64;
    for seed in 0..5 {
        let s = lib(green_sides(
            &lib(instances::green_instance(seed, false))?,
            OuterRule::new(20),
            &cfg,
        ))?;
        contour = contour.max(s.contour.abs());
    }
    ok &= contour > 1e-3;
    check(
        ok,
        format!(
            "residuals at 20 [16->32]: {}; largest contour term with free boundary {contour:.3}",
            parts.join(", ")
        ),
    )
}

fn gamma_inequality() -> Outcome {
    let (mut lib_min, mut oracle_min) = (f64::INFINITY, f64::INFINITY);
    for i in 0..=1000 {
        let x = i as f64 / 1000.0;
        lib_min = lib_min.min(gamma_lower_bound_slack(x));
        oracle_min = oracle_min.min(gamma(x + 1.0) - (x * x + 1.0) / (x + 1.0));
    }
    check(
        lib_min >= -1e-12 && oracle_min >= -1e-12,
        format!("min slack {lib_min:.2e} (independent gamma: {oracle_min:.2e})"),
    )
}

fn first_variation_replay() -> Outcome {
    let cfg = QuadConfig::default();
    let grid = 12;
    let mut parts = Vec::new();
    let mut ok = true;
    for seed in 0..3 {
        let c = lib(instances::variation_case(seed))?;
        let fv = lib(first_variation(&c.problem, &c.u, &c.eta, grid, &cfg))?;
        let eps = 1e-5;
        let jp = lib(functional_eval(&c.problem, &c.u.add_scaled(&c.eta, eps), grid, &cfg))?;
        let jm = lib(functional_eval(&c.problem, &c.u.add_scaled(&c.eta, -eps), grid, &cfg))?;
        let cd_rel = (fv - (jp - jm) / (2.0 * eps)).abs() / fv.abs();
        let gt = lib(green_transformed_variation(&c.problem, &c.u, &c.eta, grid, &cfg))?;
        let bridge = (fv - gt).abs();
        ok &= cd_rel <= 1e-6 && bridge <= 1e-4;
        parts.push(format!("dJ={fv:.6} cd {cd_rel:.1e} green {bridge:.1e}"));
    }
    check(ok, parts.join("; "))
}

fn ritz_case(psi: &SmoothFn2) -> Result<(bool, String), String> {
    let a = lib(VariableOrder::constant(0.4, Interval::unit()))?;
    let p = lib(Problem::new(Lagrangian::quadratic(1.0), a.clone(), a, Rect2::unit()))?;
    let bd = lib(BoundaryData::trace_of(psi, p.rect))?;
    let solve = |n| {
        let opts = RitzOptions {
            n_modes: n,
            ..Default::default()
        };
        lib(ritz_solve(&p, &bd, &opts)).map(|s| (s, opts))
    };
    let (s4, opts) = solve(4)?;
    let r = &s4.report;
    let u = s4.expansion.to_fn();
    let mut worst = 0.0f64;
    for (k, m) in s4.expansion.modes() {
        let v = lib(first_variation(
            &p,
            &u,
            &mode_fn(k, m, p.rect),
            opts.outer_grid,
            &opts.cfg,
        ))?;
        worst = worst.max(v.abs());
    }
    let (el2, el6) = (solve(2)?.0.report.el_residual_l2, solve(6)?.0.report.el_residual_l2);
    let ok = r.gradient_norm <= 1e-7 && r.iterations <= 500 && worst <= 1e-6 && el6 <= el2;
    Ok((
        ok,
        format!(
            "|g|={:.1e} in {} iterations, max |dJ(mode)|={worst:.1e}, el_l2 n=2 {el2:.4} n=6 {el6:.4}",
            r.gradient_norm, r.iterations
        ),
    ))
}

/// The criterion's instance has zero boundary data, where the minimizer is
/// exactly zero; the same checks also run with boundary data `1 + t1 t2`.
fn ritz_stationarity() -> Outcome {
    let (ok0, d0) = ritz_case(&SmoothFn2::zero())?;
    let (ok1, d1) = ritz_case(&SmoothFn2::polynomial(vec![vec![1.0], vec![0.0, 1.0]]))?;
    check(ok0 && ok1, format!("psi=0: {d0}; psi=1+t1*t2: {d1}"))
}

fn reflection_duality() -> Outcome {
    let cfg = QuadConfig::default();
    let mut rng = instances::rng(7);
    let (mut smooth, mut rl) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let c = lib(instances::reflection_case(&mut rng))?;
        let (fr, or) = (c.f.reflected(c.interval), c.order.reflected());
        for kind in OperatorKind::ALL {
            for i in 1..8 {
                let t = c.interval.lerp(i as f64 / 8.0);
                let direct = lib(evaluate(kind, &c.f, &c.order, c.interval, t, &cfg))?;
                let mirrored = lib(evaluate(
                    kind.mirror(),
                    &fr,
                    &or,
                    c.interval,
                    c.interval.reflect(t),
                    &cfg,
                ))?;
                let err = (direct - mirrored).abs() / direct.abs().max(1.0);
                match kind {
                    OperatorKind::RlLeft | OperatorKind::RlRight => rl = rl.max(err),
                    _ => smooth = smooth.max(err),
                }
            }
        }
    }
    check(
        smooth <= 1e-10 && rl <= 1e-8,
        format!("integrals/Caputo {smooth:.2e} (tol 1e-10), RL derivatives {rl:.2e} (tol 1e-8)"),
    )
}

fn selftest_output(threads: &str) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_vofrac"))
        .args(["selftest", "--threads", threads])
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("selftest --threads {threads} exited with {}", out.status));
    }
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let (one, eight) = (selftest_output("1")?, selftest_output("8")?);
    check(
        one == eight,
        format!("{} bytes, identical: {}", one.len(), one == eight),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("Samko-Ross oracle", samko_ross, 1),
        ("constant-order reductions", constant_order, 5),
        ("integration-by-parts residual", integration_by_parts, 60),
        ("Green-formula residual", green_formula, 120),
        ("gamma lower bound", gamma_inequality, 60),
        ("first-variation replay", first_variation_replay, 120),
        ("Ritz stationarity", ritz_stationarity, 600),
        ("reflection duality", reflection_duality, 60),
        ("selftest determinism", determinism, 120),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*limit);
        let (pass, detail) = match outcome {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        failed += usize::from(!pass);
        println!(
            "{} {}. {name}: {detail} [{:.2}s, limit {limit}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
