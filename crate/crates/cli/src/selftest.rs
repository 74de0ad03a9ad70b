//! Bundled invariant suite behind `vofrac selftest`.
//!
//! Every check is deterministic for a given seed, and the rendered report
//! contains nothing that depends on timing or thread count.

use crate::instances;
use rand::RngExt;
use vofrac::identities::{green_sides, verify_green, verify_ibp};
use vofrac::operators::evaluate;
use vofrac::quadrature::OuterRule;
use vofrac::specialfn::{gamma, gamma_lower_bound_slack};
use vofrac::variational::{
    first_variation, functional_eval, ritz_solve, BoundaryData, Lagrangian, Problem, RitzOptions,
};
use vofrac::{BoundMode, Interval, OperatorKind, QuadConfig, Rect2, Result, SmoothFn1, VariableOrder};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type CheckFn = fn(u64) -> Result<(bool, String)>;

const SUITE: [(&str, CheckFn); 9] = [
    ("gamma_recurrence", gamma_recurrence),
    ("gamma_lower_bound", gamma_lower_bound),
    ("samko_ross_oracle", samko_ross),
    ("constant_order_closed_forms", constant_order),
    ("reflection_duality", reflection_duality),
    ("integration_by_parts", integration_by_parts),
    ("green_formula", green_formula),
    ("first_variation", first_variation_check),
    ("ritz_trivial_boundary", ritz_trivial),
];

pub fn run_suite(seed: u64) -> Vec<Check> {
    SUITE
        .iter()
        .map(|&(name, check)| match check(seed) {
            Ok((passed, detail)) => Check { name, passed, detail },
            Err(e) => Check {
                name,
                passed: false,
                detail: format!("error: {e}"),
            },
        })
        .collect()
}

pub fn render(checks: &[Check]) -> String {
    let mut s = String::new();
    for c in checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        s.push_str(&format!("{tag} {} {}\n", c.name, c.detail));
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    s.push_str(&format!("{passed}/{} checks passed\n", checks.len()));
    s
}

fn verdict(err: f64, tol: f64, what: &str) -> (bool, String) {
    (err <= tol, format!("{what}={err:.3e} tol={tol:.0e}"))
}

fn gamma_recurrence(seed: u64) -> Result<(bool, String)> {
    let mut rng = instances::rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let x = rng.random_range(0.05..12.0);
        let (a, b) = (gamma(x + 1.0)?, x * gamma(x)?);
        worst = worst.max((a - b).abs() / a.abs());
    }
    Ok(verdict(worst, 1e-13, "max_rel_err"))
}

fn gamma_lower_bound(_: u64) -> Result<(bool, String)> {
    let min = (0..=1000)
        .map(|i| gamma_lower_bound_slack(i as f64 / 1000.0))
        .fold(f64::INFINITY, f64::min);
    Ok((min >= -1e-12, format!("min_slack={min:.3e}")))
}

/// `I^{α(t)} τ^γ` with `α(t) = (1+t)/4` against `Γ(γ+1)t^{γ+α}/Γ(γ+α+1)`.
fn samko_ross(_: u64) -> Result<(bool, String)> {
    let iv = Interval::unit();
    let order = VariableOrder::of_t(|t| (1.0 + t) / 4.0, iv, 2, BoundMode::Plain)?;
    let cfg = QuadConfig::default();
    let mut worst = 0.0f64;
    for g in [1.0, 2.0, 3.0] {
        let f = SmoothFn1::monomial(0.0, g);
        for i in 1..=20 {
            let t = i as f64 / 20.0;
            let a = (1.0 + t) / 4.0;
            let exact = gamma(g + 1.0)? * t.powf(g + a) / gamma(g + a + 1.0)?;
            let got = evaluate(OperatorKind::IntegralLeft, &f, &order, iv, t, &cfg)?;
            worst = worst.max((got - exact).abs() / exact.abs());
        }
    }
    Ok(verdict(worst, 1e-8, "max_rel_err"))
}

/// Classical constant-order results for `(t−a)^2` (left) and `(b−t)^2`
/// (right) on the unit interval.
fn constant_order(_: u64) -> Result<(bool, String)> {
    let iv = Interval::unit();
    let cfg = QuadConfig::default();
    let left = SmoothFn1::monomial(0.0, 2.0);
    let right = SmoothFn1::polynomial(vec![1.0, -2.0, 1.0]);
    let (mut smooth, mut rl) = (0.0f64, 0.0f64);
    for alpha in [0.25, 0.5, 0.75] {
        let order = VariableOrder::constant(alpha, iv)?;
        for t in [0.3, 0.55, 0.8] {
            for kind in OperatorKind::ALL {
                let (f, x): (&SmoothFn1, f64) = match kind.side() {
                    vofrac::Side::Left => (&left, t),
                    vofrac::Side::Right => (&right, 1.0 - t),
                };
                let beta = match kind {
                    OperatorKind::IntegralLeft | OperatorKind::IntegralRight => alpha,
                    _ => -alpha,
                };
                let exact = 2.0 * x.powf(2.0 + beta) / gamma(3.0 + beta)?;
                let rel = (evaluate(kind, f, &order, iv, t, &cfg)? - exact).abs() / exact.abs();
                match kind {
                    OperatorKind::RlLeft | OperatorKind::RlRight => rl = rl.max(rel),
                    _ => smooth = smooth.max(rel),
                }
            }
        }
    }
    Ok((
        smooth <= 1e-8 && rl <= 1e-6,
        format!("integral_caputo_rel={smooth:.3e} tol=1e-8 rl_rel={rl:.3e} tol=1e-6"),
    ))
}

fn reflection_duality(seed: u64) -> Result<(bool, String)> {
    let cfg = QuadConfig::default();
    let mut rng = instances::rng(seed);
    let (mut smooth, mut rl) = (0.0f64, 0.0f64);
    for _ in 0..3 {
        let c = instances::reflection_case(&mut rng)?;
        let (fr, or) = (c.f.reflected(c.interval), c.order.reflected());
        for kind in OperatorKind::ALL {
            for i in 1..4 {
                let t = c.interval.lerp(i as f64 / 4.0);
                let direct = evaluate(kind, &c.f, &c.order, c.interval, t, &cfg)?;
                let mirrored = evaluate(kind.mirror(), &fr, &or, c.interval, c.interval.reflect(t), &cfg)?;
                let err = (direct - mirrored).abs() / (1.0 + direct.abs());
                match kind {
                    OperatorKind::RlLeft | OperatorKind::RlRight => rl = rl.max(err),
                    _ => smooth = smooth.max(err),
                }
            }
        }
    }
    Ok((
        smooth <= 1e-10 && rl <= 1e-8,
        format!("integral_caputo_err={smooth:.3e} tol=1e-10 rl_err={rl:.3e} tol=1e-8"),
    ))
}

fn integration_by_parts(seed: u64) -> Result<(bool, String)> {
    let rep = verify_ibp(&instances::ibp_instance(seed)?, 16, &QuadConfig::default(), 1e-5)?;
    Ok(verdict(rep.residual.abs(), 1e-5, "abs_residual"))
}

fn green_formula(seed: u64) -> Result<(bool, String)> {
    let cfg = QuadConfig::default();
    let rep = verify_green(&instances::green_instance(seed, true)?, 12, &cfg, 1e-4)?;
    let full = green_sides(&instances::green_instance(seed, false)?, OuterRule::new(16), &cfg)?;
    let full_res = (full.lhs - full.rhs()).abs();
    let passed = rep.residual.abs() <= 1e-4 && full_res <= 1e-4;
    Ok((
        passed,
        format!(
            "zero_trace_residual={:.3e} full_residual={full_res:.3e} contour={:.6e} tol=1e-4",
            rep.residual.abs(),
            full.contour
        ),
    ))
}

fn first_variation_check(seed: u64) -> Result<(bool, String)> {
    let cfg = QuadConfig::default();
    let c = instances::variation_case(seed)?;
    let fv = first_variation(&c.problem, &c.u, &c.eta, 10, &cfg)?;
    let eps = 1e-5;
    let jp = functional_eval(&c.problem, &c.u.add_scaled(&c.eta, eps), 10, &cfg)?;
    let jm = functional_eval(&c.problem, &c.u.add_scaled(&c.eta, -eps), 10, &cfg)?;
    let cd = (jp - jm) / (2.0 * eps);
    Ok(verdict((fv - cd).abs() / fv.abs().max(1e-300), 1e-6, "rel_err"))
}

/// With zero boundary data the quadratic functional is minimized by `u ≡ 0`.
fn ritz_trivial(_: u64) -> Result<(bool, String)> {
    let a = VariableOrder::constant(0.4, Interval::unit())?;
    let p = Problem::new(Lagrangian::quadratic(1.0), a.clone(), a, Rect2::unit())?;
    let opts = RitzOptions {
        n_modes: 2,
        outer_grid: 8,
        residual_grid: 2,
        ..Default::default()
    };
    let r = ritz_solve(&p, &BoundaryData::constant(0.0, p.rect), &opts)?.report;
    let cmax = r.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    Ok((
        r.converged && cmax <= 1e-12 && r.j_value.abs() <= 1e-12,
        format!(
            "max_coeff={cmax:.3e} J={:.3e} gradient_norm={:.3e}",
            r.j_value, r.gradient_norm
        ),
    ))
}
