use super::lagrangian::{Lagrangian, Slots};
use crate::domain::{coord, Axis, Rect2};
use crate::error::{Error, Result};
use crate::function::{Fn2, SmoothFn1, SmoothFn2};
use crate::operators::{partial_op, try_rl_derivative, OperatorKind, Stencil};
use crate::order::VariableOrder;
use crate::quadrature::{integrate_rect, OuterRule, QuadConfig, Side, SingularKernel, SingularRule, WeightShift};
use rayon::prelude::*;

/// A Lagrangian with its two orders on a rectangle.
#[derive(Debug, Clone)]
pub struct Problem {
    pub lagrangian: Lagrangian,
    pub alpha1: VariableOrder,
    pub alpha2: VariableOrder,
    pub rect: Rect2,
}

impl Problem {
    /// Each order's domain must contain the matching side of `rect`.
    pub fn new(lagrangian: Lagrangian, alpha1: VariableOrder, alpha2: VariableOrder, rect: Rect2) -> Result<Self> {
        for (name, order, side) in [("alpha1", &alpha1, rect.t1), ("alpha2", &alpha2, rect.t2)] {
            let d = order.domain();
            if !(d.contains_loosely(side.a) && d.contains_loosely(side.b)) {
                return Err(Error::domain(format!(
                    "{name} is defined on [{}, {}] but the rectangle side is [{}, {}]",
                    d.a, d.b, side.a, side.b
                )));
            }
        }
        Ok(Problem {
            lagrangian,
            alpha1,
            alpha2,
            rect,
        })
    }

    fn order(&self, axis: Axis) -> &VariableOrder {
        match axis {
            Axis::T1 => &self.alpha1,
            Axis::T2 => &self.alpha2,
        }
    }
}

/// Left Caputo partials `(ᶜD₁^{α₁}u, ᶜD₂^{α₂}u)` at `p`.
pub fn caputo_partials(problem: &Problem, u: &SmoothFn2, p: (f64, f64), cfg: &QuadConfig) -> Result<(f64, f64)> {
    let r = &problem.rect;
    Ok((
        partial_op(OperatorKind::CaputoLeft, Axis::T1, u, &problem.alpha1, r, p, cfg)?,
        partial_op(OperatorKind::CaputoLeft, Axis::T2, u, &problem.alpha2, r, p, cfg)?,
    ))
}

fn slots(problem: &Problem, u: &SmoothFn2, p: (f64, f64), cfg: &QuadConfig) -> Result<Slots> {
    let (d1, d2) = caputo_partials(problem, u, p, cfg)?;
    Ok(Slots {
        t1: p.0,
        t2: p.1,
        u: u.eval(p.0, p.1),
        d1,
        d2,
    })
}

/// `J[u] = ∬ L(t, u, ᶜD₁u, ᶜD₂u)`.
pub fn functional_eval(problem: &Problem, u: &SmoothFn2, outer_grid: usize, cfg: &QuadConfig) -> Result<f64> {
    let [j] = integrate_rect(&problem.rect, OuterRule::new(outer_grid), |t1, t2| {
        Ok([problem.lagrangian.eval(&slots(problem, u, (t1, t2), cfg)?)])
    })?;
    Ok(j)
}

/// Action of a string with density `sigma` and the given tension; `t₁` is time
/// and `t₂` the position along the string.
#[allow(clippy::too_many_arguments)]
pub fn string_action(
    sigma: &SmoothFn1,
    tension: f64,
    u: &SmoothFn2,
    alpha1: &VariableOrder,
    alpha2: &VariableOrder,
    rect: Rect2,
    outer_grid: usize,
    cfg: &QuadConfig,
) -> Result<f64> {
    for i in 0..=64 {
        let x = rect.t2.lerp(i as f64 / 64.0);
        let s = sigma.eval(x);
        if !(s > 0.0) {
            return Err(Error::domain(format!(
                "string density must be positive, got {s} at {x}"
            )));
        }
    }
    let lag = Lagrangian::string(sigma.clone(), tension)?;
    let problem = Problem::new(lag, alpha1.clone(), alpha2.clone(), rect)?;
    functional_eval(&problem, u, outer_grid, cfg)
}

fn require_zero_trace(eta: &SmoothFn2, rect: &Rect2) -> Result<()> {
    const N: usize = 16;
    let scale = (0..N * N)
        .map(|i| {
            eta.eval(
                rect.t1.lerp((i / N) as f64 / N as f64),
                rect.t2.lerp((i % N) as f64 / N as f64),
            )
            .abs()
        })
        .fold(1.0, f64::max);
    for i in 0..=N {
        let s = i as f64 / N as f64;
        let (x, y) = (rect.t1.lerp(s), rect.t2.lerp(s));
        for (p, q) in [(x, rect.t2.a), (x, rect.t2.b), (rect.t1.a, y), (rect.t1.b, y)] {
            let v = eta.eval(p, q);
            if !(v.abs() <= 1e-10 * scale) {
                return Err(Error::Precondition(format!(
                    "variation must vanish on the boundary, got {v} at ({p}, {q})"
                )));
            }
        }
    }
    Ok(())
}

/// `∬ ∂ᵤL·η + ∂_{d₁}L·ᶜD₁η + ∂_{d₂}L·ᶜD₂η`, the derivative of `J[u + εη]` at
/// `ε = 0`. `eta` must vanish on the boundary.
pub fn first_variation(
    problem: &Problem,
    u: &SmoothFn2,
    eta: &SmoothFn2,
    outer_grid: usize,
    cfg: &QuadConfig,
) -> Result<f64> {
    require_zero_trace(eta, &problem.rect)?;
    let l = &problem.lagrangian;
    let [v] = integrate_rect(&problem.rect, OuterRule::new(outer_grid), |t1, t2| {
        let s = slots(problem, u, (t1, t2), cfg)?;
        let (e1, e2) = caputo_partials(problem, eta, (t1, t2), cfg)?;
        Ok([l.du(&s) * eta.eval(t1, t2) + l.dd1(&s) * e1 + l.dd2(&s) * e2])
    })?;
    Ok(v)
}

/// Left Caputo rule along `axis` at coordinate `t`.
fn caputo_rule(problem: &Problem, axis: Axis, t: f64, cfg: &QuadConfig) -> Result<SingularRule> {
    let kernel = SingularKernel::new(problem.order(axis), Side::Left, WeightShift::Derivative);
    SingularRule::build(&kernel, t, problem.rect.axis(axis).a, cfg)
}

fn slots_with_rules(u: &SmoothFn2, du: (&Fn2, &Fn2), p: (f64, f64), r1: &SingularRule, r2: &SingularRule) -> Slots {
    Slots {
        t1: p.0,
        t2: p.1,
        u: u.eval(p.0, p.1),
        d1: r1.apply(|x| (du.0)(x, p.1)),
        d2: r2.apply(|y| (du.1)(p.0, y)),
    }
}

/// Euler–Lagrange expression `∂ᵤL + D_{b₁}^{α₁}[∂_{d₁}L] + D_{b₂}^{α₂}[∂_{d₂}L]`
/// at `p`, where the brackets are the composed fields `t ↦ ∂L(t, u, ᶜD₁u, ᶜD₂u)`
/// and the outer operators are right Riemann–Liouville partial derivatives.
pub fn el_integrand(
    problem: &Problem,
    u: &SmoothFn2,
    p: (f64, f64),
    cfg: &QuadConfig,
    stencil: Stencil,
) -> Result<f64> {
    let l = &problem.lagrangian;
    let du = match (u.partial(Axis::T1), u.partial(Axis::T2)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::config("Euler–Lagrange residual needs both partials of u")),
    };
    let mut total = l.du(&slots(problem, u, p, cfg)?);
    for axis in [Axis::T1, Axis::T2] {
        // Along the section only the coordinate on `axis` moves, so the Caputo
        // rule across it is shared by every point of the section.
        let fixed = caputo_rule(problem, axis.other(), coord(p, axis.other()), cfg)?;
        let field = |x: f64| -> Result<f64> {
            let moving = caputo_rule(problem, axis, x, cfg)?;
            Ok(match axis {
                Axis::T1 => l.dd1(&slots_with_rules(u, du, (x, p.1), &moving, &fixed)),
                Axis::T2 => l.dd2(&slots_with_rules(u, du, (p.0, x), &fixed, &moving)),
            })
        };
        let (t, b) = (coord(p, axis), problem.rect.axis(axis).b);
        total += try_rl_derivative(problem.order(axis), Side::Right, &field, t, b, cfg, stencil)?;
    }
    Ok(total)
}

fn default_stencil(rect: &Rect2) -> Stencil {
    Stencil::adaptive(1e-4 * rect.t1.width().min(rect.t2.width()))
}

/// `∬ η·[∂ᵤL + D_{b₁}^{α₁}∂_{d₁}L + D_{b₂}^{α₂}∂_{d₂}L]`: the first variation
/// after moving the fractional derivatives off `η` by the Green-type formula.
pub fn green_transformed_variation(
    problem: &Problem,
    u: &SmoothFn2,
    eta: &SmoothFn2,
    outer_grid: usize,
    cfg: &QuadConfig,
) -> Result<f64> {
    require_zero_trace(eta, &problem.rect)?;
    let stencil = default_stencil(&problem.rect);
    let [v] = integrate_rect(&problem.rect, OuterRule::new(outer_grid), |t1, t2| {
        let e = eta.eval(t1, t2);
        if e == 0.0 {
            return Ok([0.0]);
        }
        Ok([e * el_integrand(problem, u, (t1, t2), cfg, stencil)?])
    })?;
    Ok(v)
}

/// Euler–Lagrange residual sampled at cell centres.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualField {
    /// Row-major, `t₂` fastest.
    pub points: Vec<(f64, f64)>,
    pub values: Vec<f64>,
    /// `(Σ R²·cell area)^½`.
    pub l2: f64,
}

/// Residual at the centres of a `point_grid × point_grid` cell grid. The
/// derivative step is `h`, shrunk near the right edges as in
/// [`Stencil::adaptive`].
pub fn el_residual(
    problem: &Problem,
    u: &SmoothFn2,
    point_grid: usize,
    cfg: &QuadConfig,
    h: f64,
) -> Result<ResidualField> {
    if point_grid < 1 {
        return Err(Error::config("residual grid needs at least one point per axis"));
    }
    let r = &problem.rect;
    let n = point_grid;
    let points: Vec<(f64, f64)> = (0..n * n)
        .map(|i| {
            let (a, b) = ((i / n) as f64 + 0.5, (i % n) as f64 + 0.5);
            (r.t1.lerp(a / n as f64), r.t2.lerp(b / n as f64))
        })
        .collect();
    let stencil = Stencil::adaptive(h);
    let values: Vec<f64> = points
        .par_iter()
        .map(|&p| el_integrand(problem, u, p, cfg, stencil))
        .collect::<Result<_>>()?;
    let cell = r.area() / (n * n) as f64;
    let l2 = (values.iter().map(|v| v * v).sum::<f64>() * cell).sqrt();
    if !l2.is_finite() {
        return Err(Error::NonFinite(format!("residual norm is {l2}")));
    }
    Ok(ResidualField { points, values, l2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Interval;
    use crate::specialfn::gamma;

    fn problem(l: Lagrangian, a: f64) -> Problem {
        let o = VariableOrder::constant(a, Interval::unit()).unwrap();
        Problem::new(l, o.clone(), o, Rect2::unit()).unwrap()
    }

    fn u_slot() -> Lagrangian {
        Lagrangian::unchecked(|s| s.u, |_| 1.0, |_| 0.0, |_| 0.0)
    }

    fn bump() -> SmoothFn2 {
        let b = SmoothFn1::polynomial(vec![0.0, 1.0, -1.0]);
        SmoothFn2::product(b.clone(), b)
    }

    #[test]
    fn closed_form_functionals() {
        let cfg = QuadConfig::default();
        let p = problem(u_slot(), 0.5);
        assert!((functional_eval(&p, &SmoothFn2::constant(1.0), 20, &cfg).unwrap() - 1.0).abs() < 1e-13);

        let p = problem(Lagrangian::quadratic(0.0), 0.3);
        assert!(functional_eval(&p, &SmoothFn2::constant(-2.5), 12, &cfg).unwrap().abs() < 1e-15);

        let p = problem(Lagrangian::unchecked(|s| s.d1, |_| 0.0, |_| 1.0, |_| 0.0), 0.5);
        let u = SmoothFn2::polynomial(vec![vec![0.0], vec![1.0]]);
        let j = functional_eval(&p, &u, 20, &cfg).unwrap();
        let exact = (2.0 / 3.0) / gamma(1.5).unwrap();
        assert!((j - exact).abs() < 1e-10, "{j} vs {exact}");
        assert!((exact - 0.752_252_778_063_675_2).abs() < 1e-12);
    }

    #[test]
    fn string_action_examples() {
        let cfg = QuadConfig::default();
        let o = VariableOrder::constant(0.5, Interval::unit()).unwrap();
        let one = SmoothFn1::constant(1.0);
        let x = SmoothFn2::polynomial(vec![vec![0.0, 1.0]]);
        let s = string_action(&one, 1.0, &x, &o, &o, Rect2::unit(), 20, &cfg).unwrap();
        assert!((s - 2.0 / std::f64::consts::PI).abs() < 1e-9, "{s}");
        let z = string_action(&one, 1.0, &SmoothFn2::zero(), &o, &o, Rect2::unit(), 8, &cfg).unwrap();
        assert_eq!(z, 0.0);
        assert!(matches!(
            string_action(&one, -1.0, &x, &o, &o, Rect2::unit(), 8, &cfg),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            string_action(&SmoothFn1::constant(0.0), 1.0, &x, &o, &o, Rect2::unit(), 8, &cfg),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn first_variation_examples() {
        let cfg = QuadConfig::default();
        let p = problem(u_slot(), 0.4);
        let u = SmoothFn2::polynomial(vec![vec![0.3, 1.0], vec![2.0]]);
        let v = first_variation(&p, &u, &bump(), 16, &cfg).unwrap();
        assert!((v - 1.0 / 36.0).abs() < 1e-11, "{v}");
        assert_eq!(first_variation(&p, &u, &SmoothFn2::zero(), 8, &cfg).unwrap(), 0.0);
        let bad = SmoothFn2::polynomial(vec![vec![0.0, 1.0]]);
        assert!(matches!(
            first_variation(&p, &u, &bad, 8, &cfg),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn residual_examples() {
        let cfg = QuadConfig::default();
        let p = problem(Lagrangian::quadratic(0.0), 0.4);
        let r = el_residual(&p, &SmoothFn2::constant(0.7), 4, &cfg, 1e-4).unwrap();
        assert!(r.values.iter().all(|v| v.abs() <= 1e-8), "{r:?}");

        let p = problem(u_slot(), 0.4);
        let r = el_residual(&p, &SmoothFn2::polynomial(vec![vec![1.0, 2.0]]), 3, &cfg, 1e-4).unwrap();
        assert!(r.values.iter().all(|&v| v == 1.0));
        assert!((r.l2 - 1.0).abs() < 1e-15);
        assert_eq!(r.points.len(), 9);
    }

    #[test]
    fn mismatched_order_domain_is_rejected() {
        let o = VariableOrder::constant(0.5, Interval::new(0.0, 0.5).unwrap()).unwrap();
        assert!(matches!(
            Problem::new(u_slot(), o.clone(), o, Rect2::unit()),
            Err(Error::Domain(_))
        ));
    }
}
