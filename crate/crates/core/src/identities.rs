//! Numerical checks of the integration-by-parts formula for partial
//! variable-order integrals and of the Green-type formula for Caputo
//! derivatives on a rectangle.
//!
//! Both sides are double integrals over the rectangle computed with the same
//! [`OuterRule`]; inner operators come from [`crate::operators`]. Outer
//! integrals are taken with `t₂` inner and `t₁` outer.

use crate::domain::{Axis, Rect2};
use crate::error::{Error, Result};
use crate::function::SmoothFn2;
use crate::operators::{partial_op, OperatorKind};
use crate::order::{BoundMode, VariableOrder};
use crate::quadrature::{
    integrate_rect, try_line_integral_edge, Orientation, OuterRule, QuadConfig, Side, WeightShift,
};
use serde::{Deserialize, Serialize};

/// Both sides of an identity and how they were computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs − rhs`.
    pub residual: f64,
    pub outer_grid: usize,
    #[serde(flatten)]
    pub quad: QuadConfig,
    pub converged: bool,
}

impl IdentityReport {
    fn new(lhs: f64, rhs: f64, outer_grid: usize, quad: QuadConfig, tol: f64) -> Self {
        let residual = lhs - rhs;
        IdentityReport {
            lhs,
            rhs,
            residual,
            outer_grid,
            quad,
            converged: residual.abs() <= tol,
        }
    }
}

/// Data of the integration-by-parts formula
/// `∬ g·ₐ₁I^{α₁}η₁ + f·ₐ₂I^{α₂}η₂ = ∬ η₁·I_{b₁}^{α₁}g + η₂·I_{b₂}^{α₂}f`.
#[derive(Debug, Clone)]
pub struct IbpInstance {
    pub f: SmoothFn2,
    pub g: SmoothFn2,
    pub eta1: SmoothFn2,
    pub eta2: SmoothFn2,
    pub alpha1: VariableOrder,
    pub alpha2: VariableOrder,
    pub rect: Rect2,
}

/// Data of the Green-type formula
/// `∬ g·ᶜD₁η + f·ᶜD₂η = ∬ η·(D_{b₁}g + D_{b₂}f) + ∮ η·(I^{1−α₁}g dt₂ − I^{1−α₂}f dt₁)`.
#[derive(Debug, Clone)]
pub struct GreenInstance {
    pub f: SmoothFn2,
    pub g: SmoothFn2,
    pub eta: SmoothFn2,
    pub alpha1: VariableOrder,
    pub alpha2: VariableOrder,
    pub rect: Rect2,
}

impl GreenInstance {
    /// Same formula with the roles of the axes exchanged.
    pub fn swap_axes(&self) -> Result<GreenInstance> {
        let rect = self.rect.transpose();
        Ok(GreenInstance {
            f: self.g.transposed(),
            g: self.f.transposed(),
            eta: self.eta.transposed(),
            alpha1: self.alpha2.with_domain(rect.t1)?,
            alpha2: self.alpha1.with_domain(rect.t2)?,
            rect,
        })
    }
}

/// Left- and right-hand sides of the integration-by-parts formula.
pub fn ibp_sides(inst: &IbpInstance, rule: OuterRule, cfg: &QuadConfig) -> Result<(f64, f64)> {
    let r = &inst.rect;
    let [lhs, rhs] = integrate_rect(r, rule, |t1, t2| {
        let p = (t1, t2);
        let il1 = partial_op(
            OperatorKind::IntegralLeft,
            Axis::T1,
            &inst.eta1,
            &inst.alpha1,
            r,
            p,
            cfg,
        )?;
        let il2 = partial_op(
            OperatorKind::IntegralLeft,
            Axis::T2,
            &inst.eta2,
            &inst.alpha2,
            r,
            p,
            cfg,
        )?;
        let ir1 = partial_op(OperatorKind::IntegralRight, Axis::T1, &inst.g, &inst.alpha1, r, p, cfg)?;
        let ir2 = partial_op(OperatorKind::IntegralRight, Axis::T2, &inst.f, &inst.alpha2, r, p, cfg)?;
        Ok([
            inst.g.eval(t1, t2) * il1 + inst.f.eval(t1, t2) * il2,
            inst.eta1.eval(t1, t2) * ir1 + inst.eta2.eval(t1, t2) * ir2,
        ])
    })?;
    Ok((lhs, rhs))
}

/// Integration-by-parts check with `outer_grid` points per axis.
///
/// Both orders must be declared in [`BoundMode::AboveOneOverL`].
pub fn verify_ibp(inst: &IbpInstance, outer_grid: usize, cfg: &QuadConfig, tol: f64) -> Result<IdentityReport> {
    inst.alpha1
        .require_mode(BoundMode::AboveOneOverL, "integration by parts (α₁)")?;
    inst.alpha2
        .require_mode(BoundMode::AboveOneOverL, "integration by parts (α₂)")?;
    let (lhs, rhs) = ibp_sides(inst, OuterRule::new(outer_grid), cfg)?;
    Ok(IdentityReport::new(lhs, rhs, outer_grid, *cfg, tol))
}

/// `ₜ₁I_{b₁}^{1−α₁} g` at `p`.
fn right_inner(
    f: &SmoothFn2,
    order: &VariableOrder,
    rect: &Rect2,
    axis: Axis,
    p: (f64, f64),
    cfg: &QuadConfig,
) -> Result<f64> {
    let section = f.section(axis, p);
    let t = match axis {
        Axis::T1 => p.0,
        Axis::T2 => p.1,
    };
    crate::operators::try_integral(
        order,
        Side::Right,
        WeightShift::Derivative,
        &|x| Ok(section.eval(x)),
        t,
        rect.axis(axis).b,
        cfg,
    )
}

/// Counterclockwise contour term `∮ η·(ₜ₁I_{b₁}^{1−α₁}g dt₂ − ₜ₂I_{b₂}^{1−α₂}f dt₁)`.
///
/// Edges: bottom (`t₂ = a₂`, `t₁` increasing) and top (`t₂ = b₂`, decreasing)
/// carry the `dt₁` term; right (`t₁ = b₁`, `t₂` increasing) and left
/// (`t₁ = a₁`, decreasing) carry the `dt₂` term. The inner integrals vanish
/// on the right and top edges, where their range is empty.
pub fn boundary_contour(
    eta: &SmoothFn2,
    g: &SmoothFn2,
    f: &SmoothFn2,
    alpha1: &VariableOrder,
    alpha2: &VariableOrder,
    rect: &Rect2,
    cfg: &QuadConfig,
) -> Result<f64> {
    let (i1, i2) = (rect.t1, rect.t2);
    let dt1_term = |t1: f64, t2: f64| -> Result<f64> {
        Ok(-eta.eval(t1, t2) * right_inner(f, alpha2, rect, Axis::T2, (t1, t2), cfg)?)
    };
    let dt2_term = |t1: f64, t2: f64| -> Result<f64> {
        Ok(eta.eval(t1, t2) * right_inner(g, alpha1, rect, Axis::T1, (t1, t2), cfg)?)
    };
    let bottom = try_line_integral_edge(|s| dt1_term(s, i2.a), i1.a, i1.b, Orientation::Positive, cfg)?;
    let right = try_line_integral_edge(|s| dt2_term(i1.b, s), i2.a, i2.b, Orientation::Positive, cfg)?;
    let top = try_line_integral_edge(|s| dt1_term(s, i2.b), i1.a, i1.b, Orientation::Negative, cfg)?;
    let left = try_line_integral_edge(|s| dt2_term(i1.a, s), i2.a, i2.b, Orientation::Negative, cfg)?;
    Ok(bottom + right + top + left)
}

/// The three pieces of the Green-type formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenSides {
    /// `∬ g·ᶜD₁η + f·ᶜD₂η`.
    pub lhs: f64,
    /// `∬ η·(D_{b₁}g + D_{b₂}f)`.
    pub area: f64,
    pub contour: f64,
}

impl GreenSides {
    pub fn rhs(&self) -> f64 {
        self.area + self.contour
    }
}

pub fn green_sides(inst: &GreenInstance, rule: OuterRule, cfg: &QuadConfig) -> Result<GreenSides> {
    let r = &inst.rect;
    let [lhs, area] = integrate_rect(r, rule, |t1, t2| {
        let p = (t1, t2);
        let c1 = partial_op(OperatorKind::CaputoLeft, Axis::T1, &inst.eta, &inst.alpha1, r, p, cfg)?;
        let c2 = partial_op(OperatorKind::CaputoLeft, Axis::T2, &inst.eta, &inst.alpha2, r, p, cfg)?;
        let d1 = partial_op(OperatorKind::RlRight, Axis::T1, &inst.g, &inst.alpha1, r, p, cfg)?;
        let d2 = partial_op(OperatorKind::RlRight, Axis::T2, &inst.f, &inst.alpha2, r, p, cfg)?;
        Ok([
            inst.g.eval(t1, t2) * c1 + inst.f.eval(t1, t2) * c2,
            inst.eta.eval(t1, t2) * (d1 + d2),
        ])
    })?;
    let contour = boundary_contour(&inst.eta, &inst.g, &inst.f, &inst.alpha1, &inst.alpha2, r, cfg)?;
    Ok(GreenSides { lhs, area, contour })
}

/// Samples `ₜ₁I_{b₁}^{1−α₁}g` and `ₜ₂I_{b₂}^{1−α₂}f` on a 16×16 grid and
/// rejects non-finite values or exploding difference quotients. This is only
/// a probe of the smoothness hypothesis, not a proof of it.
pub fn probe_inner_integrals(inst: &GreenInstance, cfg: &QuadConfig) -> Result<()> {
    const N: usize = 16;
    const MAX_SLOPE: f64 = 1e8;
    let r = &inst.rect;
    for (axis, func, order) in [(Axis::T1, &inst.g, &inst.alpha1), (Axis::T2, &inst.f, &inst.alpha2)] {
        let mut grid = vec![[0.0; N]; N];
        for (i, row) in grid.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let p = (
                    r.t1.lerp(i as f64 / (N - 1) as f64),
                    r.t2.lerp(j as f64 / (N - 1) as f64),
                );
                *v = right_inner(func, order, r, axis, p, cfg)?;
                if !v.is_finite() {
                    return Err(Error::NonFinite(format!(
                        "inner integral along {axis:?} at {p:?} is {v}"
                    )));
                }
            }
        }
        let (h1, h2) = (r.t1.width() / (N - 1) as f64, r.t2.width() / (N - 1) as f64);
        for i in 0..N {
            for j in 0..N {
                let s1 = if i + 1 < N {
                    (grid[i + 1][j] - grid[i][j]).abs() / h1
                } else {
                    0.0
                };
                let s2 = if j + 1 < N {
                    (grid[i][j + 1] - grid[i][j]).abs() / h2
                } else {
                    0.0
                };
                if s1.max(s2) > MAX_SLOPE {
                    return Err(Error::Precondition(format!(
                        "inner integral along {axis:?} is not smooth near grid cell ({i}, {j})"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Green-type formula check with `outer_grid` points per axis.
///
/// Both orders must be declared in [`BoundMode::BelowOneMinus`].
pub fn verify_green(inst: &GreenInstance, outer_grid: usize, cfg: &QuadConfig, tol: f64) -> Result<IdentityReport> {
    inst.alpha1
        .require_mode(BoundMode::BelowOneMinus, "Green-type formula (α₁)")?;
    inst.alpha2
        .require_mode(BoundMode::BelowOneMinus, "Green-type formula (α₂)")?;
    if inst.eta.partial(Axis::T1).is_none() || inst.eta.partial(Axis::T2).is_none() {
        return Err(Error::config("Green-type formula needs both partials of eta"));
    }
    probe_inner_integrals(inst, cfg)?;
    let sides = green_sides(inst, OuterRule::new(outer_grid), cfg)?;
    Ok(IdentityReport::new(sides.lhs, sides.rhs(), outer_grid, *cfg, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Interval;
    use crate::specialfn::gamma;

    fn order(v: f64, mode: BoundMode) -> VariableOrder {
        VariableOrder::constant_in(v, Interval::unit(), 3, mode).unwrap()
    }

    #[test]
    fn all_zero_ibp_has_zero_residual() {
        let z = SmoothFn2::zero();
        let a = order(0.5, BoundMode::AboveOneOverL);
        let inst = IbpInstance {
            f: z.clone(),
            g: z.clone(),
            eta1: z.clone(),
            eta2: z,
            alpha1: a.clone(),
            alpha2: a,
            rect: Rect2::unit(),
        };
        let rep = verify_ibp(&inst, 8, &QuadConfig::default(), 1e-12).unwrap();
        assert_eq!(rep.residual, 0.0);
        assert!(rep.converged);
    }

    #[test]
    fn ibp_with_unit_functions_matches_closed_form() {
        let one = SmoothFn2::constant(1.0);
        let a = VariableOrder::constant_in(0.5, Interval::unit(), 3, BoundMode::AboveOneOverL).unwrap();
        let inst = IbpInstance {
            f: one.clone(),
            g: one.clone(),
            eta1: one.clone(),
            eta2: one,
            alpha1: a.clone(),
            alpha2: a,
            rect: Rect2::unit(),
        };
        let rep = verify_ibp(&inst, 20, &QuadConfig::default(), 1e-6).unwrap();
        let exact = 4.0 / (3.0 * gamma(1.5).unwrap());
        assert!(
            (rep.lhs - exact).abs() < 1e-9 && (rep.rhs - exact).abs() < 1e-9,
            "{rep:?}"
        );
        assert!((exact - 1.504_505_556_127_350_3).abs() < 1e-12);
        assert!(rep.converged);
    }

    #[test]
    fn wrong_regime_is_rejected() {
        let z = SmoothFn2::zero();
        let a = order(0.5, BoundMode::Plain);
        let inst = IbpInstance {
            f: z.clone(),
            g: z.clone(),
            eta1: z.clone(),
            eta2: z.clone(),
            alpha1: a.clone(),
            alpha2: a.clone(),
            rect: Rect2::unit(),
        };
        assert!(matches!(
            verify_ibp(&inst, 4, &QuadConfig::default(), 1.0),
            Err(Error::Hypothesis(_))
        ));
        let g = GreenInstance {
            f: z.clone(),
            g: z.clone(),
            eta: z,
            alpha1: a.clone(),
            alpha2: a,
            rect: Rect2::unit(),
        };
        assert!(matches!(
            verify_green(&g, 4, &QuadConfig::default(), 1.0),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn contour_sign_convention() {
        // f = 0, g = η = 1, α₁ = 1/2: only the left edge, traversed downward,
        // contributes −∫ ₀I₁^{1/2} 1 dt₂ = −1/Γ(3/2).
        let a = VariableOrder::constant(0.5, Interval::unit()).unwrap();
        let one = SmoothFn2::constant(1.0);
        let v = boundary_contour(
            &one,
            &one,
            &SmoothFn2::zero(),
            &a,
            &a,
            &Rect2::unit(),
            &QuadConfig::default(),
        )
        .unwrap();
        assert!((v + 1.0 / gamma(1.5).unwrap()).abs() < 1e-12, "{v}");
    }

    #[test]
    fn contour_vanishes_with_zero_trace_or_zero_data() {
        let a = VariableOrder::constant(0.4, Interval::unit()).unwrap();
        let bump = SmoothFn2::new(|x, y| x * (1.0 - x) * y * (1.0 - y));
        let p = SmoothFn2::polynomial(vec![vec![1.0, 2.0], vec![0.5]]);
        let r = Rect2::unit();
        let cfg = QuadConfig::default();
        assert!(boundary_contour(&bump, &p, &p, &a, &a, &r, &cfg).unwrap().abs() < 1e-15);
        let z = SmoothFn2::zero();
        assert_eq!(boundary_contour(&p, &z, &z, &a, &a, &r, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn report_json_has_exact_fields() {
        let rep = IdentityReport::new(1.0, 0.5, 20, QuadConfig::default(), 1e-3);
        let v: serde_json::Value = serde_json::to_value(&rep).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(
            keys,
            [
                "converged",
                "grading",
                "lhs",
                "nodes_per_panel",
                "outer_grid",
                "panels",
                "residual",
                "rhs"
            ]
        );
        assert_eq!(v["residual"], 0.5);
        assert_eq!(v["converged"], false);
    }
}
