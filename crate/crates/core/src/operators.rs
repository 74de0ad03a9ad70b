//! The six variable-order operators on an interval and their partial
//! versions on a rectangle.
//!
//! Left operators integrate over `[a, t]` with order `α(t, τ)`, right ones
//! over `[t, b]` with order `α(τ, t)`. Riemann–Liouville derivatives are
//! finite differences, in the free endpoint, of the order-`1−α` integral.
//! Partial operators freeze the other coordinate and reuse the
//! one-variable code on the resulting section.

use crate::domain::{coord, Axis, Interval, Rect2};
use crate::error::{Error, Result};
use crate::function::{SmoothFn1, SmoothFn2};
use crate::order::VariableOrder;
use crate::quadrature::{QuadConfig, Side, SingularKernel, SingularRule, WeightShift};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OperatorKind {
    #[serde(rename = "I_left")]
    IntegralLeft,
    #[serde(rename = "I_right")]
    IntegralRight,
    #[serde(rename = "D_rl_left")]
    RlLeft,
    #[serde(rename = "D_rl_right")]
    RlRight,
    #[serde(rename = "D_cap_left")]
    CaputoLeft,
    #[serde(rename = "D_cap_right")]
    CaputoRight,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 6] = [
        OperatorKind::IntegralLeft,
        OperatorKind::IntegralRight,
        OperatorKind::RlLeft,
        OperatorKind::RlRight,
        OperatorKind::CaputoLeft,
        OperatorKind::CaputoRight,
    ];

    pub fn side(self) -> Side {
        match self {
            OperatorKind::IntegralLeft | OperatorKind::RlLeft | OperatorKind::CaputoLeft => Side::Left,
            _ => Side::Right,
        }
    }

    /// The operator of the same family on the other side.
    pub fn mirror(self) -> OperatorKind {
        match self {
            OperatorKind::IntegralLeft => OperatorKind::IntegralRight,
            OperatorKind::IntegralRight => OperatorKind::IntegralLeft,
            OperatorKind::RlLeft => OperatorKind::RlRight,
            OperatorKind::RlRight => OperatorKind::RlLeft,
            OperatorKind::CaputoLeft => OperatorKind::CaputoRight,
            OperatorKind::CaputoRight => OperatorKind::CaputoLeft,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::IntegralLeft => "I_left",
            OperatorKind::IntegralRight => "I_right",
            OperatorKind::RlLeft => "D_rl_left",
            OperatorKind::RlRight => "D_rl_right",
            OperatorKind::CaputoLeft => "D_cap_left",
            OperatorKind::CaputoRight => "D_cap_right",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StencilPolicy {
    /// Five-point central stencil; an error if it leaves the interval.
    Central,
    /// Central where it fits. The step shrinks to 1/40 of the distance
    /// to the kernel's singular endpoint, and a one-sided fourth-order
    /// stencil is used within two steps of the other endpoint.
    Adaptive,
}

/// Finite-difference parameters for Riemann–Liouville derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stencil {
    pub step: f64,
    pub policy: StencilPolicy,
}

impl Stencil {
    pub fn central(step: f64) -> Self {
        Stencil {
            step,
            policy: StencilPolicy::Central,
        }
    }

    pub fn adaptive(step: f64) -> Self {
        Stencil {
            step,
            policy: StencilPolicy::Adaptive,
        }
    }

    /// Adaptive stencil with step `(b − a)·1e-4`.
    pub fn default_for(domain: Interval) -> Self {
        Stencil::adaptive(domain.width() * 1e-4)
    }
}

fn check_range(order: &VariableOrder, lo: f64, hi: f64, what: &str) -> Result<()> {
    let d = order.domain();
    if !(d.contains_loosely(lo) && d.contains_loosely(hi)) {
        return Err(Error::domain(format!(
            "{what}: range [{lo}, {hi}] is not inside the order's domain [{}, {}]",
            d.a, d.b
        )));
    }
    if !(lo <= hi) {
        return Err(Error::domain(format!(
            "{what}: needs lower limit ≤ upper limit, got [{lo}, {hi}]"
        )));
    }
    Ok(())
}

/// `limit` is the far end of the range: `a` for left kernels, `b` for right.
fn range_for(side: Side, t: f64, limit: f64) -> (f64, f64) {
    match side {
        Side::Left => (limit, t),
        Side::Right => (t, limit),
    }
}

/// Variable-order integral of a fallible integrand.
pub fn try_integral(
    order: &VariableOrder,
    side: Side,
    shift: WeightShift,
    h: &(dyn Fn(f64) -> Result<f64> + '_),
    t: f64,
    limit: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    let (lo, hi) = range_for(side, t, limit);
    check_range(order, lo, hi, "variable-order integral")?;
    let kernel = SingularKernel::new(order, side, shift);
    SingularRule::build(&kernel, t, limit, cfg)?.try_apply(h)
}

/// Riemann–Liouville derivative of a fallible integrand: `d/dt I^{1−α}` on
/// the left, `−d/dt I^{1−α}` on the right.
pub fn try_rl_derivative(
    order: &VariableOrder,
    side: Side,
    h: &(dyn Fn(f64) -> Result<f64> + '_),
    t: f64,
    limit: f64,
    cfg: &QuadConfig,
    stencil: Stencil,
) -> Result<f64> {
    let (lo, hi) = range_for(side, t, limit);
    check_range(order, lo, hi, "Riemann–Liouville derivative")?;
    let dom = order.domain();
    // Distance to the endpoint where the integral has its singular
    // behaviour, room toward the endpoint where the order stops being defined,
    // and the direction of that regular endpoint.
    let (singular, room, toward_regular) = match side {
        Side::Left => (t - limit, dom.b - t, 1.0),
        Side::Right => (limit - t, t - dom.a, -1.0),
    };
    if !(singular > 0.0) {
        return Err(Error::domain(format!(
            "Riemann–Liouville derivative is undefined at the endpoint t = {t}"
        )));
    }
    if !(stencil.step > 0.0) {
        return Err(Error::config(format!(
            "stencil step must be positive, got {}",
            stencil.step
        )));
    }
    let integral = |s: f64| -> Result<f64> {
        let kernel = SingularKernel::new(order, side, WeightShift::Derivative);
        SingularRule::build(&kernel, s, limit, cfg)?.try_apply(h)
    };
    let sign = match side {
        Side::Left => 1.0,
        Side::Right => -1.0,
    };
    let h0 = stencil.step;
    let slack = 1e-12 * (1.0 + t.abs());
    let (step, central) = match stencil.policy {
        StencilPolicy::Central => {
            if 2.0 * h0 >= singular || 2.0 * h0 > room + slack {
                return Err(Error::domain(format!(
                    "central stencil t ± 2h with t = {t}, h = {h0} leaves ({}, {}); \
                     use a smaller step or the adaptive stencil",
                    lo.min(dom.a).max(if side == Side::Left { limit } else { dom.a }),
                    if side == Side::Left { dom.b } else { limit }
                )));
            }
            (h0, true)
        }
        StencilPolicy::Adaptive => {
            let step = h0.min(0.025 * singular);
            (step, 2.0 * step <= room + slack)
        }
    };
    let d = if central {
        let f = |k: f64| integral(t + k * step);
        (f(-2.0)? - 8.0 * f(-1.0)? + 8.0 * f(1.0)? - f(2.0)?) / (12.0 * step)
    } else {
        // One-sided, stepping away from the regular endpoint.
        let sigma = -toward_regular;
        let f = |k: f64| integral(t + sigma * k * step);
        sigma * (-25.0 * f(0.0)? + 48.0 * f(1.0)? - 36.0 * f(2.0)? + 16.0 * f(3.0)? - 3.0 * f(4.0)?) / (12.0 * step)
    };
    Ok(sign * d)
}

/// Caputo derivative given the integrand's derivative `dh`.
pub fn try_caputo(
    order: &VariableOrder,
    side: Side,
    dh: &(dyn Fn(f64) -> Result<f64> + '_),
    t: f64,
    limit: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    let v = try_integral(order, side, WeightShift::Derivative, dh, t, limit, cfg)?;
    Ok(match side {
        Side::Left => v,
        Side::Right => -v,
    })
}

fn value_of(f: &SmoothFn1) -> impl Fn(f64) -> Result<f64> + '_ {
    move |x| Ok(f.eval(x))
}

fn derivative_of(f: &SmoothFn1) -> Result<impl Fn(f64) -> Result<f64> + '_> {
    let d = f.derivative_fn().ok_or_else(|| {
        Error::config("Caputo derivative needs a derivative of f; supply one or enable the finite-difference fallback")
    })?;
    Ok(move |x| Ok(d(x)))
}

/// Left Riemann–Liouville integral `ₐI_t^{α} f(t)`; 0 at `t = a`.
pub fn left_rl_integral(f: &SmoothFn1, order: &VariableOrder, a: f64, t: f64, cfg: &QuadConfig) -> Result<f64> {
    try_integral(order, Side::Left, WeightShift::Integral, &value_of(f), t, a, cfg)
}

/// Right Riemann–Liouville integral `ₜI_b^{α} f(t)`, order read as `α(τ, t)`.
pub fn right_rl_integral(f: &SmoothFn1, order: &VariableOrder, t: f64, b: f64, cfg: &QuadConfig) -> Result<f64> {
    try_integral(order, Side::Right, WeightShift::Integral, &value_of(f), t, b, cfg)
}

/// Left Riemann–Liouville derivative `d/dt ₐI_t^{1−α} f(t)`.
pub fn left_rl_derivative(
    f: &SmoothFn1,
    order: &VariableOrder,
    a: f64,
    t: f64,
    cfg: &QuadConfig,
    stencil: Stencil,
) -> Result<f64> {
    try_rl_derivative(order, Side::Left, &value_of(f), t, a, cfg, stencil)
}

/// Right Riemann–Liouville derivative `−d/dt ₜI_b^{1−α} f(t)`.
pub fn right_rl_derivative(
    f: &SmoothFn1,
    order: &VariableOrder,
    t: f64,
    b: f64,
    cfg: &QuadConfig,
    stencil: Stencil,
) -> Result<f64> {
    try_rl_derivative(order, Side::Right, &value_of(f), t, b, cfg, stencil)
}

/// Left Caputo derivative `ₐI_t^{1−α} f'(t)`; 0 at `t = a`.
pub fn left_caputo_derivative(f: &SmoothFn1, order: &VariableOrder, a: f64, t: f64, cfg: &QuadConfig) -> Result<f64> {
    try_caputo(order, Side::Left, &derivative_of(f)?, t, a, cfg)
}

/// Right Caputo derivative `−ₜI_b^{1−α} f'(t)`.
pub fn right_caputo_derivative(f: &SmoothFn1, order: &VariableOrder, t: f64, b: f64, cfg: &QuadConfig) -> Result<f64> {
    try_caputo(order, Side::Right, &derivative_of(f)?, t, b, cfg)
}

/// Any of the six operators at `t`, with left kinds anchored at
/// `interval.a` and right kinds at `interval.b`.
pub fn evaluate(
    kind: OperatorKind,
    f: &SmoothFn1,
    order: &VariableOrder,
    interval: Interval,
    t: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    evaluate_with(kind, f, order, interval, t, cfg, Stencil::default_for(interval))
}

pub fn evaluate_with(
    kind: OperatorKind,
    f: &SmoothFn1,
    order: &VariableOrder,
    interval: Interval,
    t: f64,
    cfg: &QuadConfig,
    stencil: Stencil,
) -> Result<f64> {
    let (a, b) = (interval.a, interval.b);
    match kind {
        OperatorKind::IntegralLeft => left_rl_integral(f, order, a, t, cfg),
        OperatorKind::IntegralRight => right_rl_integral(f, order, t, b, cfg),
        OperatorKind::RlLeft => left_rl_derivative(f, order, a, t, cfg, stencil),
        OperatorKind::RlRight => right_rl_derivative(f, order, t, b, cfg, stencil),
        OperatorKind::CaputoLeft => left_caputo_derivative(f, order, a, t, cfg),
        OperatorKind::CaputoRight => right_caputo_derivative(f, order, t, b, cfg),
    }
}

/// Partial operator along `axis` at `p`: the one-variable operator applied to
/// the section of `f` through `p`.
pub fn partial_op(
    kind: OperatorKind,
    axis: Axis,
    f: &SmoothFn2,
    order: &VariableOrder,
    rect: &Rect2,
    p: (f64, f64),
    cfg: &QuadConfig,
) -> Result<f64> {
    let interval = rect.axis(axis);
    partial_op_with(kind, axis, f, order, rect, p, cfg, Stencil::default_for(interval))
}

#[allow(clippy::too_many_arguments)]
pub fn partial_op_with(
    kind: OperatorKind,
    axis: Axis,
    f: &SmoothFn2,
    order: &VariableOrder,
    rect: &Rect2,
    p: (f64, f64),
    cfg: &QuadConfig,
    stencil: Stencil,
) -> Result<f64> {
    let other = rect.axis(axis.other());
    if !other.contains_loosely(coord(p, axis.other())) {
        return Err(Error::domain(format!("point {p:?} is outside the rectangle")));
    }
    let section = f.section(axis, p);
    evaluate_with(kind, &section, order, rect.axis(axis), coord(p, axis), cfg, stencil)
}
