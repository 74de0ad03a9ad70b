//! Quadrature for weakly singular kernels with a variable exponent, plus the
//! regular rules used for edges and outer double integrals.
//!
//! The singular engine evaluates
//!
//! ```text
//! ∫ |t − τ|^(β − 1) / Γ(β) · h(τ) dτ,    β = α or 1 − α,
//! ```
//!
//! over `[a, t]` (left) or `[t, b]` (right). With `s = |t − τ|` and `S` the
//! range length, the range is split into geometric panels `[qᵏS, qᵏ⁻¹S]`,
//! `k = 1..=panels`. On each panel the integral is taken in the log variable
//! `y = ln(S/s)`, where `s^(β−1) ds = s^β dy` is smooth for every β, and a
//! Gauss–Legendre rule is applied there. The remaining piece `[0, q^panels·S]`
//! is integrated exactly with β and h frozen at `τ = t`.

use crate::domain::{Interval, Rect2};
use crate::error::{Error, Result};
use crate::order::VariableOrder;
use crate::specialfn::gamma_positive;
use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::sync::OnceLock;

/// Parameters of the graded singular rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    /// Number of geometric panels toward the singular endpoint.
    pub panels: usize,
    /// Gauss–Legendre nodes on each panel.
    pub nodes_per_panel: usize,
    /// Ratio between consecutive panel widths, in (0, 1).
    pub grading: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            panels: 24,
            nodes_per_panel: 10,
            grading: 0.15,
        }
    }
}

impl QuadConfig {
    pub fn new(panels: usize, nodes_per_panel: usize, grading: f64) -> Result<Self> {
        let cfg = QuadConfig {
            panels,
            nodes_per_panel,
            grading,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_panels(self, panels: usize) -> Self {
        QuadConfig { panels, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.panels < 1 {
            return Err(Error::config("quadrature needs at least one panel"));
        }
        if self.nodes_per_panel < 2 || self.nodes_per_panel > MAX_CACHED_NODES {
            return Err(Error::config(format!(
                "nodes_per_panel must be in [2, {MAX_CACHED_NODES}], got {}",
                self.nodes_per_panel
            )));
        }
        if !(self.grading > 0.0 && self.grading < 1.0) {
            return Err(Error::config(format!(
                "grading must lie in (0, 1), got {}",
                self.grading
            )));
        }
        Ok(())
    }
}

const MAX_CACHED_NODES: usize = 256;

type NodeTable = Box<[(f64, f64)]>;

static GL_CACHE: [OnceLock<NodeTable>; MAX_CACHED_NODES + 1] = [const { OnceLock::new() }; MAX_CACHED_NODES + 1];

fn compute_gl(n: usize) -> NodeTable {
    let n = NonZeroUsize::new(n).expect("at least one node");
    GaussLegendre::new(n).into_node_weight_pairs()
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> std::borrow::Cow<'static, [(f64, f64)]> {
    if n <= MAX_CACHED_NODES {
        std::borrow::Cow::Borrowed(&GL_CACHE[n].get_or_init(|| compute_gl(n))[..])
    } else {
        std::borrow::Cow::Owned(compute_gl(n).into_vec())
    }
}

/// Which side of the evaluation point the integration range lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `∫ₐᵗ`, order read as `α(t, τ)`.
    Left,
    /// `∫ₜᵇ`, order read transposed as `α(τ, t)`.
    Right,
}

/// Whether the kernel exponent is `α` (integrals) or `1 − α` (the integrals
/// inside derivatives).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightShift {
    Integral,
    Derivative,
}

#[derive(Debug, Clone, Copy)]
pub struct SingularKernel<'a> {
    pub order: &'a VariableOrder,
    pub side: Side,
    pub shift: WeightShift,
}

impl<'a> SingularKernel<'a> {
    pub fn new(order: &'a VariableOrder, side: Side, shift: WeightShift) -> Self {
        SingularKernel { order, side, shift }
    }

    /// Arguments passed to the order function. This is the only place where
    /// the right-sided transposition happens.
    #[inline]
    fn order_args(&self, t: f64, tau: f64) -> (f64, f64) {
        match self.side {
            Side::Left => (t, tau),
            Side::Right => (tau, t),
        }
    }

    /// Effective exponent β at `(t, τ)`; fails when β ∉ (0, 1).
    #[inline]
    pub fn exponent(&self, t: f64, tau: f64) -> Result<f64> {
        let (x, y) = self.order_args(t, tau);
        let alpha = self.order.eval(x, y);
        let beta = match self.shift {
            WeightShift::Integral => alpha,
            WeightShift::Derivative => 1.0 - alpha,
        };
        if beta > 0.0 && beta < 1.0 {
            Ok(beta)
        } else {
            Err(Error::Validity {
                t: x,
                tau: y,
                value: alpha,
                bounds: "(0, 1)".into(),
            })
        }
    }
}

/// Nodes and kernel-weighted weights for one evaluation point.
#[derive(Debug, Clone, Default)]
pub struct SingularRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl SingularRule {
    /// Rule for the kernel at evaluation point `t` whose other integration
    /// limit is `limit` (`a` for left kernels, `b` for right ones).
    pub fn build(kernel: &SingularKernel<'_>, t: f64, limit: f64, cfg: &QuadConfig) -> Result<Self> {
        cfg.validate()?;
        let (len, dir) = match kernel.side {
            Side::Left => (t - limit, -1.0),
            Side::Right => (limit - t, 1.0),
        };
        if !(len >= 0.0) {
            return Err(Error::domain(format!(
                "{:?} kernel at t = {t} needs the range on its {} side, limit is {limit}",
                kernel.side,
                if dir < 0.0 { "lower" } else { "upper" }
            )));
        }
        if len == 0.0 {
            return Ok(SingularRule::default());
        }
        let gl = gauss_legendre(cfg.nodes_per_panel);
        let log_width = -cfg.grading.ln();
        let half = 0.5 * log_width;
        let ln_len = len.ln();
        let n = cfg.panels * gl.len() + 1;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        // Constant orders repeat β at every node; keep the last Γ(β).
        let mut last = (f64::NAN, f64::NAN);
        for k in 0..cfg.panels {
            let y0 = k as f64 * log_width;
            for &(x, w) in gl.iter() {
                let y = y0 + half * (x + 1.0);
                let ln_s = ln_len - y;
                let tau = t + dir * ln_s.exp();
                let beta = kernel.exponent(t, tau)?;
                if beta != last.0 {
                    last = (beta, gamma_positive(beta));
                }
                nodes.push(tau);
                weights.push((beta * ln_s).exp() / last.1 * half * w);
            }
        }
        // Innermost piece [0, ε] with the integrand frozen at τ = t.
        let beta0 = kernel.exponent(t, t)?;
        let ln_eps = ln_len - cfg.panels as f64 * log_width;
        nodes.push(t);
        weights.push((beta0 * ln_eps).exp() / gamma_positive(beta0 + 1.0));
        Ok(SingularRule { nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn apply(&self, h: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * h(x)).sum()
    }

    pub fn try_apply(&self, h: impl Fn(f64) -> Result<f64>) -> Result<f64> {
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * h(x)?;
        }
        Ok(acc)
    }
}

/// `∫ |t−τ|^(β−1)/Γ(β) · h(τ) dτ` over the kernel's side of `t`, with `limit`
/// the far end of the range. A zero-length range gives 0.
pub fn singular_integral(
    kernel: &SingularKernel<'_>,
    h: impl Fn(f64) -> f64,
    t: f64,
    limit: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    Ok(SingularRule::build(kernel, t, limit, cfg)?.apply(h))
}

/// Traversal direction of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Positive,
    Negative,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Positive => 1.0,
            Orientation::Negative => -1.0,
        }
    }
}

/// `orientation · ∫_lo^hi h(s) ds` by composite Gauss–Legendre on
/// `cfg.panels` equal panels.
pub fn line_integral_edge(
    h: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    orientation: Orientation,
    cfg: &QuadConfig,
) -> Result<f64> {
    try_line_integral_edge(|s| Ok(h(s)), lo, hi, orientation, cfg)
}

pub fn try_line_integral_edge(
    h: impl Fn(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    orientation: Orientation,
    cfg: &QuadConfig,
) -> Result<f64> {
    cfg.validate()?;
    if !(lo < hi) {
        return Err(Error::domain(format!("edge needs lo < hi, got [{lo}, {hi}]")));
    }
    let gl = gauss_legendre(cfg.nodes_per_panel);
    let width = (hi - lo) / cfg.panels as f64;
    let mut acc = 0.0;
    for p in 0..cfg.panels {
        let left = lo + p as f64 * width;
        let mut panel = 0.0;
        for &(x, w) in gl.iter() {
            panel += w * h(left + 0.5 * width * (x + 1.0))?;
        }
        acc += 0.5 * width * panel;
    }
    Ok(orientation.sign() * acc)
}

/// Default endpoint clustering of the outer rule; see [`OuterRule`].
pub const DEFAULT_CLUSTERING: u32 = 3;

/// One-dimensional rule for the outer integrals.
///
/// Gauss–Legendre on `[0, 1]` composed with the map `φ` whose derivative is
/// proportional to `sinᵐ(πs)`, `m = clustering ∈ 0..=4` (`m = 0` is plain
/// Gauss–Legendre). Near either end `φ(s) ~ s^(m+1)`, so an edge behaviour
/// `(t−a)^p`, `p > −1`, of the inner operators becomes `s^((m+1)(p+1)−1)`,
/// while `φ` stays entire and costs nothing in the interior.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OuterRule {
    pub points: usize,
    pub clustering: u32,
}

impl OuterRule {
    pub fn new(points: usize) -> Self {
        OuterRule {
            points,
            clustering: DEFAULT_CLUSTERING,
        }
    }

    pub fn plain(points: usize) -> Self {
        OuterRule { points, clustering: 0 }
    }

    /// Nodes and weights on `interval`.
    pub fn nodes(&self, interval: Interval) -> Result<Vec<(f64, f64)>> {
        if self.points < 1 {
            return Err(Error::config("outer rule needs at least one point per axis"));
        }
        let map: fn(f64) -> (f64, f64) = match self.clustering {
            0 => |s| (s, 1.0),
            1 => |s| {
                let (sn, c) = (PI * s).sin_cos();
                (0.5 * (1.0 - c), 0.5 * PI * sn)
            },
            2 => |s| (s - (2.0 * PI * s).sin() / (2.0 * PI), 1.0 - (2.0 * PI * s).cos()),
            3 => |s| {
                let (sn, c) = (PI * s).sin_cos();
                (0.5 - 0.75 * c + 0.25 * c * c * c, 0.75 * PI * sn * sn * sn)
            },
            4 => |s| {
                let x = 2.0 * PI * s;
                let sn = (PI * s).sin();
                (
                    s - 2.0 * x.sin() / (3.0 * PI) + (2.0 * x).sin() / (12.0 * PI),
                    8.0 / 3.0 * sn.powi(4),
                )
            },
            m => {
                return Err(Error::config(format!("clustering must be in 0..=4, got {m}")));
            }
        };
        let w = interval.width();
        Ok(gauss_legendre(self.points)
            .iter()
            .map(|&(x, gw)| {
                let (phi, dphi) = map(0.5 * (x + 1.0));
                (interval.lerp(phi), w * dphi * 0.5 * gw)
            })
            .collect())
    }
}

/// Tensor-product integral of a vector-valued integrand over `rect`.
///
/// Points are evaluated in parallel, then reduced in a fixed order
/// (`t₂` inner, `t₁` outer), so the result does not depend on the thread
/// schedule.
pub fn integrate_rect<const K: usize>(
    rect: &Rect2,
    rule: OuterRule,
    f: impl Fn(f64, f64) -> Result<[f64; K]> + Sync,
) -> Result<[f64; K]> {
    let n1 = rule.nodes(rect.t1)?;
    let n2 = rule.nodes(rect.t2)?;
    let values: Vec<[f64; K]> = (0..n1.len() * n2.len())
        .into_par_iter()
        .map(|idx| f(n1[idx / n2.len()].0, n2[idx % n2.len()].0))
        .collect::<Result<_>>()?;
    reduce_rect(&n1, &n2, &values)
}

/// Weighted sum of row-major samples on the tensor grid `n1 × n2`, `t₂` inner.
pub fn reduce_rect<const K: usize>(n1: &[(f64, f64)], n2: &[(f64, f64)], values: &[[f64; K]]) -> Result<[f64; K]> {
    debug_assert_eq!(values.len(), n1.len() * n2.len());
    let mut total = [0.0; K];
    for (i, &(_, w1)) in n1.iter().enumerate() {
        let mut row = [0.0; K];
        for (j, &(_, w2)) in n2.iter().enumerate() {
            let v = &values[i * n2.len() + j];
            for k in 0..K {
                row[k] += w2 * v[k];
            }
        }
        for k in 0..K {
            total[k] += w1 * row[k];
        }
    }
    for (k, v) in total.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("outer integral component {k} is {v}")));
        }
    }
    Ok(total)
}
