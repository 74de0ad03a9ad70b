//! JSON run configuration and its conversion into library objects.

use crate::error::{CliError, CliResult};
use crate::expr::{self, Expr};
use serde::Deserialize;
use std::sync::Arc;
use vofrac::variational::{Lagrangian, Slots};
use vofrac::{BoundMode, Interval, OperatorKind, QuadConfig, Rect2, SmoothFn1, SmoothFn2, VariableOrder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Op,
    Verify,
    Solve,
    Selftest,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub tolerance: Option<f64>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub quad: QuadConfig,
    pub op: Option<OpConfig>,
    pub verify: Option<VerifyConfig>,
    pub solve: Option<SolveConfig>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// A function of one variable: a number, an expression in `t` (or `tau`),
/// or a built-in.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Fn1Spec {
    Const(f64),
    Expr(String),
    Builtin(Builtin1),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum Builtin1 {
    /// `(t − anchor)^gamma`.
    Monomial {
        gamma: f64,
        #[serde(default)]
        anchor: f64,
    },
    /// `amplitude·sin(freq·t + phase)`.
    Sine {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        freq: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `Σ cₖ tᵏ`.
    Poly(Vec<f64>),
}

/// A function on the rectangle: a number, an expression in `t1, t2`, or a
/// built-in.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Fn2Spec {
    Const(f64),
    Expr(String),
    Builtin(Builtin2),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum Builtin2 {
    /// `t1^p1 · t2^p2`.
    Monomial { p1: u32, p2: u32 },
    /// `amplitude·sin(freq1·t1)·sin(freq2·t2)`.
    Sine {
        #[serde(default = "one")]
        amplitude: f64,
        freq1: f64,
        freq2: f64,
    },
    /// `Σ c[i][j] t1^i t2^j`.
    Poly(Vec<Vec<f64>>),
}

fn one() -> f64 {
    1.0
}

/// An order `α(t, τ)`: a number or an expression in `t` and `tau`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OrderSpec {
    Const(f64),
    Expr(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSpec {
    #[default]
    Plain,
    AboveOneOverL,
    BelowOneMinus,
}

impl From<BoundSpec> for BoundMode {
    fn from(b: BoundSpec) -> Self {
        match b {
            BoundSpec::Plain => BoundMode::Plain,
            BoundSpec::AboveOneOverL => BoundMode::AboveOneOverL,
            BoundSpec::BelowOneMinus => BoundMode::BelowOneMinus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum KindSpec {
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

impl From<KindSpec> for OperatorKind {
    fn from(k: KindSpec) -> Self {
        match k {
            KindSpec::IntegralLeft => OperatorKind::IntegralLeft,
            KindSpec::IntegralRight => OperatorKind::IntegralRight,
            KindSpec::RlLeft => OperatorKind::RlLeft,
            KindSpec::RlRight => OperatorKind::RlRight,
            KindSpec::CaputoLeft => OperatorKind::CaputoLeft,
            KindSpec::CaputoRight => OperatorKind::CaputoRight,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum GridPoint {
    Scalar(f64),
    Pair([f64; 2]),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Points(Vec<GridPoint>),
    /// `n` equally spaced points from `start` to `end` inclusive.
    Range {
        start: f64,
        end: f64,
        n: usize,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpConfig {
    pub kind: KindSpec,
    pub f: Fn2OrFn1,
    pub alpha: OrderSpec,
    #[serde(default = "default_l")]
    pub l: u32,
    #[serde(default)]
    pub bound: BoundSpec,
    /// Interval of a one-variable evaluation.
    pub interval: Option<[f64; 2]>,
    /// Axis (1 or 2) of a partial operator; its presence selects 2D mode.
    pub axis: Option<u8>,
    pub rect: Option<[[f64; 2]; 2]>,
    pub grid: GridSpec,
    /// Finite-difference step of Riemann–Liouville derivatives.
    pub h: Option<f64>,
}

/// The `f` of an operator evaluation; which variables it may use depends on
/// whether the evaluation is one- or two-dimensional, so it stays raw until
/// then.
#[derive(Debug, Clone, Deserialize)]
#[serde(transparent)]
pub struct Fn2OrFn1(pub serde_json::Value);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IdentityKind {
    Ibp,
    Green,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Level {
    pub outer_grid: usize,
    pub panels: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub identity: IdentityKind,
    #[serde(default = "unit_rect")]
    pub rect: [[f64; 2]; 2],
    pub f: Fn2Spec,
    pub g: Fn2Spec,
    pub eta: Option<Fn2Spec>,
    pub eta1: Option<Fn2Spec>,
    pub eta2: Option<Fn2Spec>,
    pub alpha1: OrderSpec,
    pub alpha2: OrderSpec,
    #[serde(default = "default_l")]
    pub l: u32,
    #[serde(default = "default_ladder")]
    pub ladder: Vec<Level>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub lagrangian: LagrangianSpec,
    #[serde(default = "zero_fn2")]
    pub boundary: Fn2Spec,
    pub alpha1: OrderSpec,
    pub alpha2: OrderSpec,
    #[serde(default = "default_l")]
    pub l: u32,
    #[serde(default)]
    pub bound: BoundSpec,
    #[serde(default = "unit_rect")]
    pub rect: [[f64; 2]; 2],
    pub n_modes: Option<usize>,
    pub outer_grid: Option<usize>,
    pub opt_tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub residual_grid: Option<usize>,
}

/// Either a preset (`quadratic`, `string`) or `L` as an expression in
/// `t1, t2, u, d1, d2`. Omitted partials are derived symbolically.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LagrangianSpec {
    pub preset: Option<String>,
    pub mass: Option<f64>,
    pub sigma: Option<Fn1Spec>,
    pub tension: Option<f64>,
    #[serde(rename = "L")]
    pub l: Option<String>,
    #[serde(rename = "dL_du")]
    pub dl_du: Option<String>,
    #[serde(rename = "dL_dd1")]
    pub dl_dd1: Option<String>,
    #[serde(rename = "dL_dd2")]
    pub dl_dd2: Option<String>,
}

fn default_l() -> u32 {
    2
}

fn unit_rect() -> [[f64; 2]; 2] {
    [[0.0, 1.0], [0.0, 1.0]]
}

fn zero_fn2() -> Fn2Spec {
    Fn2Spec::Const(0.0)
}

fn default_ladder() -> Vec<Level> {
    [8, 16, 24]
        .into_iter()
        .map(|n| Level {
            outer_grid: n,
            panels: n,
        })
        .collect()
}

// Builders.

fn parse_field(field: &str, src: &str, vars: &[&str], aliases: &[(&str, usize)]) -> CliResult<Expr> {
    expr::parse_with_aliases(src, vars, aliases).map_err(|source| CliError::Expression {
        field: field.to_string(),
        source,
    })
}

pub fn interval(field: &str, iv: [f64; 2]) -> CliResult<Interval> {
    Interval::new(iv[0], iv[1]).map_err(|e| CliError::config(format!("{field}: {e}")))
}

pub fn rect(field: &str, r: [[f64; 2]; 2]) -> CliResult<Rect2> {
    Ok(Rect2::new(
        interval(&format!("{field}[0]"), r[0])?,
        interval(&format!("{field}[1]"), r[1])?,
    ))
}

impl Fn1Spec {
    pub fn build(&self, field: &str) -> CliResult<SmoothFn1> {
        Ok(match self {
            Fn1Spec::Const(c) => SmoothFn1::constant(*c),
            Fn1Spec::Expr(src) => {
                let e = Arc::new(parse_field(field, src, &["t"], &[("tau", 0)])?);
                let d = Arc::new(e.diff(0));
                SmoothFn1::new(move |t| e.eval(&[t])).with_derivative(move |t| d.eval(&[t]))
            }
            Fn1Spec::Builtin(Builtin1::Monomial { gamma, anchor }) => SmoothFn1::monomial(*anchor, *gamma),
            Fn1Spec::Builtin(Builtin1::Sine { amplitude, freq, phase }) => {
                let (a, w, p) = (*amplitude, *freq, *phase);
                SmoothFn1::new(move |t| a * (w * t + p).sin()).with_derivative(move |t| a * w * (w * t + p).cos())
            }
            Fn1Spec::Builtin(Builtin1::Poly(c)) => SmoothFn1::polynomial(c.clone()),
        })
    }
}

impl Fn2Spec {
    pub fn build(&self, field: &str) -> CliResult<SmoothFn2> {
        Ok(match self {
            Fn2Spec::Const(c) => SmoothFn2::constant(*c),
            Fn2Spec::Expr(src) => {
                let e = Arc::new(parse_field(field, src, &["t1", "t2"], &[])?);
                let (d1, d2) = (Arc::new(e.diff(0)), Arc::new(e.diff(1)));
                SmoothFn2::new(move |a, b| e.eval(&[a, b]))
                    .with_partials(move |a, b| d1.eval(&[a, b]), move |a, b| d2.eval(&[a, b]))
            }
            Fn2Spec::Builtin(Builtin2::Monomial { p1, p2 }) => {
                let mut c = vec![vec![0.0; *p2 as usize + 1]; *p1 as usize + 1];
                c[*p1 as usize][*p2 as usize] = 1.0;
                SmoothFn2::polynomial(c)
            }
            Fn2Spec::Builtin(Builtin2::Sine {
                amplitude,
                freq1,
                freq2,
            }) => {
                let (a, w1, w2) = (*amplitude, *freq1, *freq2);
                SmoothFn2::new(move |x, y| a * (w1 * x).sin() * (w2 * y).sin()).with_partials(
                    move |x, y| a * w1 * (w1 * x).cos() * (w2 * y).sin(),
                    move |x, y| a * w2 * (w1 * x).sin() * (w2 * y).cos(),
                )
            }
            Fn2Spec::Builtin(Builtin2::Poly(c)) => SmoothFn2::polynomial(c.clone()),
        })
    }
}

impl Fn2OrFn1 {
    pub fn as_fn1(&self, field: &str) -> CliResult<SmoothFn1> {
        Fn1Spec::deserialize(&self.0)
            .map_err(|e| CliError::config(format!("{field}: {e}")))?
            .build(field)
    }

    pub fn as_fn2(&self, field: &str) -> CliResult<SmoothFn2> {
        Fn2Spec::deserialize(&self.0)
            .map_err(|e| CliError::config(format!("{field}: {e}")))?
            .build(field)
    }
}

impl OrderSpec {
    pub fn build(&self, field: &str, domain: Interval, l: u32, mode: BoundMode) -> CliResult<VariableOrder> {
        Ok(match self {
            OrderSpec::Const(c) => VariableOrder::constant_in(*c, domain, l, mode)?,
            OrderSpec::Expr(src) => {
                let e = parse_field(field, src, &["t", "tau"], &[])?;
                VariableOrder::new(move |t, tau| e.eval(&[t, tau]), domain, l, mode)?
            }
        })
    }
}

impl LagrangianSpec {
    pub fn build(&self, probe: &Rect2) -> CliResult<Lagrangian> {
        match (self.preset.as_deref(), &self.l) {
            (Some(_), Some(_)) => Err(CliError::config("lagrangian: give either a preset or L, not both")),
            (None, None) => Err(CliError::config("lagrangian: needs a preset or an L expression")),
            (Some("quadratic"), None) => {
                self.reject_extra(&["mass"])?;
                Ok(Lagrangian::quadratic(self.mass.unwrap_or(1.0)))
            }
            (Some("string"), None) => {
                self.reject_extra(&["sigma", "tension"])?;
                let sigma = match &self.sigma {
                    Some(s) => s.build("lagrangian.sigma")?,
                    None => SmoothFn1::constant(1.0),
                };
                Ok(Lagrangian::string(sigma, self.tension.unwrap_or(1.0))?)
            }
            (Some(other), None) => Err(CliError::config(format!(
                "lagrangian: unknown preset '{other}' (expected quadratic or string)"
            ))),
            (None, Some(src)) => {
                self.reject_extra(&["L", "dL_du", "dL_dd1", "dL_dd2"])?;
                self.build_expressions(src, probe)
            }
        }
    }

    fn reject_extra(&self, allowed: &[&str]) -> CliResult<()> {
        let present = [
            ("mass", self.mass.is_some()),
            ("sigma", self.sigma.is_some()),
            ("tension", self.tension.is_some()),
            ("L", self.l.is_some()),
            ("dL_du", self.dl_du.is_some()),
            ("dL_dd1", self.dl_dd1.is_some()),
            ("dL_dd2", self.dl_dd2.is_some()),
        ];
        match present.iter().find(|(name, set)| *set && !allowed.contains(name)) {
            Some((name, _)) => Err(CliError::config(format!("lagrangian: '{name}' does not apply here"))),
            None => Ok(()),
        }
    }

    fn build_expressions(&self, src: &str, probe: &Rect2) -> CliResult<Lagrangian> {
        const VARS: [&str; 5] = ["t1", "t2", "u", "d1", "d2"];
        let l = parse_field("lagrangian.L", src, &VARS, &[])?;
        let partial = |given: &Option<String>, name: &str, slot: usize| -> CliResult<(Expr, bool)> {
            match given {
                Some(s) => Ok((parse_field(&format!("lagrangian.{name}"), s, &VARS, &[])?, true)),
                None => Ok((l.diff(slot), false)),
            }
        };
        let (du, g1) = partial(&self.dl_du, "dL_du", 2)?;
        let (dd1, g2) = partial(&self.dl_dd1, "dL_dd1", 3)?;
        let (dd2, g3) = partial(&self.dl_dd2, "dL_dd2", 4)?;
        let wrap = |e: Expr| move |s: &Slots| e.eval(&[s.t1, s.t2, s.u, s.d1, s.d2]);
        let lag = Lagrangian::unchecked(wrap(l), wrap(du), wrap(dd1), wrap(dd2));
        // Derived partials are exact; only user-written ones need the probe.
        if g1 || g2 || g3 {
            lag.validate(probe)?;
        }
        Ok(lag)
    }
}

impl GridSpec {
    pub fn points(&self) -> CliResult<Vec<GridPoint>> {
        match *self {
            GridSpec::Points(ref p) => Ok(p.clone()),
            GridSpec::Range { start, end, n } => Ok(match n {
                0 => Vec::new(),
                1 => vec![GridPoint::Scalar(start)],
                _ => (0..n)
                    .map(|i| GridPoint::Scalar(start + (end - start) * i as f64 / (n - 1) as f64))
                    .collect(),
            }),
        }
    }
}
