//! Callable scalar functions of one and two variables with optional analytic
//! derivatives.
//!
//! The operators assume C¹ inputs. Absolute continuity or L¹ membership cannot
//! be checked on black-box callables, so the smoothness contract is the
//! stronger (and checkable) one. Callables must be safe to call from several
//! threads at once.

use crate::domain::{coord, probe_points, Axis, Interval, Rect2};
use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

pub type Fn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type Fn2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Where a derivative comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeKind {
    None,
    Analytic,
    /// Fourth-order central differences of the value; less accurate.
    FiniteDifference,
}

const DERIVATIVE_TOL: f64 = 1e-6;

fn central_diff(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

#[derive(Clone)]
pub struct SmoothFn1 {
    value: Fn1,
    derivative: Option<Fn1>,
    kind: DerivativeKind,
}

impl fmt::Debug for SmoothFn1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothFn1").field("derivative", &self.kind).finish()
    }
}

impl SmoothFn1 {
    pub fn new(value: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        SmoothFn1 {
            value: Arc::new(value),
            derivative: None,
            kind: DerivativeKind::None,
        }
    }

    pub fn with_derivative(mut self, d: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(d));
        self.kind = DerivativeKind::Analytic;
        self
    }

    /// Installs a finite-difference derivative (step `(b−a)·1e-5`) unless an
    /// analytic one is already present. The stencil samples up to two steps
    /// outside `domain` at its ends.
    pub fn with_fd_fallback(mut self, domain: Interval) -> Self {
        if self.derivative.is_some() {
            return self;
        }
        let h = domain.width() * 1e-5;
        let v = Arc::clone(&self.value);
        self.derivative = Some(Arc::new(move |x| central_diff(&*v, x, h)));
        self.kind = DerivativeKind::FiniteDifference;
        self
    }

    pub fn constant(c: f64) -> Self {
        SmoothFn1::new(move |_| c).with_derivative(|_| 0.0)
    }

    /// `(τ − a)^γ`.
    pub fn monomial(a: f64, gamma: f64) -> Self {
        let is_int = gamma.fract() == 0.0 && gamma.abs() < 64.0;
        let pow = move |x: f64, e: f64| {
            if is_int {
                x.powi(e as i32)
            } else {
                x.powf(e)
            }
        };
        SmoothFn1::new(move |t| pow(t - a, gamma)).with_derivative(move |t| {
            if gamma == 0.0 {
                0.0
            } else {
                gamma * pow(t - a, gamma - 1.0)
            }
        })
    }

    /// `Σ cₖ τᵏ`.
    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        let c = Arc::new(coeffs);
        let c2 = Arc::clone(&c);
        SmoothFn1::new(move |t| horner(&c, t)).with_derivative(move |t| horner_derivative(&c2, t))
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.value)(t)
    }

    pub fn derivative_kind(&self) -> DerivativeKind {
        self.kind
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn derivative_at(&self, t: f64) -> Option<f64> {
        self.derivative.as_ref().map(|d| d(t))
    }

    pub fn value_fn(&self) -> &Fn1 {
        &self.value
    }

    pub fn derivative_fn(&self) -> Option<&Fn1> {
        self.derivative.as_ref()
    }

    /// `s ↦ f(a + b − s)` with the matching derivative.
    pub fn reflected(&self, domain: Interval) -> SmoothFn1 {
        let v = Arc::clone(&self.value);
        let out = SmoothFn1 {
            value: Arc::new(move |s| v(domain.reflect(s))),
            derivative: None,
            kind: DerivativeKind::None,
        };
        match &self.derivative {
            Some(d) => {
                let d = Arc::clone(d);
                SmoothFn1 {
                    derivative: Some(Arc::new(move |s| -d(domain.reflect(s)))),
                    kind: self.kind,
                    ..out
                }
            }
            None => out,
        }
    }

    /// Checks an analytic derivative against central differences at 16
    /// interior probe points (absolute tolerance 1e-6).
    pub fn validate(&self, domain: Interval) -> Result<()> {
        let Some(d) = &self.derivative else {
            return Ok(());
        };
        if self.kind != DerivativeKind::Analytic {
            return Ok(());
        }
        let h = 1e-4 * domain.width();
        for (u, _) in probe_points(16) {
            let x = domain.lerp(0.05 + 0.9 * u);
            let fd = central_diff(&*self.value, x, h);
            let an = d(x);
            if !(an - fd).abs().le(&DERIVATIVE_TOL) {
                return Err(Error::Precondition(format!(
                    "derivative {an} disagrees with finite difference {fd} at {x}"
                )));
            }
        }
        Ok(())
    }
}

fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * t + ci)
}

fn horner_derivative(c: &[f64], t: f64) -> f64 {
    c.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (k, &ci)| acc * t + k as f64 * ci)
}

/// A function of `(t₁, t₂)` with optional partial derivatives.
#[derive(Clone)]
pub struct SmoothFn2 {
    value: Fn2,
    d_t1: Option<Fn2>,
    d_t2: Option<Fn2>,
}

impl fmt::Debug for SmoothFn2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothFn2")
            .field("d_t1", &self.d_t1.is_some())
            .field("d_t2", &self.d_t2.is_some())
            .finish()
    }
}

impl SmoothFn2 {
    pub fn new(value: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        SmoothFn2 {
            value: Arc::new(value),
            d_t1: None,
            d_t2: None,
        }
    }

    pub fn with_partials(
        mut self,
        d_t1: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        d_t2: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.d_t1 = Some(Arc::new(d_t1));
        self.d_t2 = Some(Arc::new(d_t2));
        self
    }

    pub fn with_partial(mut self, axis: Axis, d: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        match axis {
            Axis::T1 => self.d_t1 = Some(Arc::new(d)),
            Axis::T2 => self.d_t2 = Some(Arc::new(d)),
        }
        self
    }

    pub fn from_arcs(value: Fn2, d_t1: Option<Fn2>, d_t2: Option<Fn2>) -> Self {
        SmoothFn2 { value, d_t1, d_t2 }
    }

    pub fn constant(c: f64) -> Self {
        SmoothFn2::new(move |_, _| c).with_partials(|_, _| 0.0, |_, _| 0.0)
    }

    pub fn zero() -> Self {
        SmoothFn2::constant(0.0)
    }

    /// `Σᵢⱼ c[i][j] t₁ⁱ t₂ʲ`.
    pub fn polynomial(coeffs: Vec<Vec<f64>>) -> Self {
        let c = Arc::new(coeffs);
        let (c1, c2) = (Arc::clone(&c), Arc::clone(&c));
        SmoothFn2::new(move |x, y| poly2(&c, x, y, 0, 0))
            .with_partials(move |x, y| poly2(&c1, x, y, 1, 0), move |x, y| poly2(&c2, x, y, 0, 1))
    }

    /// `g(t₁)·w(t₂)`; partials are present when both factors have derivatives.
    pub fn product(g: SmoothFn1, w: SmoothFn1) -> Self {
        let (gv, wv) = (Arc::clone(&g.value), Arc::clone(&w.value));
        let mut out = SmoothFn2::new(move |x, y| gv(x) * wv(y));
        if let (Some(gd), Some(wd)) = (g.derivative.clone(), w.derivative.clone()) {
            let (gv, wv) = (Arc::clone(&g.value), Arc::clone(&w.value));
            out.d_t1 = Some(Arc::new(move |x, y| gd(x) * wv(y)));
            out.d_t2 = Some(Arc::new(move |x, y| gv(x) * wd(y)));
        }
        out
    }

    /// `self + s·other`; each partial is kept when both terms have it.
    pub fn add_scaled(&self, other: &SmoothFn2, s: f64) -> SmoothFn2 {
        let sum = |a: Option<&Fn2>, b: Option<&Fn2>| -> Option<Fn2> {
            let (a, b) = (Arc::clone(a?), Arc::clone(b?));
            Some(Arc::new(move |x, y| a(x, y) + s * b(x, y)))
        };
        SmoothFn2 {
            value: sum(Some(&self.value), Some(&other.value)).expect("values are always present"),
            d_t1: sum(self.d_t1.as_ref(), other.d_t1.as_ref()),
            d_t2: sum(self.d_t2.as_ref(), other.d_t2.as_ref()),
        }
    }

    /// Pointwise product; each partial is kept when both factors have it.
    pub fn mul(&self, other: &SmoothFn2) -> SmoothFn2 {
        let (u, v) = (Arc::clone(&self.value), Arc::clone(&other.value));
        let rule = |du: Option<&Fn2>, dv: Option<&Fn2>| -> Option<Fn2> {
            let (du, dv) = (Arc::clone(du?), Arc::clone(dv?));
            let (u, v) = (Arc::clone(&self.value), Arc::clone(&other.value));
            Some(Arc::new(move |x, y| du(x, y) * v(x, y) + u(x, y) * dv(x, y)))
        };
        SmoothFn2 {
            d_t1: rule(self.d_t1.as_ref(), other.d_t1.as_ref()),
            d_t2: rule(self.d_t2.as_ref(), other.d_t2.as_ref()),
            value: Arc::new(move |x, y| u(x, y) * v(x, y)),
        }
    }

    pub fn eval(&self, t1: f64, t2: f64) -> f64 {
        (self.value)(t1, t2)
    }

    pub fn partial(&self, axis: Axis) -> Option<&Fn2> {
        match axis {
            Axis::T1 => self.d_t1.as_ref(),
            Axis::T2 => self.d_t2.as_ref(),
        }
    }

    pub fn partial_at(&self, axis: Axis, t1: f64, t2: f64) -> Option<f64> {
        self.partial(axis).map(|d| d(t1, t2))
    }

    pub fn value_fn(&self) -> &Fn2 {
        &self.value
    }

    /// One-variable section along `axis` with the other coordinate of `p` frozen.
    pub fn section(&self, axis: Axis, p: (f64, f64)) -> SmoothFn1 {
        let frozen = coord(p, axis.other());
        let lift = |f: &Fn2| -> Fn1 {
            let f = Arc::clone(f);
            match axis {
                Axis::T1 => Arc::new(move |s| f(s, frozen)),
                Axis::T2 => Arc::new(move |s| f(frozen, s)),
            }
        };
        let derivative = self.partial(axis).map(lift);
        SmoothFn1 {
            value: lift(&self.value),
            kind: if derivative.is_some() {
                DerivativeKind::Analytic
            } else {
                DerivativeKind::None
            },
            derivative,
        }
    }

    /// `(t₁, t₂) ↦ f(t₂, t₁)`.
    pub fn transposed(&self) -> SmoothFn2 {
        let swap = |f: &Fn2| -> Fn2 {
            let f = Arc::clone(f);
            Arc::new(move |x, y| f(y, x))
        };
        SmoothFn2 {
            value: swap(&self.value),
            d_t1: self.d_t2.as_ref().map(swap),
            d_t2: self.d_t1.as_ref().map(swap),
        }
    }

    /// Checks each present partial against central differences at 16 interior
    /// probe points of `rect` (absolute tolerance 1e-6).
    pub fn validate(&self, rect: &Rect2) -> Result<()> {
        for axis in [Axis::T1, Axis::T2] {
            let Some(d) = self.partial(axis) else { continue };
            let h = 1e-4 * rect.axis(axis).width();
            for (u, v) in probe_points(16) {
                let p = (rect.t1.lerp(0.05 + 0.9 * u), rect.t2.lerp(0.05 + 0.9 * v));
                let sec = |s: f64| match axis {
                    Axis::T1 => (self.value)(s, p.1),
                    Axis::T2 => (self.value)(p.0, s),
                };
                let fd = central_diff(&sec, coord(p, axis), h);
                let an = d(p.0, p.1);
                if !(an - fd).abs().le(&DERIVATIVE_TOL) {
                    return Err(Error::Precondition(format!(
                        "partial along {axis:?} is {an} but finite difference gives {fd} at {p:?}"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn poly2(c: &[Vec<f64>], x: f64, y: f64, dx: u32, dy: u32) -> f64 {
    let mut acc = 0.0;
    for (i, row) in c.iter().enumerate() {
        for (j, &cij) in row.iter().enumerate() {
            if cij == 0.0 || (i as u32) < dx || (j as u32) < dy {
                continue;
            }
            let fx = falling(i as u32, dx) * x.powi(i as i32 - dx as i32);
            let fy = falling(j as u32, dy) * y.powi(j as i32 - dy as i32);
            acc += cij * fx * fy;
        }
    }
    acc
}

fn falling(n: u32, k: u32) -> f64 {
    (0..k).map(|i| (n - i) as f64).product()
}
