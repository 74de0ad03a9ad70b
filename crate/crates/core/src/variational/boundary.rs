use crate::domain::Rect2;
use crate::error::{Error, Result};
use crate::function::{SmoothFn1, SmoothFn2};
use std::f64::consts::PI;
use std::sync::Arc;

/// Dirichlet data on the four edges of a rectangle. Each edge function takes
/// the coordinate that varies along it: `t₁` for bottom and top, `t₂` for
/// left and right.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    bottom: SmoothFn1,
    right: SmoothFn1,
    top: SmoothFn1,
    left: SmoothFn1,
    rect: Rect2,
}

const CORNER_TOL: f64 = 1e-12;

impl BoundaryData {
    /// Edges lacking a derivative get a finite-difference one. Adjacent edges
    /// must agree at shared corners.
    pub fn new(bottom: SmoothFn1, right: SmoothFn1, top: SmoothFn1, left: SmoothFn1, rect: Rect2) -> Result<Self> {
        let (i1, i2) = (rect.t1, rect.t2);
        let corners = [
            ("bottom-left", bottom.eval(i1.a), left.eval(i2.a)),
            ("bottom-right", bottom.eval(i1.b), right.eval(i2.a)),
            ("top-left", top.eval(i1.a), left.eval(i2.b)),
            ("top-right", top.eval(i1.b), right.eval(i2.b)),
        ];
        for (name, u, v) in corners {
            if !((u - v).abs() <= CORNER_TOL * u.abs().max(v.abs()).max(1.0)) {
                return Err(Error::config(format!(
                    "boundary edges disagree at the {name} corner: {u} vs {v}"
                )));
            }
        }
        Ok(BoundaryData {
            bottom: bottom.with_fd_fallback(i1),
            right: right.with_fd_fallback(i2),
            top: top.with_fd_fallback(i1),
            left: left.with_fd_fallback(i2),
            rect,
        })
    }

    pub fn constant(c: f64, rect: Rect2) -> Self {
        let e = SmoothFn1::constant(c);
        BoundaryData::new(e.clone(), e.clone(), e.clone(), e, rect).expect("constant edges agree")
    }

    /// Trace of `psi` on the boundary of `rect`.
    pub fn trace_of(psi: &SmoothFn2, rect: Rect2) -> Result<Self> {
        let (i1, i2) = (rect.t1, rect.t2);
        let edge = |fixed: f64, along_t1: bool| -> SmoothFn1 {
            let v = Arc::clone(psi.value_fn());
            let d = psi
                .partial(if along_t1 { crate::Axis::T1 } else { crate::Axis::T2 })
                .cloned();
            let f = if along_t1 {
                SmoothFn1::new(move |s| v(s, fixed))
            } else {
                SmoothFn1::new(move |s| v(fixed, s))
            };
            match d {
                Some(d) if along_t1 => f.with_derivative(move |s| d(s, fixed)),
                Some(d) => f.with_derivative(move |s| d(fixed, s)),
                None => f,
            }
        };
        BoundaryData::new(
            edge(i2.a, true),
            edge(i1.b, false),
            edge(i2.b, true),
            edge(i1.a, false),
            rect,
        )
    }

    pub fn rect(&self) -> Rect2 {
        self.rect
    }

    /// Transfinite (Coons) interpolant of the four edges.
    pub fn lift(&self) -> SmoothFn2 {
        let (i1, i2) = (self.rect.t1, self.rect.t2);
        let (w1, w2) = (i1.width(), i2.width());
        let c00 = self.bottom.eval(i1.a);
        let c10 = self.bottom.eval(i1.b);
        let c01 = self.top.eval(i1.a);
        let c11 = self.top.eval(i1.b);
        let edges = Arc::new((
            self.bottom.clone(),
            self.right.clone(),
            self.top.clone(),
            self.left.clone(),
        ));
        let d = |f: &SmoothFn1, x: f64| f.derivative_at(x).expect("edge derivatives are filled in");

        let e = Arc::clone(&edges);
        let value = move |t1: f64, t2: f64| {
            let (b, rt, tp, lf) = &*e;
            let (s, r) = (i1.normalize(t1), i2.normalize(t2));
            (1.0 - r) * b.eval(t1) + r * tp.eval(t1) + (1.0 - s) * lf.eval(t2) + s * rt.eval(t2)
                - ((1.0 - s) * (1.0 - r) * c00 + s * (1.0 - r) * c10 + (1.0 - s) * r * c01 + s * r * c11)
        };
        let e = Arc::clone(&edges);
        let d1 = move |t1: f64, t2: f64| {
            let (b, rt, tp, lf) = &*e;
            let r = i2.normalize(t2);
            (1.0 - r) * d(b, t1) + r * d(tp, t1) + (rt.eval(t2) - lf.eval(t2)) / w1
                - ((1.0 - r) * (c10 - c00) + r * (c11 - c01)) / w1
        };
        let e = edges;
        let d2 = move |t1: f64, t2: f64| {
            let (b, rt, tp, lf) = &*e;
            let s = i1.normalize(t1);
            (tp.eval(t1) - b.eval(t1)) / w2 + (1.0 - s) * d(lf, t2) + s * d(rt, t2)
                - ((1.0 - s) * (c01 - c00) + s * (c11 - c10)) / w2
        };
        SmoothFn2::new(value).with_partials(d1, d2)
    }
}

/// Largest number of modes per axis.
pub const MAX_MODES: usize = 32;

/// `sin(kx)` and `k·cos(kx)` for `k = 1..=n` by angle addition.
fn sine_table(n: usize, x: f64, s: &mut [f64; MAX_MODES], kc: &mut [f64; MAX_MODES]) {
    let (sx, cx) = x.sin_cos();
    let (mut sk, mut ck) = (sx, cx);
    for k in 0..n {
        s[k] = sk;
        kc[k] = (k + 1) as f64 * ck;
        (sk, ck) = (sk * cx + ck * sx, ck * cx - sk * sx);
    }
}

/// Basis mode `sin(kπŝ₁)·sin(mπŝ₂)` in normalized coordinates of `rect`.
pub fn mode_fn(k: usize, m: usize, rect: Rect2) -> SmoothFn2 {
    let (i1, i2) = (rect.t1, rect.t2);
    let (fk, fm) = (k as f64 * PI, m as f64 * PI);
    let (w1, w2) = (i1.width(), i2.width());
    SmoothFn2::new(move |x, y| (fk * i1.normalize(x)).sin() * (fm * i2.normalize(y)).sin()).with_partials(
        move |x, y| fk / w1 * (fk * i1.normalize(x)).cos() * (fm * i2.normalize(y)).sin(),
        move |x, y| fm / w2 * (fk * i1.normalize(x)).sin() * (fm * i2.normalize(y)).cos(),
    )
}

/// `u = lift + Σ c_{km} φ_{km}` with `k, m = 1..=n_modes`; `k` varies slowest
/// in the coefficient vector.
#[derive(Debug, Clone)]
pub struct RitzExpansion {
    lift: SmoothFn2,
    n_modes: usize,
    coeffs: Vec<f64>,
    rect: Rect2,
}

impl RitzExpansion {
    pub fn new(lift: SmoothFn2, n_modes: usize, coeffs: Vec<f64>, rect: Rect2) -> Result<Self> {
        if !(1..=MAX_MODES).contains(&n_modes) {
            return Err(Error::config(format!(
                "n_modes must be in 1..={MAX_MODES}, got {n_modes}"
            )));
        }
        if coeffs.len() != n_modes * n_modes {
            return Err(Error::config(format!(
                "{n_modes} modes per axis need {} coefficients, got {}",
                n_modes * n_modes,
                coeffs.len()
            )));
        }
        Ok(RitzExpansion {
            lift,
            n_modes,
            coeffs,
            rect,
        })
    }

    pub fn zero(lift: SmoothFn2, n_modes: usize, rect: Rect2) -> Result<Self> {
        RitzExpansion::new(lift, n_modes, vec![0.0; n_modes * n_modes], rect)
    }

    pub fn with_coeffs(&self, coeffs: Vec<f64>) -> Result<Self> {
        RitzExpansion::new(self.lift.clone(), self.n_modes, coeffs, self.rect)
    }

    pub fn modes(&self) -> Vec<(usize, usize)> {
        (1..=self.n_modes)
            .flat_map(|k| (1..=self.n_modes).map(move |m| (k, m)))
            .collect()
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn lift(&self) -> &SmoothFn2 {
        &self.lift
    }

    pub fn rect(&self) -> Rect2 {
        self.rect
    }

    /// The expansion as a function with analytic partials.
    pub fn to_fn(&self) -> SmoothFn2 {
        let n = self.n_modes;
        let (i1, i2) = (self.rect.t1, self.rect.t2);
        let (w1, w2) = (i1.width(), i2.width());
        let c: Arc<[f64]> = self.coeffs.clone().into();
        // Returns Σ c·(a_k b_m) with a, b picked from the sine tables.
        let eval = move |x: f64, y: f64, which: u8| -> f64 {
            let (mut s1, mut k1) = ([0.0; MAX_MODES], [0.0; MAX_MODES]);
            let (mut s2, mut k2) = ([0.0; MAX_MODES], [0.0; MAX_MODES]);
            sine_table(n, PI * i1.normalize(x), &mut s1, &mut k1);
            sine_table(n, PI * i2.normalize(y), &mut s2, &mut k2);
            let (a, b, scale) = match which {
                0 => (&s1, &s2, 1.0),
                1 => (&k1, &s2, PI / w1),
                _ => (&s1, &k2, PI / w2),
            };
            let mut acc = 0.0;
            for k in 0..n {
                let row = &c[k * n..(k + 1) * n];
                let inner: f64 = row.iter().zip(&b[..n]).map(|(ci, bi)| ci * bi).sum();
                acc += a[k] * inner;
            }
            scale * acc
        };
        let lift = self.lift.clone();
        let (l0, l1, l2) = (
            Arc::clone(lift.value_fn()),
            lift.partial(crate::Axis::T1).cloned(),
            lift.partial(crate::Axis::T2).cloned(),
        );
        let (e0, e1, e2) = (eval.clone(), eval.clone(), eval);
        let value: crate::function::Fn2 = Arc::new(move |x, y| l0(x, y) + e0(x, y, 0));
        let d1 = l1.map(|l| -> crate::function::Fn2 { Arc::new(move |x, y| l(x, y) + e1(x, y, 1)) });
        let d2 = l2.map(|l| -> crate::function::Fn2 { Arc::new(move |x, y| l(x, y) + e2(x, y, 2)) });
        SmoothFn2::from_arcs(value, d1, d2)
    }
}
