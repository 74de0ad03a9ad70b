use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A closed interval `[a, b]` with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::domain(format!("interval needs finite a < b, got [{a}, {b}]")));
        }
        Ok(Interval { a, b })
    }

    pub fn unit() -> Self {
        Interval { a: 0.0, b: 1.0 }
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    /// Mirror point `a + b − s`.
    pub fn reflect(&self, s: f64) -> f64 {
        self.a + self.b - s
    }

    pub fn contains(&self, s: f64) -> bool {
        s >= self.a && s <= self.b
    }

    /// True when `s` lies in the interval up to a relative slack of 1e-12.
    pub(crate) fn contains_loosely(&self, s: f64) -> bool {
        let slack = 1e-12 * (1.0 + self.a.abs().max(self.b.abs()));
        s >= self.a - slack && s <= self.b + slack
    }

    /// Maps `u ∈ [0, 1]` to the interval.
    pub fn lerp(&self, u: f64) -> f64 {
        self.a + u * self.width()
    }

    /// Maps a point of the interval to `[0, 1]`.
    pub fn normalize(&self, s: f64) -> f64 {
        (s - self.a) / self.width()
    }
}

/// Coordinate direction on a rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    #[serde(rename = "1")]
    T1,
    #[serde(rename = "2")]
    T2,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::T1 => Axis::T2,
            Axis::T2 => Axis::T1,
        }
    }
}

/// The rectangle `[a₁, b₁] × [a₂, b₂]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect2 {
    pub t1: Interval,
    pub t2: Interval,
}

impl Rect2 {
    pub fn new(t1: Interval, t2: Interval) -> Self {
        Rect2 { t1, t2 }
    }

    pub fn unit() -> Self {
        Rect2::new(Interval::unit(), Interval::unit())
    }

    pub fn axis(&self, axis: Axis) -> Interval {
        match axis {
            Axis::T1 => self.t1,
            Axis::T2 => self.t2,
        }
    }

    pub fn area(&self) -> f64 {
        self.t1.width() * self.t2.width()
    }

    pub fn transpose(&self) -> Rect2 {
        Rect2::new(self.t2, self.t1)
    }

    pub fn contains(&self, p: (f64, f64)) -> bool {
        self.t1.contains(p.0) && self.t2.contains(p.1)
    }
}

/// Coordinate of `p` along `axis`.
pub(crate) fn coord(p: (f64, f64), axis: Axis) -> f64 {
    match axis {
        Axis::T1 => p.0,
        Axis::T2 => p.1,
    }
}

/// Deterministic low-discrepancy points in `[0, 1)^2` (additive recurrence on
/// the plastic number). Used for construction-time probes.
pub(crate) fn probe_points(n: usize) -> impl Iterator<Item = (f64, f64)> {
    const G: f64 = 1.324_717_957_244_746;
    let a1 = 1.0 / G;
    let a2 = 1.0 / (G * G);
    (1..=n).map(move |i| {
        let i = i as f64;
        ((0.5 + a1 * i).fract(), (0.5 + a2 * i).fract())
    })
}
