//! Variable fractional orders `α(t, τ)`.

use crate::domain::Interval;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Which open interval the order must stay inside.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMode {
    /// `0 < α < 1`.
    Plain,
    /// `1/l < α < 1`, needed by the integration-by-parts formula.
    AboveOneOverL,
    /// `0 < α < 1 − 1/l`, needed by the Green-type formula.
    BelowOneMinus,
}

pub const DEFAULT_VALIDATION_GRID: usize = 64;

#[derive(Clone)]
pub struct VariableOrder {
    func: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    domain: Interval,
    l: u32,
    mode: BoundMode,
}

impl fmt::Debug for VariableOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VariableOrder")
            .field("domain", &self.domain)
            .field("l", &self.l)
            .field("mode", &self.mode)
            .finish()
    }
}

impl VariableOrder {
    /// Builds an order and checks it on a 64×64 grid of `domain × domain`.
    pub fn new(
        func: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        domain: Interval,
        l: u32,
        mode: BoundMode,
    ) -> Result<Self> {
        Self::with_validation_grid(func, domain, l, mode, DEFAULT_VALIDATION_GRID)
    }

    pub fn with_validation_grid(
        func: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        domain: Interval,
        l: u32,
        mode: BoundMode,
        grid: usize,
    ) -> Result<Self> {
        if l < 2 {
            return Err(Error::config(format!("bound parameter l must be at least 2, got {l}")));
        }
        if grid < 2 {
            return Err(Error::config("validation grid needs at least 2 points per axis"));
        }
        let order = VariableOrder {
            func: Arc::new(func),
            domain,
            l,
            mode,
        };
        let step = domain.width() / (grid - 1) as f64;
        for i in 0..grid {
            let t = domain.a + i as f64 * step;
            for j in 0..grid {
                let tau = domain.a + j as f64 * step;
                order.check(t, tau, order.eval(t, tau))?;
            }
        }
        Ok(order)
    }

    /// A constant order in `Plain` mode with `l = 2`.
    pub fn constant(value: f64, domain: Interval) -> Result<Self> {
        Self::constant_in(value, domain, 2, BoundMode::Plain)
    }

    pub fn constant_in(value: f64, domain: Interval, l: u32, mode: BoundMode) -> Result<Self> {
        Self::with_validation_grid(move |_, _| value, domain, l, mode, 2)
    }

    /// An order depending on the evaluation point only, `α(t, τ) = α(t)`.
    pub fn of_t(
        func: impl Fn(f64) -> f64 + Send + Sync + 'static,
        domain: Interval,
        l: u32,
        mode: BoundMode,
    ) -> Result<Self> {
        Self::new(move |t, _| func(t), domain, l, mode)
    }

    #[inline]
    pub fn eval(&self, t: f64, tau: f64) -> f64 {
        (self.func)(t, tau)
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn mode(&self) -> BoundMode {
        self.mode
    }

    /// Open interval the order must lie in.
    pub fn bounds(&self) -> (f64, f64) {
        let inv = 1.0 / self.l as f64;
        match self.mode {
            BoundMode::Plain => (0.0, 1.0),
            BoundMode::AboveOneOverL => (inv, 1.0),
            BoundMode::BelowOneMinus => (0.0, 1.0 - inv),
        }
    }

    fn check(&self, t: f64, tau: f64, value: f64) -> Result<()> {
        let (lo, hi) = self.bounds();
        if value > lo && value < hi {
            Ok(())
        } else {
            Err(Error::Validity {
                t,
                tau,
                value,
                bounds: format!("({lo}, {hi})"),
            })
        }
    }

    /// Fails unless the order was declared in `mode`.
    pub fn require_mode(&self, mode: BoundMode, what: &str) -> Result<()> {
        if self.mode == mode {
            Ok(())
        } else {
            let need = match mode {
                BoundMode::Plain => "0 < α < 1".to_string(),
                BoundMode::AboveOneOverL => "1/l < α < 1".to_string(),
                BoundMode::BelowOneMinus => "0 < α < 1 − 1/l".to_string(),
            };
            Err(Error::Hypothesis(format!(
                "{what} requires {need} (bound mode {mode:?}); order was declared as {:?}",
                self.mode
            )))
        }
    }

    /// Order for the mirrored interval: `α̃(u, v) = α(a+b−v, a+b−u)`.
    pub fn reflected(&self) -> VariableOrder {
        let f = Arc::clone(&self.func);
        let d = self.domain;
        VariableOrder {
            func: Arc::new(move |u, v| f(d.reflect(v), d.reflect(u))),
            ..self.clone()
        }
    }

    /// Same function, different domain (used when swapping rectangle axes).
    pub fn with_domain(&self, domain: Interval) -> Result<VariableOrder> {
        let f = Arc::clone(&self.func);
        Self::new(move |t, tau| f(t, tau), domain, self.l, self.mode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_orders_outside_their_mode() {
        let d = Interval::unit();
        assert!(VariableOrder::constant(0.5, d).is_ok());
        assert!(VariableOrder::constant(1.0, d).is_err());
        assert!(VariableOrder::constant(0.0, d).is_err());
        // Green regime with l = 2 needs α < 1/2.
        let e = VariableOrder::constant_in(0.9, d, 2, BoundMode::BelowOneMinus).unwrap_err();
        assert!(e.is_validity());
        // l = 3 leaves room for α = 0.4 in both regimes.
        VariableOrder::constant_in(0.4, d, 3, BoundMode::BelowOneMinus).unwrap();
        VariableOrder::constant_in(0.4, d, 3, BoundMode::AboveOneOverL).unwrap();
        assert!(VariableOrder::constant_in(0.3, d, 3, BoundMode::AboveOneOverL).is_err());
    }

    #[test]
    fn validity_error_names_the_offending_point() {
        let err = VariableOrder::new(|t, _| 0.2 + t, Interval::unit(), 2, BoundMode::Plain).unwrap_err();
        match err {
            Error::Validity { t, value, .. } => {
                assert!(t >= 0.8 && value >= 1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reflection_transposes_and_mirrors() {
        let d = Interval::new(0.0, 2.0).unwrap();
        let a = VariableOrder::new(|t, tau| 0.3 + 0.1 * t + 0.05 * tau, d, 2, BoundMode::Plain).unwrap();
        let r = a.reflected();
        assert_eq!(r.eval(0.5, 1.5), a.eval(0.5, 1.5));
        assert!((r.eval(0.2, 0.7) - a.eval(1.3, 1.8)).abs() < 1e-15);
    }

    #[test]
    fn mode_requirement_reports_hypothesis() {
        let a = VariableOrder::constant(0.5, Interval::unit()).unwrap();
        assert!(matches!(
            a.require_mode(BoundMode::AboveOneOverL, "integration by parts"),
            Err(Error::Hypothesis(_))
        ));
    }
}
