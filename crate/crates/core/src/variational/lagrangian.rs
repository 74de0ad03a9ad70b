use crate::domain::Rect2;
use crate::error::{Error, Result};
use crate::function::SmoothFn1;
use std::fmt;
use std::sync::Arc;

/// Arguments of a Lagrangian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slots {
    pub t1: f64,
    pub t2: f64,
    pub u: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Slots {
    fn get(&self, i: usize) -> f64 {
        [self.u, self.d1, self.d2][i]
    }

    fn with(mut self, i: usize, v: f64) -> Self {
        match i {
            0 => self.u = v,
            1 => self.d1 = v,
            _ => self.d2 = v,
        }
        self
    }
}

pub type LagFn = Arc<dyn Fn(&Slots) -> f64 + Send + Sync>;

/// `L` together with `∂L/∂u`, `∂L/∂d₁`, `∂L/∂d₂`.
#[derive(Clone)]
pub struct Lagrangian {
    l: LagFn,
    du: LagFn,
    dd1: LagFn,
    dd2: LagFn,
}

impl fmt::Debug for Lagrangian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Lagrangian")
    }
}

const PROBES: usize = 32;
const PROBE_REL_TOL: f64 = 1e-6;

/// Kronecker sequence in `[0, 1)^5`.
fn probe5(i: usize) -> [f64; 5] {
    const STEPS: [f64; 5] = [
        std::f64::consts::SQRT_2,
        1.732_050_807_568_877_2,
        2.236_067_977_499_79,
        2.645_751_311_064_590_7,
        3.316_624_790_355_4,
    ];
    STEPS.map(|a| (0.5 + a * (i + 1) as f64).fract())
}

impl Lagrangian {
    /// Builds a Lagrangian and checks each partial against a central
    /// difference of `L` at 32 points with `t ∈ probe` and `u, d₁, d₂ ∈ [−2, 2]`.
    /// Points where `L` is not finite are skipped.
    pub fn new(
        l: impl Fn(&Slots) -> f64 + Send + Sync + 'static,
        du: impl Fn(&Slots) -> f64 + Send + Sync + 'static,
        dd1: impl Fn(&Slots) -> f64 + Send + Sync + 'static,
        dd2: impl Fn(&Slots) -> f64 + Send + Sync + 'static,
        probe: &Rect2,
    ) -> Result<Self> {
        let lag = Lagrangian::unchecked(l, du, dd1, dd2);
        lag.validate(probe)?;
        Ok(lag)
    }

    pub fn unchecked(
        l: impl Fn(&Slots) -> f64 + Send + Sync + 'static,
        du: impl Fn(&Slots) -> f64 + Send + Sync + 'static,
        dd1: impl Fn(&Slots) -> f64 + Send + Sync + 'static,
        dd2: impl Fn(&Slots) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Lagrangian {
            l: Arc::new(l),
            du: Arc::new(du),
            dd1: Arc::new(dd1),
            dd2: Arc::new(dd2),
        }
    }

    pub fn validate(&self, probe: &Rect2) -> Result<()> {
        let names = ["u", "d1", "d2"];
        for i in 0..PROBES {
            let r = probe5(i);
            let s = Slots {
                t1: probe.t1.lerp(r[0]),
                t2: probe.t2.lerp(r[1]),
                u: 4.0 * r[2] - 2.0,
                d1: 4.0 * r[3] - 2.0,
                d2: 4.0 * r[4] - 2.0,
            };
            if !self.eval(&s).is_finite() {
                continue;
            }
            for (slot, name) in names.iter().enumerate() {
                let x = s.get(slot);
                let h = 1e-5 * (1.0 + x.abs());
                let fd = (self.eval(&s.with(slot, x + h)) - self.eval(&s.with(slot, x - h))) / (2.0 * h);
                let an = self.partial(slot, &s);
                let scale = an.abs().max(fd.abs()).max(1.0);
                if !((an - fd).abs() <= PROBE_REL_TOL * scale) {
                    return Err(Error::config(format!(
                        "∂L/∂{name} = {an} disagrees with the finite difference {fd} at {s:?}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `d₁² + d₂² + mass·u²`.
    pub fn quadratic(mass: f64) -> Self {
        Lagrangian::unchecked(
            move |s| s.d1 * s.d1 + s.d2 * s.d2 + mass * s.u * s.u,
            move |s| 2.0 * mass * s.u,
            |s| 2.0 * s.d1,
            |s| 2.0 * s.d2,
        )
    }

    /// String action density `σ(t₂)·d₂² − tension·d₁²`, with `t₁` as time and
    /// `t₂` as the position along the string.
    pub fn string(sigma: SmoothFn1, tension: f64) -> Result<Self> {
        if !(tension > 0.0) {
            return Err(Error::domain(format!("string tension must be positive, got {tension}")));
        }
        let s2 = sigma.clone();
        Ok(Lagrangian::unchecked(
            move |s| sigma.eval(s.t2) * s.d2 * s.d2 - tension * s.d1 * s.d1,
            |_| 0.0,
            move |s| -2.0 * tension * s.d1,
            move |s| 2.0 * s2.eval(s.t2) * s.d2,
        ))
    }

    pub fn eval(&self, s: &Slots) -> f64 {
        (self.l)(s)
    }

    pub fn du(&self, s: &Slots) -> f64 {
        (self.du)(s)
    }

    pub fn dd1(&self, s: &Slots) -> f64 {
        (self.dd1)(s)
    }

    pub fn dd2(&self, s: &Slots) -> f64 {
        (self.dd2)(s)
    }

    fn partial(&self, slot: usize, s: &Slots) -> f64 {
        match slot {
            0 => self.du(s),
            1 => self.dd1(s),
            _ => self.dd2(s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn correct_partials_pass_validation() {
        let l = Lagrangian::new(
            |s| s.u.sin() * s.d1 + s.t1 * s.d2 * s.d2,
            |s| s.u.cos() * s.d1,
            |s| s.u.sin(),
            |s| 2.0 * s.t1 * s.d2,
            &Rect2::unit(),
        );
        assert!(l.is_ok());
    }

    #[test]
    fn wrong_partial_is_rejected() {
        let l = Lagrangian::new(|s| s.u * s.u, |s| s.u, |_| 0.0, |_| 0.0, &Rect2::unit());
        assert!(matches!(l, Err(Error::Config(m)) if m.contains("∂L/∂u")));
    }

    #[test]
    fn presets_are_consistent() {
        Lagrangian::quadratic(1.0).validate(&Rect2::unit()).unwrap();
        let s = Lagrangian::string(SmoothFn1::polynomial(vec![1.0, 0.5]), 2.0).unwrap();
        s.validate(&Rect2::unit()).unwrap();
        assert!(matches!(
            Lagrangian::string(SmoothFn1::constant(1.0), 0.0),
            Err(Error::Domain(_))
        ));
    }
}
