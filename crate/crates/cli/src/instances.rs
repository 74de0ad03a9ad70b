//! Seeded random instances for the selftest suite and acceptance runs.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vofrac::identities::{GreenInstance, IbpInstance};
use vofrac::variational::{Lagrangian, Problem};
use vofrac::{BoundMode, Interval, Rect2, Result, SmoothFn1, SmoothFn2, VariableOrder};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random polynomial on the plane of total degree at most 3.
pub fn poly(rng: &mut ChaCha8Rng) -> SmoothFn2 {
    let mut c = vec![vec![0.0; 4]; 4];
    for (i, row) in c.iter_mut().enumerate() {
        for v in row.iter_mut().take(4 - i) {
            *v = rng.random_range(-1.0..1.0);
        }
    }
    SmoothFn2::polynomial(c)
}

/// `t1(1−t1)·t2(1−t2)`, which vanishes on the boundary of the unit square.
pub fn bump() -> SmoothFn2 {
    let b = SmoothFn1::polynomial(vec![0.0, 1.0, -1.0]);
    SmoothFn2::product(b.clone(), b)
}

/// `α₁ = 0.4 + 0.1t` and `α₂ = 0.5 + 0.1τ` on the unit interval.
pub fn sloped_orders(l: u32, mode: BoundMode) -> Result<(VariableOrder, VariableOrder)> {
    let d = Interval::unit();
    Ok((
        VariableOrder::new(|t, _| 0.4 + 0.1 * t, d, l, mode)?,
        VariableOrder::new(|_, tau| 0.5 + 0.1 * tau, d, l, mode)?,
    ))
}

/// Random polynomial data for integration by parts with sloped orders.
pub fn ibp_instance(seed: u64) -> Result<IbpInstance> {
    let mut rng = rng(seed);
    let (alpha1, alpha2) = sloped_orders(3, BoundMode::AboveOneOverL)?;
    Ok(IbpInstance {
        f: poly(&mut rng),
        g: poly(&mut rng),
        eta1: poly(&mut rng),
        eta2: poly(&mut rng),
        alpha1,
        alpha2,
        rect: Rect2::unit(),
    })
}

/// Random polynomial data for the Green-type formula with `α ≡ 0.4`. With
/// `zero_trace` the test function is multiplied by [`bump`].
pub fn green_instance(seed: u64, zero_trace: bool) -> Result<GreenInstance> {
    let a = VariableOrder::constant_in(0.4, Interval::unit(), 3, BoundMode::BelowOneMinus)?;
    let mut rng = rng(seed);
    let p = poly(&mut rng);
    Ok(GreenInstance {
        f: poly(&mut rng),
        g: poly(&mut rng),
        eta: if zero_trace { bump().mul(&p) } else { p },
        alpha1: a.clone(),
        alpha2: a,
        rect: Rect2::unit(),
    })
}

/// Quadratic-plus-linear Lagrangian with random positive weights.
pub fn lagrangian(rng: &mut ChaCha8Rng) -> Result<Lagrangian> {
    let k: [f64; 6] = std::array::from_fn(|_| rng.random_range(0.2..1.0));
    Lagrangian::new(
        move |s| {
            k[0] * s.u * s.u
                + k[1] * s.d1 * s.d1
                + k[2] * s.d2 * s.d2
                + k[3] * s.u * s.d1
                + k[4] * s.t1 * s.d2
                + k[5] * s.u
        },
        move |s| 2.0 * k[0] * s.u + k[3] * s.d1 + k[5],
        move |s| 2.0 * k[1] * s.d1 + k[3] * s.u,
        move |s| 2.0 * k[2] * s.d2 + k[4] * s.t1,
        &Rect2::unit(),
    )
}

/// A variational problem with sloped orders, a trial function `u` and a
/// zero-trace variation `η`.
pub struct VariationCase {
    pub problem: Problem,
    pub u: SmoothFn2,
    pub eta: SmoothFn2,
}

pub fn variation_case(seed: u64) -> Result<VariationCase> {
    let mut rng = rng(seed);
    let (a1, a2) = sloped_orders(2, BoundMode::Plain)?;
    let problem = Problem::new(lagrangian(&mut rng)?, a1, a2, Rect2::unit())?;
    let u = poly(&mut rng);
    let eta = bump().mul(&poly(&mut rng));
    Ok(VariationCase { problem, u, eta })
}

/// Random cubic on an interval, with an order that varies mildly in both
/// arguments, for reflection checks.
pub struct ReflectionCase {
    pub interval: Interval,
    pub f: SmoothFn1,
    pub order: VariableOrder,
}

pub fn reflection_case(rng: &mut ChaCha8Rng) -> Result<ReflectionCase> {
    let a = rng.random_range(-1.0..0.5);
    let interval = Interval::new(a, a + rng.random_range(0.5..2.0))?;
    let coeffs: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
    let (c0, c1, c2) = (
        rng.random_range(0.3..0.6),
        rng.random_range(-0.1..0.1),
        rng.random_range(-0.1..0.1),
    );
    let (ia, w) = (interval.a, interval.width());
    let order = VariableOrder::new(
        move |t, tau| c0 + c1 * (t - ia) / w + c2 * (tau - ia) / w,
        interval,
        2,
        BoundMode::Plain,
    )?;
    Ok(ReflectionCase {
        interval,
        f: SmoothFn1::polynomial(coeffs),
        order,
    })
}
