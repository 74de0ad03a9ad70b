use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vofrac::identities::*;
use vofrac::quadrature::OuterRule;
use vofrac::*;

/// Random polynomial of total degree ≤ 3.
fn poly(rng: &mut ChaCha8Rng) -> SmoothFn2 {
    let mut c = vec![vec![0.0; 4]; 4];
    for (i, row) in c.iter_mut().enumerate() {
        for v in row.iter_mut().take(4 - i) {
            *v = rng.random_range(-1.0..1.0);
        }
    }
    SmoothFn2::polynomial(c)
}

fn bump() -> SmoothFn2 {
    let b = SmoothFn1::polynomial(vec![0.0, 1.0, -1.0]);
    SmoothFn2::product(b.clone(), b)
}

fn ibp_instance(seed: u64) -> IbpInstance {
    let d = Interval::unit();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    IbpInstance {
        f: poly(&mut rng),
        g: poly(&mut rng),
        eta1: poly(&mut rng),
        eta2: poly(&mut rng),
        alpha1: VariableOrder::new(|t, _| 0.4 + 0.1 * t, d, 3, BoundMode::AboveOneOverL).unwrap(),
        alpha2: VariableOrder::new(|_, tau| 0.5 + 0.1 * tau, d, 3, BoundMode::AboveOneOverL).unwrap(),
        rect: Rect2::unit(),
    }
}

fn green_instance(seed: u64, zero_trace: bool) -> GreenInstance {
    let a = VariableOrder::constant_in(0.4, Interval::unit(), 3, BoundMode::BelowOneMinus).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = poly(&mut rng);
    GreenInstance {
        f: poly(&mut rng),
        g: poly(&mut rng),
        eta: if zero_trace { bump().mul(&p) } else { p },
        alpha1: a.clone(),
        alpha2: a,
        rect: Rect2::unit(),
    }
}

#[test]
fn integration_by_parts_on_random_polynomials() {
    let cfg = QuadConfig::default();
    for seed in 0..3 {
        let rep = verify_ibp(&ibp_instance(seed), 24, &cfg, 1e-5).unwrap();
        assert!(rep.converged, "seed {seed}: {rep:?}");
    }
}

#[test]
fn green_formula_with_zero_and_nonzero_trace() {
    let cfg = QuadConfig::default();
    for seed in 0..2 {
        let rep = verify_green(&green_instance(seed, true), 20, &cfg, 1e-4).unwrap();
        assert!(rep.converged, "seed {seed}: {rep:?}");
    }
    let inst = green_instance(5, false);
    let sides = green_sides(&inst, OuterRule::new(20), &cfg).unwrap();
    assert!(sides.contour.abs() > 1e-3, "{sides:?}");
    assert!((sides.lhs - sides.rhs()).abs() <= 1e-4, "{sides:?}");
}

#[test]
fn green_residual_shrinks_under_refinement() {
    let inst = green_instance(11, false);
    let coarse = green_sides(&inst, OuterRule::new(16), &QuadConfig::default().with_panels(16)).unwrap();
    let fine = green_sides(&inst, OuterRule::new(32), &QuadConfig::default().with_panels(32)).unwrap();
    let (rc, rf) = ((coarse.lhs - coarse.rhs()).abs(), (fine.lhs - fine.rhs()).abs());
    assert!(rf <= (rc / 2.0).max(1e-9), "{rc} -> {rf}");
}

#[test]
fn green_formula_is_symmetric_under_axis_swap() {
    let d = Interval::unit();
    let mut inst = green_instance(3, false);
    inst.alpha1 = VariableOrder::new(|t, tau| 0.3 + 0.05 * t * tau, d, 3, BoundMode::BelowOneMinus).unwrap();
    let cfg = QuadConfig::default();
    let a = green_sides(&inst, OuterRule::new(12), &cfg).unwrap();
    let b = green_sides(&inst.swap_axes().unwrap(), OuterRule::new(12), &cfg).unwrap();
    for (x, y) in [(a.lhs, b.lhs), (a.area, b.area), (a.contour, b.contour)] {
        assert!((x - y).abs() <= 1e-10 * (1.0 + x.abs()), "{a:?} vs {b:?}");
    }
}

#[test]
fn green_requires_derivative_regime() {
    let mut inst = green_instance(0, true);
    inst.alpha2 = VariableOrder::constant_in(0.4, Interval::unit(), 3, BoundMode::AboveOneOverL).unwrap();
    assert!(matches!(
        verify_green(&inst, 8, &QuadConfig::default(), 1.0),
        Err(Error::Hypothesis(_))
    ));
}
