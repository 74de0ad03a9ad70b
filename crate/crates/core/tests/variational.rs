use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vofrac::optimize::probe;
use vofrac::variational::*;
use vofrac::*;

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

/// Quadratic-plus-linear Lagrangian with random positive weights.
fn lagrangian(rng: &mut ChaCha8Rng) -> Lagrangian {
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
    .unwrap()
}

fn orders() -> (VariableOrder, VariableOrder) {
    let d = Interval::unit();
    (
        VariableOrder::new(|t, _| 0.4 + 0.1 * t, d, 2, BoundMode::Plain).unwrap(),
        VariableOrder::new(|_, tau| 0.5 + 0.1 * tau, d, 2, BoundMode::Plain).unwrap(),
    )
}

#[test]
fn first_variation_matches_central_difference() {
    let cfg = QuadConfig::default();
    let (a1, a2) = orders();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for case in 0..10 {
        let p = Problem::new(lagrangian(&mut rng), a1.clone(), a2.clone(), Rect2::unit()).unwrap();
        let u = poly(&mut rng);
        let eta = bump().mul(&poly(&mut rng));
        let fv = first_variation(&p, &u, &eta, 16, &cfg).unwrap();
        let eps = 1e-5;
        let jp = functional_eval(&p, &u.add_scaled(&eta, eps), 16, &cfg).unwrap();
        let jm = functional_eval(&p, &u.add_scaled(&eta, -eps), 16, &cfg).unwrap();
        let cd = (jp - jm) / (2.0 * eps);
        assert!((fv - cd).abs() <= 1e-6 * fv.abs(), "case {case}: {fv} vs {cd}");
    }
}

#[test]
fn first_variation_matches_green_transformed_form() {
    let cfg = QuadConfig::default();
    let a = VariableOrder::constant(0.4, Interval::unit()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let p = Problem::new(lagrangian(&mut rng), a.clone(), a, Rect2::unit()).unwrap();
    let u = poly(&mut rng);
    let eta = bump().mul(&poly(&mut rng));
    let fv = first_variation(&p, &u, &eta, 12, &cfg).unwrap();
    let gt = green_transformed_variation(&p, &u, &eta, 12, &cfg).unwrap();
    assert!((fv - gt).abs() <= 1e-4, "{fv} vs {gt}");
}

#[test]
fn assembled_gradient_passes_richardson_check() {
    let (a1, a2) = orders();
    let p = Problem::new(Lagrangian::quadratic(1.0), a1, a2, Rect2::unit()).unwrap();
    let psi = BoundaryData::trace_of(&SmoothFn2::polynomial(vec![vec![1.0], vec![0.0, 1.0]]), p.rect).unwrap();
    let asm = AssembledFunctional::new(&p, &psi.lift(), 3, 12, &QuadConfig::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let c: Vec<f64> = (0..9).map(|_| rng.random_range(-0.5..0.5)).collect();
    let f = |x: &[f64]| asm.eval(x);
    let g1 = probe(&f, &c, 1e-6).unwrap().gradient;
    let g2 = probe(&f, &c, 5e-7).unwrap().gradient;
    for (a, b) in g1.iter().zip(&g2) {
        assert!((a - b).abs() <= 1e-5 * a.abs().max(b.abs()).max(1e-3), "{a} vs {b}");
    }
}

#[test]
fn ritz_minimizer_is_stationary_for_every_mode() {
    let a = VariableOrder::constant(0.4, Interval::unit()).unwrap();
    let p = Problem::new(Lagrangian::quadratic(1.0), a.clone(), a, Rect2::unit()).unwrap();
    let psi = BoundaryData::trace_of(&SmoothFn2::polynomial(vec![vec![1.0], vec![0.0, 1.0]]), p.rect).unwrap();
    let opts = RitzOptions {
        n_modes: 2,
        residual_grid: 3,
        ..Default::default()
    };
    let sol = ritz_solve(&p, &psi, &opts).unwrap();
    assert!(sol.report.converged && !sol.report.nonconvex_flag, "{:?}", sol.report);
    let u = sol.expansion.to_fn();
    for (k, m) in sol.expansion.modes() {
        let v = first_variation(&p, &u, &mode_fn(k, m, p.rect), opts.outer_grid, &opts.cfg).unwrap();
        assert!(v.abs() <= 10.0 * opts.opt_tol, "mode ({k}, {m}): {v}");
    }
    let direct = functional_eval(&p, &u, opts.outer_grid, &opts.cfg).unwrap();
    assert!((direct - sol.report.j_value).abs() <= 1e-12 * direct.abs());
}

#[test]
fn string_preset_reports_indefiniteness() {
    let a = VariableOrder::constant(0.5, Interval::unit()).unwrap();
    let lag = Lagrangian::string(SmoothFn1::constant(1.0), 1.0).unwrap();
    let p = Problem::new(lag, a.clone(), a, Rect2::unit()).unwrap();
    let psi = BoundaryData::trace_of(&SmoothFn2::polynomial(vec![vec![0.0, 1.0], vec![0.5]]), p.rect).unwrap();
    let opts = RitzOptions {
        n_modes: 2,
        outer_grid: 12,
        residual_grid: 2,
        ..Default::default()
    };
    let r = ritz_solve(&p, &psi, &opts).unwrap().report;
    assert!(r.nonconvex_flag || r.gradient_norm <= opts.opt_tol, "{r:?}");
}

#[test]
fn constant_solution_has_zero_residual() {
    let (a1, a2) = orders();
    let p = Problem::new(Lagrangian::quadratic(0.0), a1, a2, Rect2::unit()).unwrap();
    let lift = BoundaryData::constant(2.5, p.rect).lift();
    let r = el_residual(&p, &lift, 5, &QuadConfig::default(), 1e-4).unwrap();
    assert!(r.values.iter().all(|v| v.abs() <= 1e-8), "{r:?}");
}
