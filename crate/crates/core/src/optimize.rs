//! Quasi-Newton minimization with central finite-difference gradients.
//!
//! The curvature matrix starts from the diagonal second differences that the
//! gradient stencil yields for free. While no negative curvature has been
//! seen it is refined by BFGS updates and each step is a Newton step with
//! Armijo backtracking on the objective. A negative second difference, or a
//! step whose secant curvature `yᵀs` is clearly negative, marks the problem
//! nonconvex; from then on symmetric rank-one updates let the model become
//! indefinite, and steps are judged by the gradient norm, so the iteration
//! settles for a stationary point.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiNewtonOptions {
    /// Stop once the gradient norm is at most this.
    pub tol: f64,
    pub max_iter: usize,
    /// Difference step is `rel_step·(1 + |xᵢ|)`.
    pub rel_step: f64,
}

impl Default for QuasiNewtonOptions {
    fn default() -> Self {
        QuasiNewtonOptions {
            tol: 1e-7,
            max_iter: 500,
            rel_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub gradient_norm: f64,
    pub iterations: usize,
    /// Some diagonal entry of the curvature matrix went negative.
    pub nonconvex: bool,
    pub converged: bool,
}

/// Objective value and its finite-difference gradient and diagonal curvature.
#[derive(Debug, Clone)]
pub struct Probe {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub curvature: Vec<f64>,
}

fn checked(f: &(dyn Fn(&[f64]) -> Result<f64> + Sync), x: &[f64]) -> Result<f64> {
    let v = f(x)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(format!("objective is {v} at coefficients {x:?}")))
    }
}

/// Central differences in every coordinate, evaluated in parallel.
pub fn probe(f: &(dyn Fn(&[f64]) -> Result<f64> + Sync), x: &[f64], rel_step: f64) -> Result<Probe> {
    let value = checked(f, x)?;
    let pairs: Vec<Result<(f64, f64)>> = (0..x.len())
        .into_par_iter()
        .map(|i| {
            let h = rel_step * (1.0 + x[i].abs());
            let mut xp = x.to_vec();
            xp[i] = x[i] + h;
            let fp = checked(f, &xp)?;
            xp[i] = x[i] - h;
            let fm = checked(f, &xp)?;
            Ok(((fp - fm) / (2.0 * h), (fp - 2.0 * value + fm) / (h * h)))
        })
        .collect();
    let mut gradient = Vec::with_capacity(x.len());
    let mut curvature = Vec::with_capacity(x.len());
    for p in pairs {
        let (g, c) = p?;
        gradient.push(g);
        curvature.push(c);
    }
    Ok(Probe {
        value,
        gradient,
        curvature,
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn axpy(x: &[f64], t: f64, p: &DVector<f64>) -> Vec<f64> {
    x.iter().zip(p.iter()).map(|(a, b)| a + t * b).collect()
}

const MAX_HALVINGS: usize = 40;

/// Minimizes `f` from `x0`, or finds a stationary point once negative
/// curvature has been observed.
pub fn minimize(f: &(dyn Fn(&[f64]) -> Result<f64> + Sync), x0: &[f64], opts: &QuasiNewtonOptions) -> Result<Outcome> {
    if !(opts.tol > 0.0) || !(opts.rel_step > 0.0) {
        return Err(Error::config("optimizer tolerance and step must be positive"));
    }
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut pr = probe(f, &x, opts.rel_step)?;
    // Second differences carry roundoff of order ε·|f|/h²; entries below
    // this floor are not trusted as curvature evidence. Gradients carry
    // roundoff of order ε·|f|/h.
    let floor = |v: f64| 1e3 * f64::EPSILON * (1.0 + v.abs()) / (opts.rel_step * opts.rel_step);
    let grad_noise = |v: f64| 1e3 * f64::EPSILON * (1.0 + v.abs()) / opts.rel_step;
    let negative = |p: &Probe| p.curvature.iter().any(|&c| c < -floor(p.value));
    let mut nonconvex = negative(&pr);
    let mut b = diagonal_model(&pr.curvature, floor(pr.value));

    let mut iterations = 0;
    let mut converged = norm(&pr.gradient) <= opts.tol;
    while !converged && iterations < opts.max_iter {
        iterations += 1;
        let gnorm = norm(&pr.gradient);
        let mut next = step(f, &x, &pr, &b, gnorm, nonconvex, opts)?;
        if next.is_none() {
            // The secant model may have drifted; restart from fresh diagonal curvature.
            b = diagonal_model(&pr.curvature, floor(pr.value));
            next = step(f, &x, &pr, &b, gnorm, nonconvex, opts)?;
        }
        let Some((x_new, pr_new)) = next else { break };

        let s = DVector::from_iterator(n, x_new.iter().zip(&x).map(|(a, b)| a - b));
        let y = DVector::from_iterator(n, pr_new.gradient.iter().zip(&pr.gradient).map(|(a, b)| a - b));
        let ys = y.dot(&s);
        let measurable = y.norm() > grad_noise(pr.value);
        if measurable && ys < -1e-6 * y.norm() * s.norm() {
            nonconvex = true;
        }
        if negative(&pr_new) {
            nonconvex = true;
        }
        if !nonconvex {
            // BFGS keeps the model positive definite.
            let bs = &b * &s;
            let sbs = s.dot(&bs);
            if measurable && ys > 1e-10 * y.norm() * s.norm() && sbs > 0.0 {
                b += &y * y.transpose() / ys - &bs * bs.transpose() / sbs;
            }
        } else if measurable {
            // SR1 may turn indefinite, as the function is.
            let r = &y - &b * &s;
            let rs = r.dot(&s);
            if rs.abs() > 1e-8 * r.norm() * s.norm() {
                b += &r * r.transpose() / rs;
            }
        }
        x = x_new;
        pr = pr_new;
        converged = norm(&pr.gradient) <= opts.tol;
    }
    Ok(Outcome {
        gradient_norm: norm(&pr.gradient),
        value: pr.value,
        gradient: pr.gradient,
        x,
        iterations,
        nonconvex,
        converged,
    })
}

fn diagonal_model(curvature: &[f64], floor: f64) -> DMatrix<f64> {
    let n = curvature.len();
    DMatrix::from_fn(n, n, |i, j| match i == j {
        false => 0.0,
        true if curvature[i].abs() > floor => curvature[i],
        true => 1.0,
    })
}

/// Tries a Newton step on `f` with Armijo backtracking, or, once looking for
/// stationary points, a Newton step judged by the gradient norm. Falls back
/// to descent on `f` along the model shifted to be positive definite.
fn step(
    f: &(dyn Fn(&[f64]) -> Result<f64> + Sync),
    x: &[f64],
    pr: &Probe,
    b: &DMatrix<f64>,
    gnorm: f64,
    stationary: bool,
    opts: &QuasiNewtonOptions,
) -> Result<Option<(Vec<f64>, Probe)>> {
    let g = DVector::from_column_slice(&pr.gradient);
    let chol = b.clone().cholesky();
    if let (Some(ch), false) = (&chol, stationary) {
        if let Some(next) = armijo(f, x, pr, &-ch.solve(&g), opts)? {
            return Ok(Some(next));
        }
    } else if let Some(p) = b.clone().lu().solve(&-&g).filter(|p| p.iter().all(|v| v.is_finite())) {
        // Newton step on the gradient, accepted when it shrinks the gradient norm.
        if let Some(next) = merit_search(f, x, gnorm, &p, opts)? {
            return Ok(Some(next));
        }
    }
    let eig = b.clone().symmetric_eigen();
    let lo = eig.eigenvalues.min();
    let hi = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
    let shift = if lo > 1e-8 * hi { 0.0 } else { 1e-3 * hi - lo };
    let shifted = b + DMatrix::identity(b.nrows(), b.ncols()) * shift;
    match shifted.cholesky() {
        Some(ch) => armijo(f, x, pr, &-ch.solve(&g), opts),
        None => armijo(f, x, pr, &(-&g / hi), opts),
    }
}

fn armijo(
    f: &(dyn Fn(&[f64]) -> Result<f64> + Sync),
    x: &[f64],
    pr: &Probe,
    p: &DVector<f64>,
    opts: &QuasiNewtonOptions,
) -> Result<Option<(Vec<f64>, Probe)>> {
    let slope: f64 = pr.gradient.iter().zip(p.iter()).map(|(a, b)| a * b).sum();
    if !(slope < 0.0) {
        return Ok(None);
    }
    let mut t = 1.0;
    for _ in 0..MAX_HALVINGS {
        let xt = axpy(x, t, p);
        let ft = checked(f, &xt)?;
        if ft <= pr.value + 1e-4 * t * slope {
            return Ok(Some((xt.clone(), probe(f, &xt, opts.rel_step)?)));
        }
        t *= 0.5;
    }
    Ok(None)
}

fn merit_search(
    f: &(dyn Fn(&[f64]) -> Result<f64> + Sync),
    x: &[f64],
    gnorm: f64,
    p: &DVector<f64>,
    opts: &QuasiNewtonOptions,
) -> Result<Option<(Vec<f64>, Probe)>> {
    let mut t = 1.0;
    for _ in 0..MAX_HALVINGS {
        let xt = axpy(x, t, p);
        let pt = probe(f, &xt, opts.rel_step)?;
        if norm(&pt.gradient) <= (1.0 - 1e-4 * t) * gnorm {
            return Ok(Some((xt, pt)));
        }
        t *= 0.5;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let f = |x: &[f64]| -> Result<f64> { Ok((x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2) + x[0] * x[1]) };
        let out = minimize(&f, &[0.0, 0.0], &QuasiNewtonOptions::default()).unwrap();
        assert!(out.converged && !out.nonconvex, "{out:?}");
        // Stationary point of the quadratic, solved by hand.
        let (x0, x1) = (80.0 / 39.0, -82.0 / 39.0);
        assert!((out.x[0] - x0).abs() < 1e-6 && (out.x[1] - x1).abs() < 1e-6, "{out:?}");
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| -> Result<f64> { Ok((1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)) };
        let opts = QuasiNewtonOptions {
            tol: 1e-6,
            ..Default::default()
        };
        let out = minimize(&f, &[-1.2, 1.0], &opts).unwrap();
        assert!(out.converged, "{out:?}");
        assert!((out.x[0] - 1.0).abs() < 1e-5 && (out.x[1] - 1.0).abs() < 1e-5);
    }

    /// Convex quadratic with the spectrum of a sine-mode stiffness matrix,
    /// rotated so the Hessian is dense.
    fn spd_quadratic(n: usize) -> impl Fn(&[f64]) -> Result<f64> + Sync {
        let dim = n * n;
        let mut q = DMatrix::from_fn(dim, dim, |i, j| {
            ((i * 31 + j * 17) % 13) as f64 - 6.0 + if i == j { 20.0 } else { 0.0 }
        });
        q = q.qr().q();
        let d = DMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                let (k, m) = (i / n + 1, i % n + 1);
                (k * k + m * m) as f64 * 2.0
            } else {
                0.0
            }
        });
        let a = &q * d * q.transpose();
        let b = DVector::from_fn(dim, |i, _| (i as f64 * 0.7).sin());
        move |x: &[f64]| {
            let x = DVector::from_column_slice(x);
            Ok(1.2 + 0.5 * x.dot(&(&a * &x)) - b.dot(&x))
        }
    }

    #[test]
    fn dense_convex_quadratic_converges_without_flag() {
        let f = spd_quadratic(6);
        let out = minimize(&f, &[0.0; 36], &QuasiNewtonOptions::default()).unwrap();
        assert!(
            out.converged && !out.nonconvex,
            "{} {} {}",
            out.iterations,
            out.gradient_norm,
            out.nonconvex
        );
        assert!(out.iterations < 100, "{}", out.iterations);
    }

    #[test]
    fn saddle_is_flagged_and_found() {
        let f = |x: &[f64]| -> Result<f64> { Ok((x[0] - 0.5).powi(2) - 2.0 * (x[1] - 0.25).powi(2)) };
        let out = minimize(&f, &[0.0, 0.0], &QuasiNewtonOptions::default()).unwrap();
        assert!(out.nonconvex && out.converged, "{out:?}");
        assert!((out.x[0] - 0.5).abs() < 1e-7 && (out.x[1] - 0.25).abs() < 1e-7);
    }

    #[test]
    fn starting_at_optimum_takes_no_steps() {
        let f = |x: &[f64]| -> Result<f64> { Ok(x.iter().map(|v| v * v).sum()) };
        let out = minimize(&f, &[0.0; 4], &QuasiNewtonOptions::default()).unwrap();
        assert_eq!(out.iterations, 0);
        assert!(out.converged);
    }

    #[test]
    fn non_finite_objective_reports_coefficients() {
        let f = |x: &[f64]| -> Result<f64> { Ok(if x[0] > 0.5 { f64::NAN } else { -x[0] }) };
        match minimize(&f, &[0.4], &QuasiNewtonOptions::default()) {
            Err(Error::NonFinite(msg)) => assert!(msg.contains("coefficients"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unbounded_objective_stalls_without_error() {
        let f = |x: &[f64]| -> Result<f64> { Ok(-x[0]) };
        let opts = QuasiNewtonOptions {
            max_iter: 20,
            ..Default::default()
        };
        let out = minimize(&f, &[0.0], &opts).unwrap();
        assert!(!out.converged);
    }
}
