use super::boundary::{BoundaryData, RitzExpansion, MAX_MODES};
use super::functional::{caputo_partials, el_residual, Problem};
use super::lagrangian::Slots;
use crate::domain::Interval;
use crate::error::{Error, Result};
use crate::function::SmoothFn2;
use crate::optimize::{minimize, QuasiNewtonOptions};
use crate::order::VariableOrder;
use crate::quadrature::{reduce_rect, OuterRule, QuadConfig, Side, SingularKernel, SingularRule, WeightShift};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RitzOptions {
    /// Modes per axis.
    pub n_modes: usize,
    pub outer_grid: usize,
    pub cfg: QuadConfig,
    pub opt_tol: f64,
    pub max_iter: usize,
    /// Cells per axis for the reported Euler–Lagrange residual.
    pub residual_grid: usize,
    /// Derivative step of the residual; defaults to `1e-4` times the shorter side.
    pub residual_step: Option<f64>,
}

impl Default for RitzOptions {
    fn default() -> Self {
        RitzOptions {
            n_modes: 4,
            outer_grid: 20,
            cfg: QuadConfig::default(),
            opt_tol: 1e-7,
            max_iter: 500,
            residual_grid: 8,
            residual_step: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub coeffs: Vec<f64>,
    #[serde(rename = "J_value")]
    pub j_value: f64,
    pub el_residual_l2: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub nonconvex_flag: bool,
    /// The gradient norm reached the tolerance.
    #[serde(skip)]
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct RitzSolution {
    pub report: SolveReport,
    pub expansion: RitzExpansion,
}

/// `c ↦ J[lift + Σ cφ]` with everything that does not depend on `c`
/// precomputed at the outer nodes. Caputo partials are linear, so the partials
/// of `u` are the lift's plus `Σ c·ᶜDφ`, and the Caputo partial of a mode
/// along one axis only depends on that axis' coordinate.
#[derive(Debug, Clone)]
pub struct AssembledFunctional {
    problem: Problem,
    n: usize,
    n1: Vec<(f64, f64)>,
    n2: Vec<(f64, f64)>,
    /// Per outer node, row-major: lift value and Caputo partials.
    lift: Vec<[f64; 3]>,
    /// Per axis node: `sin(kπŝ)` and its Caputo derivative, `k = 1..=n`.
    sin1: Vec<Vec<f64>>,
    cap1: Vec<Vec<f64>>,
    sin2: Vec<Vec<f64>>,
    cap2: Vec<Vec<f64>>,
}

/// Sine values and their Caputo derivatives, each indexed `[node][k − 1]`.
type AxisTables = (Vec<Vec<f64>>, Vec<Vec<f64>>);

fn axis_tables(
    order: &VariableOrder,
    side: Interval,
    nodes: &[(f64, f64)],
    n: usize,
    cfg: &QuadConfig,
) -> Result<AxisTables> {
    let kernel = SingularKernel::new(order, Side::Left, WeightShift::Derivative);
    let rows: Vec<(Vec<f64>, Vec<f64>)> = nodes
        .par_iter()
        .map(|&(t, _)| {
            let rule = SingularRule::build(&kernel, t, side.a, cfg)?;
            let sines = (1..=n).map(|k| (k as f64 * PI * side.normalize(t)).sin()).collect();
            let caps = (1..=n)
                .map(|k| {
                    let f = k as f64 * PI;
                    f / side.width() * rule.apply(|x| (f * side.normalize(x)).cos())
                })
                .collect();
            Ok((sines, caps))
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().unzip())
}

impl AssembledFunctional {
    pub fn new(
        problem: &Problem,
        lift: &SmoothFn2,
        n_modes: usize,
        outer_grid: usize,
        cfg: &QuadConfig,
    ) -> Result<Self> {
        if !(1..=MAX_MODES).contains(&n_modes) {
            return Err(Error::config(format!(
                "n_modes must be in 1..={MAX_MODES}, got {n_modes}"
            )));
        }
        let r = problem.rect;
        let rule = OuterRule::new(outer_grid);
        let (n1, n2) = (rule.nodes(r.t1)?, rule.nodes(r.t2)?);
        let lift_vals: Vec<[f64; 3]> = (0..n1.len() * n2.len())
            .into_par_iter()
            .map(|idx| {
                let p = (n1[idx / n2.len()].0, n2[idx % n2.len()].0);
                let (d1, d2) = caputo_partials(problem, lift, p, cfg)?;
                Ok([lift.eval(p.0, p.1), d1, d2])
            })
            .collect::<Result<_>>()?;
        let (sin1, cap1) = axis_tables(&problem.alpha1, r.t1, &n1, n_modes, cfg)?;
        let (sin2, cap2) = axis_tables(&problem.alpha2, r.t2, &n2, n_modes, cfg)?;
        Ok(AssembledFunctional {
            problem: problem.clone(),
            n: n_modes,
            n1,
            n2,
            lift: lift_vals,
            sin1,
            cap1,
            sin2,
            cap2,
        })
    }

    pub fn dimension(&self) -> usize {
        self.n * self.n
    }

    pub fn eval(&self, c: &[f64]) -> Result<f64> {
        if c.len() != self.dimension() {
            return Err(Error::config(format!(
                "expected {} coefficients, got {}",
                self.dimension(),
                c.len()
            )));
        }
        let n = self.n;
        let m2 = self.n2.len();
        let mut values = Vec::with_capacity(self.lift.len());
        for (i, &(t1, _)) in self.n1.iter().enumerate() {
            for (j, &(t2, _)) in self.n2.iter().enumerate() {
                let [mut u, mut d1, mut d2] = self.lift[i * m2 + j];
                let (s1, c1, s2, c2) = (&self.sin1[i], &self.cap1[i], &self.sin2[j], &self.cap2[j]);
                for k in 0..n {
                    let row = &c[k * n..(k + 1) * n];
                    let (mut ss, mut sc) = (0.0, 0.0);
                    for m in 0..n {
                        ss += row[m] * s2[m];
                        sc += row[m] * c2[m];
                    }
                    u += s1[k] * ss;
                    d1 += c1[k] * ss;
                    d2 += s1[k] * sc;
                }
                values.push([self.problem.lagrangian.eval(&Slots { t1, t2, u, d1, d2 })]);
            }
        }
        let [j] = reduce_rect(&self.n1, &self.n2, &values)?;
        Ok(j)
    }
}

/// Minimizes `J` over `lift + span{φ_{km}}` starting from zero coefficients.
///
/// For indefinite functionals the iteration settles for a stationary point
/// and the report sets `nonconvex_flag`. To look for a maximum, negate `L`.
pub fn ritz_solve(problem: &Problem, psi: &BoundaryData, opts: &RitzOptions) -> Result<RitzSolution> {
    if psi.rect() != problem.rect {
        return Err(Error::config("boundary data and problem live on different rectangles"));
    }
    let lift = psi.lift();
    let assembled = AssembledFunctional::new(problem, &lift, opts.n_modes, opts.outer_grid, &opts.cfg)?;
    let qn = QuasiNewtonOptions {
        tol: opts.opt_tol,
        max_iter: opts.max_iter,
        ..Default::default()
    };
    let out = minimize(&|c| assembled.eval(c), &vec![0.0; assembled.dimension()], &qn)?;
    let expansion = RitzExpansion::new(lift, opts.n_modes, out.x.clone(), problem.rect)?;
    let r = problem.rect;
    let h = opts.residual_step.unwrap_or(1e-4 * r.t1.width().min(r.t2.width()));
    let residual = el_residual(problem, &expansion.to_fn(), opts.residual_grid, &opts.cfg, h)?;
    Ok(RitzSolution {
        report: SolveReport {
            coeffs: out.x,
            j_value: out.value,
            el_residual_l2: residual.l2,
            gradient_norm: out.gradient_norm,
            iterations: out.iterations,
            nonconvex_flag: out.nonconvex,
            converged: out.converged,
        },
        expansion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Rect2;
    use crate::variational::{functional_eval, Lagrangian};

    fn problem(l: Lagrangian) -> Problem {
        let o = VariableOrder::constant(0.4, Interval::unit()).unwrap();
        Problem::new(l, o.clone(), o, Rect2::unit()).unwrap()
    }

    #[test]
    fn assembled_matches_direct_evaluation() {
        let p = problem(Lagrangian::quadratic(1.0));
        let cfg = QuadConfig::default();
        let psi = BoundaryData::trace_of(&SmoothFn2::polynomial(vec![vec![1.0], vec![0.0, 1.0]]), p.rect).unwrap();
        let lift = psi.lift();
        let a = AssembledFunctional::new(&p, &lift, 3, 12, &cfg).unwrap();
        let c: Vec<f64> = (0..9).map(|i| 0.1 * i as f64 - 0.4).collect();
        let ex = RitzExpansion::new(lift, 3, c.clone(), p.rect).unwrap();
        let direct = functional_eval(&p, &ex.to_fn(), 12, &cfg).unwrap();
        let fast = a.eval(&c).unwrap();
        assert!((direct - fast).abs() < 1e-12 * direct.abs(), "{direct} vs {fast}");
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let p = problem(Lagrangian::quadratic(0.0));
        let opts = RitzOptions {
            n_modes: 2,
            outer_grid: 8,
            residual_grid: 2,
            ..Default::default()
        };
        let sol = ritz_solve(&p, &BoundaryData::constant(0.0, p.rect), &opts).unwrap();
        assert_eq!(sol.report.iterations, 0);
        assert_eq!(sol.report.j_value, 0.0);
        assert!(sol.report.coeffs.iter().all(|&c| c == 0.0));
        assert!(sol.report.converged && !sol.report.nonconvex_flag);
    }

    #[test]
    fn report_json_keys() {
        let r = SolveReport {
            coeffs: vec![1.0],
            j_value: 2.0,
            el_residual_l2: 0.5,
            gradient_norm: 1e-9,
            iterations: 3,
            nonconvex_flag: false,
            converged: true,
        };
        let v = serde_json::to_value(&r).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(
            keys,
            [
                "J_value",
                "coeffs",
                "el_residual_l2",
                "gradient_norm",
                "iterations",
                "nonconvex_flag"
            ]
        );
    }
}
