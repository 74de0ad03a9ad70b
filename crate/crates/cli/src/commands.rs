//! The `op`, `verify` and `solve` commands. Each writes its table or report
//! to `out` before returning a failure, so partial results stay visible.

use crate::config::{self, GridPoint, IdentityKind, OpConfig, RunConfig, SolveConfig, VerifyConfig};
use crate::error::{CliError, CliResult};
use crate::output::{fmt_num, write_csv};
use rayon::prelude::*;
use std::io::Write;
use vofrac::identities::{verify_green, verify_ibp, GreenInstance, IbpInstance, IdentityReport};
use vofrac::operators::{evaluate_with, partial_op_with};
use vofrac::variational::{ritz_solve, BoundaryData, Problem, RitzOptions};
use vofrac::{Axis, BoundMode, Interval, QuadConfig, Stencil};

fn section<'a, T>(s: &'a Option<T>, name: &str) -> CliResult<&'a T> {
    s.as_ref()
        .ok_or_else(|| CliError::config(format!("missing \"{name}\" section")))
}

pub fn run_op(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<()> {
    let op = section(&cfg.op, "op")?;
    cfg.quad.validate()?;
    match op.axis {
        None => op_1d(op, &cfg.quad, out),
        Some(a) => op_2d(op, a, &cfg.quad, out),
    }
}

fn stencil(op: &OpConfig, interval: Interval) -> CliResult<Stencil> {
    match op.h {
        None => Ok(Stencil::default_for(interval)),
        Some(h) if h > 0.0 && h.is_finite() => Ok(Stencil::adaptive(h)),
        Some(h) => Err(CliError::config(format!("op.h must be positive, got {h}"))),
    }
}

fn op_1d(op: &OpConfig, quad: &QuadConfig, out: &mut dyn Write) -> CliResult<()> {
    if op.rect.is_some() {
        return Err(CliError::config("op.rect needs op.axis"));
    }
    let iv = config::interval("op.interval", op.interval.unwrap_or([0.0, 1.0]))?;
    let f = op.f.as_fn1("op.f")?;
    let order = op.alpha.build("op.alpha", iv, op.l, op.bound.into())?;
    let stencil = stencil(op, iv)?;
    let ts = op
        .grid
        .points()?
        .into_iter()
        .map(|p| match p {
            GridPoint::Scalar(t) => Ok(t),
            GridPoint::Pair(_) => Err(CliError::config("op.grid: one-dimensional evaluation takes numbers")),
        })
        .collect::<CliResult<Vec<f64>>>()?;
    let kind = op.kind.into();
    let values: Vec<_> = ts
        .par_iter()
        .map(|&t| evaluate_with(kind, &f, &order, iv, t, quad, stencil))
        .collect();
    let mut rows = Vec::with_capacity(ts.len());
    for (t, v) in ts.iter().zip(values) {
        rows.push(vec![fmt_num(*t), fmt_num(v?)]);
    }
    write_csv(out, &["t", "value"], &rows)?;
    Ok(())
}

fn op_2d(op: &OpConfig, axis: u8, quad: &QuadConfig, out: &mut dyn Write) -> CliResult<()> {
    if op.interval.is_some() {
        return Err(CliError::config(
            "op.interval does not apply to partial operators; use op.rect",
        ));
    }
    let axis = match axis {
        1 => Axis::T1,
        2 => Axis::T2,
        other => return Err(CliError::config(format!("op.axis must be 1 or 2, got {other}"))),
    };
    let rect = config::rect("op.rect", op.rect.unwrap_or([[0.0, 1.0], [0.0, 1.0]]))?;
    let f = op.f.as_fn2("op.f")?;
    let order = op.alpha.build("op.alpha", rect.axis(axis), op.l, op.bound.into())?;
    let stencil = stencil(op, rect.axis(axis))?;
    let pts = op
        .grid
        .points()?
        .into_iter()
        .map(|p| match p {
            GridPoint::Pair([a, b]) => Ok((a, b)),
            GridPoint::Scalar(_) => Err(CliError::config("op.grid: partial operators take [t1, t2] pairs")),
        })
        .collect::<CliResult<Vec<(f64, f64)>>>()?;
    let kind = op.kind.into();
    let values: Vec<_> = pts
        .par_iter()
        .map(|&p| partial_op_with(kind, axis, &f, &order, &rect, p, quad, stencil))
        .collect();
    let mut rows = Vec::with_capacity(pts.len());
    for (p, v) in pts.iter().zip(values) {
        rows.push(vec![fmt_num(p.0), fmt_num(p.1), fmt_num(v?)]);
    }
    write_csv(out, &["t1", "t2", "value"], &rows)?;
    Ok(())
}

enum Instance {
    Ibp(IbpInstance),
    Green(GreenInstance),
}

fn identity_instance(v: &VerifyConfig) -> CliResult<Instance> {
    let rect = config::rect("verify.rect", v.rect)?;
    let mode = match v.identity {
        IdentityKind::Ibp => BoundMode::AboveOneOverL,
        IdentityKind::Green => BoundMode::BelowOneMinus,
    };
    let alpha1 = v.alpha1.build("verify.alpha1", rect.t1, v.l, mode)?;
    let alpha2 = v.alpha2.build("verify.alpha2", rect.t2, v.l, mode)?;
    let f = v.f.build("verify.f")?;
    let g = v.g.build("verify.g")?;
    let need = |spec: &Option<config::Fn2Spec>, name: &str| match spec {
        Some(s) => s.build(&format!("verify.{name}")),
        None => Err(CliError::config(format!("verify.{name} is required for this identity"))),
    };
    Ok(match v.identity {
        IdentityKind::Ibp => {
            if v.eta.is_some() {
                return Err(CliError::config("verify.eta belongs to green; ibp takes eta1 and eta2"));
            }
            Instance::Ibp(IbpInstance {
                f,
                g,
                eta1: need(&v.eta1, "eta1")?,
                eta2: need(&v.eta2, "eta2")?,
                alpha1,
                alpha2,
                rect,
            })
        }
        IdentityKind::Green => {
            if v.eta1.is_some() || v.eta2.is_some() {
                return Err(CliError::config("verify.eta1/eta2 belong to ibp; green takes eta"));
            }
            Instance::Green(GreenInstance {
                f,
                g,
                eta: need(&v.eta, "eta")?,
                alpha1,
                alpha2,
                rect,
            })
        }
    })
}

pub fn default_tolerance(identity: IdentityKind) -> f64 {
    match identity {
        IdentityKind::Ibp => 1e-5,
        IdentityKind::Green => 1e-4,
    }
}

pub fn run_verify(cfg: &RunConfig, tolerance: Option<f64>, out: &mut dyn Write) -> CliResult<()> {
    let v = section(&cfg.verify, "verify")?;
    if v.ladder.is_empty() {
        return Err(CliError::config("verify.ladder needs at least one level"));
    }
    let tol = tolerance.or(cfg.tolerance).unwrap_or(default_tolerance(v.identity));
    let inst = identity_instance(v)?;
    let mut reports: Vec<IdentityReport> = Vec::with_capacity(v.ladder.len());
    for level in &v.ladder {
        let quad = cfg.quad.with_panels(level.panels);
        quad.validate()?;
        reports.push(match &inst {
            Instance::Ibp(i) => verify_ibp(i, level.outer_grid, &quad, tol)?,
            Instance::Green(i) => verify_green(i, level.outer_grid, &quad, tol)?,
        });
    }
    let rows: Vec<Vec<String>> = reports
        .iter()
        .enumerate()
        .map(|(i, r)| {
            vec![
                i.to_string(),
                r.outer_grid.to_string(),
                r.quad.panels.to_string(),
                fmt_num(r.lhs),
                fmt_num(r.rhs),
                fmt_num(r.residual),
            ]
        })
        .collect();
    write_csv(out, &["level", "outer_grid", "panels", "lhs", "rhs", "residual"], &rows)?;
    let last = reports.last().expect("ladder is non-empty");
    if last.residual.abs() <= tol {
        Ok(())
    } else {
        Err(CliError::IdentityFailed {
            residual: last.residual.abs(),
            tolerance: tol,
        })
    }
}

fn ritz_options(s: &SolveConfig, quad: QuadConfig, tolerance: Option<f64>) -> RitzOptions {
    let d = RitzOptions::default();
    RitzOptions {
        n_modes: s.n_modes.unwrap_or(d.n_modes),
        outer_grid: s.outer_grid.unwrap_or(d.outer_grid),
        cfg: quad,
        opt_tol: tolerance.or(s.opt_tol).unwrap_or(d.opt_tol),
        max_iter: s.max_iter.unwrap_or(d.max_iter),
        residual_grid: s.residual_grid.unwrap_or(d.residual_grid),
        residual_step: None,
    }
}

pub fn run_solve(cfg: &RunConfig, tolerance: Option<f64>, out: &mut dyn Write) -> CliResult<()> {
    let s = section(&cfg.solve, "solve")?;
    cfg.quad.validate()?;
    let rect = config::rect("solve.rect", s.rect)?;
    let lagrangian = s.lagrangian.build(&rect)?;
    let alpha1 = s.alpha1.build("solve.alpha1", rect.t1, s.l, s.bound.into())?;
    let alpha2 = s.alpha2.build("solve.alpha2", rect.t2, s.l, s.bound.into())?;
    let psi = BoundaryData::trace_of(&s.boundary.build("solve.boundary")?, rect)?;
    let problem = Problem::new(lagrangian, alpha1, alpha2, rect)?;
    let opts = ritz_options(s, cfg.quad, tolerance.or(cfg.tolerance));
    let report = ritz_solve(&problem, &psi, &opts)?.report;
    let mut json = serde_json::to_string_pretty(&report).map_err(|e| CliError::config(e.to_string()))?;
    json.push('\n');
    out.write_all(json.as_bytes())?;
    if report.converged {
        Ok(())
    } else {
        Err(CliError::Stalled {
            iterations: report.iterations,
            gradient_norm: report.gradient_norm,
        })
    }
}
