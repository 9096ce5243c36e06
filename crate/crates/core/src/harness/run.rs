use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::numerics::Vector;
use crate::oracles::{FiniteSumTerm, OracleCounters};
use crate::problems::{exact_minimizer, Instance};
use crate::sliding::{catalyst_vr_solve, sliding_solve_from, SlidingConfig};
use crate::solvers::{composite_fgm, plain_fgm_baseline, FullSmoothModel, Levels, StoppingRule};

use super::config::{ExperimentConfig, Method};

/// Reference solves aim this far below the experiment's accuracy.
const REFERENCE_ACCURACY: f64 = 1e-4;
const REFERENCE_MAX_ITERS: usize = 50_000_000;

/// One line of output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: Method,
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub eps: f64,
    #[serde(rename = "L_used")]
    pub l_used: f64,
    pub grad_f_calls: u64,
    pub grad_gk_calls: u64,
    pub wall_time_s: f64,
    pub final_gap: f64,
    pub converged: bool,
    pub seed: u64,
}

impl ResultRow {
    /// `grad_gk_calls · s + grad_f_calls · n²`: arithmetic cost when a
    /// component gradient costs `s` and `∇f` costs `n²` operations.
    pub fn weighted_cost(&self) -> f64 {
        self.grad_gk_calls as f64 * self.s as f64 + self.grad_f_calls as f64 * (self.n * self.n) as f64
    }
}

/// A row plus what stays out of the CSV.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub row: ResultRow,
    pub axis_value: Option<f64>,
    pub iterations: usize,
    pub levels: Option<Levels>,
    pub counters: OracleCounters,
    pub f_star: f64,
    /// True when `f_star` comes from a direct solve rather than a reference run.
    pub exact_reference: bool,
    pub diagnostics: Vec<String>,
}

/// Optimal value of an instance: a direct solve when the instance is all
/// quadratic, otherwise a long FGM run with the tighter mean-curvature
/// constant, driven to `REFERENCE_ACCURACY · eps`.
pub fn reference_optimum(inst: &Instance, eps: f64) -> Result<(f64, bool)> {
    let obj = &inst.objective;
    let mut ctr = OracleCounters::new();
    if inst.is_all_quadratic() {
        let x = exact_minimizer(obj)?;
        return Ok((obj.eval_objective(&x, &mut ctr)?, true));
    }
    let l_ref = inst.quadratic.lambda_max + inst.mu_reg + inst.glm.mean_lipschitz();
    let tol = (2.0 * obj.mu() * eps * REFERENCE_ACCURACY).sqrt();
    let rep = composite_fgm(
        &FullSmoothModel(obj),
        l_ref,
        obj.mu(),
        &Vector::zeros(obj.dim()),
        &StoppingRule::grad_norm(tol, REFERENCE_MAX_ITERS),
        &mut ctr,
    )?;
    if !rep.converged {
        log::warn!("reference solve stopped after {} iterations without meeting its tolerance", rep.iterations);
    }
    Ok((rep.final_value.unwrap_or(f64::NAN), false))
}

/// Runs one method on one instance, stopping at `F − f* ≤ gap`.
#[allow(clippy::too_many_arguments)]
pub fn run_method(
    method: Method,
    inst: &Instance,
    f_star: f64,
    eps: f64,
    gap: f64,
    seed: u64,
    sliding: &SlidingConfig,
    max_iters: usize,
) -> Result<(ResultRow, usize, Option<Levels>, OracleCounters, Vec<String>)> {
    let obj = &inst.objective;
    let x0 = Vector::zeros(obj.dim());
    let stop = StoppingRule::func_gap(gap, f_star, max_iters);
    let mut ctr = OracleCounters::new();
    let mut scfg = sliding.clone();
    scfg.eps = eps;
    scfg.seed = seed;
    scfg.outer_stop = Some(stop);

    let clock = Instant::now();
    let (report, l_used) = match method {
        Method::Sliding => {
            let l = scfg.resolve_l(obj)?;
            (sliding_solve_from(obj, &scfg, &x0, &mut ctr)?, l)
        }
        Method::CatalystVr => {
            let l = scfg.resolve_l(obj)?;
            (catalyst_vr_solve(obj, &scfg, &x0, &mut ctr)?, l)
        }
        Method::FgmBaseline => (plain_fgm_baseline(obj, &x0, &stop, &mut ctr)?, obj.lf() + obj.lg()),
    };
    let wall = clock.elapsed().as_secs_f64();
    let value = obj.eval_objective(&report.x_out, &mut OracleCounters::new())?;
    let row = ResultRow {
        method,
        n: obj.dim(),
        m: obj.m(),
        s: inst.glm.design().s(),
        eps,
        l_used,
        grad_f_calls: report.counters.grad_f_calls,
        grad_gk_calls: report.counters.grad_gk_calls,
        wall_time_s: wall,
        final_gap: value - f_star,
        converged: report.converged,
        seed,
    };
    Ok((row, report.iterations, report.levels, report.counters, report.diagnostics))
}

struct Cell {
    seed: u64,
    axis_value: Option<f64>,
    inst: Instance,
    f_star: f64,
    exact: bool,
}

/// Runs every `(method, seed, axis value)` combination in parallel and
/// returns the records sorted by method name, axis value and seed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let cells_in: Vec<(u64, Option<f64>)> = cfg
        .seeds
        .iter()
        .flat_map(|&s| cfg.axis_points().into_iter().map(move |a| (s, a)))
        .collect();
    let cells: Vec<Cell> = cells_in
        .par_iter()
        .map(|&(seed, axis_value)| {
            let inst = cfg.problem_for(seed, axis_value)?.build()?;
            let (f_star, exact) = reference_optimum(&inst, cfg.eps_for(axis_value))?;
            Ok(Cell {
                seed,
                axis_value,
                inst,
                f_star,
                exact,
            })
        })
        .collect::<Result<_>>()?;

    let jobs: Vec<(Method, &Cell)> = cfg
        .methods
        .iter()
        .flat_map(|&m| cells.iter().map(move |c| (m, c)))
        .collect();
    let sliding = cfg.sliding_config();
    let mut records: Vec<RunRecord> = jobs
        .par_iter()
        .map(|&(method, cell)| {
            let eps = cfg.eps_for(cell.axis_value);
            let (mut row, iterations, levels, counters, diagnostics) = run_method(
                method,
                &cell.inst,
                cell.f_star,
                eps,
                cfg.gap_target_for(cell.axis_value),
                cell.seed,
                &sliding,
                cfg.max_iters,
            )?;
            if !cfg.record_wall_time {
                row.wall_time_s = 0.0;
            }
            log::info!(
                "{} seed {} axis {:?}: grad_f {} grad_gk {} gap {:.3e} converged {}",
                method,
                cell.seed,
                cell.axis_value,
                row.grad_f_calls,
                row.grad_gk_calls,
                row.final_gap,
                row.converged
            );
            Ok(RunRecord {
                row,
                axis_value: cell.axis_value,
                iterations,
                levels,
                counters,
                f_star: cell.f_star,
                exact_reference: cell.exact,
                diagnostics,
            })
        })
        .collect::<Result<_>>()?;
    records.sort_by(|a, b| {
        a.row
            .method
            .as_str()
            .cmp(b.row.method.as_str())
            .then(a.axis_value.unwrap_or(0.0).total_cmp(&b.axis_value.unwrap_or(0.0)))
            .then(a.row.seed.cmp(&b.row.seed))
    });
    Ok(records)
}
