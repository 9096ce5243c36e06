//! Gradient sliding through Catalyst: an accelerated proximal-point outer
//! loop, a composite gradient method on each proximal subproblem, and a
//! variance-reduced solver on each linearized model. Also the cost model that
//! picks the proximal parameter.

mod catalyst;
mod cost;

pub use catalyst::{catalyst_outer, next_alpha, CatalystState, OuterSettings, ProxRequest, ProxResponse};
pub use cost::{argmin_on_grid, choose_l, estimate_cost, geometric_grid, CostEstimate, ProblemConstants, L_GRID_POINTS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Vector;
use crate::oracles::{Components, CompositeObjective, CountedSum, OracleCounters};
use crate::solvers::{
    composite_gd, varag_solve, varag_solve_scheduled, InnerSolution, LevelStats, Levels, ProxSubproblem, QuadraticAnchors, SolverReport,
    StopKind, StoppingRule,
};

const DEFAULT_OUTER_CAP: usize = 100_000;

/// `"AUTO"` in JSON.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AutoKeyword {
    #[serde(rename = "AUTO")]
    Auto,
}

/// Proximal parameter: a number, or `"AUTO"` for [`choose_l`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LChoice {
    Value(f64),
    Auto(AutoKeyword),
}

impl Default for LChoice {
    fn default() -> Self {
        LChoice::Auto(AutoKeyword::Auto)
    }
}

/// Tuning for [`sliding_solve`].
///
/// The `GRAD_NORM` tolerances in `inner_gd_budget` and `vr_budget` are floors
/// under the adaptive per-subproblem tolerance; their `max_iters` cap the
/// level. `FIXED_ITERS` budgets run that many iterations regardless.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlidingConfig {
    #[serde(default)]
    pub l: LChoice,
    /// Defaults to `‖∇F‖ ≤ √(2μ·eps)`.
    #[serde(default)]
    pub outer_stop: Option<StoppingRule>,
    #[serde(default = "default_gd_budget")]
    pub inner_gd_budget: StoppingRule,
    #[serde(default = "default_vr_budget")]
    pub vr_budget: StoppingRule,
    #[serde(default = "default_true")]
    pub warm_start: bool,
    #[serde(default)]
    pub seed: u64,
    /// Required when used on its own; an experiment config supplies it.
    #[serde(default)]
    pub eps: f64,
    /// Model-solve tolerance as a fraction of the larger of the subproblem
    /// tolerance and the current subproblem gradient norm.
    #[serde(default = "default_vr_ratio")]
    pub vr_accuracy_ratio: f64,
    /// Epoch of the variance-reduced schedule each model solve starts in.
    #[serde(default = "default_first_epoch")]
    pub vr_first_epoch: usize,
}

fn default_first_epoch() -> usize {
    1
}

fn default_gd_budget() -> StoppingRule {
    StoppingRule::grad_norm(1e-12, 10_000)
}

fn default_vr_budget() -> StoppingRule {
    StoppingRule::grad_norm(1e-12, 1_000)
}

fn default_true() -> bool {
    true
}

fn default_vr_ratio() -> f64 {
    0.5
}

impl SlidingConfig {
    pub fn new(eps: f64) -> Self {
        SlidingConfig {
            l: LChoice::default(),
            outer_stop: None,
            inner_gd_budget: default_gd_budget(),
            vr_budget: default_vr_budget(),
            warm_start: true,
            seed: 0,
            eps,
            vr_accuracy_ratio: default_vr_ratio(),
            vr_first_epoch: default_first_epoch(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(Error::config("eps", format!("must be positive, got {}", self.eps)));
        }
        if self.vr_first_epoch == 0 {
            return Err(Error::config("vr_first_epoch", "epochs are numbered from 1"));
        }
        if !(self.vr_accuracy_ratio > 0.0 && self.vr_accuracy_ratio < 1.0) {
            return Err(Error::config(
                "vr_accuracy_ratio",
                format!("must lie in (0, 1), got {}", self.vr_accuracy_ratio),
            ));
        }
        if let LChoice::Value(l) = self.l {
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::config("l", format!("must be positive or \"AUTO\", got {l}")));
            }
        }
        for (name, rule) in [("inner_gd_budget", &self.inner_gd_budget), ("vr_budget", &self.vr_budget)] {
            rule.validate().map_err(|e| Error::config(name, e.to_string()))?;
            if matches!(rule.kind, StopKind::FuncGap { .. }) {
                return Err(Error::config(name, "FUNC_GAP needs the subproblem optimum; use GRAD_NORM or FIXED_ITERS"));
            }
        }
        if let Some(rule) = &self.outer_stop {
            rule.validate().map_err(|e| Error::config("outer_stop", e.to_string()))?;
        }
        Ok(())
    }

    /// The proximal parameter this config selects for `obj`.
    pub fn resolve_l(&self, obj: &CompositeObjective) -> Result<f64> {
        let c = ProblemConstants::of(obj);
        match self.l {
            LChoice::Auto(_) => choose_l(&c),
            LChoice::Value(l) => {
                estimate_cost(&c, l)?;
                Ok(l)
            }
        }
    }

    pub fn resolve_outer_stop(&self, obj: &CompositeObjective) -> StoppingRule {
        self.outer_stop
            .unwrap_or_else(|| StoppingRule::grad_norm((2.0 * obj.mu() * self.eps).sqrt(), DEFAULT_OUTER_CAP))
    }
}

/// Deterministic per-call seed.
fn derive_seed(base: u64, outer: usize, inner: usize) -> u64 {
    let mut z = base ^ ((outer as u64) << 32 | inner as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Subproblem tolerance guaranteeing an `eps`-accurate prox point of a
/// `(L+μ)`-strongly convex subproblem, floored by the budget tolerance.
fn tolerance_for(eps: f64, strong: f64, budget: &StoppingRule) -> StoppingRule {
    match budget.kind {
        StopKind::GradNorm { tol } => {
            StoppingRule::grad_norm((2.0 * strong * eps).sqrt().max(tol), budget.max_iters)
        }
        _ => *budget,
    }
}

fn scaled_rule(rule: StoppingRule, current: Option<f64>, ratio: f64, budget: &StoppingRule) -> StoppingRule {
    match (rule.kind, budget.kind) {
        (StopKind::GradNorm { tol }, StopKind::GradNorm { tol: floor }) => {
            let base = current.map_or(tol, |g| g.max(tol));
            StoppingRule::grad_norm((ratio * base).max(floor), budget.max_iters)
        }
        _ => *budget,
    }
}

fn warn_regime(obj: &CompositeObjective) {
    let flags = obj.regime();
    if !flags.m_below_lg_over_mu {
        log::warn!(
            "regime: m = {} exceeds L_g/mu = {:.3e}; the separated bounds need m <= L_g/mu",
            obj.m(),
            obj.lg() / obj.mu()
        );
    }
    if !flags.m_lf_below_lg {
        log::warn!(
            "regime: m*L_f = {:.3e} exceeds L_g = {:.3e}; the separated bounds need m*L_f <= L_g",
            obj.m() as f64 * obj.lf(),
            obj.lg()
        );
    }
}

fn check_mu(obj: &CompositeObjective) -> Result<()> {
    if !(obj.mu() > 0.0) {
        return Err(Error::InvalidParameter(
            "sliding needs mu > 0; regularize the problem first".into(),
        ));
    }
    Ok(())
}

/// [`sliding_solve_from`] started at the origin.
pub fn sliding_solve(obj: &CompositeObjective, cfg: &SlidingConfig, ctr: &mut OracleCounters) -> Result<SolverReport> {
    sliding_solve_from(obj, cfg, &Vector::zeros(obj.dim()), ctr)
}

/// The full three-level composition: Catalyst over
/// `F + (L/2)‖· − y_k‖²`, composite gradient steps on each such subproblem,
/// and the variance-reduced solver on each linearized model. The report's
/// `levels` split the counters by level.
pub fn sliding_solve_from(
    obj: &CompositeObjective,
    cfg: &SlidingConfig,
    x0: &Vector,
    ctr: &mut OracleCounters,
) -> Result<SolverReport> {
    cfg.validate()?;
    check_mu(obj)?;
    warn_regime(obj);
    let l = cfg.resolve_l(obj)?;
    let settings = OuterSettings {
        l,
        stop: cfg.resolve_outer_stop(obj),
        warm_start: cfg.warm_start,
    };
    log::info!("sliding: L = {l:.4e}, outer stop {:?}", settings.stop.kind);
    let strong = l + obj.mu();
    let components = Components(obj);
    let mut levels = Levels::default();
    let mut gd_unconverged = 0usize;
    let mut vr_unconverged = 0usize;
    let start = *ctr;

    let mut report = catalyst_outer(
        obj,
        &settings,
        x0,
        |req, ctr| {
            let gd_stop = tolerance_for(req.eps, strong, &cfg.inner_gd_budget);
            let sub = ProxSubproblem {
                obj,
                l,
                center: req.center.clone(),
            };
            let outer_k = req.iteration;
            let out = composite_gd(
                &sub,
                req.start,
                req.known,
                |mreq, ctr| {
                    let vr_stop = scaled_rule(gd_stop, mreq.grad_norm, cfg.vr_accuracy_ratio, &cfg.vr_budget);
                    let seed = derive_seed(cfg.seed, outer_k, mreq.iteration);
                    let o = varag_solve_scheduled(
                        &components,
                        mreq.model,
                        mreq.start,
                        &vr_stop,
                        seed,
                        cfg.vr_first_epoch,
                        ctr,
                    )?;
                    Ok(InnerSolution::from(o))
                },
                &gd_stop,
                ctr,
            )?;
            let own = out.report.counters.since(&out.model_level.counters);
            levels.inner_gd.counters += own;
            levels.inner_gd.iterations += out.report.iterations as u64;
            levels.vr.counters += out.model_level.counters;
            levels.vr.iterations += out.model_level.iterations;
            levels.vr_inner_steps += out.inner_steps;
            vr_unconverged += out.unconverged_models;
            if !out.report.converged {
                gd_unconverged += 1;
            }
            Ok(ProxResponse {
                x: out.report.x_out,
                converged: out.report.converged,
            })
        },
        ctr,
    )?;

    let total = ctr.since(&start);
    levels.outer = LevelStats {
        counters: total.since(&(levels.inner_gd.counters + levels.vr.counters)),
        iterations: report.iterations as u64,
    };
    if gd_unconverged > 0 {
        report.diagnostics.push(format!("inner_gd: {gd_unconverged} solves hit their budget"));
    }
    if vr_unconverged > 0 {
        report.diagnostics.push(format!("vr: {vr_unconverged} solves hit their budget"));
    }
    report.levels = Some(levels);
    Ok(report)
}

/// `f + g_k` as the `k`-th component; each query costs one `∇f` and one `∇g_k`.
#[derive(Clone, Copy, Debug)]
pub struct SmoothPlusComponents<'a>(pub &'a CompositeObjective);

impl CountedSum for SmoothPlusComponents<'_> {
    fn num_components(&self) -> usize {
        self.0.m()
    }
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn lipschitz(&self) -> f64 {
        self.0.lf() + self.0.lg()
    }
    fn component_gradient(&self, k: usize, x: &Vector, ctr: &mut OracleCounters) -> Result<Vector> {
        let mut g = self.0.grad_f(x, ctr)?;
        g.axpy(1.0, &self.0.grad_component(k, x, ctr)?);
        Ok(g)
    }
    fn value(&self, x: &Vector, ctr: &mut OracleCounters) -> Result<f64> {
        self.0.eval_objective(x, ctr)
    }
}

/// Catalyst with the variance-reduced solver applied directly to each
/// proximal subproblem, with `f + g_k` as components. A comparison point that
/// does not separate the two oracles.
pub fn catalyst_vr_solve(
    obj: &CompositeObjective,
    cfg: &SlidingConfig,
    x0: &Vector,
    ctr: &mut OracleCounters,
) -> Result<SolverReport> {
    cfg.validate()?;
    check_mu(obj)?;
    let l = cfg.resolve_l(obj)?;
    let settings = OuterSettings {
        l,
        stop: cfg.resolve_outer_stop(obj),
        warm_start: cfg.warm_start,
    };
    let strong = l + obj.mu();
    let sum = SmoothPlusComponents(obj);
    let zero = Vector::zeros(obj.dim());
    let mut levels = Levels::default();
    let mut unconverged = 0usize;
    let start = *ctr;

    let mut report = catalyst_outer(
        obj,
        &settings,
        x0,
        |req, ctr| {
            let stop = tolerance_for(req.eps, strong, &cfg.vr_budget);
            let anchors = QuadraticAnchors {
                linear: zero.clone(),
                lf: 0.0,
                center: req.center.clone(),
                l,
                prox_center: req.center.clone(),
            };
            let before = *ctr;
            let o = varag_solve(&sum, &anchors, req.start, &stop, derive_seed(cfg.seed, req.iteration, 0), ctr)?;
            levels.vr.counters += ctr.since(&before);
            levels.vr.iterations += o.report.iterations as u64;
            levels.vr_inner_steps += o.inner_steps;
            if !o.report.converged {
                unconverged += 1;
            }
            Ok(ProxResponse {
                x: o.report.x_out,
                converged: o.report.converged,
            })
        },
        ctr,
    )?;
    let total = ctr.since(&start);
    levels.outer = LevelStats {
        counters: total.since(&levels.vr.counters),
        iterations: report.iterations as u64,
    };
    if unconverged > 0 {
        report.diagnostics.push(format!("vr: {unconverged} solves hit their budget"));
    }
    report.levels = Some(levels);
    Ok(report)
}
