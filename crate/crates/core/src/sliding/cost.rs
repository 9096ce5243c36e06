use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracles::CompositeObjective;

/// Grid size used by [`choose_l`].
pub const L_GRID_POINTS: usize = 64;

/// Relative slack when checking `μ ≤ L ≤ L_f` against roundoff.
const RANGE_SLACK: f64 = 1e-12;

/// The constants the cost model depends on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemConstants {
    pub m: usize,
    pub lf: f64,
    pub lg: f64,
    pub mu: f64,
}

impl ProblemConstants {
    pub fn of(obj: &CompositeObjective) -> Self {
        ProblemConstants {
            m: obj.m(),
            lf: obj.lf(),
            lg: obj.lg(),
            mu: obj.mu(),
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return Err(Error::InvalidParameter(format!("cost model needs mu > 0, got {}", self.mu)));
        }
        if self.m == 0 || !(self.lf >= 0.0) || !(self.lg >= 0.0) {
            return Err(Error::InvalidParameter("cost model needs m >= 1 and L_f, L_g >= 0".into()));
        }
        Ok(())
    }
}

/// Predicted oracle counts, log factors dropped.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub grad_f_est: f64,
    pub grad_gk_est: f64,
    pub l_used: f64,
}

/// Predicted oracle counts for prox parameter `l`:
///
/// * `∇f`: `√(L/μ) · L_f/(L+μ)`
/// * `∇g_k`: `m√(L/μ) + √(L/μ) · L_f/(L+μ) · √(m L_g/(L_f+L))`
pub fn estimate_cost(c: &ProblemConstants, l: f64) -> Result<CostEstimate> {
    c.check()?;
    let lo = c.mu * (1.0 - RANGE_SLACK);
    let hi = c.lf * (1.0 + RANGE_SLACK);
    if !(l >= lo && l <= hi) {
        return Err(Error::InvalidParameter(format!(
            "L = {l} outside [mu, L_f] = [{}, {}]",
            c.mu, c.lf
        )));
    }
    let m = c.m as f64;
    let outer = (l / c.mu).sqrt();
    let gd_iters = c.lf / (l + c.mu);
    let vr = (m * c.lg / (c.lf + l)).sqrt();
    Ok(CostEstimate {
        grad_f_est: outer * gd_iters,
        grad_gk_est: m * outer + outer * gd_iters * vr,
        l_used: l,
    })
}

/// `points` geometrically spaced values from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points <= 1 || lo == hi {
        return vec![hi];
    }
    let ratio = (hi / lo).ln();
    (0..points)
        .map(|i| {
            if i + 1 == points {
                hi
            } else {
                lo * (ratio * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

/// Grid point minimizing `grad_gk_est`; ties go to the larger `L`.
pub fn argmin_on_grid(c: &ProblemConstants, grid: &[f64]) -> Result<f64> {
    let mut best = (f64::INFINITY, f64::NAN);
    for &l in grid {
        let v = estimate_cost(c, l)?.grad_gk_est;
        if v <= best.0 {
            best = (v, l);
        }
    }
    Ok(best.1)
}

/// Prox parameter minimizing the predicted component-gradient count over a
/// [`L_GRID_POINTS`]-point geometric grid on `[μ, L_f]`.
pub fn choose_l(c: &ProblemConstants) -> Result<f64> {
    c.check()?;
    if c.mu > c.lf {
        return Err(Error::InvalidParameter(format!(
            "mu = {} exceeds L_f = {}; the interval [mu, L_f] is empty",
            c.mu, c.lf
        )));
    }
    if c.mu == c.lf {
        return Ok(c.lf);
    }
    argmin_on_grid(c, &geometric_grid(c.mu, c.lf, L_GRID_POINTS))
}
