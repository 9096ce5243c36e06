//! Reductions to the smooth strongly convex setting: dual smoothing of
//! nonsmooth scalar losses, and ridge regularization of merely convex problems.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Vector;
use crate::oracles::{CompositeObjective, QuadraticParts, SmoothTerm};

/// Scalar loss applied to a linear score.
///
/// Hinge uses the convention `hinge(t) = max(0, 1 − t)`, whose conjugate lives
/// on `[−1, 0]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarLoss {
    Abs,
    Hinge,
    Squared,
    Logistic,
}

impl ScalarLoss {
    pub fn value(self, t: f64) -> f64 {
        match self {
            ScalarLoss::Abs => t.abs(),
            ScalarLoss::Hinge => (1.0 - t).max(0.0),
            ScalarLoss::Squared => 0.5 * t * t,
            ScalarLoss::Logistic => softplus(-t),
        }
    }

    /// `None` for the nonsmooth kinds.
    pub fn derivative(self, t: f64) -> Option<f64> {
        match self {
            ScalarLoss::Abs | ScalarLoss::Hinge => None,
            ScalarLoss::Squared => Some(t),
            ScalarLoss::Logistic => Some(-sigmoid(-t)),
        }
    }

    pub fn is_smooth(self) -> bool {
        matches!(self, ScalarLoss::Squared | ScalarLoss::Logistic)
    }

    /// Domain of the conjugate, for the kinds that get smoothed.
    pub fn conjugate_domain(self) -> Option<(f64, f64)> {
        match self {
            ScalarLoss::Abs => Some((-1.0, 1.0)),
            ScalarLoss::Hinge => Some((-1.0, 0.0)),
            _ => None,
        }
    }

    /// Bound on the second derivative for the smooth kinds.
    pub fn curvature(self) -> Option<f64> {
        match self {
            ScalarLoss::Squared => Some(1.0),
            ScalarLoss::Logistic => Some(0.25),
            _ => None,
        }
    }

    fn max_dual_sq(self) -> Option<f64> {
        self.conjugate_domain().map(|(lo, hi)| (lo * lo).max(hi * hi))
    }
}

pub(crate) fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

pub(crate) fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `max_{z ∈ dom} { z t − base*(z) − (η/2) z² }`, in closed form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothedLoss {
    base: ScalarLoss,
    eta: f64,
}

impl SmoothedLoss {
    pub fn base(&self) -> ScalarLoss {
        self.base
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Lipschitz constant of the derivative.
    pub fn curvature(&self) -> f64 {
        1.0 / self.eta
    }

    /// Uniform bound on `base(t) − smoothed(t)`.
    pub fn max_gap(&self) -> f64 {
        self.eta * self.base.max_dual_sq().unwrap_or(0.0) / 2.0
    }

    /// The maximizing dual variable, which is also the derivative.
    fn dual(&self, t: f64) -> f64 {
        match self.base {
            ScalarLoss::Abs => (t / self.eta).clamp(-1.0, 1.0),
            ScalarLoss::Hinge => ((t - 1.0) / self.eta).clamp(-1.0, 0.0),
            _ => unreachable!("smooth kinds are rejected at construction"),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        let z = self.dual(t);
        match self.base {
            // Huber: t²/(2η) inside, |t| − η/2 outside
            ScalarLoss::Abs => z * t - 0.5 * self.eta * z * z,
            ScalarLoss::Hinge => z * (t - 1.0) - 0.5 * self.eta * z * z,
            _ => unreachable!(),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.dual(t)
    }
}

pub fn smooth_loss(base: ScalarLoss, eta: f64) -> Result<SmoothedLoss> {
    if base.is_smooth() {
        return Err(Error::InvalidParameter(format!(
            "{base:?} is already smooth; smoothing applies to abs and hinge"
        )));
    }
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::InvalidParameter(format!("eta must be positive, got {eta}")));
    }
    Ok(SmoothedLoss { base, eta })
}

/// Smoothing parameter whose uniform approximation gap is at most `eps/2`.
pub fn smoothing_accuracy(eps: f64, base: ScalarLoss) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let zmax = base.max_dual_sq().ok_or_else(|| {
        Error::InvalidParameter(format!("{base:?} has no bounded conjugate domain"))
    })?;
    Ok(eps / zmax)
}

/// `f + (μ/2)‖x‖²`
#[derive(Debug)]
pub struct Ridge {
    inner: Arc<dyn SmoothTerm>,
    mu: f64,
}

impl Ridge {
    pub fn new(inner: Arc<dyn SmoothTerm>, mu: f64) -> Self {
        Ridge { inner, mu }
    }
}

impl SmoothTerm for Ridge {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &Vector) -> f64 {
        self.inner.value(x) + 0.5 * self.mu * x.norm_sq()
    }
    fn gradient(&self, x: &Vector) -> Vector {
        let mut g = self.inner.gradient(x);
        g.axpy(self.mu, x);
        g
    }
    fn lipschitz(&self) -> f64 {
        self.inner.lipschitz() + self.mu
    }
    fn quadratic_parts(&self) -> Option<QuadraticParts<'_>> {
        self.inner.quadratic_parts().map(|mut q| {
            q.ridge += self.mu;
            q
        })
    }
}

/// Folds `(μ/2)‖x‖²` with `μ = eps/R²` into `f`. An `eps/2`-solution of the
/// result is an `eps`-solution of `obj` whenever `R ≥ ‖x*‖`.
pub fn regularize(obj: &CompositeObjective, eps: f64, radius: f64) -> Result<CompositeObjective> {
    if !(eps > 0.0) || !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "regularization needs eps > 0 and R > 0 (eps = {eps}, R = {radius})"
        )));
    }
    let mu = eps / (radius * radius);
    let f: Arc<dyn SmoothTerm> = Arc::new(Ridge::new(obj.smooth().clone(), mu));
    CompositeObjective::new(f, obj.finite_sum().clone(), obj.mu() + mu)
}
