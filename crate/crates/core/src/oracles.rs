//! The two-oracle view of `F(x) = f(x) + (1/m) Σ_k g_k(x)`: a smooth term
//! queried through `∇f` and a finite sum queried one component gradient at a
//! time. Every query goes through an explicit [`OracleCounters`] so nested
//! solvers cannot skip the accounting.

use std::fmt::Debug;
use std::ops::{Add, AddAssign};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{check_dim, SparseRow, SymmetricMatrix, Vector};

/// Exact tallies of oracle calls within one run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleCounters {
    pub grad_f_calls: u64,
    pub grad_gk_calls: u64,
    pub f_evals: u64,
    pub g_evals: u64,
}

impl OracleCounters {
    pub fn new() -> Self {
        Self::default()
    }

    /// Calls made since `earlier` was snapshotted.
    pub fn since(&self, earlier: &OracleCounters) -> OracleCounters {
        OracleCounters {
            grad_f_calls: self.grad_f_calls - earlier.grad_f_calls,
            grad_gk_calls: self.grad_gk_calls - earlier.grad_gk_calls,
            f_evals: self.f_evals - earlier.f_evals,
            g_evals: self.g_evals - earlier.g_evals,
        }
    }
}

impl Add for OracleCounters {
    type Output = OracleCounters;
    fn add(self, o: OracleCounters) -> OracleCounters {
        OracleCounters {
            grad_f_calls: self.grad_f_calls + o.grad_f_calls,
            grad_gk_calls: self.grad_gk_calls + o.grad_gk_calls,
            f_evals: self.f_evals + o.f_evals,
            g_evals: self.g_evals + o.g_evals,
        }
    }
}

impl AddAssign for OracleCounters {
    fn add_assign(&mut self, o: OracleCounters) {
        *self = *self + o;
    }
}

/// `f(x) = ½⟨x, Cx⟩ − ⟨b, x⟩ + (ridge/2)‖x‖²`, exposed so that a direct
/// solve can stand in as ground truth.
#[derive(Clone, Copy, Debug)]
pub struct QuadraticParts<'a> {
    pub c: &'a SymmetricMatrix,
    pub b: Option<&'a Vector>,
    pub ridge: f64,
}

/// Components `g_k(x) = ½(⟨a_k, x⟩ − y_k)²`.
#[derive(Clone, Copy, Debug)]
pub struct LeastSquaresParts<'a> {
    pub rows: &'a [SparseRow],
    pub targets: &'a [f64],
}

/// Smooth term `f` with an `L_f`-Lipschitz gradient.
pub trait SmoothTerm: Debug + Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &Vector) -> f64;
    fn gradient(&self, x: &Vector) -> Vector;
    fn lipschitz(&self) -> f64;

    fn quadratic_parts(&self) -> Option<QuadraticParts<'_>> {
        None
    }
}

/// Finite sum `g = (1/m) Σ g_k` with every `∇g_k` `L_g`-Lipschitz.
pub trait FiniteSumTerm: Debug + Send + Sync {
    fn num_components(&self) -> usize;
    fn dim(&self) -> usize;
    fn component_value(&self, k: usize, x: &Vector) -> f64;
    fn component_gradient(&self, k: usize, x: &Vector) -> Vector;
    /// Uniform bound over components.
    fn lipschitz(&self) -> f64;

    /// A (possibly much smaller) Lipschitz constant for the averaged gradient
    /// `∇g`. Only used to build reference solutions, never by the compared
    /// methods.
    fn mean_lipschitz(&self) -> f64 {
        self.lipschitz()
    }

    fn least_squares_parts(&self) -> Option<LeastSquaresParts<'_>> {
        None
    }
}

/// `F = f + (1/m) Σ g_k` with its constants.
#[derive(Clone, Debug)]
pub struct CompositeObjective {
    f: Arc<dyn SmoothTerm>,
    g: Arc<dyn FiniteSumTerm>,
    mu: f64,
}

/// Preconditions under which the separated complexity bounds hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeFlags {
    /// `m ≤ L_g / μ`
    pub m_below_lg_over_mu: bool,
    /// `m · L_f ≤ L_g`
    pub m_lf_below_lg: bool,
}

impl RegimeFlags {
    pub fn all(&self) -> bool {
        self.m_below_lg_over_mu && self.m_lf_below_lg
    }
}

impl CompositeObjective {
    pub fn new(f: Arc<dyn SmoothTerm>, g: Arc<dyn FiniteSumTerm>, mu: f64) -> Result<Self> {
        check_dim(f.dim(), g.dim())?;
        if f.dim() == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if g.num_components() == 0 {
            return Err(Error::InvalidParameter("finite sum needs m >= 1".into()));
        }
        let (lf, lg) = (f.lipschitz(), g.lipschitz());
        if !(lf >= 0.0 && lg >= 0.0 && lf + lg > 0.0) || !lf.is_finite() || !lg.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Lipschitz constants must be finite and non-negative with a positive sum (L_f = {lf}, L_g = {lg})"
            )));
        }
        if !(mu >= 0.0) || mu > lf + lg {
            return Err(Error::InvalidParameter(format!(
                "strong convexity mu = {mu} inconsistent with L_f + L_g = {}",
                lf + lg
            )));
        }
        Ok(CompositeObjective { f, g, mu })
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    pub fn m(&self) -> usize {
        self.g.num_components()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lf(&self) -> f64 {
        self.f.lipschitz()
    }

    pub fn lg(&self) -> f64 {
        self.g.lipschitz()
    }

    pub fn smooth(&self) -> &Arc<dyn SmoothTerm> {
        &self.f
    }

    pub fn finite_sum(&self) -> &Arc<dyn FiniteSumTerm> {
        &self.g
    }

    pub fn regime(&self) -> RegimeFlags {
        let m = self.m() as f64;
        RegimeFlags {
            m_below_lg_over_mu: self.mu > 0.0 && m * self.mu <= self.lg(),
            m_lf_below_lg: m * self.lf() <= self.lg(),
        }
    }

    fn check_x(&self, x: &Vector) -> Result<()> {
        check_dim(self.dim(), x.len())
    }

    /// `∇f(x)`; one `grad_f` call.
    pub fn grad_f(&self, x: &Vector, ctr: &mut OracleCounters) -> Result<Vector> {
        self.check_x(x)?;
        ctr.grad_f_calls += 1;
        let gr = self.f.gradient(x);
        gr.check_finite("grad f")?;
        Ok(gr)
    }

    /// `∇g_k(x)`; one `grad_gk` call.
    pub fn grad_component(&self, k: usize, x: &Vector, ctr: &mut OracleCounters) -> Result<Vector> {
        self.check_x(x)?;
        if k >= self.m() {
            return Err(Error::IndexOutOfRange {
                index: k,
                len: self.m(),
            });
        }
        ctr.grad_gk_calls += 1;
        let gr = self.g.component_gradient(k, x);
        gr.check_finite("grad g_k")?;
        Ok(gr)
    }

    /// `∇g(x) = (1/m) Σ ∇g_k(x)`; exactly `m` `grad_gk` calls.
    pub fn full_grad_g(&self, x: &Vector, ctr: &mut OracleCounters) -> Result<Vector> {
        let m = self.m();
        let mut acc = Vector::zeros(self.dim());
        for k in 0..m {
            acc.axpy(1.0, &self.grad_component(k, x, ctr)?);
        }
        acc.scale(1.0 / m as f64);
        Ok(acc)
    }

    /// `∇F(x) = ∇f(x) + ∇g(x)`; one `grad_f` and `m` `grad_gk` calls.
    pub fn grad_objective(&self, x: &Vector, ctr: &mut OracleCounters) -> Result<Vector> {
        let mut gr = self.grad_f(x, ctr)?;
        gr.axpy(1.0, &self.full_grad_g(x, ctr)?);
        Ok(gr)
    }

    pub fn eval_f(&self, x: &Vector, ctr: &mut OracleCounters) -> Result<f64> {
        self.check_x(x)?;
        ctr.f_evals += 1;
        finite_scalar(self.f.value(x), "f")
    }

    /// `g(x)`; `m` component evaluations.
    pub fn eval_g(&self, x: &Vector, ctr: &mut OracleCounters) -> Result<f64> {
        self.check_x(x)?;
        let m = self.m();
        ctr.g_evals += m as u64;
        let sum: f64 = (0..m).map(|k| self.g.component_value(k, x)).sum();
        finite_scalar(sum / m as f64, "g")
    }

    /// `F(x)`; one `f` evaluation and `m` component evaluations.
    pub fn eval_objective(&self, x: &Vector, ctr: &mut OracleCounters) -> Result<f64> {
        Ok(self.eval_f(x, ctr)? + self.eval_g(x, ctr)?)
    }
}

fn finite_scalar(v: f64, what: &'static str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { what, coordinate: 0 })
    }
}

/// `g ≡ 0` with `m` components; handy for degenerate compositions.
#[derive(Clone, Debug)]
pub struct ZeroSum {
    pub n: usize,
    pub m: usize,
}

impl FiniteSumTerm for ZeroSum {
    fn num_components(&self) -> usize {
        self.m
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn component_value(&self, _k: usize, _x: &Vector) -> f64 {
        0.0
    }
    fn component_gradient(&self, _k: usize, _x: &Vector) -> Vector {
        Vector::zeros(self.n)
    }
    fn lipschitz(&self) -> f64 {
        0.0
    }
    /// No rows at all: a zero sum is trivially a least-squares term.
    fn least_squares_parts(&self) -> Option<LeastSquaresParts<'_>> {
        Some(LeastSquaresParts { rows: &[], targets: &[] })
    }
}

/// Finite-sum oracle as seen by a variance-reduced solver: component
/// gradients with their own accounting.
pub trait CountedSum {
    fn num_components(&self) -> usize;
    fn dim(&self) -> usize;
    fn lipschitz(&self) -> f64;
    fn component_gradient(&self, k: usize, x: &Vector, ctr: &mut OracleCounters) -> Result<Vector>;
    /// Average value over components.
    fn value(&self, x: &Vector, ctr: &mut OracleCounters) -> Result<f64>;
}

/// The components `g_k` of an objective.
#[derive(Clone, Copy, Debug)]
pub struct Components<'a>(pub &'a CompositeObjective);

impl CountedSum for Components<'_> {
    fn num_components(&self) -> usize {
        self.0.m()
    }
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn lipschitz(&self) -> f64 {
        self.0.lg()
    }
    fn component_gradient(&self, k: usize, x: &Vector, ctr: &mut OracleCounters) -> Result<Vector> {
        self.0.grad_component(k, x, ctr)
    }
    fn value(&self, x: &Vector, ctr: &mut OracleCounters) -> Result<f64> {
        self.0.eval_g(x, ctr)
    }
}
