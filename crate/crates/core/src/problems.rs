//! Instance generators: quadratic `f` with a prescribed spectrum, sparse GLM
//! finite sums, and a direct solver for all-quadratic instances that serves
//! as ground truth.

use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{check_dim, power_iteration, SparseRow, SymmetricMatrix, Vector};
use crate::oracles::{
    CompositeObjective, FiniteSumTerm, LeastSquaresParts, OracleCounters, QuadraticParts,
    SmoothTerm,
};
use crate::reductions::{self, ScalarLoss, SmoothedLoss};

/// Row norms produced by [`gen_sparse_design`] satisfy
/// `s / ROW_NORM_BOUND ≤ ‖a_k‖² ≤ ROW_NORM_BOUND · s`.
pub const ROW_NORM_BOUND: f64 = 2.0;

/// Row-sparse design matrix `A = [a_1, …, a_m]ᵀ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseDesign {
    rows: Vec<SparseRow>,
    n: usize,
    s: usize,
}

impl SparseDesign {
    pub fn new(rows: Vec<SparseRow>, n: usize) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidParameter("design needs at least one row".into()));
        }
        if let Some(r) = rows.iter().find(|r| r.min_dim() > n) {
            return Err(Error::IndexOutOfRange {
                index: r.min_dim() - 1,
                len: n,
            });
        }
        let s = rows.iter().map(SparseRow::nnz).max().unwrap_or(0);
        Ok(SparseDesign { rows, n, s })
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Nonzeros per row (the maximum, for hand-built designs).
    pub fn s(&self) -> usize {
        self.s
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(SparseRow::nnz).sum()
    }

    pub fn max_row_norm_sq(&self) -> f64 {
        self.rows.iter().map(SparseRow::norm_sq).fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> SparseDesign {
        SparseDesign {
            rows: self.rows.iter().map(|r| r.scaled(factor)).collect(),
            n: self.n,
            s: self.s,
        }
    }

    /// Same rows, living in a larger ambient dimension.
    pub fn with_dim(&self, n: usize) -> Result<SparseDesign> {
        SparseDesign::new(self.rows.clone(), n)
    }

    /// `λ_max((1/m) AᵀA)` by power iteration on the implicit operator.
    pub fn mean_gram_lambda_max(&self) -> f64 {
        let m = self.m() as f64;
        let mut scores = vec![0.0; self.m()];
        let est = power_iteration(
            self.n,
            |x, y| {
                for (sc, r) in scores.iter_mut().zip(&self.rows) {
                    *sc = r.dot_unchecked(x);
                }
                y.iter_mut().for_each(|v| *v = 0.0);
                for (sc, r) in scores.iter().zip(&self.rows) {
                    r.scatter_add(*sc / m, y);
                }
            },
            1e-8,
            20_000,
            11,
        );
        est.map(|e| e.value).unwrap_or_else(|_| self.max_row_norm_sq())
    }
}

/// Each row gets `s` distinct columns drawn uniformly and standard normal
/// values, rescaled when needed so that `‖a_k‖² ∈ [s/2, 2s]`.
pub fn gen_sparse_design(m: usize, n: usize, s: usize, seed: u64) -> Result<SparseDesign> {
    if m == 0 || s == 0 || s > n {
        return Err(Error::InvalidParameter(format!(
            "sparse design needs m >= 1 and 1 <= s <= n (m = {m}, n = {n}, s = {s})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = s as f64 / ROW_NORM_BOUND;
    let hi = s as f64 * ROW_NORM_BOUND;
    let mut rows = Vec::with_capacity(m);
    for _ in 0..m {
        let mut idx = sample(&mut rng, n, s).into_vec();
        idx.sort_unstable();
        let mut vals: Vec<f64> = (0..s).map(|_| StandardNormal.sample(&mut rng)).collect();
        let nsq: f64 = vals.iter().map(|v| v * v).sum();
        let target = nsq.clamp(lo, hi);
        if nsq == 0.0 {
            vals.iter_mut().for_each(|v| *v = 1.0);
        } else if target != nsq {
            let mut f = (target / nsq).sqrt();
            // rounding in the rescale can land a hair outside [lo, hi]
            loop {
                let scaled: f64 = vals.iter().map(|v| (v * f) * (v * f)).sum();
                if scaled > hi {
                    f *= 1.0 - f64::EPSILON;
                } else if scaled < lo {
                    f *= 1.0 + f64::EPSILON;
                } else {
                    break;
                }
            }
            vals.iter_mut().for_each(|v| *v *= f);
        }
        rows.push(SparseRow::new(idx, vals)?);
    }
    Ok(SparseDesign { rows, n, s })
}

/// Scalar loss of a GLM component, applied to the score `⟨a_k, x⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GlmLoss {
    /// `½(z − y)²`
    Squared,
    /// `log(1 + exp(−y z))`, `y ∈ {−1, 1}`
    Logistic,
    /// smoothed `|z − y|`
    AbsSmoothed { eta: f64 },
    /// smoothed `max(0, 1 − y z)`, `y ∈ {−1, 1}`
    HingeSmoothed { eta: f64 },
}

impl GlmLoss {
    /// Bound on the second derivative in the score.
    pub fn curvature(&self) -> f64 {
        match *self {
            GlmLoss::Squared => 1.0,
            GlmLoss::Logistic => 0.25,
            GlmLoss::AbsSmoothed { eta } | GlmLoss::HingeSmoothed { eta } => 1.0 / eta,
        }
    }

    fn smoothed(&self) -> Result<Option<SmoothedLoss>> {
        Ok(match *self {
            GlmLoss::AbsSmoothed { eta } => Some(reductions::smooth_loss(ScalarLoss::Abs, eta)?),
            GlmLoss::HingeSmoothed { eta } => {
                Some(reductions::smooth_loss(ScalarLoss::Hinge, eta)?)
            }
            _ => None,
        })
    }

    fn is_classification(&self) -> bool {
        matches!(self, GlmLoss::Logistic | GlmLoss::HingeSmoothed { .. })
    }
}

/// `g_k(x) = loss(⟨a_k, x⟩; y_k)`
#[derive(Clone, Debug)]
pub struct GlmSpec {
    design: SparseDesign,
    targets: Vec<f64>,
    loss: GlmLoss,
    smoothed: Option<SmoothedLoss>,
    mean_lipschitz: OnceLock<f64>,
}

impl GlmSpec {
    pub fn new(design: SparseDesign, targets: Vec<f64>, loss: GlmLoss) -> Result<Self> {
        check_dim(design.m(), targets.len())?;
        let smoothed = loss.smoothed()?;
        if loss.is_classification() && targets.iter().any(|&y| y != 1.0 && y != -1.0) {
            return Err(Error::InvalidParameter(
                "classification losses need targets in {-1, 1}".into(),
            ));
        }
        if let Some(k) = targets.iter().position(|y| !y.is_finite()) {
            return Err(Error::NonFinite {
                what: "targets",
                coordinate: k,
            });
        }
        Ok(GlmSpec {
            design,
            targets,
            loss,
            smoothed,
            mean_lipschitz: OnceLock::new(),
        })
    }

    pub fn design(&self) -> &SparseDesign {
        &self.design
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn loss(&self) -> GlmLoss {
        self.loss
    }

    fn score_value(&self, z: f64, y: f64) -> f64 {
        match self.loss {
            GlmLoss::Squared => 0.5 * (z - y) * (z - y),
            GlmLoss::Logistic => reductions::softplus(-y * z),
            GlmLoss::AbsSmoothed { .. } => self.smoothed.unwrap().value(z - y),
            GlmLoss::HingeSmoothed { .. } => self.smoothed.unwrap().value(y * z),
        }
    }

    fn score_derivative(&self, z: f64, y: f64) -> f64 {
        match self.loss {
            GlmLoss::Squared => z - y,
            GlmLoss::Logistic => -y * reductions::sigmoid(-y * z),
            GlmLoss::AbsSmoothed { .. } => self.smoothed.unwrap().derivative(z - y),
            GlmLoss::HingeSmoothed { .. } => y * self.smoothed.unwrap().derivative(y * z),
        }
    }
}

impl FiniteSumTerm for GlmSpec {
    fn num_components(&self) -> usize {
        self.design.m()
    }

    fn dim(&self) -> usize {
        self.design.n()
    }

    fn component_value(&self, k: usize, x: &Vector) -> f64 {
        let z = self.design.rows[k].dot_unchecked(x.as_slice());
        self.score_value(z, self.targets[k])
    }

    fn component_gradient(&self, k: usize, x: &Vector) -> Vector {
        let row = &self.design.rows[k];
        let d = self.score_derivative(row.dot_unchecked(x.as_slice()), self.targets[k]);
        let mut out = Vector::zeros(self.design.n());
        row.scatter_add(d, out.as_mut_slice());
        out
    }

    fn lipschitz(&self) -> f64 {
        self.loss.curvature() * self.design.max_row_norm_sq()
    }

    fn mean_lipschitz(&self) -> f64 {
        *self
            .mean_lipschitz
            .get_or_init(|| 1.05 * self.loss.curvature() * self.design.mean_gram_lambda_max())
    }

    fn least_squares_parts(&self) -> Option<LeastSquaresParts<'_>> {
        match self.loss {
            GlmLoss::Squared => Some(LeastSquaresParts {
                rows: self.design.rows(),
                targets: &self.targets,
            }),
            _ => None,
        }
    }
}

/// `f(x) = ½⟨x, Cx⟩ − ⟨b, x⟩` with known spectral bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticSpec {
    pub c: SymmetricMatrix,
    /// Optional linear term; the pure quadratic form has none.
    pub b: Option<Vector>,
    pub lambda_max: f64,
    pub lambda_min: f64,
}

impl QuadraticSpec {
    /// Spectral bounds are estimated: `λ_max` by power iteration, `λ_min`
    /// conservatively set to 0.
    pub fn new(c: SymmetricMatrix, b: Option<Vector>) -> Result<Self> {
        if let Some(b) = &b {
            check_dim(c.dim(), b.len())?;
        }
        let est = crate::numerics::lambda_max(&c, 1e-12, 100_000)?;
        Ok(QuadraticSpec {
            c,
            b,
            lambda_max: est.value,
            lambda_min: 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.c.dim()
    }

    pub fn with_linear_term(mut self, b: Vector) -> Result<Self> {
        check_dim(self.dim(), b.len())?;
        self.b = Some(b);
        Ok(self)
    }

    /// Leading-block embedding into dimension `n`; new directions carry zero curvature.
    pub fn embed(&self, n: usize) -> Result<QuadraticSpec> {
        let c = self.c.embed(n)?;
        let b = match &self.b {
            Some(b) => {
                let mut v = b.clone().into_vec();
                v.resize(n, 0.0);
                Some(Vector::from_vec(v))
            }
            None => None,
        };
        Ok(QuadraticSpec {
            c,
            b,
            lambda_max: self.lambda_max,
            lambda_min: if n > self.dim() { 0.0 } else { self.lambda_min },
        })
    }
}

/// Random orthogonal conjugation of a diagonal spectrum: `C = Q D Qᵀ` with
/// `D` spanning `[mu_floor, lambda_max_target]`, both ends attained.
pub fn make_quadratic(
    n: usize,
    lambda_max_target: f64,
    mu_floor: f64,
    seed: u64,
) -> Result<QuadraticSpec> {
    if n == 0 || !(mu_floor >= 0.0) || !(mu_floor <= lambda_max_target) || !lambda_max_target.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "make_quadratic needs n >= 1 and 0 <= mu_floor <= lambda_max_target (got {mu_floor}, {lambda_max_target})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d: Vec<f64> = (0..n)
        .map(|_| rng.random_range(mu_floor..=lambda_max_target))
        .collect();
    d[0] = lambda_max_target;
    if n > 1 {
        d[n - 1] = mu_floor;
    }
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    let c = &q * DMatrix::from_diagonal(&DVector::from_vec(d.clone())) * q.transpose();
    let data: Vec<f64> = (0..n * n).map(|k| c[(k / n, k % n)]).collect();
    let c = SymmetricMatrix::symmetrized(n, data)?.assume_psd();
    let lambda_min = d.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(QuadraticSpec {
        c,
        b: None,
        lambda_max: lambda_max_target,
        lambda_min,
    })
}

/// `½⟨x, Cx⟩ − ⟨b, x⟩ + (ridge/2)‖x‖²` as an oracle.
#[derive(Clone, Debug)]
pub struct QuadraticTerm {
    spec: QuadraticSpec,
    ridge: f64,
}

impl QuadraticTerm {
    pub fn new(spec: QuadraticSpec, ridge: f64) -> Self {
        QuadraticTerm { spec, ridge }
    }

    pub fn spec(&self) -> &QuadraticSpec {
        &self.spec
    }
}

impl SmoothTerm for QuadraticTerm {
    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn value(&self, x: &Vector) -> f64 {
        let mut cx = vec![0.0; self.dim()];
        self.spec.c.apply_into(x.as_slice(), &mut cx);
        let mut v = 0.5 * Vector::from_vec(cx).dot(x) + 0.5 * self.ridge * x.norm_sq();
        if let Some(b) = &self.spec.b {
            v -= b.dot(x);
        }
        v
    }

    fn gradient(&self, x: &Vector) -> Vector {
        let mut g = Vector::zeros(self.dim());
        self.spec.c.apply_into(x.as_slice(), g.as_mut_slice());
        if self.ridge != 0.0 {
            g.axpy(self.ridge, x);
        }
        if let Some(b) = &self.spec.b {
            g.axpy(-1.0, b);
        }
        g
    }

    fn lipschitz(&self) -> f64 {
        self.spec.lambda_max + self.ridge
    }

    fn quadratic_parts(&self) -> Option<QuadraticParts<'_>> {
        Some(QuadraticParts {
            c: &self.spec.c,
            b: self.spec.b.as_ref(),
            ridge: self.ridge,
        })
    }
}

/// `F = f + (1/m) Σ g_k` with the ridge `mu_reg` folded into `f`.
pub fn assemble_problem(
    q: QuadraticSpec,
    glm: Arc<GlmSpec>,
    mu_reg: f64,
) -> Result<CompositeObjective> {
    check_dim(q.dim(), glm.dim())?;
    if !(mu_reg >= 0.0) {
        return Err(Error::InvalidParameter(format!("mu_reg must be >= 0, got {mu_reg}")));
    }
    let mu = q.lambda_min + mu_reg;
    let f = Arc::new(QuadraticTerm::new(q, mu_reg));
    CompositeObjective::new(f, glm, mu)
}

/// Minimizer of an all-quadratic objective by Cholesky factorization of the
/// normal equations `(C + ρI + (1/m)AᵀA) x = b + (1/m)Aᵀy`, polished with one
/// step of iterative refinement.
pub fn exact_minimizer(obj: &CompositeObjective) -> Result<Vector> {
    let qp = obj
        .smooth()
        .quadratic_parts()
        .ok_or_else(|| Error::NotQuadratic("smooth term is not a quadratic form".into()))?;
    let ls = obj
        .finite_sum()
        .least_squares_parts()
        .ok_or_else(|| Error::NotQuadratic("finite sum is not a squared loss".into()))?;
    let n = obj.dim();
    let m = ls.rows.len() as f64;

    let mut h = DMatrix::<f64>::from_fn(n, n, |i, j| qp.c.get(i, j));
    for i in 0..n {
        h[(i, i)] += qp.ridge;
    }
    let mut rhs = match qp.b {
        Some(b) => DVector::from_column_slice(b.as_slice()),
        None => DVector::zeros(n),
    };
    for (row, &y) in ls.rows.iter().zip(ls.targets) {
        for (&i, &vi) in row.indices().iter().zip(row.values()) {
            rhs[i] += vi * y / m;
            for (&j, &vj) in row.indices().iter().zip(row.values()) {
                h[(i, j)] += vi * vj / m;
            }
        }
    }
    let chol = h.clone().cholesky().ok_or(Error::Singular)?;
    let mut x = chol.solve(&rhs);
    let resid = &rhs - &h * &x;
    x += chol.solve(&resid);

    let x = Vector::from_vec(x.iter().cloned().collect());
    x.check_finite("exact minimizer")?;
    let mut ctr = OracleCounters::new();
    let grad_norm = obj.grad_objective(&x, &mut ctr)?.norm();
    let scale = 1.0 + obj.grad_objective(&Vector::zeros(n), &mut ctr)?.norm();
    if grad_norm > 1e-6 * scale {
        return Err(Error::Singular);
    }
    Ok(x)
}

/// Loss family as written in a problem JSON.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Squared,
    Logistic,
    AbsSmoothed,
    HingeSmoothed,
}

/// Reproducible problem description; everything is derived from `seed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub seed: u64,
    pub loss: LossKind,
    /// Smoothing parameter; derived from `eps` when absent.
    #[serde(default)]
    pub eta: Option<f64>,
    pub lambda_max_target: f64,
    #[serde(default)]
    pub mu_floor: f64,
    #[serde(default)]
    pub mu_reg: f64,
    pub eps: f64,
    /// Bound on `‖x*‖`; adds a ridge `eps/R²` on top of `mu_reg`.
    #[serde(default)]
    pub radius: Option<f64>,
    /// Rescale the design so that `L_g` equals this value.
    #[serde(default)]
    pub lg_target: Option<f64>,
    /// Rescale the design so that `L_g = lg_ratio · m · L_f`.
    #[serde(default)]
    pub lg_ratio: Option<f64>,
    #[serde(default)]
    pub linear_term: bool,
    /// Keep the last coordinate out of both `C` and the design, so `F` has
    /// curvature exactly `mu_reg` along it.
    #[serde(default)]
    pub flat_direction: bool,
    #[serde(default = "default_noise")]
    pub noise: f64,
}

fn default_noise() -> f64 {
    0.1
}

/// A built instance together with the pieces it came from.
#[derive(Clone, Debug)]
pub struct Instance {
    pub objective: CompositeObjective,
    pub quadratic: QuadraticSpec,
    pub glm: Arc<GlmSpec>,
    pub mu_reg: f64,
}

impl Instance {
    pub fn is_all_quadratic(&self) -> bool {
        self.glm.loss() == GlmLoss::Squared
    }
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        let inner_n = if self.flat_direction { self.n.saturating_sub(1) } else { self.n };
        if self.n == 0 || self.m == 0 {
            return Err(Error::config("problem.n", "n and m must be at least 1"));
        }
        if self.s == 0 || self.s > inner_n {
            return Err(Error::config(
                "problem.s",
                format!("need 1 <= s <= {inner_n}, got {}", self.s),
            ));
        }
        if !(self.eps > 0.0) {
            return Err(Error::config("problem.eps", "must be > 0"));
        }
        if !(self.lambda_max_target >= self.mu_floor) || !(self.mu_floor >= 0.0) {
            return Err(Error::config(
                "problem.lambda_max_target",
                "need 0 <= mu_floor <= lambda_max_target",
            ));
        }
        if !(self.mu_reg >= 0.0) {
            return Err(Error::config("problem.mu_reg", "must be >= 0"));
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0) {
                return Err(Error::config("problem.eta", "must be > 0"));
            }
        }
        if let Some(r) = self.radius {
            if !(r > 0.0) {
                return Err(Error::config("problem.radius", "must be > 0"));
            }
        }
        if self.lg_target.is_some() && self.lg_ratio.is_some() {
            return Err(Error::config("problem.lg_ratio", "conflicts with lg_target"));
        }
        for (name, v) in [("problem.lg_target", self.lg_target), ("problem.lg_ratio", self.lg_ratio)] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return Err(Error::config(name, "must be > 0"));
                }
            }
        }
        if !(self.noise >= 0.0) {
            return Err(Error::config("problem.noise", "must be >= 0"));
        }
        Ok(())
    }

    /// Ridge actually applied: `mu_reg` plus `eps/R²` when a radius is given.
    pub fn total_ridge(&self) -> f64 {
        self.mu_reg + self.radius.map_or(0.0, |r| self.eps / (r * r))
    }

    pub fn build(&self) -> Result<Instance> {
        self.validate()?;
        let inner_n = if self.flat_direction { self.n - 1 } else { self.n };
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x9e37_79b9_7f4a_7c15);

        let design = gen_sparse_design(self.m, inner_n, self.s, self.seed)?.with_dim(self.n)?;
        let mut quad = make_quadratic(
            inner_n,
            self.lambda_max_target,
            self.mu_floor,
            self.seed.wrapping_add(1),
        )?
        .embed(self.n)?;
        if self.linear_term {
            let b: Vec<f64> = (0..self.n).map(|_| StandardNormal.sample(&mut rng)).collect();
            quad = quad.with_linear_term(Vector::from_vec(b))?;
        }

        let loss = match self.loss {
            LossKind::Squared => GlmLoss::Squared,
            LossKind::Logistic => GlmLoss::Logistic,
            LossKind::AbsSmoothed => GlmLoss::AbsSmoothed {
                eta: match self.eta {
                    Some(e) => e,
                    None => reductions::smoothing_accuracy(self.eps, ScalarLoss::Abs)?,
                },
            },
            LossKind::HingeSmoothed => GlmLoss::HingeSmoothed {
                eta: match self.eta {
                    Some(e) => e,
                    None => reductions::smoothing_accuracy(self.eps, ScalarLoss::Hinge)?,
                },
            },
        };

        let ridge = self.total_ridge();
        let lf = quad.lambda_max + ridge;
        let lg_goal = self
            .lg_target
            .or(self.lg_ratio.map(|r| r * self.m as f64 * lf));
        let design = match lg_goal {
            Some(goal) => {
                let current = loss.curvature() * design.max_row_norm_sq();
                design.scaled((goal / current).sqrt())
            }
            None => design,
        };

        let scale = 1.0 / (inner_n as f64).sqrt();
        let x_true: Vec<f64> = (0..self.n)
            .map(|i| {
                let v: f64 = StandardNormal.sample(&mut rng);
                if i < inner_n {
                    v * scale
                } else {
                    0.0
                }
            })
            .collect();
        let targets: Vec<f64> = design
            .rows()
            .iter()
            .map(|r| {
                let e: f64 = StandardNormal.sample(&mut rng);
                let z = r.dot_unchecked(&x_true) + self.noise * e;
                match loss {
                    GlmLoss::Logistic | GlmLoss::HingeSmoothed { .. } => {
                        if z >= 0.0 {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                    _ => z,
                }
            })
            .collect();

        let glm = Arc::new(GlmSpec::new(design, targets, loss)?);
        let objective = assemble_problem(quad.clone(), glm.clone(), ridge)?;
        Ok(Instance {
            objective,
            quadratic: quad,
            glm,
            mu_reg: ridge,
        })
    }
}
