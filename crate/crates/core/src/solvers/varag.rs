use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::{check_dim, Vector};
use crate::oracles::{CountedSum, OracleCounters};

use super::{prox_into, SolverReport, StopKind, StoppingRule};

/// The composite part `h(x) = ⟨c, x⟩ + (L_f/2)‖x − x̃‖² + (L/2)‖x − x^k‖²`
/// of the linearized subproblem.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticAnchors {
    pub linear: Vector,
    pub lf: f64,
    pub center: Vector,
    pub l: f64,
    pub prox_center: Vector,
}

impl QuadraticAnchors {
    /// Strong convexity of `h`.
    pub fn sigma(&self) -> f64 {
        self.lf + self.l
    }

    pub fn value(&self, x: &Vector) -> f64 {
        self.linear.dot(x) + 0.5 * self.lf * x.dist(&self.center).powi(2) + 0.5 * self.l * x.dist(&self.prox_center).powi(2)
    }

    pub fn gradient(&self, x: &Vector) -> Vector {
        let mut g = self.linear.clone();
        g.axpy(self.lf, &x.sub(&self.center));
        g.axpy(self.l, &x.sub(&self.prox_center));
        g
    }

    fn check(&self, n: usize) -> Result<()> {
        check_dim(n, self.linear.len())?;
        check_dim(n, self.center.len())?;
        check_dim(n, self.prox_center.len())?;
        if !(self.lf >= 0.0) || !(self.l >= 0.0) || !(self.sigma() > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "anchors need L_f, L >= 0 with L_f + L > 0 (got {}, {})",
                self.lf, self.l
            )));
        }
        Ok(())
    }
}

/// Result of [`varag_solve`].
#[derive(Clone, Debug)]
pub struct VrOutcome {
    pub report: SolverReport,
    /// `(1/m) Σ ∇g_k(x_out)` when the last epoch boundary computed it.
    pub full_grad: Option<Vector>,
    /// Single-component steps taken.
    pub inner_steps: u64,
}

/// Inner-loop length of epoch `s` (1-based): doubles until it reaches the
/// largest power of two not exceeding `m`, then stays there.
pub fn epoch_length(s: usize, m: usize) -> usize {
    let s0 = (usize::BITS - 1 - m.max(1).leading_zeros()) as usize + 1;
    1usize << (s.clamp(1, s0) - 1)
}

/// Component-gradient calls made by `epochs` full epochs under
/// `FixedIters(epochs)`.
pub fn varag_predicted_grad_calls(epochs: usize, m: usize) -> u64 {
    (1..=epochs).map(|s| (m + epoch_length(s, m)) as u64).sum()
}

/// Accelerated variance-reduced method for
/// `min (1/m) Σ g_k(x) + h(x)` with `h` given by `anchors`.
///
/// Each epoch takes a full gradient at the snapshot (`m` calls, cached per
/// component) and then `epoch_length(s, m)` single-component steps, each
/// finished by the closed-form prox of `h`. Iteration counts are epochs.
/// `GradNorm` is checked at epoch boundaries on `‖∇g + ∇h‖` at the snapshot.
pub fn varag_solve(
    sum: &dyn CountedSum,
    anchors: &QuadraticAnchors,
    x0: &Vector,
    stop: &StoppingRule,
    seed: u64,
    ctr: &mut OracleCounters,
) -> Result<VrOutcome> {
    varag_solve_scheduled(sum, anchors, x0, stop, seed, 1, ctr)
}

/// [`varag_solve`] with the epoch schedule entered at epoch `first_epoch`
/// instead of 1; a warm-started solve can skip the short early epochs.
pub fn varag_solve_scheduled(
    sum: &dyn CountedSum,
    anchors: &QuadraticAnchors,
    x0: &Vector,
    stop: &StoppingRule,
    seed: u64,
    first_epoch: usize,
    ctr: &mut OracleCounters,
) -> Result<VrOutcome> {
    stop.validate()?;
    let n = sum.dim();
    let m = sum.num_components();
    check_dim(n, x0.len())?;
    anchors.check(n)?;
    if m == 0 {
        return Err(Error::InvalidParameter("finite sum has no components".into()));
    }
    let start = *ctr;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let sigma = anchors.sigma();
    let l_comp = match sum.lipschitz() {
        l if l > 0.0 => l,
        _ => sigma,
    };
    let alpha = ((m as f64) * sigma / (3.0 * l_comp)).sqrt().min(0.5);
    let p = 0.5;
    let gamma = 1.0 / (3.0 * l_comp * alpha);
    let r = 1.0 / (1.0 + gamma * sigma);

    let lf = anchors.lf;
    let l = anchors.l;
    let c = anchors.linear.as_slice();
    let xt = anchors.center.as_slice();
    let xk = anchors.prox_center.as_slice();

    let mut snapshot = x0.clone();
    let mut z = x0.clone();
    let mut xbar = x0.clone();
    let mut cache: Vec<Vector> = Vec::with_capacity(m);
    let mut full = Vector::zeros(n);
    let mut full_known;
    let mut trace = Vec::new();
    let mut final_value = None;
    let mut converged = false;
    let mut inner_steps = 0u64;
    let mut epochs = 0usize;
    let cap = stop.cap();

    let mut x_ = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut z_new = vec![0.0; n];
    let mut acc = vec![0.0; n];

    loop {
        let final_fixed = stop.is_fixed() && epochs >= cap;
        if final_fixed {
            full_known = false;
            break;
        }
        cache.clear();
        full = Vector::zeros(n);
        for k in 0..m {
            let gk = sum.component_gradient(k, &snapshot, ctr)?;
            full.axpy(1.0, &gk);
            cache.push(gk);
        }
        full.scale(1.0 / m as f64);
        full_known = true;

        match stop.kind {
            StopKind::GradNorm { tol } => {
                let mut g = anchors.gradient(&snapshot);
                g.axpy(1.0, &full);
                if g.norm() <= tol {
                    converged = true;
                    break;
                }
            }
            StopKind::FuncGap { tol, f_star } => {
                let val = sum.value(&snapshot, ctr)? + anchors.value(&snapshot);
                trace.push((epochs, val));
                final_value = Some(val);
                if val - f_star <= tol {
                    converged = true;
                    break;
                }
            }
            StopKind::FixedIters { .. } => {}
        }
        if epochs >= cap {
            break;
        }

        epochs += 1;
        let t_len = epoch_length(epochs + first_epoch.max(1) - 1, m);
        let mut wsum = 0.0;
        acc.iter_mut().for_each(|a| *a = 0.0);
        for t in 0..t_len {
            let w = r.powi((t_len - 1 - t) as i32);
            let xs = snapshot.as_slice();
            for i in 0..n {
                x_[i] = (1.0 - alpha - p) * xbar[i] + alpha * z[i] + p * xs[i];
            }
            let k = rng.random_range(0..m);
            let gk = sum.component_gradient(k, &Vector::from_vec(x_.clone()), ctr)?;
            let ck = cache[k].as_slice();
            let fs = full.as_slice();
            for i in 0..n {
                v[i] = gk[i] - ck[i] + fs[i] + c[i];
            }
            prox_into(&v, gamma, z.as_slice(), lf, xt, l, xk, &mut z_new);
            for i in 0..n {
                xbar[i] = x_[i] + alpha * (z_new[i] - z[i]);
                acc[i] += w * xbar[i];
            }
            z.as_mut_slice().copy_from_slice(&z_new);
            wsum += w;
            inner_steps += 1;
        }
        let new_snap = Vector::from_vec(acc.iter().map(|a| a / wsum).collect());
        if let Some(i) = new_snap.first_non_finite() {
            return Err(Error::NonFinite {
                what: "variance-reduced iterate",
                coordinate: i,
            });
        }
        snapshot = new_snap;
    }

    Ok(VrOutcome {
        report: SolverReport {
            x_out: snapshot,
            iterations: epochs,
            counters: ctr.since(&start),
            trace,
            converged: converged || stop.is_fixed(),
            final_value,
            levels: None,
            diagnostics: Vec::new(),
        },
        full_grad: full_known.then_some(full),
        inner_steps,
    })
}
