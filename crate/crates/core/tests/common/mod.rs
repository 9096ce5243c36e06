#![allow(dead_code)]

use std::path::PathBuf;

use optslide::numerics::Vector;
use optslide::oracles::{CompositeObjective, OracleCounters};
use optslide::problems::{Instance, LossKind, ProblemSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn config_path(name: &str) -> PathBuf {
    repo_root().join("configs").join(name)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vector {
    Vector::from_vec((0..n).map(|_| rng.random_range(-scale..scale)).collect())
}

pub fn spec(n: usize, m: usize, s: usize, loss: LossKind, seed: u64) -> ProblemSpec {
    ProblemSpec {
        n,
        m,
        s,
        seed,
        loss,
        eta: None,
        lambda_max_target: 1.0,
        mu_floor: 0.0,
        mu_reg: 1e-2,
        eps: 1e-2,
        radius: None,
        lg_target: None,
        lg_ratio: None,
        linear_term: true,
        flat_direction: false,
        noise: 0.1,
    }
}

/// The all-quadratic regime instance used throughout the solver tests:
/// `n = 40, m = 32, L_f ≈ 1, L_g = 64, μ = 1e-3`.
pub fn regime_quadratic(seed: u64) -> Instance {
    let mut p = spec(40, 32, 8, LossKind::Squared, seed);
    p.mu_reg = 1e-3;
    p.lambda_max_target = 1.0 - 1e-3;
    p.lg_target = Some(64.0);
    p.eps = 1e-6;
    p.build().unwrap()
}

/// One instance per loss family, for oracle checks.
pub fn all_families(seed: u64) -> Vec<(&'static str, Instance)> {
    let mut out = Vec::new();
    for (name, loss) in [
        ("squared", LossKind::Squared),
        ("logistic", LossKind::Logistic),
        ("abs_smoothed", LossKind::AbsSmoothed),
        ("hinge_smoothed", LossKind::HingeSmoothed),
    ] {
        let mut p = spec(12, 20, 4, loss, seed);
        p.eps = 0.1;
        out.push((name, p.build().unwrap()));
    }
    out
}

pub fn central_difference<F: Fn(&Vector) -> f64>(f: F, x: &Vector, h: f64) -> Vector {
    let n = x.len();
    let mut g = vec![0.0; n];
    for (i, gi) in g.iter_mut().enumerate() {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp.as_mut_slice()[i] += h;
        xm.as_mut_slice()[i] -= h;
        *gi = (f(&xp) - f(&xm)) / (2.0 * h);
    }
    Vector::from_vec(g)
}

/// `‖a − b‖ / max(‖b‖, 1)`
pub fn rel_err(a: &Vector, b: &Vector) -> f64 {
    a.dist(b) / b.norm().max(1.0)
}

pub fn value(obj: &CompositeObjective, x: &Vector) -> f64 {
    obj.eval_objective(x, &mut OracleCounters::new()).unwrap()
}

pub fn gradient(obj: &CompositeObjective, x: &Vector) -> Vector {
    obj.grad_objective(x, &mut OracleCounters::new()).unwrap()
}

/// Minimum of `f` over a `k × k` grid on `[lo, hi]²`.
pub fn grid_min_2d<F: Fn(f64, f64) -> f64>(f: F, lo: f64, hi: f64, k: usize) -> (f64, f64, f64) {
    let step = (hi - lo) / (k - 1) as f64;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..k {
        let a = lo + step * i as f64;
        for j in 0..k {
            let b = lo + step * j as f64;
            let v = f(a, b);
            if v < best.0 {
                best = (v, a, b);
            }
        }
    }
    best
}
