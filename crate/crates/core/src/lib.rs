//! Accelerated gradient sliding for `F(x) = f(x) + (1/m) Σ_k g_k(x)`.
//!
//! The library separates the two oracle costs: `∇f` is called
//! `Õ(√(L_f/μ))` times and the component gradients `∇g_k` are called
//! `Õ(√(m L_g/μ))` times. Every oracle call is tallied in an
//! [`oracles::OracleCounters`] passed explicitly through each solver.

pub mod error;
pub mod harness;
pub mod numerics;
pub mod oracles;
pub mod problems;
pub mod reductions;
pub mod sliding;
pub mod solvers;

pub use error::{Error, Result};
