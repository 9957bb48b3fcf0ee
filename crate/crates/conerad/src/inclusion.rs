//! Trajectory simulation for the discrete inclusion `x(m+1) = f_m(x(m))`
//! under switching policies, and Lyapunov-exponent estimation.
//!
//! The start state is pinned to the all-ones vector: the sup-norm unit ball
//! of the cone has 𝟙 as its top element, so `||F_m(1)||` equals the operator
//! norm of the composed product exactly, and trajectory norms double as
//! growth certificates. States are renormalized to sup-norm 1 each step with
//! the log of the norm accumulated separately, so thousands of steps neither
//! overflow nor underflow.

use crate::expr::{sup_norm, EvalError};
use crate::family::Family;
use crate::words::Letter;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Switching policy: who picks the next map.
#[derive(Clone, Debug, PartialEq)]
pub enum Policy {
    /// Cycle through a fixed nonempty word forever.
    PeriodicWord(Vec<Letter>),
    /// Independent uniform choices from a seeded generator; the same seed
    /// reproduces the trajectory bit for bit.
    RandomUniform(u64),
    /// Pick the map maximizing `||f(x̂)||` (lowest index on ties).
    GreedyMaxNorm,
    /// Pick the map minimizing `||f(x̂)||` (lowest index on ties).
    GreedyMinNorm,
}

/// A simulated switching trajectory from 𝟙.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// Normalized states `x̂(m)`, sup-norm 1, for m = 1..=steps (or up to the
    /// absorption step); the zero state appears once if absorbed.
    pub states: Vec<Vec<f64>>,
    /// `L(m) = ln ||F_m(1)||`; `-inf` at and after absorption.
    pub log_norms: Vec<f64>,
    /// Chosen map index per step.
    pub chosen: Vec<usize>,
    /// Per-step growth estimates `exp(L(m)/m)`.
    pub exponents: Vec<f64>,
    /// The state reached exact zero; the trajectory stops there.
    pub absorbed_at_zero: bool,
}

/// Run the inclusion for `steps` steps under `policy`.
pub fn simulate(family: &Family, policy: &Policy, steps: usize) -> Result<Trajectory, EvalError> {
    assert!(steps >= 1, "steps must be positive");
    let n = family.dim();
    let k = family.maps().len();
    if let Policy::PeriodicWord(word) = policy {
        assert!(!word.is_empty(), "periodic word must be nonempty");
        assert!(
            word.iter().all(|&a| (a as usize) < k),
            "periodic word letter out of range"
        );
    }
    let mut rng = match policy {
        Policy::RandomUniform(seed) => Some(ChaCha8Rng::seed_from_u64(*seed)),
        _ => None,
    };

    let mut x = vec![1.0; n];
    let mut log_acc = 0.0f64;
    let mut out = Trajectory {
        states: Vec::with_capacity(steps),
        log_norms: Vec::with_capacity(steps),
        chosen: Vec::with_capacity(steps),
        exponents: Vec::with_capacity(steps),
        absorbed_at_zero: false,
    };

    for step in 1..=steps {
        let a = match policy {
            Policy::PeriodicWord(word) => word[(step - 1) % word.len()] as usize,
            Policy::RandomUniform(_) => rng.as_mut().unwrap().gen_range(0..k),
            Policy::GreedyMaxNorm | Policy::GreedyMinNorm => {
                let mut pick = 0usize;
                let mut pick_norm = sup_norm(&family.map(0).eval(&x)?);
                for b in 1..k {
                    let norm = sup_norm(&family.map(b).eval(&x)?);
                    let better = match policy {
                        Policy::GreedyMaxNorm => norm > pick_norm,
                        _ => norm < pick_norm,
                    };
                    if better {
                        pick = b;
                        pick_norm = norm;
                    }
                }
                pick
            }
        };
        let y = family.map(a).eval(&x)?;
        let norm = sup_norm(&y);
        out.chosen.push(a);
        if norm == 0.0 {
            out.states.push(y);
            out.log_norms.push(f64::NEG_INFINITY);
            out.exponents.push(0.0);
            out.absorbed_at_zero = true;
            break;
        }
        log_acc += norm.ln();
        x = y.iter().map(|v| v / norm).collect();
        out.states.push(x.clone());
        out.log_norms.push(log_acc);
        out.exponents.push((log_acc / step as f64).exp());
    }
    Ok(out)
}

/// The liminf proxy for a finished trajectory: the minimum of `exp(L(m)/m)`
/// over the trailing quarter of the steps, discounting early transients.
/// Zero for trajectories absorbed at the origin.
pub fn exponent_estimate(trajectory: &Trajectory) -> f64 {
    if trajectory.absorbed_at_zero {
        return 0.0;
    }
    let m = trajectory.exponents.len();
    let tail_start = m - (m / 4).max(1).min(m);
    trajectory.exponents[tail_start..]
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Lyapunov-exponent estimate for the policy; returns the estimate and the
/// full per-step series `exp(L(m)/m)`.
pub fn lyapunov_exponent(
    family: &Family,
    policy: &Policy,
    steps: usize,
) -> Result<(f64, Vec<f64>), EvalError> {
    let trajectory = simulate(family, policy, steps)?;
    let estimate = exponent_estimate(&trajectory);
    Ok((estimate, trajectory.exponents))
}
