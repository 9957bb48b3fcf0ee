//! Truncated extremal and Barabanov norms.
//!
//! For a family scaled so its joint radius is (approximately) 1, the
//! extremal norm of `x` is the supremum of `||f_w(|x|)||` over all words,
//! identity included. Truncating to words of length ≤ m gives a monotone
//! under-approximation that is exact about everything it claims: levels are
//! nondecreasing in m by word-set containment, and the defining inequality
//! `||g(x)||_{*,m} <= ||x||_{*,m+1}` holds with no tolerance at all, because
//! every left-hand evaluation path is literally one of the right-hand ones.
//!
//! The Barabanov variant re-normalizes through an outer max over words of a
//! fixed length applied first, with the inner truncated norm evaluated at
//! each leaf. Its defining property — some map attains the norm exactly —
//! is reported as an achieving map plus the residual of the max-over-maps
//! identity, never asserted blindly.

use crate::expr::{sup_norm, EvalError};
use crate::family::Family;
use crate::joint::{frontier_scan, Budgeter, FrontierItem, Goal, JointError};
use crate::words::Letter;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Truncated norm evaluation with per-level diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct NormEvaluation {
    /// The truncated norm: the last level value.
    pub value: f64,
    /// `(m, value at truncation m)`, level 0 = plain sup-norm; nondecreasing.
    pub level_values: Vec<(usize, f64)>,
    /// Word achieving `value` (empty = identity); shortest, then
    /// lexicographically least among achievers.
    pub achieving_word: Vec<Letter>,
    /// Levels still growing by ≥ 1.5× over the trailing half — the signature
    /// of an unscaled or non-subadditive family where the sup is infinite.
    pub diverging: bool,
    /// For Barabanov queries: the map whose image attains the largest norm
    /// proxy (ties to the lowest index).
    pub achieving_map: Option<usize>,
    /// For Barabanov queries: `|max_g proxy(g(|x|)) - value|`, the defect in
    /// the defining identity at this truncation.
    pub residual: Option<f64>,
}

const DIVERGENCE_FACTOR: f64 = 1.5;

fn diverging(levels: &[(usize, f64)]) -> bool {
    let last = levels[levels.len() - 1].1;
    let half = levels[(levels.len() - 1) / 2].1;
    last > 0.0 && last >= DIVERGENCE_FACTOR * half
}

struct CoreEval {
    value: f64,
    levels: Vec<(usize, f64)>,
    achieving_word: Vec<Letter>,
}

/// Max of `||f_w(start)||` over words of length ≤ m (identity included),
/// with cumulative per-level values. `start` must be nonnegative.
fn extremal_core(
    family: &Family,
    start: Vec<f64>,
    m: usize,
    budget: &mut Budgeter,
) -> Result<CoreEval, EvalError> {
    let mut value = sup_norm(&start);
    let mut achieving_word: Vec<Letter> = Vec::new();
    let mut levels = vec![(0usize, value)];
    let records = frontier_scan(family, start, m, Goal::Max, budget, |_, _, _| {})?;
    for rec in &records {
        if rec.extreme > value {
            value = rec.extreme;
            achieving_word = rec.word.clone();
        }
        levels.push((rec.len, value));
    }
    Ok(CoreEval { value, levels, achieving_word })
}

/// Truncated extremal norm of `x`: `max ||f_w(|x|)||` over words of length
/// ≤ m, identity included. The family is taken as already normalized — run
/// it through [`crate::family::Family::scaled`] with `1/r̂` first if needed.
pub fn extremal_norm_eval(
    family: &Family,
    x: &[f64],
    m: usize,
    budget: usize,
) -> Result<NormEvaluation, JointError<NormEvaluation>> {
    let n = family.dim();
    if x.len() != n {
        return Err(JointError::Eval(EvalError::DimensionMismatch { expected: n, got: x.len() }));
    }
    let ax: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    let mut budgeter = Budgeter::new(budget);
    let core = extremal_core(family, ax, m, &mut budgeter).map_err(JointError::Eval)?;
    let evaluation = NormEvaluation {
        value: core.value,
        diverging: diverging(&core.levels),
        level_values: core.levels,
        achieving_word: core.achieving_word,
        achieving_map: None,
        residual: None,
    };
    if budgeter.exhausted() {
        Err(JointError::Budget { partial: Box::new(evaluation) })
    } else {
        Ok(evaluation)
    }
}

/// Outer pass of the Barabanov evaluation: max over words of length exactly
/// `m_outer` (dominance-pruned; sound because the inner truncated norm is
/// monotone on the cone) of the inner truncated norm of the image.
/// Level `j` reports the running max using outer words of length ≤ j.
fn barabanov_core(
    family: &Family,
    start: Vec<f64>,
    m_outer: usize,
    m_inner: usize,
    budget: &mut Budgeter,
) -> Result<CoreEval, EvalError> {
    let mut inner_err: Option<EvalError> = None;
    let mut value = extremal_core(family, start.clone(), m_inner, budget)?.value;
    let mut achieving_word: Vec<Letter> = Vec::new();
    let mut levels = vec![(0usize, value)];

    frontier_scan(family, start, m_outer, Goal::Max, budget, |len, kept: &[FrontierItem], budget| {
        if inner_err.is_some() {
            return;
        }
        let mut level_best: Option<(f64, &Vec<Letter>)> = None;
        for item in kept {
            if budget.exhausted() {
                break;
            }
            match extremal_core(family, item.vector.clone(), m_inner, budget) {
                Ok(core) => {
                    let better = match &level_best {
                        None => true,
                        Some((b, w)) => core.value > *b || (core.value == *b && item.word < **w),
                    };
                    if better {
                        level_best = Some((core.value, &item.word));
                    }
                }
                Err(e) => {
                    inner_err = Some(e);
                    return;
                }
            }
        }
        if let Some((v, w)) = level_best {
            if v > value {
                value = v;
                achieving_word = w.clone();
            }
        }
        levels.push((len, value));
    })?;
    if let Some(e) = inner_err {
        return Err(e);
    }
    Ok(CoreEval { value, levels, achieving_word })
}

/// Truncated Barabanov norm of `x`, with the defining identity
/// `max_g ||g(x)||_** = r̂ ||x||_**` (at `r̂ = 1`) checked empirically: the
/// achieving map maximizes the proxy over single-map images, and `residual`
/// is the identity's defect at this truncation.
pub fn barabanov_norm_eval(
    family: &Family,
    x: &[f64],
    m_outer: usize,
    m_inner: usize,
    budget: usize,
) -> Result<NormEvaluation, JointError<NormEvaluation>> {
    let n = family.dim();
    if x.len() != n {
        return Err(JointError::Eval(EvalError::DimensionMismatch { expected: n, got: x.len() }));
    }
    let ax: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    let mut budgeter = Budgeter::new(budget);

    let run = (|budgeter: &mut Budgeter| -> Result<NormEvaluation, EvalError> {
        let core = barabanov_core(family, ax.clone(), m_outer, m_inner, budgeter)?;
        let mut best_map: Option<(usize, f64)> = None;
        for (a, map) in family.maps().iter().enumerate() {
            if budgeter.exhausted() {
                break;
            }
            if !budgeter.charge(1) {
                break;
            }
            let image = map.eval(&ax)?;
            let proxy = barabanov_core(family, image, m_outer, m_inner, budgeter)?.value;
            if best_map.map_or(true, |(_, b)| proxy > b) {
                best_map = Some((a, proxy));
            }
        }
        Ok(NormEvaluation {
            value: core.value,
            diverging: diverging(&core.levels),
            level_values: core.levels,
            achieving_word: core.achieving_word,
            achieving_map: best_map.map(|(a, _)| a),
            residual: best_map.map(|(_, p)| (p - core.value).abs()),
        })
    })(&mut budgeter);

    let evaluation = run.map_err(JointError::Eval)?;
    if budgeter.exhausted() {
        Err(JointError::Budget { partial: Box::new(evaluation) })
    } else {
        Ok(evaluation)
    }
}

/// Check the extremal inequality `||g(x)||_{*,m} <= ||x||_{*,m+1}` on seeded
/// nonnegative samples, over every map. Returns the largest difference
/// (left minus right); nonpositive by word-set containment — every path on
/// the left is evaluated, bit for bit, inside the right-hand truncation.
pub fn verify_extremal(
    family: &Family,
    m: usize,
    sample_count: usize,
    seed: u64,
) -> Result<f64, EvalError> {
    assert!(sample_count >= 1, "sample_count must be positive");
    let n = family.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    let mut budgeter = Budgeter::new(usize::MAX);
    for _ in 0..sample_count {
        let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let rhs = extremal_core(family, x.clone(), m + 1, &mut budgeter)?.value;
        for map in family.maps() {
            let image = map.eval(&x)?;
            let lhs = extremal_core(family, image, m, &mut budgeter)?.value;
            worst = worst.max(lhs - rhs);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::parse_family;

    fn fam(src: &str) -> Family {
        parse_family(src).unwrap()
    }

    const SWAP: &str = "dim 2\nmap p = [ x2 ; x1 ]";
    const EXAMPLE_MIN: &str = "\
dim 2
map f = [ x1 + min(x1, x2) ; x2 ]
map g = [ 0 ; x1 + x2 ]
map h = [ x1 + x2 ; 0 ]
";

    #[test]
    fn swap_orbit_norm() {
        let e = extremal_norm_eval(&fam(SWAP), &[1.0, -2.0], 4, 1_000_000).unwrap();
        assert_eq!(e.value, 2.0);
        assert_eq!(e.level_values, vec![(0, 2.0), (1, 2.0), (2, 2.0), (3, 2.0), (4, 2.0)]);
        assert!(e.achieving_word.is_empty());
        assert!(!e.diverging);
    }

    #[test]
    fn level_zero_is_plain_sup_norm() {
        let e = extremal_norm_eval(&fam(EXAMPLE_MIN), &[0.25, -3.5], 0, 1_000_000).unwrap();
        assert_eq!(e.value, 3.5);
        assert_eq!(e.level_values, vec![(0, 3.5)]);
    }

    #[test]
    fn max_plus_fixed_point_levels_are_constant() {
        let e = extremal_norm_eval(
            &fam("dim 2\nmap f = [ max(x1, x2) ; x2 ]"),
            &[2.0, 1.0],
            6,
            1_000_000,
        )
        .unwrap();
        assert_eq!(e.value, 2.0);
        assert!(e.level_values.iter().all(|&(_, v)| v == 2.0));
        assert!(!e.diverging);
    }

    #[test]
    fn linear_growth_is_flagged_diverging() {
        let e = extremal_norm_eval(&fam(EXAMPLE_MIN), &[1.0, 1.0], 8, 1_000_000).unwrap();
        assert_eq!(e.value, 9.0);
        for (m, v) in &e.level_values {
            assert_eq!(*v, (*m + 1) as f64);
        }
        assert!(e.diverging);
        assert_eq!(e.achieving_word, vec![0; 8]);
    }

    #[test]
    fn levels_are_nondecreasing() {
        let e = extremal_norm_eval(&fam(EXAMPLE_MIN), &[0.3, 0.7], 10, 1_000_000).unwrap();
        for pair in e.level_values.windows(2) {
            assert!(pair[0].1 <= pair[1].1);
        }
    }

    #[test]
    fn homogeneity_is_exact_on_integer_fixtures() {
        let family = fam("dim 2\nmap f = [ max(x1, x2) ; x1 + x2 ]");
        let base = extremal_norm_eval(&family, &[1.0, -2.0], 5, 1_000_000).unwrap();
        let scaled = extremal_norm_eval(&family, &[-3.0, 6.0], 5, 1_000_000).unwrap();
        assert_eq!(scaled.value, 3.0 * base.value);
    }

    #[test]
    fn zero_vector_evaluates_to_zero_and_not_diverging() {
        let e = extremal_norm_eval(&fam(EXAMPLE_MIN), &[0.0, 0.0], 5, 1_000_000).unwrap();
        assert_eq!(e.value, 0.0);
        assert!(!e.diverging);
    }

    #[test]
    fn barabanov_of_swap() {
        let e = barabanov_norm_eval(&fam(SWAP), &[1.0, 2.0], 4, 4, 1_000_000).unwrap();
        assert_eq!(e.value, 2.0);
        assert_eq!(e.achieving_map, Some(0));
        assert_eq!(e.residual, Some(0.0));
    }

    #[test]
    fn barabanov_of_zero_vector() {
        let e = barabanov_norm_eval(&fam(EXAMPLE_MIN), &[0.0, 0.0], 3, 3, 1_000_000).unwrap();
        assert_eq!(e.value, 0.0);
        assert!(!e.diverging);
    }

    #[test]
    fn extremal_inequality_never_violated() {
        for src in [SWAP, EXAMPLE_MIN, "dim 2\nmap a = [ x1 + x2 ; x2 ]\nmap b = [ x1 ; x1 + x2 ]"]
        {
            let worst = verify_extremal(&fam(src), 5, 20, 7).unwrap();
            assert!(worst <= 0.0, "violation {worst} on {src:?}");
        }
    }

    #[test]
    fn triangle_inequality_on_linear_pair() {
        let family = fam("dim 2\nmap a = [ x1 + x2 ; x2 ]\nmap b = [ x1 ; x1 + x2 ]");
        let x = [0.3, 1.1];
        let y = [0.9, 0.2];
        let s = [x[0] + y[0], x[1] + y[1]];
        let nx = extremal_norm_eval(&family, &x, 6, 1_000_000).unwrap().value;
        let ny = extremal_norm_eval(&family, &y, 6, 1_000_000).unwrap().value;
        let ns = extremal_norm_eval(&family, &s, 6, 1_000_000).unwrap().value;
        assert!(ns <= nx + ny + 1e-9);
    }

    #[test]
    fn budget_stop_carries_partial_levels() {
        match extremal_norm_eval(&fam(EXAMPLE_MIN), &[1.0, 1.0], 12, 12).unwrap_err() {
            JointError::Budget { partial } => {
                assert!(partial.level_values.len() < 13);
                assert!(!partial.level_values.is_empty());
            }
            JointError::Eval(e) => panic!("unexpected eval error {e}"),
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        match extremal_norm_eval(&fam(SWAP), &[1.0], 3, 1_000_000).unwrap_err() {
            JointError::Eval(EvalError::DimensionMismatch { expected, got }) => {
                assert_eq!((expected, got), (2, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
