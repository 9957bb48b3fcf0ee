//! Two-sided brackets on the cone spectral radius of a single map.
//!
//! For an order-preserving, degree-one homogeneous `f` on the nonnegative
//! cone, the radius is `r = lim ||f^m(1)||^(1/m)`; monotonicity plus
//! homogeneity make `m -> ||f^m(1)||` submultiplicative, so every norm root
//! is an upper bound. Two pointwise certificates sharpen this:
//!
//! - lower: if `f(x) >= a*x` for some nonzero `x >= 0` (equivalently, `a` is
//!   the smallest ratio `f(x)_i / x_i` over the support of `x`), then
//!   `f^m(x) >= a^m x` and `r >= a`;
//! - upper: if `x` is strictly positive and `f(x) <= b*x` with `b` the
//!   largest ratio, then any `y` with `||y|| <= 1` satisfies `y <= x / min_i
//!   x_i`, hence `r <= b`.
//!
//! The bracket engine runs normalized power iteration from the all-ones
//! vector, harvesting both certificates along the orbit plus the norm-root
//! upper bound. Orbits attracted to a boundary face can leave the lower
//! certificate stuck below the true radius (the face may miss the part of the
//! cone where growth happens), so after a stall the engine restarts short
//! certificate-only orbits from each basis vector and from the faces visited
//! by the support orbit of the full index set.

use crate::expr::{sup_norm, EvalError, MapDef, SupportSet};

/// A Collatz-Wielandt lower certificate: `f(vector) >= alpha * vector`
/// componentwise, hence the radius is at least `alpha`. Verifiable by one
/// evaluation of the map.
#[derive(Clone, Debug, PartialEq)]
pub struct CwWitness {
    pub vector: Vec<f64>,
    pub alpha: f64,
}

/// Result of bracketing a radius from below and above.
#[derive(Clone, Debug, PartialEq)]
pub struct RadiusBracket {
    /// Best certified lower bound (0 when no certificate improved on the
    /// trivial one).
    pub lower: f64,
    /// Best certified upper bound.
    pub upper: f64,
    /// Witness vector achieving `lower`.
    pub lower_witness: CwWitness,
    /// Iteration index at which `upper` was last improved.
    pub upper_power: usize,
    /// Total map applications spent, including restart orbits.
    pub iterations_used: usize,
    /// Whether `upper - lower <= tol * max(1, upper)` was reached.
    pub converged: bool,
}

/// `||f|| = ||f(1)||` in the sup norm: monotonicity makes the all-ones vector
/// the maximizer over the cone's unit ball, so this is the exact operator
/// norm, not an estimate.
pub fn map_norm(map: &MapDef) -> Result<f64, EvalError> {
    let ones = vec![1.0; map.dim()];
    Ok(sup_norm(&map.eval(&ones)?))
}

/// Smallest ratio `f(x)_i / x_i` over the support of `x`; the radius of `f`
/// is at least this value. Returns 0 for the zero vector (no certificate).
pub fn collatz_wielandt_lower(map: &MapDef, x: &[f64]) -> Result<f64, EvalError> {
    let y = map.eval(x)?;
    Ok(cw_ratio(x, &y))
}

pub(crate) fn cw_ratio(x: &[f64], y: &[f64]) -> f64 {
    let mut a = f64::INFINITY;
    for (&xi, &yi) in x.iter().zip(y) {
        if xi > 0.0 {
            a = a.min(yi / xi);
        }
    }
    if a.is_finite() {
        a
    } else {
        0.0
    }
}

/// Bracket the cone spectral radius of `map`. Iteration stops as soon as
/// `upper - lower <= tol * upper` or after `max_iter` applications of the
/// main orbit (restart orbits may add a bounded number more, all counted in
/// `iterations_used`). The purely relative test keeps every quantity in the
/// iteration equivariant under scaling the map by a power of two, so scaled
/// families produce bit-exactly scaled brackets.
pub fn cone_spectral_radius(
    map: &MapDef,
    tol: f64,
    max_iter: usize,
) -> Result<RadiusBracket, EvalError> {
    power_bracket(
        map.dim(),
        |x| map.eval(x),
        |s| map.support_transition(s),
        tol,
        max_iter,
        50,
        true,
    )
}

/// Generic bracket engine over an `apply` closure (used for single maps,
/// fixed words of a family, and face-seeded orbits).
pub(crate) fn power_bracket<A, S>(
    n: usize,
    mut apply: A,
    sigma: S,
    tol: f64,
    max_iter: usize,
    stall: usize,
    enable_restarts: bool,
) -> Result<RadiusBracket, EvalError>
where
    A: FnMut(&[f64]) -> Result<Vec<f64>, EvalError>,
    S: Fn(SupportSet) -> SupportSet,
{
    let mut x = vec![1.0f64; n];
    let mut best_lower = 0.0f64;
    let mut witness_vec = x.clone();
    let mut best_upper = f64::INFINITY;
    let mut upper_power = 0usize;
    // Running product of orbit norms as mantissa * 2^exp. Exponent arithmetic
    // is exact, so when the product is a power of two (the case exactness
    // tests and power-of-two rescaling rely on) its roots come out bit-exact;
    // a log-space accumulator would drift by an ulp per step and could push
    // the upper bound below the true radius.
    let mut acc_mant = 1.0f64;
    let mut acc_exp = 0i64;
    let mut iters = 0usize;
    let mut since_lower_gain = 0usize;
    let mut restarted = false;
    let mut converged = false;

    for m in 1..=max_iter {
        let y = apply(&x)?;
        iters += 1;
        if y.iter().all(|&v| v == 0.0) {
            // f^m(1) = 0 forces f^m = 0 on the whole cone (any x is dominated
            // by ||x||*1), so the radius is exactly 0. Zero propagation in
            // the grammar is exact, making this a certificate, not a reading
            // of rounded values.
            return Ok(RadiusBracket {
                lower: 0.0,
                upper: 0.0,
                lower_witness: CwWitness { vector: x, alpha: 0.0 },
                upper_power: m,
                iterations_used: iters,
                converged: true,
            });
        }

        let alpha = cw_ratio(&x, &y);
        if alpha > best_lower {
            best_lower = alpha;
            witness_vec = x.clone();
            since_lower_gain = 0;
        } else {
            since_lower_gain += 1;
        }

        if x.iter().all(|&v| v > 0.0) {
            let beta = x.iter().zip(&y).map(|(&xi, &yi)| yi / xi).fold(0.0, f64::max);
            if beta < best_upper {
                best_upper = beta;
                upper_power = m;
            }
        }

        let norm = sup_norm(&y);
        let (nm, ne) = frexp(norm);
        acc_mant *= nm;
        acc_exp += ne as i64;
        let (am, ae) = frexp(acc_mant);
        acc_mant = am;
        acc_exp += ae as i64;
        let root = scaled_root(acc_mant, acc_exp, m);
        if root < best_upper {
            best_upper = root;
            upper_power = m;
        }
        x = y.iter().map(|&v| v / norm).collect();

        if best_upper - best_lower <= tol * best_upper {
            converged = true;
            break;
        }

        if enable_restarts && !restarted && since_lower_gain >= stall {
            restarted = true;
            let (extra, found) = boundary_restarts(n, &mut apply, &sigma, best_lower)?;
            iters += extra;
            if let Some((alpha, vector)) = found {
                best_lower = alpha;
                witness_vec = vector;
                since_lower_gain = 0;
            }
            if best_upper - best_lower <= tol * best_upper {
                converged = true;
                break;
            }
        }
    }

    Ok(RadiusBracket {
        lower: best_lower,
        upper: best_upper,
        lower_witness: CwWitness { vector: witness_vec, alpha: best_lower },
        upper_power,
        iterations_used: iters,
        converged,
    })
}

/// Short certificate-only orbits from each basis vector and from the faces
/// the support orbit of the full set passes through. Returns the number of
/// extra applications and the best improvement over `current_lower`, if any.
fn boundary_restarts<A, S>(
    n: usize,
    apply: &mut A,
    sigma: &S,
    current_lower: f64,
) -> Result<(usize, Option<(f64, Vec<f64>)>), EvalError>
where
    A: FnMut(&[f64]) -> Result<Vec<f64>, EvalError>,
    S: Fn(SupportSet) -> SupportSet,
{
    let mut starts: Vec<SupportSet> = (1..=n).map(SupportSet::singleton).collect();
    let mut seen: Vec<u64> = starts.iter().map(|s| s.bits()).collect();
    let mut s = SupportSet::full(n);
    for _ in 0..(4 * n + 16) {
        if !s.is_empty() && !seen.contains(&s.bits()) {
            seen.push(s.bits());
            starts.push(s);
        }
        let next = sigma(s);
        if next == s {
            break;
        }
        s = next;
    }

    let mut extra = 0usize;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut floor = current_lower;
    for start in starts {
        let mut x = start.characteristic_vector(n);
        let mut stalled = 0usize;
        for _ in 0..50 {
            let y = apply(&x)?;
            extra += 1;
            if y.iter().all(|&v| v == 0.0) {
                break;
            }
            let alpha = cw_ratio(&x, &y);
            if alpha > floor {
                floor = alpha;
                best = Some((alpha, x.clone()));
                stalled = 0;
            } else {
                stalled += 1;
                if stalled >= 25 {
                    break;
                }
            }
            let norm = sup_norm(&y);
            x = y.iter().map(|&v| v / norm).collect();
        }
    }
    Ok((extra, best))
}

/// `x^(1/m)` computed so that scaling `x` by `2^(k*m)` scales the result by
/// exactly `2^k`: the exponent of `x` is split as `q*m + r` and only the
/// `2^r`-adjusted mantissa goes through `powf`. This keeps norm roots exactly
/// equivariant under power-of-two rescaling of a family, and makes the root
/// bit-exact whenever `x` is a power of two whose exponent `m` divides.
pub fn nth_root(x: f64, m: usize) -> f64 {
    assert!(m >= 1);
    if m == 1 || x == 0.0 || !x.is_finite() || x < 0.0 {
        return if x < 0.0 { f64::NAN } else { x };
    }
    let (mant, e) = frexp(x);
    scaled_root(mant, e as i64, m)
}

/// `(mant * 2^e)^(1/m)` via exponent splitting; see [`nth_root`].
pub(crate) fn scaled_root(mant: f64, e: i64, m: usize) -> f64 {
    if m == 1 {
        return mant * exp2(e as i32);
    }
    let q = e.div_euclid(m as i64) as i32;
    let r = e.rem_euclid(m as i64);
    let inv = 1.0 / m as f64;
    // One fused powf when 2^r is representable (always true for m <= 512);
    // this is what makes roots of powers of two exact, since the remainder
    // base collapses to 1.0 exactly when m divides the exponent.
    let core = if r <= 512 {
        (mant * exp2(r as i32)).powf(inv)
    } else {
        mant.powf(inv) * (r as f64 * inv).exp2()
    };
    core * exp2(q)
}

/// Split positive finite `x` as `mant * 2^e` with `mant` in `[0.5, 1)`.
pub(crate) fn frexp(x: f64) -> (f64, i32) {
    let bits = x.to_bits();
    let exp_field = ((bits >> 52) & 0x7ff) as i32;
    if exp_field == 0 {
        // Subnormal: renormalize first.
        let (m, e) = frexp(x * exp2(64));
        (m, e - 64)
    } else {
        let mant = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1022u64 << 52));
        (mant, exp_field - 1022)
    }
}

/// Exact `2^e` over the whole double range, flushing to 0 / infinity outside.
pub(crate) fn exp2(e: i32) -> f64 {
    if (-1022..=1023).contains(&e) {
        f64::from_bits(((e + 1023) as u64) << 52)
    } else if e < -1074 {
        0.0
    } else if e < -1022 {
        f64::from_bits(1u64 << (e + 1074))
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;

    fn x(i: usize) -> Expr {
        Expr::atom(1.0, i).unwrap()
    }

    #[test]
    fn permutation_cycle_is_exact_in_one_step() {
        // f(x) = (x2, x1): the all-ones vector is a fixed point, both
        // certificates fire immediately, and the bracket is exactly [1, 1].
        let f = MapDef::new("swap", vec![x(2), x(1)]);
        let b = cone_spectral_radius(&f, 1e-6, 100).unwrap();
        assert_eq!((b.lower, b.upper), (1.0, 1.0));
        assert!(b.converged);
        assert_eq!(b.iterations_used, 1);
    }

    #[test]
    fn nilpotent_map_is_exactly_zero() {
        let f = MapDef::new("shift", vec![x(2), Expr::Zero]);
        let b = cone_spectral_radius(&f, 1e-6, 100).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 0.0));
        assert!(b.converged);
        assert_eq!(b.iterations_used, 2);
    }

    #[test]
    fn geometric_mean_contraction_brackets_half() {
        // f(x) = (sqrt(x1*x2), x2/2) has radius 1/2; the orbit stays interior
        // so the ratio certificates close the bracket fast.
        let f = MapDef::new(
            "t",
            vec![
                Expr::geo(vec![(0.5, x(1)), (0.5, x(2))]).unwrap(),
                Expr::atom(0.5, 2).unwrap(),
            ],
        );
        let b = cone_spectral_radius(&f, 1e-6, 10_000).unwrap();
        assert!(b.converged, "bracket {:?}", (b.lower, b.upper));
        assert!(b.lower <= 0.5 && 0.5 <= b.upper);
        assert!(b.upper - b.lower <= 1e-6);
        assert!(b.iterations_used < 100);
    }

    #[test]
    fn boundary_restart_recovers_dominant_direction() {
        // f(x) = (x1, 2*x2): the orbit normalizes toward e1 where the minimum
        // ratio is 1, but the radius is 2. The basis-vector restart finds the
        // certificate at e2 and closes the bracket exactly.
        let f = MapDef::new("diag", vec![x(1), Expr::atom(2.0, 2).unwrap()]);
        let b = cone_spectral_radius(&f, 1e-6, 10_000).unwrap();
        assert!(b.converged);
        assert_eq!(b.lower, 2.0);
        assert_eq!(b.upper, 2.0);
        assert_eq!(b.lower_witness.alpha, 2.0);
        // The witness must actually certify: f(w) >= 2*w on its support.
        let w = &b.lower_witness.vector;
        let fw = f.eval(w).unwrap();
        for i in 0..2 {
            assert!(fw[i] >= 2.0 * w[i]);
        }
    }

    #[test]
    fn stuck_face_still_gives_sound_bracket() {
        // g(x) = (0, x1 + x2): every power has norm 2, so the radius is 1.
        // The norm-root upper converges like 2^(1/m); within a small budget
        // the bracket is sound but not tight, and converged reports false.
        let g = MapDef::new("g", vec![Expr::Zero, Expr::sum(vec![x(1), x(2)])]);
        let b = cone_spectral_radius(&g, 1e-6, 200).unwrap();
        assert_eq!(b.lower, 1.0);
        assert!(b.upper >= 1.0 && b.upper < 1.01);
        assert!(!b.converged);
    }

    #[test]
    fn map_norm_is_value_at_ones() {
        let f = MapDef::new(
            "f",
            vec![Expr::sum(vec![x(1), Expr::min(vec![x(1), x(2)])]), x(2)],
        );
        assert_eq!(map_norm(&f).unwrap(), 2.0);
    }

    #[test]
    fn collatz_wielandt_takes_minimum_over_support() {
        let f = MapDef::new(
            "f",
            vec![Expr::sum(vec![x(1), Expr::min(vec![x(1), x(2)])]), x(2)],
        );
        // f(2,1) = (3,1): ratios 1.5 and 1.0, so the certificate is 1.0.
        assert_eq!(collatz_wielandt_lower(&f, &[2.0, 1.0]).unwrap(), 1.0);
        // Support restriction: at (1,0) only the first ratio counts.
        assert_eq!(collatz_wielandt_lower(&f, &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(collatz_wielandt_lower(&f, &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn nth_root_basics() {
        assert_eq!(nth_root(8.0, 3), 2.0);
        assert_eq!(nth_root(1024.0, 10), 2.0);
        assert_eq!(nth_root(0.0, 7), 0.0);
        assert_eq!(nth_root(5.5, 1), 5.5);
        assert_eq!(nth_root(f64::powi(2.0, 30), 2), f64::powi(2.0, 15));
        assert!((nth_root(377.0, 12) - 377f64.powf(1.0 / 12.0)).abs() < 1e-12);
    }

    #[test]
    fn nth_root_commutes_with_power_of_two_scaling() {
        let xs = [0.3, 1.0, 1.7, 9.25, 377.0, 1e-5, 1e12];
        for m in 1..=12usize {
            for &x in &xs {
                let base = nth_root(x, m);
                for k in [-3i32, -1, 1, 2, 5] {
                    let scaled = x * exp2(k * m as i32);
                    assert_eq!(
                        nth_root(scaled, m),
                        base * exp2(k),
                        "x={x} m={m} k={k}"
                    );
                }
            }
        }
    }

    #[test]
    fn frexp_round_trips() {
        for &x in &[0.5, 1.0, 1.5, 2.0, 3.7e10, 1e-300, 4.9e-324] {
            let (m, e) = frexp(x);
            assert!((0.5..1.0).contains(&m), "mantissa {m} for {x}");
            assert_eq!(m * exp2(e), x);
        }
    }
}
