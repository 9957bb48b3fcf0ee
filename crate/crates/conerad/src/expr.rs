//! Expression trees for order-preserving, degree-one homogeneous self-maps of
//! the nonnegative cone.
//!
//! A map coordinate is built from nonnegative-weighted variables combined with
//! `+`, `max`, `min`, and weighted geometric means. Every expression in this
//! grammar is monotone (componentwise order-preserving) and positively
//! homogeneous of degree one, so a vector of them is a valid cone map.
//!
//! Evaluation is plain `f64` arithmetic. On nonnegative inputs there is no
//! cancellation anywhere in the grammar, which makes zero propagation exact:
//! whether a coordinate of `f(x)` is zero depends only on which coordinates of
//! `x` are zero. [`MapDef::support_transition`] exploits this and computes the
//! induced action on supports symbolically, with no rounding involved.

use std::fmt;
use thiserror::Error;

/// Set of coordinate indices with strictly positive value, stored as a bitmask.
///
/// Indices are 1-based to match the `x1 .. xn` naming in family files.
/// Dimensions up to 64 are representable.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SupportSet(u64);

impl SupportSet {
    /// Largest dimension a `SupportSet` can describe.
    pub const MAX_DIM: usize = 64;

    pub fn empty() -> Self {
        SupportSet(0)
    }

    /// Full support `{1, .., n}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= Self::MAX_DIM, "dimension {n} exceeds {}", Self::MAX_DIM);
        if n == 64 {
            SupportSet(u64::MAX)
        } else {
            SupportSet((1u64 << n) - 1)
        }
    }

    /// Singleton `{i}` (1-based).
    pub fn singleton(i: usize) -> Self {
        assert!(i >= 1 && i <= Self::MAX_DIM, "index {i} out of range");
        SupportSet(1u64 << (i - 1))
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut s = SupportSet(0);
        for i in indices {
            s.insert(i);
        }
        s
    }

    /// Support of a vector: indices of entries that are strictly positive.
    pub fn of_vector(x: &[f64]) -> Self {
        let mut s = SupportSet(0);
        for (k, &v) in x.iter().enumerate() {
            if v > 0.0 {
                s.insert(k + 1);
            }
        }
        s
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i >= 1 && i <= Self::MAX_DIM, "index {i} out of range");
        self.0 |= 1u64 << (i - 1);
    }

    pub fn contains(&self, i: usize) -> bool {
        i >= 1 && i <= Self::MAX_DIM && self.0 & (1u64 << (i - 1)) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset_of(&self, other: &SupportSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(&self, other: &SupportSet) -> SupportSet {
        SupportSet(self.0 | other.0)
    }

    /// 1-based indices in increasing order.
    pub fn indices(&self) -> Vec<usize> {
        (1..=Self::MAX_DIM).filter(|&i| self.contains(i)).collect()
    }

    /// Raw bitmask; bit `i-1` stands for index `i`.
    pub fn bits(&self) -> u64 {
        self.0
    }

    pub fn from_bits(bits: u64) -> Self {
        SupportSet(bits)
    }

    /// Characteristic vector of the set in dimension `n`.
    pub fn characteristic_vector(&self, n: usize) -> Vec<f64> {
        (1..=n).map(|i| if self.contains(i) { 1.0 } else { 0.0 }).collect()
    }
}

impl fmt::Display for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for i in self.indices() {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
            first = false;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// One coordinate of a cone map.
///
/// Invariants, maintained by the constructors below and by the family parser:
/// atoms carry a strictly positive coefficient (a zero coefficient collapses
/// to [`Expr::Zero`]); `Sum`, `Max`, and `Min` hold at least two children and
/// never nest a node of their own kind; `Geo` weights are strictly positive
/// and sum to exactly 1.0.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    /// The constant zero coordinate.
    Zero,
    /// `coeff * x_var`, coefficient strictly positive, variable index 1-based.
    Atom(f64, usize),
    /// Pointwise sum of the children.
    Sum(Vec<Expr>),
    /// Pointwise maximum of the children.
    Max(Vec<Expr>),
    /// Pointwise minimum of the children.
    Min(Vec<Expr>),
    /// Weighted geometric mean: product of `base^weight`.
    Geo(Vec<(f64, Expr)>),
}

/// Errors from expression construction.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("coefficient must be finite and nonnegative, got {0}")]
    BadCoefficient(f64),
    #[error("variable index must be at least 1")]
    VariableIndexZero,
    #[error("geometric-mean weight must be finite and positive, got {0}")]
    BadGeoWeight(f64),
    #[error("geometric-mean weights sum to {0}, expected 1 within 1e-12")]
    GeoWeightSum(f64),
}

/// Errors from map evaluation.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("evaluation overflowed the floating-point range")]
    Overflow,
    #[error("input has dimension {got}, map expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Tolerance on the raw sum of geometric-mean weights before renormalization.
pub const GEO_WEIGHT_TOL: f64 = 1e-12;

impl Expr {
    /// `coeff * x_var`. A zero coefficient yields [`Expr::Zero`].
    pub fn atom(coeff: f64, var: usize) -> Result<Expr, ExprError> {
        if !coeff.is_finite() || coeff < 0.0 {
            return Err(ExprError::BadCoefficient(coeff));
        }
        if var == 0 {
            return Err(ExprError::VariableIndexZero);
        }
        if coeff == 0.0 {
            return Ok(Expr::Zero);
        }
        Ok(Expr::Atom(coeff, var))
    }

    /// Pointwise sum. Zero terms are dropped and nested sums are flattened;
    /// fewer than two surviving terms collapse to the term itself or to zero.
    pub fn sum(terms: Vec<Expr>) -> Expr {
        let mut flat = Vec::with_capacity(terms.len());
        for t in terms {
            match t {
                Expr::Zero => {}
                Expr::Sum(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        Expr::collapse(flat, Expr::Sum)
    }

    /// Pointwise maximum. On the cone `max(e, 0) = e`, so zero branches are
    /// dropped; nested maxima are flattened.
    pub fn max(terms: Vec<Expr>) -> Expr {
        let mut flat = Vec::with_capacity(terms.len());
        for t in terms {
            match t {
                Expr::Zero => {}
                Expr::Max(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        Expr::collapse(flat, Expr::Max)
    }

    /// Pointwise minimum. A zero branch forces the whole minimum to zero;
    /// nested minima are flattened.
    pub fn min(terms: Vec<Expr>) -> Expr {
        let mut flat = Vec::with_capacity(terms.len());
        for t in terms {
            match t {
                Expr::Zero => return Expr::Zero,
                Expr::Min(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        Expr::collapse(flat, Expr::Min)
    }

    fn collapse(mut flat: Vec<Expr>, wrap: fn(Vec<Expr>) -> Expr) -> Expr {
        match flat.len() {
            0 => Expr::Zero,
            1 => flat.pop().unwrap(),
            _ => wrap(flat),
        }
    }

    /// Weighted geometric mean of `(weight, base)` pairs.
    ///
    /// Weights must be finite and strictly positive and sum to 1 within
    /// [`GEO_WEIGHT_TOL`]; the stored weights are renormalized so they re-sum
    /// to exactly 1.0 (the last weight is set to `1 - sum(rest)`, which makes
    /// the left-to-right float sum land on 1.0 and keeps formatting followed
    /// by parsing a fixpoint). A zero base annihilates the whole mean; a
    /// single surviving pair collapses to its base.
    pub fn geo(parts: Vec<(f64, Expr)>) -> Result<Expr, ExprError> {
        for (w, _) in &parts {
            if !w.is_finite() || *w <= 0.0 {
                return Err(ExprError::BadGeoWeight(*w));
            }
        }
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > GEO_WEIGHT_TOL {
            return Err(ExprError::GeoWeightSum(total));
        }
        if parts.iter().any(|(_, e)| matches!(e, Expr::Zero)) {
            return Ok(Expr::Zero);
        }
        if parts.len() == 1 {
            return Ok(parts.into_iter().next().unwrap().1);
        }
        let mut parts = parts;
        if total != 1.0 {
            let k = parts.len();
            let mut partial = 0.0;
            for (w, _) in parts.iter_mut().take(k - 1) {
                *w /= total;
                partial += *w;
            }
            parts[k - 1].0 = 1.0 - partial;
            if parts[k - 1].0 <= 0.0 {
                return Err(ExprError::BadGeoWeight(parts[k - 1].0));
            }
        }
        Ok(Expr::Geo(parts))
    }

    /// The expression for `c * self`, `c >= 0`, with the factor distributed
    /// into the tree (into atom coefficients, across sum/max/min branches,
    /// and into every geometric-mean base, where it reassembles to `c` because
    /// the weights sum to 1).
    pub fn scale(&self, c: f64) -> Result<Expr, ExprError> {
        if !c.is_finite() || c < 0.0 {
            return Err(ExprError::BadCoefficient(c));
        }
        if c == 0.0 {
            return Ok(Expr::Zero);
        }
        Ok(match self {
            Expr::Zero => Expr::Zero,
            Expr::Atom(a, j) => {
                let coeff = c * a;
                if !coeff.is_finite() {
                    return Err(ExprError::BadCoefficient(coeff));
                }
                Expr::Atom(coeff, *j)
            }
            Expr::Sum(ts) => {
                Expr::Sum(ts.iter().map(|t| t.scale(c)).collect::<Result<_, _>>()?)
            }
            Expr::Max(ts) => {
                Expr::Max(ts.iter().map(|t| t.scale(c)).collect::<Result<_, _>>()?)
            }
            Expr::Min(ts) => {
                Expr::Min(ts.iter().map(|t| t.scale(c)).collect::<Result<_, _>>()?)
            }
            Expr::Geo(ps) => Expr::Geo(
                ps.iter()
                    .map(|(w, e)| Ok((*w, e.scale(c)?)))
                    .collect::<Result<_, _>>()?,
            ),
        })
    }

    /// Largest variable index mentioned, 0 for constant zero.
    pub fn max_var(&self) -> usize {
        match self {
            Expr::Zero => 0,
            Expr::Atom(_, j) => *j,
            Expr::Sum(ts) | Expr::Max(ts) | Expr::Min(ts) => {
                ts.iter().map(Expr::max_var).max().unwrap_or(0)
            }
            Expr::Geo(ps) => ps.iter().map(|(_, e)| e.max_var()).max().unwrap_or(0),
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Zero => 0.0,
            Expr::Atom(c, j) => c * x[*j - 1],
            Expr::Sum(ts) => ts.iter().map(|t| t.eval(x)).sum(),
            Expr::Max(ts) => ts.iter().map(|t| t.eval(x)).fold(0.0, f64::max),
            Expr::Min(ts) => ts.iter().map(|t| t.eval(x)).fold(f64::INFINITY, f64::min),
            Expr::Geo(ps) => {
                // Zero bases annihilate the product exactly; checking them
                // first also avoids 0 * inf when another base overflows.
                let mut vals = Vec::with_capacity(ps.len());
                for (w, e) in ps {
                    let v = e.eval(x);
                    if v == 0.0 {
                        return 0.0;
                    }
                    vals.push((*w, v));
                }
                vals.into_iter().map(|(w, v)| v.powf(w)).product()
            }
        }
    }

    fn positive_at(&self, s: SupportSet) -> bool {
        match self {
            Expr::Zero => false,
            Expr::Atom(c, j) => *c > 0.0 && s.contains(*j),
            Expr::Sum(ts) | Expr::Max(ts) => ts.iter().any(|t| t.positive_at(s)),
            Expr::Min(ts) => ts.iter().all(|t| t.positive_at(s)),
            Expr::Geo(ps) => ps.iter().all(|(_, e)| e.positive_at(s)),
        }
    }

    fn walk_nodes(&self, min_seen: &mut bool, geo_seen: &mut bool) {
        match self {
            Expr::Zero | Expr::Atom(..) => {}
            Expr::Sum(ts) | Expr::Max(ts) => {
                ts.iter().for_each(|t| t.walk_nodes(min_seen, geo_seen))
            }
            Expr::Min(ts) => {
                *min_seen = true;
                ts.iter().for_each(|t| t.walk_nodes(min_seen, geo_seen));
            }
            Expr::Geo(ps) => {
                *geo_seen = true;
                ps.iter().for_each(|(_, e)| e.walk_nodes(min_seen, geo_seen));
            }
        }
    }
}

/// Structural facts about a map relevant to which theorems apply to it.
///
/// `subadditive_certified` is a syntactic certificate: sums, maxima, and
/// nonnegative atoms are subadditive and the property is preserved under
/// composition, so a map whose tree contains neither `min` nor `geo` is
/// guaranteed subadditive. The converse fails (some min/geo maps happen to be
/// subadditive), so a `false` here means "not certified", not "not
/// subadditive".
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classification {
    pub subadditive_certified: bool,
    pub contains_min: bool,
    pub contains_geo: bool,
}

/// A named self-map of the nonnegative cone, one expression per coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct MapDef {
    pub name: String,
    pub coords: Vec<Expr>,
}

impl MapDef {
    pub fn new(name: impl Into<String>, coords: Vec<Expr>) -> Self {
        MapDef { name: name.into(), coords }
    }

    /// Dimension of domain and codomain.
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Evaluate at `x >= 0`. Fails with [`EvalError::Overflow`] when any
    /// coordinate leaves the finite float range and with
    /// [`EvalError::DimensionMismatch`] on a wrong-length input. Variable
    /// indices are trusted to be within the dimension (the parser guarantees
    /// this); out-of-range indices on a hand-built map panic.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        if x.len() != self.coords.len() {
            return Err(EvalError::DimensionMismatch {
                expected: self.coords.len(),
                got: x.len(),
            });
        }
        let mut out = Vec::with_capacity(self.coords.len());
        for e in &self.coords {
            let v = e.eval(x);
            if !v.is_finite() {
                return Err(EvalError::Overflow);
            }
            out.push(v);
        }
        Ok(out)
    }

    /// Exact induced action on supports: `support_transition(S)` is the
    /// support of `f(x)` for every `x >= 0` with support `S`. Computed
    /// symbolically; no floating point is involved.
    pub fn support_transition(&self, s: SupportSet) -> SupportSet {
        let mut out = SupportSet::empty();
        for (k, e) in self.coords.iter().enumerate() {
            if e.positive_at(s) {
                out.insert(k + 1);
            }
        }
        out
    }

    pub fn classify(&self) -> Classification {
        let mut min_seen = false;
        let mut geo_seen = false;
        for e in &self.coords {
            e.walk_nodes(&mut min_seen, &mut geo_seen);
        }
        Classification {
            subadditive_certified: !min_seen && !geo_seen,
            contains_min: min_seen,
            contains_geo: geo_seen,
        }
    }

    /// The map `x -> c * f(x)`, `c >= 0`.
    pub fn scaled(&self, c: f64) -> Result<MapDef, ExprError> {
        Ok(MapDef {
            name: self.name.clone(),
            coords: self
                .coords
                .iter()
                .map(|e| e.scale(c))
                .collect::<Result<_, _>>()?,
        })
    }
}

/// Sup norm of a vector.
pub fn sup_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |a, &v| a.max(v.abs()))
}
