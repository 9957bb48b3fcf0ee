//! Exact structural analysis over the finite lattice of supports.
//!
//! Order-preserving maps on the nonnegative cone act on supports through the
//! symbolic transition `σ_f` (which coordinates of `f(x)` are positive, given
//! which coordinates of `x` are). Because nonnegative arithmetic has no
//! cancellation, `σ` is exact, monotone (`S ⊆ T ⇒ σ_f(S) ⊆ σ_f(T)`), and
//! composes along words. Faces, irreducibility, primitivity, and the part
//! preorder are all finite questions about this transition system, answered
//! here without any numerical tolerance.

use crate::expr::SupportSet;
use crate::family::Family;
use crate::joint::{frontier_scan, Budgeter, Goal, JointError, NormRootEntry};
use crate::spectral::nth_root;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StructureError {
    #[error("dimension {dim} exceeds the limit {max} for this analysis")]
    DimensionTooLarge { dim: usize, max: usize },
}

/// Subset-enumeration analyses walk all 2^n supports.
const SCAN_DIM_MAX: usize = 24;
/// The preorder materializes per-support reachability; 2^16 states is the cap.
const PREORDER_DIM_MAX: usize = 16;

fn require_dim(n: usize, max: usize) -> Result<(), StructureError> {
    if n > max {
        Err(StructureError::DimensionTooLarge { dim: n, max })
    } else {
        Ok(())
    }
}

/// Union of the per-map symbolic transitions applied to `s`... not a union:
/// one map at a time. Step `s` through map `a`.
fn sigma(family: &Family, a: usize, s: SupportSet) -> SupportSet {
    family.map(a).support_transition(s)
}

/// All proper nonempty index sets `J` whose face `{x : x_i = 0 for i ∉ J}`
/// is carried into itself by every map, i.e. `σ_f(J) ⊆ J` for all `f`.
/// Sorted by size, then lexicographically on the index lists.
pub fn invariant_faces(family: &Family) -> Result<Vec<SupportSet>, StructureError> {
    let n = family.dim();
    require_dim(n, SCAN_DIM_MAX)?;
    let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut faces = Vec::new();
    for bits in 1..full {
        let j = SupportSet::from_bits(bits);
        let invariant = (0..family.maps().len()).all(|a| sigma(family, a, j).is_subset_of(&j));
        if invariant {
            faces.push(j);
        }
    }
    faces.sort_by_key(|s| (s.len(), s.indices()));
    Ok(faces)
}

/// A family is irreducible when no proper nonempty face is invariant.
/// Returns the verdict and, when reducible, the smallest invariant face.
pub fn is_irreducible(family: &Family) -> Result<(bool, Option<SupportSet>), StructureError> {
    let faces = invariant_faces(family)?;
    Ok(match faces.first() {
        None => (true, None),
        Some(&j) => (false, Some(j)),
    })
}

/// Directed dependency graph test: edge `(i, j)` present iff some map has
/// `f(e_j)_i > 0` (coordinate `i` is fed by coordinate `j` alone).
#[derive(Clone, Debug, PartialEq)]
pub struct GraphTest {
    pub strongly_connected: bool,
    /// Sorted, deduplicated `(i, j)` pairs, 1-based.
    pub edges: Vec<(usize, usize)>,
}

/// Strong connectivity of the single-coordinate dependency graph. This is
/// sufficient for irreducibility for every family (σ is monotone, so an
/// invariant face would be a closed vertex set), and equivalent to it exactly
/// when every map is subadditive-certified — maps with min or geometric
/// nodes can be irreducible without any single coordinate feeding another.
pub fn graph_irreducibility(family: &Family) -> GraphTest {
    let n = family.dim();
    let mut edges = BTreeSet::new();
    for j in 1..=n {
        for a in 0..family.maps().len() {
            let image = sigma(family, a, SupportSet::singleton(j));
            for i in image.indices() {
                edges.insert((i, j));
            }
        }
    }

    // Kosaraju check from vertex 1: strongly connected iff every vertex is
    // reachable along edges and along reversed edges.
    let mut fwd = vec![Vec::new(); n + 1];
    let mut rev = vec![Vec::new(); n + 1];
    for &(i, j) in &edges {
        fwd[i].push(j);
        rev[j].push(i);
    }
    let reach_all = |adj: &[Vec<usize>]| {
        let mut seen = vec![false; n + 1];
        let mut stack = vec![1usize];
        seen[1] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen[1..=n].iter().all(|&s| s)
    };
    let strongly_connected = n == 1 && edges.contains(&(1, 1))
        || n > 1 && reach_all(&fwd) && reach_all(&rev);
    GraphTest { strongly_connected, edges: edges.into_iter().collect() }
}

/// A family is primitive when, from every nonempty support, the full support
/// is reachable under compositions of the `σ_f`. Monotonicity collapses the
/// check to singletons: a superset's orbit dominates its members' orbits
/// pointwise, so if every `{i}` reaches full support, every `S` does.
/// Returns the verdict and, when false, a stranded starting support.
pub fn is_primitive(family: &Family) -> Result<(bool, Option<SupportSet>), StructureError> {
    let n = family.dim();
    require_dim(n, SCAN_DIM_MAX)?;
    let full = SupportSet::full(n);
    let words = (1usize << n) + 63 >> 6;
    let mut seen = vec![0u64; words];
    for i in 1..=n {
        seen.iter_mut().for_each(|w| *w = 0);
        let start = SupportSet::singleton(i);
        let mut stack = vec![start];
        seen[(start.bits() >> 6) as usize] |= 1 << (start.bits() & 63);
        let mut found = false;
        'bfs: while let Some(s) = stack.pop() {
            for a in 0..family.maps().len() {
                let t = sigma(family, a, s);
                if t == full {
                    found = true;
                    break 'bfs;
                }
                let (w, b) = ((t.bits() >> 6) as usize, t.bits() & 63);
                if seen[w] & (1 << b) == 0 {
                    seen[w] |= 1 << b;
                    if !t.is_empty() {
                        stack.push(t);
                    }
                }
            }
        }
        if !(found || start == full) {
            return Ok((false, Some(start)));
        }
    }
    Ok((true, None))
}

/// The reachability preorder on parts: `J ≥ J'` iff some support reachable
/// from `J` (including `J` itself — the empty word counts) contains `J'`.
/// Stored as the antichain of maximal reachable supports per start, which
/// answers containment queries without materializing the 2^n × 2^n table.
#[derive(Debug)]
pub struct PartPreorder {
    n: usize,
    /// Index `bits - 1` → maximal supports reachable from that start.
    maximal: Vec<Vec<SupportSet>>,
}

impl PartPreorder {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// `j ≥ j'` in the preorder.
    pub fn ge(&self, j: SupportSet, jp: SupportSet) -> bool {
        assert!(!j.is_empty() && !jp.is_empty(), "parts are nonempty supports");
        self.maximal[(j.bits() - 1) as usize]
            .iter()
            .any(|r| jp.is_subset_of(r))
    }

    /// Strict part of the preorder: `j ≥ j'` but not `j' ≥ j`.
    pub fn strict_gt(&self, j: SupportSet, jp: SupportSet) -> bool {
        self.ge(j, jp) && !self.ge(jp, j)
    }

    /// Both directions hold: `j` and `j'` communicate.
    pub fn equivalent(&self, j: SupportSet, jp: SupportSet) -> bool {
        self.ge(j, jp) && self.ge(jp, j)
    }

    /// Materialize the relation and verify `R ∘ R = R` (transitive closure is
    /// a fixpoint). Quadratic in 2^n; meant for validation at small n.
    pub fn closure_idempotent(&self) -> bool {
        let m = (1usize << self.n) - 1;
        let words = m + 63 >> 6;
        let mut rows = vec![vec![0u64; words]; m];
        for a in 0..m {
            for b in 0..m {
                if self.ge(
                    SupportSet::from_bits((a + 1) as u64),
                    SupportSet::from_bits((b + 1) as u64),
                ) {
                    rows[a][b >> 6] |= 1 << (b & 63);
                }
            }
        }
        for a in 0..m {
            let mut composed = vec![0u64; words];
            for b in 0..m {
                if rows[a][b >> 6] & (1 << (b & 63)) != 0 {
                    for w in 0..words {
                        composed[w] |= rows[b][w];
                    }
                }
            }
            if composed != rows[a] {
                return false;
            }
        }
        true
    }
}

pub fn part_preorder(family: &Family) -> Result<PartPreorder, StructureError> {
    let n = family.dim();
    require_dim(n, PREORDER_DIM_MAX)?;
    let count = (1usize << n) - 1;
    let mut maximal = Vec::with_capacity(count);
    let mut seen = vec![0u64; (count + 1 + 63) >> 6];
    for bits in 1..=count as u64 {
        seen.iter_mut().for_each(|w| *w = 0);
        let start = SupportSet::from_bits(bits);
        let mut stack = vec![start];
        seen[(bits >> 6) as usize] |= 1 << (bits & 63);
        let mut front: Vec<SupportSet> = Vec::new();
        while let Some(s) = stack.pop() {
            // Keep only maximal elements of the reach set.
            if !front.iter().any(|r| s.is_subset_of(r) && s != *r) {
                front.retain(|r| !(r.is_subset_of(&s) && *r != s));
                if !front.contains(&s) {
                    front.push(s);
                }
            }
            for a in 0..family.maps().len() {
                let t = sigma(family, a, s);
                if t.is_empty() {
                    continue;
                }
                let (w, b) = ((t.bits() >> 6) as usize, t.bits() & 63);
                if seen[w] & (1 << b) == 0 {
                    seen[w] |= 1 << b;
                    stack.push(t);
                }
            }
        }
        front.sort_by_key(|s| (std::cmp::Reverse(s.len()), s.indices()));
        maximal.push(front);
    }
    Ok(PartPreorder { n, maximal })
}

/// Growth classification of the per-length maxima `α_m = max_w ||f_w(1)||`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GrowthClass {
    Bounded,
    Growing,
    Inconclusive,
}

impl std::fmt::Display for GrowthClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GrowthClass::Bounded => "bounded",
            GrowthClass::Growing => "growing",
            GrowthClass::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeReport {
    pub alpha_seq: Vec<NormRootEntry>,
    pub classification: GrowthClass,
    pub pruned_count: usize,
    pub visited_count: usize,
}

/// Empirical boundedness probe for the word semigroup: enumerates `α_m` up
/// to `depth` (dominance-pruned, exact) and classifies the trend.
///
/// * `bounded` — the overall maximum is already attained (up to 1e-9
///   relative slack) in the first half of the lengths. Submultiplicativity
///   makes this the signature of a bounded semigroup at the probed horizon.
/// * `growing` — strictly increasing over the final quarter of the lengths
///   AND the final value exceeds the half-depth value by a factor ≥ 1.5, so
///   the growth is sustained rather than a plateau artifact.
/// * `inconclusive` — anything else.
pub fn boundedness_probe(
    family: &Family,
    depth: usize,
    budget: usize,
) -> Result<ProbeReport, JointError<ProbeReport>> {
    assert!(depth >= 1, "depth must be positive");
    let n = family.dim();
    let mut budgeter = Budgeter::new(budget);
    let levels = frontier_scan(
        family,
        vec![1.0; n],
        depth,
        Goal::Max,
        &mut budgeter,
        |_, _, _| {},
    )
    .map_err(JointError::Eval)?;
    let alpha_seq: Vec<NormRootEntry> = levels
        .iter()
        .map(|l| NormRootEntry { len: l.len, norm: l.extreme, root: nth_root(l.extreme, l.len) })
        .collect();

    let classification = classify_growth(&alpha_seq);
    let report = ProbeReport {
        alpha_seq,
        classification,
        pruned_count: budgeter.pruned,
        visited_count: budgeter.used(),
    };
    if budgeter.exhausted() {
        Err(JointError::Budget { partial: Box::new(report) })
    } else {
        Ok(report)
    }
}

fn classify_growth(alpha: &[NormRootEntry]) -> GrowthClass {
    let d = alpha.len();
    if d == 0 {
        return GrowthClass::Inconclusive;
    }
    let norms: Vec<f64> = alpha.iter().map(|e| e.norm).collect();
    let max_all = norms.iter().cloned().fold(0.0f64, f64::max);
    let half = (d / 2).max(1);
    let max_half = norms[..half].iter().cloned().fold(0.0f64, f64::max);
    if max_all <= (1.0 + 1e-9) * max_half {
        return GrowthClass::Bounded;
    }
    let quarter = (d / 4).max(1);
    if d > quarter {
        let tail_increasing = (d - quarter..d).all(|i| norms[i] > norms[i - 1]);
        if tail_increasing && norms[d - 1] >= 1.5 * norms[half - 1] {
            return GrowthClass::Growing;
        }
    }
    GrowthClass::Inconclusive
}
