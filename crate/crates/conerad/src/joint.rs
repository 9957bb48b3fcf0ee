//! Family-level radii under arbitrary switching.
//!
//! For a finite family 𝒜 of cone maps, let `α_m` be the largest and `β_m`
//! the smallest value of `||f_w(1)||` over words `w` of length `m`. Since
//! `||f_w(1)||` is the exact operator norm of the product (the all-ones
//! vector tops the cone's unit ball), `α_m` is submultiplicative and every
//! `α_m^(1/m)` upper-bounds the joint spectral radius, while
//! `min_m β_m^(1/m)` upper-bounds the subradius. Certified lower bounds come
//! from per-word Collatz-Wielandt certificates, taken to the `1/|w|` power.
//!
//! Enumeration is breadth-first over word lengths with componentwise
//! dominance pruning: if two same-length products satisfy `f_v(1) <= f_u(1)`,
//! every continuation preserves the inequality, so `v` is useless for maxima
//! (and `u` for minima). Pruning is exact for the reported extremes — it only
//! discards provably non-extremal branches — and skipping the filter (for
//! very wide frontiers) affects speed, never values. Lower-bound certificates
//! are assessed per cyclic equivalence class: radius is invariant under
//! rotation, so only Lyndon representatives are iterated.

use crate::expr::{sup_norm, EvalError, SupportSet};
use crate::family::Family;
use crate::spectral::{cw_ratio, nth_root, power_bracket};
use crate::words::{for_each_necklace, Letter, NecklaceVisitor};
use rayon::prelude::*;
use std::ops::ControlFlow;
use thiserror::Error;

/// One entry of a per-length extreme-norm sequence: the extreme value of
/// `||f_w(1)||` over words of length `len`, and its `len`-th root.
#[derive(Clone, Debug, PartialEq)]
pub struct NormRootEntry {
    pub len: usize,
    pub norm: f64,
    pub root: f64,
}

/// Best certified lower bound contributed by words of one length
/// (diagnostic sequence; the headline bound is the running maximum).
#[derive(Clone, Debug, PartialEq)]
pub struct GammaEntry {
    pub len: usize,
    pub value: f64,
}

/// Two-sided joint-spectral-radius report.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundsReport {
    /// Certified lower bound: some word `w` and vector `x` satisfy
    /// `f_w(x) >= lower^|w| * x` on the support of `x`.
    pub lower: f64,
    /// Upper bound `min_m α_m^(1/m)` (for face-seeded runs, an estimate; see
    /// [`partial_jsr`]).
    pub upper: f64,
    pub lower_word: Vec<Letter>,
    pub lower_vector: Vec<f64>,
    /// Length achieving `upper`.
    pub upper_m: usize,
    pub alpha_seq: Vec<NormRootEntry>,
    pub gamma_seq: Vec<GammaEntry>,
    pub pruned_count: usize,
    pub visited_count: usize,
    /// `upper - lower <= tol * max(1, upper)` at return.
    pub converged: bool,
}

/// Certified lower bound on the generalized spectral radius.
#[derive(Clone, Debug, PartialEq)]
pub struct GsrLower {
    pub value: f64,
    pub word: Vec<Letter>,
    pub vector: Vec<f64>,
}

/// Subradius report: `r_star_upper = min_m β_m^(1/m)` is a certified upper
/// bound on the joint spectral subradius; `gamma_seq` samples short radius
/// brackets of the smallest-norm words (diagnostic only — no finite
/// certificate bounds the subradius from below).
#[derive(Clone, Debug, PartialEq)]
pub struct SubradiusReport {
    pub r_star_upper: f64,
    pub beta_seq: Vec<NormRootEntry>,
    pub gamma_seq: Vec<GammaEntry>,
    pub best_word: Vec<Letter>,
    pub pruned_count: usize,
    pub visited_count: usize,
}

/// Outcome of the stabilizing-word search.
#[derive(Clone, Debug, PartialEq)]
pub enum StabilityOutcome {
    /// `||f_word(1)|| = norm < 1`: the word, repeated forever, drives every
    /// trajectory to zero, so the family is selectably stable.
    Stable { word: Vec<Letter>, norm: f64 },
    /// No enumerated word contracts; carries the smallest norm seen.
    Unknown { best_norm: f64, best_word: Vec<Letter> },
}

/// Error from a budgeted family analysis. Budget exhaustion is not a crash:
/// the partial report (sound at its truncation) rides inside the error.
#[derive(Debug, Error)]
pub enum JointError<T> {
    #[error("node budget exceeded; partial results attached")]
    Budget { partial: Box<T> },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl<T> JointError<T> {
    /// The partial report, if this is a budget stop.
    pub fn into_partial(self) -> Option<T> {
        match self {
            JointError::Budget { partial } => Some(*partial),
            JointError::Eval(_) => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Budget accounting and the breadth-first frontier engine
// ---------------------------------------------------------------------------

/// Counts work in map evaluations; `charge` refuses once the limit is passed.
/// Checks happen between units of work, so the final count can overshoot the
/// limit by one unit.
pub(crate) struct Budgeter {
    used: usize,
    limit: usize,
    pub pruned: usize,
    hit: bool,
}

impl Budgeter {
    pub(crate) fn new(limit: usize) -> Self {
        Budgeter { used: 0, limit, pruned: 0, hit: false }
    }

    /// True if the charge fits; false marks the budget as exhausted.
    pub(crate) fn charge(&mut self, amount: usize) -> bool {
        if self.hit || self.used.saturating_add(amount) > self.limit {
            self.hit = true;
            return false;
        }
        self.used += amount;
        true
    }

    pub(crate) fn used(&self) -> usize {
        self.used
    }

    pub(crate) fn exhausted(&self) -> bool {
        self.hit
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Goal {
    Max,
    Min,
}

pub(crate) struct FrontierItem {
    pub vector: Vec<f64>,
    pub word: Vec<Letter>,
}

pub(crate) struct LevelRecord {
    pub len: usize,
    pub extreme: f64,
    pub word: Vec<Letter>,
}

/// Stop filtering (keeping everything, which is still exact) once the Pareto
/// front grows past this; guards against quadratic blowup on adversarial
/// frontiers.
const PARETO_FILTER_CAP: usize = 4096;

/// Use rayon only when a level is wide enough to amortize the overhead.
const PARALLEL_THRESHOLD: usize = 512;

/// Breadth-first scan of all words by length, recording the per-length
/// extreme of `||f_w(start)||`. The kept frontier after each completed level
/// is passed to `on_level` (sorted extreme-first). Returns the completed
/// level records; an exhausted budget stops the scan early with `hit` set in
/// the budgeter rather than erroring.
pub(crate) fn frontier_scan<F>(
    family: &Family,
    start: Vec<f64>,
    max_len: usize,
    goal: Goal,
    budget: &mut Budgeter,
    mut on_level: F,
) -> Result<Vec<LevelRecord>, EvalError>
where
    F: FnMut(usize, &[FrontierItem], &mut Budgeter),
{
    let k = family.maps().len();
    let mut frontier = vec![FrontierItem { vector: start, word: Vec::new() }];
    let mut levels = Vec::with_capacity(max_len);

    for len in 1..=max_len {
        let needed = frontier.len() * k;
        if !budget.charge(needed) {
            break;
        }
        let candidates: Vec<FrontierItem> = if needed >= PARALLEL_THRESHOLD {
            let nested: Vec<Vec<FrontierItem>> = frontier
                .par_iter()
                .map(|item| extend_item(family, item))
                .collect::<Result<_, _>>()?;
            nested.into_iter().flatten().collect()
        } else {
            let mut out = Vec::with_capacity(needed);
            for item in &frontier {
                out.extend(extend_item(family, item)?);
            }
            out
        };

        // Extreme over the full candidate set, before pruning, with a
        // deterministic word tie-break.
        let mut best: Option<(f64, &Vec<Letter>)> = None;
        for c in &candidates {
            let norm = sup_norm(&c.vector);
            let better = match &best {
                None => true,
                Some((b, w)) => match goal {
                    Goal::Max => norm > *b || (norm == *b && c.word < **w),
                    Goal::Min => norm < *b || (norm == *b && c.word < **w),
                },
            };
            if better {
                best = Some((norm, &c.word));
            }
        }
        let (extreme, word) = match best {
            Some((n, w)) => (n, w.clone()),
            None => break,
        };
        levels.push(LevelRecord { len, extreme, word });

        frontier = pareto_filter(candidates, goal, &mut budget.pruned);
        on_level(len, &frontier, budget);
        if frontier.is_empty() {
            break;
        }
    }
    Ok(levels)
}

fn extend_item(family: &Family, item: &FrontierItem) -> Result<Vec<FrontierItem>, EvalError> {
    let k = family.maps().len();
    let mut out = Vec::with_capacity(k);
    for a in 0..k {
        let vector = family.map(a).eval(&item.vector)?;
        let mut word = Vec::with_capacity(item.word.len() + 1);
        word.extend_from_slice(&item.word);
        word.push(a as Letter);
        out.push(FrontierItem { vector, word });
    }
    Ok(out)
}

/// Keep the candidates that could still matter for the goal. For `Max`,
/// drop any candidate componentwise dominated by a kept one (continuations
/// preserve domination, so its subtree never wins); for `Min`, drop the
/// dominator instead. Equal vectors keep the lexicographically least word.
/// Sorting extreme-first means a candidate can only be dominated by an
/// already-kept one, making a single pass sufficient.
fn pareto_filter(candidates: Vec<FrontierItem>, goal: Goal, pruned: &mut usize) -> Vec<FrontierItem> {
    let mut sorted = candidates;
    sorted.sort_by(|a, b| {
        let (na, nb) = (sup_norm(&a.vector), sup_norm(&b.vector));
        let ord = match goal {
            Goal::Max => nb.total_cmp(&na),
            Goal::Min => na.total_cmp(&nb),
        };
        ord.then_with(|| a.word.cmp(&b.word))
    });
    let mut kept: Vec<FrontierItem> = Vec::new();
    for c in sorted {
        if kept.len() >= PARETO_FILTER_CAP {
            kept.push(c);
            continue;
        }
        let dominated = kept.iter().any(|k| match goal {
            Goal::Max => c.vector.iter().zip(&k.vector).all(|(a, b)| a <= b),
            Goal::Min => c.vector.iter().zip(&k.vector).all(|(a, b)| a >= b),
        });
        if dominated {
            *pruned += 1;
        } else {
            kept.push(c);
        }
    }
    kept
}

// ---------------------------------------------------------------------------
// Certified lower bounds over cyclic classes
// ---------------------------------------------------------------------------

/// Radius brackets of short-listed words cost `len` evaluations per
/// iteration, so the orbit is capped tightly; boundary certificates are
/// probed directly from basis vectors instead of relying on restarts.
const WORD_BRACKET_MAX_ITER: usize = 120;
const WORD_BRACKET_STALL: usize = 25;
/// How many top candidates per length get the full certificate treatment.
const ASSESS_PER_LENGTH: usize = 24;

struct LowerState {
    value: f64,
    word: Vec<Letter>,
    vector: Vec<f64>,
    gamma_seq: Vec<GammaEntry>,
}

/// FKM visitor caching `f_prefix(1)` per stack depth and collecting Lyndon
/// words of the target length with their end vectors.
struct LyndonCollector<'a> {
    family: &'a Family,
    stack: Vec<Vec<f64>>,
    out: Vec<(f64, Vec<Letter>)>, // (norm, word)
    target: usize,
    err: Option<EvalError>,
    budget_hit: bool,
    charges: usize,
}

impl NecklaceVisitor for LyndonCollector<'_> {
    fn push(&mut self, letter: Letter) -> ControlFlow<()> {
        self.charges += 1;
        let top = self.stack.last().unwrap();
        match self.family.map(letter as usize).eval(top) {
            Ok(v) => {
                self.stack.push(v);
                ControlFlow::Continue(())
            }
            Err(e) => {
                self.err = Some(e);
                ControlFlow::Break(())
            }
        }
    }

    fn pop(&mut self) {
        self.stack.pop();
    }

    fn emit(&mut self, word: &[Letter], period: usize) -> ControlFlow<()> {
        if period == self.target {
            let norm = sup_norm(self.stack.last().unwrap());
            self.out.push((norm, word.to_vec()));
        }
        ControlFlow::Continue(())
    }
}

/// Best certified lower bound over cyclic-distinct words of length ≤ max_len.
/// Per length, the words with the largest norm roots (the only ones whose
/// certificates could beat the current bound) are assessed with basis-vector
/// certificates and a capped radius bracket.
fn lower_pass(
    family: &Family,
    max_len: usize,
    tol: f64,
    budget: &mut Budgeter,
) -> Result<LowerState, EvalError> {
    let n = family.dim();
    let k = family.maps().len();
    let mut state = LowerState {
        value: 0.0,
        word: Vec::new(),
        vector: Vec::new(),
        gamma_seq: Vec::new(),
    };

    for len in 1..=max_len {
        if budget.exhausted() {
            break;
        }
        let mut collector = LyndonCollector {
            family,
            stack: vec![vec![1.0; n]],
            out: Vec::new(),
            target: len,
            err: None,
            budget_hit: false,
            charges: 0,
        };
        let _ = for_each_necklace(k, len, &mut collector);
        if let Some(e) = collector.err {
            return Err(e);
        }
        if !budget.charge(collector.charges) {
            break;
        }
        let _ = collector.budget_hit;

        // Norm roots upper-bound what any word's certificate can reach, so
        // only the top candidates above the current bound are worth orbits.
        let floor = state.value * (1.0 + 1e-12);
        let mut ranked: Vec<(f64, Vec<Letter>)> = collector
            .out
            .into_iter()
            .map(|(norm, word)| (nth_root(norm, len), word))
            .filter(|(root, _)| *root > floor)
            .collect();
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        ranked.truncate(ASSESS_PER_LENGTH);

        let mut gamma_best = 0.0f64;
        for (_, word) in &ranked {
            if budget.exhausted() {
                break;
            }
            let mut assessed = assess_word(family, word, tol, budget)?;
            if let Some((alpha, vector)) = assessed.take() {
                let root = nth_root(alpha, len);
                gamma_best = gamma_best.max(root);
                if root > state.value {
                    state.value = root;
                    state.word = word.clone();
                    state.vector = vector;
                }
            }
        }
        if !ranked.is_empty() {
            state.gamma_seq.push(GammaEntry { len, value: gamma_best });
        }
    }
    Ok(state)
}

/// Best Collatz-Wielandt certificate for the fixed word: basis vectors first
/// (so boundary eigenvectors like e₁ are found and reported), then a capped
/// power orbit. Returns `(alpha, witness)` with `f_word(witness) >= alpha *
/// witness` on the witness's support.
fn assess_word(
    family: &Family,
    word: &[Letter],
    tol: f64,
    budget: &mut Budgeter,
) -> Result<Option<(f64, Vec<f64>)>, EvalError> {
    let n = family.dim();
    let len = word.len();
    let mut best: Option<(f64, Vec<f64>)> = None;

    for i in 1..=n {
        if !budget.charge(len) {
            return Ok(best);
        }
        let x = SupportSet::singleton(i).characteristic_vector(n);
        let y = family.apply(word, &x)?;
        let alpha = cw_ratio(&x, &y);
        if best.as_ref().map_or(alpha > 0.0, |(b, _)| alpha > *b) {
            best = Some((alpha, x));
        }
    }

    let bracket = power_bracket(
        n,
        |x| family.apply(word, x),
        |s| word.iter().fold(s, |acc, &a| family.map(a as usize).support_transition(acc)),
        tol,
        WORD_BRACKET_MAX_ITER,
        WORD_BRACKET_STALL,
        false,
    )?;
    budget.charge(bracket.iterations_used * len);
    if bracket.lower > 0.0
        && best.as_ref().map_or(true, |(b, _)| bracket.lower > *b)
    {
        best = Some((bracket.lower, bracket.lower_witness.vector));
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

/// Two-sided bounds on the joint spectral radius: upper from the per-length
/// maxima `α_m` (each `α_m^(1/m)` is a true bound by submultiplicativity),
/// lower from the best per-word certificate. Both directions remain valid at
/// any truncation depth.
pub fn jsr_bounds(
    family: &Family,
    max_len: usize,
    tol: f64,
    budget: usize,
) -> Result<BoundsReport, JointError<BoundsReport>> {
    assert!(max_len >= 1, "max_len must be positive");
    let n = family.dim();
    let mut budgeter = Budgeter::new(budget);

    let levels = frontier_scan(
        family,
        vec![1.0; n],
        max_len,
        Goal::Max,
        &mut budgeter,
        |_, _, _| {},
    )
    .map_err(JointError::Eval)?;
    let alpha_seq = rooted(levels_to_entries(&levels));
    let (upper, upper_m) = best_root(&alpha_seq, Goal::Min).unwrap_or((f64::INFINITY, 0));

    let lower = lower_pass(family, max_len, tol, &mut budgeter).map_err(JointError::Eval)?;

    let converged = upper - lower.value <= tol * upper;
    let report = BoundsReport {
        lower: lower.value,
        upper,
        lower_word: lower.word,
        lower_vector: lower.vector,
        upper_m,
        alpha_seq,
        gamma_seq: lower.gamma_seq,
        pruned_count: budgeter.pruned,
        visited_count: budgeter.used(),
        converged,
    };
    if budgeter.exhausted() {
        Err(JointError::Budget { partial: Box::new(report) })
    } else {
        Ok(report)
    }
}

/// Certified lower bound on the generalized spectral radius (the sup of
/// per-word radii roots). Same certificate machinery as [`jsr_bounds`]; with
/// an ample budget the value equals `jsr_bounds(..).lower`.
pub fn gsr_lower(
    family: &Family,
    max_len: usize,
    budget: usize,
) -> Result<GsrLower, JointError<GsrLower>> {
    assert!(max_len >= 1, "max_len must be positive");
    let mut budgeter = Budgeter::new(budget);
    let state = lower_pass(family, max_len, 1e-6, &mut budgeter).map_err(JointError::Eval)?;
    let out = GsrLower { value: state.value, word: state.word, vector: state.vector };
    if budgeter.exhausted() {
        Err(JointError::Budget { partial: Box::new(out) })
    } else {
        Ok(out)
    }
}

/// Joint-radius estimates seeded from the face of `j`: the scan starts at
/// `e_J` instead of the all-ones vector. For full `j` this is exactly
/// [`jsr_bounds`] (and the upper bound is then certified); for a proper face
/// the alpha sequence estimates the partial radius and `lower` certifies
/// growth inside the face (`f_w(e_J) >= c * e_J` forces rate `c^(1/|w|)`).
pub fn partial_jsr(
    family: &Family,
    j: SupportSet,
    max_len: usize,
    tol: f64,
    budget: usize,
) -> Result<BoundsReport, JointError<BoundsReport>> {
    assert!(max_len >= 1, "max_len must be positive");
    assert!(!j.is_empty(), "face index set must be nonempty");
    let n = family.dim();
    assert!(
        j.is_subset_of(&SupportSet::full(n)),
        "face index set out of range for dimension {n}"
    );
    if j == SupportSet::full(n) {
        return jsr_bounds(family, max_len, tol, budget);
    }

    let mut budgeter = Budgeter::new(budget);
    let mut lower = 0.0f64;
    let mut lower_word: Vec<Letter> = Vec::new();
    let mut gamma_seq: Vec<GammaEntry> = Vec::new();
    let indices = j.indices();

    let levels = frontier_scan(
        family,
        j.characteristic_vector(n),
        max_len,
        Goal::Max,
        &mut budgeter,
        |len, kept, _| {
            // Certificate at e_J: a word whose image dominates c*e_J grows at
            // rate c^(1/len) inside the face. Dominance pruning keeps the
            // maximizer of the min-over-J coordinate, so kept items suffice.
            let mut best = 0.0f64;
            let mut best_word: Option<&Vec<Letter>> = None;
            for item in kept {
                let c = indices
                    .iter()
                    .map(|&i| item.vector[i - 1])
                    .fold(f64::INFINITY, f64::min);
                if c > 0.0 {
                    let root = nth_root(c, len);
                    if root > best || (root == best && best_word.map_or(true, |w| item.word < *w))
                    {
                        best = root;
                        best_word = Some(&item.word);
                    }
                }
            }
            gamma_seq.push(GammaEntry { len, value: best });
            if best > lower {
                lower = best;
                lower_word = best_word.cloned().unwrap_or_default();
            }
        },
    )
    .map_err(JointError::Eval)?;

    let alpha_seq = rooted(levels_to_entries(&levels));
    let (upper, upper_m) = best_root(&alpha_seq, Goal::Min).unwrap_or((f64::INFINITY, 0));
    let converged = upper - lower <= tol * upper;
    let report = BoundsReport {
        lower,
        upper,
        lower_word,
        lower_vector: j.characteristic_vector(n),
        upper_m,
        alpha_seq,
        gamma_seq,
        pruned_count: budgeter.pruned,
        visited_count: budgeter.used(),
        converged,
    };
    if budgeter.exhausted() {
        Err(JointError::Budget { partial: Box::new(report) })
    } else {
        Ok(report)
    }
}

/// How many smallest-norm survivors per length get a short radius bracket
/// for the subradius diagnostic sequence.
const GAMMA_SAMPLES: usize = 16;
const GAMMA_BRACKET_MAX_ITER: usize = 60;
const GAMMA_BRACKET_STALL: usize = 15;

/// Certified upper bound on the joint spectral subradius via the per-length
/// minima `β_m` (anti-dominance pruned, exact), plus sampled per-word radius
/// estimates as a non-certified floor diagnostic.
pub fn subradius_bounds(
    family: &Family,
    max_len: usize,
    budget: usize,
) -> Result<SubradiusReport, JointError<SubradiusReport>> {
    assert!(max_len >= 1, "max_len must be positive");
    let n = family.dim();
    let mut budgeter = Budgeter::new(budget);
    let mut gamma_seq: Vec<GammaEntry> = Vec::new();
    let mut gamma_err: Option<EvalError> = None;

    let levels = frontier_scan(
        family,
        vec![1.0; n],
        max_len,
        Goal::Min,
        &mut budgeter,
        |len, kept, budgeter| {
            if gamma_err.is_some() {
                return;
            }
            let mut best: Option<f64> = None;
            for item in kept.iter().take(GAMMA_SAMPLES) {
                if budgeter.exhausted() {
                    break;
                }
                let bracket = power_bracket(
                    n,
                    |x| family.apply(&item.word, x),
                    |s| {
                        item.word
                            .iter()
                            .fold(s, |acc, &a| family.map(a as usize).support_transition(acc))
                    },
                    1e-9,
                    GAMMA_BRACKET_MAX_ITER,
                    GAMMA_BRACKET_STALL,
                    false,
                );
                match bracket {
                    Ok(b) => {
                        budgeter.charge(b.iterations_used * len);
                        let root = nth_root(b.upper, len);
                        best = Some(best.map_or(root, |g| g.min(root)));
                    }
                    Err(e) => {
                        gamma_err = Some(e);
                        return;
                    }
                }
            }
            if let Some(g) = best {
                gamma_seq.push(GammaEntry { len, value: g });
            }
        },
    )
    .map_err(JointError::Eval)?;
    if let Some(e) = gamma_err {
        return Err(JointError::Eval(e));
    }

    let beta_seq = rooted(levels_to_entries(&levels));
    let (r_star_upper, best_m) = best_root(&beta_seq, Goal::Min).unwrap_or((f64::INFINITY, 0));
    let best_word = levels
        .iter()
        .find(|l| l.len == best_m)
        .map(|l| l.word.clone())
        .unwrap_or_default();

    let report = SubradiusReport {
        r_star_upper,
        beta_seq,
        gamma_seq,
        best_word,
        pruned_count: budgeter.pruned,
        visited_count: budgeter.used(),
    };
    if budgeter.exhausted() {
        Err(JointError::Budget { partial: Box::new(report) })
    } else {
        Ok(report)
    }
}

/// Search for a word with `||f_w(1)|| < 1` (equivalently an operator-norm
/// contraction, since the all-ones vector realizes the norm). Words are
/// visited one representative per cyclic class, shortest first and in
/// lexicographic order within a length; the first contracting representative
/// is returned. If any switching word contracts, some representative power
/// of its class eventually does, so the class-based search loses no
/// decidability — only, at worst, word length.
pub fn check_selectable_stability(
    family: &Family,
    max_len: usize,
    budget: usize,
) -> Result<StabilityOutcome, JointError<StabilityOutcome>> {
    assert!(max_len >= 1, "max_len must be positive");
    let n = family.dim();
    let k = family.maps().len();
    let mut budgeter = Budgeter::new(budget);

    struct Search<'a> {
        family: &'a Family,
        stack: Vec<Vec<f64>>,
        found: Option<(Vec<Letter>, f64)>,
        best_norm: f64,
        best_word: Vec<Letter>,
        err: Option<EvalError>,
        budgeter: &'a mut Budgeter,
    }

    impl NecklaceVisitor for Search<'_> {
        fn push(&mut self, letter: Letter) -> ControlFlow<()> {
            if !self.budgeter.charge(1) {
                return ControlFlow::Break(());
            }
            match self.family.map(letter as usize).eval(self.stack.last().unwrap()) {
                Ok(v) => {
                    self.stack.push(v);
                    ControlFlow::Continue(())
                }
                Err(e) => {
                    self.err = Some(e);
                    ControlFlow::Break(())
                }
            }
        }
        fn pop(&mut self) {
            self.stack.pop();
        }
        fn emit(&mut self, word: &[Letter], _period: usize) -> ControlFlow<()> {
            let norm = sup_norm(self.stack.last().unwrap());
            if norm < self.best_norm {
                self.best_norm = norm;
                self.best_word = word.to_vec();
            }
            if norm < 1.0 {
                self.found = Some((word.to_vec(), norm));
                return ControlFlow::Break(());
            }
            ControlFlow::Continue(())
        }
    }

    let mut best_norm = f64::INFINITY;
    let mut best_word = Vec::new();
    for len in 1..=max_len {
        let mut search = Search {
            family,
            stack: vec![vec![1.0; n]],
            found: None,
            best_norm,
            best_word: std::mem::take(&mut best_word),
            err: None,
            budgeter: &mut budgeter,
        };
        let _ = for_each_necklace(k, len, &mut search);
        if let Some(e) = search.err {
            return Err(JointError::Eval(e));
        }
        if let Some((word, norm)) = search.found {
            return Ok(StabilityOutcome::Stable { word, norm });
        }
        best_norm = search.best_norm;
        best_word = search.best_word;
        if budgeter.exhausted() {
            return Err(JointError::Budget {
                partial: Box::new(StabilityOutcome::Unknown { best_norm, best_word }),
            });
        }
    }
    Ok(StabilityOutcome::Unknown { best_norm, best_word })
}

fn levels_to_entries(levels: &[LevelRecord]) -> Vec<(usize, f64)> {
    levels.iter().map(|l| (l.len, l.extreme)).collect()
}

fn rooted(entries: Vec<(usize, f64)>) -> Vec<NormRootEntry> {
    entries
        .into_iter()
        .map(|(len, norm)| NormRootEntry { len, norm, root: nth_root(norm, len) })
        .collect()
}

/// Position of the extreme root in a sequence; first occurrence wins, which
/// means the smallest length among ties.
fn best_root(seq: &[NormRootEntry], goal: Goal) -> Option<(f64, usize)> {
    let mut best: Option<(f64, usize)> = None;
    for e in seq {
        let better = match (&best, goal) {
            (None, _) => true,
            (Some((b, _)), Goal::Min) => e.root < *b,
            (Some((b, _)), Goal::Max) => e.root > *b,
        };
        if better {
            best = Some((e.root, e.len));
        }
    }
    best
}
