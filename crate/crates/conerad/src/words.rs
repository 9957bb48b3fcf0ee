//! Enumeration of words over the family's alphabet of map indices.
//!
//! Products along a switching sequence are cyclically invariant in spectral
//! radius, so per-cyclic-class enumeration visits one representative instead
//! of all rotations. This module generates necklaces — the lexicographically
//! least rotation of each cyclic class — in lexicographic order using the
//! Fredricksen-Kessler-Maiorana recursion, which is output-linear and visits
//! candidates as an incremental prefix stack. Callers hook `push`/`pop` to
//! maintain per-prefix state (typically the image of the all-ones vector
//! under the prefix word) so each emitted word costs one map application, not
//! a fresh length-m product.

use std::ops::ControlFlow;

/// A letter is an index into the family's map list.
pub type Letter = u16;

/// Callbacks driven by [`for_each_necklace`].
///
/// Between `emit` calls the generator mutates a working prefix one letter at
/// a time; `push` and `pop` bracket those mutations and are always balanced.
/// Returning `Break` from `push` or `emit` aborts the whole enumeration.
pub trait NecklaceVisitor {
    fn push(&mut self, letter: Letter) -> ControlFlow<()>;
    fn pop(&mut self);
    /// `word` is a necklace of the requested length and `period` is its
    /// smallest period (which divides the length). The word is a Lyndon word
    /// exactly when `period == word.len()`; otherwise it is a proper power of
    /// its length-`period` prefix.
    fn emit(&mut self, word: &[Letter], period: usize) -> ControlFlow<()>;
}

/// Visit every necklace of length `m` over the alphabet `0..k` in
/// lexicographic order. Returns `Break` if the visitor aborted.
pub fn for_each_necklace<V: NecklaceVisitor>(k: usize, m: usize, v: &mut V) -> ControlFlow<()> {
    assert!(k >= 1, "alphabet must be nonempty");
    assert!(k <= Letter::MAX as usize, "alphabet too large for Letter");
    assert!(m >= 1, "word length must be positive");
    let mut a = vec![0 as Letter; m + 1];
    gen(&mut a, 1, 1, k, m, v)
}

fn gen<V: NecklaceVisitor>(
    a: &mut [Letter],
    t: usize,
    p: usize,
    k: usize,
    m: usize,
    v: &mut V,
) -> ControlFlow<()> {
    if t > m {
        if m % p == 0 {
            v.emit(&a[1..=m], p)?;
        }
        return ControlFlow::Continue(());
    }
    a[t] = a[t - p];
    v.push(a[t])?;
    gen(a, t + 1, p, k, m, v)?;
    v.pop();
    for j in (a[t - p] as u32 + 1)..(k as u32) {
        a[t] = j as Letter;
        v.push(a[t])?;
        gen(a, t + 1, t, k, m, v)?;
        v.pop();
    }
    ControlFlow::Continue(())
}

/// Lexicographically least rotation of a word — the canonical representative
/// of its cyclic class. Quadratic, intended for tests and small inputs;
/// enumeration goes through [`for_each_necklace`] instead.
pub fn canonical_rotation(word: &[Letter]) -> Vec<Letter> {
    let m = word.len();
    if m == 0 {
        return Vec::new();
    }
    (0..m)
        .map(|s| {
            let mut r = Vec::with_capacity(m);
            r.extend_from_slice(&word[s..]);
            r.extend_from_slice(&word[..s]);
            r
        })
        .min()
        .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Collect {
        depth: usize,
        max_depth: usize,
        out: Vec<(Vec<Letter>, usize)>,
        limit: usize,
    }

    impl NecklaceVisitor for Collect {
        fn push(&mut self, _letter: Letter) -> ControlFlow<()> {
            self.depth += 1;
            self.max_depth = self.max_depth.max(self.depth);
            ControlFlow::Continue(())
        }
        fn pop(&mut self) {
            self.depth -= 1;
        }
        fn emit(&mut self, word: &[Letter], period: usize) -> ControlFlow<()> {
            assert_eq!(self.depth, word.len(), "emit must see a full prefix stack");
            self.out.push((word.to_vec(), period));
            if self.out.len() >= self.limit {
                return ControlFlow::Break(());
            }
            ControlFlow::Continue(())
        }
    }

    fn necklaces(k: usize, m: usize) -> Vec<(Vec<Letter>, usize)> {
        let mut c = Collect { depth: 0, max_depth: 0, out: Vec::new(), limit: usize::MAX };
        assert_eq!(for_each_necklace(k, m, &mut c), ControlFlow::Continue(()));
        assert_eq!(c.depth, 0, "push/pop must balance");
        c.out
    }

    #[test]
    fn binary_length_four() {
        let got = necklaces(2, 4);
        let expect: Vec<(Vec<Letter>, usize)> = vec![
            (vec![0, 0, 0, 0], 1),
            (vec![0, 0, 0, 1], 4),
            (vec![0, 0, 1, 1], 4),
            (vec![0, 1, 0, 1], 2),
            (vec![0, 1, 1, 1], 4),
            (vec![1, 1, 1, 1], 1),
        ];
        assert_eq!(got, expect);
    }

    #[test]
    fn counts_match_burnside() {
        // Necklace and Lyndon counts for a few (k, m), from the standard
        // divisor-sum formulas.
        let cases = [(2, 1, 2, 2), (2, 6, 14, 9), (3, 3, 11, 8), (3, 4, 24, 18), (4, 3, 24, 20)];
        for (k, m, necks, lyndon) in cases {
            let all = necklaces(k, m);
            assert_eq!(all.len(), necks, "necklace count for k={k} m={m}");
            let l = all.iter().filter(|(w, p)| *p == w.len()).count();
            assert_eq!(l, lyndon, "Lyndon count for k={k} m={m}");
        }
    }

    #[test]
    fn emitted_words_are_canonical_and_sorted() {
        let all = necklaces(3, 5);
        let mut prev: Option<Vec<Letter>> = None;
        for (w, p) in &all {
            assert_eq!(&canonical_rotation(w), w, "necklace must be lex-least rotation");
            // Reported period is the smallest one.
            for q in 1..*p {
                if w.len() % q == 0 {
                    assert!((0..w.len()).any(|i| w[i] != w[i % q]));
                }
            }
            if let Some(prev) = &prev {
                assert!(prev < w, "lexicographic emission order");
            }
            prev = Some(w.clone());
        }
    }

    #[test]
    fn break_from_emit_aborts() {
        let mut c = Collect { depth: 0, max_depth: 0, out: Vec::new(), limit: 3 };
        assert_eq!(for_each_necklace(2, 8, &mut c), ControlFlow::Break(()));
        assert_eq!(c.out.len(), 3);
    }

    #[test]
    fn single_letter_alphabet() {
        let all = necklaces(1, 5);
        assert_eq!(all, vec![(vec![0, 0, 0, 0, 0], 1)]);
    }

    #[test]
    fn canonical_rotation_examples() {
        assert_eq!(canonical_rotation(&[1, 0]), vec![0, 1]);
        assert_eq!(canonical_rotation(&[2, 0, 1]), vec![0, 1, 2]);
        assert_eq!(canonical_rotation(&[1, 1]), vec![1, 1]);
        assert_eq!(canonical_rotation(&[]), Vec::<Letter>::new());
    }
}
