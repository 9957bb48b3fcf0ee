//! Finding a switching word that contracts: selectable stability.
//!
//! Scaling the counterexample family by 0.9 pushes its smallest composition
//! norms below 1. The search enumerates words by length in necklace order —
//! compositions are judged by norm, and the norm of a cyclic word does not
//! care where the cycle is cut, so one representative per rotation class
//! suffices. The first contraction found here is the pure word g^7 with norm
//! 0.9^7 * 2, well before any mixed word qualifies.

use conerad::family::parse_family;
use conerad::joint::{check_selectable_stability, StabilityOutcome};

fn main() {
    let base = parse_family(include_str!("data/min_counterexample.fam")).unwrap();

    for scale in [1.0, 0.98, 0.9] {
        let family = base.scaled(scale).unwrap();
        print!("scale {scale}: ");
        match check_selectable_stability(&family, 10, 50_000_000).unwrap() {
            StabilityOutcome::Stable { word, norm } => {
                println!(
                    "stable — word \"{}\" has norm {} < 1",
                    family.word_names(&word),
                    norm
                );
            }
            StabilityOutcome::Unknown { best_norm, best_word } => {
                println!(
                    "no contraction up to length 10 — best word \"{}\" still has norm {}",
                    family.word_names(&best_word),
                    best_norm
                );
            }
        }
    }

    println!();
    println!("at scale 1 the family sits exactly on the stability boundary:");
    println!("every composition of g and h has norm exactly 2, and any word");
    println!("containing f only grows. 0.9^7 * 2 = {} is the first dip below 1.", 0.9f64.powi(7) * 2.0);
}
