//! Certified two-sided bounds for the joint spectral radius.
//!
//! The fixture is a family whose joint radius is exactly 1 even though the
//! iterates of its first map grow without bound — the per-length maxima
//! α_m = m+1 walk off to infinity while their m-th roots sink to 1. The run
//! shows both certificate streams: Collatz–Wielandt lower bounds with the
//! witnessing word and vector, and norm-root upper bounds per length.

use conerad::family::parse_family;
use conerad::joint::jsr_bounds;

fn main() {
    let family = parse_family(include_str!("data/min_counterexample.fam")).unwrap();
    let report = jsr_bounds(&family, 12, 1e-9, 50_000_000).unwrap();

    println!("family: {} maps in dimension {}", family.maps().len(), family.dim());
    println!();
    println!("  m   alpha_m       alpha_m^(1/m)   gamma_m");
    for (a, g) in report.alpha_seq.iter().zip(&report.gamma_seq) {
        println!("  {:<3} {:<13} {:<15.12} {:.12}", a.len, a.norm, a.root, g.value);
    }
    println!();
    println!(
        "certified lower bound {} via word \"{}\" at {:?}",
        report.lower,
        family.word_names(&report.lower_word),
        report.lower_vector
    );
    println!("certified upper bound {} from length {}", report.upper, report.upper_m);
    println!(
        "visited {} compositions, pruned {} dominated branches",
        report.visited_count, report.pruned_count
    );
}
