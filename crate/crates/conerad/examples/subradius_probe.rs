//! The spectral subradius (best-case switching) and the boundedness probe.
//!
//! beta_m is the smallest composition norm at length m; its m-th roots bound
//! the subradius from above. On the two shuffles {g, h} every composition
//! has norm exactly 2, so beta_m = 2 for all m and the bound decays like
//! 2^(1/m) — the family sits exactly on the stability boundary. The probe
//! then classifies per-length growth of the *worst* compositions for the
//! full three-map family (growing) and its normalized shuffles (bounded).

use conerad::family::parse_family;
use conerad::joint::subradius_bounds;
use conerad::structure::boundedness_probe;

fn main() {
    let shuffles = parse_family(include_str!("data/shuffles.fam")).unwrap();
    let sub = subradius_bounds(&shuffles, 15, 50_000_000).unwrap();

    println!("  m   beta_m   beta_m^(1/m)");
    for e in &sub.beta_seq {
        println!("  {:<3} {:<8} {:.12}", e.len, e.norm, e.root);
    }
    println!(
        "subradius upper bound {} (word \"{}\")",
        sub.r_star_upper,
        shuffles.word_names(&sub.best_word)
    );

    println!();
    let full = parse_family(include_str!("data/min_counterexample.fam")).unwrap();
    let probe = boundedness_probe(&full, 12, 50_000_000).unwrap();
    println!("probe on the full family: {}", probe.classification);
    print!("  alpha:");
    for e in &probe.alpha_seq {
        print!(" {}", e.norm);
    }
    println!();

    let probe2 = boundedness_probe(&shuffles.scaled(0.5).unwrap(), 12, 50_000_000).unwrap();
    println!("probe on the halved shuffles: {}", probe2.classification);
    print!("  alpha:");
    for e in &probe2.alpha_seq {
        print!(" {}", e.norm);
    }
    println!();
}
