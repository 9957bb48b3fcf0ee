//! Truncated extremal and Barabanov norms as computable certificates.
//!
//! ||x||_{*,m} = max over words w of length <= m of ||f_w(|x|)||_inf is a
//! monotone under-approximation of an extremal norm: once the family is
//! scaled so its joint radius is 1, every map is nonexpansive under it. The
//! check below is exact — the one-step image's norm evaluates through the
//! same floating-point paths as a subset of the deeper truncation, so the
//! certificate holds with zero tolerance. The Barabanov variant additionally
//! reports how far the best map is from achieving the outer maximum.

use conerad::family::parse_family;
use conerad::joint::jsr_bounds;
use conerad::norms::{barabanov_norm_eval, extremal_norm_eval, verify_extremal};

fn main() {
    let raw = parse_family(include_str!("data/maxplus_pair.fam")).unwrap();
    let upper = jsr_bounds(&raw, 12, 1e-9, 50_000_000).unwrap().upper;
    println!("joint radius upper bound {upper}; normalizing the family by it");
    let family = raw.scaled(1.0 / upper).unwrap();

    let x = [1.0, -2.0];
    println!();
    println!("truncated extremal norm of {x:?} (levels are cumulative maxima):");
    let e = extremal_norm_eval(&family, &x, 10, 50_000_000).unwrap();
    for (m, v) in &e.level_values {
        println!("  depth {m:>2}: {v}");
    }
    println!(
        "  value {} achieved by \"{}\"{}",
        e.value,
        family.word_names(&e.achieving_word),
        if e.diverging { "  [levels still climbing]" } else { "  [stabilized]" }
    );

    println!();
    let b = barabanov_norm_eval(&family, &x, 8, 8, 50_000_000).unwrap();
    println!(
        "Barabanov norm value {}, achieving map index {:?}, residual {:?}",
        b.value, b.achieving_map, b.residual
    );

    println!();
    for m in [2usize, 5, 8] {
        let worst = verify_extremal(&family, m, 50, 1).unwrap();
        println!("nonexpansiveness at depth {m}: worst one-step gain {worst} (<= 0 certifies)");
    }
}
