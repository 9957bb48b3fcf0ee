//! Structural analysis: invariant faces, irreducibility, primitivity, and
//! the reachability preorder between parts of the cone.
//!
//! Zero propagation through the expression grammar is exact, so the action
//! of each map on supports is computed symbolically — no thresholds, no
//! rounding. Irreducibility gets tested two ways: a face scan over all
//! support sets (always right) and a positivity digraph on single
//! coordinates (cheap, and equivalent for families built from + and max).

use conerad::expr::SupportSet;
use conerad::family::parse_family;
use conerad::structure::{
    graph_irreducibility, invariant_faces, is_irreducible, is_primitive, part_preorder,
};

fn main() {
    let family = parse_family(include_str!("data/min_counterexample.fam")).unwrap();
    let n = family.dim();

    let faces = invariant_faces(&family).unwrap();
    println!("invariant faces: {faces:?}");

    let (irr, witness) = is_irreducible(&family).unwrap();
    println!("irreducible: {irr} (witness: {witness:?})");

    let graph = graph_irreducibility(&family);
    println!(
        "one-coordinate digraph: strongly connected = {}, edges = {:?}",
        graph.strongly_connected, graph.edges
    );

    let (prim, stranded) = is_primitive(&family).unwrap();
    println!("primitive: {prim} (stranded support: {stranded:?})");
    println!("  — min(x1, x2) kills single-coordinate starts, so no composed");
    println!("    map drives every nonzero point into the interior.");

    println!();
    let pre = part_preorder(&family).unwrap();
    println!("part preorder (J >= J' when some composition maps part J onto a");
    println!("support containing J'):");
    for a in 1..(1u64 << n) {
        for b in 1..(1u64 << n) {
            let (ja, jb) = (SupportSet::from_bits(a), SupportSet::from_bits(b));
            if ja != jb && pre.strict_gt(ja, jb) {
                println!("  {ja} > {jb}");
            }
            if a < b && pre.equivalent(ja, jb) {
                println!("  {ja} == {jb}");
            }
        }
    }
}
