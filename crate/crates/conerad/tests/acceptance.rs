//! End-to-end acceptance checks. Each test covers one numbered criterion and
//! prints exactly one `criterion N: PASS/FAIL` line; run with
//! `cargo test --test acceptance -- --nocapture` to see all nine lines.

mod common;

use common::{fam, topical, topical_power_norm, FamilyGen, EXAMPLE_MIN, GOLDEN, MAXPLUS_PAIR};
use conerad::expr::sup_norm;
use conerad::family::Family;
use conerad::inclusion::{exponent_estimate, simulate, Policy};
use conerad::joint::{check_selectable_stability, jsr_bounds, subradius_bounds, StabilityOutcome};
use conerad::norms::{barabanov_norm_eval, extremal_norm_eval, verify_extremal};
use conerad::spectral::cone_spectral_radius;
use conerad::structure::{boundedness_probe, graph_irreducibility, is_irreducible, is_primitive, GrowthClass};
use conerad::words::Letter;
use std::time::Instant;

const BIG: usize = 1_000_000_000;

struct Criterion {
    id: usize,
    failures: Vec<String>,
}

impl Criterion {
    fn new(id: usize) -> Self {
        Criterion { id, failures: Vec::new() }
    }

    fn check(&mut self, ok: bool, detail: &str) {
        if !ok {
            self.failures.push(detail.to_string());
        }
    }

    fn finish(self, summary: &str) {
        if self.failures.is_empty() {
            println!("criterion {}: PASS — {summary}", self.id);
        } else {
            println!("criterion {}: FAIL — {}", self.id, self.failures.join("; "));
            panic!("criterion {} failed: {}", self.id, self.failures.join("; "));
        }
    }
}

#[test]
fn criterion_1_min_counterexample_certificates() {
    let started = Instant::now();
    let mut c = Criterion::new(1);
    let family = fam(EXAMPLE_MIN);

    let report = jsr_bounds(&family, 10, 1e-6, BIG).unwrap();
    c.check(report.lower == 1.0, &format!("lower bound {} != 1 exactly", report.lower));
    c.check(report.lower_word == vec![0], &format!("lower word {:?} is not the first map", report.lower_word));
    c.check(report.lower_vector == vec![1.0, 0.0], &format!("lower vector {:?} is not e1", report.lower_vector));
    for m in 1..=10usize {
        let e = &report.alpha_seq[m - 1];
        c.check(
            e.norm == (m + 1) as f64,
            &format!("alpha_{m} = {} != {} exactly", e.norm, m + 1),
        );
    }

    let probe = boundedness_probe(&family, 12, BIG).unwrap();
    c.check(
        probe.classification == GrowthClass::Growing,
        &format!("probe classified {} instead of growing", probe.classification),
    );

    let (irr, _) = is_irreducible(&family).unwrap();
    let (prim, _) = is_primitive(&family).unwrap();
    c.check(irr, "family reported reducible");
    c.check(!prim, "family reported primitive");

    let elapsed = started.elapsed();
    c.check(elapsed.as_secs_f64() < 5.0, &format!("took {elapsed:?}, budget 5 s"));
    c.finish("lower 1 at (f, e1), alpha_m = m+1 exactly for m <= 10, probe growing, irreducible and imprimitive");
}

#[test]
fn criterion_2_golden_pair_bounds() {
    let started = Instant::now();
    let mut c = Criterion::new(2);
    let family = fam(GOLDEN);
    let phi = 1.618_033_988_749_895f64;

    let short = jsr_bounds(&family, 2, 1e-6, BIG).unwrap();
    c.check(
        short.lower >= 1.618_033_9 - 1e-6,
        &format!("lower {} at length 2 misses the golden mean", short.lower),
    );

    let deep = jsr_bounds(&family, 12, 1e-6, BIG).unwrap();
    c.check(
        deep.upper >= 1.6180 && deep.upper <= 1.70,
        &format!("upper {} outside [1.6180, 1.70]", deep.upper),
    );
    c.check(deep.lower >= phi - 1e-6, &format!("deep lower {} fell below phi", deep.lower));

    // independent oracle: exhaustive alpha_12 over all 4096 words is the
    // Fibonacci number 377, and the reported upper is its 12th root
    let ones = vec![1.0, 1.0];
    let mut alpha12 = 0f64;
    for code in 0..(1u32 << 12) {
        let word: Vec<Letter> = (0..12).map(|b| ((code >> b) & 1) as Letter).collect();
        alpha12 = alpha12.max(sup_norm(&family.apply(&word, &ones).unwrap()));
    }
    c.check(alpha12 == 377.0, &format!("exhaustive alpha_12 = {alpha12} != 377"));
    c.check(
        deep.alpha_seq[11].norm == 377.0,
        &format!("scanned alpha_12 = {} != 377", deep.alpha_seq[11].norm),
    );
    let oracle_root = 377f64.powf(1.0 / 12.0);
    c.check(
        (deep.upper - oracle_root).abs() <= 1e-12 * oracle_root,
        &format!("upper {} != 377^(1/12) = {oracle_root}", deep.upper),
    );

    let elapsed = started.elapsed();
    c.check(elapsed.as_secs_f64() < 30.0, &format!("took {elapsed:?}, budget 30 s"));
    c.finish("lower hits the golden mean at length 2, upper = 377^(1/12) vs exhaustive oracle");
}

#[test]
fn criterion_3_slow_convergence_gap_mechanism() {
    let mut c = Criterion::new(3);

    // lambda = 0.9: radius exactly 1/2; closed-form orbit norms give the
    // bracket trajectory. By 40 iterations the bracket sits in [0.5, 0.60],
    // by 200 in [0.5, 0.52].
    let f9 = topical(0.9);
    let b40 = cone_spectral_radius(f9.map(0), 1e-9, 40).unwrap();
    c.check(
        (b40.lower - 0.5).abs() <= 1e-3,
        &format!("lower {} after 40 iterations is not 0.5", b40.lower),
    );
    c.check(b40.upper <= 0.60, &format!("upper {} after 40 iterations exceeds 0.60", b40.upper));
    c.check(b40.lower >= 0.5 - 1e-12, &format!("lower {} below the true radius", b40.lower));
    let oracle40 = (1..=40).map(|m| topical_power_norm(0.9, m).powf(1.0 / m as f64)).fold(f64::INFINITY, f64::min);
    c.check(
        b40.upper <= oracle40 + 1e-3,
        &format!("upper {} is worse than the closed-form root {oracle40}", b40.upper),
    );

    let b200 = cone_spectral_radius(f9.map(0), 1e-9, 200).unwrap();
    c.check(b200.upper <= 0.52, &format!("upper {} after 200 iterations exceeds 0.52", b200.upper));
    c.check(b200.lower >= 0.5 - 1e-12 && b200.lower <= 0.5 + 1e-3, &format!("lower {} drifted", b200.lower));

    // lambda = 0.999: the same map family member still has radius 1/2, yet
    // the 10th-power norm root sits above 0.99 — the slow-convergence
    // mechanism behind the radius gap of the full family.
    let f999 = topical(0.999);
    let x10 = f999.apply(&[0; 10], &[1.0, 1.0]).unwrap();
    let root10 = sup_norm(&x10).powf(0.1);
    c.check(root10 >= 0.99, &format!("||f^10(1)||^(1/10) = {root10} < 0.99"));
    let closed = topical_power_norm(0.999, 10).powf(0.1);
    c.check(
        (root10 - closed).abs() <= 1e-3,
        &format!("10th root {root10} disagrees with closed form {closed}"),
    );

    c.finish("bracket [0.5, 0.593] by 40 and [0.5, <=0.52] by 200 iterations; lambda=0.999 keeps the 10th root above 0.99");
}

#[test]
fn criterion_4_bounds_converge_on_certified_families() {
    let mut c = Criterion::new(4);
    let mut gen = FamilyGen::new(2024);
    let mut worst_gap = 0f64;
    for _ in 0..50 {
        let family = gen.dense_mixed();
        let report = jsr_bounds(&family, 12, 1e-6, BIG).unwrap();
        let gap = (report.upper - report.lower) / report.upper.max(1.0);
        worst_gap = worst_gap.max(gap);
        c.check(
            gap <= 0.15,
            &format!("gap {gap:.4} > 0.15 (lower {}, upper {})", report.lower, report.upper),
        );
        c.check(
            report.lower <= report.upper * (1.0 + 1e-12),
            &format!("lower {} above upper {}", report.lower, report.upper),
        );
        for g in &report.gamma_seq {
            for a in &report.alpha_seq {
                c.check(
                    g.value <= a.root * (1.0 + 1e-12),
                    &format!("certified lower {} beats depth-{} upper {}", g.value, a.len, a.root),
                );
            }
        }
    }
    c.finish(&format!(
        "50 seeded max-plus/linear families: relative gap <= 0.15 at depth 12 (worst {worst_gap:.4}), lower <= upper at every depth"
    ));
}

#[test]
fn criterion_5_structure_cross_validation() {
    let mut c = Criterion::new(5);

    let mut gen = FamilyGen::new(515);
    let mut graph_sc = 0usize;
    for _ in 0..200 {
        let family = gen.subadditive_sparse();
        let graph = graph_irreducibility(&family);
        let (irr, _) = is_irreducible(&family).unwrap();
        if graph.strongly_connected {
            graph_sc += 1;
        }
        c.check(
            graph.strongly_connected == irr,
            &format!("certified family: graph says {}, face scan says {irr}", graph.strongly_connected),
        );
        let (prim, _) = is_primitive(&family).unwrap();
        c.check(!prim || irr, "primitive family failed the irreducibility test");
    }

    let mut gen2 = FamilyGen::new(525);
    for _ in 0..200 {
        let family = gen2.general_sparse();
        let graph = graph_irreducibility(&family);
        let (irr, _) = is_irreducible(&family).unwrap();
        // one-sided for general maps: singleton transitions underestimate
        c.check(
            !graph.strongly_connected || irr,
            "graph-connected general family has an invariant face",
        );
        let (prim, _) = is_primitive(&family).unwrap();
        c.check(!prim || irr, "primitive general family failed the irreducibility test");
    }

    c.finish(&format!(
        "200 certified families: graph test == face test ({graph_sc} connected); 200 general: graph => face and primitive => irreducible, zero violations"
    ));
}

#[test]
fn criterion_6_normalized_families_never_grow() {
    let mut c = Criterion::new(6);
    let mut gen = FamilyGen::new(606);
    let mut found = 0usize;
    let mut attempts = 0usize;
    while found < 20 && attempts < 500 {
        attempts += 1;
        let family = gen.subadditive_sparse();
        if !is_irreducible(&family).unwrap().0 {
            continue;
        }
        let upper = jsr_bounds(&family, 12, 1e-6, BIG).unwrap().upper;
        if upper <= 0.0 {
            continue;
        }
        found += 1;
        let normalized = family.scaled(1.0 / upper).unwrap();
        let probe = boundedness_probe(&normalized, 12, BIG).unwrap();
        c.check(
            probe.classification != GrowthClass::Growing,
            &format!("normalized family #{found} classified growing: {:?}", probe.alpha_seq),
        );
    }
    c.check(found == 20, &format!("only {found} irreducible families in {attempts} draws"));
    c.finish("20 seeded irreducible certified families, scaled to joint radius 1: probe never says growing");
}

#[test]
fn criterion_7_subradius_and_selectable_stability() {
    let mut c = Criterion::new(7);

    // the two rank-one shuffles: every composition has norm exactly 2
    let gh = fam("dim 2\nmap g = [ 0 ; x1 + x2 ]\nmap h = [ x1 + x2 ; 0 ]");
    let sub = subradius_bounds(&gh, 15, BIG).unwrap();
    for e in &sub.beta_seq {
        c.check(e.norm == 2.0, &format!("beta_{} = {} != 2 exactly", e.len, e.norm));
    }
    let expected = 2f64.powf(1.0 / 15.0);
    c.check(
        (sub.r_star_upper - expected).abs() <= 1e-12 * expected,
        &format!("r* bound {} != 2^(1/15) = {expected}", sub.r_star_upper),
    );

    // scaling by 0.9 makes the family selectably stable; the witness is the
    // second map iterated seven times
    let scaled = fam(EXAMPLE_MIN).scaled(0.9).unwrap();
    match check_selectable_stability(&scaled, 8, BIG).unwrap() {
        StabilityOutcome::Stable { word, norm } => {
            c.check(word == vec![1; 7], &format!("stability witness {word:?} is not g^7"));
            let oracle = 0.9f64.powi(7) * 2.0;
            c.check(
                (norm - oracle).abs() <= 1e-12,
                &format!("witness norm {norm} != 0.9^7 * 2 = {oracle}"),
            );
        }
        StabilityOutcome::Unknown { best_norm, .. } => {
            c.check(false, &format!("no contraction found (best norm {best_norm})"));
        }
    }

    // singleton consistency: the subradius of a one-map family matches the
    // map's own radius bracket
    let single = topical(0.5);
    let sub1 = subradius_bounds(&single, 40, BIG).unwrap();
    let bracket = cone_spectral_radius(single.map(0), 1e-9, 10_000).unwrap();
    let dist = if sub1.r_star_upper < bracket.lower {
        bracket.lower - sub1.r_star_upper
    } else if sub1.r_star_upper > bracket.upper {
        sub1.r_star_upper - bracket.upper
    } else {
        0.0
    };
    c.check(
        dist <= 0.02,
        &format!("singleton r* bound {} sits {dist:.4} outside bracket [{}, {}]", sub1.r_star_upper, bracket.lower, bracket.upper),
    );

    c.finish("beta_m = 2 exactly for m <= 15, 0.9-scaled family stabilized by g^7 with norm 0.9^7*2, singleton subradius matches the radius bracket");
}

#[test]
fn criterion_8_extremal_and_barabanov_norms() {
    let mut c = Criterion::new(8);
    let gh = "dim 2\nmap g = [ 0 ; x1 + x2 ]\nmap h = [ x1 + x2 ; 0 ]";
    let fixtures: Vec<(&str, Family)> = vec![
        ("min-counterexample", fam(EXAMPLE_MIN)),
        ("golden", fam(GOLDEN)),
        ("max-plus pair", fam(MAXPLUS_PAIR)),
        ("topical", topical(0.9)),
        ("shuffles", fam(gh)),
    ];

    // one-step nonexpansiveness of the truncated norms, exact by shared
    // evaluation paths
    for (name, family) in &fixtures {
        for m in [2usize, 5, 8] {
            let worst = verify_extremal(family, m, 25, 99).unwrap();
            c.check(
                worst <= 1e-12,
                &format!("{name}: expansion {worst} under the depth-{m} norm"),
            );
        }
    }

    // dyadic homogeneity is exact for every powf-free fixture
    let mut gen = FamilyGen::new(808);
    for (name, family) in &fixtures {
        let geo = family.classify().contains_geo;
        for _ in 0..6 {
            let x = gen.cone_point(family.dim());
            let x2: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
            let nx = extremal_norm_eval(family, &x, 6, BIG).unwrap().value;
            let nx2 = extremal_norm_eval(family, &x2, 6, BIG).unwrap().value;
            if geo {
                c.check(
                    (nx2 - 2.0 * nx).abs() <= 1e-12 * (1.0 + nx2),
                    &format!("{name}: homogeneity drift {} vs {}", nx2, 2.0 * nx),
                );
            } else {
                c.check(nx2 == 2.0 * nx, &format!("{name}: ||2x|| = {nx2} != 2||x|| = {}", 2.0 * nx));
            }
        }
    }

    // integer scaling on the dyadic max-plus pair is exact too
    let mp = fam(MAXPLUS_PAIR);
    let n1 = extremal_norm_eval(&mp, &[1.0, 2.0], 6, BIG).unwrap().value;
    let n3 = extremal_norm_eval(&mp, &[3.0, 6.0], 6, BIG).unwrap().value;
    c.check(n3 == 3.0 * n1, &format!("||3x|| = {n3} != 3||x|| = {}", 3.0 * n1));

    // triangle inequality on the subadditivity-certified fixtures
    for (name, family) in fixtures.iter().filter(|(_, f)| f.classify().subadditive_certified) {
        for _ in 0..8 {
            let x = gen.cone_point(family.dim());
            let y = gen.cone_point(family.dim());
            let s: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            let nx = extremal_norm_eval(family, &x, 5, BIG).unwrap().value;
            let ny = extremal_norm_eval(family, &y, 5, BIG).unwrap().value;
            let ns = extremal_norm_eval(family, &s, 5, BIG).unwrap().value;
            c.check(
                ns <= (nx + ny) * (1.0 + 1e-9),
                &format!("{name}: ||x+y|| = {ns} > {}", nx + ny),
            );
        }
    }

    // Barabanov residual on the normalized max-plus pair: some map nearly
    // achieves the outer maximum at every probe point
    let upper = jsr_bounds(&mp, 12, 1e-6, BIG).unwrap().upper;
    let normalized = mp.scaled(1.0 / upper).unwrap();
    for x in [[1.0, 2.0], [1.0, 0.25], [0.5, 0.5], [2.0, 0.0]] {
        let bar = barabanov_norm_eval(&normalized, &x, 8, 8, BIG).unwrap();
        let residual = bar.residual.unwrap();
        c.check(
            residual <= 0.05 * bar.value,
            &format!("residual {residual} > 5% of value {} at {x:?}", bar.value),
        );
        // depth-14 truncation sandwiches the two-stage value
        let lo = extremal_norm_eval(&normalized, &x, 8, BIG).unwrap().value;
        let hi = extremal_norm_eval(&normalized, &x, 14, BIG).unwrap().value;
        c.check(
            bar.value >= lo * (1.0 - 1e-12) && bar.value <= hi * (1.0 + 1e-12),
            &format!("barabanov value {} outside truncation sandwich [{lo}, {hi}]", bar.value),
        );
    }

    c.finish("truncated norms certify nonexpansiveness (<= 1e-12), dyadic homogeneity exact, triangle within 1e-9, Barabanov residual <= 5%");
}

#[test]
fn criterion_9_inclusion_simulator() {
    let mut c = Criterion::new(9);

    // periodic second map on the 0.9-scaled family: the norm doubles once
    // per two-cycle of the shuffles... here g alone maps everything onto one
    // axis and the closed form is 0.9 * 2^(1/200) at 200 steps
    let scaled = fam(EXAMPLE_MIN).scaled(0.9).unwrap();
    let t = simulate(&scaled, &Policy::PeriodicWord(vec![1]), 200).unwrap();
    let est = exponent_estimate(&t);
    let oracle = 0.9 * 2f64.powf(1.0 / 200.0);
    c.check(
        (est - oracle).abs() <= 5e-3,
        &format!("periodic-g estimate {est} vs closed form {oracle}"),
    );

    // constant policies on singletons stay inside the widened radius bracket
    let singles: Vec<(&str, Family)> = vec![
        ("topical", topical(0.5)),
        ("shear", Family::new(2, vec![fam(GOLDEN).maps()[0].clone()]).unwrap()),
        ("max-plus", Family::new(2, vec![fam(MAXPLUS_PAIR).maps()[0].clone()]).unwrap()),
    ];
    for (name, family) in &singles {
        let bracket = cone_spectral_radius(family.map(0), 1e-9, 10_000).unwrap();
        let t = simulate(family, &Policy::PeriodicWord(vec![0]), 2000).unwrap();
        let est = exponent_estimate(&t);
        c.check(
            est >= bracket.lower - 0.02 && est <= bracket.upper + 0.02,
            &format!("{name}: estimate {est} outside widened bracket [{}, {}]", bracket.lower, bracket.upper),
        );
    }

    // seeded runs are reproducible bit for bit
    let a = simulate(&scaled, &Policy::RandomUniform(7), 300).unwrap();
    let b = simulate(&scaled, &Policy::RandomUniform(7), 300).unwrap();
    c.check(a == b, "identical seeds produced different trajectories");

    c.finish("periodic-g exponent matches 0.9*2^(1/200) within 5e-3, constant policies land in widened brackets, seeded runs identical");
}
