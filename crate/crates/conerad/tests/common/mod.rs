//! Fixtures and a seeded family generator shared by the integration tests.
#![allow(dead_code)]

use conerad::family::{parse_family, Family};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Two-dimensional three-map family whose joint radius is exactly 1 while
/// iterates of the first map grow linearly: f doubles the diagonal, g and h
/// shuffle all mass onto one axis.
pub const EXAMPLE_MIN: &str = "\
dim 2
map f = [ x1 + min(x1, x2) ; x2 ]
map g = [ 0 ; x1 + x2 ]
map h = [ x1 + x2 ; 0 ]
";

/// The two elementary Fibonacci shears; alternating them realizes the golden
/// mean squared per period.
pub const GOLDEN: &str = "\
dim 2
map A = [ x1 + x2 ; x2 ]
map B = [ x1 ; x1 + x2 ]
";

/// Irreducible max-plus pair used by the norm tests; every coefficient is
/// dyadic so norm arithmetic stays exact where it can.
pub const MAXPLUS_PAIR: &str = "\
dim 2
map a = [ max(x1, 0.5*x2) ; max(0.75*x1, 0.25*x2) ]
map b = [ max(0.25*x1, x2) ; max(x1, 0.5*x2) ]
";

pub fn fam(src: &str) -> Family {
    parse_family(src).unwrap()
}

/// Weighted-geometric-mean map with a decaying second coordinate. Its radius
/// is 1/2 for every lambda in (0,1), but the power iterates approach it ever
/// more slowly as lambda -> 1: ||f^m(1)|| = 2^(-m + c(1 - lambda^m)) with
/// c = 1/(1-lambda).
pub fn topical(lambda: f64) -> Family {
    let rest = 1.0 - lambda;
    fam(&format!(
        "dim 2\nmap f = [ geo({lambda}: x1, {rest}: x2) ; 0.5*x2 ]"
    ))
}

/// Closed-form sup norm of the m-th iterate of `topical(lambda)` at 1.
pub fn topical_power_norm(lambda: f64, m: u32) -> f64 {
    let c = 1.0 / (1.0 - lambda);
    2f64.powf(-(m as f64) + c * (1.0 - lambda.powi(m as i32)))
}

const COEFFS: [f64; 7] = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0];

/// Deterministic random-family source. Every draw is a valid family text that
/// parses; callers pick the flavor that matches the population they need.
pub struct FamilyGen {
    rng: ChaCha8Rng,
}

impl FamilyGen {
    pub fn new(seed: u64) -> Self {
        FamilyGen { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    fn coeff(&mut self) -> f64 {
        COEFFS[self.rng.gen_range(0..COEFFS.len())]
    }

    fn scaled_var(&mut self, n: usize) -> String {
        let j = self.rng.gen_range(1..=n);
        let c = self.coeff();
        if c == 1.0 {
            format!("x{j}")
        } else {
            format!("{c}*x{j}")
        }
    }

    fn linear_combo(&mut self, n: usize) -> String {
        let mut terms = Vec::new();
        for j in 1..=n {
            if self.rng.gen_bool(0.5) {
                let c = self.coeff();
                terms.push(if c == 1.0 { format!("x{j}") } else { format!("{c}*x{j}") });
            }
        }
        if terms.is_empty() {
            return self.scaled_var(n);
        }
        terms.join(" + ")
    }

    fn nary(&mut self, op: &str, n: usize) -> String {
        let k = self.rng.gen_range(2..=3.min(n.max(2)));
        let args: Vec<String> = (0..k).map(|_| self.scaled_var(n)).collect();
        format!("{op}({})", args.join(", "))
    }

    fn geo_pair(&mut self, n: usize) -> String {
        let i = self.rng.gen_range(1..=n);
        let mut j = self.rng.gen_range(1..=n);
        if j == i {
            j = i % n + 1;
        }
        let (wa, wb) = if self.rng.gen_bool(0.5) { (0.5, 0.5) } else { (0.25, 0.75) };
        format!("geo({wa}: x{i}, {wb}: x{j})")
    }

    fn coordinate(&mut self, n: usize, allow_min_geo: bool) -> String {
        let roll: f64 = self.rng.gen();
        if allow_min_geo {
            match roll {
                r if r < 0.08 => "0".to_string(),
                r if r < 0.40 => self.linear_combo(n),
                r if r < 0.58 => self.nary("max", n),
                r if r < 0.74 => self.nary("min", n),
                r if r < 0.86 => self.geo_pair(n),
                _ => format!("{} + {}", self.scaled_var(n), self.nary("min", n)),
            }
        } else {
            match roll {
                r if r < 0.10 => "0".to_string(),
                r if r < 0.60 => self.linear_combo(n),
                r if r < 0.85 => self.nary("max", n),
                _ => format!("{} + {}", self.scaled_var(n), self.nary("max", n)),
            }
        }
    }

    fn assemble(&mut self, n: usize, k: usize, allow_min_geo: bool) -> Family {
        let mut src = format!("dim {n}\n");
        for m in 0..k {
            let coords: Vec<String> =
                (0..n).map(|_| self.coordinate(n, allow_min_geo)).collect();
            src.push_str(&format!("map m{m} = [ {} ]\n", coords.join(" ; ")));
        }
        parse_family(&src).unwrap()
    }

    /// Sparse subadditive-certified family (sums and maxes only; zero
    /// coordinates allowed, so reducible shapes occur).
    pub fn subadditive_sparse(&mut self) -> Family {
        let n = self.rng.gen_range(2..=4);
        let k = self.rng.gen_range(1..=3);
        self.assemble(n, k, false)
    }

    /// Sparse general family (min and geo allowed).
    pub fn general_sparse(&mut self) -> Family {
        let n = self.rng.gen_range(2..=4);
        let k = self.rng.gen_range(1..=3);
        self.assemble(n, k, true)
    }

    /// Dense family with every coordinate positive everywhere: each map is
    /// either a full nonnegative-linear matrix or a full max-plus matrix.
    /// Positivity makes these irreducible (even primitive) by construction.
    pub fn dense_mixed(&mut self) -> Family {
        let n = self.rng.gen_range(2..=4);
        let k = self.rng.gen_range(1..=3);
        let mut src = format!("dim {n}\n");
        for m in 0..k {
            let maxplus = self.rng.gen_bool(0.5);
            let mut coords = Vec::new();
            for _ in 0..n {
                let terms: Vec<String> = (1..=n)
                    .map(|j| {
                        let c = self.coeff();
                        if c == 1.0 { format!("x{j}") } else { format!("{c}*x{j}") }
                    })
                    .collect();
                coords.push(if maxplus {
                    format!("max({})", terms.join(", "))
                } else {
                    terms.join(" + ")
                });
            }
            src.push_str(&format!("map m{m} = [ {} ]\n", coords.join(" ; ")));
        }
        parse_family(&src).unwrap()
    }

    /// Nonnegative vector with entries in [0, 2); occasional exact zeros.
    pub fn cone_point(&mut self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|_| if self.rng.gen_bool(0.15) { 0.0 } else { 2.0 * self.rng.gen::<f64>() })
            .collect()
    }
}
