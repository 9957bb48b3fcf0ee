//! Command-line front end: parse a family file, dispatch one analysis, and
//! emit a human-readable report plus (optionally) one machine-readable JSON
//! object on standard output.
//!
//! Exit codes: 0 success; 1 usage error; 2 parse/semantic error in the
//! family file (or a runtime overflow traced to its values); 3 numeric
//! non-convergence under `--strict`; 4 budget exhaustion under `--strict`.
//! Without `--strict` the situations behind 3 and 4 exit 0 with the
//! corresponding flags set in the report.

use crate::expr::{EvalError, SupportSet};
use crate::family::{parse_family, Family};
use crate::inclusion::{exponent_estimate, simulate, Policy};
use crate::joint::{
    check_selectable_stability, jsr_bounds, partial_jsr, subradius_bounds, BoundsReport,
    GammaEntry, JointError, NormRootEntry, StabilityOutcome, SubradiusReport,
};
use crate::norms::{barabanov_norm_eval, extremal_norm_eval, NormEvaluation};
use crate::spectral::cone_spectral_radius;
use crate::structure::{
    boundedness_probe, graph_irreducibility, invariant_faces, is_irreducible, is_primitive,
    part_preorder, ProbeReport,
};
use crate::words::Letter;
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};
use std::fmt::Write as _;
use std::io::Write;
use std::time::Instant;

#[derive(Parser, Debug)]
#[command(name = "conerad", version, disable_help_subcommand = true)]
#[command(about = "Spectral radii, structure, and stability of monotone cone-map families")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Maximum word length for joint analyses.
    #[arg(long, global = true, default_value_t = 12)]
    max_len: usize,
    /// Convergence tolerance for brackets.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    /// Evaluation budget for joint analyses.
    #[arg(long, global = true, default_value_t = 5_000_000)]
    budget: usize,
    /// Iteration cap for single-map radius brackets.
    #[arg(long, global = true, default_value_t = 10_000)]
    max_iter: usize,
    /// Pre-multiply every map by this factor before analysis.
    #[arg(long, global = true)]
    scale: Option<f64>,
    /// Emit one JSON object on stdout (human report moves to stderr).
    #[arg(long, global = true)]
    json: bool,
    /// Seed for seeded operations (random policy without an explicit seed).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Exit nonzero on non-convergence (3) or budget exhaustion (4).
    #[arg(long, global = true)]
    strict: bool,
    /// Cap the worker-thread count (default: hardware parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Two-sided spectral-radius bracket for one named map.
    Radius {
        file: String,
        #[arg(long)]
        map: String,
    },
    /// Joint-spectral-radius bounds with certificates.
    Jsr { file: String },
    /// Joint bounds seeded from a face (comma-separated 1-based indices).
    Partial {
        file: String,
        #[arg(long)]
        support: String,
    },
    /// Subradius upper bound from per-length minimal norms.
    Subradius { file: String },
    /// Search for a contracting switching word.
    Stability { file: String },
    /// Faces, irreducibility, primitivity, and the part preorder.
    Structure { file: String },
    /// Truncated extremal norm of a vector.
    Norm {
        file: String,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, default_value_t = 8)]
        level: usize,
    },
    /// Truncated Barabanov norm of a vector.
    Barabanov {
        file: String,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, default_value_t = 6)]
        outer: usize,
        #[arg(long, default_value_t = 6)]
        inner: usize,
    },
    /// Simulate the switched inclusion and estimate its exponent.
    Simulate {
        file: String,
        #[arg(long)]
        policy: String,
        #[arg(long, default_value_t = 200)]
        steps: usize,
    },
    /// Boundedness probe over word lengths.
    Probe {
        file: String,
        #[arg(long, default_value_t = 12)]
        depth: usize,
    },
}

impl Cmd {
    fn file(&self) -> &str {
        match self {
            Cmd::Radius { file, .. }
            | Cmd::Jsr { file }
            | Cmd::Partial { file, .. }
            | Cmd::Subradius { file }
            | Cmd::Stability { file }
            | Cmd::Structure { file }
            | Cmd::Norm { file, .. }
            | Cmd::Barabanov { file, .. }
            | Cmd::Simulate { file, .. }
            | Cmd::Probe { file, .. } => file,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Cmd::Radius { .. } => "radius",
            Cmd::Jsr { .. } => "jsr",
            Cmd::Partial { .. } => "partial",
            Cmd::Subradius { .. } => "subradius",
            Cmd::Stability { .. } => "stability",
            Cmd::Structure { .. } => "structure",
            Cmd::Norm { .. } => "norm",
            Cmd::Barabanov { .. } => "barabanov",
            Cmd::Simulate { .. } => "simulate",
            Cmd::Probe { .. } => "probe",
        }
    }
}

#[derive(Debug)]
enum Failure {
    /// Exit 1: bad invocation (flags, names, malformed vectors, io).
    Usage(String),
    /// Exit 2: the family file is at fault (parse/semantic/overflow).
    Family(String),
}

struct CmdResult {
    payload: Map<String, Value>,
    human: String,
    budget_exceeded: bool,
    unconverged: bool,
}

/// Entry point used by the binary.
pub fn run<I>(argv: I) -> i32
where
    I: IntoIterator<Item = String>,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with_writers(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Full CLI with injectable streams (what the binary and the tests share).
pub fn run_with_writers<I>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = String>,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    1
                }
            };
        }
    };

    let started = Instant::now();
    let mut digest = Value::Null;
    let outcome = match load_family(&cli) {
        Ok(family) => {
            digest = family_digest(&family);
            match cli.threads {
                Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
                    Ok(pool) => pool.install(|| dispatch(&cli, &family)),
                    Err(e) => Err(Failure::Usage(format!("cannot build thread pool: {e}"))),
                },
                None => dispatch(&cli, &family),
            }
        }
        Err(f) => Err(f),
    };

    match outcome {
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
        Err(Failure::Family(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Ok(result) => {
            let code = if cli.strict && result.budget_exceeded {
                4
            } else if cli.strict && result.unconverged {
                3
            } else {
                0
            };
            let human = &result.human;
            if cli.json {
                let mut root = Map::new();
                root.insert("command".into(), Value::String(cli.command.name().into()));
                root.insert("file".into(), Value::String(cli.command.file().into()));
                root.insert("family".into(), digest);
                root.insert("scale".into(), cli.scale.map_or(Value::Null, num));
                root.insert("budget_exceeded".into(), Value::Bool(result.budget_exceeded));
                root.insert("unconverged".into(), Value::Bool(result.unconverged));
                root.insert(
                    "wall_time_ms".into(),
                    num(started.elapsed().as_secs_f64() * 1e3),
                );
                for (k, v) in result.payload {
                    root.insert(k, v);
                }
                let _ = writeln!(out, "{}", Value::Object(root));
                let _ = write!(err, "{human}");
            } else {
                let _ = write!(out, "{human}");
            }
            code
        }
    }
}

fn load_family(cli: &Cli) -> Result<Family, Failure> {
    let path = cli.command.file();
    let src = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {path}: {e}")))?;
    let family = parse_family(&src).map_err(|e| Failure::Family(format!("{path}:{e}")))?;
    match cli.scale {
        None => Ok(family),
        Some(c) if c.is_finite() && c > 0.0 => family
            .scaled(c)
            .map_err(|e| Failure::Family(format!("{path}: cannot scale family: {e}"))),
        Some(c) => Err(Failure::Usage(format!("--scale must be positive and finite, got {c}"))),
    }
}

fn dispatch(cli: &Cli, family: &Family) -> Result<CmdResult, Failure> {
    match &cli.command {
        Cmd::Radius { map, .. } => radius_cmd(cli, family, map),
        Cmd::Jsr { .. } => jsr_cmd(cli, family),
        Cmd::Partial { support, .. } => partial_cmd(cli, family, support),
        Cmd::Subradius { .. } => subradius_cmd(cli, family),
        Cmd::Stability { .. } => stability_cmd(cli, family),
        Cmd::Structure { .. } => structure_cmd(family),
        Cmd::Norm { x, level, .. } => norm_cmd(cli, family, x, *level),
        Cmd::Barabanov { x, outer, inner, .. } => barabanov_cmd(cli, family, x, *outer, *inner),
        Cmd::Simulate { policy, steps, .. } => simulate_cmd(cli, family, policy, *steps),
        Cmd::Probe { depth, .. } => probe_cmd(cli, family, *depth),
    }
}

// ---------------------------------------------------------------------------
// Command handlers
// ---------------------------------------------------------------------------

fn radius_cmd(cli: &Cli, family: &Family, map_name: &str) -> Result<CmdResult, Failure> {
    let idx = family.map_index(map_name).ok_or_else(|| {
        let names: Vec<&str> = family.maps().iter().map(|m| m.name.as_str()).collect();
        Failure::Usage(format!(
            "unknown map '{map_name}'; family defines: {}",
            names.join(", ")
        ))
    })?;
    let bracket = cone_spectral_radius(family.map(idx), cli.tol, cli.max_iter)
        .map_err(eval_failure)?;
    let mut payload = Map::new();
    payload.insert("map".into(), Value::String(map_name.into()));
    payload.insert("lower".into(), num(bracket.lower));
    payload.insert("upper".into(), num(bracket.upper));
    payload.insert("upper_power".into(), json!(bracket.upper_power));
    payload.insert("iterations_used".into(), json!(bracket.iterations_used));
    payload.insert("converged".into(), Value::Bool(bracket.converged));
    payload.insert(
        "lower_witness".into(),
        json!({ "alpha": fnum(bracket.lower_witness.alpha), "vector": fvec(&bracket.lower_witness.vector) }),
    );

    let mut human = String::new();
    let _ = writeln!(
        human,
        "radius of {map_name}: [{}, {}] after {} iterations ({})",
        bracket.lower,
        bracket.upper,
        bracket.iterations_used,
        if bracket.converged { "converged" } else { "not converged" }
    );
    let _ = writeln!(
        human,
        "  lower certificate: alpha {} at {:?}; upper from power {}",
        bracket.lower_witness.alpha, bracket.lower_witness.vector, bracket.upper_power
    );
    Ok(CmdResult { payload, human, budget_exceeded: false, unconverged: !bracket.converged })
}

fn bounds_payload(family: &Family, r: &BoundsReport) -> Map<String, Value> {
    let mut payload = Map::new();
    payload.insert("lower".into(), num(r.lower));
    payload.insert("upper".into(), num(r.upper));
    payload.insert("lower_word".into(), word_value(family, &r.lower_word));
    payload.insert("lower_vector".into(), fvec(&r.lower_vector));
    payload.insert("upper_m".into(), json!(r.upper_m));
    payload.insert("alpha_seq".into(), seq_value(&r.alpha_seq));
    payload.insert("gamma_seq".into(), gamma_value(&r.gamma_seq));
    payload.insert("pruned_count".into(), json!(r.pruned_count));
    payload.insert("visited_count".into(), json!(r.visited_count));
    payload.insert("converged".into(), Value::Bool(r.converged));
    payload
}

fn bounds_human(title: &str, family: &Family, r: &BoundsReport) -> String {
    let mut human = String::new();
    let _ = writeln!(human, "{title} over words of length <= {}", r.alpha_seq.len());
    let _ = writeln!(
        human,
        "  lower {} (word \"{}\", vector {:?})",
        r.lower,
        family.word_names(&r.lower_word),
        r.lower_vector
    );
    let _ = writeln!(human, "  upper {} at length {}", r.upper, r.upper_m);
    for e in &r.alpha_seq {
        let _ = writeln!(human, "  alpha m={} norm={} root={}", e.len, e.norm, e.root);
    }
    for g in &r.gamma_seq {
        let _ = writeln!(human, "  gamma m={} lower={}", g.len, g.value);
    }
    let _ = writeln!(
        human,
        "  visited {}, pruned {}, converged: {}",
        r.visited_count, r.pruned_count, r.converged
    );
    human
}

fn jsr_cmd(cli: &Cli, family: &Family) -> Result<CmdResult, Failure> {
    let (report, budget_exceeded) =
        unwrap_budget(jsr_bounds(family, cli.max_len, cli.tol, cli.budget))?;
    let mut payload = bounds_payload(family, &report);
    payload.insert(
        "gsr_lower".into(),
        json!({
            "value": fnum(report.lower),
            "word": word_value(family, &report.lower_word),
            "vector": fvec(&report.lower_vector),
        }),
    );
    let mut human = bounds_human("jsr bounds", family, &report);
    if budget_exceeded {
        let _ = writeln!(human, "  budget exceeded; results are a sound partial view");
    }
    Ok(CmdResult { payload, human, budget_exceeded, unconverged: !report.converged })
}

fn partial_cmd(cli: &Cli, family: &Family, support: &str) -> Result<CmdResult, Failure> {
    let j = parse_support(support, family.dim())?;
    let (report, budget_exceeded) =
        unwrap_budget(partial_jsr(family, j, cli.max_len, cli.tol, cli.budget))?;
    let mut payload = bounds_payload(family, &report);
    payload.insert("support".into(), json!(j.indices()));
    let mut human = String::new();
    let _ = writeln!(human, "face-seeded bounds from support {j}");
    human.push_str(&bounds_human("partial jsr", family, &report));
    if budget_exceeded {
        let _ = writeln!(human, "  budget exceeded; results are a sound partial view");
    }
    Ok(CmdResult { payload, human, budget_exceeded, unconverged: !report.converged })
}

fn subradius_cmd(cli: &Cli, family: &Family) -> Result<CmdResult, Failure> {
    let (report, budget_exceeded) =
        unwrap_budget(subradius_bounds(family, cli.max_len, cli.budget))?;
    let SubradiusReport {
        r_star_upper,
        beta_seq,
        gamma_seq,
        best_word,
        pruned_count,
        visited_count,
    } = &report;
    let mut payload = Map::new();
    payload.insert("r_star_upper".into(), num(*r_star_upper));
    payload.insert("best_word".into(), word_value(family, best_word));
    payload.insert("beta_seq".into(), seq_value(beta_seq));
    payload.insert("gamma_seq".into(), gamma_value(gamma_seq));
    payload.insert("pruned_count".into(), json!(pruned_count));
    payload.insert("visited_count".into(), json!(visited_count));

    let mut human = String::new();
    let _ = writeln!(
        human,
        "subradius upper bound {} (word \"{}\")",
        r_star_upper,
        family.word_names(best_word)
    );
    for e in beta_seq {
        let _ = writeln!(human, "  beta m={} norm={} root={}", e.len, e.norm, e.root);
    }
    for g in gamma_seq {
        let _ = writeln!(human, "  gamma m={} radius-estimate={}", g.len, g.value);
    }
    let _ = writeln!(human, "  visited {}, pruned {}", visited_count, pruned_count);
    Ok(CmdResult { payload, human, budget_exceeded, unconverged: false })
}

fn stability_cmd(cli: &Cli, family: &Family) -> Result<CmdResult, Failure> {
    let (outcome, budget_exceeded) =
        unwrap_budget(check_selectable_stability(family, cli.max_len, cli.budget))?;
    let mut payload = Map::new();
    let mut human = String::new();
    match &outcome {
        StabilityOutcome::Stable { word, norm } => {
            payload.insert("outcome".into(), Value::String("stable".into()));
            payload.insert("word".into(), word_value(family, word));
            payload.insert("norm".into(), num(*norm));
            let _ = writeln!(
                human,
                "stable: word \"{}\" contracts with norm {}",
                family.word_names(word),
                norm
            );
        }
        StabilityOutcome::Unknown { best_norm, best_word } => {
            payload.insert("outcome".into(), Value::String("unknown".into()));
            payload.insert("best_norm".into(), num(*best_norm));
            payload.insert("best_word".into(), word_value(family, best_word));
            let _ = writeln!(
                human,
                "no contracting word up to length {}; best norm {} (word \"{}\")",
                cli.max_len,
                best_norm,
                family.word_names(best_word)
            );
        }
    }
    if budget_exceeded {
        let _ = writeln!(human, "  budget exceeded before the search finished");
    }
    Ok(CmdResult { payload, human, budget_exceeded, unconverged: false })
}

fn structure_cmd(family: &Family) -> Result<CmdResult, Failure> {
    let mut payload = Map::new();
    let mut human = String::new();

    let graph = graph_irreducibility(family);
    payload.insert(
        "graph".into(),
        json!({
            "strongly_connected": graph.strongly_connected,
            "edges": graph.edges.iter().map(|&(i, j)| json!([i, j])).collect::<Vec<_>>(),
        }),
    );
    let _ = writeln!(
        human,
        "graph: strongly connected = {}, {} edges",
        graph.strongly_connected,
        graph.edges.len()
    );

    match invariant_faces(family) {
        Ok(faces) => {
            payload.insert(
                "invariant_faces".into(),
                Value::Array(faces.iter().map(|f| json!(f.indices())).collect()),
            );
            let (irr, witness) = is_irreducible(family).expect("cap already checked");
            payload.insert("irreducible".into(), Value::Bool(irr));
            payload.insert(
                "irreducible_witness".into(),
                witness.map_or(Value::Null, |w| json!(w.indices())),
            );
            let _ = writeln!(human, "irreducible = {irr}");
            if let Some(w) = witness {
                let _ = writeln!(human, "  invariant face witness {w}");
            }
        }
        Err(e) => {
            payload.insert("invariant_faces".into(), Value::Null);
            payload.insert("irreducible".into(), Value::Null);
            payload.insert("structure_note".into(), Value::String(e.to_string()));
            let _ = writeln!(human, "face scan skipped: {e}");
        }
    }

    match is_primitive(family) {
        Ok((prim, witness)) => {
            payload.insert("primitive".into(), Value::Bool(prim));
            payload.insert(
                "primitive_witness".into(),
                witness.map_or(Value::Null, |w| json!(w.indices())),
            );
            let _ = writeln!(human, "primitive = {prim}");
            if let Some(w) = witness {
                let _ = writeln!(human, "  stranded support witness {w}");
            }
        }
        Err(e) => {
            payload.insert("primitive".into(), Value::Null);
            let _ = writeln!(human, "primitivity scan skipped: {e}");
        }
    }

    let n = family.dim();
    if n <= 16 {
        match part_preorder(family) {
            Ok(preorder) if n <= 8 => {
                let count = (1u64 << n) - 1;
                let mut equivalent_pairs = 0usize;
                let mut strict_pairs = 0usize;
                for a in 1..=count {
                    for b in 1..=count {
                        if a == b {
                            continue;
                        }
                        let (ja, jb) = (SupportSet::from_bits(a), SupportSet::from_bits(b));
                        if preorder.equivalent(ja, jb) {
                            equivalent_pairs += 1;
                        } else if preorder.strict_gt(ja, jb) {
                            strict_pairs += 1;
                        }
                    }
                }
                payload.insert(
                    "part_preorder".into(),
                    json!({
                        "equivalent_pairs": equivalent_pairs,
                        "strict_pairs": strict_pairs,
                    }),
                );
                let _ = writeln!(
                    human,
                    "part preorder: {equivalent_pairs} equivalent ordered pairs, {strict_pairs} strict"
                );
            }
            Ok(_) => {
                payload.insert(
                    "part_preorder".into(),
                    json!({ "note": "computed; pair table omitted for n > 8" }),
                );
                let _ = writeln!(human, "part preorder computed (table omitted for n > 8)");
            }
            Err(e) => {
                payload.insert("part_preorder".into(), Value::Null);
                let _ = writeln!(human, "part preorder skipped: {e}");
            }
        }
    } else {
        payload.insert("part_preorder".into(), Value::Null);
        let _ = writeln!(human, "part preorder skipped: dimension {n} exceeds 16");
    }

    Ok(CmdResult { payload, human, budget_exceeded: false, unconverged: false })
}

fn norm_payload(family: &Family, e: &NormEvaluation) -> Map<String, Value> {
    let mut payload = Map::new();
    payload.insert("value".into(), num(e.value));
    payload.insert(
        "level_values".into(),
        Value::Array(e.level_values.iter().map(|&(m, v)| json!([m, fnum(v)])).collect()),
    );
    payload.insert("achieving_word".into(), word_value(family, &e.achieving_word));
    payload.insert("diverging".into(), Value::Bool(e.diverging));
    if let Some(a) = e.achieving_map {
        payload.insert("achieving_map".into(), Value::String(family.map(a).name.clone()));
    }
    if let Some(r) = e.residual {
        payload.insert("residual".into(), num(r));
    }
    payload
}

fn norm_human(title: &str, family: &Family, e: &NormEvaluation) -> String {
    let mut human = String::new();
    let _ = writeln!(
        human,
        "{title} = {} (word \"{}\"){}",
        e.value,
        family.word_names(&e.achieving_word),
        if e.diverging { " — DIVERGING levels" } else { "" }
    );
    for (m, v) in &e.level_values {
        let _ = writeln!(human, "  level {m}: {v}");
    }
    if let Some(a) = e.achieving_map {
        let _ = writeln!(
            human,
            "  achieving map {} (residual {})",
            family.map(a).name,
            e.residual.unwrap_or(f64::NAN)
        );
    }
    human
}

fn norm_cmd(cli: &Cli, family: &Family, x: &str, level: usize) -> Result<CmdResult, Failure> {
    let x = parse_vector(x, family.dim())?;
    let (eval, budget_exceeded) =
        unwrap_budget(extremal_norm_eval(family, &x, level, cli.budget))?;
    let payload = norm_payload(family, &eval);
    let human = norm_human("extremal norm", family, &eval);
    Ok(CmdResult { payload, human, budget_exceeded, unconverged: eval.diverging })
}

fn barabanov_cmd(
    cli: &Cli,
    family: &Family,
    x: &str,
    outer: usize,
    inner: usize,
) -> Result<CmdResult, Failure> {
    let x = parse_vector(x, family.dim())?;
    let (eval, budget_exceeded) =
        unwrap_budget(barabanov_norm_eval(family, &x, outer, inner, cli.budget))?;
    let payload = norm_payload(family, &eval);
    let human = norm_human("barabanov norm", family, &eval);
    Ok(CmdResult { payload, human, budget_exceeded, unconverged: eval.diverging })
}

fn simulate_cmd(
    cli: &Cli,
    family: &Family,
    policy: &str,
    steps: usize,
) -> Result<CmdResult, Failure> {
    if steps == 0 {
        return Err(Failure::Usage("--steps must be at least 1".into()));
    }
    let parsed = parse_policy(policy, family, cli.seed)?;
    let trajectory = simulate(family, &parsed, steps).map_err(eval_failure)?;
    let estimate = exponent_estimate(&trajectory);
    let mut payload = Map::new();
    payload.insert("policy".into(), Value::String(policy.into()));
    payload.insert("steps".into(), json!(steps));
    payload.insert("estimate".into(), num(estimate));
    payload.insert("absorbed_at_zero".into(), Value::Bool(trajectory.absorbed_at_zero));
    payload.insert("chosen".into(), json!(trajectory.chosen));
    payload.insert("log_norms".into(), fvec(&trajectory.log_norms));
    payload.insert("exponents".into(), fvec(&trajectory.exponents));
    payload.insert(
        "final_state".into(),
        fvec(trajectory.states.last().map_or(&[][..], |s| &s[..])),
    );

    let mut human = String::new();
    let _ = writeln!(
        human,
        "simulated {} steps under policy {policy}: exponent estimate {}",
        trajectory.exponents.len(),
        estimate
    );
    if trajectory.absorbed_at_zero {
        let _ = writeln!(human, "  trajectory absorbed at zero");
    }
    if let Some(last) = trajectory.exponents.last() {
        let _ = writeln!(human, "  final per-step estimate {last}");
    }
    Ok(CmdResult { payload, human, budget_exceeded: false, unconverged: false })
}

fn probe_cmd(cli: &Cli, family: &Family, depth: usize) -> Result<CmdResult, Failure> {
    if depth == 0 {
        return Err(Failure::Usage("--depth must be at least 1".into()));
    }
    let (report, budget_exceeded) =
        unwrap_budget(boundedness_probe(family, depth, cli.budget))?;
    let ProbeReport { alpha_seq, classification, pruned_count, visited_count } = &report;
    let mut payload = Map::new();
    payload.insert("classification".into(), Value::String(classification.to_string()));
    payload.insert("alpha_seq".into(), seq_value(alpha_seq));
    payload.insert("pruned_count".into(), json!(pruned_count));
    payload.insert("visited_count".into(), json!(visited_count));

    let mut human = String::new();
    let _ = writeln!(human, "boundedness probe to depth {depth}: {classification}");
    for e in alpha_seq {
        let _ = writeln!(human, "  alpha m={} norm={} root={}", e.len, e.norm, e.root);
    }
    Ok(CmdResult { payload, human, budget_exceeded, unconverged: false })
}

// ---------------------------------------------------------------------------
// Helpers
// ---------------------------------------------------------------------------

fn family_digest(family: &Family) -> Value {
    let c = family.classify();
    json!({
        "dim": family.dim(),
        "maps": family.maps().iter().map(|m| m.name.clone()).collect::<Vec<_>>(),
        "subadditive_certified": c.subadditive_certified,
        "contains_min": c.contains_min,
        "contains_geo": c.contains_geo,
    })
}

/// JSON number; non-finite values become null (JSON has no inf/nan).
fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn fnum(x: f64) -> Value {
    num(x)
}

fn fvec(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

fn word_value(family: &Family, word: &[Letter]) -> Value {
    Value::Array(
        word.iter()
            .map(|&a| Value::String(family.map(a as usize).name.clone()))
            .collect(),
    )
}

fn seq_value(seq: &[NormRootEntry]) -> Value {
    Value::Array(
        seq.iter()
            .map(|e| json!({ "len": e.len, "norm": fnum(e.norm), "root": fnum(e.root) }))
            .collect(),
    )
}

fn gamma_value(seq: &[GammaEntry]) -> Value {
    Value::Array(
        seq.iter()
            .map(|g| json!({ "len": g.len, "value": fnum(g.value) }))
            .collect(),
    )
}

fn eval_failure(e: EvalError) -> Failure {
    Failure::Family(format!("evaluation failed: {e}"))
}

/// Budget exhaustion is a flagged partial result, not a failure.
fn unwrap_budget<T>(r: Result<T, JointError<T>>) -> Result<(T, bool), Failure> {
    match r {
        Ok(v) => Ok((v, false)),
        Err(JointError::Budget { partial }) => Ok((*partial, true)),
        Err(JointError::Eval(e)) => Err(eval_failure(e)),
    }
}

fn parse_support(s: &str, n: usize) -> Result<SupportSet, Failure> {
    let mut indices = Vec::new();
    for part in s.split(',') {
        let i: usize = part
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("bad support index '{}'", part.trim())))?;
        if i == 0 || i > n {
            return Err(Failure::Usage(format!(
                "support index {i} out of range for dimension {n}"
            )));
        }
        indices.push(i);
    }
    if indices.is_empty() {
        return Err(Failure::Usage("support must list at least one index".into()));
    }
    Ok(SupportSet::from_indices(indices))
}

fn parse_vector(s: &str, n: usize) -> Result<Vec<f64>, Failure> {
    let xs: Result<Vec<f64>, _> = s.split(',').map(|p| p.trim().parse::<f64>()).collect();
    let xs = xs.map_err(|_| Failure::Usage(format!("bad vector '{s}'")))?;
    if xs.len() != n {
        return Err(Failure::Usage(format!(
            "vector has {} entries, family dimension is {n}",
            xs.len()
        )));
    }
    Ok(xs)
}

fn parse_policy(s: &str, family: &Family, default_seed: u64) -> Result<Policy, Failure> {
    if let Some(names) = s.strip_prefix("periodic:") {
        let mut word = Vec::new();
        for name in names.split(',') {
            let name = name.trim();
            let idx = family.map_index(name).ok_or_else(|| {
                Failure::Usage(format!("policy names unknown map '{name}'"))
            })?;
            word.push(idx as Letter);
        }
        if word.is_empty() {
            return Err(Failure::Usage("periodic policy needs at least one map".into()));
        }
        return Ok(Policy::PeriodicWord(word));
    }
    match s {
        "random" => Ok(Policy::RandomUniform(default_seed)),
        "greedy-max" => Ok(Policy::GreedyMaxNorm),
        "greedy-min" => Ok(Policy::GreedyMinNorm),
        _ => {
            if let Some(seed) = s.strip_prefix("random:") {
                let seed: u64 = seed
                    .parse()
                    .map_err(|_| Failure::Usage(format!("bad random seed '{seed}'")))?;
                Ok(Policy::RandomUniform(seed))
            } else {
                Err(Failure::Usage(format!(
                    "unknown policy '{s}' (expected periodic:NAME[,NAME...], random[:SEED], greedy-max, greedy-min)"
                )))
            }
        }
    }
}
