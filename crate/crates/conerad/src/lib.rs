//! Analysis of finite families of order-preserving, degree-one homogeneous
//! self-maps of the nonnegative cone.
//!
//! The expression grammar in [`expr`] (nonnegative linear combinations,
//! `max`, `min`, and weighted geometric means of coordinates) generates
//! exactly such maps. On top of it this crate provides:
//!
//! - [`spectral`]: two-sided brackets on the cone spectral radius of a single
//!   map (power iteration with Collatz-Wielandt lower certificates and
//!   norm-root / interior-ratio upper certificates);
//! - [`joint`]: joint spectral radius bounds for a family under arbitrary
//!   switching, partial variants seeded from a face, subradius bounds for the
//!   best-case switching problem, and a search for stabilizing words;
//! - [`structure`]: the exact action of maps on supports — invariant faces,
//!   irreducibility, primitivity, a reachability preorder on parts, and a
//!   growth probe;
//! - [`norms`]: finite-horizon extremal and Barabanov-style norms with
//!   achievability diagnostics;
//! - [`inclusion`]: switched trajectories under word, random, and greedy
//!   policies, with Lyapunov exponent estimates;
//! - [`family`]: a small text format for defining families, with a parser
//!   that reports `line:col` positions and a canonical formatter.
//!
//! The command-line entry point in [`cli`] exposes each analysis as a
//! subcommand; the library API is the primary interface and the `examples/`
//! directory shows one end-to-end use of each capability.

pub mod cli;
pub mod expr;
pub mod family;
pub mod inclusion;
pub mod joint;
pub mod norms;
pub mod spectral;
pub mod structure;
pub mod words;

pub use expr::{sup_norm, Classification, EvalError, Expr, ExprError, MapDef, SupportSet};
pub use family::{format_family, parse_family, Family, FamilyError};
pub use inclusion::{exponent_estimate, simulate, Policy, Trajectory};
pub use joint::{
    check_selectable_stability, gsr_lower, jsr_bounds, partial_jsr, subradius_bounds,
    BoundsReport, JointError, StabilityOutcome, SubradiusReport,
};
pub use norms::{barabanov_norm_eval, extremal_norm_eval, verify_extremal, NormEvaluation};
pub use spectral::{
    collatz_wielandt_lower, cone_spectral_radius, map_norm, nth_root, CwWitness, RadiusBracket,
};
pub use structure::{
    boundedness_probe, graph_irreducibility, invariant_faces, is_irreducible, is_primitive,
    part_preorder, GrowthClass, PartPreorder, ProbeReport, StructureError,
};
