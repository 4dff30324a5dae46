//! Toolkit for bipartite nonsignaling boxes with two binary inputs and two
//! binary outputs per party.
//!
//! The central object is [`NsBox`], a validated 4x4 table of conditional
//! joint probabilities P(a,b|x,y). On top of it the crate provides
//!
//! * exact constructors for the named box families (PR, deterministic,
//!   Mermin, classically-correlated, Tsirelson, isotropic mixtures),
//! * the Bell/Mermin function families and the two discord-style measures
//!   built from them,
//! * convex decompositions over the 24 polytope vertices, the canonical
//!   2-term and 3-term decompositions, and membership tests for the named
//!   subpolytopes,
//! * two-qubit states in Bloch form with Born-rule box generation and the
//!   measurement-direction presets used by the closed-form results.
//!
//! All operations are pure functions over immutable values and are safe to
//! use from any number of threads.

// Dense 2x2/3x3/4x4 kernels read best with explicit indices.
#![allow(clippy::needless_range_loop)]

pub mod box_core;
pub mod catalog;
pub mod decompose;
pub mod families;
mod lp;
pub mod measures;
pub mod quantum;

pub use box_core::{mix, swap_parties, BoxError, Correlators, Lro, NsBox, PartyLro};
pub use catalog::{
    cc_box, det_box, isotropic_mermin, isotropic_pr, mermin_box_mm, mermin_box_nmm, pr_box,
    tsirelson_box, white_noise, DetIndex, MerminFamily, PrIndex,
};
pub use decompose::{
    canonical2, canonical3, is_local, membership, reduce_pr_mixture, sample_ns_box,
    vertex_weights, Decomposition2, Decomposition3, MembershipReport, PrMixtureReduction, Region,
    SampleMode, VertexWeights,
};
pub use measures::{
    bell_discord, bell_functions, bell_monogamy_residuals, chsh_violation, gq_monogamy_residual,
    measure_report, mermin_discord, mermin_functions, steering_value, BellFunctions, ChshReport,
    DiscordReport, MeasureReport, MerminFunctions, SteeringReport,
};
pub use quantum::{
    born_box, cq_state, factorizes, me_mixture, preset_settings, psi_plus_cc_mixture, qc_state,
    schmidt_state, tangle, werner_state, QuantumError, Settings, TwoQubitState,
};

/// Validation tolerance for probability tables and unit vectors.
pub const EPS_VAL: f64 = 1e-9;

/// Tolerance for derived quantities (measures, decomposition residuals).
pub const EPS_MEAS: f64 = 1e-7;