//! Numerical laboratory for analytic capacity of planar sets.
//!
//! The crate works with finite atomic measures on the plane and provides:
//!
//! * Menger curvature `c²(μ)` of a measure, exact, truncated and Monte-Carlo
//!   ([`curvature`]);
//! * the ε-truncated Cauchy transform as a dense operator on `L²(μ)`, its
//!   operator norm and the energy `‖C_μ^ε 1‖²` ([`cauchy`]);
//! * two-sided numerical bounds for analytic capacity ([`capacity`]);
//! * the set and measure families used to probe almost-additivity of
//!   capacity: corner Cantor sets, bead chains, circle families, the
//!   David–Semmes type counterexamples ([`generators`]);
//! * experiments that check the associated inequalities and scaling laws
//!   ([`verifier`]) and a configuration-driven runner ([`config`], [`output`]).
//!
//! ```
//! use capacity_lab::{curvature, measure::DiscreteMeasure, geometry::{CircleArc, Point}};
//!
//! let circle = CircleArc::full_circle(Point::ORIGIN, 1.0).unwrap();
//! let mu = DiscreteMeasure::arc_length(&circle, 64).unwrap();
//! let report = curvature::c2_exact(&mu).unwrap();
//! // every triple of distinct atoms lies on the unit circle
//! let m = 64.0_f64;
//! let expected = (2.0 * std::f64::consts::PI).powi(3) * m * (m - 1.0) * (m - 2.0) / m.powi(3);
//! assert!((report.value - expected).abs() < 1e-9 * expected);
//! ```

pub mod capacity;
pub mod cauchy;
pub mod config;
pub mod curvature;
pub mod generators;
pub mod geometry;
pub mod measure;
pub mod output;
pub(crate) mod summation;
pub mod verifier;

pub use geometry::{CircleArc, ChordArcCurve, Disc, Point, Segment};
pub use measure::DiscreteMeasure;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{0}: input is empty")]
    EmptyInput(&'static str),
    #[error("exact curvature needs {needed:.3e} triple evaluations, over the budget of {budget:.3e}; use the Monte-Carlo estimator")]
    BudgetExceeded { needed: f64, budget: f64 },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("geometry is infeasible: {0}")]
    Infeasible(String),
    #[error("search did not stabilize: {0}")]
    SearchExhausted(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

// Book chapters are compiled as doc-tests so their snippets stay in sync.
#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/measures.md")]
    mod measures {}
    #[doc = include_str!("../../../book/src/curvature.md")]
    mod curvature {}
    #[doc = include_str!("../../../book/src/cauchy.md")]
    mod cauchy {}
    #[doc = include_str!("../../../book/src/capacity.md")]
    mod capacity {}
    #[doc = include_str!("../../../book/src/constructions.md")]
    mod constructions {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
