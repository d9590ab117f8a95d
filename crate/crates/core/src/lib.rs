//! Rough Mount Fuji (RMF) accessibility percolation.
//!
//! Every vertex `v` of a rooted graph carries a label `X_v = U_v + θ·d(ρ, v)`
//! with `U_v` i.i.d. Uniform(0,1). Accessibility percolation asks for an
//! infinite path from the root along which labels strictly increase.
//!
//! The crate is split by concern:
//!
//! * [`model`] and [`rng`]: labels, `ℓ^q` distances and the counter-based
//!   uniform field every simulator draws from.
//! * [`analytic`]: the critical polynomial `Q_θ`, critical offspring mean
//!   `m_c(θ)` and its inverse `θ_c(m)`, eigenfunctions, and closed-form
//!   probability bounds for increasing paths.
//! * [`tree_sim`]: Monte Carlo on Bienaymé-Galton-Watson trees.
//! * [`lattice_sim`]: accessible sets on `ℤⁿ` and crossing probabilities.
//! * [`bricklayer`]: the brick coupling between RMF labels on `ℤ₊²` and an
//!   oriented percolation of "good" bricks.

pub mod analytic;
pub mod bricklayer;
pub mod error;
pub mod lattice_sim;
pub mod model;
pub mod numfmt;
pub mod rng;
pub mod stats;
pub mod tree_sim;

pub use error::{Error, Result};
pub use model::{is_increasing, lp_distance, rmf_label, Metric, RmfParams, Site};
pub use rng::{LabelField, NodeId};
pub use stats::Estimate;

/// Library version, echoed in every CLI report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
