//! Distributionally robust risk levels for chance-constrained problems.
//!
//! The crate covers the whole chain from distributions to guarantees:
//!
//! - [`distributions`]: the probability families used throughout (Gaussians,
//!   uniform boxes, ring-uniform disturbances, finite discrete laws).
//! - [`discrepancy`]: the relative variation distance (RVD) and the
//!   φ-divergences (KL, Hellinger, χ², total variation), closed form and by
//!   trapezoidal integration.
//! - [`prl`]: perturbed risk levels, the rescaled nominal risk level that
//!   keeps a chance constraint valid for every member of an ambiguity set.
//! - [`nominal_fit`]: minimax fitting of a nominal Gaussian that covers a
//!   finite family with the smallest ambiguity radius.
//! - [`scenario`]: scenario-approach two-level and expected-violation bounds,
//!   nominal and distributionally robust.
//! - [`rmpc`]: a randomized MPC Monte Carlo experiment that checks the bounds
//!   empirically.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the
//! `parallel` feature is enabled (the default) and plain iterators otherwise.

pub mod discrepancy;
pub mod distributions;
pub mod error;
pub mod nominal_fit;
pub mod par;
pub mod prl;
pub mod quadrature;
pub mod rmpc;
pub mod rng;
pub mod scenario;
pub mod special;

pub use discrepancy::{DiscrepancyKind, Grid1};
pub use distributions::{DiscreteDist, Distribution, Gaussian1, GaussianNd, RingUniform, UniformBox};
pub use error::{Error, Result};
pub use prl::{prl, worst_case_prob, AmbiguitySet, PrlResult};
pub use scenario::ScenarioParams;
