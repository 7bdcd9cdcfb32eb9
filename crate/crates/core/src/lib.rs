//! Desk-scale numerics for concentration of measure on spheres and its
//! dynamical counterpart for unitary actions.
//!
//! - [`sphere`]: sampling, distances, concentration functions, Lévy bounds.
//! - [`subspace`]: principal angles, trace distance, isometries between ranges.
//! - [`group`]: free-group words and balls, permutations, unitary actions.
//! - [`dynamics`]: spherical sets, witness search, counterexample experiments.
//! - [`folner`]: almost-invariant vectors and Følner-type subset search.

pub mod dynamics;
pub mod error;
pub mod folner;
pub mod group;
mod linalg;
pub mod quad;
pub mod rng;
pub mod sphere;
pub mod subspace;

pub use dynamics::{Cover, EssentialityReport, Metric, SphericalSet, Verdict};
pub use error::{Error, Result};
pub use folner::FolnerSearchResult;
pub use group::{Permutation, ReducedWord, UnitaryAction};
pub use sphere::{ConcentrationCurve, Field, UnitVector};
pub use subspace::{Frame, IsometryMap, PrincipalAngleDecomposition};
