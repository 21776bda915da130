//! Cramér–Rao bounds for locating a terminal on Earth's surface from a
//! randomly deployed satellite constellation.
//!
//! Two signal models are covered: TDOA only, where the per-satellite
//! amplitudes are nuisance parameters, and TDOA+RSS, where the amplitude
//! decays with distance and carries location information too. For each
//! model the crate provides
//!
//! * the exact bound for a given constellation ([`fim`]),
//! * the large-constellation limit N·CRB → LCRB in closed form, its
//!   small/large altitude limits and the two-term approximation
//!   ([`closed_form`]),
//! * coverage probabilities and inverse design solvers ([`coverage`]),
//! * Monte Carlo experiments over random constellations ([`montecarlo`]),
//! * a sampled-signal simulator and maximum-likelihood localizer used to show
//!   the estimator reaching the bound ([`signal`]),
//! * an independent planar TDOA bound used as a test oracle ([`planar`]).
//!
//! Lengths are in km, times in s, angles in radians.

pub mod closed_form;
pub mod coverage;
pub mod error;
pub mod fim;
pub mod geometry;
pub mod linalg;
pub mod montecarlo;
pub mod planar;
pub mod quadrature;
pub mod rng;
pub mod signal;

pub use closed_form::{LimitCoefficients, MomentSet};
pub use error::{Error, Result};
pub use fim::{BoundSet, FisherMatrix, SignalModel};
pub use geometry::{Constellation, SatelliteState, SystemParams};
