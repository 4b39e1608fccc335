//! Sampling primitives shared by the Gibbs samplers.

pub mod ars;
pub mod mh;
pub mod rng;
pub mod target;
pub mod variates;

pub use ars::{ars_sample, ArsEnvelope, DEFAULT_MAX_ABSCISSAE};
pub use mh::{mh_chain, GaussianRandomWalk, MhOutcome, Proposal, ShiftedExponential, UniformIndependence};
pub use rng::RngStream;
pub use target::{DifferentiableFn, Domain, LogConcaveDensity, LogDensity, LogDensityFn};
pub use variates::{sample_gamma, sample_normal, sample_shifted_exponential, sample_uniform};
