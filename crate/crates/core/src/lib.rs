//! Bayesian and maximum-likelihood fitting of the Johnson SB and
//! three-parameter Weibull distributions.

pub mod chain;
pub mod distributions;
pub mod error;
pub mod experiments;
pub mod float_serde;
pub mod gof;
pub mod jsb_bayes;
pub mod mcmc;
pub mod ml_jsb;
pub mod summary;
pub mod weibull_bayes;

pub use chain::GibbsConfig;
pub use distributions::{ContinuousModel, Dataset, JsbParams, WeibullParams};
pub use error::{Error, Result};
pub use gof::{compute_gof, GofReport};
