//! Gibbs run configuration and helpers shared by both samplers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_ITERATIONS: usize = 10_000;
pub const DEFAULT_BURN_IN: usize = 5_000;
pub const DEFAULT_INNER_STEPS: usize = 30;

/// Settings of one Gibbs run. `P` is the parameter vector type of the
/// model, used for the optional initial-value override.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GibbsConfig<P> {
    pub iterations: usize,
    pub burn_in: usize,
    pub inner_mh_steps: usize,
    pub seed: u64,
    pub initial_values: Option<P>,
}

impl<P> Default for GibbsConfig<P> {
    fn default() -> Self {
        GibbsConfig {
            iterations: DEFAULT_ITERATIONS,
            burn_in: DEFAULT_BURN_IN,
            inner_mh_steps: DEFAULT_INNER_STEPS,
            seed: 0,
            initial_values: None,
        }
    }
}

impl<P> GibbsConfig<P> {
    pub fn with_seed(seed: u64) -> Self {
        GibbsConfig {
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.iterations {
            return Err(Error::InvalidParameter(format!(
                "burn-in ({}) must be smaller than the number of iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        if self.inner_mh_steps == 0 {
            return Err(Error::InvalidParameter("inner MH chain needs at least one step".into()));
        }
        Ok(())
    }

    /// Same settings with a different initial-value type.
    pub fn retarget<Q>(&self, initial_values: Option<Q>) -> GibbsConfig<Q> {
        GibbsConfig {
            iterations: self.iterations,
            burn_in: self.burn_in,
            inner_mh_steps: self.inner_mh_steps,
            seed: self.seed,
            initial_values,
        }
    }
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(xs: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Componentwise mean of the rows after `burn_in`.
pub(crate) fn post_burn_in_mean<const K: usize>(rows: &[[f64; K]], burn_in: usize) -> Result<[f64; K]> {
    if burn_in >= rows.len() {
        return Err(Error::InvalidParameter(format!(
            "chain has {} rows, not more than the burn-in of {burn_in}",
            rows.len()
        )));
    }
    let kept = &rows[burn_in..];
    let mut out = [0.0; K];
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = compensated_sum(kept.iter().map(|r| r[k])) / kept.len() as f64;
    }
    Ok(out)
}

pub(crate) fn write_trace<W: std::io::Write, const K: usize>(
    mut w: W,
    header: &[&str; K],
    rows: impl Iterator<Item = [f64; K]>,
) -> std::io::Result<()> {
    writeln!(w, "iter,{}", header.join(","))?;
    for (i, row) in rows.enumerate() {
        write!(w, "{}", i + 1)?;
        for v in row {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}
