//! Gibbs sampler for the four-parameter Johnson SB posterior under flat
//! priors.
//!
//! One sweep updates `delta -> gamma -> lambda -> xi`, each from its full
//! conditional given the most recent values of the others:
//!
//! * `delta`: log-concave, `delta^n exp{-(k2/2)(delta + gamma k1 / k2)^2}`,
//!   drawn exactly by adaptive rejection sampling;
//! * `gamma`: Gaussian with mean `-delta k1 / n` and variance `1 / n`;
//! * `lambda`: inner Metropolis–Hastings chain with the shifted exponential
//!   independence proposal on `(x_(n) - xi, inf)`;
//! * `xi`: inner Metropolis–Hastings chain with a uniform independence
//!   proposal on `(x_(n) - lambda, x_(1))`.

use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chain::{post_burn_in_mean, write_trace, GibbsConfig};
use crate::distributions::{Dataset, JsbParams};
use crate::error::{Error, Result};
use crate::mcmc::{
    mh_chain, sample_normal, sample_uniform, ArsEnvelope, Domain, LogConcaveDensity, LogDensity, MhOutcome,
    ShiftedExponential, UniformIndependence,
};

pub const TRACE_HEADER: [&str; 4] = ["delta", "gamma", "lambda", "xi"];

/// Minimum sample size accepted by [`run_jsb_gibbs`].
pub const MIN_SAMPLE_SIZE: usize = 5;

/// Sums of the log-odds transform `t_i = ln((x_i - xi) / (lambda + xi - x_i))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuffStats {
    /// `sum t_i`
    pub k1: f64,
    /// `sum t_i^2`
    pub k2: f64,
}

fn check_support(data: &Dataset, lambda: f64, xi: f64) -> Result<()> {
    if !(lambda > 0.0) || !(xi < data.min()) || !(lambda + xi > data.max()) {
        let bad = if xi >= data.min() { data.min() } else { data.max() };
        return Err(Error::SupportViolation {
            value: bad,
            support: format!("({xi}, {})", xi + lambda),
        });
    }
    Ok(())
}

pub fn compute_suff_stats(data: &Dataset, lambda: f64, xi: f64) -> Result<SuffStats> {
    check_support(data, lambda, xi)?;
    let upper = lambda + xi;
    let (mut k1, mut k2) = (0.0, 0.0);
    for &x in data.values() {
        let t = (x - xi).ln() - (upper - x).ln();
        k1 += t;
        k2 += t * t;
    }
    Ok(SuffStats { k1, k2 })
}

/// Full conditional of `delta`, up to a constant:
/// `n ln(delta) - (k2/2) delta^2 - gamma k1 delta`.
#[derive(Clone, Copy, Debug)]
pub struct DeltaConditional {
    n: f64,
    k1: f64,
    k2: f64,
    gamma: f64,
}

impl DeltaConditional {
    pub fn new(n: usize, stats: SuffStats, gamma: f64) -> Result<Self> {
        if !(stats.k2 > 0.0) {
            return Err(Error::Degenerate(format!(
                "k2 = {} makes the delta conditional improper; perturb lambda or xi",
                stats.k2
            )));
        }
        Ok(DeltaConditional {
            n: n as f64,
            k1: stats.k1,
            k2: stats.k2,
            gamma,
        })
    }

    /// Positive root of `n / delta = k2 delta + gamma k1`.
    pub fn mode(&self) -> f64 {
        let b = self.gamma * self.k1;
        let disc = (b * b + 4.0 * self.n * self.k2).sqrt();
        if b <= 0.0 {
            (disc - b) / (2.0 * self.k2)
        } else {
            2.0 * self.n / (disc + b)
        }
    }

    /// Second derivative of the log target, `-n / delta^2 - k2`.
    pub fn curvature(&self, delta: f64) -> f64 {
        -self.n / (delta * delta) - self.k2
    }
}

impl LogDensity for DeltaConditional {
    fn ln_density(&self, d: f64) -> f64 {
        if d > 0.0 {
            self.n * d.ln() - 0.5 * self.k2 * d * d - self.gamma * self.k1 * d
        } else {
            f64::NEG_INFINITY
        }
    }

    fn domain(&self) -> Domain {
        Domain::positive()
    }
}

impl LogConcaveDensity for DeltaConditional {
    fn ln_density_slope(&self, d: f64) -> f64 {
        self.n / d - self.k2 * d - self.gamma * self.k1
    }
}

/// Full conditional of `lambda` on `(x_(n) - xi, inf)`.
#[derive(Clone, Debug)]
pub struct LambdaConditional<'a> {
    data: &'a Dataset,
    delta: f64,
    gamma: f64,
    xi: f64,
    ln_lower: Vec<f64>,
}

impl<'a> LambdaConditional<'a> {
    pub fn new(data: &'a Dataset, delta: f64, gamma: f64, xi: f64) -> Result<Self> {
        if !(xi < data.min()) {
            return Err(Error::SupportViolation {
                value: data.min(),
                support: format!("(xi = {xi}, ...)"),
            });
        }
        let ln_lower = data.values().iter().map(|&x| (x - xi).ln()).collect();
        Ok(LambdaConditional {
            data,
            delta,
            gamma,
            xi,
            ln_lower,
        })
    }

    /// Lower end of the conditional's support, `x_(n) - xi`.
    pub fn threshold(&self) -> f64 {
        self.data.max() - self.xi
    }
}

impl LogDensity for LambdaConditional<'_> {
    fn ln_density(&self, lambda: f64) -> f64 {
        if !(lambda > self.threshold()) {
            return f64::NEG_INFINITY;
        }
        let upper = lambda + self.xi;
        let n = self.data.len() as f64;
        let mut acc = n * lambda.ln();
        for (&x, &lo) in self.data.values().iter().zip(&self.ln_lower) {
            let hi = (upper - x).ln();
            let z = self.gamma + self.delta * (lo - hi);
            acc -= hi + 0.5 * z * z;
        }
        acc
    }

    fn domain(&self) -> Domain {
        Domain::new(self.threshold(), f64::INFINITY)
    }
}

/// Full conditional of `xi` on `(x_(n) - lambda, x_(1))`.
#[derive(Clone, Copy, Debug)]
pub struct XiConditional<'a> {
    data: &'a Dataset,
    delta: f64,
    gamma: f64,
    lambda: f64,
}

impl<'a> XiConditional<'a> {
    pub fn new(data: &'a Dataset, delta: f64, gamma: f64, lambda: f64) -> Self {
        XiConditional {
            data,
            delta,
            gamma,
            lambda,
        }
    }
}

impl LogDensity for XiConditional<'_> {
    fn ln_density(&self, xi: f64) -> f64 {
        if !(xi < self.data.min() && xi + self.lambda > self.data.max()) {
            return f64::NEG_INFINITY;
        }
        let upper = xi + self.lambda;
        let mut acc = 0.0;
        for &x in self.data.values() {
            let lo = (x - xi).ln();
            let hi = (upper - x).ln();
            let z = self.gamma + self.delta * (lo - hi);
            acc -= lo + hi + 0.5 * z * z;
        }
        acc
    }

    fn domain(&self) -> Domain {
        Domain::new(self.data.max() - self.lambda, self.data.min())
    }
}

fn draw_delta<R: Rng + ?Sized>(rng: &mut R, n: usize, stats: SuffStats, gamma: f64) -> Result<f64> {
    let target = DeltaConditional::new(n, stats, gamma)?;
    let m = target.mode();
    ArsEnvelope::new(target, &[0.5 * m, m, 2.0 * m])?.sample(rng)
}

/// Exact draw of `delta` given `(gamma, lambda, xi)`.
pub fn sample_delta<R: Rng + ?Sized>(
    rng: &mut R,
    data: &Dataset,
    gamma: f64,
    lambda: f64,
    xi: f64,
) -> Result<f64> {
    let stats = compute_suff_stats(data, lambda, xi)?;
    draw_delta(rng, data.len(), stats, gamma)
}

fn draw_gamma<R: Rng + ?Sized>(rng: &mut R, n: usize, k1: f64, delta: f64) -> Result<f64> {
    let n = n as f64;
    sample_normal(rng, -delta * k1 / n, 1.0 / n.sqrt())
}

/// Exact draw of `gamma` given `(delta, lambda, xi)`.
pub fn sample_gamma_param<R: Rng + ?Sized>(
    rng: &mut R,
    data: &Dataset,
    delta: f64,
    lambda: f64,
    xi: f64,
) -> Result<f64> {
    let stats = compute_suff_stats(data, lambda, xi)?;
    draw_gamma(rng, data.len(), stats.k1, delta)
}

/// Inner MH chain for `lambda`, started at `x_(n) - xi + 1/n`.
pub fn sample_lambda<R: Rng + ?Sized>(
    rng: &mut R,
    data: &Dataset,
    delta: f64,
    gamma: f64,
    xi: f64,
    inner_steps: usize,
) -> Result<MhOutcome> {
    let target = LambdaConditional::new(data, delta, gamma, xi)?;
    let threshold = target.threshold();
    let init = threshold + 1.0 / data.len() as f64;
    mh_chain(rng, &target, &ShiftedExponential::new(threshold), init, inner_steps)
}

/// Inner MH chain for `xi`, started at a uniform draw on
/// `(x_(n) - lambda, x_(1))`.
pub fn sample_xi<R: Rng + ?Sized>(
    rng: &mut R,
    data: &Dataset,
    delta: f64,
    gamma: f64,
    lambda: f64,
    inner_steps: usize,
) -> Result<MhOutcome> {
    let (lo, hi) = (data.max() - lambda, data.min());
    let proposal = UniformIndependence::new(lo, hi).map_err(|_| Error::SupportViolation {
        value: data.max(),
        support: format!("lambda = {lambda} leaves no room for xi below x_(1) = {hi}"),
    })?;
    let target = XiConditional::new(data, delta, gamma, lambda);
    let init = sample_uniform(rng, lo, hi)?;
    mh_chain(rng, &target, &proposal, init, inner_steps)
}

/// Starting values: `xi = x_(1) - 1/n`, `lambda = x_(n) - x_(1) + 2/n`,
/// `delta = 1`, `gamma = delta ln(1/m - 1)` with `m` the median of
/// `(x - xi) / lambda`.
pub fn initial_values_jsb(data: &Dataset) -> Result<JsbParams> {
    let n = data.len();
    if n < 2 || data.min() >= data.max() {
        return Err(Error::InvalidData(
            "initial values need at least two distinct observations".into(),
        ));
    }
    let nf = n as f64;
    let xi = data.min() - 1.0 / nf;
    let lambda = data.max() - data.min() + 2.0 / nf;
    let delta = 1.0;
    let v = data.values();
    // values are sorted, so the transformed median is the transform of the median
    let median = if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    };
    let y = (median - xi) / lambda;
    let gamma = delta * (1.0 / y - 1.0).ln();
    JsbParams::new(delta, gamma, lambda, xi)
}

/// Output of [`run_jsb_gibbs`]: one row per sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainOutput {
    pub draws: Vec<JsbParams>,
    pub initial: JsbParams,
    pub lambda_accepted: u64,
    pub xi_accepted: u64,
    pub config: GibbsConfig<JsbParams>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl ChainOutput {
    pub fn rows(&self) -> Vec<[f64; 4]> {
        self.draws.iter().map(JsbParams::to_array).collect()
    }

    pub fn post_burn_in(&self) -> &[JsbParams] {
        &self.draws[self.config.burn_in.min(self.draws.len())..]
    }

    pub fn posterior_estimate(&self) -> Result<JsbParams> {
        posterior_estimate(self)
    }

    /// Fraction of inner MH steps accepted, `(lambda, xi)`.
    pub fn acceptance_rates(&self) -> (f64, f64) {
        let total = (self.draws.len() * self.config.inner_mh_steps) as f64;
        (self.lambda_accepted as f64 / total, self.xi_accepted as f64 / total)
    }

    /// CSV trace with header `iter,delta,gamma,lambda,xi`.
    pub fn write_trace_csv<W: std::io::Write>(&self, w: W) -> std::io::Result<()> {
        write_trace(w, &TRACE_HEADER, self.draws.iter().map(JsbParams::to_array))
    }
}

/// Componentwise mean of the draws after burn-in.
pub fn posterior_estimate(chain: &ChainOutput) -> Result<JsbParams> {
    let mean = post_burn_in_mean(&chain.rows(), chain.config.burn_in)?;
    Ok(JsbParams::from_array(mean))
}

/// Runs the Gibbs sampler for `config.iterations` sweeps.
pub fn run_jsb_gibbs(data: &Dataset, config: &GibbsConfig<JsbParams>) -> Result<ChainOutput> {
    config.validate()?;
    if data.len() < MIN_SAMPLE_SIZE {
        return Err(Error::InvalidData(format!(
            "the Gibbs sampler needs at least {MIN_SAMPLE_SIZE} observations, got {}",
            data.len()
        )));
    }
    let initial = match config.initial_values {
        Some(p) => {
            p.validate()?;
            if !p.covers(data) {
                return Err(Error::InvalidParameter(format!(
                    "initial values {p:?} do not cover the data range [{}, {}]",
                    data.min(),
                    data.max()
                )));
            }
            p
        }
        None => initial_values_jsb(data)?,
    };

    let started = Instant::now();
    let mut rng = crate::mcmc::RngStream::new(config.seed);
    let n = data.len();
    let mut state = initial;
    let mut draws = Vec::with_capacity(config.iterations);
    let (mut lambda_accepted, mut xi_accepted) = (0u64, 0u64);

    for t in 0..config.iterations {
        let sweep = |rng: &mut crate::mcmc::RngStream, s: &mut JsbParams| -> Result<(usize, usize)> {
            let stats = compute_suff_stats(data, s.lambda, s.xi)?;
            s.delta = draw_delta(rng, n, stats, s.gamma)?;
            s.gamma = draw_gamma(rng, n, stats.k1, s.delta)?;
            let lam = sample_lambda(rng, data, s.delta, s.gamma, s.xi, config.inner_mh_steps)?;
            s.lambda = lam.state;
            let xi = sample_xi(rng, data, s.delta, s.gamma, s.lambda, config.inner_mh_steps)?;
            s.xi = xi.state;
            Ok((lam.accepted, xi.accepted))
        };
        let before = state;
        let (la, xa) = sweep(&mut rng, &mut state).map_err(|e| Error::Kernel {
            iteration: t + 1,
            state: format!("{before:?}"),
            source: Box::new(e),
        })?;
        lambda_accepted += la as u64;
        xi_accepted += xa as u64;
        draws.push(state);
    }

    Ok(ChainOutput {
        draws,
        initial,
        lambda_accepted,
        xi_accepted,
        config: config.clone(),
        elapsed: started.elapsed(),
    })
}
