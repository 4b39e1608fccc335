//! Gibbs sampler for the three-parameter Weibull posterior under Jeffreys
//! priors on shape and scale and a flat prior on location.
//!
//! Sweep order is `alpha -> beta -> mu`. The shape conditional is
//! log-concave and drawn by ARS; the scale conditional is drawn exactly
//! through a gamma variate; the location uses an inner MH chain with a
//! uniform independence proposal on `(x_(1) - beta, x_(1))`.

use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::chain::{post_burn_in_mean, write_trace, GibbsConfig};
use crate::distributions::{Dataset, WeibullParams};
use crate::error::{Error, Result};
use crate::mcmc::{
    mh_chain, sample_gamma, ArsEnvelope, Domain, LogConcaveDensity, LogDensity, MhOutcome, RngStream,
    UniformIndependence,
};

pub const TRACE_HEADER: [&str; 3] = ["alpha", "beta", "mu"];

/// Proposals closer than this to `x_(1)` are rejected when `alpha <= 1`,
/// where the location conditional diverges.
pub const MU_EDGE_GUARD: f64 = 1e-12;

pub const SHAPE_BRACKET: (f64, f64) = (0.05, 50.0);

fn check_location(data: &Dataset, mu: f64) -> Result<()> {
    if !(mu < data.min()) {
        return Err(Error::SupportViolation {
            value: data.min(),
            support: format!("({mu}, inf)"),
        });
    }
    Ok(())
}

/// Full conditional of the shape, up to a constant:
/// `(n - 1) ln a + (a - 1) sum y_i - sum exp(a y_i)` with
/// `y_i = ln((x_i - mu) / beta)`.
#[derive(Clone, Debug)]
pub struct AlphaConditional {
    ln_scaled: Vec<f64>,
    sum_ln: f64,
    n_minus_one: f64,
}

impl AlphaConditional {
    pub fn new(data: &Dataset, beta: f64, mu: f64) -> Result<Self> {
        check_location(data, mu)?;
        if data.len() < 2 {
            return Err(Error::InvalidData("shape conditional needs n >= 2".into()));
        }
        let ln_beta = beta.ln();
        let ln_scaled: Vec<f64> = data.values().iter().map(|&x| (x - mu).ln() - ln_beta).collect();
        let sum_ln = ln_scaled.iter().sum();
        Ok(AlphaConditional {
            ln_scaled,
            sum_ln,
            n_minus_one: (data.len() - 1) as f64,
        })
    }

    pub fn curvature(&self, a: f64) -> f64 {
        -self.n_minus_one / (a * a) - self.ln_scaled.iter().map(|&y| y * y * (a * y).exp()).sum::<f64>()
    }

    /// Mode by safeguarded Newton on the slope.
    pub fn mode(&self) -> f64 {
        let (mut lo, mut hi) = (1.0, 1.0);
        while self.ln_density_slope(lo) <= 0.0 && lo > 1e-8 {
            lo *= 0.5;
        }
        while self.ln_density_slope(hi) >= 0.0 && hi < 1e8 {
            hi *= 2.0;
        }
        let mut a = 0.5 * (lo + hi);
        for _ in 0..100 {
            let g = self.ln_density_slope(a);
            if g.abs() <= 1e-12 * self.n_minus_one.max(1.0) || (hi - lo) <= 1e-14 * a {
                break;
            }
            if g > 0.0 {
                lo = a;
            } else {
                hi = a;
            }
            let step = a - g / self.curvature(a);
            a = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
        }
        a
    }

    /// Abscissae one Laplace standard deviation either side of the mode.
    fn abscissae(&self) -> [f64; 3] {
        let m = self.mode();
        let s = 1.0 / (-self.curvature(m)).sqrt();
        let mut left = if m - s > 0.0 { m - s } else { 0.5 * m };
        while self.ln_density_slope(left) <= 0.0 && left > 1e-300 {
            left *= 0.5;
        }
        let mut right = m + s;
        while self.ln_density_slope(right) >= 0.0 {
            right += s;
        }
        [left, m, right]
    }
}

impl LogDensity for AlphaConditional {
    fn ln_density(&self, a: f64) -> f64 {
        if !(a > 0.0) {
            return f64::NEG_INFINITY;
        }
        self.n_minus_one * a.ln() + (a - 1.0) * self.sum_ln
            - self.ln_scaled.iter().map(|&y| (a * y).exp()).sum::<f64>()
    }

    fn domain(&self) -> Domain {
        Domain::positive()
    }
}

impl LogConcaveDensity for AlphaConditional {
    fn ln_density_slope(&self, a: f64) -> f64 {
        self.n_minus_one / a + self.sum_ln - self.ln_scaled.iter().map(|&y| y * (a * y).exp()).sum::<f64>()
    }
}

/// Full conditional of the location on `(-inf, x_(1))`:
/// `(alpha - 1) sum ln(x_i - mu) - sum ((x_i - mu) / beta)^alpha`.
#[derive(Clone, Copy, Debug)]
pub struct MuConditional<'a> {
    data: &'a Dataset,
    alpha: f64,
    beta: f64,
}

impl<'a> MuConditional<'a> {
    pub fn new(data: &'a Dataset, alpha: f64, beta: f64) -> Self {
        MuConditional { data, alpha, beta }
    }
}

impl LogDensity for MuConditional<'_> {
    fn ln_density(&self, mu: f64) -> f64 {
        let gap = self.data.min() - mu;
        if !(gap > 0.0) || (self.alpha <= 1.0 && gap < MU_EDGE_GUARD) {
            return f64::NEG_INFINITY;
        }
        let a = self.alpha;
        let shift = a * self.beta.ln();
        let mut acc = 0.0;
        for &x in self.data.values() {
            let l = (x - mu).ln();
            acc += (a - 1.0) * l - (a * l - shift).exp();
        }
        acc
    }

    fn domain(&self) -> Domain {
        Domain::new(f64::NEG_INFINITY, self.data.min())
    }
}

/// Exact ARS draw of the shape given `(beta, mu)`.
pub fn sample_alpha<R: Rng + ?Sized>(rng: &mut R, data: &Dataset, beta: f64, mu: f64) -> Result<f64> {
    let target = AlphaConditional::new(data, beta, mu)?;
    let init = target.abscissae();
    ArsEnvelope::new(target, &init)?.sample(rng)
}

/// Exact draw of the scale: `(sum (x_i - mu)^alpha / z)^(1/alpha)` with
/// `z ~ Gamma(n, 1)`.
pub fn sample_beta<R: Rng + ?Sized>(rng: &mut R, data: &Dataset, alpha: f64, mu: f64) -> Result<f64> {
    check_location(data, mu)?;
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("shape must be positive, got {alpha}")));
    }
    let z = sample_gamma(rng, data.len() as f64)?;
    let s: f64 = data.values().iter().map(|&x| (x - mu).powf(alpha)).sum();
    Ok(((s.ln() - z.ln()) / alpha).exp())
}

/// Inner MH chain for the location, started at `x_(1) - 1/n`.
pub fn sample_mu<R: Rng + ?Sized>(
    rng: &mut R,
    data: &Dataset,
    alpha: f64,
    beta: f64,
    inner_steps: usize,
) -> Result<MhOutcome> {
    if !(beta > 0.0) || !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "location update needs alpha > 0 and beta > 0, got ({alpha}, {beta})"
        )));
    }
    let x1 = data.min();
    let target = MuConditional::new(data, alpha, beta);
    let proposal = UniformIndependence::new(x1 - beta, x1)?;
    mh_chain(rng, &target, &proposal, x1 - 1.0 / data.len() as f64, inner_steps)
}

/// Shape whose two-parameter Weibull has coefficient of variation `cv`,
/// by bisection over [`SHAPE_BRACKET`].
pub fn shape_from_cv(cv: f64) -> Result<f64> {
    let target = cv * cv;
    let excess = |a: f64| (ln_gamma(1.0 + 2.0 / a) - 2.0 * ln_gamma(1.0 + 1.0 / a)).exp() - 1.0 - target;
    let (mut lo, mut hi) = SHAPE_BRACKET;
    if !(excess(lo) >= 0.0 && excess(hi) <= 0.0) {
        return Err(Error::InvalidData(format!(
            "coefficient of variation {cv} is outside the range reachable with shapes in {SHAPE_BRACKET:?}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * mid {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Starting values: `mu = x_(1) - 1/n`, shape and scale by the method of
/// moments on `x - mu`.
pub fn initial_values_weibull(data: &Dataset) -> Result<WeibullParams> {
    let n = data.len();
    if n < 3 {
        return Err(Error::InvalidData("moment initial values need n >= 3".into()));
    }
    let mu = data.min() - 1.0 / n as f64;
    let shifted: Vec<f64> = data.values().iter().map(|&x| x - mu).collect();
    let mean = shifted.iter().sum::<f64>() / n as f64;
    let var = shifted.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n as f64;
    if !(var > 0.0) {
        return Err(Error::InvalidData("sample variance is zero".into()));
    }
    let alpha = shape_from_cv(var.sqrt() / mean)?;
    let beta = mean / ln_gamma(1.0 + 1.0 / alpha).exp();
    WeibullParams::new(alpha, beta, mu)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeibullChainOutput {
    pub draws: Vec<WeibullParams>,
    pub initial: WeibullParams,
    pub mu_accepted: u64,
    pub config: GibbsConfig<WeibullParams>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl WeibullChainOutput {
    pub fn rows(&self) -> Vec<[f64; 3]> {
        self.draws.iter().map(WeibullParams::to_array).collect()
    }

    pub fn post_burn_in(&self) -> &[WeibullParams] {
        &self.draws[self.config.burn_in.min(self.draws.len())..]
    }

    pub fn posterior_estimate(&self) -> Result<WeibullParams> {
        Ok(WeibullParams::from_array(post_burn_in_mean(&self.rows(), self.config.burn_in)?))
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.mu_accepted as f64 / (self.draws.len() * self.config.inner_mh_steps) as f64
    }

    /// CSV trace with header `iter,alpha,beta,mu`.
    pub fn write_trace_csv<W: std::io::Write>(&self, w: W) -> std::io::Result<()> {
        write_trace(w, &TRACE_HEADER, self.draws.iter().map(WeibullParams::to_array))
    }
}

pub fn run_weibull_gibbs(data: &Dataset, config: &GibbsConfig<WeibullParams>) -> Result<WeibullChainOutput> {
    config.validate()?;
    if data.len() < crate::jsb_bayes::MIN_SAMPLE_SIZE {
        return Err(Error::InvalidData(format!(
            "the Gibbs sampler needs at least {} observations, got {}",
            crate::jsb_bayes::MIN_SAMPLE_SIZE,
            data.len()
        )));
    }
    let initial = match config.initial_values {
        Some(p) => {
            p.validate()?;
            check_location(data, p.mu)?;
            p
        }
        None => initial_values_weibull(data)?,
    };

    let started = Instant::now();
    let mut rng = RngStream::new(config.seed);
    let mut state = initial;
    let mut draws = Vec::with_capacity(config.iterations);
    let mut mu_accepted = 0u64;

    for t in 0..config.iterations {
        let before = state;
        let step = (|| -> Result<usize> {
            state.alpha = sample_alpha(&mut rng, data, state.beta, state.mu)?;
            state.beta = sample_beta(&mut rng, data, state.alpha, state.mu)?;
            let mu = sample_mu(&mut rng, data, state.alpha, state.beta, config.inner_mh_steps)?;
            state.mu = mu.state;
            Ok(mu.accepted)
        })();
        let accepted = step.map_err(|e| Error::Kernel {
            iteration: t + 1,
            state: format!("{before:?}"),
            source: Box::new(e),
        })?;
        mu_accepted += accepted as u64;
        draws.push(state);
    }

    Ok(WeibullChainOutput {
        draws,
        initial,
        mu_accepted,
        config: config.clone(),
        elapsed: started.elapsed(),
    })
}
