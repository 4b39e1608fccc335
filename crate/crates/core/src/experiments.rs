//! Simulation studies: convergence failures of maximum likelihood, robustness
//! of the Gibbs sampler to its starting point, and the two-model analysis of
//! a single dataset.

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::GibbsConfig;
use crate::distributions::{ContinuousModel, Dataset, JsbParams, WeibullParams};
use crate::error::{Error, Result};
use crate::gof::{model_comparison, ModelComparison};
use crate::jsb_bayes::{initial_values_jsb, run_jsb_gibbs, ChainOutput};
use crate::mcmc::{sample_uniform, RngStream};
use crate::ml_jsb::{ml_fit_jsb, FailureReason, DEFAULT_MAX_ITER, DEFAULT_TOLERANCE};
use crate::summary::{batch_means_se, mean, Descriptives};
use crate::weibull_bayes::{run_weibull_gibbs, WeibullChainOutput};

/// Closed interval bounds of a uniform draw.
pub type Range = (f64, f64);

pub const NR_DELTA: Range = (0.05, 10.0);
pub const NR_GAMMA: Range = (-20.0, 20.0);
pub const NR_LAMBDA: Range = (1.0, 100.0);
pub const NR_XI: Range = (-50.0, 50.0);
/// Upper bound of the initial `lambda`; the lower bound is the sample range.
pub const NR_LAMBDA0_MAX: f64 = 100.0;
/// Lower bound of the initial `xi`; the upper bound is the sample minimum.
pub const NR_XI0_MIN: f64 = -50.0;

/// Samples whose range falls below this are redrawn.
pub const DEGENERATE_RANGE: f64 = 1e-8;

pub const FAILURE_DEFINITION: &str = "a run fails when the start or any accepted iterate lies outside the \
parameter space or leaves an observation outside (xi, xi + lambda), when the objective or its \
finite-difference gradient is non-finite, or when the gradient norm is still above the tolerance \
after max_iter BFGS iterations or the line search stalls";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NrStudyConfig {
    pub replications: usize,
    pub sizes: Vec<usize>,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for NrStudyConfig {
    fn default() -> Self {
        NrStudyConfig {
            replications: 500,
            sizes: vec![20, 100, 1000],
            seed: 0,
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOLERANCE,
        }
    }
}

impl NrStudyConfig {
    /// Seven sizes and 10000 replications per size.
    pub fn full_scale(seed: u64) -> Self {
        NrStudyConfig {
            replications: 10_000,
            sizes: vec![20, 50, 100, 250, 500, 1000, 5000],
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidParameter("replications must be at least 1".into()));
        }
        if self.sizes.is_empty() || self.sizes.iter().any(|&n| n < 2) {
            return Err(Error::InvalidParameter(format!(
                "sample sizes must be non-empty and at least 2, got {:?}",
                self.sizes
            )));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::InvalidParameter("tolerance and max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureTally {
    pub non_convergence: usize,
    pub non_finite_objective: usize,
    pub infeasible_iterate: usize,
}

impl FailureTally {
    fn record(&mut self, reason: FailureReason) {
        match reason {
            FailureReason::NonConvergence => self.non_convergence += 1,
            FailureReason::NonFiniteObjective => self.non_finite_objective += 1,
            FailureReason::InfeasibleIterate => self.infeasible_iterate += 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeOutcome {
    pub n: usize,
    pub replications: usize,
    pub converged: usize,
    pub percent_converged: f64,
    pub failures: FailureTally,
    /// Truth draws discarded because the simulated sample was degenerate.
    pub redraws: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NrStudyReport {
    pub config: NrStudyConfig,
    pub failure_definition: String,
    pub sizes: Vec<SizeOutcome>,
}

struct NrRun {
    failure: Option<FailureReason>,
    redraws: usize,
}

fn uniform(rng: &mut RngStream, (a, b): Range) -> Result<f64> {
    sample_uniform(rng, a, b)
}

fn nr_replication(config: &NrStudyConfig, n: usize, rng: &mut RngStream) -> Result<NrRun> {
    let mut redraws = 0;
    let data = loop {
        let truth = JsbParams::new(
            uniform(rng, NR_DELTA)?,
            uniform(rng, NR_GAMMA)?,
            uniform(rng, NR_LAMBDA)?,
            uniform(rng, NR_XI)?,
        )?;
        let data = truth.sample(n, rng)?;
        if data.max() - data.min() >= DEGENERATE_RANGE {
            break data;
        }
        redraws += 1;
    };
    let init = JsbParams::new(
        uniform(rng, NR_DELTA)?,
        uniform(rng, NR_GAMMA)?,
        uniform(rng, (data.max() - data.min(), NR_LAMBDA0_MAX))?,
        uniform(rng, (NR_XI0_MIN, data.min()))?,
    )?;
    let fit = ml_fit_jsb(&data, init, config.max_iter, config.tol);
    Ok(NrRun {
        failure: fit.failure,
        redraws,
    })
}

/// Stream index of replication `rep` at the `size_index`-th size.
fn stream_index(size_index: usize, rep: usize) -> u64 {
    ((size_index as u64) << 32) | rep as u64
}

pub fn run_nr_failure_study(config: &NrStudyConfig) -> Result<NrStudyReport> {
    config.validate()?;
    let mut sizes = Vec::with_capacity(config.sizes.len());
    for (si, &n) in config.sizes.iter().enumerate() {
        let runs: Vec<NrRun> = (0..config.replications)
            .into_par_iter()
            .map(|rep| {
                let mut rng = RngStream::derive(config.seed, stream_index(si, rep));
                nr_replication(config, n, &mut rng)
            })
            .collect::<Result<_>>()?;
        let mut failures = FailureTally::default();
        let mut converged = 0;
        let mut redraws = 0;
        for run in &runs {
            redraws += run.redraws;
            match run.failure {
                None => converged += 1,
                Some(reason) => failures.record(reason),
            }
        }
        sizes.push(SizeOutcome {
            n,
            replications: config.replications,
            converged,
            percent_converged: 100.0 * converged as f64 / config.replications as f64,
            failures,
            redraws,
        });
    }
    Ok(NrStudyReport {
        config: config.clone(),
        failure_definition: FAILURE_DEFINITION.to_string(),
        sizes,
    })
}

pub const ROBUST_DELTA0: Range = (0.1, 15.0);
pub const ROBUST_GAMMA0: Range = (-15.0, 15.0);
pub const ROBUST_LAMBDA0: Range = (20.1, 60.0);
pub const ROBUST_XI0: Range = (-10.0, 10.0);

/// Starting point of the single extreme-initials chain.
pub const EXTREME_INITIALS: [f64; 4] = [15.0, -15.0, 60.0, -10.0];

/// Number of final sweeps compared between the extreme and default chains.
pub const TAIL_WINDOW: usize = 1000;
const TAIL_BATCHES: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessConfig {
    pub replications: usize,
    pub n: usize,
    pub truth: JsbParams,
    pub seed: u64,
    pub iterations: usize,
    pub burn_in: usize,
    pub inner_mh_steps: usize,
}

impl Default for RobustnessConfig {
    fn default() -> Self {
        let gibbs: GibbsConfig<JsbParams> = GibbsConfig::default();
        RobustnessConfig {
            replications: 300,
            n: 100,
            truth: JsbParams {
                delta: 2.0,
                gamma: 2.0,
                lambda: 20.0,
                xi: 0.0,
            },
            seed: 0,
            iterations: gibbs.iterations,
            burn_in: gibbs.burn_in,
            inner_mh_steps: gibbs.inner_mh_steps,
        }
    }
}

impl RobustnessConfig {
    fn gibbs(&self, seed: u64, initial_values: Option<JsbParams>) -> GibbsConfig<JsbParams> {
        GibbsConfig {
            iterations: self.iterations,
            burn_in: self.burn_in,
            inner_mh_steps: self.inner_mh_steps,
            seed,
            initial_values,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidParameter("replications must be at least 1".into()));
        }
        self.truth.validate()?;
        self.gibbs(0, None).validate()?;
        if self.iterations < TAIL_WINDOW {
            return Err(Error::InvalidParameter(format!(
                "robustness runs need at least {TAIL_WINDOW} iterations"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PooledDescriptives {
    pub delta: Descriptives,
    pub gamma: Descriptives,
    pub lambda: Descriptives,
    pub xi: Descriptives,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicationSummary {
    pub initial: JsbParams,
    /// Random starting points that left an observation outside the support
    /// and were drawn again.
    pub initial_redraws: usize,
    pub chain_seed: u64,
    pub posterior_mean: JsbParams,
    pub lambda_acceptance: f64,
    pub xi_acceptance: f64,
}

/// Extreme-initials chain against a default-initials chain on the same data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremeComparison {
    pub initial: JsbParams,
    pub tail_mean: [f64; 4],
    pub reference_tail_mean: [f64; 4],
    /// `sqrt(se_a^2 + se_b^2)` from batch means over the tail window.
    pub pooled_se: [f64; 4],
}

impl ExtremeComparison {
    /// Largest componentwise gap in units of the pooled standard error.
    pub fn max_standardized_gap(&self) -> f64 {
        (0..4)
            .map(|k| (self.tail_mean[k] - self.reference_tail_mean[k]).abs() / self.pooled_se[k])
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub config: RobustnessConfig,
    pub pooled: PooledDescriptives,
    pub replications: Vec<ReplicationSummary>,
    pub extreme: ExtremeComparison,
}

pub struct RobustnessOutput {
    pub report: RobustnessReport,
    /// One chain per replication, in replication order.
    pub chains: Vec<ChainOutput>,
    pub extreme_chain: ChainOutput,
    pub reference_chain: ChainOutput,
}

/// Random starting point that covers the data, redrawing `(lambda, xi)`
/// until `xi < x_(1)` and `xi + lambda > x_(n)`.
fn robust_initials(rng: &mut RngStream, data: &Dataset) -> Result<(JsbParams, usize)> {
    let delta = uniform(rng, ROBUST_DELTA0)?;
    let gamma = uniform(rng, ROBUST_GAMMA0)?;
    let mut redraws = 0;
    loop {
        let p = JsbParams::new(delta, gamma, uniform(rng, ROBUST_LAMBDA0)?, uniform(rng, ROBUST_XI0)?)?;
        if p.covers(data) {
            return Ok((p, redraws));
        }
        redraws += 1;
        if redraws > 10_000 {
            return Err(Error::InvalidData(format!(
                "no starting point in the initial-value box covers [{}, {}]",
                data.min(),
                data.max()
            )));
        }
    }
}

fn tail_stats(chain: &ChainOutput) -> ([f64; 4], [f64; 4]) {
    let rows = chain.rows();
    let tail = &rows[rows.len() - TAIL_WINDOW..];
    let mut m = [0.0; 4];
    let mut se = [0.0; 4];
    for k in 0..4 {
        let col: Vec<f64> = tail.iter().map(|r| r[k]).collect();
        m[k] = mean(&col);
        se[k] = batch_means_se(&col, TAIL_BATCHES);
    }
    (m, se)
}

fn column(chains: &[ChainOutput], k: usize) -> Vec<f64> {
    chains
        .iter()
        .flat_map(|c| c.post_burn_in().iter().map(move |p| p.to_array()[k]))
        .collect()
}

pub fn run_robustness_study(config: &RobustnessConfig) -> Result<RobustnessOutput> {
    config.validate()?;
    let runs: Vec<(ChainOutput, ReplicationSummary)> = (0..config.replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = RngStream::derive(config.seed, rep as u64);
            let data = config.truth.sample(config.n, &mut rng)?;
            let (initial, initial_redraws) = robust_initials(&mut rng, &data)?;
            let chain_seed = rng.next_u64();
            let chain = run_jsb_gibbs(&data, &config.gibbs(chain_seed, Some(initial)))?;
            let (lambda_acceptance, xi_acceptance) = chain.acceptance_rates();
            let summary = ReplicationSummary {
                initial,
                initial_redraws,
                chain_seed,
                posterior_mean: chain.posterior_estimate()?,
                lambda_acceptance,
                xi_acceptance,
            };
            Ok((chain, summary))
        })
        .collect::<Result<_>>()?;
    let (chains, replications): (Vec<_>, Vec<_>) = runs.into_iter().unzip();

    let pooled = PooledDescriptives {
        delta: Descriptives::of(&column(&chains, 0)),
        gamma: Descriptives::of(&column(&chains, 1)),
        lambda: Descriptives::of(&column(&chains, 2)),
        xi: Descriptives::of(&column(&chains, 3)),
    };

    // the extreme chain gets its own dataset, on the stream after the
    // replications
    let mut rng = RngStream::derive(config.seed, config.replications as u64);
    let data = config.truth.sample(config.n, &mut rng)?;
    let extreme_initial = JsbParams::from_array(EXTREME_INITIALS);
    if !extreme_initial.covers(&data) {
        return Err(Error::InvalidData(format!(
            "extreme starting point {extreme_initial:?} does not cover [{}, {}]",
            data.min(),
            data.max()
        )));
    }
    let seed = rng.next_u64();
    let extreme_chain = run_jsb_gibbs(&data, &config.gibbs(seed, Some(extreme_initial)))?;
    let reference_chain = run_jsb_gibbs(&data, &config.gibbs(seed, Some(initial_values_jsb(&data)?)))?;
    let (tail_mean, se_a) = tail_stats(&extreme_chain);
    let (reference_tail_mean, se_b) = tail_stats(&reference_chain);
    let extreme = ExtremeComparison {
        initial: extreme_initial,
        tail_mean,
        reference_tail_mean,
        pooled_se: std::array::from_fn(|k| se_a[k].hypot(se_b[k])),
    };

    Ok(RobustnessOutput {
        report: RobustnessReport {
            config: config.clone(),
            pooled,
            replications,
            extreme,
        },
        chains,
        extreme_chain,
        reference_chain,
    })
}

pub const GRID_POINTS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub x: f64,
    pub jsb_pdf: f64,
    pub weibull_pdf: f64,
}

/// `GRID_POINTS` equally spaced points from `x_(1)` to `x_(n)` inclusive.
pub fn grid_points(data: &Dataset) -> Vec<f64> {
    let (lo, hi) = (data.min(), data.max());
    (0..GRID_POINTS)
        .map(|i| {
            if i + 1 == GRID_POINTS {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (GRID_POINTS - 1) as f64
            }
        })
        .collect()
}

/// Both fitted densities over [`grid_points`].
pub fn density_grid(data: &Dataset, jsb: &JsbParams, weibull: &WeibullParams) -> Vec<DensityRow> {
    grid_points(data)
        .into_iter()
        .map(|x| DensityRow {
            x,
            jsb_pdf: jsb.ln_pdf(x).exp(),
            weibull_pdf: weibull.ln_pdf(x).exp(),
        })
        .collect()
}

pub fn write_density_grid<W: std::io::Write>(mut w: W, rows: &[DensityRow]) -> std::io::Result<()> {
    writeln!(w, "x,jsb_pdf,weibull_pdf")?;
    for r in rows {
        writeln!(w, "{},{},{}", r.x, r.jsb_pdf, r.weibull_pdf)?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoModelReport {
    pub jsb: JsbParams,
    pub weibull: WeibullParams,
    pub comparison: ModelComparison,
}

pub struct TwoModelAnalysis {
    pub report: TwoModelReport,
    pub grid: Vec<DensityRow>,
    pub jsb_chain: ChainOutput,
    pub weibull_chain: WeibullChainOutput,
}

/// Fits both models by Gibbs sampling with the same settings and seed, then
/// compares the posterior-mean fits.
pub fn run_two_model_analysis(data: &Dataset, config: &GibbsConfig<JsbParams>) -> Result<TwoModelAnalysis> {
    let jsb_chain = run_jsb_gibbs(data, config)?;
    let weibull_chain = run_weibull_gibbs(data, &config.retarget::<WeibullParams>(None))?;
    let jsb = jsb_chain.posterior_estimate()?;
    let weibull = weibull_chain.posterior_estimate()?;
    let comparison = model_comparison(data, &jsb, &weibull)?;
    Ok(TwoModelAnalysis {
        grid: density_grid(data, &jsb, &weibull),
        report: TwoModelReport {
            jsb,
            weibull,
            comparison,
        },
        jsb_chain,
        weibull_chain,
    })
}
