use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use sbfit_core::experiments::{
    grid_points, run_nr_failure_study, run_robustness_study, run_two_model_analysis, write_density_grid,
    NrStudyConfig, RobustnessConfig,
};
use sbfit_core::gof::{compute_gof_lenient, GofReport, Winners};
use sbfit_core::jsb_bayes::{initial_values_jsb, run_jsb_gibbs, ChainOutput, MIN_SAMPLE_SIZE};
use sbfit_core::ml_jsb::{ml_fit_jsb, MlResult, DEFAULT_MAX_ITER, DEFAULT_TOLERANCE};
use sbfit_core::weibull_bayes::{run_weibull_gibbs, WeibullChainOutput};
use sbfit_core::{ContinuousModel, Dataset, GibbsConfig, JsbParams, WeibullParams};

use crate::config::{parse_list, Settings};
use crate::error::CliError;
use crate::ingest::ingest;
use crate::report::write_json;
use crate::{ChainFlags, CommonFlags, ExperimentArgs, ExperimentName, FitArgs, GofArgs, Method, ModelChoice};

pub const SEED_ENV: &str = "SBFIT_SEED";

fn settings(common: &CommonFlags) -> Result<Settings, CliError> {
    match &common.config {
        Some(path) => Settings::load(path),
        None => Ok(Settings::default()),
    }
}

fn resolve_seed(common: &CommonFlags, s: &Settings) -> Result<u64, CliError> {
    if let Some(seed) = s.pick(common.seed, "seed")? {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(raw) => raw
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}={raw:?} is not an unsigned 64-bit integer"))),
        Err(_) => Ok(0),
    }
}

fn resolve_out(common: &CommonFlags, s: &Settings) -> Result<PathBuf, CliError> {
    let out = s.pick(common.out.clone(), "out")?.unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out)
        .map_err(|e| CliError::Data(format!("cannot create output directory {}: {e}", out.display())))?;
    Ok(out)
}

fn resolve_chain<P>(flags: &ChainFlags, s: &Settings, seed: u64) -> Result<GibbsConfig<P>, CliError> {
    let d: GibbsConfig<P> = GibbsConfig::with_seed(seed);
    let config = GibbsConfig {
        iterations: s.pick(flags.iterations, "iterations")?.unwrap_or(d.iterations),
        burn_in: s.pick(flags.burn_in, "burn-in")?.unwrap_or(d.burn_in),
        inner_mh_steps: s.pick(flags.inner_steps, "inner-steps")?.unwrap_or(d.inner_mh_steps),
        seed,
        initial_values: None,
    };
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(config)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

fn write_with<F>(path: &Path, f: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let mut w = create(path)?;
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JsbFit {
    pub estimate: JsbParams,
    pub initial: JsbParams,
    pub lambda_acceptance: f64,
    pub xi_acceptance: f64,
    pub gof: GofReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeibullFit {
    pub estimate: WeibullParams,
    pub initial: WeibullParams,
    pub mu_acceptance: f64,
    pub gof: GofReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlFit {
    pub initial: JsbParams,
    pub result: MlResult,
    /// Present only when the optimizer converged.
    pub gof: Option<GofReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub input: String,
    pub n: usize,
    pub model: ModelChoice,
    pub method: Method,
    pub seed: u64,
    pub iterations: usize,
    pub burn_in: usize,
    pub inner_mh_steps: usize,
    pub jsb: Option<JsbFit>,
    pub weibull: Option<WeibullFit>,
    pub ml: Option<MlFit>,
    pub winners: Option<Winners>,
}

fn jsb_fit(data: &Dataset, chain: &ChainOutput) -> Result<JsbFit, CliError> {
    let estimate = chain.posterior_estimate()?;
    let (lambda_acceptance, xi_acceptance) = chain.acceptance_rates();
    Ok(JsbFit {
        estimate,
        initial: chain.initial,
        lambda_acceptance,
        xi_acceptance,
        gof: compute_gof_lenient(data, &estimate)?,
    })
}

fn weibull_fit(data: &Dataset, chain: &WeibullChainOutput) -> Result<WeibullFit, CliError> {
    let estimate = chain.posterior_estimate()?;
    Ok(WeibullFit {
        estimate,
        initial: chain.initial,
        mu_acceptance: chain.acceptance_rate(),
        gof: compute_gof_lenient(data, &estimate)?,
    })
}

fn write_single_grid(path: &Path, data: &Dataset, label: &str, model: &dyn ContinuousModel) -> Result<(), CliError> {
    write_with(path, |w| {
        writeln!(w, "x,{label}_pdf")?;
        for x in grid_points(data) {
            writeln!(w, "{x},{}", model.ln_pdf(x).exp())?;
        }
        Ok(())
    })
}

pub fn fit(args: FitArgs) -> Result<(), CliError> {
    let s = settings(&args.common)?;
    let model = s.pick(args.model, "model")?.unwrap_or(ModelChoice::Both);
    let method = s.pick(args.method, "method")?.unwrap_or(Method::Bayes);
    if method == Method::Ml && model != ModelChoice::Jsb {
        return Err(CliError::Usage(
            "maximum likelihood is implemented for the Johnson SB model only; use --model jsb".into(),
        ));
    }
    let seed = resolve_seed(&args.common, &s)?;
    let config: GibbsConfig<JsbParams> = resolve_chain(&args.chain, &s, seed)?;
    let data = ingest(&args.input)?;
    if data.len() < MIN_SAMPLE_SIZE {
        return Err(CliError::Data(format!(
            "{}: fitting needs at least {MIN_SAMPLE_SIZE} observations, got {}",
            args.input.display(),
            data.len()
        )));
    }
    let out = resolve_out(&args.common, &s)?;

    let mut report = FitReport {
        input: args.input.display().to_string(),
        n: data.len(),
        model,
        method,
        seed,
        iterations: config.iterations,
        burn_in: config.burn_in,
        inner_mh_steps: config.inner_mh_steps,
        jsb: None,
        weibull: None,
        ml: None,
        winners: None,
    };
    let mut ml_failure = None;

    match (method, model) {
        (Method::Ml, _) => {
            let initial = initial_values_jsb(&data)?;
            let result = ml_fit_jsb(&data, initial, DEFAULT_MAX_ITER, DEFAULT_TOLERANCE);
            let gof = if result.converged {
                write_single_grid(&out.join("density_grid.csv"), &data, "jsb", &result.params)?;
                Some(compute_gof_lenient(&data, &result.params)?)
            } else {
                ml_failure = result.failure;
                None
            };
            report.ml = Some(MlFit { initial, result, gof });
        }
        (Method::Bayes, ModelChoice::Jsb) => {
            let chain = run_jsb_gibbs(&data, &config)?;
            write_with(&out.join("trace_jsb.csv"), |w| chain.write_trace_csv(w))?;
            let fit = jsb_fit(&data, &chain)?;
            write_single_grid(&out.join("density_grid.csv"), &data, "jsb", &fit.estimate)?;
            report.jsb = Some(fit);
        }
        (Method::Bayes, ModelChoice::Weibull) => {
            let chain = run_weibull_gibbs(&data, &config.retarget::<WeibullParams>(None))?;
            write_with(&out.join("trace_weibull.csv"), |w| chain.write_trace_csv(w))?;
            let fit = weibull_fit(&data, &chain)?;
            write_single_grid(&out.join("density_grid.csv"), &data, "weibull", &fit.estimate)?;
            report.weibull = Some(fit);
        }
        (Method::Bayes, ModelChoice::Both) => {
            let analysis = run_two_model_analysis(&data, &config)?;
            write_with(&out.join("trace_jsb.csv"), |w| analysis.jsb_chain.write_trace_csv(w))?;
            write_with(&out.join("trace_weibull.csv"), |w| analysis.weibull_chain.write_trace_csv(w))?;
            write_with(&out.join("density_grid.csv"), |w| write_density_grid(w, &analysis.grid))?;
            report.jsb = Some(jsb_fit(&data, &analysis.jsb_chain)?);
            report.weibull = Some(weibull_fit(&data, &analysis.weibull_chain)?);
            report.winners = Some(analysis.report.comparison.winners);
        }
    }

    let path = out.join("fit.json");
    let report = write_json(&path, &report)?;
    print_fit_summary(&report);
    println!("wrote {}", path.display());
    if let Some(reason) = ml_failure {
        return Err(CliError::Numerical(format!(
            "maximum likelihood did not converge ({reason:?}); details in {}",
            path.display()
        )));
    }
    Ok(())
}

fn print_gof(label: &str, g: &GofReport) {
    println!("  {label:<8} AD {:.4}  CM {:.4}  KS {:.4}  LL {:.3}", g.ad, g.cm, g.ks, g.ll);
}

fn print_fit_summary(r: &FitReport) {
    println!("n = {}", r.n);
    if let Some(j) = &r.jsb {
        let e = j.estimate;
        println!(
            "JSB      delta {:.4}  gamma {:.4}  lambda {:.4}  xi {:.4}",
            e.delta, e.gamma, e.lambda, e.xi
        );
    }
    if let Some(w) = &r.weibull {
        let e = w.estimate;
        println!("Weibull  alpha {:.4}  beta {:.4}  mu {:.4}", e.alpha, e.beta, e.mu);
    }
    if let Some(m) = &r.ml {
        let e = m.result.params;
        println!(
            "ML JSB   converged {}  delta {:.4}  gamma {:.4}  lambda {:.4}  xi {:.4}",
            m.result.converged, e.delta, e.gamma, e.lambda, e.xi
        );
    }
    println!("goodness of fit:");
    if let Some(j) = &r.jsb {
        print_gof("JSB", &j.gof);
    }
    if let Some(w) = &r.weibull {
        print_gof("Weibull", &w.gof);
    }
    if let Some(g) = r.ml.as_ref().and_then(|m| m.gof.as_ref()) {
        print_gof("ML JSB", g);
    }
}

pub fn experiment(args: ExperimentArgs) -> Result<(), CliError> {
    let s = settings(&args.common)?;
    let seed = resolve_seed(&args.common, &s)?;
    let reps = s.pick(args.reps, "reps")?;
    if reps == Some(0) {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    match args.name {
        ExperimentName::NrFailure => {
            let mut config = NrStudyConfig {
                seed,
                ..Default::default()
            };
            if let Some(r) = reps {
                config.replications = r;
            }
            if let Some(raw) = s.pick(args.sizes.clone(), "sizes")? {
                config.sizes = parse_list(&raw, "sample size")?;
            }
            config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
            let out = resolve_out(&args.common, &s)?;
            let report = run_nr_failure_study(&config)?;
            let path = out.join("study_nr-failure.json");
            let report = write_json(&path, &report)?;
            for size in &report.sizes {
                println!(
                    "n = {:>5}: {:5.1}% converged ({} of {})",
                    size.n, size.percent_converged, size.converged, size.replications
                );
            }
            println!("wrote {}", path.display());
        }
        ExperimentName::Robustness => {
            if args.sizes.is_some() {
                return Err(CliError::Usage("--sizes applies to nr-failure only".into()));
            }
            let chain: GibbsConfig<JsbParams> = resolve_chain(&args.chain, &s, seed)?;
            let mut config = RobustnessConfig {
                seed,
                iterations: chain.iterations,
                burn_in: chain.burn_in,
                inner_mh_steps: chain.inner_mh_steps,
                ..Default::default()
            };
            if let Some(r) = reps {
                config.replications = r;
            }
            config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
            let out = resolve_out(&args.common, &s)?;
            let output = run_robustness_study(&config)?;
            let width = config.replications.to_string().len().max(3);
            for (i, chain) in output.chains.iter().enumerate() {
                let path = out.join(format!("trace_robustness_{:0width$}.csv", i + 1));
                write_with(&path, |w| chain.write_trace_csv(w))?;
            }
            write_with(&out.join("trace_robustness_extreme.csv"), |w| {
                output.extreme_chain.write_trace_csv(w)
            })?;
            write_with(&out.join("trace_robustness_reference.csv"), |w| {
                output.reference_chain.write_trace_csv(w)
            })?;
            let path = out.join("study_robustness.json");
            let report = write_json(&path, &output.report)?;
            let p = &report.pooled;
            println!("pooled post-burn-in medians over {} replications:", config.replications);
            println!(
                "  delta {:.3}  gamma {:.3}  lambda {:.3}  xi {:.3}",
                p.delta.median, p.gamma.median, p.lambda.median, p.xi.median
            );
            println!("wrote {} and {} trace files", path.display(), output.chains.len() + 2);
        }
    }
    Ok(())
}

fn parse_params<const K: usize>(raw: &str, what: &str) -> Result<[f64; K], CliError> {
    let v: Vec<f64> = parse_list(raw, what)?;
    v.try_into()
        .map_err(|v: Vec<f64>| CliError::Usage(format!("{what} needs {K} comma-separated values, got {}", v.len())))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GofFileReport {
    pub input: String,
    pub n: usize,
    pub jsb: Option<(JsbParams, GofReport)>,
    pub weibull: Option<(WeibullParams, GofReport)>,
    pub winners: Option<Winners>,
}

pub fn gof(args: GofArgs) -> Result<(), CliError> {
    let s = settings(&args.common)?;
    let jsb = match s.pick(args.jsb.clone(), "jsb")? {
        Some(raw) => {
            let [d, g, l, x] = parse_params(&raw, "--jsb")?;
            Some(JsbParams::new(d, g, l, x).map_err(|e| CliError::Usage(e.to_string()))?)
        }
        None => None,
    };
    let weibull = match s.pick(args.weibull.clone(), "weibull")? {
        Some(raw) => {
            let [a, b, m] = parse_params(&raw, "--weibull")?;
            Some(WeibullParams::new(a, b, m).map_err(|e| CliError::Usage(e.to_string()))?)
        }
        None => None,
    };
    if jsb.is_none() && weibull.is_none() {
        return Err(CliError::Usage("give --jsb and/or --weibull parameter values".into()));
    }
    let data = ingest(&args.input)?;
    let out = resolve_out(&args.common, &s)?;
    let jsb = jsb.map(|p| compute_gof_lenient(&data, &p).map(|g| (p, g))).transpose()?;
    let weibull = weibull.map(|p| compute_gof_lenient(&data, &p).map(|g| (p, g))).transpose()?;
    let winners = match (&jsb, &weibull) {
        (Some((_, a)), Some((_, b))) => Some(Winners::from_reports(a, b)),
        _ => None,
    };
    let report = GofFileReport {
        input: args.input.display().to_string(),
        n: data.len(),
        jsb,
        weibull,
        winners,
    };
    let path = out.join("gof.json");
    let report = write_json(&path, &report)?;
    if let Some((_, g)) = &report.jsb {
        print_gof("JSB", g);
    }
    if let Some((_, g)) = &report.weibull {
        print_gof("Weibull", g);
    }
    println!("wrote {}", path.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use sbfit_core::ml_jsb::FailureReason;

    #[test]
    fn fit_report_round_trips_through_json() {
        let jsb = JsbParams::new(1.0 / 3.0, -2.0 / 7.0, 20.123456789012345, 0.1).unwrap();
        let gof = GofReport { ad: f64::INFINITY, cm: 0.1 / 3.0, ks: 2.0 / 3.0, ll: f64::NEG_INFINITY };
        let report = FitReport {
            input: "in.txt".into(),
            n: 12,
            model: ModelChoice::Jsb,
            method: Method::Ml,
            seed: u64::MAX,
            iterations: 10,
            burn_in: 5,
            inner_mh_steps: 30,
            jsb: Some(JsbFit { estimate: jsb, initial: jsb, lambda_acceptance: 0.123456789, xi_acceptance: 1e-300, gof }),
            weibull: None,
            ml: Some(MlFit {
                initial: jsb,
                result: MlResult {
                    converged: false,
                    params: jsb,
                    iterations: 500,
                    gradient_norm: f64::NAN,
                    log_likelihood: -1234.56789012345,
                    failure: Some(FailureReason::NonFiniteObjective),
                },
                gof: None,
            }),
            winners: None,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fit.json");
        let written = write_json(&path, &report).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let back: FitReport = serde_json::from_str(&text).unwrap();
        assert!(back.ml.as_ref().unwrap().result.gradient_norm.is_nan());
        let strip = |mut r: FitReport| {
            r.ml.as_mut().unwrap().result.gradient_norm = 0.0;
            r
        };
        assert_eq!(strip(back.clone()), strip(written));
        assert_eq!(serde_json::to_string_pretty(&back).unwrap() + "\n", text);
    }
}
