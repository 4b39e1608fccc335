//! Goodness-of-fit statistics: Anderson-Darling, Cramer-von Mises,
//! Kolmogorov-Smirnov and log-likelihood.

use serde::{Deserialize, Serialize};

use crate::distributions::{ContinuousModel, Dataset, JsbParams, WeibullParams};
use crate::error::{Error, Result};

/// Fraction of observations `<= x`.
pub fn empirical_cdf(data: &Dataset, x: f64) -> f64 {
    data.values().partition_point(|&v| v <= x) as f64 / data.len() as f64
}

/// Model given by a pair of closures, for CDFs that are not one of the
/// parametric families.
pub struct FnModel<C, L> {
    pub cdf: C,
    pub ln_pdf: L,
}

impl<C, L> ContinuousModel for FnModel<C, L>
where
    C: Fn(f64) -> f64,
    L: Fn(f64) -> f64,
{
    fn cdf_at(&self, x: f64) -> f64 {
        (self.cdf)(x)
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        (self.ln_pdf)(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    #[serde(with = "crate::float_serde")]
    pub ad: f64,
    pub cm: f64,
    pub ks: f64,
    /// `-inf` when an observation falls outside the model support.
    #[serde(with = "crate::float_serde")]
    pub ll: f64,
}

/// Kolmogorov-Smirnov distance computed two ways.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KsPair {
    /// `sup |G - G_n|`, taking both one-sided limits of the step function.
    pub two_sided: f64,
    /// `max |G(x_i) - G_n(x_i)|` over the sample points only.
    pub at_points: f64,
}

fn fitted_cdf<M: ContinuousModel + ?Sized>(data: &Dataset, model: &M) -> Vec<f64> {
    data.values().iter().map(|&x| model.cdf_at(x)).collect()
}

fn check_n(data: &Dataset) -> Result<()> {
    if data.len() < 2 {
        return Err(Error::InvalidData(format!(
            "goodness of fit needs at least 2 observations, got {}",
            data.len()
        )));
    }
    Ok(())
}

pub fn ks_statistics<M: ContinuousModel + ?Sized>(data: &Dataset, model: &M) -> KsPair {
    let n = data.len() as f64;
    let xs = data.values();
    let g = fitted_cdf(data, model);
    let mut two_sided: f64 = 0.0;
    let mut at_points: f64 = 0.0;
    for (&x, &gi) in xs.iter().zip(&g) {
        // ties: G_n jumps at the first copy and reaches its level at the last
        let left = xs.partition_point(|&v| v < x) as f64 / n;
        let right = xs.partition_point(|&v| v <= x) as f64 / n;
        at_points = at_points.max((gi - right).abs());
        two_sided = two_sided.max((gi - right).abs()).max((gi - left).abs());
    }
    KsPair { two_sided, at_points }
}

fn cramer_von_mises(g: &[f64]) -> f64 {
    let n = g.len() as f64;
    let sum: f64 = g
        .iter()
        .enumerate()
        .map(|(i, &gi)| (gi - (2.0 * i as f64 + 1.0) / (2.0 * n)).powi(2))
        .sum();
    1.0 / (12.0 * n) + sum
}

fn anderson_darling(xs: &[f64], g: &[f64]) -> Result<f64> {
    if let Some(i) = g.iter().position(|&gi| !(gi > 0.0 && gi < 1.0)) {
        return Err(Error::GofUndefined(format!(
            "fitted CDF is {} at observation {} (x = {}); Anderson-Darling needs values strictly inside (0, 1)",
            g[i],
            i + 1,
            xs[i]
        )));
    }
    let n = g.len();
    let sum: f64 = (0..n)
        .map(|i| (2 * i + 1) as f64 * (g[i].ln() + (-g[n - 1 - i]).ln_1p()))
        .sum();
    Ok(-(n as f64) - sum / n as f64)
}

/// All four statistics. Fails when the fitted CDF is 0 or 1 at an
/// observation, which leaves AD undefined.
pub fn compute_gof<M: ContinuousModel + ?Sized>(data: &Dataset, model: &M) -> Result<GofReport> {
    check_n(data)?;
    let g = fitted_cdf(data, model);
    let ad = anderson_darling(data.values(), &g)?;
    Ok(GofReport {
        ad,
        cm: cramer_von_mises(&g),
        ks: ks_statistics(data, model).two_sided,
        ll: log_likelihood(data, model),
    })
}

/// Like [`compute_gof`] but reports an undefined AD as `+inf`, so a model
/// whose support misses the data ranks last instead of aborting a comparison.
pub fn compute_gof_lenient<M: ContinuousModel + ?Sized>(data: &Dataset, model: &M) -> Result<GofReport> {
    check_n(data)?;
    let g = fitted_cdf(data, model);
    Ok(GofReport {
        ad: anderson_darling(data.values(), &g).unwrap_or(f64::INFINITY),
        cm: cramer_von_mises(&g),
        ks: ks_statistics(data, model).two_sided,
        ll: log_likelihood(data, model),
    })
}

fn log_likelihood<M: ContinuousModel + ?Sized>(data: &Dataset, model: &M) -> f64 {
    let mut ll = 0.0;
    for &x in data.values() {
        let l = model.ln_pdf(x);
        if l == f64::NEG_INFINITY || l.is_nan() {
            return f64::NEG_INFINITY;
        }
        ll += l;
    }
    ll
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Winner {
    Jsb,
    Weibull,
    Tie,
}

fn smaller_wins(jsb: f64, weibull: f64) -> Winner {
    if jsb < weibull {
        Winner::Jsb
    } else if weibull < jsb {
        Winner::Weibull
    } else {
        Winner::Tie
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Winners {
    pub ad: Winner,
    pub cm: Winner,
    pub ks: Winner,
    pub ll: Winner,
}

impl Winners {
    /// Lower AD, CM and KS win; higher LL wins.
    pub fn from_reports(jsb: &GofReport, weibull: &GofReport) -> Self {
        Winners {
            ad: smaller_wins(jsb.ad, weibull.ad),
            cm: smaller_wins(jsb.cm, weibull.cm),
            ks: smaller_wins(jsb.ks, weibull.ks),
            ll: smaller_wins(-jsb.ll, -weibull.ll),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelComparison {
    pub jsb: GofReport,
    pub weibull: GofReport,
    pub winners: Winners,
}

pub fn model_comparison(data: &Dataset, jsb: &JsbParams, weibull: &WeibullParams) -> Result<ModelComparison> {
    let j = compute_gof_lenient(data, jsb)?;
    let w = compute_gof_lenient(data, weibull)?;
    Ok(ModelComparison {
        jsb: j,
        weibull: w,
        winners: Winners::from_reports(&j, &w),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quarter_uniform() -> FnModel<impl Fn(f64) -> f64, impl Fn(f64) -> f64> {
        FnModel {
            cdf: |x: f64| (x / 4.0).clamp(0.0, 1.0),
            ln_pdf: |x: f64| if x > 0.0 && x < 4.0 { -(4f64.ln()) } else { f64::NEG_INFINITY },
        }
    }

    fn data(v: &[f64]) -> Dataset {
        Dataset::new(v.to_vec()).unwrap()
    }

    #[test]
    fn empirical_cdf_steps() {
        let d = data(&[1.0, 2.0, 3.0]);
        assert_eq!(empirical_cdf(&d, 0.5), 0.0);
        assert_eq!(empirical_cdf(&d, 3.0), 1.0);
        assert_eq!(empirical_cdf(&d, 2.0), 2.0 / 3.0);
    }

    #[test]
    fn three_point_uniform_example() {
        let d = data(&[1.0, 2.0, 3.0]);
        let r = compute_gof(&d, &quarter_uniform()).unwrap();
        assert!((r.ks - 0.25).abs() < 1e-15);
        let cm = 1.0 / 36.0 + (0.25f64 - 1.0 / 6.0).powi(2) + (0.75f64 - 5.0 / 6.0).powi(2);
        assert!((r.cm - cm).abs() < 1e-15);
        assert!((r.cm - 0.041_666_7).abs() < 1e-7);
        assert!((r.ll + 3.0 * 4f64.ln()).abs() < 1e-12);
        let ks = ks_statistics(&d, &quarter_uniform());
        assert!((ks.at_points - 0.25).abs() < 1e-15);
    }

    #[test]
    fn left_limits_matter() {
        let d = data(&[1.0, 2.0]);
        let m = FnModel {
            cdf: |x: f64| if x < 1.5 { 0.5 } else { 0.9 },
            ln_pdf: |_| 0.0,
        };
        let ks = ks_statistics(&d, &m);
        assert!((ks.at_points - 0.1).abs() < 1e-15);
        assert!((ks.two_sided - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cm_minimum_on_pit_uniform() {
        let n = 7;
        let d = data(&(1..=n).map(|i| i as f64).collect::<Vec<_>>());
        let m = FnModel {
            cdf: move |x: f64| (2.0 * x - 1.0) / (2.0 * n as f64),
            ln_pdf: |_| 0.0,
        };
        let r = compute_gof(&d, &m).unwrap();
        assert_eq!(r.cm, 1.0 / (12.0 * n as f64));
    }

    #[test]
    fn ad_undefined_names_observation() {
        let d = data(&[1.0, 2.0, 5.0]);
        match compute_gof(&d, &quarter_uniform()) {
            Err(Error::GofUndefined(msg)) => assert!(msg.contains("observation 3"), "{msg}"),
            other => panic!("expected AD failure, got {other:?}"),
        }
        let lenient = compute_gof_lenient(&d, &quarter_uniform()).unwrap();
        assert_eq!(lenient.ad, f64::INFINITY);
        assert_eq!(lenient.ll, f64::NEG_INFINITY);
    }

    #[test]
    fn ad_against_direct_formula() {
        // n = 2, G = (0.2, 0.7): -2 - (1/2)[1(ln .2 + ln .3) + 3(ln .7 + ln .8)]
        let d = data(&[1.0, 2.0]);
        let m = FnModel {
            cdf: |x: f64| if x < 1.5 { 0.2 } else { 0.7 },
            ln_pdf: |_| 0.0,
        };
        let want = -2.0 - 0.5 * ((0.2f64.ln() + 0.3f64.ln()) + 3.0 * (0.7f64.ln() + 0.8f64.ln()));
        assert!((compute_gof(&d, &m).unwrap().ad - want).abs() < 1e-14);
    }

    #[test]
    fn single_observation_rejected() {
        assert!(compute_gof(&data(&[1.0]), &quarter_uniform()).is_err());
    }

    #[test]
    fn published_comparison_jsb_wins_all() {
        let jsb = GofReport { ad: 0.167, cm: 0.023, ks: 0.059, ll: -196.808 };
        let wei = GofReport { ad: 0.310, cm: 0.048, ks: 0.082, ll: -199.579 };
        let w = Winners::from_reports(&jsb, &wei);
        assert_eq!([w.ad, w.cm, w.ks, w.ll], [Winner::Jsb; 4]);
    }

    #[test]
    fn identical_models_tie() {
        let p = JsbParams::new(2.0, 2.0, 20.0, 0.0).unwrap();
        let d = p.sample(50, &mut crate::mcmc::RngStream::new(3)).unwrap();
        let r = compute_gof(&d, &p).unwrap();
        let w = Winners::from_reports(&r, &r);
        assert_eq!([w.ad, w.cm, w.ks, w.ll], [Winner::Tie; 4]);
    }

    #[test]
    fn sentinel_loses_log_likelihood() {
        let wei = WeibullParams::new(2.0, 5.0, 0.0).unwrap();
        let d = wei.sample(40, &mut crate::mcmc::RngStream::new(9)).unwrap();
        // JSB support ends below the sample maximum
        let jsb = JsbParams::new(1.0, 0.0, d.max() * 0.9, 0.0).unwrap();
        let c = model_comparison(&d, &jsb, &wei).unwrap();
        assert_eq!(c.jsb.ll, f64::NEG_INFINITY);
        assert_eq!(c.winners.ll, Winner::Weibull);
        assert_eq!(c.winners.ad, Winner::Weibull);
    }

    #[test]
    fn report_json_round_trip_with_sentinel() {
        let r = GofReport { ad: f64::INFINITY, cm: 0.5, ks: 0.25, ll: f64::NEG_INFINITY };
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, r#"{"ad":"inf","cm":0.5,"ks":0.25,"ll":"-inf"}"#);
        assert_eq!(serde_json::from_str::<GofReport>(&s).unwrap(), r);
    }
}
