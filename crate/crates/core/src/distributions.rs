//! Johnson SB and three-parameter Weibull families.

use rand::distr::Open01;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Standard-normal CDF, `0.5 * erfc(-z / sqrt 2)`.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

pub fn std_normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// A fitted univariate model as seen by the goodness-of-fit statistics.
pub trait ContinuousModel {
    fn cdf_at(&self, x: f64) -> f64;
    /// Log density; `-inf` outside the support.
    fn ln_pdf(&self, x: f64) -> f64;
}

/// Sorted, validated sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Dataset {
    values: Vec<f64>,
}

impl Dataset {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidData("dataset is empty".into()));
        }
        if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(bad));
        }
        values.sort_by(f64::total_cmp);
        Ok(Dataset { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Smallest observation, `x_(1)`.
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    /// Largest observation, `x_(n)`.
    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }
}

impl TryFrom<Vec<f64>> for Dataset {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Dataset::new(v)
    }
}

impl From<Dataset> for Vec<f64> {
    fn from(d: Dataset) -> Self {
        d.values
    }
}

fn finite(x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite(x))
    }
}

/// Johnson SB parameters `(delta, gamma, lambda, xi)`; support is
/// `(xi, xi + lambda)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JsbParams {
    pub delta: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub xi: f64,
}

impl JsbParams {
    pub fn new(delta: f64, gamma: f64, lambda: f64, xi: f64) -> Result<Self> {
        let p = JsbParams {
            delta,
            gamma,
            lambda,
            xi,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.delta, self.gamma, self.lambda, self.xi]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite || self.delta <= 0.0 || self.lambda <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "Johnson SB requires finite parameters with delta > 0 and lambda > 0, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.delta, self.gamma, self.lambda, self.xi]
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        JsbParams {
            delta: v[0],
            gamma: v[1],
            lambda: v[2],
            xi: v[3],
        }
    }

    pub fn upper(&self) -> f64 {
        self.xi + self.lambda
    }

    /// True when every observation lies strictly inside the support.
    pub fn covers(&self, data: &Dataset) -> bool {
        data.min() > self.xi && data.max() < self.upper()
    }

    /// Normal variate `gamma + delta * ln((x - xi) / (xi + lambda - x))`.
    fn transformed(&self, x: f64) -> f64 {
        self.gamma + self.delta * ((x - self.xi).ln() - (self.upper() - x).ln())
    }

    fn ln_pdf_inside(&self, x: f64) -> f64 {
        let lo = x - self.xi;
        let hi = self.upper() - x;
        let z = self.gamma + self.delta * (lo.ln() - hi.ln());
        self.delta.ln() + self.lambda.ln() - LN_SQRT_2PI - lo.ln() - hi.ln() - 0.5 * z * z
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        finite(x)?;
        Ok(self.ln_pdf(x).exp())
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        finite(x)?;
        Ok(self.cdf_at(x))
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "probability must lie in (0, 1), got {p}"
            )));
        }
        Ok(self.x_at_normal(std_normal_quantile(p)))
    }

    /// Maps a standard-normal value onto the support, staying strictly inside.
    fn x_at_normal(&self, z: f64) -> f64 {
        let x = self.xi + self.lambda / (1.0 + (-(z - self.gamma) / self.delta).exp());
        if x <= self.xi {
            self.xi.next_up()
        } else if x >= self.upper() {
            self.upper().next_down()
        } else {
            x
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Dataset> {
        self.validate()?;
        if n == 0 {
            return Err(Error::InvalidParameter("sample size must be at least 1".into()));
        }
        let values = (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                self.x_at_normal(z)
            })
            .collect();
        Dataset::new(values)
    }

    /// Sum of log densities; `-inf` when any observation is outside the
    /// support.
    pub fn log_likelihood(&self, data: &Dataset) -> f64 {
        if self.validate().is_err() || !self.covers(data) {
            return f64::NEG_INFINITY;
        }
        data.values().iter().map(|&x| self.ln_pdf_inside(x)).sum()
    }
}

impl ContinuousModel for JsbParams {
    fn cdf_at(&self, x: f64) -> f64 {
        if x <= self.xi {
            0.0
        } else if x >= self.upper() {
            1.0
        } else {
            std_normal_cdf(self.transformed(x))
        }
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        if x > self.xi && x < self.upper() {
            self.ln_pdf_inside(x)
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// Three-parameter Weibull `(alpha, beta, mu)`; support is `(mu, inf)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeibullParams {
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
}

impl WeibullParams {
    pub fn new(alpha: f64, beta: f64, mu: f64) -> Result<Self> {
        let p = WeibullParams { alpha, beta, mu };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.alpha, self.beta, self.mu].iter().all(|v| v.is_finite());
        if !all_finite || self.alpha <= 0.0 || self.beta <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "Weibull requires finite parameters with alpha > 0 and beta > 0, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.alpha, self.beta, self.mu]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        WeibullParams {
            alpha: v[0],
            beta: v[1],
            mu: v[2],
        }
    }

    pub fn covers(&self, data: &Dataset) -> bool {
        data.min() > self.mu
    }

    fn ln_pdf_inside(&self, x: f64) -> f64 {
        let ln_y = (x - self.mu).ln() - self.beta.ln();
        self.alpha.ln() - self.beta.ln() + (self.alpha - 1.0) * ln_y - (self.alpha * ln_y).exp()
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        finite(x)?;
        Ok(self.ln_pdf(x).exp())
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        finite(x)?;
        Ok(self.cdf_at(x))
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "probability must lie in (0, 1), got {p}"
            )));
        }
        Ok(self.mu + self.beta * (-(-p).ln_1p()).powf(1.0 / self.alpha))
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Dataset> {
        self.validate()?;
        if n == 0 {
            return Err(Error::InvalidParameter("sample size must be at least 1".into()));
        }
        let values = (0..n)
            .map(|_| {
                let u: f64 = rng.sample(Open01);
                let x = self.mu + self.beta * (-(-u).ln_1p()).powf(1.0 / self.alpha);
                if x > self.mu {
                    x
                } else {
                    self.mu.next_up()
                }
            })
            .collect();
        Dataset::new(values)
    }

    pub fn log_likelihood(&self, data: &Dataset) -> f64 {
        if self.validate().is_err() || !self.covers(data) {
            return f64::NEG_INFINITY;
        }
        data.values().iter().map(|&x| self.ln_pdf_inside(x)).sum()
    }
}

impl ContinuousModel for WeibullParams {
    fn cdf_at(&self, x: f64) -> f64 {
        if x <= self.mu {
            0.0
        } else {
            let y = (x - self.mu) / self.beta;
            -(-y.powf(self.alpha)).exp_m1()
        }
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        if x > self.mu {
            self.ln_pdf_inside(x)
        } else {
            f64::NEG_INFINITY
        }
    }
}
