//! Elementary variate generators.

use rand::distr::Open01;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};

use crate::error::{Error, Result};

/// Uniform draw on the open interval `(a, b)`.
pub fn sample_uniform<R: Rng + ?Sized>(rng: &mut R, a: f64, b: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::InvalidParameter(format!(
            "uniform bounds must satisfy a < b, got ({a}, {b})"
        )));
    }
    if a.next_up() >= b {
        return Err(Error::InvalidParameter(format!(
            "interval ({a}, {b}) contains no representable interior point"
        )));
    }
    loop {
        let u: f64 = rng.sample(Open01);
        let x = a + (b - a) * u;
        if x > a && x < b {
            return Ok(x);
        }
    }
}

pub fn sample_normal<R: Rng + ?Sized>(rng: &mut R, mean: f64, sd: f64) -> Result<f64> {
    if !(sd > 0.0 && sd.is_finite()) || !mean.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "normal requires finite mean and sd > 0, got ({mean}, {sd})"
        )));
    }
    let z: f64 = StandardNormal.sample(rng);
    Ok(mean + sd * z)
}

/// Unit-scale gamma variate (Marsaglia–Tsang, with the boost for shape < 1).
pub fn sample_gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64) -> Result<f64> {
    if !(shape > 0.0 && shape.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "gamma shape must be positive, got {shape}"
        )));
    }
    let dist = Gamma::new(shape, 1.0).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    loop {
        let z = dist.sample(rng);
        if z > 0.0 {
            return Ok(z);
        }
    }
}

/// `shift` plus a standard exponential draw.
pub fn sample_shifted_exponential<R: Rng + ?Sized>(rng: &mut R, shift: f64) -> f64 {
    let e: f64 = Exp1.sample(rng);
    let x = shift + e;
    if x > shift {
        x
    } else {
        shift.next_up()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcmc::RngStream;

    #[test]
    fn uniform_rejects_bad_bounds() {
        let mut rng = RngStream::new(1);
        assert!(sample_uniform(&mut rng, 1.0, 1.0).is_err());
        assert!(sample_uniform(&mut rng, 2.0, 1.0).is_err());
        assert!(sample_uniform(&mut rng, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn uniform_narrow_interval_stays_inside() {
        let mut rng = RngStream::new(2);
        let a = 2.0;
        let b = 2.0 + 1e-12;
        for _ in 0..10_000 {
            let x = sample_uniform(&mut rng, a, b).unwrap();
            assert!(x > a && x < b);
        }
    }

    #[test]
    fn uniform_mean() {
        let mut rng = RngStream::new(3);
        let n = 1_000_000;
        let s: f64 = (0..n).map(|_| sample_uniform(&mut rng, 0.0, 1.0).unwrap()).sum();
        assert!((s / n as f64 - 0.5).abs() < 0.002);
    }

    #[test]
    fn normal_variance() {
        let mut rng = RngStream::new(4);
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n).map(|_| sample_normal(&mut rng, 0.0, 1.0).unwrap()).collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((v - 1.0).abs() < 0.01, "variance {v}");
        assert!(sample_normal(&mut rng, 0.0, 0.0).is_err());
    }

    #[test]
    fn gamma_mean_and_support() {
        let mut rng = RngStream::new(5);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| sample_gamma(&mut rng, 100.0).unwrap()).collect();
        assert!(xs.iter().all(|&x| x > 0.0));
        let m = xs.iter().sum::<f64>() / n as f64;
        assert!((m - 100.0).abs() < 1.0);
        assert!(sample_gamma(&mut rng, 0.0).is_err());
        assert!(sample_gamma(&mut rng, -1.0).is_err());
    }

    #[test]
    fn gamma_shape_one_is_exponential() {
        let mut rng = RngStream::new(6);
        let n = 100_000;
        let mut xs: Vec<f64> = (0..n).map(|_| sample_gamma(&mut rng, 1.0).unwrap()).collect();
        xs.sort_by(f64::total_cmp);
        let mut d: f64 = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            let f = 1.0 - (-x).exp();
            d = d.max((f - i as f64 / n as f64).abs());
            d = d.max(((i + 1) as f64 / n as f64 - f).abs());
        }
        assert!(d < 0.01, "KS {d}");
    }

    #[test]
    fn gamma_small_shape_positive() {
        let mut rng = RngStream::new(9);
        for _ in 0..10_000 {
            assert!(sample_gamma(&mut rng, 0.05).unwrap() > 0.0);
        }
    }

    #[test]
    fn shifted_exponential_means() {
        let mut rng = RngStream::new(7);
        let n = 1_000_000;
        let s0: f64 = (0..n).map(|_| sample_shifted_exponential(&mut rng, 0.0)).sum();
        assert!((s0 / n as f64 - 1.0).abs() < 0.005);
        let xs: Vec<f64> = (0..n).map(|_| sample_shifted_exponential(&mut rng, 5.0)).collect();
        assert!(xs.iter().all(|&x| x > 5.0));
        let m = xs.iter().sum::<f64>() / n as f64;
        assert!((m - 6.0).abs() < 0.01);
    }
}
