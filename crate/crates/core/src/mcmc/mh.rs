//! Metropolis–Hastings stepping with pluggable proposals.

use rand::Rng;

use super::target::LogDensity;
use super::variates::{sample_normal, sample_shifted_exponential, sample_uniform};
use crate::error::{Error, Result};

/// Proposal distribution `q(to | from)`.
pub trait Proposal {
    fn propose<R: Rng + ?Sized>(&self, rng: &mut R, current: f64) -> f64;

    /// `ln q(to | from)`, up to a constant that does not depend on either
    /// argument.
    fn ln_density(&self, to: f64, from: f64) -> f64;
}

/// Independence proposal, uniform on `(lower, upper)`.
#[derive(Clone, Copy, Debug)]
pub struct UniformIndependence {
    lower: f64,
    upper: f64,
}

impl UniformIndependence {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) || lower.next_up() >= upper {
            return Err(Error::InvalidParameter(format!(
                "uniform proposal needs a nonempty interval, got ({lower}, {upper})"
            )));
        }
        Ok(UniformIndependence { lower, upper })
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }
}

impl Proposal for UniformIndependence {
    fn propose<R: Rng + ?Sized>(&self, rng: &mut R, _current: f64) -> f64 {
        sample_uniform(rng, self.lower, self.upper).expect("validated interval")
    }

    fn ln_density(&self, to: f64, _from: f64) -> f64 {
        if to > self.lower && to < self.upper {
            -(self.upper - self.lower).ln()
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// Independence proposal `exp{-(x - shift)}` on `(shift, inf)`.
#[derive(Clone, Copy, Debug)]
pub struct ShiftedExponential {
    shift: f64,
}

impl ShiftedExponential {
    pub fn new(shift: f64) -> Self {
        ShiftedExponential { shift }
    }
}

impl Proposal for ShiftedExponential {
    fn propose<R: Rng + ?Sized>(&self, rng: &mut R, _current: f64) -> f64 {
        sample_shifted_exponential(rng, self.shift)
    }

    fn ln_density(&self, to: f64, _from: f64) -> f64 {
        if to > self.shift {
            -(to - self.shift)
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// Symmetric Gaussian random walk.
#[derive(Clone, Copy, Debug)]
pub struct GaussianRandomWalk {
    sd: f64,
}

impl GaussianRandomWalk {
    pub fn new(sd: f64) -> Result<Self> {
        if !(sd > 0.0 && sd.is_finite()) {
            return Err(Error::InvalidParameter(format!("random-walk sd must be positive, got {sd}")));
        }
        Ok(GaussianRandomWalk { sd })
    }
}

impl Proposal for GaussianRandomWalk {
    fn propose<R: Rng + ?Sized>(&self, rng: &mut R, current: f64) -> f64 {
        sample_normal(rng, current, self.sd).expect("validated sd")
    }

    fn ln_density(&self, to: f64, from: f64) -> f64 {
        let z = (to - from) / self.sd;
        -0.5 * z * z
    }
}

/// Final state of an inner chain plus its acceptance count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MhOutcome {
    pub state: f64,
    pub accepted: usize,
    pub steps: usize,
}

/// Log acceptance ratio `ln η` (before the `min{1, .}` cap).
pub fn ln_acceptance_ratio<T, Q>(target: &T, proposal: &Q, current: f64, ln_current: f64, candidate: f64) -> (f64, f64)
where
    T: LogDensity + ?Sized,
    Q: Proposal + ?Sized,
{
    let ln_candidate = target.ln_density(candidate);
    if ln_candidate.is_nan() || ln_candidate == f64::NEG_INFINITY {
        return (f64::NEG_INFINITY, ln_candidate);
    }
    let forward = proposal.ln_density(candidate, current);
    let backward = proposal.ln_density(current, candidate);
    ((ln_candidate + backward) - (ln_current + forward), ln_candidate)
}

/// Runs `steps` Metropolis–Hastings iterations from `init` and returns the
/// final state.
pub fn mh_chain<R, T, Q>(rng: &mut R, target: &T, proposal: &Q, init: f64, steps: usize) -> Result<MhOutcome>
where
    R: Rng + ?Sized,
    T: LogDensity + ?Sized,
    Q: Proposal + ?Sized,
{
    let mut ln_current = target.ln_density(init);
    if !ln_current.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "target log-density is {ln_current} at the initial state {init}"
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidParameter("MH chain needs at least one step".into()));
    }
    let mut current = init;
    let mut accepted = 0;
    for _ in 0..steps {
        let candidate = proposal.propose(rng, current);
        let (ln_eta, ln_candidate) = ln_acceptance_ratio(target, proposal, current, ln_current, candidate);
        let u: f64 = rng.random();
        if ln_eta >= 0.0 || u < ln_eta.exp() {
            current = candidate;
            ln_current = ln_candidate;
            accepted += 1;
        }
    }
    Ok(MhOutcome {
        state: current,
        accepted,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcmc::target::{Domain, LogDensityFn};
    use crate::mcmc::RngStream;

    /// Target equal to the proposal density: standard exponential on (0, inf).
    struct ExpTarget;
    impl LogDensity for ExpTarget {
        fn ln_density(&self, x: f64) -> f64 {
            if x > 0.0 {
                -x
            } else {
                f64::NEG_INFINITY
            }
        }
        fn domain(&self) -> Domain {
            Domain::positive()
        }
    }

    #[test]
    fn proposal_equal_to_target_always_accepts() {
        let mut rng = RngStream::new(20);
        let out = mh_chain(&mut rng, &ExpTarget, &ShiftedExponential::new(0.0), 1.0, 10_000).unwrap();
        assert_eq!(out.accepted, 10_000);
    }

    #[test]
    fn uphill_symmetric_move_accepted() {
        let target = LogDensityFn::new(|x: f64| -0.5 * x * x, Domain::REAL_LINE);
        let q = GaussianRandomWalk::new(1.0).unwrap();
        let (ln_eta, _) = ln_acceptance_ratio(&target, &q, 2.0, target.ln_density(2.0), 0.5);
        assert!(ln_eta > 0.0);
    }

    #[test]
    fn uniform_independence_ratio_is_target_ratio() {
        let target = LogDensityFn::new(|x: f64| -0.5 * x * x, Domain::REAL_LINE);
        let q = UniformIndependence::new(-5.0, 5.0).unwrap();
        let (ln_eta, _) = ln_acceptance_ratio(&target, &q, 1.0, target.ln_density(1.0), 2.0);
        assert!((ln_eta - (target.ln_density(2.0) - target.ln_density(1.0))).abs() < 1e-15);
    }

    #[test]
    fn normal_target_with_uniform_proposal() {
        let target = LogDensityFn::new(|x: f64| -0.5 * x * x, Domain::REAL_LINE);
        let q = UniformIndependence::new(-5.0, 5.0).unwrap();
        let mut rng = RngStream::new(21);
        let mut state = 0.0;
        let n = 100_000;
        let mut xs = Vec::with_capacity(n);
        for _ in 0..n {
            state = mh_chain(&mut rng, &target, &q, state, 1).unwrap().state;
            xs.push(state);
        }
        let m = xs.iter().sum::<f64>() / n as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        // target truncated to (-5, 5) by the proposal support; the loss is ~6e-7
        assert!((v - 1.0).abs() < 0.05, "var {v}");
    }

    #[test]
    fn non_finite_init_is_error() {
        let mut rng = RngStream::new(22);
        assert!(mh_chain(&mut rng, &ExpTarget, &ShiftedExponential::new(0.0), -1.0, 5).is_err());
    }

    #[test]
    fn deterministic() {
        let target = LogDensityFn::new(|x: f64| -0.5 * x * x, Domain::REAL_LINE);
        let q = GaussianRandomWalk::new(0.7).unwrap();
        let run = || {
            let mut rng = RngStream::new(5);
            mh_chain(&mut rng, &target, &q, 0.3, 500).unwrap()
        };
        assert_eq!(run(), run());
    }
}
