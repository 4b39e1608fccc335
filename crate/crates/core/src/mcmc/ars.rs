//! Adaptive rejection sampling for log-concave densities.
//!
//! Tangent-based variant: the upper hull is the piecewise-linear envelope
//! formed by tangents at the abscissae, the lower squeeze is the chord
//! interpolation between neighbouring abscissae. Rejected points refine
//! both until the abscissa budget is spent.

use rand::Rng;

use super::target::{Domain, LogConcaveDensity};
use crate::error::{Error, Result};

/// Default cap on the number of abscissae kept by an envelope.
pub const DEFAULT_MAX_ABSCISSAE: usize = 50;

const MAX_TRIALS: usize = 100_000;

#[derive(Clone, Copy, Debug)]
struct Knot {
    x: f64,
    h: f64,
    slope: f64,
}

impl Knot {
    fn tangent(&self, t: f64) -> f64 {
        self.h + self.slope * (t - self.x)
    }
}

pub struct ArsEnvelope<T> {
    target: T,
    domain: Domain,
    knots: Vec<Knot>,
    // Hull breakpoints: `bounds[j]..bounds[j + 1]` uses the tangent at knot j.
    bounds: Vec<f64>,
    cumulative: Vec<f64>,
    max_abscissae: usize,
    evaluations: usize,
}

impl<T: LogConcaveDensity> ArsEnvelope<T> {
    pub fn new(target: T, init_abscissae: &[f64]) -> Result<Self> {
        Self::with_capacity(target, init_abscissae, DEFAULT_MAX_ABSCISSAE)
    }

    pub fn with_capacity(target: T, init_abscissae: &[f64], max_abscissae: usize) -> Result<Self> {
        let domain = target.domain();
        let mut xs: Vec<f64> = init_abscissae.to_vec();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        if xs.len() < 2 {
            return Err(Error::Ars(
                "at least two distinct initial abscissae are required".into(),
            ));
        }
        let mut knots = Vec::with_capacity(xs.len().max(max_abscissae));
        for &x in &xs {
            if !domain.contains(x) {
                return Err(Error::Ars(format!(
                    "initial abscissa {x} outside the domain ({}, {})",
                    domain.lower, domain.upper
                )));
            }
            let h = target.ln_density(x);
            let slope = target.ln_density_slope(x);
            if !h.is_finite() || !slope.is_finite() {
                return Err(Error::Ars(format!(
                    "target is not finite at abscissa {x} (log-density {h}, slope {slope})"
                )));
            }
            knots.push(Knot { x, h, slope });
        }
        if domain.lower == f64::NEG_INFINITY && knots[0].slope <= 0.0 {
            return Err(Error::Ars(format!(
                "hull not integrable: leftmost slope {} must be positive on a domain unbounded below",
                knots[0].slope
            )));
        }
        let last = knots[knots.len() - 1];
        if domain.upper == f64::INFINITY && last.slope >= 0.0 {
            return Err(Error::Ars(format!(
                "hull not integrable: rightmost slope {} must be negative on a domain unbounded above",
                last.slope
            )));
        }
        if knots.windows(2).any(|w| w[1].slope > w[0].slope) {
            return Err(Error::Ars(
                "slopes increase between abscissae; target is not log-concave".into(),
            ));
        }
        let mut env = ArsEnvelope {
            target,
            domain,
            knots,
            bounds: Vec::new(),
            cumulative: Vec::new(),
            max_abscissae: max_abscissae.max(2),
            evaluations: xs.len(),
        };
        env.rebuild();
        Ok(env)
    }

    pub fn abscissae(&self) -> Vec<f64> {
        self.knots.iter().map(|k| k.x).collect()
    }

    /// Number of target evaluations spent so far.
    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    fn rebuild(&mut self) {
        let k = self.knots.len();
        self.bounds.clear();
        self.bounds.push(self.domain.lower);
        for w in self.knots.windows(2) {
            let (a, b) = (w[0], w[1]);
            let ds = a.slope - b.slope;
            let z = if ds.abs() <= 1e-12 * a.slope.abs().max(b.slope.abs()).max(1.0) {
                0.5 * (a.x + b.x)
            } else {
                (b.h - a.h - b.x * b.slope + a.x * a.slope) / ds
            };
            self.bounds.push(z.clamp(a.x, b.x));
        }
        self.bounds.push(self.domain.upper);

        let log_mass: Vec<f64> = (0..k)
            .map(|j| segment_log_mass(self.bounds[j], self.bounds[j + 1], &self.knots[j]))
            .collect();
        let top = log_mass.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        self.cumulative.clear();
        let mut acc = 0.0;
        for lm in log_mass {
            acc += (lm - top).exp();
            self.cumulative.push(acc);
        }
    }

    fn segment_of(&self, x: f64) -> usize {
        // bounds is sorted; the segment index is the number of interior
        // breakpoints strictly below x.
        let inner = &self.bounds[1..self.bounds.len() - 1];
        inner.partition_point(|&z| z < x)
    }

    /// Upper hull at `x`.
    pub fn upper(&self, x: f64) -> f64 {
        self.knots[self.segment_of(x)].tangent(x)
    }

    /// Lower squeeze at `x`; `-inf` outside the outermost abscissae.
    pub fn lower(&self, x: f64) -> f64 {
        let k = self.knots.len();
        if x < self.knots[0].x || x > self.knots[k - 1].x {
            return f64::NEG_INFINITY;
        }
        let i = self.knots.partition_point(|kn| kn.x <= x);
        if i == k {
            return self.knots[k - 1].h;
        }
        let (a, b) = (self.knots[i - 1], self.knots[i]);
        a.h + (b.h - a.h) * (x - a.x) / (b.x - a.x)
    }

    fn draw_from_hull<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let total = *self.cumulative.last().unwrap();
        let u: f64 = rng.random::<f64>() * total;
        let j = self
            .cumulative
            .partition_point(|&c| c <= u)
            .min(self.knots.len() - 1);
        let (a, b) = (self.bounds[j], self.bounds[j + 1]);
        let s = self.knots[j].slope;
        let v: f64 = rng.random();
        let len = b - a;
        if s > 0.0 {
            b + (-v * -(-s * len).exp_m1()).ln_1p() / s
        } else if s < 0.0 {
            a + (-v * -(s * len).exp_m1()).ln_1p() / s
        } else {
            a + v * len
        }
    }

    fn insert(&mut self, x: f64, h: f64, slope: f64) -> Result<()> {
        let i = self.knots.partition_point(|kn| kn.x < x);
        if self.knots.get(i).is_some_and(|kn| kn.x == x) {
            return Ok(());
        }
        let hull = self.upper(x);
        if h > hull + 1e-9 * hull.abs().max(1.0) {
            return Err(Error::Ars(format!(
                "log-density {h} exceeds the hull {hull} at {x}; target is not log-concave"
            )));
        }
        self.knots.insert(i, Knot { x, h, slope });
        if self.knots.windows(2).any(|w| w[1].slope > w[0].slope + 1e-9 * w[0].slope.abs().max(1.0)) {
            return Err(Error::Ars(format!(
                "slopes increase around {x}; target is not log-concave"
            )));
        }
        self.rebuild();
        Ok(())
    }

    /// One exact draw from the normalized target.
    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<f64> {
        for _ in 0..MAX_TRIALS {
            let x = self.draw_from_hull(rng);
            if !self.domain.contains(x) || !x.is_finite() {
                continue;
            }
            let log_w = rng.random::<f64>().ln();
            let hull = self.upper(x);
            if log_w <= self.lower(x) - hull {
                return Ok(x);
            }
            let h = self.target.ln_density(x);
            self.evaluations += 1;
            if h.is_nan() {
                return Err(Error::Ars(format!("target evaluated to NaN at {x}")));
            }
            if h == f64::NEG_INFINITY {
                continue;
            }
            let accept = log_w <= h - hull;
            if self.knots.len() < self.max_abscissae {
                let slope = self.target.ln_density_slope(x);
                if slope.is_finite() && h.is_finite() {
                    self.insert(x, h, slope)?;
                }
            }
            if accept {
                return Ok(x);
            }
        }
        Err(Error::Ars(format!(
            "no acceptance after {MAX_TRIALS} trials"
        )))
    }

    /// Verifies `upper >= target >= squeeze` at every abscissa and every
    /// interior hull breakpoint.
    pub fn check_invariants(&self) -> Result<()> {
        let tol = |v: f64| 1e-9 * v.abs().max(1.0);
        if self.knots.windows(2).any(|w| w[0].x >= w[1].x) {
            return Err(Error::Ars("abscissae not strictly increasing".into()));
        }
        let probes = self
            .knots
            .iter()
            .map(|k| k.x)
            .chain(self.bounds[1..self.bounds.len() - 1].iter().copied());
        for x in probes {
            let h = self.target.ln_density(x);
            let (u, l) = (self.upper(x), self.lower(x));
            if u + tol(u) < h || h + tol(h) < l {
                return Err(Error::Ars(format!(
                    "envelope violated at {x}: upper {u}, target {h}, squeeze {l}"
                )));
            }
        }
        Ok(())
    }
}

fn segment_log_mass(a: f64, b: f64, knot: &Knot) -> f64 {
    let s = knot.slope;
    let len = b - a;
    if len <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if s > 0.0 {
        knot.tangent(b) + (-(-s * len).exp_m1()).ln() - s.ln()
    } else if s < 0.0 {
        knot.tangent(a) + (-(s * len).exp_m1()).ln() - (-s).ln()
    } else {
        knot.h + len.ln()
    }
}

/// Draws once from `target` using a fresh envelope built on
/// `init_abscissae`.
pub fn ars_sample<R: Rng + ?Sized, T: LogConcaveDensity>(
    rng: &mut R,
    target: T,
    init_abscissae: &[f64],
) -> Result<f64> {
    ArsEnvelope::new(target, init_abscissae)?.sample(rng)
}
