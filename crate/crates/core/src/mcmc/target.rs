//! Unnormalized log-density targets.

/// Interval on which a target is defined. Endpoints are open and may be
/// infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    pub lower: f64,
    pub upper: f64,
}

impl Domain {
    pub const REAL_LINE: Domain = Domain {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
    };

    pub fn new(lower: f64, upper: f64) -> Self {
        Domain { lower, upper }
    }

    pub fn positive() -> Self {
        Domain::new(0.0, f64::INFINITY)
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lower && x < self.upper
    }
}

/// Log of an unnormalized density. Points outside the domain evaluate to
/// `-inf`.
pub trait LogDensity {
    fn ln_density(&self, x: f64) -> f64;

    fn domain(&self) -> Domain {
        Domain::REAL_LINE
    }
}

/// A log-density with a first derivative, as required by adaptive
/// rejection sampling.
pub trait LogConcaveDensity: LogDensity {
    fn ln_density_slope(&self, x: f64) -> f64;
}

impl<T: LogDensity + ?Sized> LogDensity for &T {
    fn ln_density(&self, x: f64) -> f64 {
        (**self).ln_density(x)
    }
    fn domain(&self) -> Domain {
        (**self).domain()
    }
}

impl<T: LogConcaveDensity + ?Sized> LogConcaveDensity for &T {
    fn ln_density_slope(&self, x: f64) -> f64 {
        (**self).ln_density_slope(x)
    }
}

/// Closure-backed target.
pub struct LogDensityFn<F> {
    f: F,
    domain: Domain,
}

impl<F: Fn(f64) -> f64> LogDensityFn<F> {
    pub fn new(f: F, domain: Domain) -> Self {
        LogDensityFn { f, domain }
    }
}

impl<F: Fn(f64) -> f64> LogDensity for LogDensityFn<F> {
    fn ln_density(&self, x: f64) -> f64 {
        if self.domain.contains(x) {
            (self.f)(x)
        } else {
            f64::NEG_INFINITY
        }
    }
    fn domain(&self) -> Domain {
        self.domain
    }
}

/// Closure-backed target with an explicit derivative.
pub struct DifferentiableFn<F, G> {
    f: F,
    df: G,
    domain: Domain,
}

impl<F: Fn(f64) -> f64, G: Fn(f64) -> f64> DifferentiableFn<F, G> {
    pub fn new(f: F, df: G, domain: Domain) -> Self {
        DifferentiableFn { f, df, domain }
    }
}

impl<F: Fn(f64) -> f64, G: Fn(f64) -> f64> LogDensity for DifferentiableFn<F, G> {
    fn ln_density(&self, x: f64) -> f64 {
        if self.domain.contains(x) {
            (self.f)(x)
        } else {
            f64::NEG_INFINITY
        }
    }
    fn domain(&self) -> Domain {
        self.domain
    }
}

impl<F: Fn(f64) -> f64, G: Fn(f64) -> f64> LogConcaveDensity for DifferentiableFn<F, G> {
    fn ln_density_slope(&self, x: f64) -> f64 {
        (self.df)(x)
    }
}
