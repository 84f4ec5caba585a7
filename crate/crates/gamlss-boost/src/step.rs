//! Step-length policies for the boosting engine.
//!
//! Four policies are supported:
//!
//! * `FSL` — fixed step-length: every update uses the constant `nu0`
//!   (conventionally 0.1), which corresponds to shrinkage 0.1 applied to an
//!   "optimal" step-length of one.
//! * `ASL` — adaptive step-length: the optimal `nu*` is found by a golden
//!   section line search of the outer loss over a per-parameter interval and
//!   the applied step is `lambda * nu*`.
//! * `SAASL` — semi-analytical: for the location parameter the optimal step
//!   has the closed form `sum(h^2) / sum(h^2 / sigma^2)` so no search interval
//!   is needed; the scale parameter still uses the line search.
//! * `SAASL05` — like SAASL for the location, while the scale step is pinned
//!   to its theoretical large-iteration limit `nu* = 0.5` from the start.
//!
//! The location closed form is exact because the risk along `nu` is a
//! quadratic; in particular with a constant variance it returns that variance,
//! and for vanishing base-learner fits it approaches the harmonic mean of the
//! per-observation variances. The scale risk along `nu` is convex but its
//! first-order condition has no closed form, hence the line search (or the
//! 0.5 limit).

use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};

/// Distribution parameter whose predictor an update targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parameter {
    Mu,
    Sigma,
}

impl Parameter {
    pub fn as_str(self) -> &'static str {
        match self {
            Parameter::Mu => "mu",
            Parameter::Sigma => "sigma",
        }
    }
}

impl std::fmt::Display for Parameter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Closed search interval for the one-dimensional line search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Scalar> Interval<T> {
    pub fn new(lo: T, hi: T) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo < T::zero() || lo >= hi {
            return Err(Error::usage(format!(
                "invalid search interval [{lo}, {hi}]: need 0 <= lo < hi"
            )));
        }
        Ok(Interval { lo, hi })
    }

    pub fn width(&self) -> T {
        self.hi - self.lo
    }
}

/// Which of the four step-length policies to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Fsl,
    Asl,
    Saasl,
    Saasl05,
}

impl StepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StepKind::Fsl => "fsl",
            StepKind::Asl => "asl",
            StepKind::Saasl => "saasl",
            StepKind::Saasl05 => "saasl05",
        }
    }
}

impl std::fmt::Display for StepKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for StepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fsl" => Ok(StepKind::Fsl),
            "asl" => Ok(StepKind::Asl),
            "saasl" => Ok(StepKind::Saasl),
            "saasl05" => Ok(StepKind::Saasl05),
            other => Err(Error::usage(format!(
                "unknown step policy `{other}` (expected fsl, asl, saasl or saasl05)"
            ))),
        }
    }
}

/// Full step-length configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPolicy<T> {
    pub kind: StepKind,
    /// Shrinkage applied to the optimal step-length, in `(0, 1]`.
    pub lambda: T,
    /// Fixed base step for `FSL`.
    pub nu0: T,
    pub interval_mu: Interval<T>,
    pub interval_sigma: Interval<T>,
    /// Absolute line-search tolerance.
    pub tol: T,
}

impl<T: Scalar> StepPolicy<T> {
    /// Policy with the conventional defaults: `lambda = 0.1`, `nu0 = 0.1`,
    /// search intervals `[0, 10]` for mu and `[0, 1]` for sigma, tolerance
    /// `1e-6`.
    pub fn new(kind: StepKind) -> Self {
        StepPolicy {
            kind,
            lambda: cast(0.1),
            nu0: cast(0.1),
            interval_mu: Interval {
                lo: T::zero(),
                hi: cast(10.0),
            },
            interval_sigma: Interval {
                lo: T::zero(),
                hi: T::one(),
            },
            tol: cast(1e-6),
        }
    }

    pub fn fsl() -> Self {
        Self::new(StepKind::Fsl)
    }

    pub fn asl() -> Self {
        Self::new(StepKind::Asl)
    }

    pub fn saasl() -> Self {
        Self::new(StepKind::Saasl)
    }

    pub fn saasl05() -> Self {
        Self::new(StepKind::Saasl05)
    }

    pub fn with_lambda(mut self, lambda: T) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_nu0(mut self, nu0: T) -> Self {
        self.nu0 = nu0;
        self
    }

    pub fn with_interval_mu(mut self, interval: Interval<T>) -> Self {
        self.interval_mu = interval;
        self
    }

    pub fn with_interval_sigma(mut self, interval: Interval<T>) -> Self {
        self.interval_sigma = interval;
        self
    }

    pub fn with_tol(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }

    pub fn interval_for(&self, parameter: Parameter) -> Interval<T> {
        match parameter {
            Parameter::Mu => self.interval_mu,
            Parameter::Sigma => self.interval_sigma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > T::zero() && self.lambda <= T::one()) {
            return Err(Error::usage(format!(
                "shrinkage lambda must be in (0, 1], got {}",
                self.lambda
            )));
        }
        if !(self.nu0 > T::zero() && self.nu0.is_finite()) {
            return Err(Error::usage(format!("nu0 must be positive, got {}", self.nu0)));
        }
        if !(self.tol > T::zero() && self.tol.is_finite()) {
            return Err(Error::usage(format!(
                "line-search tolerance must be positive, got {}",
                self.tol
            )));
        }
        Interval::new(self.interval_mu.lo, self.interval_mu.hi)?;
        Interval::new(self.interval_sigma.lo, self.interval_sigma.hi)?;
        Ok(())
    }
}

/// Outcome of a step-length computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResult<T> {
    /// Optimal step-length before shrinkage (`1` by convention for FSL).
    pub nu_star: T,
    /// Applied step-length: `lambda * nu_star`, or `nu0` for FSL.
    pub nu: T,
    /// Set when the line search ended within tolerance of an interval
    /// endpoint, a sign the interval should be widened.
    pub boundary_hit: bool,
}

const GOLDEN_MAX_ITER: usize = 200;

/// Golden section minimization of a unimodal function over `interval`.
///
/// Returns the approximate minimizer (within `tol` of the restricted optimum)
/// and whether it landed on an interval boundary. Any non-finite objective
/// evaluation aborts with the offending step-length.
pub fn line_search<T, F>(phi: F, interval: Interval<T>, tol: T) -> Result<(T, bool)>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    if !(tol > T::zero()) {
        return Err(Error::usage("line-search tolerance must be positive"));
    }
    let eval = |nu: T| -> Result<T> {
        let v = phi(nu);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteAt {
                nu: nu.to_f64().unwrap_or(f64::NAN),
            })
        }
    };

    let inv_phi = cast::<T>(0.618_033_988_749_894_8);
    let mut a = interval.lo;
    let mut b = interval.hi;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;

    let mut iter = 0;
    while (b - a) > tol && iter < GOLDEN_MAX_ITER {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d)?;
        }
        iter += 1;
    }
    let nu = (a + b) / cast::<T>(2.0);
    let boundary = (nu - interval.lo) <= tol || (interval.hi - nu) <= tol;
    Ok((nu, boundary))
}

/// Closed-form optimal step-length for the location parameter:
/// `sum(h_i^2) / sum(h_i^2 / sigma_sq_prev_i)`.
///
/// `sigma_sq_prev` holds the per-observation variances implied by the scale
/// predictor of the previous iteration. With constant variances the result is
/// exactly that variance; for vanishing `h` it tends to the harmonic mean of
/// the variances.
pub fn analytic_nu_mu<T: Scalar>(h: &[T], sigma_sq_prev: &[T]) -> Result<T> {
    if h.len() != sigma_sq_prev.len() {
        return Err(Error::DimensionMismatch {
            what: "analytic step-length",
            expected: h.len(),
            found: sigma_sq_prev.len(),
        });
    }
    let mut num = T::zero();
    let mut den = T::zero();
    for i in 0..h.len() {
        let s2 = sigma_sq_prev[i];
        if !(s2 > T::zero()) || !s2.is_finite() {
            return Err(Error::NonFinite {
                context: "sigma_sq_prev",
                index: i,
            });
        }
        let h2 = h[i] * h[i];
        num = num + h2;
        den = den + h2 / s2;
    }
    if num == T::zero() {
        return Err(Error::DegenerateLearner);
    }
    let nu = num / den;
    if !nu.is_finite() {
        return Err(Error::NonFinite {
            context: "analytic step-length",
            index: 0,
        });
    }
    Ok(nu)
}

/// Left-hand side of the first-order condition for the scale step-length:
/// `sum(h_i) - sum((h_i + eps_i + 1) * h_i / exp(2 * nu * h_i))`.
///
/// `eps` are the residuals of regressing the scale gradient on `h`. The value
/// is approximately zero at the line-searched optimum, which makes this a
/// useful diagnostic for cross-checking the search.
pub fn nu_sigma_foc_residual<T: Scalar>(nu: T, h: &[T], eps: &[T]) -> Result<T> {
    if h.len() != eps.len() {
        return Err(Error::DimensionMismatch {
            what: "first-order condition",
            expected: h.len(),
            found: eps.len(),
        });
    }
    let two = cast::<T>(2.0);
    let mut total = T::zero();
    for i in 0..h.len() {
        let term = h[i] - (h[i] + eps[i] + T::one()) * h[i] * (-two * nu * h[i]).exp();
        if !term.is_finite() {
            return Err(Error::NonFinite {
                context: "first-order condition",
                index: i,
            });
        }
        total = total + term;
    }
    Ok(total)
}

/// Computes the step-length for one candidate update under the given policy.
///
/// `risk_along_nu` is the outer loss restricted to the update direction,
/// `h` the fitted base-learner values, and `sigma_sq_prev` the previous
/// iteration's variances (required by the semi-analytical location step).
pub fn step_for<T, F>(
    parameter: Parameter,
    policy: &StepPolicy<T>,
    risk_along_nu: F,
    h: &[T],
    sigma_sq_prev: Option<&[T]>,
) -> Result<StepResult<T>>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    let searched = |interval: Interval<T>| -> Result<StepResult<T>> {
        let (nu_star, boundary_hit) = line_search(&risk_along_nu, interval, policy.tol)?;
        Ok(StepResult {
            nu_star,
            nu: policy.lambda * nu_star,
            boundary_hit,
        })
    };
    let analytic = || -> Result<StepResult<T>> {
        let s2 = sigma_sq_prev.ok_or_else(|| {
            Error::usage("semi-analytical location step needs the previous variances")
        })?;
        let nu_star = analytic_nu_mu(h, s2)?;
        Ok(StepResult {
            nu_star,
            nu: policy.lambda * nu_star,
            boundary_hit: false,
        })
    };

    match (policy.kind, parameter) {
        (StepKind::Fsl, _) => Ok(StepResult {
            nu_star: T::one(),
            nu: policy.nu0,
            boundary_hit: false,
        }),
        (StepKind::Asl, p) => searched(policy.interval_for(p)),
        (StepKind::Saasl, Parameter::Mu) | (StepKind::Saasl05, Parameter::Mu) => analytic(),
        (StepKind::Saasl, Parameter::Sigma) => searched(policy.interval_sigma),
        (StepKind::Saasl05, Parameter::Sigma) => {
            let nu_star = cast::<T>(0.5);
            Ok(StepResult {
                nu_star,
                nu: policy.lambda * nu_star,
                boundary_hit: false,
            })
        }
    }
}
