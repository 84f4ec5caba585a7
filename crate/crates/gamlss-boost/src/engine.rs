//! Componentwise gradient-boosting loops for the Gaussian location-scale
//! model.
//!
//! The non-cyclical loop computes, per iteration, one candidate update for
//! each distribution parameter (best base-learner by inner loss, step-length
//! from the configured policy) and applies only the candidate with the lower
//! outer loss; the other parameter carries its predictor over unchanged. The
//! cyclical loop instead updates the location and then the scale in every
//! iteration, each with its own stopping value, where the scale update sees
//! the already-updated location predictor.
//!
//! Candidate outer losses are evaluated with the candidate's own applied
//! step-length (shrinkage included), not the unshrunk optimum. This is what
//! makes the parameter selection sensitive to the relative scales of the two
//! gradients under a fixed step-length, and it must be preserved for the
//! fixed-vs-adaptive comparisons to behave as documented.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::family::{clamp_eta_sigma, GaussianLocScale, PredictorPair, HALF_LN_TWO_PI};
use crate::learner::{select_best, LearnerFit};
use crate::scalar::{cast, Scalar};
use crate::step::{step_for, Parameter, StepPolicy, StepResult};

/// Accumulated intercept and slope contributions of one covariate to one
/// predictor. Every applied update adds `nu * b0` and `nu * b1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefPair<T> {
    pub intercept: T,
    pub slope: T,
}

impl<T: Scalar> CoefPair<T> {
    fn zero() -> Self {
        CoefPair {
            intercept: T::zero(),
            slope: T::zero(),
        }
    }
}

/// One applied update.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord<T> {
    /// 1-based position in the trace. For the non-cyclical loop this is the
    /// boosting iteration; for the cyclical loop each sub-update gets its own
    /// record.
    pub m: usize,
    /// Parameter that won (or was scheduled for) this update.
    pub parameter: Parameter,
    /// Covariate index of the selected base-learner.
    pub covariate: usize,
    /// Intercept of the selected base-learner fit (before shrinkage).
    pub intercept: T,
    /// Slope of the selected base-learner fit (before shrinkage).
    pub slope: T,
    pub nu_star: T,
    pub nu: T,
    /// Candidate outer loss of the location update, when one existed.
    pub delta_rho_mu: Option<T>,
    /// Candidate outer loss of the scale update, when one existed.
    pub delta_rho_sigma: Option<T>,
    /// Outer loss after applying this update.
    pub risk_after: T,
    /// Whether the line search for this update ended at an interval endpoint.
    pub boundary_hit: bool,
}

/// How a fit ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitStatus {
    Completed,
    /// No parameter had a usable candidate left at the given iteration; the
    /// remaining iterations were skipped.
    EarlyTermination { at: usize },
}

/// Fitted boosting model: offsets, per-covariate coefficient accumulators for
/// both predictors, and the full iteration trace.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostModel<T> {
    pub family: GaussianLocScale,
    pub offset_mu: T,
    pub offset_sigma: T,
    pub coef_mu: Vec<CoefPair<T>>,
    pub coef_sigma: Vec<CoefPair<T>>,
    pub trace: Vec<TraceRecord<T>>,
    pub m_done: usize,
    pub policy: StepPolicy<T>,
    pub status: FitStatus,
    /// Covariate names, copied from the training data.
    pub names: Vec<String>,
    /// Number of candidate step-length searches that ended on an interval
    /// boundary, per parameter (counted whether or not the candidate won).
    pub boundary_hits_mu: usize,
    pub boundary_hits_sigma: usize,
    /// Whether the scale predictor reached the exponentiation clamp; values
    /// out there are numerically meaningless and worth a warning.
    pub sigma_clamp_reached: bool,
}

/// Gaussian maximum-likelihood offsets: mean of `y` for the location
/// predictor and `log(sqrt(mean((y - mean)^2)))` for the scale predictor.
pub fn init_offsets<T: Scalar>(y: &[T]) -> Result<(T, T)> {
    if y.len() < 2 {
        return Err(Error::DegenerateData("need at least two observations"));
    }
    let n = T::from_usize(y.len()).unwrap();
    let mean = y.iter().fold(T::zero(), |a, &v| a + v) / n;
    let msd = y
        .iter()
        .fold(T::zero(), |a, &v| a + (v - mean) * (v - mean))
        / n;
    if !(msd > T::zero()) {
        return Err(Error::DegenerateData("response has zero variance"));
    }
    Ok((mean, msd.sqrt().ln()))
}

struct Candidate<T> {
    fit: LearnerFit<T>,
    step: StepResult<T>,
    delta_rho: T,
}

/// Gradient ingredients shared by both parameter candidates of one state:
/// residuals, scale weights `exp(-2 * eta_sigma)` and the part of the loss
/// that does not change along a location update.
struct GradParts<T> {
    residuals: Vec<T>,
    weights: Vec<T>,
    loss_const_mu: T,
}

fn pick_winner<T: Scalar>(delta_mu: Option<T>, delta_sigma: Option<T>) -> Option<Parameter> {
    match (delta_mu, delta_sigma) {
        (None, None) => None,
        (Some(_), None) => Some(Parameter::Mu),
        (None, Some(_)) => Some(Parameter::Sigma),
        // Location is preferred on exact ties.
        (Some(a), Some(b)) => Some(if a <= b {
            Parameter::Mu
        } else {
            Parameter::Sigma
        }),
    }
}

struct Fitter<'a, T: Scalar> {
    data: &'a Dataset<T>,
    policy: StepPolicy<T>,
    predictors: PredictorPair<T>,
    offset_mu: T,
    offset_sigma: T,
    coef_mu: Vec<CoefPair<T>>,
    coef_sigma: Vec<CoefPair<T>>,
    trace: Vec<TraceRecord<T>>,
    all_candidates: Vec<usize>,
    boundary_hits_mu: usize,
    boundary_hits_sigma: usize,
}

impl<'a, T: Scalar> Fitter<'a, T> {
    fn new(data: &'a Dataset<T>, policy: &StepPolicy<T>) -> Result<Self> {
        policy.validate()?;
        let (offset_mu, offset_sigma) = init_offsets(data.y())?;
        let j = data.num_covariates();
        Ok(Fitter {
            data,
            policy: policy.clone(),
            predictors: PredictorPair::constant(offset_mu, offset_sigma, data.n()),
            offset_mu,
            offset_sigma,
            coef_mu: vec![CoefPair::zero(); j],
            coef_sigma: vec![CoefPair::zero(); j],
            trace: Vec::new(),
            all_candidates: (0..j).collect(),
            boundary_hits_mu: 0,
            boundary_hits_sigma: 0,
        })
    }

    fn grad_parts(&self) -> GradParts<T> {
        let y = self.data.y();
        let n = y.len();
        let two = cast::<T>(2.0);
        let c = cast::<T>(HALF_LN_TWO_PI);
        let mut residuals = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let mut loss_const_mu = T::zero();
        for i in 0..n {
            residuals.push(y[i] - self.predictors.eta_mu[i]);
            weights.push((-two * clamp_eta_sigma(self.predictors.eta_sigma[i])).exp());
            loss_const_mu = loss_const_mu + c + self.predictors.eta_sigma[i];
        }
        GradParts {
            residuals,
            weights,
            loss_const_mu,
        }
    }

    /// Builds the candidate update for one parameter from the current state,
    /// or `None` when the selected base-learner is identically zero.
    fn candidate(&self, parameter: Parameter, parts: &GradParts<T>) -> Result<Option<Candidate<T>>> {
        let n = self.data.n();
        let half = cast::<T>(0.5);
        let two = cast::<T>(2.0);
        let c = cast::<T>(HALF_LN_TWO_PI);

        let u: Vec<T> = match parameter {
            Parameter::Mu => (0..n).map(|i| parts.residuals[i] * parts.weights[i]).collect(),
            Parameter::Sigma => (0..n)
                .map(|i| parts.residuals[i] * parts.residuals[i] * parts.weights[i] - T::one())
                .collect(),
        };
        let fit = select_best(self.data, &u, &self.all_candidates)?;
        if fit.is_degenerate() {
            return Ok(None);
        }

        let (step, delta_rho) = match parameter {
            Parameter::Mu => {
                // Loss along a location shift: the scale part is constant and
                // the quadratic part reuses the precomputed weights.
                let phi = |nu: T| {
                    let mut acc = T::zero();
                    for i in 0..n {
                        let d = parts.residuals[i] - nu * fit.fitted[i];
                        acc = acc + parts.weights[i] * d * d;
                    }
                    parts.loss_const_mu + half * acc
                };
                let sigma_sq: Vec<T> = parts.weights.iter().map(|&w| w.recip()).collect();
                let step = step_for(parameter, &self.policy, &phi, &fit.fitted, Some(&sigma_sq))?;
                (step, phi(step.nu))
            }
            Parameter::Sigma => {
                let eta_sigma = &self.predictors.eta_sigma;
                let phi = |nu: T| {
                    let mut acc = T::zero();
                    for i in 0..n {
                        let eta = eta_sigma[i] + nu * fit.fitted[i];
                        let w = (-two * clamp_eta_sigma(eta)).exp();
                        acc = acc
                            + c
                            + eta
                            + half * parts.residuals[i] * parts.residuals[i] * w;
                    }
                    acc
                };
                let step = step_for(parameter, &self.policy, &phi, &fit.fitted, None)?;
                (step, phi(step.nu))
            }
        };
        if !delta_rho.is_finite() {
            return Err(Error::NonFinite {
                context: "candidate outer loss",
                index: 0,
            });
        }
        Ok(Some(Candidate {
            fit,
            step,
            delta_rho,
        }))
    }

    fn note_boundary(&mut self, parameter: Parameter, candidate: &Option<Candidate<T>>) {
        if let Some(c) = candidate {
            if c.step.boundary_hit {
                match parameter {
                    Parameter::Mu => self.boundary_hits_mu += 1,
                    Parameter::Sigma => self.boundary_hits_sigma += 1,
                }
            }
        }
    }

    fn apply(
        &mut self,
        parameter: Parameter,
        candidate: Candidate<T>,
        delta_rho_mu: Option<T>,
        delta_rho_sigma: Option<T>,
    ) {
        let Candidate {
            fit,
            step,
            delta_rho,
        } = candidate;
        let (coefs, eta) = match parameter {
            Parameter::Mu => (&mut self.coef_mu, &mut self.predictors.eta_mu),
            Parameter::Sigma => (&mut self.coef_sigma, &mut self.predictors.eta_sigma),
        };
        let pair = &mut coefs[fit.covariate];
        pair.intercept = pair.intercept + step.nu * fit.intercept;
        pair.slope = pair.slope + step.nu * fit.slope;
        for i in 0..eta.len() {
            eta[i] = eta[i] + step.nu * fit.fitted[i];
        }
        self.trace.push(TraceRecord {
            m: self.trace.len() + 1,
            parameter,
            covariate: fit.covariate,
            intercept: fit.intercept,
            slope: fit.slope,
            nu_star: step.nu_star,
            nu: step.nu,
            delta_rho_mu,
            delta_rho_sigma,
            risk_after: delta_rho,
            boundary_hit: step.boundary_hit,
        });
    }

    fn finish(self, status: FitStatus) -> BoostModel<T> {
        let m_done = self.trace.len();
        let clamp = cast::<T>(crate::family::ETA_SIGMA_CLAMP);
        let sigma_clamp_reached = self
            .predictors
            .eta_sigma
            .iter()
            .any(|v| v.abs() >= clamp);
        BoostModel {
            family: GaussianLocScale,
            offset_mu: self.offset_mu,
            offset_sigma: self.offset_sigma,
            coef_mu: self.coef_mu,
            coef_sigma: self.coef_sigma,
            trace: self.trace,
            m_done,
            policy: self.policy,
            status,
            names: self.data.names().to_vec(),
            boundary_hits_mu: self.boundary_hits_mu,
            boundary_hits_sigma: self.boundary_hits_sigma,
            sigma_clamp_reached,
        }
    }
}

/// Non-cyclical boosting: per iteration, candidates for both parameters are
/// computed from the previous iteration's predictors and only the one with
/// the lower candidate outer loss is applied.
///
/// With `m_stop = 0` the returned model consists of the offsets alone. If in
/// some iteration both candidates are degenerate (their base-learner fits are
/// identically zero), the fit stops early and reports it in the status.
pub fn boost_noncyclical<T: Scalar>(
    data: &Dataset<T>,
    policy: &StepPolicy<T>,
    m_stop: usize,
) -> Result<BoostModel<T>> {
    let mut fitter = Fitter::new(data, policy)?;
    let mut status = FitStatus::Completed;
    for m in 1..=m_stop {
        let parts = fitter.grad_parts();
        let cand_mu = fitter
            .candidate(Parameter::Mu, &parts)
            .map_err(|e| e.at_iteration(m))?;
        let cand_sigma = fitter
            .candidate(Parameter::Sigma, &parts)
            .map_err(|e| e.at_iteration(m))?;
        fitter.note_boundary(Parameter::Mu, &cand_mu);
        fitter.note_boundary(Parameter::Sigma, &cand_sigma);

        let delta_mu = cand_mu.as_ref().map(|c| c.delta_rho);
        let delta_sigma = cand_sigma.as_ref().map(|c| c.delta_rho);
        match pick_winner(delta_mu, delta_sigma) {
            None => {
                status = FitStatus::EarlyTermination { at: m };
                break;
            }
            Some(Parameter::Mu) => {
                fitter.apply(Parameter::Mu, cand_mu.unwrap(), delta_mu, delta_sigma)
            }
            Some(Parameter::Sigma) => {
                fitter.apply(Parameter::Sigma, cand_sigma.unwrap(), delta_mu, delta_sigma)
            }
        }
    }
    Ok(fitter.finish(status))
}

/// Cyclical boosting: each iteration updates the location and then the scale
/// (each with its own best learner and step-length), honoring the two
/// separate stopping values. The scale sub-update is computed from the
/// already-updated location predictor. Both sub-updates are recorded in the
/// trace, so the trace may contain up to `m_stop_mu + m_stop_sigma` records.
pub fn boost_cyclical<T: Scalar>(
    data: &Dataset<T>,
    policy: &StepPolicy<T>,
    m_stop_mu: usize,
    m_stop_sigma: usize,
) -> Result<BoostModel<T>> {
    let mut fitter = Fitter::new(data, policy)?;
    let mut status = FitStatus::Completed;
    for m in 1..=m_stop_mu.max(m_stop_sigma) {
        let mut applied = false;
        if m <= m_stop_mu {
            let parts = fitter.grad_parts();
            let cand = fitter
                .candidate(Parameter::Mu, &parts)
                .map_err(|e| e.at_iteration(m))?;
            fitter.note_boundary(Parameter::Mu, &cand);
            if let Some(c) = cand {
                let d = c.delta_rho;
                fitter.apply(Parameter::Mu, c, Some(d), None);
                applied = true;
            }
        }
        if m <= m_stop_sigma {
            let parts = fitter.grad_parts();
            let cand = fitter
                .candidate(Parameter::Sigma, &parts)
                .map_err(|e| e.at_iteration(m))?;
            fitter.note_boundary(Parameter::Sigma, &cand);
            if let Some(c) = cand {
                let d = c.delta_rho;
                fitter.apply(Parameter::Sigma, c, None, Some(d));
                applied = true;
            }
        }
        if !applied {
            status = FitStatus::EarlyTermination { at: m };
            break;
        }
    }
    Ok(fitter.finish(status))
}

impl<T: Scalar> BoostModel<T> {
    /// Overall location intercept: offset plus the accumulated per-covariate
    /// intercept contributions.
    pub fn total_intercept_mu(&self) -> T {
        self.coef_mu
            .iter()
            .fold(self.offset_mu, |a, c| a + c.intercept)
    }

    /// Overall scale intercept, see [`Self::total_intercept_mu`].
    pub fn total_intercept_sigma(&self) -> T {
        self.coef_sigma
            .iter()
            .fold(self.offset_sigma, |a, c| a + c.intercept)
    }

    /// Additive predictors for new data given as covariate columns.
    pub fn predictors(&self, columns: &[Vec<T>]) -> Result<(Vec<T>, Vec<T>)> {
        if columns.len() != self.coef_mu.len() {
            return Err(Error::DimensionMismatch {
                what: "prediction covariates",
                expected: self.coef_mu.len(),
                found: columns.len(),
            });
        }
        let n = columns.first().map_or(0, |c| c.len());
        for col in columns {
            if col.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "prediction column",
                    expected: n,
                    found: col.len(),
                });
            }
        }
        let mut eta_mu = Vec::with_capacity(n);
        let mut eta_sigma = Vec::with_capacity(n);
        for i in 0..n {
            let mut m = self.offset_mu;
            let mut s = self.offset_sigma;
            for (j, col) in columns.iter().enumerate() {
                m = m + self.coef_mu[j].intercept + self.coef_mu[j].slope * col[i];
                s = s + self.coef_sigma[j].intercept + self.coef_sigma[j].slope * col[i];
            }
            eta_mu.push(m);
            eta_sigma.push(s);
        }
        Ok((eta_mu, eta_sigma))
    }

    /// Predicted distribution parameters: identity link for the location and
    /// exponential inverse link for the scale.
    pub fn predict(&self, columns: &[Vec<T>]) -> Result<(Vec<T>, Vec<T>)> {
        let (eta_mu, eta_sigma) = self.predictors(columns)?;
        let sigma = eta_sigma.iter().map(|&e| e.exp()).collect();
        Ok((eta_mu, sigma))
    }

    /// Total loss of the model truncated to `0..=m_done` applied updates,
    /// evaluated on the given data by replaying the trace. Element 0 is the
    /// offset-only risk.
    pub fn risk_path(&self, data: &Dataset<T>) -> Result<Vec<T>> {
        if data.num_covariates() != self.coef_mu.len() {
            return Err(Error::DimensionMismatch {
                what: "risk path covariates",
                expected: self.coef_mu.len(),
                found: data.num_covariates(),
            });
        }
        let mut p = PredictorPair::constant(self.offset_mu, self.offset_sigma, data.n());
        let mut out = Vec::with_capacity(self.m_done + 1);
        out.push(self.family.loss(data.y(), &p)?);
        for rec in &self.trace {
            let col = data.column(rec.covariate);
            let eta = match rec.parameter {
                Parameter::Mu => &mut p.eta_mu,
                Parameter::Sigma => &mut p.eta_sigma,
            };
            for i in 0..eta.len() {
                eta[i] = eta[i] + rec.nu * (rec.intercept + rec.slope * col[i]);
            }
            out.push(self.family.loss(data.y(), &p)?);
        }
        Ok(out)
    }
}
