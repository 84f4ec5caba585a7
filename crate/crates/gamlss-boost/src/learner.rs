//! Simple linear base-learners fitted to negative gradients.
//!
//! Each candidate learner is an ordinary least-squares fit of the gradient
//! vector on a single covariate, intercept included. Selection between
//! covariates is by residual sum of squares with ties broken towards the
//! smallest column index so fits are reproducible.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Intercept/slope fit of a gradient vector on one covariate column.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerFit<T> {
    /// Covariate column index (0-based).
    pub covariate: usize,
    pub intercept: T,
    pub slope: T,
    /// `intercept + slope * x_ij` for every observation.
    pub fitted: Vec<T>,
    pub rss: T,
}

impl<T: Scalar> LearnerFit<T> {
    /// Sum of squared fitted values; zero means the learner carries no signal
    /// and no step-length is defined for it.
    pub fn fitted_sum_sq(&self) -> T {
        self.fitted.iter().fold(T::zero(), |acc, &h| acc + h * h)
    }

    pub fn is_degenerate(&self) -> bool {
        self.fitted_sum_sq() == T::zero()
    }
}

/// Least-squares fit of `u` on `x` with intercept.
///
/// A constant column gets the defined fit `slope = 0, intercept = mean(u)` so
/// it behaves as an intercept-only candidate instead of erroring.
pub fn fit_ols<T: Scalar>(x: &[T], u: &[T], covariate: usize) -> Result<LearnerFit<T>> {
    let n = x.len();
    if n != u.len() {
        return Err(Error::DimensionMismatch {
            what: "base-learner fit",
            expected: n,
            found: u.len(),
        });
    }
    if n < 2 {
        return Err(Error::DegenerateData("base-learner needs n >= 2"));
    }
    let n_t = T::from_usize(n).unwrap();
    let x_mean = x.iter().fold(T::zero(), |a, &v| a + v) / n_t;
    let u_mean = u.iter().fold(T::zero(), |a, &v| a + v) / n_t;

    // Exact constancy check; near-constant columns still go through the
    // normal equations.
    let constant = x.iter().all(|&v| v == x[0]);
    let slope = if constant {
        T::zero()
    } else {
        let mut sxx = T::zero();
        let mut sxu = T::zero();
        for i in 0..n {
            let dx = x[i] - x_mean;
            sxx = sxx + dx * dx;
            sxu = sxu + dx * (u[i] - u_mean);
        }
        if sxx == T::zero() {
            T::zero()
        } else {
            sxu / sxx
        }
    };
    let intercept = u_mean - slope * x_mean;

    let mut fitted = Vec::with_capacity(n);
    let mut rss = T::zero();
    for i in 0..n {
        let f = intercept + slope * x[i];
        let e = u[i] - f;
        rss = rss + e * e;
        fitted.push(f);
    }
    Ok(LearnerFit {
        covariate,
        intercept,
        slope,
        fitted,
        rss,
    })
}

/// Fits every candidate column and returns the one with minimal residual sum
/// of squares; exact ties go to the smallest covariate index.
pub fn select_best<T: Scalar>(
    data: &Dataset<T>,
    u: &[T],
    candidates: &[usize],
) -> Result<LearnerFit<T>> {
    if candidates.is_empty() {
        return Err(Error::usage("empty candidate set for base-learner selection"));
    }
    let mut best: Option<LearnerFit<T>> = None;
    for &j in candidates {
        if j >= data.num_covariates() {
            return Err(Error::usage(format!("candidate covariate {j} out of range")));
        }
        let fit = fit_ols(data.column(j), u, j)?;
        let better = match &best {
            None => true,
            Some(current) => {
                fit.rss < current.rss
                    || (fit.rss == current.rss && fit.covariate < current.covariate)
            }
        };
        if better {
            best = Some(fit);
        }
    }
    Ok(best.expect("nonempty candidate set"))
}
