//! Componentwise gradient boosting for Gaussian location-scale regression.
//!
//! Both distribution parameters get their own additive predictor (identity
//! link for the location, log link for the scale) built from simple linear
//! base-learners. Each boosting iteration fits the base-learners to the
//! negative gradient of the exact Gaussian negative log-likelihood, picks the
//! best covariate per parameter by residual sum of squares, and — in the
//! non-cyclical loop — applies only the parameter update that most reduces
//! the outer loss.
//!
//! The step-length used for an update comes from one of four policies
//! ([`StepKind`]): a fixed constant, a line-searched adaptive optimum, a
//! semi-analytical variant with a closed-form location step, or the variant
//! that additionally pins the scale step to its theoretical 0.5 limit. See
//! the [`step`] module for the details and trade-offs.
//!
//! All numerics are generic over the floating-point scalar via [`Scalar`];
//! the `*64` aliases below fix `f64`, which is what the command-line tools
//! use.
//!
//! ```
//! use gamlss_boost::{boost_noncyclical, Dataset, StepPolicy};
//!
//! let x1 = vec![-1.0, -0.5, 0.0, 0.5, 1.0, 1.5];
//! let x2 = vec![0.3, -0.2, 0.8, -0.6, 0.1, -0.4];
//! let y: Vec<f64> = x1.iter().map(|v| 2.0 * v + 0.1).collect();
//! let data = Dataset::new(y, vec![x1, x2], vec!["x1".into(), "x2".into()]).unwrap();
//!
//! let model = boost_noncyclical(&data, &StepPolicy::saasl05(), 25).unwrap();
//! let (mu_hat, sigma_hat) = model.predict(data.columns()).unwrap();
//! assert_eq!(mu_hat.len(), 6);
//! assert!(sigma_hat.iter().all(|s| *s > 0.0));
//! ```

pub mod dataset;
pub mod engine;
pub mod error;
pub mod family;
pub mod learner;
pub mod rng;
mod scalar;
pub mod simulate;
pub mod step;
pub mod tuning;

pub use dataset::Dataset;
pub use engine::{
    boost_cyclical, boost_noncyclical, init_offsets, BoostModel, CoefPair, FitStatus, TraceRecord,
};
pub use error::{Error, Result};
pub use family::{GaussianLocScale, PredictorPair};
pub use learner::{fit_ols, select_best, LearnerFit};
pub use scalar::Scalar;
pub use simulate::{
    evaluate, generate, run_study, CvSettings, DesignKind, SimDesign, SimMetrics, SimTruth,
    StudyEntry, StudyRow,
};
pub use step::{
    analytic_nu_mu, line_search, nu_sigma_foc_residual, step_for, Interval, Parameter, StepKind,
    StepPolicy, StepResult,
};
pub use tuning::{kfold_cv, kfold_cv_with_models, CvResult};

/// `f64` specializations of the main types.
pub type Dataset64 = Dataset<f64>;
pub type PredictorPair64 = PredictorPair<f64>;
pub type StepPolicy64 = StepPolicy<f64>;
pub type StepResult64 = StepResult<f64>;
pub type LearnerFit64 = LearnerFit<f64>;
pub type BoostModel64 = BoostModel<f64>;
pub type TraceRecord64 = TraceRecord<f64>;
pub type CvResult64 = CvResult<f64>;
pub type SimMetrics64 = SimMetrics<f64>;

/// `f32` specializations, for memory-bound workloads.
pub type Dataset32 = Dataset<f32>;
pub type StepPolicy32 = StepPolicy<f32>;
pub type BoostModel32 = BoostModel<f32>;
