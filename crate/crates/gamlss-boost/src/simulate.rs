//! Data generators and evaluation metrics for the two built-in simulation
//! designs, plus a batch study runner.
//!
//! * `Balanced`: six informative uniform covariates with
//!   `eta_mu = x1 + 2 x2 + 0.5 x3 - x4` and
//!   `eta_sigma = 0.5 x3 + 0.25 x4 - 0.25 x5 - 0.5 x6`; location and scale
//!   live on comparable scales, so fixed and adaptive step-lengths behave
//!   similarly.
//! * `LargeVariance`: three informative covariates with
//!   `eta_mu = 1 + x1 + 2 x2 - x3` and
//!   `eta_sigma = 5 + 0.1 x1 - 0.2 x2 + 0.1 x3` plus two noise covariates.
//!   The scale intercept of 5 puts the standard deviation near 150, which
//!   starves the location gradient and exposes the imbalance of fixed
//!   step-lengths.
//!
//! Covariates are iid Uniform(-1, 1) and responses are Gaussian draws from
//! the implied per-observation location and scale, all driven by the seeded
//! generator so studies are reproducible run for run.

use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::engine::{boost_noncyclical, BoostModel};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::scalar::{cast, Scalar};
use crate::step::{Parameter, StepPolicy};
use crate::tuning::kfold_cv;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignKind {
    Balanced,
    LargeVariance,
}

impl DesignKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DesignKind::Balanced => "balanced",
            DesignKind::LargeVariance => "large-variance",
        }
    }
}

impl std::str::FromStr for DesignKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "balanced" => Ok(DesignKind::Balanced),
            "large-variance" | "large_variance" => Ok(DesignKind::LargeVariance),
            other => Err(Error::usage(format!(
                "unknown design `{other}` (expected balanced or large-variance)"
            ))),
        }
    }
}

/// Specification of one simulated dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimDesign {
    pub kind: DesignKind,
    pub n: usize,
    /// Number of non-informative covariates appended after the informative
    /// ones.
    pub p_ninf: usize,
    pub seed: u64,
}

impl SimDesign {
    pub fn balanced(n: usize, p_ninf: usize, seed: u64) -> Self {
        SimDesign {
            kind: DesignKind::Balanced,
            n,
            p_ninf,
            seed,
        }
    }

    /// The large-variance design ships with its two noise covariates.
    pub fn large_variance(n: usize, seed: u64) -> Self {
        SimDesign {
            kind: DesignKind::LargeVariance,
            n,
            p_ninf: 2,
            seed,
        }
    }

    fn informative(&self) -> usize {
        match self.kind {
            DesignKind::Balanced => 6,
            DesignKind::LargeVariance => 3,
        }
    }

    fn num_covariates(&self) -> usize {
        self.informative() + self.p_ninf
    }

    fn coefficients<T: Scalar>(&self) -> (T, Vec<T>, T, Vec<T>) {
        let j = self.num_covariates();
        let mut coef_mu = vec![T::zero(); j];
        let mut coef_sigma = vec![T::zero(); j];
        match self.kind {
            DesignKind::Balanced => {
                coef_mu[0] = T::one();
                coef_mu[1] = cast(2.0);
                coef_mu[2] = cast(0.5);
                coef_mu[3] = cast(-1.0);
                coef_sigma[2] = cast(0.5);
                coef_sigma[3] = cast(0.25);
                coef_sigma[4] = cast(-0.25);
                coef_sigma[5] = cast(-0.5);
                (T::zero(), coef_mu, T::zero(), coef_sigma)
            }
            DesignKind::LargeVariance => {
                coef_mu[0] = T::one();
                coef_mu[1] = cast(2.0);
                coef_mu[2] = cast(-1.0);
                coef_sigma[0] = cast(0.1);
                coef_sigma[1] = cast(-0.2);
                coef_sigma[2] = cast(0.1);
                (T::one(), coef_mu, cast(5.0), coef_sigma)
            }
        }
    }
}

/// Data-generating truth attached to a simulated dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTruth<T> {
    pub intercept_mu: T,
    pub coef_mu: Vec<T>,
    pub intercept_sigma: T,
    pub coef_sigma: Vec<T>,
    pub eta_mu: Vec<T>,
    pub eta_sigma: Vec<T>,
    /// Covariate indices with nonzero true location coefficient.
    pub informative_mu: Vec<usize>,
    pub informative_sigma: Vec<usize>,
}

/// Draws a dataset from the design, returning it with the truth attached.
pub fn generate<T: Scalar>(design: &SimDesign) -> Result<(Dataset<T>, SimTruth<T>)> {
    if design.n < 10 {
        return Err(Error::usage("simulation designs need n >= 10"));
    }
    let n = design.n;
    let j = design.num_covariates();
    let mut rng = SplitMix64::new(design.seed);

    let columns: Vec<Vec<T>> = (0..j)
        .map(|_| (0..n).map(|_| cast::<T>(rng.uniform(-1.0, 1.0))).collect())
        .collect();

    let (intercept_mu, coef_mu, intercept_sigma, coef_sigma) = design.coefficients::<T>();
    let mut eta_mu = Vec::with_capacity(n);
    let mut eta_sigma = Vec::with_capacity(n);
    for i in 0..n {
        let mut m = intercept_mu;
        let mut s = intercept_sigma;
        for (k, col) in columns.iter().enumerate() {
            m = m + coef_mu[k] * col[i];
            s = s + coef_sigma[k] * col[i];
        }
        eta_mu.push(m);
        eta_sigma.push(s);
    }

    let y: Vec<T> = (0..n)
        .map(|i| eta_mu[i] + eta_sigma[i].exp() * cast::<T>(rng.standard_normal()))
        .collect();

    let names = (1..=j).map(|k| format!("x{k}")).collect();
    let data = Dataset::new(y, columns, names)?;
    let truth = SimTruth {
        informative_mu: (0..j).filter(|&k| coef_mu[k] != T::zero()).collect(),
        informative_sigma: (0..j).filter(|&k| coef_sigma[k] != T::zero()).collect(),
        intercept_mu,
        coef_mu,
        intercept_sigma,
        coef_sigma,
        eta_mu,
        eta_sigma,
    };
    Ok((data, truth))
}

/// Evaluation metrics of one fitted model against the generating truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimMetrics<T> {
    /// Mean squared error of the location predictor.
    pub mse_mu: T,
    /// Mean squared error of the scale predictor (log scale).
    pub mse_sigma: T,
    /// `mean((y - fitted location)^2)` on the training data.
    pub in_sample_mse: T,
    pub fp_mu: usize,
    pub fp_sigma: usize,
    pub fn_mu: usize,
    pub fn_sigma: usize,
    /// Fraction of applied updates that targeted the location predictor
    /// (0 when no update was applied).
    pub p_m_mu: T,
    pub m_stop_used: usize,
}

/// Computes [`SimMetrics`]. A covariate counts as selected when its
/// accumulated slope is nonzero; intercept contributions do not count.
pub fn evaluate<T: Scalar>(
    model: &BoostModel<T>,
    truth: &SimTruth<T>,
    data: &Dataset<T>,
) -> Result<SimMetrics<T>> {
    if model.coef_mu.len() != data.num_covariates() || truth.coef_mu.len() != model.coef_mu.len() {
        return Err(Error::DimensionMismatch {
            what: "evaluation shapes",
            expected: data.num_covariates(),
            found: model.coef_mu.len(),
        });
    }
    let n = data.n();
    let n_t = T::from_usize(n).unwrap();
    let (eta_mu, eta_sigma) = model.predictors(data.columns())?;

    let mut mse_mu = T::zero();
    let mut mse_sigma = T::zero();
    let mut in_sample = T::zero();
    for i in 0..n {
        let dm = truth.eta_mu[i] - eta_mu[i];
        let ds = truth.eta_sigma[i] - eta_sigma[i];
        let dy = data.y()[i] - eta_mu[i];
        mse_mu = mse_mu + dm * dm;
        mse_sigma = mse_sigma + ds * ds;
        in_sample = in_sample + dy * dy;
    }
    mse_mu = mse_mu / n_t;
    mse_sigma = mse_sigma / n_t;
    in_sample = in_sample / n_t;

    let selected = |coefs: &[crate::engine::CoefPair<T>], k: usize| coefs[k].slope != T::zero();
    let count_fp = |coefs: &[crate::engine::CoefPair<T>], informative: &[usize]| {
        (0..coefs.len())
            .filter(|k| !informative.contains(k) && selected(coefs, *k))
            .count()
    };
    let count_fn = |coefs: &[crate::engine::CoefPair<T>], informative: &[usize]| {
        informative.iter().filter(|&&k| !selected(coefs, k)).count()
    };

    let mu_updates = model
        .trace
        .iter()
        .filter(|r| r.parameter == Parameter::Mu)
        .count();
    let p_m_mu = if model.m_done == 0 {
        T::zero()
    } else {
        T::from_usize(mu_updates).unwrap() / T::from_usize(model.m_done).unwrap()
    };

    Ok(SimMetrics {
        mse_mu,
        mse_sigma,
        in_sample_mse: in_sample,
        fp_mu: count_fp(&model.coef_mu, &truth.informative_mu),
        fp_sigma: count_fp(&model.coef_sigma, &truth.informative_sigma),
        fn_mu: count_fn(&model.coef_mu, &truth.informative_mu),
        fn_sigma: count_fn(&model.coef_sigma, &truth.informative_sigma),
        p_m_mu,
        m_stop_used: model.m_done,
    })
}

/// One policy arm of a study: a label for the output table, the policy and
/// its iteration budget for the cross-validation sweep.
#[derive(Debug, Clone)]
pub struct StudyEntry<T> {
    pub label: String,
    pub policy: StepPolicy<T>,
    pub m_max: usize,
}

/// One row of the study table. `metrics` is absent when the run failed; the
/// failure is recorded instead of aborting the study.
#[derive(Debug, Clone)]
pub struct StudyRow<T> {
    pub run: usize,
    pub label: String,
    pub seed: u64,
    pub metrics: Option<SimMetrics<T>>,
    pub error: Option<String>,
}

/// Cross-validation settings shared by all study arms.
#[derive(Debug, Clone, Copy)]
pub struct CvSettings {
    pub folds: usize,
    pub cv_base_seed: u64,
}

/// Runs `runs` replicates of the design. Per replicate and per entry: draw a
/// dataset, pick `m_best` by cross-validation, refit at `m_best` and compute
/// the metrics. Rows come back ordered by `(run, entry)` and the whole table
/// is a pure function of the design seed.
pub fn run_study<T: Scalar>(
    design: &SimDesign,
    entries: &[StudyEntry<T>],
    runs: usize,
    cv: CvSettings,
) -> Result<Vec<StudyRow<T>>> {
    if runs < 1 {
        return Err(Error::usage("a study needs at least one run"));
    }
    if entries.is_empty() {
        return Err(Error::usage("a study needs at least one policy entry"));
    }

    // Pre-derive per-run seeds so parallel execution cannot reorder them.
    let mut master = SplitMix64::new(design.seed);
    let run_seeds: Vec<u64> = (0..runs).map(|_| master.derive_seed()).collect();
    let mut cv_master = SplitMix64::new(cv.cv_base_seed);
    let cv_seeds: Vec<u64> = (0..runs).map(|_| cv_master.derive_seed()).collect();

    let rows: Vec<Vec<StudyRow<T>>> = (0..runs)
        .into_par_iter()
        .map(|run| {
            let run_design = SimDesign {
                seed: run_seeds[run],
                ..*design
            };
            entries
                .iter()
                .map(|entry| {
                    let outcome = run_one(&run_design, entry, cv.folds, cv_seeds[run]);
                    match outcome {
                        Ok(metrics) => StudyRow {
                            run,
                            label: entry.label.clone(),
                            seed: run_seeds[run],
                            metrics: Some(metrics),
                            error: None,
                        },
                        Err(e) => StudyRow {
                            run,
                            label: entry.label.clone(),
                            seed: run_seeds[run],
                            metrics: None,
                            error: Some(e.to_string()),
                        },
                    }
                })
                .collect()
        })
        .collect();

    Ok(rows.into_iter().flatten().collect())
}

fn run_one<T: Scalar>(
    design: &SimDesign,
    entry: &StudyEntry<T>,
    folds: usize,
    cv_seed: u64,
) -> Result<SimMetrics<T>> {
    let (data, truth) = generate::<T>(design)?;
    let cv = kfold_cv(&data, &entry.policy, entry.m_max, folds, cv_seed)?;
    let model = boost_noncyclical(&data, &entry.policy, cv.m_best)?;
    evaluate(&model, &truth, &data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::CoefPair;
    use crate::step::StepKind;

    #[test]
    fn generation_is_deterministic() {
        let design = SimDesign::balanced(50, 2, 42);
        let (a, _) = generate::<f64>(&design).unwrap();
        let (b, _) = generate::<f64>(&design).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn balanced_sigma_within_bounds() {
        let design = SimDesign::balanced(500, 0, 7);
        let (_, truth) = generate::<f64>(&design).unwrap();
        let lo = (-1.5f64).exp();
        let hi = 1.5f64.exp();
        for &eta in &truth.eta_sigma {
            let sigma = eta.exp();
            assert!(sigma >= lo && sigma <= hi, "sigma {sigma}");
        }
    }

    #[test]
    fn large_variance_sigma_near_150() {
        let design = SimDesign::large_variance(500, 9);
        let (_, truth) = generate::<f64>(&design).unwrap();
        let mut sigmas: Vec<f64> = truth.eta_sigma.iter().map(|e| e.exp()).collect();
        sigmas.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = sigmas[sigmas.len() / 2];
        let center = 5.0f64.exp();
        assert!(median > center / 2.0 && median < center * 2.0, "median {median}");
    }

    #[test]
    fn truth_reconstructs_from_coefficients() {
        let design = SimDesign::large_variance(60, 3);
        let (data, truth) = generate::<f64>(&design).unwrap();
        for i in 0..data.n() {
            let mut m = truth.intercept_mu;
            let mut s = truth.intercept_sigma;
            for (k, col) in data.columns().iter().enumerate() {
                m += truth.coef_mu[k] * col[i];
                s += truth.coef_sigma[k] * col[i];
            }
            assert_eq!(m, truth.eta_mu[i]);
            assert_eq!(s, truth.eta_sigma[i]);
        }
    }

    #[test]
    fn tiny_n_rejected() {
        assert!(generate::<f64>(&SimDesign::balanced(5, 0, 1)).is_err());
    }

    fn perfect_model(truth: &SimTruth<f64>, data: &Dataset<f64>) -> BoostModel<f64> {
        let j = data.num_covariates();
        BoostModel {
            family: crate::family::GaussianLocScale,
            offset_mu: truth.intercept_mu,
            offset_sigma: truth.intercept_sigma,
            coef_mu: (0..j)
                .map(|k| CoefPair {
                    intercept: 0.0,
                    slope: truth.coef_mu[k],
                })
                .collect(),
            coef_sigma: (0..j)
                .map(|k| CoefPair {
                    intercept: 0.0,
                    slope: truth.coef_sigma[k],
                })
                .collect(),
            trace: Vec::new(),
            m_done: 0,
            policy: StepPolicy::new(StepKind::Saasl),
            status: crate::engine::FitStatus::Completed,
            names: data.names().to_vec(),
            boundary_hits_mu: 0,
            boundary_hits_sigma: 0,
            sigma_clamp_reached: false,
        }
    }

    #[test]
    fn perfect_model_has_zero_error() {
        let design = SimDesign::balanced(80, 1, 5);
        let (data, truth) = generate::<f64>(&design).unwrap();
        let model = perfect_model(&truth, &data);
        let metrics = evaluate(&model, &truth, &data).unwrap();
        assert!(metrics.mse_mu < 1e-24);
        assert!(metrics.mse_sigma < 1e-24);
        assert_eq!(metrics.fn_mu, 0);
        assert_eq!(metrics.fn_sigma, 0);
        assert_eq!(metrics.fp_mu, 0);
    }

    #[test]
    fn offset_only_model_misses_everything() {
        let design = SimDesign::balanced(80, 3, 6);
        let (data, truth) = generate::<f64>(&design).unwrap();
        let model = boost_noncyclical(&data, &StepPolicy::fsl(), 0).unwrap();
        let metrics = evaluate(&model, &truth, &data).unwrap();
        assert_eq!(metrics.fn_mu, 4);
        assert_eq!(metrics.fn_sigma, 4);
        assert_eq!(metrics.fp_mu, 0);
        assert_eq!(metrics.fp_sigma, 0);
        assert_eq!(metrics.p_m_mu, 0.0);
    }

    #[test]
    fn selection_counts_bounded_by_sets() {
        let design = SimDesign::balanced(120, 4, 8);
        let (data, truth) = generate::<f64>(&design).unwrap();
        let model = boost_noncyclical(&data, &StepPolicy::saasl05(), 60).unwrap();
        let metrics = evaluate(&model, &truth, &data).unwrap();
        let noise = data.num_covariates() - truth.informative_mu.len();
        assert!(metrics.fp_mu <= noise);
        assert!(metrics.fn_mu <= truth.informative_mu.len());
        // fp + true negatives = number of noise covariates.
        let tn = (0..data.num_covariates())
            .filter(|k| {
                !truth.informative_mu.contains(k) && model.coef_mu[*k].slope == 0.0
            })
            .count();
        assert_eq!(metrics.fp_mu + tn, noise);
    }

    #[test]
    fn evaluate_is_order_invariant() {
        let design = SimDesign::balanced(60, 0, 10);
        let (data, truth) = generate::<f64>(&design).unwrap();
        let model = boost_noncyclical(&data, &StepPolicy::saasl05(), 30).unwrap();
        let base = evaluate(&model, &truth, &data).unwrap();

        let perm: Vec<usize> = (0..data.n()).rev().collect();
        let data_p = data.subset(&perm).unwrap();
        let truth_p = SimTruth {
            eta_mu: perm.iter().map(|&i| truth.eta_mu[i]).collect(),
            eta_sigma: perm.iter().map(|&i| truth.eta_sigma[i]).collect(),
            ..truth.clone()
        };
        let permuted = evaluate(&model, &truth_p, &data_p).unwrap();
        assert!((base.mse_mu - permuted.mse_mu).abs() < 1e-12);
        assert!((base.in_sample_mse - permuted.in_sample_mse).abs() < 1e-9);
        assert_eq!(base.fp_mu, permuted.fp_mu);
    }

    #[test]
    fn study_has_one_row_per_policy_and_is_deterministic() {
        let design = SimDesign::balanced(40, 0, 77);
        let entries: Vec<StudyEntry<f64>> = vec![
            StudyEntry {
                label: "fsl".into(),
                policy: StepPolicy::fsl(),
                m_max: 10,
            },
            StudyEntry {
                label: "saasl05".into(),
                policy: StepPolicy::saasl05(),
                m_max: 10,
            },
        ];
        let cv = CvSettings {
            folds: 4,
            cv_base_seed: 5,
        };
        let rows = run_study(&design, &entries, 1, cv).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.error.is_none()));

        let again = run_study(&design, &entries, 1, cv).unwrap();
        for (a, b) in rows.iter().zip(&again) {
            assert_eq!(a.run, b.run);
            assert_eq!(a.label, b.label);
            assert_eq!(a.seed, b.seed);
            assert_eq!(a.metrics.unwrap(), b.metrics.unwrap());
        }
    }
}
