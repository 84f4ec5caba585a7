//! Cross-validated choice of the global stopping iteration.
//!
//! Observations are shuffled once with the seeded generator and split into
//! `K` folds whose sizes differ by at most one. Each fold's model is fitted
//! on the complement (offsets recomputed there, so nothing leaks from the
//! held-out part) and scored on the held-out observations along the whole
//! iteration path. The reported out-of-fold risk is the held-out loss per
//! observation, averaged over folds; `m_best` is its argmin with ties going
//! to the smallest iteration count.

use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::engine::{boost_noncyclical, BoostModel};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::scalar::Scalar;
use crate::step::StepPolicy;

/// Result of a k-fold cross-validation sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct CvResult<T> {
    /// Iteration count with minimal mean out-of-fold risk (smallest on ties).
    pub m_best: usize,
    /// Mean out-of-fold risk per observation, indexed by iteration count
    /// `0..=m_max`.
    pub mean_risk: Vec<T>,
    /// Fold id of every observation.
    pub fold_assignment: Vec<usize>,
    pub seed: u64,
}

/// Runs the cross-validation sweep; see the module docs.
pub fn kfold_cv<T: Scalar>(
    data: &Dataset<T>,
    policy: &StepPolicy<T>,
    m_max: usize,
    folds: usize,
    seed: u64,
) -> Result<CvResult<T>> {
    kfold_cv_with_models(data, policy, m_max, folds, seed).map(|(cv, _)| cv)
}

/// Like [`kfold_cv`] but also returns each fold's fitted model (indexed by
/// fold id), useful for auditing the per-fold fits.
pub fn kfold_cv_with_models<T: Scalar>(
    data: &Dataset<T>,
    policy: &StepPolicy<T>,
    m_max: usize,
    folds: usize,
    seed: u64,
) -> Result<(CvResult<T>, Vec<BoostModel<T>>)> {
    let n = data.n();
    if folds < 2 || folds > n {
        return Err(Error::usage(format!(
            "fold count must be in [2, n]; got {folds} with n = {n}"
        )));
    }
    if m_max < 1 {
        return Err(Error::usage("m_max must be at least 1"));
    }
    if n / folds < 2 {
        return Err(Error::usage(format!(
            "each fold needs at least two observations; got n = {n}, folds = {folds}"
        )));
    }
    policy.validate()?;

    let fold_assignment = assign_folds(n, folds, seed);

    let fold_results: Vec<Result<(Vec<T>, BoostModel<T>)>> = (0..folds)
        .into_par_iter()
        .map(|fold| {
            let train_rows: Vec<usize> = (0..n).filter(|&i| fold_assignment[i] != fold).collect();
            let held_rows: Vec<usize> = (0..n).filter(|&i| fold_assignment[i] == fold).collect();
            let train = data.subset(&train_rows)?;
            let held = data.subset(&held_rows)?;
            let model = boost_noncyclical(&train, policy, m_max)?;
            let mut path = model.risk_path(&held)?;
            // An early-terminated fit stops changing; extend its path so all
            // folds share the same length.
            let last = *path.last().expect("path has the offset element");
            path.resize(m_max + 1, last);
            let per_obs = T::from_usize(held.n()).unwrap();
            for v in &mut path {
                *v = *v / per_obs;
            }
            Ok((path, model))
        })
        .collect();

    let mut models = Vec::with_capacity(folds);
    let mut mean_risk = vec![T::zero(); m_max + 1];
    let k = T::from_usize(folds).unwrap();
    for result in fold_results {
        let (path, model) = result?;
        for (m, v) in path.iter().enumerate() {
            mean_risk[m] = mean_risk[m] + *v / k;
        }
        models.push(model);
    }

    let mut m_best = 0;
    for (m, &risk) in mean_risk.iter().enumerate() {
        if risk < mean_risk[m_best] {
            m_best = m;
        }
    }

    Ok((
        CvResult {
            m_best,
            mean_risk,
            fold_assignment,
            seed,
        },
        models,
    ))
}

/// Seeded shuffle of `0..n` chopped into `folds` chunks whose sizes differ by
/// at most one; returns the fold id per observation.
fn assign_folds(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    SplitMix64::new(seed).shuffle(&mut order);
    let base = n / folds;
    let extra = n % folds;
    let mut assignment = vec![0usize; n];
    let mut cursor = 0;
    for fold in 0..folds {
        let size = base + usize::from(fold < extra);
        for &obs in &order[cursor..cursor + size] {
            assignment[obs] = fold;
        }
        cursor += size;
    }
    assignment
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn toy_data(seed: u64, n: usize) -> Dataset<f64> {
        let mut rng = SplitMix64::new(seed);
        let x1: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let x2: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| 2.0 * x1[i] + 0.5 * rng.standard_normal())
            .collect();
        Dataset::new(y, vec![x1, x2], vec!["x1".into(), "x2".into()]).unwrap()
    }

    #[test]
    fn same_seed_is_deterministic() {
        let data = toy_data(1, 60);
        let policy = StepPolicy::saasl05();
        let a = kfold_cv(&data, &policy, 30, 5, 99).unwrap();
        let b = kfold_cv(&data, &policy, 30, 5, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn structure_of_mean_risk() {
        let data = toy_data(2, 50);
        let cv = kfold_cv(&data, &StepPolicy::fsl(), 20, 5, 7).unwrap();
        assert_eq!(cv.mean_risk.len(), 21);
        assert!(cv.m_best <= 20);
        assert_eq!(cv.fold_assignment.len(), 50);
    }

    #[test]
    fn offset_risk_is_policy_independent() {
        let data = toy_data(3, 40);
        let a = kfold_cv(&data, &StepPolicy::fsl(), 10, 4, 11).unwrap();
        let b = kfold_cv(&data, &StepPolicy::saasl(), 10, 4, 11).unwrap();
        assert_eq!(a.mean_risk[0], b.mean_risk[0]);
    }

    #[test]
    fn longer_sweep_preserves_prefix() {
        let data = toy_data(4, 50);
        let policy = StepPolicy::saasl05();
        let short = kfold_cv(&data, &policy, 15, 5, 3).unwrap();
        let long = kfold_cv(&data, &policy, 40, 5, 3).unwrap();
        for m in 0..=15 {
            assert_eq!(short.mean_risk[m], long.mean_risk[m], "m = {m}");
        }
    }

    #[test]
    fn every_observation_held_out_once() {
        let n = 53;
        let assignment = assign_folds(n, 7, 123);
        let mut sizes = vec![0usize; 7];
        for &f in &assignment {
            sizes[f] += 1;
        }
        assert_eq!(sizes.iter().sum::<usize>(), n);
        let min = *sizes.iter().min().unwrap();
        let max = *sizes.iter().max().unwrap();
        assert!(max - min <= 1, "{sizes:?}");
    }

    #[test]
    fn fold_too_small_is_usage_error() {
        let data = toy_data(5, 7);
        let err = kfold_cv(&data, &StepPolicy::fsl(), 5, 4, 1).unwrap_err();
        assert!(matches!(err, Error::Usage(_)));
    }

    #[test]
    fn bad_fold_count_is_usage_error() {
        let data = toy_data(6, 20);
        assert!(kfold_cv(&data, &StepPolicy::fsl(), 5, 1, 1).is_err());
        assert!(kfold_cv(&data, &StepPolicy::fsl(), 5, 21, 1).is_err());
        assert!(kfold_cv(&data, &StepPolicy::fsl(), 0, 5, 1).is_err());
    }
}
