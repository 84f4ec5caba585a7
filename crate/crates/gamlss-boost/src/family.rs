//! Gaussian location-scale family: exact negative log-likelihood loss and its
//! negative partial gradients with respect to the two additive predictors.
//!
//! The model is `y_i ~ N(mu_i, sigma_i)` with identity link for the location
//! (`mu_i = eta_mu_i`) and log link for the scale (`sigma_i = exp(eta_sigma_i)`).
//! The loss keeps the `log(2*pi)/2` constant so reported risks are directly
//! comparable to likelihood values from other software; the constant cancels
//! in every argmin decision the boosting engine makes.

use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};

/// `0.5 * ln(2 * pi)`.
pub(crate) const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_7;

/// Scale predictors beyond this magnitude are clamped before exponentiation;
/// `exp(2 * 350)` already overflows f64, so larger values carry no information.
pub const ETA_SIGMA_CLAMP: f64 = 350.0;

#[inline]
pub(crate) fn clamp_eta_sigma<T: Scalar>(eta: T) -> T {
    let bound = cast::<T>(ETA_SIGMA_CLAMP);
    eta.max(-bound).min(bound)
}

/// Pair of additive predictors, one entry per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorPair<T> {
    pub eta_mu: Vec<T>,
    pub eta_sigma: Vec<T>,
}

impl<T: Scalar> PredictorPair<T> {
    pub fn new(eta_mu: Vec<T>, eta_sigma: Vec<T>) -> Result<Self> {
        if eta_mu.len() != eta_sigma.len() {
            return Err(Error::DimensionMismatch {
                what: "predictor pair",
                expected: eta_mu.len(),
                found: eta_sigma.len(),
            });
        }
        if let Some(index) = eta_mu.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "eta_mu",
                index,
            });
        }
        if let Some(index) = eta_sigma.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "eta_sigma",
                index,
            });
        }
        Ok(PredictorPair { eta_mu, eta_sigma })
    }

    /// Constant predictors (offset-only model) for `n` observations.
    pub fn constant(offset_mu: T, offset_sigma: T, n: usize) -> Self {
        PredictorPair {
            eta_mu: vec![offset_mu; n],
            eta_sigma: vec![offset_sigma; n],
        }
    }

    pub fn len(&self) -> usize {
        self.eta_mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta_mu.is_empty()
    }
}

/// Stateless descriptor of the Gaussian location-scale family.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GaussianLocScale;

impl GaussianLocScale {
    /// Total empirical risk: the negative Gaussian log-likelihood summed over
    /// all observations, including the `log(2*pi)/2` constant.
    pub fn loss<T: Scalar>(&self, y: &[T], p: &PredictorPair<T>) -> Result<T> {
        check_lengths(y, p)?;
        let half = cast::<T>(0.5);
        let c = cast::<T>(HALF_LN_TWO_PI);
        let two = cast::<T>(2.0);
        let mut total = T::zero();
        for i in 0..y.len() {
            let r = y[i] - p.eta_mu[i];
            let w = (-two * clamp_eta_sigma(p.eta_sigma[i])).exp();
            let term = c + p.eta_sigma[i] + half * r * r * w;
            if !term.is_finite() {
                return Err(Error::NonFinite {
                    context: "loss",
                    index: i,
                });
            }
            total = total + term;
        }
        Ok(total)
    }

    /// Negative gradient for the location predictor:
    /// `u_mu_i = (y_i - eta_mu_i) * exp(-2 * eta_sigma_i)`.
    pub fn grad_mu<T: Scalar>(&self, y: &[T], p: &PredictorPair<T>) -> Result<Vec<T>> {
        check_lengths(y, p)?;
        let two = cast::<T>(2.0);
        let mut u = Vec::with_capacity(y.len());
        for i in 0..y.len() {
            let w = (-two * clamp_eta_sigma(p.eta_sigma[i])).exp();
            let v = (y[i] - p.eta_mu[i]) * w;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    context: "grad_mu",
                    index: i,
                });
            }
            u.push(v);
        }
        Ok(u)
    }

    /// Negative gradient for the scale predictor:
    /// `u_sigma_i = -1 + (y_i - eta_mu_i)^2 * exp(-2 * eta_sigma_i)`.
    pub fn grad_sigma<T: Scalar>(&self, y: &[T], p: &PredictorPair<T>) -> Result<Vec<T>> {
        check_lengths(y, p)?;
        let two = cast::<T>(2.0);
        let mut u = Vec::with_capacity(y.len());
        for i in 0..y.len() {
            let r = y[i] - p.eta_mu[i];
            let w = (-two * clamp_eta_sigma(p.eta_sigma[i])).exp();
            let v = r * r * w - T::one();
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    context: "grad_sigma",
                    index: i,
                });
            }
            u.push(v);
        }
        Ok(u)
    }
}

fn check_lengths<T: Scalar>(y: &[T], p: &PredictorPair<T>) -> Result<()> {
    if y.len() != p.eta_mu.len() || y.len() != p.eta_sigma.len() {
        return Err(Error::DimensionMismatch {
            what: "loss inputs",
            expected: y.len(),
            found: p.eta_mu.len().min(p.eta_sigma.len()),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const FAMILY: GaussianLocScale = GaussianLocScale;

    /// Independent scalar oracle: negative log-density of N(mu, sigma) at y,
    /// written in the (mu, sigma) parametrization rather than predictors.
    fn nll_scalar(y: f64, mu: f64, sigma: f64) -> f64 {
        0.5 * (2.0 * std::f64::consts::PI).ln() + sigma.ln() + (y - mu).powi(2) / (2.0 * sigma * sigma)
    }

    fn pair(eta_mu: Vec<f64>, eta_sigma: Vec<f64>) -> PredictorPair<f64> {
        PredictorPair::new(eta_mu, eta_sigma).unwrap()
    }

    #[test]
    fn loss_standard_normal_at_mode() {
        let l = FAMILY.loss(&[0.0], &pair(vec![0.0], vec![0.0])).unwrap();
        assert!((l - 0.9189385332046727).abs() < 1e-12);
    }

    #[test]
    fn loss_unit_residual_unit_variance() {
        let l = FAMILY.loss(&[1.0], &pair(vec![0.0], vec![0.0])).unwrap();
        assert!((l - 1.4189385332046727).abs() < 1e-12);
    }

    #[test]
    fn loss_matches_density_oracle() {
        let y = [2.0, 0.0];
        let p = pair(vec![1.0, 1.0], vec![2.0f64.ln(), 2.0f64.ln()]);
        let expected = nll_scalar(2.0, 1.0, 2.0) + nll_scalar(0.0, 1.0, 2.0);
        let l = FAMILY.loss(&y, &p).unwrap();
        assert!((l - expected).abs() < 1e-12, "{l} vs {expected}");
    }

    #[test]
    fn grad_mu_trivial_values() {
        let u = FAMILY.grad_mu(&[0.0], &pair(vec![0.0], vec![0.0])).unwrap();
        assert_eq!(u, vec![0.0]);
        let u = FAMILY.grad_mu(&[1.0], &pair(vec![0.0], vec![0.0])).unwrap();
        assert_eq!(u, vec![1.0]);
    }

    #[test]
    fn grad_sigma_trivial_values() {
        let u = FAMILY
            .grad_sigma(&[0.0], &pair(vec![0.0], vec![0.0]))
            .unwrap();
        assert_eq!(u, vec![-1.0]);
        let u = FAMILY
            .grad_sigma(&[1.0], &pair(vec![0.0], vec![0.0]))
            .unwrap();
        assert_eq!(u, vec![0.0]);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let err = FAMILY
            .loss(&[0.0, 1.0], &pair(vec![0.0], vec![0.0]))
            .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn extreme_scale_predictors_are_clamped() {
        // Without the clamp exp(-2 * -400) would overflow; the clamped loss
        // stays finite.
        let p = pair(vec![0.0], vec![-400.0]);
        // eta_sigma = -400 is not finite-breaking by itself; PredictorPair
        // accepts it, loss clamps the exponentiation.
        let l = FAMILY.loss(&[1.0], &p).unwrap();
        assert!(l.is_finite());
    }

    #[test]
    fn zero_scale_predictor_reduces_to_least_squares() {
        let y = [1.0, -2.0, 0.5, 3.0];
        let eta_mu = vec![0.5, -1.0, 0.0, 2.5];
        let p = pair(eta_mu.clone(), vec![0.0; 4]);
        let rss: f64 = y
            .iter()
            .zip(&eta_mu)
            .map(|(yi, m)| (yi - m).powi(2))
            .sum();
        let expected = 4.0 * 0.5 * (2.0 * std::f64::consts::PI).ln() + 0.5 * rss;
        let l = FAMILY.loss(&y, &p).unwrap();
        assert!((l - expected).abs() < 1e-12);
    }

    mod properties {
        use super::*;
        use crate::rng::SplitMix64;
        use proptest::prelude::*;

        fn finite_diff_check(seed: u64) {
            let mut rng = SplitMix64::new(seed);
            let n = 50;
            let y: Vec<f64> = (0..n).map(|_| rng.uniform(-5.0, 5.0)).collect();
            let eta_mu: Vec<f64> = (0..n).map(|_| rng.uniform(-3.0, 3.0)).collect();
            let eta_sigma: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.5)).collect();
            let p = pair(eta_mu.clone(), eta_sigma.clone());
            let u_mu = FAMILY.grad_mu(&y, &p).unwrap();
            let u_sigma = FAMILY.grad_sigma(&y, &p).unwrap();
            // Relative error with a unit floor: at step 1e-6 the cancellation
            // noise of a double-precision central difference sits near 1e-8
            // in absolute terms, so components far below one are compared
            // absolutely.
            let h = 1e-6;
            for i in 0..n {
                let mut up = eta_mu.clone();
                let mut dn = eta_mu.clone();
                up[i] += h;
                dn[i] -= h;
                let lp = FAMILY.loss(&y, &pair(up, eta_sigma.clone())).unwrap();
                let ln = FAMILY.loss(&y, &pair(dn, eta_sigma.clone())).unwrap();
                let fd = (lp - ln) / (2.0 * h);
                let rel = (fd + u_mu[i]).abs() / fd.abs().max(1.0);
                assert!(rel < 1e-6, "mu[{i}]: fd {fd} vs -u {}", -u_mu[i]);

                let mut up = eta_sigma.clone();
                let mut dn = eta_sigma.clone();
                up[i] += h;
                dn[i] -= h;
                let lp = FAMILY.loss(&y, &pair(eta_mu.clone(), up)).unwrap();
                let ln = FAMILY.loss(&y, &pair(eta_mu.clone(), dn)).unwrap();
                let fd = (lp - ln) / (2.0 * h);
                let rel = (fd + u_sigma[i]).abs() / fd.abs().max(1.0);
                assert!(rel < 1e-6, "sigma[{i}]: fd {fd} vs -u {}", -u_sigma[i]);
            }
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(16))]

            #[test]
            fn gradients_match_finite_differences(seed in 0u64..1_000_000) {
                finite_diff_check(seed);
            }

            #[test]
            fn loss_is_permutation_invariant(seed in 0u64..1_000_000) {
                let mut rng = SplitMix64::new(seed);
                let n = 20;
                let y: Vec<f64> = (0..n).map(|_| rng.uniform(-5.0, 5.0)).collect();
                let eta_mu: Vec<f64> = (0..n).map(|_| rng.uniform(-3.0, 3.0)).collect();
                let eta_sigma: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
                let base = FAMILY.loss(&y, &pair(eta_mu.clone(), eta_sigma.clone())).unwrap();

                let mut order: Vec<usize> = (0..n).collect();
                rng.shuffle(&mut order);
                let yp: Vec<f64> = order.iter().map(|&i| y[i]).collect();
                let mp: Vec<f64> = order.iter().map(|&i| eta_mu[i]).collect();
                let sp: Vec<f64> = order.iter().map(|&i| eta_sigma[i]).collect();
                let permuted = FAMILY.loss(&yp, &pair(mp, sp)).unwrap();
                prop_assert!((base - permuted).abs() <= 1e-9 * base.abs().max(1.0));
            }
        }
    }
}
