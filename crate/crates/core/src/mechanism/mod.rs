//! Reward alignment, random-challenge mixing, and the aggregator
//! variance/sensitivity trade-off.

pub mod aggregation;

pub use aggregation::{
    aggregate, aggregator_inflation, empirical_sensitivity, gradient_sensitivity, n_eff, pareto_frontier,
    variance_mc, dominates, evaluate_aggregators, non_dominated, AggregatorSpec, Baseline, ContaminationModel,
    FrontierPoint, VarianceEstimate,
};

use crate::error::{Error, Result};
use crate::game::{QuadraticGame, SanctionOperator};
use crate::linalg::Vector;
use crate::manipulability::solve_manipulation;
use crate::scalar::Scalar;

/// Mixing of the evaluation signal with private randomized challenges:
/// `s̃ = (1−π)s + πc`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixPolicy<T> {
    pi: T,
    eta: T,
    sigma_c: T,
}

impl<T: Scalar> MixPolicy<T> {
    pub fn new(pi: T, eta: T, sigma_c: T) -> Result<Self> {
        if !(pi >= T::zero() && pi <= T::one()) {
            return Err(Error::invalid("pi", format!("must lie in [0, 1], got {pi}")));
        }
        if !eta.is_finite() {
            return Err(Error::NonFinite("eta"));
        }
        if !(sigma_c > T::zero()) || !sigma_c.is_finite() {
            return Err(Error::invalid("sigma_c", format!("must be positive, got {sigma_c}")));
        }
        Ok(MixPolicy { pi, eta, sigma_c })
    }

    /// No challenges at all.
    pub fn none() -> Self {
        MixPolicy { pi: T::zero(), eta: T::one(), sigma_c: T::one() }
    }

    pub fn pi(&self) -> T {
        self.pi
    }

    pub fn eta(&self) -> T {
        self.eta
    }

    pub fn sigma_c(&self) -> T {
        self.sigma_c
    }

    pub fn with_pi(&self, pi: T) -> Result<Self> {
        Self::new(pi, self.eta, self.sigma_c)
    }

    /// `(1−π)r + πηu`
    pub fn effective_reward(&self, r: &Vector<T>, u: &Vector<T>) -> Vector<T> {
        r.scaled(T::one() - self.pi).axpy(self.pi * self.eta, u)
    }
}

/// Unit reward direction proportional to `Ku`.
pub fn optimal_reward_direction<T: Scalar>(game: &QuadraticGame<T>) -> Result<Vector<T>> {
    if game.welfare_unconstrained() {
        return Err(Error::ZeroWelfareGradient);
    }
    let k = game.curvature();
    if k.min_eigenvalue() <= T::lit(crate::game::PD_FLOOR) {
        return Err(Error::SingularCurvature { min_eigenvalue: k.min_eigenvalue().as_f64() });
    }
    k.mul_vec(game.u()).normalized()
}

/// `ℳ` evaluated at the mixed reward gradient.
pub fn mixed_index<T: Scalar>(game: &QuadraticGame<T>, sanction: &SanctionOperator<T>, mix: &MixPolicy<T>) -> Result<T> {
    let mixed = game.with_reward(mix.effective_reward(game.r(), game.u()))?;
    Ok(solve_manipulation(&mixed, sanction)?.index_value)
}

/// `(1−π)²ℳ + (π(1−π)/2) η²‖u‖²/λ_min(K)`.
///
/// Dominates the mixed index for `η ≥ 0`. It is nonincreasing on `[0, 1]`
/// only when `η²‖u‖²/λ_min(K) ≤ 4ℳ`; see [`mixing_bound_is_monotone`].
pub fn mixing_bound<T: Scalar>(game: &QuadraticGame<T>, mix: &MixPolicy<T>, manip_index_at_pi0: T) -> Result<T> {
    let c = challenge_term(game, mix)?;
    let pi = mix.pi;
    let keep = T::one() - pi;
    Ok(keep * keep * manip_index_at_pi0 + pi * keep * T::lit(0.5) * c)
}

/// `η²‖u‖²/λ_min(K)`
fn challenge_term<T: Scalar>(game: &QuadraticGame<T>, mix: &MixPolicy<T>) -> Result<T> {
    let lam = game.curvature().min_eigenvalue();
    if lam <= T::lit(crate::game::PD_FLOOR) {
        return Err(Error::SingularCurvature { min_eigenvalue: lam.as_f64() });
    }
    Ok(mix.eta * mix.eta * game.u().norm_sq() / lam)
}

/// Whether the mixing bound is nonincreasing in `π` over all of `[0, 1]`.
/// The bound is a quadratic in `π` with slope `c/2 − 2ℳ` at `π = 0`, where
/// `c = η²‖u‖²/λ_min(K)`, so monotonicity holds iff `c ≤ 4ℳ`.
pub fn mixing_bound_is_monotone<T: Scalar>(game: &QuadraticGame<T>, mix: &MixPolicy<T>, manip_index_at_pi0: T) -> Result<bool> {
    let c = challenge_term(game, mix)?;
    Ok(c <= T::lit(4.0) * manip_index_at_pi0 * (T::one() + T::tol(1e-12)))
}

/// Required-sample inflation `(1−π)⁻²` from shrinking the gaming-sensitive
/// component of the signal.
pub fn mixing_inflation<T: Scalar>(pi: T) -> Result<T> {
    if !(pi >= T::zero() && pi < T::one()) {
        return Err(Error::invalid("pi", format!("inflation needs pi in [0, 1), got {pi}")));
    }
    let keep = T::one() - pi;
    Ok(T::one() / (keep * keep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::build_sanction;
    use approx::assert_relative_eq;

    fn iso(u: &[f64], r: &[f64]) -> QuadraticGame<f64> {
        QuadraticGame::from_f64(u, r, &[vec![1.0, 0.0], vec![0.0, 1.0]], 0.5, 1.0).unwrap()
    }

    fn mix(pi: f64) -> MixPolicy<f64> {
        MixPolicy::new(pi, 1.0, 1.0).unwrap()
    }

    #[test]
    fn isotropic_reward_direction_is_u() {
        let d = optimal_reward_direction(&iso(&[1.0, 0.0], &[0.0, 1.0])).unwrap();
        assert_eq!(d.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn anisotropic_reward_direction() {
        let s = 0.5f64.sqrt();
        let g = QuadraticGame::<f64>::from_f64(&[s, s], &[0.0, 1.0], &[vec![1.0, 0.0], vec![0.0, 3.0]], 0.0, 1.0).unwrap();
        let d = optimal_reward_direction(&g).unwrap();
        let n = 10f64.sqrt();
        assert_relative_eq!(d[0], 1.0 / n, epsilon = 1e-15);
        assert_relative_eq!(d[1], 3.0 / n, epsilon = 1e-15);
        let aligned = g.with_reward(d).unwrap();
        let sol = solve_manipulation(&aligned, &build_sanction(&aligned, 0.0).unwrap()).unwrap();
        assert!(sol.constraint_active);
        // u is not an eigenvector of K here, so the constrained index is
        // positive: ½(rᵀMr − (uᵀMr)²/uᵀMu) = ½(0.4 − 0.3).
        assert_relative_eq!(sol.index_value, 0.05, epsilon = 1e-12);
    }

    #[test]
    fn reward_direction_is_zero_index_for_eigenvector_u() {
        let g = QuadraticGame::<f64>::from_f64(&[0.0, 2.0], &[1.0, 0.0], &[vec![1.0, 0.0], vec![0.0, 3.0]], 0.1, 1.0)
            .unwrap();
        let aligned = g.with_reward(optimal_reward_direction(&g).unwrap()).unwrap();
        let sol = solve_manipulation(&aligned, &build_sanction(&aligned, 0.0).unwrap()).unwrap();
        assert!(sol.constraint_active);
        assert!(sol.index_value <= 1e-12);
    }

    #[test]
    fn mixed_index_values() {
        let g = iso(&[1.0, 0.0], &[0.0, 1.0]);
        let s = build_sanction(&g, 0.0).unwrap();
        assert_relative_eq!(mixed_index(&g, &s, &mix(0.0)).unwrap(), 0.25, epsilon = 1e-15);
        assert_eq!(mixed_index(&g, &s, &mix(1.0)).unwrap(), 0.0);
        assert_relative_eq!(mixed_index(&g, &s, &mix(0.5)).unwrap(), 0.0625, epsilon = 1e-15);
    }

    #[test]
    fn mixing_bound_values() {
        let g = iso(&[1.0, 0.0], &[0.0, 1.0]);
        assert_relative_eq!(mixing_bound(&g, &mix(0.5), 0.25).unwrap(), 0.125, epsilon = 1e-15);
        assert_relative_eq!(mixing_bound(&g, &mix(0.0), 0.25).unwrap(), 0.25, epsilon = 1e-15);
        assert_eq!(mixing_bound(&g, &mix(1.0), 0.25).unwrap(), 0.0);
    }

    #[test]
    fn monotonicity_condition() {
        let g = iso(&[1.0, 0.0], &[0.0, 1.0]);
        // c = 1/2, 4ℳ = 1.
        assert!(mixing_bound_is_monotone(&g, &mix(0.0), 0.25).unwrap());
        let aligned = iso(&[1.0, 0.0], &[1.0, 0.0]);
        assert!(!mixing_bound_is_monotone(&aligned, &mix(0.0), 0.0).unwrap());
        let b0 = mixing_bound(&aligned, &mix(0.0), 0.0).unwrap();
        let b1 = mixing_bound(&aligned, &mix(0.3), 0.0).unwrap();
        assert!(b1 > b0);
    }

    #[test]
    fn rejects_bad_pi() {
        assert!(MixPolicy::new(1.5, 1.0, 1.0).is_err());
        assert!(MixPolicy::new(-0.1, 1.0, 1.0).is_err());
        assert!(MixPolicy::new(0.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn inflation() {
        assert_relative_eq!(mixing_inflation(0.5).unwrap(), 4.0, epsilon = 1e-15);
        assert!(mixing_inflation(1.0).is_err());
    }
}
