//! Identifiability of manipulation from observed statistics, detection
//! noncentrality, required round counts and Monte Carlo power.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix, SymMatrix, Vector};
use crate::mechanism::MixPolicy;
use crate::seeding::derived_rng;

/// Default relative tolerance for the numerical nullspace.
pub const NULLSPACE_TOL: f64 = 1e-10;
/// Replicates per independently seeded Monte Carlo block.
pub const MC_BLOCK: usize = 1000;

/// Observations `y ≈ μ′ + (LB)z + ε` with `ε ~ N(0, Σ′)`, optionally mixed
/// with private challenges.
#[derive(Clone, Debug)]
pub struct ObservationModel {
    lb: Matrix<f64>,
    sigma_prime: SymMatrix<f64>,
    chol: Cholesky<f64>,
    mix: MixPolicy<f64>,
    u: Vector<f64>,
}

impl ObservationModel {
    pub fn new(lb: Matrix<f64>, sigma_prime: SymMatrix<f64>, mix: MixPolicy<f64>, u: Vector<f64>) -> Result<Self> {
        if sigma_prime.dim() != lb.rows() {
            return Err(Error::DimensionMismatch { expected: lb.rows(), found: sigma_prime.dim() });
        }
        if u.dim() != lb.cols() {
            return Err(Error::DimensionMismatch { expected: lb.cols(), found: u.dim() });
        }
        let chol = sigma_prime.cholesky().map_err(|_| Error::SingularCovariance)?;
        Ok(ObservationModel { lb, sigma_prime, chol, mix, u })
    }

    pub fn lb(&self) -> &Matrix<f64> {
        &self.lb
    }

    pub fn sigma_prime(&self) -> &SymMatrix<f64> {
        &self.sigma_prime
    }

    pub fn mix(&self) -> &MixPolicy<f64> {
        &self.mix
    }

    pub fn u(&self) -> &Vector<f64> {
        &self.u
    }

    pub fn with_mix(&self, mix: MixPolicy<f64>) -> Self {
        ObservationModel { mix, ..self.clone() }
    }

    pub fn dim(&self) -> usize {
        self.lb.cols()
    }
}

/// Orthonormal basis of `{z : ‖LBz‖ ≤ tol·‖LB‖}`.
pub fn nullspace_basis(model: &ObservationModel, tol: f64) -> Result<Vec<Vector<f64>>> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be positive"));
    }
    let (sigma, v) = model.lb.svd_right();
    let cutoff = tol * sigma.first().copied().unwrap_or(0.0);
    Ok(sigma
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cutoff)
        .map(|(j, _)| v.column(j))
        .collect())
}

/// Smallest singular value of `LB` restricted to the span of `basis`.
pub fn restricted_sigma_min(model: &ObservationModel, basis: &[Vector<f64>]) -> Result<f64> {
    if basis.is_empty() {
        return Err(Error::invalid("basis", "must contain at least one vector"));
    }
    let q = Matrix::from_columns(basis)?;
    if q.rows() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: q.rows() });
    }
    let restricted = model.lb.matmul(&q)?;
    Ok(*restricted.singular_values().last().expect("nonempty basis"))
}

/// `Δ² = (LBz)ᵀΣ′⁻¹(LBz) + πη²(uᵀz)²/σ_c²`
pub fn noncentrality(model: &ObservationModel, z_alt: &Vector<f64>) -> Result<f64> {
    let w = model.lb.mul_vec(z_alt)?;
    let direct = w.dot(&model.chol.solve(&w));
    let m = &model.mix;
    let uz = model.u.dot(z_alt);
    Ok(direct + m.pi() * m.eta() * m.eta() * uz * uz / (m.sigma_c() * m.sigma_c()))
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal quantile: rational approximation refined by Newton
/// steps on the CDF. Upper-half probabilities are mapped to the lower tail,
/// where `erfc` keeps full relative accuracy.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid("probability", format!("must lie in (0, 1), got {p}")));
    }
    if p > 0.5 {
        return Ok(-lower_quantile(1.0 - p));
    }
    Ok(lower_quantile(p))
}

fn lower_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00, 3.754408661907416e+00];
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let x = if p < 0.02425 {
        tail((-2.0 * p.ln()).sqrt())
    } else if p > 1.0 - 0.02425 {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    if x == 0.0 {
        return 0.0;
    }
    let x = x - (normal_cdf(x) - p) / normal_pdf(x);
    x - (normal_cdf(x) - p) / normal_pdf(x)
}

/// Levels of a one-sided test of `z = 0` against the alternative `z_alt`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSpec {
    pub significance: f64,
    pub power_target: f64,
    pub z_alt: Option<Vector<f64>>,
}

impl PowerSpec {
    pub fn new(significance: f64, power_target: f64, z_alt: Option<Vector<f64>>) -> Result<Self> {
        if !(significance > 0.0 && significance < 1.0) {
            return Err(Error::invalid("significance", format!("must lie in (0, 1), got {significance}")));
        }
        if !(power_target > 0.0 && power_target < 1.0) {
            return Err(Error::invalid("power_target", format!("must lie in (0, 1), got {power_target}")));
        }
        Ok(PowerSpec { significance, power_target, z_alt })
    }

    /// `z_{1−α} + z_{1−β}`
    pub fn quantile_sum(&self) -> Result<f64> {
        Ok(normal_quantile(1.0 - self.significance)? + normal_quantile(self.power_target)?)
    }
}

/// Ceiling that ignores representation error just above an integer.
fn ceil_rounds(raw: f64) -> usize {
    let c = (raw - 1e-9 * raw.abs().max(1.0)).ceil();
    c.max(1.0) as usize
}

fn check_delta_sq(delta_sq: f64) -> Result<()> {
    if !(delta_sq > 0.0) || !delta_sq.is_finite() {
        return Err(Error::ZeroNoncentrality(delta_sq));
    }
    Ok(())
}

/// Unrounded `(z_{1−α} + z_{1−β})²/Δ²`.
pub fn required_n_raw(spec: &PowerSpec, delta_sq: f64) -> Result<f64> {
    check_delta_sq(delta_sq)?;
    let s = spec.quantile_sum()?;
    Ok(s * s / delta_sq)
}

/// `⌈(z_{1−α} + z_{1−β})²/Δ²⌉`, at least one round.
pub fn required_n(spec: &PowerSpec, delta_sq: f64) -> Result<usize> {
    Ok(ceil_rounds(required_n_raw(spec, delta_sq)?))
}

/// `⌈2 ln(2/δ)/Δ²⌉` from the sub-Gaussian tail bound.
pub fn required_n_tail(delta: f64, delta_sq: f64) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("delta", format!("must lie in (0, 1), got {delta}")));
    }
    check_delta_sq(delta_sq)?;
    Ok(ceil_rounds(2.0 * (2.0 / delta).ln() / delta_sq))
}

/// Normal-theory power `Φ(√n Δ − z_{1−α})` of the one-sided test.
pub fn normal_power(significance: f64, delta_sq: f64, n: usize) -> Result<f64> {
    let z = normal_quantile(1.0 - significance)?;
    Ok(normal_cdf((n as f64).sqrt() * delta_sq.max(0.0).sqrt() - z))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerEstimate {
    pub power: f64,
    pub std_error: f64,
    pub reps: usize,
}

/// Rejection rate of the standardized statistic `T_n ~ N(√n Δ, 1)` at
/// one-sided level `significance`. Replicates run in blocks of
/// [`MC_BLOCK`], block `b` seeded from `(seed, b)`.
pub fn mc_power_at(significance: f64, delta_sq: f64, n: usize, reps: usize, seed: u64) -> Result<PowerEstimate> {
    if reps < 2000 {
        return Err(Error::invalid("reps", format!("need at least 2000 replicates, got {reps}")));
    }
    if n == 0 {
        return Err(Error::invalid("n", "need at least one round"));
    }
    if !(delta_sq >= 0.0) {
        return Err(Error::invalid("delta_sq", "must be nonnegative"));
    }
    let crit = normal_quantile(1.0 - significance)?;
    let shift = (n as f64).sqrt() * delta_sq.sqrt();
    let blocks = reps.div_ceil(MC_BLOCK);
    let rejections: usize = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let len = MC_BLOCK.min(reps - b * MC_BLOCK);
            let mut g = derived_rng(seed, b as u64);
            (0..len)
                .filter(|_| {
                    let e: f64 = StandardNormal.sample(&mut g);
                    shift + e > crit
                })
                .count()
        })
        .sum();
    let power = rejections as f64 / reps as f64;
    Ok(PowerEstimate { power, std_error: (power * (1.0 - power) / reps as f64).sqrt(), reps })
}

/// [`mc_power_at`] with `Δ²` from the model and the spec's alternative.
pub fn mc_power(model: &ObservationModel, spec: &PowerSpec, n: usize, reps: usize, seed: u64) -> Result<PowerEstimate> {
    let z = spec.z_alt.as_ref().ok_or_else(|| Error::invalid("z_alt", "power simulation needs an alternative"))?;
    mc_power_at(spec.significance, noncentrality(model, z)?, n, reps, seed)
}

/// Rounds to test `ℳ ≥ τ` against `ℳ < τ`:
/// `(z_{1−α}+z_{1−β})² σ²/(τ−μ)²`, times the aggregator (`n/n_eff`) and
/// mixing (`(1−π)⁻²`) inflation factors.
pub fn required_n_index_test(
    spec: &PowerSpec,
    sigma_m: f64,
    effect: f64,
    aggregator_inflation: f64,
    mixing_inflation: f64,
) -> Result<usize> {
    if !(effect != 0.0) || !effect.is_finite() {
        return Err(Error::invalid("effect", "effect size τ − μ must be nonzero"));
    }
    if !(sigma_m > 0.0) || !(aggregator_inflation >= 1.0 - 1e-12) || !(mixing_inflation >= 1.0) {
        return Err(Error::invalid("inflation", "sigma must be positive and inflation factors at least 1"));
    }
    let s = spec.quantile_sum()?;
    Ok(ceil_rounds(s * s * sigma_m * sigma_m / (effect * effect) * aggregator_inflation * mixing_inflation))
}

/// Rounds for a two-sided confidence interval of half-width `h`:
/// `z_{1−α/2}² σ²/h²`.
pub fn required_n_interval(significance: f64, sigma_m: f64, half_width: f64) -> Result<usize> {
    if !(half_width > 0.0) || !(sigma_m > 0.0) {
        return Err(Error::invalid("half_width", "half-width and sigma must be positive"));
    }
    let z = normal_quantile(1.0 - significance / 2.0)?;
    Ok(ceil_rounds(z * z * sigma_m * sigma_m / (half_width * half_width)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn model(lb: &[Vec<f64>], pi: f64) -> ObservationModel {
        let lb = Matrix::from_f64_rows(lb).unwrap();
        let cov = SymMatrix::identity(lb.rows());
        let u = Vector::unit(lb.cols(), 0);
        ObservationModel::new(lb, cov, MixPolicy::new(pi, 1.0, 1.0).unwrap(), u).unwrap()
    }

    fn v(x: &[f64]) -> Vector<f64> {
        Vector::from_f64(x).unwrap()
    }

    #[test]
    fn nullspace_examples() {
        let b = nullspace_basis(&model(&[vec![1.0, 0.0], vec![0.0, 0.0]], 0.0), NULLSPACE_TOL).unwrap();
        assert_eq!(b.len(), 1);
        assert!((b[0][1].abs() - 1.0).abs() < 1e-15 && b[0][0].abs() < 1e-15);
        assert!(nullspace_basis(&model(&[vec![2.0, 1.0], vec![0.0, 1.0]], 0.0), NULLSPACE_TOL).unwrap().is_empty());
        assert_eq!(nullspace_basis(&model(&[vec![0.0; 3], vec![0.0; 3]], 0.0), NULLSPACE_TOL).unwrap().len(), 3);
    }

    #[test]
    fn restricted_sigma_examples() {
        let id = model(&[vec![1.0, 0.0], vec![0.0, 1.0]], 0.0);
        assert_relative_eq!(restricted_sigma_min(&id, &[v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap(), 1.0, epsilon = 1e-15);
        let d = model(&[vec![3.0, 0.0], vec![0.0, 0.0]], 0.0);
        assert_relative_eq!(restricted_sigma_min(&d, &[v(&[1.0, 0.0])]).unwrap(), 3.0, epsilon = 1e-15);
    }

    #[test]
    fn noncentrality_examples() {
        let id = model(&[vec![1.0, 0.0], vec![0.0, 1.0]], 0.0);
        assert_eq!(noncentrality(&id, &v(&[1.0, 0.0])).unwrap(), 1.0);
        let blind = model(&[vec![0.0, 0.0]], 1.0);
        assert_eq!(noncentrality(&blind, &v(&[1.0, 0.0])).unwrap(), 1.0);
        for pi in [0.0, 0.5, 1.0] {
            assert_eq!(noncentrality(&model(&[vec![0.0, 0.0]], pi), &v(&[0.0, 1.0])).unwrap(), 0.0);
        }
    }

    #[test]
    fn singular_covariance_is_rejected() {
        let lb = Matrix::from_f64_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let cov = SymMatrix::diagonal(&[1.0, 0.0]);
        let err = ObservationModel::new(lb, cov, MixPolicy::none(), v(&[1.0, 0.0])).unwrap_err();
        assert_eq!(err, Error::SingularCovariance);
    }

    #[test]
    fn quantile_anchors() {
        assert_relative_eq!(normal_quantile(0.95).unwrap(), 1.6448536269514722, epsilon = 1e-10);
        assert_relative_eq!(normal_quantile(0.8).unwrap(), 0.8416212335729143, epsilon = 1e-10);
        assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
        assert!(normal_quantile(1.0).is_err());
    }

    #[test]
    fn required_n_examples() {
        let spec = PowerSpec::new(0.05, 0.8, None).unwrap();
        assert_relative_eq!(required_n_raw(&spec, 1.0).unwrap(), 6.182557, epsilon = 1e-6);
        assert_eq!(required_n(&spec, 1.0).unwrap(), 7);
        let half = PowerSpec::new(0.5, 0.5, None).unwrap();
        assert_eq!(required_n(&half, 1.0).unwrap(), 1);
        assert_eq!(required_n(&spec, 0.0), Err(Error::ZeroNoncentrality(0.0)));
    }

    #[test]
    fn tail_bound_examples() {
        assert_eq!(required_n_tail(0.05, 1.0).unwrap(), 8);
        assert_eq!(required_n_tail(0.05, 4.0).unwrap(), 2);
        let d = 2.0 / std::f64::consts::E.powi(2);
        assert_eq!(required_n_tail(d, 1.0).unwrap(), 4);
    }

    #[test]
    fn power_grows_with_rounds() {
        let a = mc_power_at(0.05, 0.25, 4, 10_000, 1).unwrap();
        let b = mc_power_at(0.05, 0.25, 16, 10_000, 1).unwrap();
        assert!(b.power > a.power);
    }

    #[test]
    fn null_power_is_size() {
        let p = mc_power_at(0.05, 0.0, 1, 20_000, 3).unwrap();
        assert!((p.power - 0.05).abs() <= 3.0 * p.std_error);
    }

    #[test]
    fn interval_and_index_rounds() {
        let spec = PowerSpec::new(0.05, 0.8, None).unwrap();
        assert_eq!(required_n_index_test(&spec, 1.0, 1.0, 1.0, 1.0).unwrap(), 7);
        assert_eq!(required_n_index_test(&spec, 1.0, 1.0, 1.0, 4.0).unwrap(), 25);
        // 1.96² ≈ 3.84
        assert_eq!(required_n_interval(0.05, 1.0, 1.0).unwrap(), 4);
    }
}
