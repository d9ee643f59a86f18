//! The local quadratic manipulation environment and the sanction operator
//! built on top of it.

use crate::error::{Error, Result};
use crate::linalg::{orthonormal_complement, SymMatrix, Vector};
use crate::scalar::Scalar;

/// Welfare gradients shorter than this are treated as zero.
pub const ZERO_GRADIENT_TOL: f64 = 1e-12;
/// Relative tolerance for the positive semidefinite check on `H`.
pub const PSD_REL_TOL: f64 = 1e-9;
/// Smallest eigenvalue of `K_α` accepted as positive definite.
pub const PD_FLOOR: f64 = 1e-10;

/// Quadratic environment: reward increment `G(z) = rᵀz − ½ zᵀKz` with
/// `K = H + 2qI`, and first-order welfare change `uᵀz`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticGame<T> {
    u: Vector<T>,
    r: Vector<T>,
    h: SymMatrix<T>,
    q: T,
    u_hon: T,
}

impl<T: Scalar> QuadraticGame<T> {
    pub fn new(u: Vector<T>, r: Vector<T>, h: SymMatrix<T>, q: T, u_hon: T) -> Result<Self> {
        let p = h.dim();
        for v in [&u, &r] {
            if v.dim() != p {
                return Err(Error::DimensionMismatch { expected: p, found: v.dim() });
            }
        }
        if !q.is_finite() || q < T::zero() {
            return Err(Error::invalid("q", format!("must be finite and nonnegative, got {q}")));
        }
        if !u_hon.is_finite() || u_hon <= T::zero() {
            return Err(Error::NonpositiveBaseline(u_hon.as_f64()));
        }
        let lam = h.min_eigenvalue();
        if lam < -T::lit(PSD_REL_TOL) * h.max_abs() {
            return Err(Error::NotPositiveSemidefinite { min_eigenvalue: lam.as_f64() });
        }
        Ok(QuadraticGame { u, r, h, q, u_hon })
    }

    /// Convenience constructor from plain `f64` data.
    pub fn from_f64(u: &[f64], r: &[f64], h: &[Vec<f64>], q: f64, u_hon: f64) -> Result<Self> {
        Self::new(
            Vector::from_f64(u)?,
            Vector::from_f64(r)?,
            SymMatrix::from_f64_rows(h)?,
            T::lit(q),
            T::lit(u_hon),
        )
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn u(&self) -> &Vector<T> {
        &self.u
    }

    pub fn r(&self) -> &Vector<T> {
        &self.r
    }

    pub fn h(&self) -> &SymMatrix<T> {
        &self.h
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn u_hon(&self) -> T {
        self.u_hon
    }

    /// Same environment with a different reward gradient.
    pub fn with_reward(&self, r: Vector<T>) -> Result<Self> {
        if r.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: r.dim() });
        }
        Ok(QuadraticGame { r, ..self.clone() })
    }

    pub fn with_curvature(&self, h: SymMatrix<T>, q: T) -> Result<Self> {
        Self::new(self.u.clone(), self.r.clone(), h, q, self.u_hon)
    }

    /// `K = H + 2qI`
    pub fn curvature(&self) -> SymMatrix<T> {
        self.h.shifted(T::lit(2.0) * self.q)
    }

    pub fn welfare_unconstrained(&self) -> bool {
        self.u.norm() <= T::lit(ZERO_GRADIENT_TOL)
    }

    /// Reward increment `G(z)`.
    pub fn reward_increment(&self, z: &Vector<T>) -> T {
        self.r.dot(z) - T::lit(0.5) * self.curvature().quad_form(z)
    }

    pub fn cast<U: Scalar>(&self) -> QuadraticGame<U> {
        QuadraticGame {
            u: self.u.cast(),
            r: self.r.cast(),
            h: self.h.cast(),
            q: U::lit(self.q.as_f64()),
            u_hon: U::lit(self.u_hon.as_f64()),
        }
    }
}

/// `I − uuᵀ/‖u‖²`
pub fn projector_perp<T: Scalar>(u: &Vector<T>) -> Result<SymMatrix<T>> {
    let n2 = u.norm_sq();
    if n2.sqrt() <= T::lit(ZERO_GRADIENT_TOL) {
        return Err(Error::ZeroWelfareGradient);
    }
    Ok(SymMatrix::identity(u.dim()).add_scaled(-T::one() / n2, &SymMatrix::outer(u)))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue<T: Scalar>(m: &SymMatrix<T>) -> T {
    m.min_eigenvalue()
}

/// Smallest eigenvalue of `m` restricted to `span(u)⊥`; `+∞` when the
/// complement is trivial (`p = 1`).
pub fn restricted_min_eigenvalue<T: Scalar>(m: &SymMatrix<T>, u: &Vector<T>) -> Result<T> {
    if u.dim() == 1 {
        return Ok(T::infinity());
    }
    let basis = orthonormal_complement(u)?;
    Ok(m.compress(&basis)?.min_eigenvalue())
}

/// Everything a sanction of strength `α` does to the environment.
#[derive(Clone, Debug)]
pub struct SanctionOperator<T> {
    pub alpha: T,
    pub p_perp: SymMatrix<T>,
    pub k: SymMatrix<T>,
    pub k_alpha: SymMatrix<T>,
    pub m_alpha: SymMatrix<T>,
    /// Restricted minimum eigenvalue of `K` (not `K_α`) on `span(u)⊥`.
    pub lambda_perp_min: T,
    /// `uᵀKu/‖u‖²`; `None` when `u = 0`.
    pub lambda_parallel: Option<T>,
    pub welfare_unconstrained: bool,
}

impl<T: Scalar> SanctionOperator<T> {
    /// `M_α x`
    pub fn respond(&self, x: &Vector<T>) -> Vector<T> {
        self.m_alpha.mul_vec(x)
    }

    pub fn min_eigenvalue_k_alpha(&self) -> T {
        self.k_alpha.min_eigenvalue()
    }

    /// Restricted minimum eigenvalue of `K_α`; equals `lambda_perp_min + α`.
    pub fn lambda_perp_min_alpha(&self) -> T {
        self.lambda_perp_min + self.alpha
    }
}

pub fn build_sanction<T: Scalar>(game: &QuadraticGame<T>, alpha: T) -> Result<SanctionOperator<T>> {
    if !alpha.is_finite() || alpha < T::zero() {
        return Err(Error::invalid("alpha", format!("must be finite and nonnegative, got {alpha}")));
    }
    let k = game.curvature();
    let unconstrained = game.welfare_unconstrained();
    let (p_perp, lambda_perp_min, lambda_parallel) = if unconstrained {
        (SymMatrix::zeros(game.dim()), k.min_eigenvalue(), None)
    } else {
        let u = game.u();
        (
            projector_perp(u)?,
            restricted_min_eigenvalue(&k, u)?,
            Some(k.quad_form(u) / u.norm_sq()),
        )
    };
    let k_alpha = k.add_scaled(alpha, &p_perp);
    let lam = k_alpha.min_eigenvalue();
    if lam <= T::lit(PD_FLOOR) {
        return Err(Error::SingularCurvature { min_eigenvalue: lam.as_f64() });
    }
    let m_alpha = k_alpha.cholesky()?.inverse();
    Ok(SanctionOperator {
        alpha,
        p_perp,
        k,
        k_alpha,
        m_alpha,
        lambda_perp_min,
        lambda_parallel,
        welfare_unconstrained: unconstrained,
    })
}
