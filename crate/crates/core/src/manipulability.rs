//! Optimal manipulation under the welfare half-space `uᵀz ≤ 0`, the
//! manipulability index `ℳ(α)`, the minimum sanction for a target index, and
//! the price of gaming with its upper bounds.

use crate::error::{Error, Result};
use crate::game::{build_sanction, QuadraticGame, SanctionOperator};
use crate::linalg::Vector;
use crate::scalar::Scalar;

/// `|uᵀM_α r|` below this counts as the inactive branch.
pub const ACTIVE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct ManipulationSolution<T> {
    pub z_star: Vector<T>,
    /// KKT multiplier of the welfare constraint.
    pub multiplier: T,
    pub constraint_active: bool,
    /// `ℳ = G(z*)`
    pub index_value: T,
    /// `uᵀz*`
    pub welfare_change: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KktResiduals<T> {
    /// `‖K_α z* − (r − λ*u)‖`
    pub stationarity: T,
    /// `max(0, uᵀz*)`
    pub primal: T,
    /// `max(0, −λ*)`
    pub dual: T,
    /// `|λ* · uᵀz*|`
    pub complementarity: T,
}

impl<T: Scalar> KktResiduals<T> {
    pub fn max(&self) -> T {
        self.stationarity.max(self.primal).max(self.dual).max(self.complementarity)
    }
}

/// Closed-form maximizer of `G(z) − ½α‖P⊥z‖²` subject to `uᵀz ≤ 0`.
pub fn solve_manipulation<T: Scalar>(
    game: &QuadraticGame<T>,
    sanction: &SanctionOperator<T>,
) -> Result<ManipulationSolution<T>> {
    let half = T::lit(0.5);
    let u = game.u();
    let r = game.r();
    let mr = sanction.respond(r);
    let r_m_r = r.dot(&mr);
    let u_m_r = u.dot(&mr);
    let inactive = sanction.welfare_unconstrained || u_m_r <= T::tol(ACTIVE_TOL);
    let (z_star, multiplier, index_value) = if inactive {
        (mr, T::zero(), half * r_m_r)
    } else {
        let mu = sanction.respond(u);
        let u_m_u = u.dot(&mu);
        let lambda = u_m_r / u_m_u;
        (mr.axpy(-lambda, &mu), lambda, half * (r_m_r - u_m_r * u_m_r / u_m_u))
    };
    if !index_value.is_finite() {
        return Err(Error::NonFinite("manipulation index"));
    }
    let welfare_change = u.dot(&z_star);
    Ok(ManipulationSolution {
        z_star,
        multiplier,
        constraint_active: !inactive,
        index_value: clamp_tiny_negative(index_value),
        welfare_change,
    })
}

fn clamp_tiny_negative<T: Scalar>(x: T) -> T {
    if x < T::zero() && x > -T::tol(1e-10) {
        T::zero()
    } else {
        x
    }
}

pub fn kkt_residuals<T: Scalar>(
    game: &QuadraticGame<T>,
    sanction: &SanctionOperator<T>,
    sol: &ManipulationSolution<T>,
) -> KktResiduals<T> {
    let target = game.r().axpy(-sol.multiplier, game.u());
    let uz = game.u().dot(&sol.z_star);
    KktResiduals {
        stationarity: sanction.k_alpha.mul_vec(&sol.z_star).sub(&target).norm(),
        primal: uz.max(T::zero()),
        dual: (-sol.multiplier).max(T::zero()),
        complementarity: (sol.multiplier * uz).abs(),
    }
}

/// `ℳ(α)`
pub fn manip_index<T: Scalar>(game: &QuadraticGame<T>, alpha: T) -> Result<T> {
    let s = build_sanction(game, alpha)?;
    Ok(solve_manipulation(game, &s)?.index_value)
}

/// `‖P⊥r‖² / (2(λ⊥min(K) + α))`.
///
/// This dominates `ℳ(α)` whenever the welfare constraint binds. In the
/// inactive branch the full `½rᵀM_α r` is collected, including the component
/// of `r` along `u`, and the bound can fail (e.g. `r = −u`).
pub fn index_upper_bound<T: Scalar>(game: &QuadraticGame<T>, alpha: T) -> Result<T> {
    let s = build_sanction(game, alpha)?;
    if s.welfare_unconstrained {
        return Err(Error::ZeroWelfareGradient);
    }
    let pr = s.p_perp.mul_vec(game.r());
    let denom = T::lit(2.0) * (s.lambda_perp_min + alpha);
    if pr.norm_sq() == T::zero() {
        return Ok(T::zero());
    }
    Ok(pr.norm_sq() / denom)
}

/// Smallest sanction for which the orthogonal-gain bound drops to `τ`:
/// `max{0, ‖P⊥r‖²/(2τ) − λ⊥min(K)}`.
pub fn alpha_min<T: Scalar>(game: &QuadraticGame<T>, tau: T) -> Result<T> {
    if !(tau > T::zero()) || !tau.is_finite() {
        return Err(Error::invalid("tau", format!("must be positive and finite, got {tau}")));
    }
    let s = build_sanction(game, T::zero())?;
    if s.welfare_unconstrained {
        return Err(Error::ZeroWelfareGradient);
    }
    let pr2 = s.p_perp.quad_form(game.r());
    if pr2 <= T::zero() {
        return Ok(T::zero());
    }
    Ok((pr2 / (T::lit(2.0) * tau) - s.lambda_perp_min).max(T::zero()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PogReport<T> {
    /// `max{0, −uᵀz*}/U_hon` clipped to `[0, 1]`.
    pub pog_exact: T,
    /// Unclipped `max{0, −uᵀz*}/U_hon`.
    pub pog_raw: T,
    pub bound_cauchy: T,
    pub bound_index: T,
    pub bound_spectral: T,
    pub constraint_active: bool,
}

pub fn pog_report<T: Scalar>(game: &QuadraticGame<T>, sanction: &SanctionOperator<T>) -> Result<PogReport<T>> {
    let sol = solve_manipulation(game, sanction)?;
    let u_hon = game.u_hon();
    let u = game.u();
    let r = game.r();
    let pog_raw = if sol.constraint_active {
        T::zero()
    } else {
        (-sol.welfare_change).max(T::zero()) / u_hon
    };
    let u_m_u = sanction.m_alpha.quad_form(u);
    let r_m_r = sanction.m_alpha.quad_form(r);
    Ok(PogReport {
        pog_exact: pog_raw.max(T::zero()).min(T::one()),
        pog_raw,
        bound_cauchy: (u_m_u * r_m_r).max(T::zero()).sqrt() / u_hon,
        bound_index: (T::lit(2.0) * u_m_u * sol.index_value).max(T::zero()).sqrt() / u_hon,
        bound_spectral: u.norm() * r.norm() / (sanction.min_eigenvalue_k_alpha() * u_hon),
        constraint_active: sol.constraint_active,
    })
}
