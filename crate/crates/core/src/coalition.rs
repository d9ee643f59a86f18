//! Coalition welfare effect under sanctions, the benign threshold, net
//! surplus after organizational cost, and the (α, φ) cooperative-fraction map.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{build_sanction, QuadraticGame, SanctionOperator};
use crate::linalg::Vector;
use crate::scalar::Scalar;
use crate::seeding::rng;

/// Sign tolerance for the classification quadrants.
pub const SIGN_TOL: f64 = 1e-10;

/// Organizational cost `κ(m)` of running a coalition of size `m`.
#[derive(Clone, Debug, PartialEq)]
pub enum CostSchedule<T> {
    /// `κ(m) = c₀(m − 1)`
    Linear { c0: T },
    /// `κ(m) = table[m − 1]`, nondecreasing.
    Table(Vec<T>),
}

impl<T: Scalar> CostSchedule<T> {
    pub fn linear(c0: T) -> Result<Self> {
        if !(c0 >= T::zero()) || !c0.is_finite() {
            return Err(Error::invalid("c0", format!("must be nonnegative, got {c0}")));
        }
        Ok(CostSchedule::Linear { c0 })
    }

    pub fn table(values: Vec<T>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !(*v >= T::zero()) || !v.is_finite()) {
            return Err(Error::invalid("kappa", "table must be nonempty, finite and nonnegative"));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("kappa", "table must be nondecreasing in coalition size"));
        }
        Ok(CostSchedule::Table(values))
    }

    pub fn cost(&self, size: usize) -> Result<T> {
        match self {
            CostSchedule::Linear { c0 } => Ok(*c0 * T::lit(size.saturating_sub(1) as f64)),
            CostSchedule::Table(v) => v
                .get(size.wrapping_sub(1))
                .copied()
                .ok_or(Error::IndexOutOfRange { index: size, len: v.len() }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoalitionSpec<T> {
    pub r_c: Vector<T>,
    pub phi: T,
    pub kappa: CostSchedule<T>,
    pub size: usize,
}

impl<T: Scalar> CoalitionSpec<T> {
    pub fn new(r_c: Vector<T>, phi: T, kappa: CostSchedule<T>, size: usize) -> Result<Self> {
        if !(phi >= T::zero()) || !phi.is_finite() {
            return Err(Error::invalid("phi", format!("must be nonnegative, got {phi}")));
        }
        if size == 0 {
            return Err(Error::invalid("size", "must be at least 1"));
        }
        kappa.cost(size)?;
        Ok(CoalitionSpec { r_c, phi, kappa, size })
    }
}

fn check_dim<T: Scalar>(game: &QuadraticGame<T>, spec: &CoalitionSpec<T>) -> Result<()> {
    if spec.r_c.dim() != game.dim() {
        return Err(Error::DimensionMismatch { expected: game.dim(), found: spec.r_c.dim() });
    }
    Ok(())
}

fn delta_u_with<T: Scalar>(game: &QuadraticGame<T>, s: &SanctionOperator<T>, spec: &CoalitionSpec<T>) -> T {
    let z = s.respond(&spec.r_c);
    game.u().dot(&z) - spec.phi * s.p_perp.mul_vec(&z).norm_sq()
}

/// `ΔU(α) = uᵀM_α r_C − φ‖P⊥M_α r_C‖²`
pub fn coalition_delta_u<T: Scalar>(game: &QuadraticGame<T>, spec: &CoalitionSpec<T>, alpha: T) -> Result<T> {
    check_dim(game, spec)?;
    let s = build_sanction(game, alpha)?;
    Ok(delta_u_with(game, &s, spec))
}

/// `max{0, √(φ λ∥ ‖P⊥r_C‖² / uᵀr_C) − λ⊥min}`
pub fn alpha_benign<T: Scalar>(game: &QuadraticGame<T>, spec: &CoalitionSpec<T>) -> Result<T> {
    check_dim(game, spec)?;
    let s = build_sanction(game, T::zero())?;
    let lam_par = s.lambda_parallel.ok_or(Error::ZeroWelfareGradient)?;
    let align = game.u().dot(&spec.r_c);
    if align <= T::zero() {
        return Err(Error::NotAligned { alignment: align.as_f64() });
    }
    let perp = s.p_perp.quad_form(&spec.r_c);
    if perp <= T::zero() || spec.phi == T::zero() {
        return Ok(T::zero());
    }
    Ok(((spec.phi * lam_par * perp / align).sqrt() - s.lambda_perp_min).max(T::zero()))
}

/// Smallest `α ≥ 0` past which `ΔU` stays nonnegative, found by bracketing
/// and bisection. `None` if no crossing below `alpha_max`.
pub fn exact_benign_crossing<T: Scalar>(game: &QuadraticGame<T>, spec: &CoalitionSpec<T>, alpha_max: T) -> Result<Option<T>> {
    let f = |a: T| coalition_delta_u(game, spec, a);
    if f(T::zero())? >= T::zero() {
        return Ok(Some(T::zero()));
    }
    let mut lo = T::zero();
    let mut hi = T::one();
    while f(hi)? < T::zero() {
        lo = hi;
        hi = hi * T::lit(2.0);
        if hi > alpha_max {
            if f(alpha_max)? < T::zero() {
                return Ok(None);
            }
            hi = alpha_max;
            break;
        }
    }
    for _ in 0..200 {
        let mid = T::lit(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(hi))
}

/// `S_C(α) = ½ r_Cᵀ M_α r_C − κ(|C|)`
pub fn net_surplus<T: Scalar>(game: &QuadraticGame<T>, spec: &CoalitionSpec<T>, alpha: T) -> Result<T> {
    check_dim(game, spec)?;
    let s = build_sanction(game, alpha)?;
    Ok(T::lit(0.5) * s.m_alpha.quad_form(&spec.r_c) - spec.kappa.cost(spec.size)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoalitionClass {
    CooperativeSustainable,
    CooperativeUnsustainable,
    HarmfulSustainable,
    HarmfulUnsustainable,
}

impl CoalitionClass {
    pub fn from_signs<T: Scalar>(delta_u: T, surplus: T) -> Self {
        let cooperative = delta_u >= -T::tol(SIGN_TOL);
        let sustainable = surplus > T::tol(SIGN_TOL);
        match (cooperative, sustainable) {
            (true, true) => CoalitionClass::CooperativeSustainable,
            (true, false) => CoalitionClass::CooperativeUnsustainable,
            (false, true) => CoalitionClass::HarmfulSustainable,
            (false, false) => CoalitionClass::HarmfulUnsustainable,
        }
    }

    pub fn is_cooperative(&self) -> bool {
        matches!(self, CoalitionClass::CooperativeSustainable | CoalitionClass::CooperativeUnsustainable)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            CoalitionClass::CooperativeSustainable => "cooperative_sustainable",
            CoalitionClass::CooperativeUnsustainable => "cooperative_unsustainable",
            CoalitionClass::HarmfulSustainable => "harmful_sustainable",
            CoalitionClass::HarmfulUnsustainable => "harmful_unsustainable",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoalitionVerdict<T> {
    pub delta_u: T,
    pub surplus: T,
    pub classification: CoalitionClass,
}

pub fn classify<T: Scalar>(game: &QuadraticGame<T>, spec: &CoalitionSpec<T>, alpha: T) -> Result<CoalitionVerdict<T>> {
    check_dim(game, spec)?;
    let s = build_sanction(game, alpha)?;
    let delta_u = delta_u_with(game, &s, spec);
    let surplus = T::lit(0.5) * s.m_alpha.quad_form(&spec.r_c) - spec.kappa.cost(spec.size)?;
    Ok(CoalitionVerdict { delta_u, surplus, classification: CoalitionClass::from_signs(delta_u, surplus) })
}

/// `U_coal/U_no-coal − 1`
pub fn price_of_cooperation<T: Scalar>(u_coal: T, u_nocoal: T) -> Result<T> {
    if !(u_nocoal > T::zero()) {
        return Err(Error::NonpositiveBaseline(u_nocoal.as_f64()));
    }
    Ok(u_coal / u_nocoal - T::one())
}

/// Coalition directions `normalize(g + tilt·u/‖u‖)` with `g ~ N(0, I)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoalitionSampler {
    pub tilt: f64,
}

impl Default for CoalitionSampler {
    fn default() -> Self {
        CoalitionSampler { tilt: 1.0 }
    }
}

impl CoalitionSampler {
    pub fn draw(&self, u: &Vector<f64>, draws: usize, seed: u64) -> Result<Vec<Vector<f64>>> {
        let u_hat = if self.tilt != 0.0 { u.normalized().map_err(|_| Error::ZeroWelfareGradient)? } else { Vector::zeros(u.dim()) };
        let mut g = rng(seed);
        let mut out = Vec::with_capacity(draws);
        while out.len() < draws {
            let raw: Vec<f64> = (0..u.dim()).map(|_| StandardNormal.sample(&mut g)).collect();
            let v = Vector::new(raw)?.axpy(self.tilt, &u_hat);
            if let Ok(unit) = v.normalized() {
                out.push(unit);
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Heatmap {
    pub alphas: Vec<f64>,
    pub phis: Vec<f64>,
    /// `fractions[i][j]` is the cooperative fraction at `(alphas[i], phis[j])`.
    pub fractions: Vec<Vec<f64>>,
    pub draws: usize,
}

/// Largest backward step of a sequence that should be nondecreasing.
fn worst_drop(seq: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = seq.collect();
    v.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max)
}

impl Heatmap {
    /// Largest decrease of the fraction along increasing `α` for fixed `φ`.
    pub fn worst_alpha_drop(&self) -> f64 {
        (0..self.phis.len())
            .map(|j| worst_drop(self.fractions.iter().map(|row| row[j])))
            .fold(0.0, f64::max)
    }

    /// Largest increase of the fraction along increasing `φ` for fixed `α`.
    pub fn worst_phi_rise(&self) -> f64 {
        self.fractions.iter().map(|row| worst_drop(row.iter().map(|x| -x))).fold(0.0, f64::max)
    }

    /// Per `φ`, the smallest `α` whose cooperative fraction reaches `level`.
    pub fn boundary(&self, level: f64) -> Vec<Option<f64>> {
        (0..self.phis.len())
            .map(|j| self.alphas.iter().zip(&self.fractions).find(|(_, row)| row[j] >= level).map(|(&a, _)| a))
            .collect()
    }
}

/// Cooperative fraction `P(ΔU ≥ 0)` over sampled coalition directions for
/// every `(α, φ)` cell. All cells share one set of draws, so the map is
/// monotone whenever the per-draw `ΔU` is.
pub fn stability_heatmap(
    game: &QuadraticGame<f64>,
    alphas: &[f64],
    phis: &[f64],
    sampler: &CoalitionSampler,
    draws: usize,
    seed: u64,
) -> Result<Heatmap> {
    if draws < 100 {
        return Err(Error::invalid("draws", format!("need at least 100 draws, got {draws}")));
    }
    if alphas.is_empty() || phis.is_empty() {
        return Err(Error::invalid("grid", "alpha and phi grids must be nonempty"));
    }
    if let Some(&bad) = phis.iter().find(|p| !(**p >= 0.0)) {
        return Err(Error::invalid("phi", format!("must be nonnegative, got {bad}")));
    }
    let samples = sampler.draw(game.u(), draws, seed)?;
    let rows: Result<Vec<Vec<f64>>> = alphas
        .par_iter()
        .map(|&a| {
            let s = build_sanction(game, a)?;
            let parts: Vec<(f64, f64)> = samples
                .iter()
                .map(|r| {
                    let z = s.respond(r);
                    (game.u().dot(&z), s.p_perp.mul_vec(&z).norm_sq())
                })
                .collect();
            Ok(phis
                .iter()
                .map(|&phi| {
                    let ok = parts.iter().filter(|(gain, pen)| gain - phi * pen >= 0.0).count();
                    ok as f64 / draws as f64
                })
                .collect())
        })
        .collect();
    Ok(Heatmap { alphas: alphas.to_vec(), phis: phis.to_vec(), fractions: rows?, draws })
}
