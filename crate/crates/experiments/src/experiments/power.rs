use gcfk_core::identification::{
    mc_power_at, noncentrality, normal_power, required_n, ObservationModel, PowerSpec,
};
use gcfk_core::mechanism::MixPolicy;
use gcfk_core::seeding::derive_seed;
use gcfk_core::{Error, Matrix, SymMatrix64, Vector64};
use rayon::prelude::*;

use crate::config::{Config, PowerContours};
use crate::output::{Cell, Table};
use crate::runner::RunError;

/// Noncentrality when a fraction `pi` of rounds are private challenges:
/// the public block is scaled by `1 − π` and the challenge term enters
/// through the mix policy.
pub fn mixed_noncentrality(
    pc: &PowerContours,
    eta: f64,
    sigma_s_sq: f64,
    sigma_c_sq: f64,
    pi: f64,
) -> Result<f64, RunError> {
    let scaled: Vec<Vec<f64>> = pc.lb.iter().map(|row| row.iter().map(|x| (1.0 - pi) * x).collect()).collect();
    let model = ObservationModel::new(
        Matrix::from_f64_rows(&scaled)?,
        SymMatrix64::identity(pc.lb.len()).scaled(sigma_s_sq),
        MixPolicy::new(pi, eta, sigma_c_sq.sqrt())?,
        Vector64::from_f64(&pc.u)?,
    )?;
    Ok(noncentrality(&model, &Vector64::from_f64(&pc.z_alt)?)?)
}

fn rounds_cell(spec: &PowerSpec, delta_sq: f64) -> Result<Cell, RunError> {
    match required_n(spec, delta_sq) {
        Ok(n) => Ok(n.into()),
        Err(Error::ZeroNoncentrality(_)) => Ok(Cell::Empty),
        Err(e) => Err(e.into()),
    }
}

fn contour(
    name: &str,
    noise: &str,
    pc: &PowerContours,
    eta: f64,
    noise_grid: &[f64],
    delta: impl Fn(f64, f64) -> Result<f64, RunError> + Sync,
) -> Result<Table, RunError> {
    let spec = PowerSpec::new(pc.significance, pc.power, None)?;
    let mut t = Table::new(
        name,
        &format!("required rounds; empty when the alternative is undetectable (eta {eta})"),
        &[noise, "pi", "delta_sq", "required_n"],
    );
    let pis = pc.pi.values();
    let rows: Vec<Vec<Vec<Cell>>> = noise_grid
        .par_iter()
        .map(|&s| -> Result<_, RunError> {
            pis.iter()
                .map(|&pi| {
                    let d = delta(s, pi)?;
                    Ok(vec![s.into(), pi.into(), d.into(), rounds_cell(&spec, d)?])
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    for r in rows.into_iter().flatten() {
        t.push(r);
    }
    Ok(t)
}

pub fn power_contours(cfg: &Config, seed: u64) -> Result<Vec<Table>, RunError> {
    let pc = &cfg.power_contours;
    let eta = cfg.mix.eta;
    let by_signal = contour("rounds_by_signal_noise", "sigma_s_sq", pc, eta, &pc.sigma_s_sq.values(), |s, pi| {
        mixed_noncentrality(pc, eta, s, pc.base_sigma_c_sq, pi)
    })?;
    let by_challenge =
        contour("rounds_by_challenge_noise", "sigma_c_sq", pc, eta, &pc.sigma_c_sq.values(), |c, pi| {
            mixed_noncentrality(pc, eta, pc.base_sigma_s_sq, c, pi)
        })?;

    let delta_sq = mixed_noncentrality(pc, eta, pc.base_sigma_s_sq, pc.base_sigma_c_sq, cfg.mix.pi)?;
    let mut mc = Table::new(
        "power_curve",
        &format!("normal-theory and simulated power at pi {} (delta_sq {delta_sq:?})", cfg.mix.pi),
        &["n", "normal_power", "mc_power", "mc_std_error"],
    );
    let rows: Vec<Vec<Cell>> = (1..=pc.mc_max_n)
        .into_par_iter()
        .map(|n| -> Result<_, RunError> {
            let est = mc_power_at(pc.significance, delta_sq, n, pc.mc_reps, derive_seed(seed, n as u64))?;
            Ok(vec![
                n.into(),
                normal_power(pc.significance, delta_sq, n)?.into(),
                est.power.into(),
                est.std_error.into(),
            ])
        })
        .collect::<Result<_, _>>()?;
    for r in rows {
        mc.push(r);
    }
    Ok(vec![by_signal, by_challenge, mc])
}
