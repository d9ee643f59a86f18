use gcfk_core::coalition::{
    alpha_benign, classify, exact_benign_crossing, stability_heatmap, CoalitionSampler, CostSchedule,
};
use gcfk_core::{CoalitionSpec64, Error, Vector64};
use rayon::prelude::*;

use crate::config::{CoalitionSection, Config};
use crate::output::{Cell, Table};
use crate::runner::RunError;

fn spec(section: &CoalitionSection, phi: f64) -> Result<CoalitionSpec64, RunError> {
    Ok(CoalitionSpec64::new(
        Vector64::from_f64(&section.r_c)?,
        phi,
        CostSchedule::linear(section.kappa_c0)?,
        section.size,
    )?)
}

pub fn coalition_boundary(cfg: &Config) -> Result<Vec<Table>, RunError> {
    let game = cfg.game.build()?;
    let cb = &cfg.coalition_boundary;
    let alphas = cb.alpha.values();

    let mut curves = Table::new(
        "delta_u_curves",
        "coalition welfare change and net surplus along the sanction grid",
        &["phi", "alpha", "delta_u", "surplus", "class"],
    );
    for &phi in &cb.phi_curves {
        let sp = spec(&cb.coalition, phi)?;
        let rows: Vec<Vec<Cell>> = alphas
            .par_iter()
            .map(|&a| -> Result<_, RunError> {
                let v = classify(&game, &sp, a)?;
                Ok(vec![phi.into(), a.into(), v.delta_u.into(), v.surplus.into(), v.classification.as_str().into()])
            })
            .collect::<Result<_, _>>()?;
        for r in rows {
            curves.push(r);
        }
    }

    let mut benign = Table::new(
        "benign_threshold",
        "closed-form threshold (empty when the coalition reward is not aligned) and bisected crossing",
        &["phi", "alpha_benign", "exact_crossing"],
    );
    let phis = cb.phi.values();
    let rows: Vec<Vec<Cell>> = phis
        .par_iter()
        .map(|&phi| -> Result<_, RunError> {
            let sp = spec(&cb.coalition, phi)?;
            let closed = match alpha_benign(&game, &sp) {
                Ok(a) => Some(a),
                Err(Error::NotAligned { .. }) => None,
                Err(e) => return Err(e.into()),
            };
            let exact = exact_benign_crossing(&game, &sp, cb.crossing_alpha_max)?;
            Ok(vec![phi.into(), closed.into(), exact.into()])
        })
        .collect::<Result<_, _>>()?;
    for r in rows {
        benign.push(r);
    }
    Ok(vec![curves, benign])
}

pub fn coalition_heatmap(cfg: &Config, seed: u64) -> Result<Vec<Table>, RunError> {
    let game = cfg.game.build()?;
    let ch = &cfg.coalition_heatmap;
    let map = stability_heatmap(
        &game,
        &ch.alpha.values(),
        &ch.phi.values(),
        &CoalitionSampler { tilt: ch.tilt },
        ch.draws,
        seed,
    )?;
    let mut heat = Table::new(
        "cooperative_fraction",
        "share of sampled coalition directions with nonnegative welfare change; all cells share one sample",
        &["alpha", "phi", "fraction"],
    );
    for (a, row) in map.alphas.iter().zip(&map.fractions) {
        for (phi, f) in map.phis.iter().zip(row) {
            heat.push(vec![(*a).into(), (*phi).into(), (*f).into()]);
        }
    }
    let mut boundary = Table::new(
        "half_boundary",
        "smallest alpha with at least half the coalitions cooperative",
        &["phi", "alpha"],
    );
    for (phi, a) in map.phis.iter().zip(map.boundary(0.5)) {
        boundary.push(vec![(*phi).into(), a.into()]);
    }
    Ok(vec![heat, boundary])
}
