use gcfk_core::retention::{
    fixed_points, map_derivative, retention_map, simulate, sweep, RetentionModel, SweepParameter,
    SweepTable,
};
use rayon::prelude::*;

use crate::config::{Config, Grid};
use crate::output::{Cell, Table};
use crate::runner::RunError;

pub fn dynamics_trajectories(cfg: &Config) -> Result<Vec<Table>, RunError> {
    let dt = &cfg.dynamics_trajectories;
    let model = dt.model.build()?;

    let mut map = Table::new("retention_map", "T(p) on a uniform grid", &["p", "t_of_p", "derivative"]);
    for p in Grid::new(0.0, 1.0, dt.map_points).values() {
        map.push(vec![p.into(), retention_map(&model, p).into(), map_derivative(&model, p).into()]);
    }

    let mut fixed = Table::new("fixed_points", "", &["p_star", "derivative", "stability"]);
    for f in fixed_points(&model) {
        fixed.push(vec![f.p_star.into(), f.derivative.into(), f.stability.as_str().into()]);
    }

    let mut traj = Table::new(
        "trajectories",
        "delay 1 iterates p_{t+1} = T(p_{t-1})",
        &["delay", "p0", "t", "p"],
    );
    for &delay in &dt.delays {
        let paths: Vec<Vec<f64>> = dt
            .p0
            .par_iter()
            .map(|&p0| simulate(&model, p0, dt.steps, delay))
            .collect::<Result<_, _>>()?;
        for (&p0, path) in dt.p0.iter().zip(paths) {
            for (t, p) in path.into_iter().enumerate() {
                traj.push(vec![delay.into(), p0.into(), t.into(), p.into()]);
            }
        }
    }
    Ok(vec![map, fixed, traj])
}

fn sweep_table(name: &str, comment: &str, table: &SweepTable) -> (Table, Vec<Vec<Cell>>) {
    let mut out = Table::new(name, comment, &[table.parameter.name(), "count", "p_low", "p_dom", "p_high"]);
    for row in &table.rows {
        let eq = row.equilibria();
        out.push(vec![row.value.into(), row.count().into(), eq.p_low.into(), eq.p_dom.into(), eq.p_high.into()]);
    }
    let transitions = table
        .transitions
        .iter()
        .map(|t| {
            vec![
                table.parameter.name().into(),
                t.lower.into(),
                t.upper.into(),
                t.from_count.into(),
                t.to_count.into(),
            ]
        })
        .collect();
    (out, transitions)
}

pub fn exit_fixedpoint_sweeps(cfg: &Config) -> Result<Vec<Table>, RunError> {
    let ex = &cfg.exit_fixedpoint_sweeps;
    let shifted = ex.shifted_model.build()?;
    let symmetric = ex.symmetric_model.build()?;
    let capped_base = RetentionModel { alpha: ex.cap_sweep_alpha, ..shifted };
    capped_base.validate()?;

    let jobs: [(&str, &str, RetentionModel, SweepParameter, Vec<f64>); 4] = [
        ("sweep_alpha", "sanction strength with b0 held fixed", shifted, SweepParameter::Alpha, ex.alpha.values()),
        ("sweep_sigma", "noise scale around the symmetric curve", symmetric, SweepParameter::Sigma, ex.sigma.values()),
        ("sweep_mu", "outside-option mean around the symmetric curve", symmetric, SweepParameter::Mu, ex.mu.values()),
        ("sweep_alpha_cap", "sanction cap below the nominal strength", capped_base, SweepParameter::AlphaCap, ex.alpha_cap.values()),
    ];
    let sweeps: Vec<SweepTable> = jobs
        .par_iter()
        .map(|(_, _, base, param, grid)| sweep(base, *param, grid))
        .collect::<Result<_, _>>()?;

    let mut tables = Vec::with_capacity(jobs.len() + 1);
    let mut transitions = Table::new(
        "transitions",
        "grid intervals where the number of fixed points changes",
        &["parameter", "lower", "upper", "from_count", "to_count"],
    );
    for ((name, comment, ..), s) in jobs.iter().zip(&sweeps) {
        let (t, rows) = sweep_table(name, comment, s);
        tables.push(t);
        for r in rows {
            transitions.push(r);
        }
    }
    tables.push(transitions);
    Ok(tables)
}
