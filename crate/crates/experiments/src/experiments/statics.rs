//! Closed-form sweeps over a single quadratic environment.

use gcfk_core::mechanism::{
    evaluate_aggregators, mixed_index, mixing_bound, non_dominated, optimal_reward_direction, AggregatorSpec,
    ContaminationModel, MixPolicy,
};
use gcfk_core::seeding::derive_seed;
use gcfk_core::{
    alpha_min, build_sanction, index_upper_bound, manip_index, pog_report, solve_manipulation, QuadraticGame64,
    Vector64,
};
use rayon::prelude::*;

use crate::config::Config;
use crate::output::{Cell, Table};
use crate::runner::RunError;

/// Unit vector in the plane of `u` and the reward, orthogonal to `u`.
fn orthogonal_direction(game: &QuadraticGame64) -> Result<Vector64, RunError> {
    let u = game.u().normalized()?;
    let candidates = std::iter::once(game.r().clone()).chain((0..game.dim()).map(|i| Vector64::unit(game.dim(), i)));
    for c in candidates {
        let perp = c.axpy(-c.dot(&u), &u);
        if perp.norm() > 1e-8 {
            return Ok(perp.normalized()?);
        }
    }
    Err(gcfk_core::Error::ZeroWelfareGradient.into())
}

/// The configured game with its reward rotated to angle `θ` from `u`,
/// keeping `‖r‖`.
fn rotated_reward(game: &QuadraticGame64, theta_deg: f64) -> Result<QuadraticGame64, RunError> {
    let u = game.u().normalized()?;
    let v = orthogonal_direction(game)?;
    let scale = game.r().norm().max(1e-12);
    let t = theta_deg.to_radians();
    let r = u.scaled(scale * t.cos()).axpy(scale * t.sin(), &v);
    Ok(game.with_reward(r)?)
}

pub fn static_threshold(cfg: &Config) -> Result<Vec<Table>, RunError> {
    let game = cfg.game.build()?;
    let st = &cfg.static_threshold;
    let alphas = st.alpha.values();
    let mut index = Table::new(
        "index_vs_alpha",
        "index and its orthogonal-component upper bound",
        &["theta_deg", "alpha", "index", "upper_bound", "constraint_active", "bound_holds"],
    );
    let mut pog = Table::new(
        "pog_vs_alpha",
        "price of gaming with Cauchy, index and spectral bounds",
        &["theta_deg", "alpha", "pog", "pog_raw", "bound_cauchy", "bound_index", "bound_spectral"],
    );
    for &theta in &st.angles_deg {
        let g = rotated_reward(&game, theta)?;
        let rows: Vec<_> = alphas
            .par_iter()
            .map(|&a| -> Result<_, RunError> {
                let s = build_sanction(&g, a)?;
                let sol = solve_manipulation(&g, &s)?;
                let bound = index_upper_bound(&g, a)?;
                Ok((a, sol, bound, pog_report(&g, &s)?))
            })
            .collect::<Result<_, _>>()?;
        for (a, sol, bound, rep) in rows {
            index.push(vec![
                theta.into(),
                a.into(),
                sol.index_value.into(),
                bound.into(),
                sol.constraint_active.into(),
                (sol.index_value <= bound + 1e-10).into(),
            ]);
            pog.push(vec![
                theta.into(),
                a.into(),
                rep.pog_exact.into(),
                rep.pog_raw.into(),
                rep.bound_cauchy.into(),
                rep.bound_index.into(),
                rep.bound_spectral.into(),
            ]);
        }
    }
    Ok(vec![index, pog])
}

pub fn alpha_min_contour(cfg: &Config) -> Result<Vec<Table>, RunError> {
    let game = cfg.game.build()?;
    let am = &cfg.alpha_min_contour;
    let mut table = Table::new(
        "alpha_min",
        "minimum sanction for each index target; index_at_alpha_min checks the guarantee",
        &["theta_deg", "tau", "alpha_min", "index_at_alpha_min", "guarantee_holds"],
    );
    let angles = am.angle_deg.values();
    let rows: Vec<Vec<Vec<Cell>>> = angles
        .par_iter()
        .map(|&theta| -> Result<_, RunError> {
            let g = rotated_reward(&game, theta)?;
            am.tau
                .iter()
                .map(|&tau| -> Result<_, RunError> {
                    let a = alpha_min(&g, tau)?;
                    let m = manip_index(&g, a)?;
                    Ok(vec![theta.into(), tau.into(), a.into(), m.into(), (m <= tau + 1e-9).into()])
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    for row in rows.into_iter().flatten() {
        table.push(row);
    }
    Ok(vec![table])
}

fn aggregator_menu(n: usize, trims: &[usize]) -> Vec<AggregatorSpec> {
    let mut menu = vec![AggregatorSpec::Mean, AggregatorSpec::Median];
    menu.extend(trims.iter().map(|&k| AggregatorSpec::Trimmed { k }));
    menu.push(AggregatorSpec::triangular(n));
    menu
}

pub fn mechanism_grid(cfg: &Config, seed: u64) -> Result<Vec<Table>, RunError> {
    let game = cfg.game.build()?;
    let mg = &cfg.mechanism_grid;
    let scale = game.r().norm().max(1e-12);
    let aligned = game.with_reward(optimal_reward_direction(&game)?.scaled(scale))?;
    let misaligned = game.with_reward(orthogonal_direction(&game)?.scaled(scale))?;
    let base_mix = MixPolicy::new(cfg.mix.pi, cfg.mix.eta, cfg.mix.sigma_c)?;
    let alphas = mg.alpha.values();
    let pis = mg.pi.values();

    let mut grid = Table::new(
        "mechanism_grid",
        "aligned reward is proportional to Ku; misaligned reward is orthogonal to u",
        &["alignment", "alpha", "pi", "index", "pog", "mixing_bound"],
    );
    for (label, g) in [("aligned", &aligned), ("misaligned", &misaligned)] {
        let rows: Vec<Vec<Vec<Cell>>> = alphas
            .par_iter()
            .map(|&a| -> Result<_, RunError> {
                let s = build_sanction(g, a)?;
                let m0 = solve_manipulation(g, &s)?.index_value;
                pis.iter()
                    .map(|&pi| -> Result<_, RunError> {
                        let mix = base_mix.with_pi(pi)?;
                        let mixed = g.with_reward(mix.effective_reward(g.r(), g.u()))?;
                        let pog = pog_report(&mixed, &s)?.pog_exact;
                        Ok(vec![
                            label.into(),
                            a.into(),
                            pi.into(),
                            mixed_index(g, &s, &mix)?.into(),
                            pog.into(),
                            mixing_bound(g, &mix, m0)?.into(),
                        ])
                    })
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        for row in rows.into_iter().flatten() {
            grid.push(row);
        }
    }

    let mut frontier = Table::new(
        "aggregator_frontier",
        "sensitivity is the worst output shift at a zero baseline under the finite attack",
        &[
            "rho",
            "aggregator",
            "variance",
            "variance_std_error",
            "sensitivity",
            "gradient_sensitivity",
            "n_eff",
            "on_frontier",
        ],
    );
    let menu = aggregator_menu(mg.aggregator_n, &mg.trims);
    for (i, &rho) in mg.rho.iter().enumerate() {
        let model = ContaminationModel::new(rho, mg.sigma_s, mg.attack_sigmas * mg.sigma_s)?;
        let points = evaluate_aggregators(&menu, mg.aggregator_n, &model, mg.reps, derive_seed(seed, i as u64))?;
        let front = non_dominated(&points);
        for p in &points {
            frontier.push(vec![
                rho.into(),
                p.spec.label().into(),
                p.variance.into(),
                p.variance_std_error.into(),
                p.sensitivity.into(),
                p.gradient_sensitivity.into(),
                p.n_eff.into(),
                front.contains(p).into(),
            ]);
        }
    }
    Ok(vec![grid, frontier])
}
