use std::fs;

use gcfk_core::audit::{
    exhaustive_opt, lagrangian_ladder, lazy_greedy, local_search, AuditInstance,
    ClientReinforcement, Reinforcement,
};
use gcfk_core::seeding::{derive_seed, derived_rng};
use gcfk_core::QuadraticGame64;
use rand::Rng;
use rayon::prelude::*;

use crate::config::{AuditBench, Config};
use crate::output::{Cell, Table};
use crate::runner::{io_err, RunError};

/// Random coverage instance: costs in `[0.5, 2]`, weights in `[0.1, 1]`,
/// coverage chances in `[0, 0.8]`, budget a random fraction of total cost.
pub fn random_instance<R: Rng>(
    rng: &mut R,
    candidates: usize,
    risks: usize,
    budget_fraction: (f64, f64),
) -> gcfk_core::Result<AuditInstance> {
    let costs: Vec<f64> = (0..candidates).map(|_| rng.gen_range(0.5..=2.0)).collect();
    let weights: Vec<f64> = (0..risks).map(|_| rng.gen_range(0.1..=1.0)).collect();
    let probs: Vec<Vec<f64>> =
        (0..candidates).map(|_| (0..risks).map(|_| rng.gen_range(0.0..=0.8)).collect()).collect();
    let frac = rng.gen_range(budget_fraction.0..=budget_fraction.1);
    let total: f64 = costs.iter().sum();
    // Keep at least the cheapest candidate affordable.
    let cheapest = costs.iter().copied().fold(f64::INFINITY, f64::min);
    AuditInstance::new(costs, (frac * total).max(cheapest), weights, probs)
}

/// Instance `i` of the benchmark, drawn from its own stream.
pub fn bench_instance(ab: &AuditBench, seed: u64, i: usize) -> gcfk_core::Result<AuditInstance> {
    let mut rng = derived_rng(seed, i as u64);
    let m = rng.gen_range(ab.min_candidates..=ab.max_candidates);
    let k = rng.gen_range(1..=ab.max_risks);
    random_instance(&mut rng, m, k, ab.budget_fraction)
}

fn compare(label: Cell, inst: &AuditInstance, moves: usize) -> Result<Vec<Cell>, RunError> {
    let greedy = lazy_greedy(inst)?;
    let local = local_search(inst, &greedy, moves)?;
    let opt = exhaustive_opt(inst)?;
    let ratio = if opt.objective > 0.0 { greedy.objective / opt.objective } else { 1.0 };
    Ok(vec![
        label,
        inst.num_candidates().into(),
        inst.num_risks().into(),
        inst.budget.into(),
        greedy.objective.into(),
        local.objective.into(),
        opt.objective.into(),
        ratio.into(),
        greedy.evaluations.into(),
        (greedy.selected == opt.selected).into(),
    ])
}

/// Clients with random rewards and unit curvature; candidate `i` reinforces
/// one coordinate of client `i mod clients`.
fn lagrangian_setup(ab: &AuditBench, seed: u64) -> Result<(AuditInstance, ClientReinforcement), RunError> {
    let mut rng = derived_rng(derive_seed(seed, ab.instances as u64), 0);
    let d = ab.client_dim;
    let mut u = vec![0.0; d];
    u[0] = 1.0;
    let h: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let clients = (0..ab.clients)
        .map(|_| {
            let r: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            QuadraticGame64::from_f64(&u, &r, &h, 0.5, 1.0)
        })
        .collect::<gcfk_core::Result<Vec<_>>>()?;
    let actions: Vec<Vec<Reinforcement>> = (0..ab.lagrangian_candidates)
        .map(|i| {
            vec![Reinforcement {
                client: i % ab.clients,
                coordinate: (i / ab.clients) % d,
                delta: rng.gen_range(0.5..=2.0),
            }]
        })
        .collect();
    let base = random_instance(&mut rng, ab.lagrangian_candidates, ab.max_risks, (0.5, 0.5))?;
    let inst = AuditInstance { budget: ab.lagrangian_budget, ..base }
        .with_thresholds(vec![ab.threshold; ab.clients], 0.0)?;
    inst.validate()?;
    Ok((inst, ClientReinforcement::new(clients, actions, ab.lagrangian_alpha)?))
}

pub fn audit_greedy_bench(cfg: &Config, seed: u64) -> Result<Vec<Table>, RunError> {
    let ab = &cfg.audit_greedy_bench;
    let mut bench = Table::new(
        "greedy_vs_optimum",
        "lazy cost-ratio greedy, swap local search and exhaustive optimum",
        &[
            "instance",
            "candidates",
            "risks",
            "budget",
            "greedy",
            "local_search",
            "optimum",
            "ratio",
            "greedy_evaluations",
            "greedy_is_optimal",
        ],
    );
    let rows: Vec<Vec<Cell>> = (0..ab.instances)
        .into_par_iter()
        .map(|i| compare(i.into(), &bench_instance(ab, seed, i)?, ab.local_search_moves))
        .collect::<Result<_, _>>()?;
    for r in rows {
        bench.push(r);
    }
    if let Some(path) = &ab.instance_file {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let inst = AuditInstance::parse(&text)?;
        bench.push(compare(path.display().to_string().into(), &inst, ab.local_search_moves)?);
    }

    let (inst, model) = lagrangian_setup(ab, seed)?;
    let mut ladder = Table::new(
        "lagrangian_ladder",
        &format!("per-client index target {}; best is the ladder's pick", ab.threshold),
        &["lambda", "objective", "cost_used", "violation", "max_client_index", "selected", "best"],
    );
    let best = lagrangian_ladder(&inst, &model, &ab.ladder)?;
    for &lambda in &ab.ladder {
        let r = lagrangian_ladder(&inst, &model, &[lambda])?;
        let worst = r.per_client_index.iter().copied().fold(0.0, f64::max);
        let picked: Vec<String> = r.allocation.selected.iter().map(usize::to_string).collect();
        ladder.push(vec![
            lambda.into(),
            r.allocation.objective.into(),
            r.allocation.cost_used.into(),
            r.violation.into(),
            worst.into(),
            picked.join(" ").into(),
            (lambda == best.lambda).into(),
        ]);
    }
    Ok(vec![bench, ladder])
}
