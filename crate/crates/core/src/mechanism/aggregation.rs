//! Order-statistic aggregators, their finite-attack sensitivity, Monte Carlo
//! variance under contamination, and the variance/sensitivity frontier.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::seeding::{derive_seed, rng};

#[derive(Clone, Debug, PartialEq)]
pub enum AggregatorSpec {
    Mean,
    Median,
    /// Drops the `k` smallest and `k` largest signals.
    Trimmed { k: usize },
    /// Fixed weights on the sorted signals.
    SortedWeighted { weights: Vec<f64> },
}

impl AggregatorSpec {
    pub fn sorted_weighted(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("weights", "must be nonempty"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("weights", "must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("weights", format!("must sum to 1, got {total}")));
        }
        Ok(AggregatorSpec::SortedWeighted { weights })
    }

    /// Symmetric triangular rank profile `w_i ∝ min(i+1, n−i)`.
    pub fn triangular(n: usize) -> Self {
        let raw: Vec<f64> = (0..n).map(|i| (i + 1).min(n - i) as f64).collect();
        let total: f64 = raw.iter().sum();
        AggregatorSpec::SortedWeighted { weights: raw.iter().map(|w| w / total).collect() }
    }

    pub fn label(&self) -> String {
        match self {
            AggregatorSpec::Mean => "mean".into(),
            AggregatorSpec::Median => "median".into(),
            AggregatorSpec::Trimmed { k } => format!("trimmed_k{k}"),
            AggregatorSpec::SortedWeighted { .. } => "sorted_weighted".into(),
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::invalid("signals", "need at least one signal"));
        }
        match self {
            AggregatorSpec::Trimmed { k } if 2 * k >= n => Err(Error::TrimTooLarge { k: *k, n }),
            AggregatorSpec::SortedWeighted { weights } if weights.len() != n => {
                Err(Error::WeightDimensionMismatch { weights: weights.len(), n })
            }
            _ => Ok(()),
        }
    }

    /// Weights the aggregator places on the sorted signals.
    pub fn rank_weights(&self, n: usize) -> Result<Vec<f64>> {
        self.check(n)?;
        let mut w = vec![0.0; n];
        match self {
            AggregatorSpec::Mean => w.iter_mut().for_each(|x| *x = 1.0 / n as f64),
            AggregatorSpec::Median => {
                if n % 2 == 1 {
                    w[n / 2] = 1.0;
                } else {
                    w[n / 2 - 1] = 0.5;
                    w[n / 2] = 0.5;
                }
            }
            AggregatorSpec::Trimmed { k } => {
                let kept = (n - 2 * k) as f64;
                w[*k..n - k].iter_mut().for_each(|x| *x = 1.0 / kept);
            }
            AggregatorSpec::SortedWeighted { weights } => w.copy_from_slice(weights),
        }
        Ok(w)
    }
}

pub fn aggregate(spec: &AggregatorSpec, signals: &[f64]) -> Result<f64> {
    let n = signals.len();
    spec.check(n)?;
    if signals.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("signals"));
    }
    if let AggregatorSpec::Mean = spec {
        return Ok(signals.iter().sum::<f64>() / n as f64);
    }
    let mut sorted = signals.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(match spec {
        AggregatorSpec::Mean => unreachable!(),
        AggregatorSpec::Median => {
            if n % 2 == 1 {
                sorted[n / 2]
            } else {
                0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
            }
        }
        AggregatorSpec::Trimmed { k } => {
            let kept = &sorted[*k..n - k];
            kept.iter().sum::<f64>() / kept.len() as f64
        }
        AggregatorSpec::SortedWeighted { weights } => sorted.iter().zip(weights).map(|(x, w)| x * w).sum(),
    })
}

/// Effective sample size `1/Σω²` of the rank weights.
pub fn n_eff(spec: &AggregatorSpec, n: usize) -> Result<f64> {
    let w = spec.rank_weights(n)?;
    Ok(1.0 / w.iter().map(|x| x * x).sum::<f64>())
}

/// Infinitesimal sensitivity `sup_{‖z‖₂≤1} |∇A·z| = ‖ω‖₂`. Kept as a
/// diagnostic; it ranks the median as more sensitive than the mean.
pub fn gradient_sensitivity(spec: &AggregatorSpec, n: usize) -> Result<f64> {
    let w = spec.rank_weights(n)?;
    Ok(w.iter().map(|x| x * x).sum::<f64>().sqrt())
}

/// Required-sample inflation `n/n_eff` from the aggregator's variance.
pub fn aggregator_inflation(spec: &AggregatorSpec, n: usize) -> Result<f64> {
    Ok(n as f64 / n_eff(spec, n)?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContaminationModel {
    pub rho: f64,
    pub sigma_s: f64,
    pub attack_magnitude: f64,
}

impl ContaminationModel {
    pub fn new(rho: f64, sigma_s: f64, attack_magnitude: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&rho) {
            return Err(Error::invalid("rho", format!("must lie in [0, 0.5), got {rho}")));
        }
        if !(sigma_s > 0.0) || !sigma_s.is_finite() {
            return Err(Error::invalid("sigma_s", format!("must be positive, got {sigma_s}")));
        }
        if !(attack_magnitude > 0.0) || !attack_magnitude.is_finite() {
            return Err(Error::invalid("attack_magnitude", format!("must be positive, got {attack_magnitude}")));
        }
        Ok(ContaminationModel { rho, sigma_s, attack_magnitude })
    }

    /// Attack at ten noise standard deviations.
    pub fn with_default_attack(rho: f64, sigma_s: f64) -> Result<Self> {
        Self::new(rho, sigma_s, 10.0 * sigma_s)
    }

    /// `⌈ρn⌉`, robust to the representation error in `ρn`.
    pub fn corrupted_count(&self, n: usize) -> usize {
        let raw = self.rho * n as f64;
        ((raw - 1e-9 * raw.max(1.0)).ceil().max(0.0) as usize).min(n)
    }
}

/// Honest signals the attacker perturbs in the sensitivity search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Baseline {
    #[default]
    Zero,
    /// `N(0, σ_s²)` draws from the supplied seed.
    Gaussian,
}

/// Largest `|A(x′) − A(x)|` when `⌈ρn⌉` coordinates of the baseline `x` are
/// replaced by `±attack_magnitude`. Exhaustive over targets and signs for up
/// to three corruptions, greedy beyond.
pub fn empirical_sensitivity(
    spec: &AggregatorSpec,
    n: usize,
    attack: &ContaminationModel,
    baseline: Baseline,
    seed: u64,
) -> Result<f64> {
    if n < 3 {
        return Err(Error::invalid("n", format!("sensitivity needs n >= 3, got {n}")));
    }
    spec.check(n)?;
    let base: Vec<f64> = match baseline {
        Baseline::Zero => vec![0.0; n],
        Baseline::Gaussian => {
            let normal = Normal::new(0.0, attack.sigma_s).expect("validated sigma");
            let mut g = rng(seed);
            (0..n).map(|_| normal.sample(&mut g)).collect()
        }
    };
    let k = attack.corrupted_count(n);
    if k == 0 {
        return Ok(0.0);
    }
    let a0 = aggregate(spec, &base)?;
    let a = attack.attack_magnitude;
    let mut work = base.clone();
    let mut best = 0.0f64;
    if k <= 3 {
        let mut targets: Vec<usize> = (0..k).collect();
        loop {
            for signs in 0u32..(1 << k) {
                for (bit, &t) in targets.iter().enumerate() {
                    work[t] = if signs >> bit & 1 == 0 { a } else { -a };
                }
                best = best.max((aggregate(spec, &work)? - a0).abs());
            }
            for &t in &targets {
                work[t] = base[t];
            }
            if !next_combination(&mut targets, n) {
                break;
            }
        }
    } else {
        let mut used = vec![false; n];
        for _ in 0..k {
            let mut pick: Option<(usize, f64, f64)> = None;
            for i in (0..n).filter(|&i| !used[i]) {
                for v in [a, -a] {
                    let old = work[i];
                    work[i] = v;
                    let shift = (aggregate(spec, &work)? - a0).abs();
                    work[i] = old;
                    if pick.map_or(true, |(_, _, s)| shift > s) {
                        pick = Some((i, v, shift));
                    }
                }
            }
            let (i, v, shift) = pick.expect("k <= n leaves a free coordinate");
            used[i] = true;
            work[i] = v;
            best = best.max(shift);
        }
    }
    Ok(best)
}

/// Advances `c` to the next `k`-subset of `0..n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarianceEstimate {
    pub variance: f64,
    /// Standard error of `variance` from the sample fourth moment.
    pub std_error: f64,
    pub reps: usize,
}

/// Monte Carlo variance of the aggregate of `n` signals drawn from
/// `N(0, σ_s²)`, each independently replaced with probability `ρ` by
/// `±attack_magnitude` with a fair random sign.
pub fn variance_mc(
    spec: &AggregatorSpec,
    n: usize,
    model: &ContaminationModel,
    reps: usize,
    seed: u64,
) -> Result<VarianceEstimate> {
    if reps < 1000 {
        return Err(Error::invalid("reps", format!("need at least 1000 replicates, got {reps}")));
    }
    spec.check(n)?;
    let normal = Normal::new(0.0, model.sigma_s).expect("validated sigma");
    let mut g = rng(seed);
    let mut buf = vec![0.0; n];
    let mut values = Vec::with_capacity(reps);
    for _ in 0..reps {
        for x in buf.iter_mut() {
            *x = normal.sample(&mut g);
            if model.rho > 0.0 && g.gen::<f64>() < model.rho {
                *x = if g.gen::<bool>() { model.attack_magnitude } else { -model.attack_magnitude };
            }
        }
        values.push(aggregate(spec, &buf)?);
    }
    let m = reps as f64;
    let mean = values.iter().sum::<f64>() / m;
    let (s2, s4) = values.iter().fold((0.0, 0.0), |(a, b), v| {
        let d2 = (v - mean) * (v - mean);
        (a + d2, b + d2 * d2)
    });
    let variance = s2 / (m - 1.0);
    let m4 = s4 / m;
    let pop = s2 / m;
    Ok(VarianceEstimate { variance, std_error: ((m4 - pop * pop).max(0.0) / m).sqrt(), reps })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrontierPoint {
    pub spec: AggregatorSpec,
    pub variance: f64,
    pub variance_std_error: f64,
    /// Finite-attack sensitivity at the zero baseline.
    pub sensitivity: f64,
    pub gradient_sensitivity: f64,
    pub n_eff: f64,
}

/// Every candidate's (variance, sensitivity); candidate `i` uses the stream
/// derived from `(seed, i)`.
pub fn evaluate_aggregators(
    candidates: &[AggregatorSpec],
    n: usize,
    model: &ContaminationModel,
    reps: usize,
    seed: u64,
) -> Result<Vec<FrontierPoint>> {
    candidates
        .par_iter()
        .enumerate()
        .map(|(i, spec)| {
            let s = derive_seed(seed, i as u64);
            let v = variance_mc(spec, n, model, reps, s)?;
            Ok(FrontierPoint {
                spec: spec.clone(),
                variance: v.variance,
                variance_std_error: v.std_error,
                sensitivity: empirical_sensitivity(spec, n, model, Baseline::Zero, s)?,
                gradient_sensitivity: gradient_sensitivity(spec, n)?,
                n_eff: n_eff(spec, n)?,
            })
        })
        .collect()
}

/// `b` is at least as good as `a` in both coordinates and strictly better in one.
pub fn dominates(b: (f64, f64), a: (f64, f64)) -> bool {
    b.0 <= a.0 && b.1 <= a.1 && (b.0 < a.0 || b.1 < a.1)
}

/// Non-dominated subset (lower variance and lower sensitivity are better),
/// sorted by variance then sensitivity.
pub fn pareto_frontier(
    candidates: &[AggregatorSpec],
    n: usize,
    model: &ContaminationModel,
    reps: usize,
    seed: u64,
) -> Result<Vec<FrontierPoint>> {
    if candidates.is_empty() {
        return Err(Error::invalid("candidates", "must be nonempty"));
    }
    let all = evaluate_aggregators(candidates, n, model, reps, seed)?;
    Ok(non_dominated(&all))
}

pub fn non_dominated(points: &[FrontierPoint]) -> Vec<FrontierPoint> {
    let key = |p: &FrontierPoint| (p.variance, p.sensitivity);
    let mut front: Vec<FrontierPoint> = points
        .iter()
        .filter(|p| !points.iter().any(|o| dominates(key(o), key(p))))
        .cloned()
        .collect();
    front.sort_by(|a, b| a.variance.total_cmp(&b.variance).then(a.sensitivity.total_cmp(&b.sensitivity)));
    front
}
