//! Experiment configuration: TOML parsing, defaults, unknown-key policy and
//! range checks. Every section is optional; omitted keys take the defaults
//! documented in `docs/config.md`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("`{path}` out of range: {reason}")]
    Range { path: String, reason: String },
    #[error("unknown configuration keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),
    #[error("config is for experiment `{in_file}` but `{requested}` was requested")]
    ExperimentMismatch { in_file: String, requested: String },
    #[error("no seed given; pass --seed or set `seed` in the config")]
    MissingSeed,
}

fn range(path: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Range { path: path.to_string(), reason: reason.into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentId {
    StaticThreshold,
    AlphaMinContour,
    DynamicsTrajectories,
    ExitFixedpointSweeps,
    CoalitionBoundary,
    CoalitionHeatmap,
    MechanismGrid,
    PowerContours,
    AuditGreedyBench,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 9] = [
        ExperimentId::StaticThreshold,
        ExperimentId::AlphaMinContour,
        ExperimentId::DynamicsTrajectories,
        ExperimentId::ExitFixedpointSweeps,
        ExperimentId::CoalitionBoundary,
        ExperimentId::CoalitionHeatmap,
        ExperimentId::MechanismGrid,
        ExperimentId::PowerContours,
        ExperimentId::AuditGreedyBench,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentId::StaticThreshold => "static_threshold",
            ExperimentId::AlphaMinContour => "alpha_min_contour",
            ExperimentId::DynamicsTrajectories => "dynamics_trajectories",
            ExperimentId::ExitFixedpointSweeps => "exit_fixedpoint_sweeps",
            ExperimentId::CoalitionBoundary => "coalition_boundary",
            ExperimentId::CoalitionHeatmap => "coalition_heatmap",
            ExperimentId::MechanismGrid => "mechanism_grid",
            ExperimentId::PowerContours => "power_contours",
            ExperimentId::AuditGreedyBench => "audit_greedy_bench",
        }
    }

    /// What the outputs reproduce, written into every CSV comment line.
    pub fn describes(&self) -> &'static str {
        match self {
            ExperimentId::StaticThreshold => {
                "manipulability index and price of gaming versus sanction strength at several alignment angles"
            }
            ExperimentId::AlphaMinContour => "minimum sanction strength over alignment angle and index target",
            ExperimentId::DynamicsTrajectories => {
                "retention map, its fixed points, and trajectories with and without one-step delay"
            }
            ExperimentId::ExitFixedpointSweeps => {
                "fixed points of the retention map swept over sanction, noise scale, outside option and sanction cap"
            }
            ExperimentId::CoalitionBoundary => "coalition welfare change, surplus and benign threshold versus sanction",
            ExperimentId::CoalitionHeatmap => "cooperative fraction of sampled coalitions over sanction and externality",
            ExperimentId::MechanismGrid => {
                "index and price of gaming under aligned and misaligned rewards over sanction and challenge mix; aggregator frontier"
            }
            ExperimentId::PowerContours => {
                "required rounds over signal noise, challenge noise and mix ratio; simulated power curve"
            }
            ExperimentId::AuditGreedyBench => {
                "lazy greedy audit allocation against the exhaustive optimum; Lagrangian threshold variant"
            }
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| format!("unknown experiment `{s}`"))
    }
}

/// Evenly spaced values `start, …, stop` (inclusive).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Grid {
    pub const fn new(start: f64, stop: f64, points: usize) -> Self {
        Grid { start, stop, points }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| if i + 1 == self.points { self.stop } else { self.start + step * i as f64 })
            .collect()
    }

    fn check(&self, path: &str, lo: f64, hi: f64) -> Result<(), ConfigError> {
        if self.points == 0 {
            return Err(range(&format!("{path}.points"), "need at least one point"));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(range(path, "endpoints must be finite"));
        }
        if self.points > 1 && self.stop <= self.start {
            return Err(range(path, "stop must exceed start"));
        }
        if self.start < lo || self.stop > hi {
            return Err(range(path, format!("values must lie in [{lo}, {hi}]")));
        }
        Ok(())
    }
}

fn check_in(path: &str, v: f64, lo: f64, hi: f64) -> Result<(), ConfigError> {
    if !(v >= lo && v <= hi) {
        return Err(range(path, format!("must lie in [{lo}, {hi}], got {v}")));
    }
    Ok(())
}

fn check_positive(path: &str, v: f64) -> Result<(), ConfigError> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(range(path, format!("must be positive, got {v}")));
    }
    Ok(())
}

fn check_open_unit(path: &str, v: f64) -> Result<(), ConfigError> {
    if !(v > 0.0 && v < 1.0) {
        return Err(range(path, format!("must lie in (0, 1), got {v}")));
    }
    Ok(())
}

fn check_list(path: &str, values: &[f64], lo: f64, hi: f64) -> Result<(), ConfigError> {
    if values.is_empty() {
        return Err(range(path, "must be nonempty"));
    }
    for (i, &v) in values.iter().enumerate() {
        check_in(&format!("{path}[{i}]"), v, lo, hi)?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GameSection {
    pub u: Vec<f64>,
    pub r: Vec<f64>,
    pub h: Vec<Vec<f64>>,
    pub q: f64,
    pub u_hon: f64,
}

impl Default for GameSection {
    fn default() -> Self {
        GameSection {
            u: vec![1.0, 0.0],
            r: vec![0.0, 1.0],
            h: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            q: 0.5,
            u_hon: 1.0,
        }
    }
}

impl GameSection {
    fn validate(&self) -> Result<(), ConfigError> {
        let p = self.u.len();
        if p == 0 {
            return Err(range("game.u", "must be nonempty"));
        }
        if self.r.len() != p {
            return Err(range("game.r", format!("must have length {p}")));
        }
        if self.h.len() != p || self.h.iter().any(|row| row.len() != p) {
            return Err(range("game.h", format!("must be {p}x{p}")));
        }
        check_in("game.q", self.q, 0.0, f64::MAX)?;
        check_positive("game.u_hon", self.u_hon)?;
        self.build().map(|_| ()).map_err(|e| range("game", e.to_string()))
    }

    pub fn build(&self) -> gcfk_core::Result<gcfk_core::QuadraticGame64> {
        gcfk_core::QuadraticGame64::from_f64(&self.u, &self.r, &self.h, self.q, self.u_hon)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MixSection {
    pub pi: f64,
    pub eta: f64,
    pub sigma_c: f64,
}

impl Default for MixSection {
    fn default() -> Self {
        MixSection { pi: 0.0, eta: 1.0, sigma_c: 1.0 }
    }
}

impl MixSection {
    fn validate(&self) -> Result<(), ConfigError> {
        check_in("mix.pi", self.pi, 0.0, 1.0)?;
        check_in("mix.eta", self.eta, 0.0, f64::MAX)?;
        check_positive("mix.sigma_c", self.sigma_c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StaticThreshold {
    pub angles_deg: Vec<f64>,
    pub alpha: Grid,
}

impl Default for StaticThreshold {
    fn default() -> Self {
        StaticThreshold { angles_deg: vec![0.0, 30.0, 60.0, 90.0], alpha: Grid::new(0.0, 8.0, 33) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlphaMinContour {
    pub angle_deg: Grid,
    pub tau: Vec<f64>,
}

impl Default for AlphaMinContour {
    fn default() -> Self {
        AlphaMinContour { angle_deg: Grid::new(0.0, 90.0, 91), tau: vec![0.5, 0.2, 0.1, 0.05, 0.02, 0.01] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetentionSection {
    pub b0: f64,
    pub b1: f64,
    pub alpha: f64,
    pub mu: f64,
    pub sigma: f64,
    pub alpha_cap: Option<f64>,
}

impl Default for RetentionSection {
    fn default() -> Self {
        // b₀ = α − 1.2 with α = 1 puts the symmetric center at p = 1/2.
        RetentionSection { b0: -0.2, b1: 2.4, alpha: 1.0, mu: 0.0, sigma: 0.08, alpha_cap: None }
    }
}

impl RetentionSection {
    fn validate(&self, path: &str) -> Result<(), ConfigError> {
        self.build().map(|_| ()).map_err(|e| range(path, e.to_string()))
    }

    pub fn build(&self) -> gcfk_core::Result<gcfk_core::retention::RetentionModel> {
        gcfk_core::retention::RetentionModel::new(self.b0, self.b1, self.alpha, self.mu, self.sigma, self.alpha_cap)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DynamicsTrajectories {
    pub model: RetentionSection,
    pub p0: Vec<f64>,
    pub steps: usize,
    pub delays: Vec<usize>,
    pub map_points: usize,
}

impl Default for DynamicsTrajectories {
    fn default() -> Self {
        DynamicsTrajectories {
            model: RetentionSection::default(),
            p0: vec![0.1, 0.2, 0.3, 0.4, 0.45, 0.5, 0.55, 0.6, 0.7, 0.8, 0.9],
            steps: 50,
            delays: vec![0, 1],
            map_points: 201,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExitSweeps {
    /// Base for the sanction and cap sweeps. `b₀` stays fixed so that the
    /// sanction actually moves the curve.
    pub shifted_model: RetentionSection,
    /// Base for the noise-scale and outside-option sweeps.
    pub symmetric_model: RetentionSection,
    pub alpha: Grid,
    pub sigma: Grid,
    pub mu: Grid,
    pub alpha_cap: Grid,
    pub cap_sweep_alpha: f64,
}

impl Default for ExitSweeps {
    fn default() -> Self {
        ExitSweeps {
            shifted_model: RetentionSection { b0: 1.5, alpha: 0.0, ..RetentionSection::default() },
            symmetric_model: RetentionSection::default(),
            alpha: Grid::new(1.0, 4.6, 181),
            sigma: Grid::new(0.05, 1.0, 96),
            mu: Grid::new(-1.5, 1.5, 151),
            alpha_cap: Grid::new(2.0, 4.0, 101),
            cap_sweep_alpha: 3.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoalitionSection {
    pub r_c: Vec<f64>,
    pub kappa_c0: f64,
    pub size: usize,
}

impl Default for CoalitionSection {
    fn default() -> Self {
        CoalitionSection { r_c: vec![1.0, 1.0], kappa_c0: 0.3, size: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoalitionBoundary {
    pub coalition: CoalitionSection,
    pub alpha: Grid,
    pub phi_curves: Vec<f64>,
    pub phi: Grid,
    pub crossing_alpha_max: f64,
}

impl Default for CoalitionBoundary {
    fn default() -> Self {
        CoalitionBoundary {
            coalition: CoalitionSection::default(),
            alpha: Grid::new(0.0, 5.0, 101),
            phi_curves: vec![0.0, 1.0, 2.0, 4.0, 8.0],
            phi: Grid::new(0.0, 8.0, 33),
            crossing_alpha_max: 1e3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoalitionHeatmap {
    pub alpha: Grid,
    pub phi: Grid,
    pub draws: usize,
    pub tilt: f64,
}

impl Default for CoalitionHeatmap {
    fn default() -> Self {
        CoalitionHeatmap { alpha: Grid::new(0.0, 5.0, 51), phi: Grid::new(0.0, 5.0, 51), draws: 500, tilt: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MechanismGrid {
    pub alpha: Grid,
    pub pi: Grid,
    pub aggregator_n: usize,
    pub trims: Vec<usize>,
    pub rho: Vec<f64>,
    pub sigma_s: f64,
    /// Attack magnitude in units of `sigma_s`.
    pub attack_sigmas: f64,
    pub reps: usize,
}

impl Default for MechanismGrid {
    fn default() -> Self {
        MechanismGrid {
            alpha: Grid::new(0.0, 8.0, 17),
            pi: Grid::new(0.0, 1.0, 21),
            aggregator_n: 21,
            trims: vec![1, 3, 5],
            rho: vec![0.0, 0.1, 0.2, 0.3],
            sigma_s: 1.0,
            attack_sigmas: 10.0,
            reps: 4000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PowerContours {
    pub lb: Vec<Vec<f64>>,
    pub u: Vec<f64>,
    pub z_alt: Vec<f64>,
    pub significance: f64,
    pub power: f64,
    pub sigma_s_sq: Grid,
    pub sigma_c_sq: Grid,
    pub pi: Grid,
    /// Fixed `σ_s²` for the challenge-noise panel and `σ_c²` for the
    /// signal-noise panel.
    pub base_sigma_s_sq: f64,
    pub base_sigma_c_sq: f64,
    pub mc_reps: usize,
    pub mc_max_n: usize,
}

impl Default for PowerContours {
    fn default() -> Self {
        PowerContours {
            lb: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            u: vec![1.0, 0.0],
            z_alt: vec![0.3, 0.2],
            significance: 0.05,
            power: 0.8,
            sigma_s_sq: Grid::new(0.25, 4.0, 16),
            sigma_c_sq: Grid::new(0.25, 4.0, 16),
            pi: Grid::new(0.0, 0.95, 20),
            base_sigma_s_sq: 1.0,
            base_sigma_c_sq: 1.0,
            mc_reps: 10_000,
            mc_max_n: 60,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AuditBench {
    pub instances: usize,
    pub min_candidates: usize,
    pub max_candidates: usize,
    pub max_risks: usize,
    pub budget_fraction: (f64, f64),
    pub local_search_moves: usize,
    pub instance_file: Option<PathBuf>,
    pub clients: usize,
    pub client_dim: usize,
    pub lagrangian_candidates: usize,
    pub lagrangian_budget: f64,
    /// Sanction strength applied to every client in the Lagrangian panel.
    pub lagrangian_alpha: f64,
    pub threshold: f64,
    pub ladder: Vec<f64>,
}

impl Default for AuditBench {
    fn default() -> Self {
        AuditBench {
            instances: 200,
            min_candidates: 4,
            max_candidates: 12,
            max_risks: 5,
            budget_fraction: (0.2, 0.6),
            local_search_moves: 100,
            instance_file: None,
            clients: 3,
            client_dim: 2,
            lagrangian_candidates: 8,
            lagrangian_budget: 3.0,
            lagrangian_alpha: 1.0,
            threshold: 0.08,
            ladder: gcfk_core::audit::LAMBDA_LADDER.to_vec(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub experiment: Option<ExperimentId>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub game: GameSection,
    pub mix: MixSection,
    pub static_threshold: StaticThreshold,
    pub alpha_min_contour: AlphaMinContour,
    pub dynamics_trajectories: DynamicsTrajectories,
    pub exit_fixedpoint_sweeps: ExitSweeps,
    pub coalition_boundary: CoalitionBoundary,
    pub coalition_heatmap: CoalitionHeatmap,
    pub mechanism_grid: MechanismGrid,
    pub power_contours: PowerContours,
    pub audit_greedy_bench: AuditBench,
}

impl Config {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.game.validate()?;
        self.mix.validate()?;

        let st = &self.static_threshold;
        check_list("static_threshold.angles_deg", &st.angles_deg, 0.0, 180.0)?;
        st.alpha.check("static_threshold.alpha", 0.0, f64::MAX)?;

        let am = &self.alpha_min_contour;
        am.angle_deg.check("alpha_min_contour.angle_deg", 0.0, 180.0)?;
        if am.tau.is_empty() || am.tau.iter().any(|t| !(*t > 0.0)) {
            return Err(range("alpha_min_contour.tau", "targets must be positive"));
        }

        let dt = &self.dynamics_trajectories;
        dt.model.validate("dynamics_trajectories.model")?;
        check_list("dynamics_trajectories.p0", &dt.p0, 0.0, 1.0)?;
        if dt.steps == 0 {
            return Err(range("dynamics_trajectories.steps", "must be at least 1"));
        }
        if dt.delays.is_empty() || dt.delays.iter().any(|d| *d > 1) {
            return Err(range("dynamics_trajectories.delays", "each delay must be 0 or 1"));
        }
        if dt.map_points < 2 {
            return Err(range("dynamics_trajectories.map_points", "need at least 2 points"));
        }

        let ex = &self.exit_fixedpoint_sweeps;
        ex.shifted_model.validate("exit_fixedpoint_sweeps.shifted_model")?;
        ex.symmetric_model.validate("exit_fixedpoint_sweeps.symmetric_model")?;
        ex.alpha.check("exit_fixedpoint_sweeps.alpha", 0.0, f64::MAX)?;
        ex.sigma.check("exit_fixedpoint_sweeps.sigma", f64::MIN_POSITIVE, f64::MAX)?;
        ex.mu.check("exit_fixedpoint_sweeps.mu", f64::MIN, f64::MAX)?;
        ex.alpha_cap.check("exit_fixedpoint_sweeps.alpha_cap", 0.0, f64::MAX)?;
        check_in("exit_fixedpoint_sweeps.cap_sweep_alpha", ex.cap_sweep_alpha, 0.0, f64::MAX)?;

        let cb = &self.coalition_boundary;
        if cb.coalition.r_c.len() != self.game.u.len() {
            return Err(range("coalition_boundary.coalition.r_c", "must match the game dimension"));
        }
        check_in("coalition_boundary.coalition.kappa_c0", cb.coalition.kappa_c0, 0.0, f64::MAX)?;
        if cb.coalition.size == 0 {
            return Err(range("coalition_boundary.coalition.size", "must be at least 1"));
        }
        cb.alpha.check("coalition_boundary.alpha", 0.0, f64::MAX)?;
        check_list("coalition_boundary.phi_curves", &cb.phi_curves, 0.0, f64::MAX)?;
        cb.phi.check("coalition_boundary.phi", 0.0, f64::MAX)?;
        check_positive("coalition_boundary.crossing_alpha_max", cb.crossing_alpha_max)?;

        let ch = &self.coalition_heatmap;
        ch.alpha.check("coalition_heatmap.alpha", 0.0, f64::MAX)?;
        ch.phi.check("coalition_heatmap.phi", 0.0, f64::MAX)?;
        if ch.draws < 100 {
            return Err(range("coalition_heatmap.draws", "need at least 100 draws"));
        }
        if !ch.tilt.is_finite() {
            return Err(range("coalition_heatmap.tilt", "must be finite"));
        }

        let mg = &self.mechanism_grid;
        mg.alpha.check("mechanism_grid.alpha", 0.0, f64::MAX)?;
        mg.pi.check("mechanism_grid.pi", 0.0, 1.0)?;
        if mg.aggregator_n < 3 {
            return Err(range("mechanism_grid.aggregator_n", "need at least 3 signals"));
        }
        if let Some(k) = mg.trims.iter().find(|k| 2 * **k >= mg.aggregator_n) {
            return Err(range("mechanism_grid.trims", format!("trim {k} leaves no signal")));
        }
        for (i, &r) in mg.rho.iter().enumerate() {
            if !(0.0..0.5).contains(&r) {
                return Err(range(&format!("mechanism_grid.rho[{i}]"), format!("must lie in [0, 0.5), got {r}")));
            }
        }
        check_positive("mechanism_grid.sigma_s", mg.sigma_s)?;
        check_positive("mechanism_grid.attack_sigmas", mg.attack_sigmas)?;
        if mg.reps < 1000 {
            return Err(range("mechanism_grid.reps", "need at least 1000 replicates"));
        }

        let pc = &self.power_contours;
        let p = pc.u.len();
        if p == 0 || pc.z_alt.len() != p || pc.lb.is_empty() || pc.lb.iter().any(|row| row.len() != p) {
            return Err(range("power_contours.lb", "lb rows, u and z_alt must share one dimension"));
        }
        check_open_unit("power_contours.significance", pc.significance)?;
        check_open_unit("power_contours.power", pc.power)?;
        pc.sigma_s_sq.check("power_contours.sigma_s_sq", f64::MIN_POSITIVE, f64::MAX)?;
        pc.sigma_c_sq.check("power_contours.sigma_c_sq", f64::MIN_POSITIVE, f64::MAX)?;
        pc.pi.check("power_contours.pi", 0.0, 1.0)?;
        check_positive("power_contours.base_sigma_s_sq", pc.base_sigma_s_sq)?;
        check_positive("power_contours.base_sigma_c_sq", pc.base_sigma_c_sq)?;
        if pc.mc_reps < 2000 {
            return Err(range("power_contours.mc_reps", "need at least 2000 replicates"));
        }
        if pc.mc_max_n == 0 {
            return Err(range("power_contours.mc_max_n", "must be at least 1"));
        }

        let ab = &self.audit_greedy_bench;
        if ab.min_candidates == 0 || ab.min_candidates > ab.max_candidates {
            return Err(range("audit_greedy_bench.min_candidates", "need 1 <= min_candidates <= max_candidates"));
        }
        if ab.max_candidates > gcfk_core::audit::EXHAUSTIVE_MAX {
            return Err(range(
                "audit_greedy_bench.max_candidates",
                format!("exhaustive reference is limited to {}", gcfk_core::audit::EXHAUSTIVE_MAX),
            ));
        }
        if ab.max_risks == 0 {
            return Err(range("audit_greedy_bench.max_risks", "must be at least 1"));
        }
        let (lo, hi) = ab.budget_fraction;
        if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
            return Err(range("audit_greedy_bench.budget_fraction", "need 0 < low <= high <= 1"));
        }
        if ab.clients == 0 || ab.client_dim == 0 || ab.lagrangian_candidates == 0 {
            return Err(range("audit_greedy_bench.clients", "clients, client_dim and lagrangian_candidates must be positive"));
        }
        check_positive("audit_greedy_bench.lagrangian_budget", ab.lagrangian_budget)?;
        check_in("audit_greedy_bench.lagrangian_alpha", ab.lagrangian_alpha, 0.0, f64::MAX)?;
        check_positive("audit_greedy_bench.threshold", ab.threshold)?;
        if ab.ladder.is_empty() || ab.ladder.iter().any(|l| !(*l >= 0.0)) {
            return Err(range("audit_greedy_bench.ladder", "must be nonempty and nonnegative"));
        }
        Ok(())
    }

    /// SHA-256 of the resolved configuration in canonical JSON.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(json))
    }
}

/// A validated configuration plus any warnings about ignored keys.
#[derive(Clone, Debug, PartialEq)]
pub struct Validated {
    pub config: Config,
    pub warnings: Vec<String>,
}

/// Parses, defaults and range-checks a TOML configuration. Unknown keys
/// are an error when `strict`, a warning otherwise.
pub fn validate_config(raw: &str, strict: bool) -> Result<Validated, ConfigError> {
    let de = toml::Deserializer::new(raw);
    let mut unknown = Vec::new();
    let config: Config = serde_ignored::deserialize(de, |path| unknown.push(path.to_string())).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(raw, s.start));
        ConfigError::Parse { line, column, message: e.message().to_string() }
    })?;
    if strict && !unknown.is_empty() {
        return Err(ConfigError::UnknownKeys(unknown));
    }
    config.validate()?;
    let warnings = unknown.into_iter().map(|k| format!("ignoring unknown key `{k}`")).collect();
    Ok(Validated { config, warnings })
}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let v = validate_config("", true).unwrap();
        assert_eq!(v.config, Config::default());
        assert!(v.warnings.is_empty());
    }

    #[test]
    fn pi_out_of_range_names_key() {
        let err = validate_config("[mix]\npi = 1.5\n", true).unwrap_err();
        assert!(matches!(&err, ConfigError::Range { path, .. } if path == "mix.pi"), "{err}");
    }

    #[test]
    fn unknown_key_policy() {
        let raw = "seed = 3\n[mix]\npie = 0.5\n";
        assert_eq!(validate_config(raw, true).unwrap_err(), ConfigError::UnknownKeys(vec!["mix.pie".into()]));
        let lax = validate_config(raw, false).unwrap();
        assert_eq!(lax.config.seed, Some(3));
        assert_eq!(lax.warnings.len(), 1);
    }

    #[test]
    fn parse_error_has_position() {
        let err = validate_config("seed = 1\n[mix]\npi = = 2\n", true).unwrap_err();
        match err {
            ConfigError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn grid_values_hit_endpoints() {
        let g = Grid::new(0.0, 1.0, 11);
        let v = g.values();
        assert_eq!(v.len(), 11);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[10], 1.0);
        assert_eq!(Grid::new(2.0, 2.0, 1).values(), vec![2.0]);
    }

    #[test]
    fn experiment_ids_round_trip() {
        for id in ExperimentId::ALL {
            assert_eq!(id.as_str().parse::<ExperimentId>().unwrap(), id);
        }
        let v = validate_config("experiment = \"coalition_heatmap\"", true).unwrap();
        assert_eq!(v.config.experiment, Some(ExperimentId::CoalitionHeatmap));
    }
}
