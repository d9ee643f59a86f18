//! One function per experiment. Each returns its tables in a fixed order;
//! randomness is drawn from streams derived from the run seed.

mod audit;
mod coalitions;
mod dynamics;
mod power;
mod statics;

pub use audit::{bench_instance, random_instance};
pub use power::mixed_noncentrality;

use crate::config::{Config, ExperimentId};
use crate::output::Table;
use crate::runner::RunError;

pub fn run(id: ExperimentId, cfg: &Config, seed: u64) -> Result<Vec<Table>, RunError> {
    match id {
        ExperimentId::StaticThreshold => statics::static_threshold(cfg),
        ExperimentId::AlphaMinContour => statics::alpha_min_contour(cfg),
        ExperimentId::DynamicsTrajectories => dynamics::dynamics_trajectories(cfg),
        ExperimentId::ExitFixedpointSweeps => dynamics::exit_fixedpoint_sweeps(cfg),
        ExperimentId::CoalitionBoundary => coalitions::coalition_boundary(cfg),
        ExperimentId::CoalitionHeatmap => coalitions::coalition_heatmap(cfg, seed),
        ExperimentId::MechanismGrid => statics::mechanism_grid(cfg, seed),
        ExperimentId::PowerContours => power::power_contours(cfg, seed),
        ExperimentId::AuditGreedyBench => audit::audit_greedy_bench(cfg, seed),
    }
}
