//! Closed-form calculus for metric gaming in federated evaluation.
//!
//! The static layer (linear algebra, manipulation, sanctions, mixing,
//! coalition formulas) is generic over [`Scalar`] and runs in `f32` or `f64`.
//! Stochastic and combinatorial routines (aggregator Monte Carlo, retention
//! root finding, power simulation, audit allocation) are `f64` only.

pub mod audit;
pub mod coalition;
pub mod error;
pub mod game;
pub mod identification;
pub mod linalg;
pub mod manipulability;
pub mod mechanism;
pub mod retention;
pub mod scalar;
pub mod seeding;

pub use error::{Error, Result};
pub use game::{build_sanction, min_eigenvalue, projector_perp, QuadraticGame, SanctionOperator};
pub use linalg::{Matrix, SymMatrix, Vector};
pub use manipulability::{
    alpha_min, index_upper_bound, kkt_residuals, manip_index, pog_report, solve_manipulation, KktResiduals,
    ManipulationSolution, PogReport,
};
pub use scalar::Scalar;

pub type Vector64 = Vector<f64>;
pub type Vector32 = Vector<f32>;
pub type SymMatrix64 = SymMatrix<f64>;
pub type SymMatrix32 = SymMatrix<f32>;
pub type QuadraticGame64 = QuadraticGame<f64>;
pub type QuadraticGame32 = QuadraticGame<f32>;
pub type SanctionOperator64 = SanctionOperator<f64>;
pub type SanctionOperator32 = SanctionOperator<f32>;
pub type MixPolicy64 = mechanism::MixPolicy<f64>;
pub type MixPolicy32 = mechanism::MixPolicy<f32>;
pub type CoalitionSpec64 = coalition::CoalitionSpec<f64>;
pub type CoalitionSpec32 = coalition::CoalitionSpec<f32>;
