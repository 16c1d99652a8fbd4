//! Dense linear-algebra kernel: state-space carrier, real Schur form,
//! Lyapunov and Riccati solvers, system norms and rank tests.

pub mod dense;
pub mod lyapunov;
pub mod norms;
pub mod rank;
pub mod riccati;
pub mod schur;
mod statespace;

pub use lyapunov::{check_hurwitz, solve_lyapunov, stability_margin, LyapunovSolver, SolverReport};
pub use norms::{frequency_response, h2_norm, hinf_norm, hinf_norm_with, HinfOptions, HinfResult};
pub use rank::{controllability_rank, ControllabilityReport};
pub use riccati::{solve_care, solve_riccati};
pub use schur::{eigenvalues, spectral_abscissa, RealSchur};
pub use statespace::StateSpace;
