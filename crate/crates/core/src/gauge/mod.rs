//! Monte Carlo SO(N) lattice gauge theory on a finite box with free boundary.

mod config;
mod lattice_box;
mod metropolis;
mod run;
mod stats;

pub use config::{group_defect, haar_sample, reorthogonalize, GaugeConfig, Matrix};
pub use lattice_box::{BoxShape, EdgeRef, LatticeBox};
pub use metropolis::{metropolis_sweep, tune_step_size, Metropolis};
pub use run::{
    chain_rng, estimate_phi, expansion_comparison, master_equation_residual, run_chains, ChainReport,
    CompiledSequence, ExpansionError, ExpansionReport, ExpansionRow, MasterEquationEstimate, McParams,
    McRun, PhiEstimate,
};
pub use stats::{integrated_autocorrelation, MCEstimate};
