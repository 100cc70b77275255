//! Difference and differential systems satisfied by the Lax data: residual
//! checks on families built from moments, and forward solvers (discrete
//! bootstrap in n, ODE evolution in s).

pub mod bootstrap;
pub mod continuous;
pub mod discrete;
pub mod evolve;
pub mod initial;
pub mod ode;
pub mod piii;

pub use bootstrap::{bootstrap_discrete, BootstrapStep};
pub use continuous::{fd_halving, residual_closed_continuous, residual_p_system, SStencil};
pub use discrete::{residual_closed_discrete, residual_dp_system, Reading};
pub use evolve::{evolve_from_weight, evolve_ode, EvolvedState, Trajectory};
pub use ode::OdeOptions;
pub use initial::{initial_derivatives, initial_derivatives_by, InitialDerivatives, InitialRoute};
pub use piii::{scalar_piii_residual, uniform_grid, PiiiScan};

use crate::error::Result;
use crate::lax::{compute_lax, LaxQuantities};
use crate::linalg::CMatrix;
use crate::mvop::MvopFamily;

pub const DISCRETE_SUITE: &str = "discrete";
pub const CONTINUOUS_SUITE: &str = "continuous";
pub const CLOSED_SUITE: &str = "closed";

/// Lax data for n = 0..=n_max of one family.
pub fn lax_chain(fam: &MvopFamily) -> Result<Vec<LaxQuantities>> {
    (0..=fam.n_max()).map(|n| compute_lax(fam, n)).collect()
}

pub(crate) fn inv(m: &CMatrix, context: &str) -> Result<CMatrix> {
    m.inverse_ctx(context)
}
