// negated comparisons are deliberate: they reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod error;
pub mod lax;
pub mod linalg;
pub mod mvop;
pub mod quad;
pub mod report;
pub mod special_family;
pub mod suites;
pub mod systems;
pub mod specfun;
pub mod weight;

pub use error::{Error, Result};
pub use lax::{compute_lax, LaxQuantities};
pub use linalg::{BlockMatrix, CMatrix};
pub use mvop::{build_family, MvopFamily};
pub use report::ResidualReport;
pub use weight::{Weight, WeightSpec};
pub use suites::{run_suite, Suite};
