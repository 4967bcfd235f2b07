//! Linear programming: a dense bounded-variable simplex and the restricted
//! master problem built on it.

mod master;
pub mod simplex;

pub use master::{
    check_solution, solve_restricted_master, Column, LpSolution, MasterLp, MasterStatus,
    SimplexMaster,
};
pub use simplex::{LpStatus, Simplex};
