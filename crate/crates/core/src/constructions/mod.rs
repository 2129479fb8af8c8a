//! The explicit algorithmic constructions: a diagonal set, universal search
//! through certified approximations, the accelerator and instance
//! complexity.

pub mod accel;
pub mod diag;
pub mod ic;
pub mod search;
