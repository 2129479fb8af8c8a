//! Finite-horizon workbench for parameterizations of decision problems:
//! parameter spaces, minimization and gap functions, the nonuniform and
//! uniform orders, slices and cores, and the constructions that build or
//! refute optimal parameterizations, all over a step-bounded machine model.

pub mod cli;
pub mod constructions;
pub mod machines;
pub mod order;
pub mod params;
pub mod slices;
pub mod spaces;
pub mod universe;
pub mod verdict;
