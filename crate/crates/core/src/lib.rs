//! Simulator and design-space explorer for SRAM compute-in-memory
//! accelerator dataflows.

pub mod cli;
pub mod cost_model;
pub mod design_space;
pub mod dse;
pub mod error;
pub mod macro_model;
pub mod scheduler;
pub mod workload;

pub use error::{Error, Result};
