//! BSP scheduling of computational DAGs under a NUMA-aware cost model.

pub mod baselines;
pub mod budget;
pub mod classical;
pub mod cost;
pub mod dag;
pub mod error;
pub mod generator;
pub mod hyperdag;
pub mod init;
pub mod local_search;
pub mod machine;
pub mod milp;
pub mod multilevel;
pub mod pipeline;
pub mod schedule;

pub use error::{Error, Result};
