//! Greedy BSP initializers. Both return schedules completed with the lazy
//! communication schedule.

mod bspg;
mod source;

pub use bspg::{bspg, BspgState};
pub use source::source_schedule;
