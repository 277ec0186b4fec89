//! Reference schedulers: Cilk-style work stealing and the BL-EST / ETF list
//! schedulers. All produce [`ClassicalSchedule`]s; use
//! [`classical_to_bsp`](crate::classical::classical_to_bsp) to obtain BSP
//! schedules.

mod cilk;
mod list;

pub use cilk::cilk_schedule;
pub use list::{list_schedule, ListPolicy};

#[cfg(doc)]
use crate::classical::ClassicalSchedule;
