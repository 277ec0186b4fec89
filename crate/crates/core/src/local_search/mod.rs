//! Hill climbing on schedules: node moves ([`hc_improve`]) and
//! communication retiming ([`hccs_improve`]).

mod hc;
mod hccs;
mod table;

pub use hc::{hc_improve, hc_improve_with, HcConfig, HcOutcome};
pub use hccs::{hccs_improve, hccs_improve_with, HccsOutcome};
pub(crate) use hccs::transfer_windows;
