//! Paperfolding sequences and their Parisi overlap distribution.
//!
//! * [`seq`] generates finite windows of the paperfolding, alternating,
//!   Thue–Morse, period-doubling and Sturmian sequences.
//! * [`overlap`] computes exact overlaps between paperfolding sequences from
//!   their choice parameters, along with the spin-flip map and tree metric.
//! * [`dist`] holds the reference overlap laws; [`sample`] the seeded
//!   Monte Carlo samplers; [`stats`] the comparison metrics.

pub mod checks;
pub mod dist;
pub mod dyadic;
pub mod error;
pub mod overlap;
pub mod sample;
pub mod seq;
pub mod stats;

pub use dist::{OverlapDistribution, OverlapKey, SturmianParams};
pub use dyadic::DyadicRational;
pub use error::{Error, Result};
pub use overlap::OverlapResult;
pub use seq::{ChoiceSequence, Spin, SpinWindow};
