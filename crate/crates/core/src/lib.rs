//! Capacity bounds and physical-layer network coding for the three-node
//! two-way relay channel.
//!
//! * [`capacity`]: cut-set upper bound, time split, SIC and PNC exchange rates.
//! * [`netfn`]: relay network-coding functions and exact entropy checks.
//! * [`phy`]: q-ary PAM, superposition channel, midpoint detection, PNC demap
//!   and closed-form symbol error rates.
//! * [`coding`]: linear block codes over `Z_q` and the coded PNC uplink.
//! * [`harness`]: seeded, sharded Monte Carlo sweeps and CSV/JSON output.

pub mod capacity;
pub mod cli;
pub mod coding;
pub mod error;
pub mod harness;
pub mod netfn;
pub mod packet;
pub mod phy;

pub use capacity::{BoundReport, PowerProfile, SicRateReport, SicRegime};
pub use coding::{ChainResult, CodeKind, CodeSpec, RingLinearCode};
pub use error::{Error, Result};
pub use harness::{ExperimentConfig, Mode, SweepRow};
pub use netfn::{NetFn, NetFnReport};
pub use packet::QPacket;
pub use phy::{NoiseModel, PamScheme, SumConstellation};
