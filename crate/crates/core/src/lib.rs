//! Observer-time toolkit: stochastic-clock dephasing and quantum classes,
//! WKB tunneling with an exact transfer-matrix oracle, a gauge-invariant
//! neural-glial network model, and semiclassical mini-superspace evolution.

pub mod clock;
pub mod glianet;
pub mod minisuperspace;
pub mod numerics;
pub mod oracle;
pub mod wkb;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
