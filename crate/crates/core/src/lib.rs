//! Analysis engine for downlink Poisson cellular networks whose links
//! attenuate as `e^(-α r^β)`.
//!
//! The [`analytic`] module evaluates coverage probability, potential
//! throughput and area spectral efficiency; [`montecarlo`] is an independent
//! network simulator used to cross-check them; [`fitting`] fits path-loss
//! families to distance/attenuation measurements; [`sweep`] drives parameter
//! sweeps and figure data export.

pub mod analytic;
pub mod error;
pub mod fitting;
pub mod montecarlo;
pub mod pathloss;
pub mod quadrature;
pub mod special;
pub mod sweep;

pub use error::{Error, Result};
pub use pathloss::{NetworkParams, PathLossModel};
