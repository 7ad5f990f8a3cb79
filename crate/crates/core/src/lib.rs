//! Steady state of a microwave cavity that is weakly tethered to a phonon
//! bath and crossed by a Poisson stream of thermally correlated qubit pairs.
//!
//! The analytic chain is
//! [`pair_thermo`] → [`spectral_filter`] → [`steady_state`]; [`oracle`]
//! checks it by brute-force repeated-interaction simulation, and
//! [`sweep`] / [`presets`] turn it into CSV data.
//!
//! ```
//! use cavity_cool::{params::ModelParams, pipeline::run_point};
//!
//! let ideal = ModelParams { kappa: 0.0, ..Default::default() };
//! let report = run_point(&ideal).unwrap();
//! let one = &report.variants[0];
//! assert!((one.t_cav_mk - 218.46).abs() < 0.01);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod constants;
pub mod error;
pub mod oracle;
pub mod pair_thermo;
pub mod params;
pub mod pipeline;
pub mod presets;
pub mod spectral_filter;
pub mod steady_state;
pub mod sweep;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/pair-thermodynamics.md")]
    mod pair_thermodynamics {}
    #[doc = include_str!("../../../book/src/detuning-filter.md")]
    mod detuning_filter {}
    #[doc = include_str!("../../../book/src/steady-state.md")]
    mod steady_state {}
    #[doc = include_str!("../../../book/src/collision-oracle.md")]
    mod collision_oracle {}
    #[doc = include_str!("../../../book/src/sweeps-and-figures.md")]
    mod sweeps_and_figures {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
