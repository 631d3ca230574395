//! Nonlinear optics of a driven Fabry-Perot cavity loaded with atoms that are
//! harmonically trapped in an intracavity optical lattice.
//!
//! Light forces displace the atoms, which changes their coupling to the cavity
//! mode and hence the dispersive shift of the cavity resonance. The result is a
//! Kerr-type lineshape, refractive bistability at photon numbers below one, and
//! collective atomic oscillations imprinted on the transmitted light.
//!
//! Internally every frequency is an angular frequency in rad/s and all other
//! quantities are SI. Conversion from cyclic units happens in [`config`].

// `!(x > 0.0)` is how NaN gets rejected along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dynamics;
pub mod error;
pub mod faddeeva;
pub mod io;
pub mod lattice;
pub mod measure;
pub mod params;
pub mod steady_state;

pub use error::{Error, Result};
pub use params::{CavityParams, DriveParams, PhysicalConstants, SystemParams, TrapParams};
pub use steady_state::{ResponseProfile, SteadyStateSolution};
