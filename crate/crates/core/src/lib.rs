//! Fundamental H2 and H-infinity limits of lossless systems, the controllers
//! that attain them, and the swing-equation power-network experiments built
//! on top.
//!
//! The numerical layers ([`numlin`], [`lossless`], [`synth`], [`swing`]) are
//! generic over [`Real`]; the network generator and the analysis drivers work
//! in `f64`. Aliases for the common `f64` instantiations live at the crate
//! root.

pub mod analysis;
pub mod error;
pub mod lossless;
pub mod netgen;
pub mod numlin;
pub mod scalar;
pub mod swing;
pub mod synth;

pub use error::{Error, ErrorClass, Result};
pub use scalar::Real;

pub type StateSpace = numlin::StateSpace<f64>;
pub type LosslessSystem = lossless::LosslessSystem<f64>;
pub type LosslessCertificate = lossless::LosslessCertificate<f64>;
pub type GeneralizedPlant = synth::GeneralizedPlant<f64>;
pub type Controller = synth::Controller<f64>;
pub type SwingModel = swing::SwingModel<f64>;
