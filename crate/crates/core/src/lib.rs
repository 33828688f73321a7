//! Link-level simulation and analysis of DFT-based frequency-domain
//! equalization with and without a cyclic prefix.
//!
//! Without a prefix, a receiver designed for circular convolution sees
//! interference only at the two edges of each DFT window, and that
//! interference decays geometrically into the window at a rate set by the
//! poles of the equalizer's inverse filter. Overlapping windows that discard
//! `D` symbols at each end recover the prefixed receiver's performance.

pub mod analysis;
pub mod channel;
pub mod dft;
pub mod equalizer;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod rng;
pub mod seq;
pub mod txrx;

pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use seq::{MatrixSequence, VectorSequence};
