//! Spin chains and lattices with perfect state transfer and fractional
//! revival: Krawtchouk-type chain design, one-excitation dynamics, and the
//! Hamming and ordered Hamming schemes whose quantum walks project onto them.

pub mod bivariate;
pub mod combinatorics;
pub mod dynamics;
pub mod error;
pub mod hamming;
pub mod linalg;
pub mod ordered;
pub mod orthopoly;
pub mod spectral;

pub use error::{Error, Result};
pub use linalg::C64;
