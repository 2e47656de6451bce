//! Simulation and multifractal analysis of complex-valued random
//! multiplicative cascade functions `F = F_W ∘ F_L^{-1}` on `[0, 1]`.

pub mod analytic;
pub mod cascade;
pub mod empirical;
pub mod error;
pub mod numeric;
pub mod oscillation;
pub mod rng;
pub mod runner;
pub mod weights;

pub use error::{Error, Result};
