//! Confinement ("ruin") probabilities for one-dimensional Levy processes.
//!
//! The library follows one computational storyline: a Levy model (triplet +
//! named examples) induces a generator `L = (d/dx) S (d/dx)` whose middle
//! factor `S` is a convolution operator with kernel `k(y)`; inverting the
//! truncated generator on an interval yields the quasi-potential operator `B`
//! with kernel `Phi(x,y)`; the spectrum of `B` governs the probability
//! `p(t, Delta)` that the process stays inside the interval up to time `t`.
//!
//! Two independent oracles keep the numerics honest: exact closed forms for
//! the Wiener process ([`wiener`]) and Monte Carlo path sampling ([`mc`]).

pub mod error;
pub mod quad;
pub mod special;
pub mod spline;
pub mod eig;
pub mod rng;
pub mod models;
pub mod sampled;
pub mod kernels;
pub mod quasipotential;
pub mod thm;
pub mod spectral;
pub mod wiener;
pub mod mc;

pub use error::{Error, Result};
