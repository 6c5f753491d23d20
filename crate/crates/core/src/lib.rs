//! Hitting distributions of Brownian motion on hyperbolic spaces and on the
//! two-sphere.
//!
//! The crate evaluates the Poisson kernels of geodesic balls in the
//! half-space model ℍⁿ, the Poincaré disc 𝔻² and spherical caps, together
//! with the exit probabilities of the diffusion from annuli. Every analytic
//! formula has an independent numerical counterpart:
//!
//! * series forms of the closed kernels ([`kernels`]),
//! * finite-difference harmonicity of the radial solutions ([`exitprob`]),
//! * Euler–Maruyama simulation with first-passage detection ([`sim`]),
//!   checked with the goodness-of-fit tools in [`stats`].
//!
//! Path simulation runs on rayon when the `parallel` feature is enabled (the
//! default) and falls back to a sequential loop otherwise. Results are
//! bit-identical either way because each path owns a random stream derived
//! from the seed and its index.

pub mod cli;
pub mod error;
pub mod exitprob;
pub mod geometry;
pub mod kernels;
pub mod sim;
pub mod specialfn;
pub mod stats;
pub mod validate;

pub use error::{Error, Result};
