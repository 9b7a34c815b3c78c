//! Two-dimensional transport-Stokes density-patch simulation on the unit torus,
//! together with a free-space singular-kernel library used as an independent
//! cross-check oracle.
//!
//! The simulated system couples a transported indicator function ("the patch")
//! to the stationary Stokes balance it forces:
//!
//! ```text
//!   ∂θ/∂t + u·∇θ = 0,      −Δu + ∇Π = θ e₂,      div u = 0,
//! ```
//!
//! on the periodic unit square. The patch is carried implicitly as the positive
//! region of a level-set field φ; the velocity is recovered pseudo-spectrally
//! from the patch indicator at every step.
//!
//! Module map:
//! - [`grid`]: uniform N×N torus grid and field containers.
//! - [`spectral`]: discrete Fourier transforms, Heaviside indicator, Gaussian filter.
//! - [`stokes`]: the frequency-space Stokes solve (velocity, vorticity, streamfunction).
//! - [`advect`]: monotone upwind transport with CFL-limited Heun time stepping.
//! - [`kernels`]: exact free-space kernel formulas (K, G, ∇K, ∇G, H₁/H₂, E, Q).
//! - [`quadrature`]: patch-velocity quadratures and the Lagrangian contour-dynamics oracle.
//! - [`contour`]: marching-squares isocontour extraction and polyline geometry.
//! - [`monitors`]: per-snapshot diagnostics (area, center of mass, curvature, regularity monitors).
//! - [`config`]: run configuration parsing.
//! - [`io`]: snapshot, contour, and diagnostics file formats.
//! - [`sim`]: the coupled run loop.
//! - [`verify`]: self-check bundles exposed through the command line.

pub mod advect;
pub mod config;
pub mod contour;
pub mod error;
pub mod grid;
pub mod io;
pub mod kernels;
pub mod monitors;
pub mod quadrature;
pub mod sim;
pub mod spectral;
pub mod stokes;
pub mod verify;

pub use error::{Error, Result};
