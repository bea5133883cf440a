//! heatcert: certified enclosures of mild solutions of the semilinear heat
//! equation u_t - Lap u = u^p on the unit box with Dirichlet boundary data.
//!
//! The pipeline computes a sine-spectral Crank-Nicolson approximation, then
//! proves, in interval arithmetic, that the exact mild solution exists and
//! is unique inside an explicit tube around that approximation, chaining
//! such certificates over many time intervals.

pub mod approx;
pub mod bounds;
pub mod cli;
pub mod residual;
pub mod rigor;
pub mod spectral;
pub mod verify;
