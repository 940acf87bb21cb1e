//! Multi-valued vortex-filament wavefunctions for the single-particle
//! Schrödinger equation.
//!
//! The crate builds wavefunctions whose phase is the potential of a knotted
//! (or unknotted) vortex filament, tracks the constant phase picked up on
//! each Riemann sheet, maps them to single-valued states of the
//! ν-transformed nonlinear equation, evolves them with a split-step Fourier
//! solver, and evaluates the quantum-Larmor radiated power.
//!
//! Module map:
//!
//! * [`grid`]: periodic grids, spectral operators, quadrature, QVG1 files
//! * [`knot`]: filament curves, links and Seifert meshes
//! * [`kernels`]: Biot-Savart, solid angle, circulation, nodal regularizer
//! * [`wavefunction`]: initial states, sheet phases, quantization, ν
//! * [`madelung`]: density, guidance velocity, Q_B, nodal lines, trajectories
//! * [`evolution`]: linear and ν-transformed split-step evolution
//! * [`identity`]: residual checks of the ν identity, solenoid fields
//! * [`radiation`]: Larmor formulas and energy-loss integration
//! * [`cli`]: JSON-configured batch commands behind the `qvortex` binary

pub mod analytic;
pub mod cli;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod identity;
pub mod kernels;
pub mod knot;
pub mod madelung;
pub mod radiation;
pub mod wavefunction;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Cartesian 3-vector used for all geometry.
pub type Vec3 = nalgebra::Vector3<f64>;

/// Shorthand constructor for [`Vec3`].
#[inline]
pub fn vec3(x: f64, y: f64, z: f64) -> Vec3 {
    Vec3::new(x, y, z)
}
