//! Numerics for the weak coupling limit of a quantum system whose free
//! Hamiltonian and coupling operators are commuting multiplication operators,
//! coupled to a quasi-free Fermi or Bose reservoir.
//!
//! The crate is organised by stage of the computation:
//!
//! * [`model`]: form factors, dispersions, occupation densities and the
//!   interaction specification.
//! * [`correlations`]: reservoir two-point functions, decay envelopes and
//!   half-line time integrals.
//! * [`wick`]: quasi-free moments through pairings, with a finite-mode
//!   brute-force oracle.
//! * [`dyson`]: commutator-ordering permutations, simplex integrals of the
//!   reduced Dyson series and their limiting values.
//! * [`lambshift`]: frequency-domain Lamb-shift coefficients and the modified
//!   Hamiltonian symbol.
//! * [`wavepacket`]: Gaussian wave-packet evolution in closed form and on a
//!   momentum grid.
//! * [`cli`]: JSON run configuration and the file-emitting commands behind the
//!   `wcl` binary.

pub mod cli;
pub mod correlations;
pub mod dyson;
pub mod error;
pub mod lambshift;
pub mod model;
pub mod quadrature;
pub mod wavepacket;
pub mod wick;

pub use error::{Result, WclError};

pub use num_complex::Complex64 as C64;

/// Cartesian 3-vector.
pub type Vec3 = [f64; 3];
