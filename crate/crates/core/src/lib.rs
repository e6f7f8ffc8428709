//! Spectral Galerkin toolkit for the rotating incompressible Navier-Stokes
//! equations on a periodic box, with exact S-polynomial algebra for the
//! long-time asymptotic expansion of decaying solutions.

// component loops over 3-vectors read better with explicit indices
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod expansion;
pub mod field;
pub mod fit;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod mean_flow;
pub mod par;
pub mod solver;
pub mod special;
pub mod spoly;

pub use error::{Error, Result};
pub use expansion::{Expansion, FitPolicy};
pub use field::{GevreyIndex, SpectralField};
pub use lattice::{Lattice, Mode, Rational, SemigroupTable};
pub use mean_flow::MeanFlow;
pub use par::Exec;
pub use solver::{integrate, Form, SolverConfig, Trajectory};
pub use spoly::{Frequency, SPoly, SSPoly};

/// Library version, embedded in every emitted artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
