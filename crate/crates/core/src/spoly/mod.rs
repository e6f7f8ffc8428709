//! S-polynomials (finite sums of `t^m e^{i omega t} Z`) and their
//! drift-modulated extension, with exact symbolic frequencies.

pub mod calculus;
pub mod frequency;
pub mod poly;
pub mod sspoly;

pub use calculus::{integrate_complex, integrate_term, TermIntegral, TrigAntiderivative};
pub use frequency::{collisions, Frequency, Generator};
pub use poly::{SPoly, ScalarSPoly, TermKey};
pub use sspoly::{Phase, SSPoly};
