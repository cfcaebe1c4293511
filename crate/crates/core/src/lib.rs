//! Subspace coding over a GF(2) interference channel.
//!
//! An array of `m` parallel links whose outputs superpose with Bernoulli
//! coefficients, received three ways: plain routing, cooperative RLNC
//! decoding with the realized coefficients, and minimum-distance decoding of
//! a lifted-Gabidulin constant-dimension code. The crate carries the GF(2)
//! and GF(2^8) algebra, the (16, 256, 16, 8) code, the channel, the
//! receivers, exact oracles, and the sweep harness with CSV/SVG output.

pub mod bitlinalg;
pub mod channel;
pub mod config;
pub mod experiment;
pub mod gf2m;
pub mod kkcode;
pub mod oracles;
pub mod receivers;
pub mod report;

pub use bitlinalg::{BitMatrix, Subspace};
pub use channel::{ChannelParams, ErrorPattern, InterferenceMatrix, TrialRng};
pub use experiment::{ExperimentSpec, ResultRow, Source, Sweep, SweepVar};
pub use gf2m::{FieldElement, FieldParams};
pub use kkcode::{CodeParams, Codebook, Codeword};
pub use receivers::{Scheme, TrialOutcome};
