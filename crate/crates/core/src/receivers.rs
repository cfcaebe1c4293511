//! Destination-side processing for the three transmission schemes, and
//! per-trial scoring against the transmitted packets.

use std::fmt;
use std::str::FromStr;

use crate::bitlinalg::{invert, matmul, row_space, BitMatrix};
use crate::channel::InterferenceMatrix;
use crate::kkcode::{decode_ml, Codebook, Codeword};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Store-and-forward; destinations do not cooperate.
    Routing,
    /// Cooperative destinations invert the realized interference matrix.
    Rlnc,
    /// Cooperative destinations decode the received row space.
    Subspace,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Routing, Scheme::Rlnc, Scheme::Subspace];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Routing => "routing",
            Scheme::Rlnc => "rlnc",
            Scheme::Subspace => "subspace",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "routing" => Ok(Scheme::Routing),
            "rlnc" => Ok(Scheme::Rlnc),
            "subspace" => Ok(Scheme::Subspace),
            other => Err(format!("unknown scheme {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialOutcome {
    pub scheme: Scheme,
    pub per_destination_success: Vec<bool>,
}

impl TrialOutcome {
    pub fn uniform(scheme: Scheme, m: usize, success: bool) -> Self {
        Self {
            scheme,
            per_destination_success: vec![success; m],
        }
    }

    /// All destinations recovered their packet.
    pub fn system_success(&self) -> bool {
        self.per_destination_success.iter().all(|&s| s)
    }

    pub fn failed_destinations(&self) -> usize {
        self.per_destination_success.iter().filter(|&&s| !s).count()
    }
}

fn score_rows(scheme: Scheme, got: &BitMatrix, truth: &BitMatrix) -> TrialOutcome {
    assert_eq!((got.rows(), got.cols()), (truth.rows(), truth.cols()), "shape mismatch");
    TrialOutcome {
        scheme,
        per_destination_success: (0..truth.rows()).map(|i| got.row_words(i) == truth.row_words(i)).collect(),
    }
}

/// Each destination takes its received row as-is.
pub fn routing_receive(received: &BitMatrix, truth: &BitMatrix) -> TrialOutcome {
    score_rows(Scheme::Routing, received, truth)
}

/// Coherent RLNC decoding with the realized coefficients: `A⁻¹ · R`.
/// A singular `A` loses a dimension and every destination fails.
pub fn rlnc_receive(received: &BitMatrix, a: &InterferenceMatrix, truth: &BitMatrix) -> TrialOutcome {
    match invert(a.matrix()) {
        Ok(inv) => score_rows(Scheme::Rlnc, &matmul(&inv, received), truth),
        Err(_) => TrialOutcome::uniform(Scheme::Rlnc, truth.rows(), false),
    }
}

/// Minimum-distance decoding of the received row space. One decoded subspace
/// is shared by all destinations, so the outcome is all-or-nothing.
pub fn subspace_receive(received: &BitMatrix, book: &Codebook, truth_word: &Codeword) -> TrialOutcome {
    let m = received.rows();
    let ok = match decode_ml(&row_space(received), book) {
        Ok(d) => d.word.subspace() == truth_word.subspace(),
        Err(_) => false,
    };
    TrialOutcome::uniform(Scheme::Subspace, m, ok)
}
