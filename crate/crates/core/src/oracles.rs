//! Independent ground truth for the Monte Carlo estimates: closed forms,
//! weighted exhaustive enumeration, and Monte Carlo on a separate stream.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::bitlinalg::{rref, BitMatrix};
use crate::channel::TrialRng;

/// Largest channel count for which P(A singular) is enumerated exactly.
pub const MAX_ENUMERATION_CHANNELS: usize = 5;

/// Domain tag for oracle streams; differs from the simulator's tag.
pub const ORACLE_STREAM_TAG: u64 = 0x4f52_4143_4c45_2d31; // "ORACLE-1"

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("exact enumeration needs m <= {MAX_ENUMERATION_CHANNELS}, got {0}")]
    TooLarge(usize),
    #[error("probability {0} outside [0, 1]")]
    Probability(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Enumeration,
    MonteCarloIndependent,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ClosedForm => "closed_form",
            Method::Enumeration => "enumeration",
            Method::MonteCarloIndependent => "monte_carlo_independent",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub value: f64,
    pub method: Method,
    /// Standard error; zero for exact methods.
    pub stderr: f64,
    pub detail: String,
}

impl OracleResult {
    pub const CSV_HEADER: &'static str = "quantity,method,p,m,value,stderr,detail";

    pub fn csv_row(&self, quantity: &str, p: f64, m: usize) -> String {
        format!(
            "{quantity},{},{p:.6},{m},{:.6},{:.6},{}",
            self.method,
            self.value,
            self.stderr,
            self.detail.replace(',', ";")
        )
    }
}

fn check_p(p: f64) -> Result<(), OracleError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(OracleError::Probability(p))
    }
}

/// Error-free routing failure: `(1 − (1−p)^(m−1), 1 − (1−p)^(m(m−1)))`,
/// per destination and for the whole system.
pub fn routing_failure_exact(p: f64, m: usize) -> (f64, f64) {
    assert!((0.0..=1.0).contains(&p), "p = {p} outside [0, 1]");
    let q = 1.0 - p;
    let others = m.saturating_sub(1) as i32;
    (1.0 - q.powi(others), 1.0 - q.powi(others * m as i32))
}

/// Number of singular `I + B` matrices for each off-diagonal weight `k`.
pub fn singular_weight_histogram(m: usize) -> Result<Vec<u64>, OracleError> {
    if m > MAX_ENUMERATION_CHANNELS {
        return Err(OracleError::TooLarge(m));
    }
    let offdiag: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let slots = offdiag.len();
    let patterns: u64 = 1 << slots;
    let hist = (0..patterns)
        .into_par_iter()
        .fold(
            || vec![0u64; slots + 1],
            |mut acc, bits| {
                let mut a = BitMatrix::identity(m);
                for (k, &(i, j)) in offdiag.iter().enumerate() {
                    if bits >> k & 1 == 1 {
                        a.set(i, j, true);
                    }
                }
                if rref(&a).1 < m {
                    acc[bits.count_ones() as usize] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; slots + 1],
            |mut x, y| {
                for (a, b) in x.iter_mut().zip(y) {
                    *a += b;
                }
                x
            },
        );
    Ok(hist)
}

/// Exact P(I + B singular) with B off-diagonal Bernoulli(p), by weighted
/// enumeration of all `2^(m(m−1))` patterns.
pub fn singular_probability_exact(p: f64, m: usize) -> Result<OracleResult, OracleError> {
    check_p(p)?;
    let hist = singular_weight_histogram(m)?;
    let slots = hist.len() - 1;
    let q = 1.0 - p;
    let value: f64 = hist
        .iter()
        .enumerate()
        .map(|(k, &c)| c as f64 * p.powi(k as i32) * q.powi((slots - k) as i32))
        .sum();
    let singular: u64 = hist.iter().sum();
    Ok(OracleResult {
        value: value.clamp(0.0, 1.0),
        method: Method::Enumeration,
        stderr: 0.0,
        detail: format!("{singular} of {} patterns singular", 1u64 << slots),
    })
}

/// Monte Carlo estimate of P(I + B singular) on the oracle stream.
pub fn singular_probability_mc(p: f64, m: usize, samples: u64, seed: u64) -> Result<OracleResult, OracleError> {
    check_p(p)?;
    assert!(samples > 0, "need at least one sample");
    let singular: u64 = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = TrialRng::derive(ORACLE_STREAM_TAG, seed, m as u64, s);
            let mut a = BitMatrix::identity(m);
            for i in 0..m {
                for j in 0..m {
                    if i != j && rng.uniform() < p {
                        a.set(i, j, true);
                    }
                }
            }
            (rref(&a).1 < m) as u64
        })
        .sum();
    let value = singular as f64 / samples as f64;
    Ok(OracleResult {
        value,
        method: Method::MonteCarloIndependent,
        stderr: (value * (1.0 - value) / samples as f64).sqrt(),
        detail: format!("{singular} of {samples} samples singular"),
    })
}

/// Exact when enumeration is feasible, independent Monte Carlo otherwise.
pub fn singular_probability(p: f64, m: usize, samples: u64, seed: u64) -> Result<OracleResult, OracleError> {
    if m <= MAX_ENUMERATION_CHANNELS {
        singular_probability_exact(p, m)
    } else {
        singular_probability_mc(p, m, samples, seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Guarantee {
    AlwaysCorrect,
    NoGuarantee,
}

/// With `A` invertible and errors confined to `r` rows, the received space
/// is within subspace distance `2r` of the codeword; the (16,·,16,8) code
/// corrects anything strictly below 8.
pub fn subspace_failure_bound(corrupted_rows: usize) -> Guarantee {
    if 2 * corrupted_rows < 8 {
        Guarantee::AlwaysCorrect
    } else {
        Guarantee::NoGuarantee
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn routing_closed_form() {
        assert_eq!(routing_failure_exact(0.0, 8), (0.0, 0.0));
        assert_eq!(routing_failure_exact(1.0, 8), (1.0, 1.0));
        let (per, _) = routing_failure_exact(0.1, 8);
        assert!((per - 0.521_703_1).abs() < 1e-6);
    }

    #[test]
    fn routing_closed_form_matches_pattern_enumeration() {
        // destination 0 of the fixture: interference cancels only if the
        // selected foreign rows XOR to zero, which independence rules out
        let fix = crate::kkcode::reference_matrix();
        let p: f64 = 0.1;
        let mut ok = 0.0;
        for bits in 0u32..128 {
            let mut row = fix.row(0);
            for j in 0..7 {
                if bits >> j & 1 == 1 {
                    for c in 0..16 {
                        if fix.get(j + 1, c) {
                            row.flip(0, c);
                        }
                    }
                }
            }
            if row == fix.row(0) {
                ok += p.powi(bits.count_ones() as i32) * (1.0 - p).powi(7 - bits.count_ones() as i32);
            }
        }
        assert!((routing_failure_exact(p, 8).0 - (1.0 - ok)).abs() < 1e-12);
    }

    #[test]
    fn singular_small_cases() {
        assert_eq!(singular_probability_exact(0.3, 1).unwrap().value, 0.0);
        for p in [0.0, 0.1, 0.5, 0.9, 1.0] {
            let v = singular_probability_exact(p, 2).unwrap().value;
            assert!((v - p * p).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_m3_half() {
        assert_eq!(singular_weight_histogram(3).unwrap(), vec![0, 0, 3, 14, 6, 6, 1]);
        let r = singular_probability_exact(0.5, 3).unwrap();
        assert!((r.value - 30.0 / 64.0).abs() < 1e-12);
    }

    #[test]
    fn enumeration_limit() {
        assert_eq!(singular_probability_exact(0.5, 6), Err(OracleError::TooLarge(6)));
        assert!(singular_probability_exact(1.5, 3).is_err());
    }

    #[test]
    fn bound_examples() {
        assert_eq!(subspace_failure_bound(0), Guarantee::AlwaysCorrect);
        assert_eq!(subspace_failure_bound(3), Guarantee::AlwaysCorrect);
        assert_eq!(subspace_failure_bound(4), Guarantee::NoGuarantee);
    }

    #[test]
    fn csv_row_format() {
        let r = singular_probability_exact(0.5, 2).unwrap();
        assert_eq!(
            r.csv_row("singular", 0.5, 2),
            "singular,enumeration,0.500000,2,0.250000,0.000000,1 of 4 patterns singular"
        );
    }
}
