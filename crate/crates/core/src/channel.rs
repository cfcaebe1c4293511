//! The GF(2) interference channel with bit-flip errors.
//!
//! One use of the channel is one time slot: each of the `m` sources sends one
//! packet, destination `i` receives `R_i = M_i + Σ_{j≠i} α_ij M_j`, and then
//! `t` distinct cells of the stacked `m×n` output are flipped.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bitlinalg::{matmul, BitMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("interference probability {0} outside [0, 1]")]
    Probability(f64),
    #[error("{t} errors requested but the received matrix has only {cells} cells")]
    TooManyErrors { t: usize, cells: usize },
    #[error("channel count must be at least 1")]
    NoChannels,
    #[error("interference matrix must be square with a unit diagonal")]
    BadInterference,
    #[error("error position ({0}, {1}) is out of range or repeated")]
    BadPosition(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub m_channels: usize,
    pub n_len: usize,
    pub p: f64,
    pub t_errors: usize,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            m_channels: 8,
            n_len: 16,
            p: 0.0,
            t_errors: 0,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<(), ChannelError> {
        if self.m_channels == 0 {
            return Err(ChannelError::NoChannels);
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(ChannelError::Probability(self.p));
        }
        let cells = self.cells();
        if self.t_errors > cells {
            return Err(ChannelError::TooManyErrors {
                t: self.t_errors,
                cells,
            });
        }
        Ok(())
    }

    /// Size of the received matrix, `m·n`.
    pub fn cells(&self) -> usize {
        self.m_channels * self.n_len
    }
}

/// Coefficient matrix `A` with `A[i][i] = 1`; row `i` lists which packets
/// superpose at destination `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InterferenceMatrix(BitMatrix);

impl InterferenceMatrix {
    pub fn new(a: BitMatrix) -> Result<Self, ChannelError> {
        if a.rows() != a.cols() || (0..a.rows()).any(|i| !a.get(i, i)) {
            return Err(ChannelError::BadInterference);
        }
        Ok(Self(a))
    }

    pub fn identity(m: usize) -> Self {
        Self(BitMatrix::identity(m))
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.rows()
    }
}

/// Distinct `(row, col)` cells to flip.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ErrorPattern {
    positions: Vec<(usize, usize)>,
}

impl ErrorPattern {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new(rows: usize, cols: usize, positions: Vec<(usize, usize)>) -> Result<Self, ChannelError> {
        let mut seen = std::collections::HashSet::new();
        for &(r, c) in &positions {
            if r >= rows || c >= cols || !seen.insert((r, c)) {
                return Err(ChannelError::BadPosition(r, c));
            }
        }
        Ok(Self { positions })
    }

    pub fn positions(&self) -> &[(usize, usize)] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Number of distinct rows touched.
    pub fn rows_touched(&self) -> usize {
        let mut rows: Vec<usize> = self.positions.iter().map(|p| p.0).collect();
        rows.sort_unstable();
        rows.dedup();
        rows.len()
    }

    /// The flip pattern as an `rows×cols` matrix `Z`.
    pub fn to_matrix(&self, rows: usize, cols: usize) -> BitMatrix {
        let mut z = BitMatrix::zeros(rows, cols);
        for &(r, c) in &self.positions {
            z.flip(r, c);
        }
        z
    }
}

/// Domain tag for simulator streams.
pub const SIM_STREAM_TAG: u64 = 0x5349_4d2d_5452_4941; // "SIM-TRIA"

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial random stream.
///
/// ChaCha8 keyed with 256 bits squeezed by SplitMix64 from
/// `(tag, master_seed, cell_index, trial_index)`. The same four inputs give
/// the same draws on every platform and under any thread schedule.
#[derive(Debug, Clone)]
pub struct TrialRng {
    master_seed: u64,
    trial_index: u64,
    stream: ChaCha8Rng,
}

impl TrialRng {
    pub fn new(master_seed: u64, trial_index: u64) -> Self {
        Self::derive(SIM_STREAM_TAG, master_seed, 0, trial_index)
    }

    /// Stream for trial `trial_index` of sweep point `cell_index`.
    pub fn for_cell(master_seed: u64, cell_index: u64, trial_index: u64) -> Self {
        Self::derive(SIM_STREAM_TAG, master_seed, cell_index, trial_index)
    }

    /// Stream in an arbitrary domain; distinct tags give unrelated streams.
    pub fn derive(tag: u64, master_seed: u64, cell_index: u64, trial_index: u64) -> Self {
        let mut state = tag;
        for word in [master_seed, cell_index, trial_index] {
            state ^= word;
            splitmix64(&mut state);
        }
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        Self {
            master_seed,
            trial_index,
            stream: ChaCha8Rng::from_seed(key),
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn trial_index(&self) -> u64 {
        self.trial_index
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.stream.gen_bool(p)
    }

    /// Uniform draw from `lo..hi` (u32 sampling keeps it width-independent).
    pub fn below(&mut self, lo: u32, hi: u32) -> u32 {
        self.stream.gen_range(lo..hi)
    }

    pub fn uniform(&mut self) -> f64 {
        self.stream.gen()
    }
}

/// Draws `A`: unit diagonal, off-diagonal entries Bernoulli(p) in row-major order.
pub fn sample_interference(params: &ChannelParams, rng: &mut TrialRng) -> InterferenceMatrix {
    let m = params.m_channels;
    let mut a = BitMatrix::identity(m);
    for i in 0..m {
        for j in 0..m {
            if i != j && rng.bernoulli(params.p) {
                a.set(i, j, true);
            }
        }
    }
    InterferenceMatrix(a)
}

/// Draws `t` distinct cells uniformly via a partial Fisher–Yates shuffle of
/// the row-major cell indices.
pub fn sample_errors(params: &ChannelParams, rng: &mut TrialRng) -> ErrorPattern {
    let cells = params.cells();
    let t = params.t_errors;
    assert!(t <= cells, "{t} errors exceed {cells} cells");
    let mut idx: Vec<u32> = (0..cells as u32).collect();
    for i in 0..t {
        let j = rng.below(i as u32, cells as u32) as usize;
        idx.swap(i, j);
    }
    let n = params.n_len;
    ErrorPattern {
        positions: idx[..t].iter().map(|&k| (k as usize / n, k as usize % n)).collect(),
    }
}

/// `A · sent` with the cells of `e` flipped.
pub fn transmit(sent: &BitMatrix, a: &InterferenceMatrix, e: &ErrorPattern) -> BitMatrix {
    assert_eq!(a.size(), sent.rows(), "interference matrix does not match packet count");
    let mut out = matmul(a.matrix(), sent);
    for &(r, c) in &e.positions {
        out.flip(r, c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kkcode::reference_matrix;

    fn params(p: f64, t: usize) -> ChannelParams {
        ChannelParams {
            p,
            t_errors: t,
            ..Default::default()
        }
    }

    #[test]
    fn validate_params() {
        assert!(params(0.5, 10).validate().is_ok());
        assert_eq!(params(1.5, 0).validate(), Err(ChannelError::Probability(1.5)));
        assert!(params(-0.1, 0).validate().is_err());
        assert!(params(f64::NAN, 0).validate().is_err());
        assert_eq!(
            params(0.1, 129).validate(),
            Err(ChannelError::TooManyErrors { t: 129, cells: 128 })
        );
        assert!(params(0.1, 128).validate().is_ok());
    }

    #[test]
    fn extreme_probabilities() {
        let mut rng = TrialRng::new(7, 0);
        for _ in 0..50 {
            assert_eq!(sample_interference(&params(0.0, 0), &mut rng), InterferenceMatrix::identity(8));
            assert_eq!(sample_interference(&params(1.0, 0), &mut rng).matrix(), &BitMatrix::ones(8, 8));
        }
    }

    #[test]
    fn off_diagonal_weight_moment() {
        // Binomial(56, 0.5) mean over 10_000 draws: 28 ± 3·sqrt(14)/100.
        let mut total = 0usize;
        for k in 0..10_000 {
            let mut rng = TrialRng::new(11, k);
            let a = sample_interference(&params(0.5, 0), &mut rng);
            total += a.matrix().weight() - 8;
        }
        let mean = total as f64 / 10_000.0;
        let sigma = (56.0f64 * 0.25).sqrt() / 100.0;
        assert!((mean - 28.0).abs() <= 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn error_pattern_extremes() {
        let mut rng = TrialRng::new(3, 0);
        assert!(sample_errors(&params(0.0, 0), &mut rng).is_empty());
        let full = sample_errors(&params(0.0, 128), &mut rng);
        let mut cells: Vec<_> = full.positions().to_vec();
        cells.sort_unstable();
        let expect: Vec<_> = (0..8).flat_map(|r| (0..16).map(move |c| (r, c))).collect();
        assert_eq!(cells, expect);
    }

    #[test]
    fn single_error_is_uniform() {
        let mut hits = [0usize; 128];
        let draws = 10_000;
        for k in 0..draws {
            let mut rng = TrialRng::new(5, k);
            let e = sample_errors(&params(0.0, 1), &mut rng);
            let (r, c) = e.positions()[0];
            hits[r * 16 + c] += 1;
        }
        let q = 1.0 / 128.0;
        let sigma = (q * (1.0 - q) / draws as f64).sqrt();
        // 3σ per cell would trip on ~0.3% of 128 cells by chance; use the
        // Bonferroni-safe 4.5σ for the per-cell check and a chi-square bound overall.
        let mut chi2 = 0.0;
        for &h in &hits {
            let freq = h as f64 / draws as f64;
            assert!((freq - q).abs() <= 4.5 * sigma, "freq {freq}");
            let e = draws as f64 * q;
            chi2 += (h as f64 - e).powi(2) / e;
        }
        // 127 degrees of freedom: mean 127, sd ~16
        assert!(chi2 < 127.0 + 5.0 * (2.0f64 * 127.0).sqrt(), "chi2 {chi2}");
    }

    #[test]
    fn transmit_examples() {
        let fix = reference_matrix();
        assert_eq!(transmit(&fix, &InterferenceMatrix::identity(8), &ErrorPattern::none()), fix);
        let e = ErrorPattern::new(8, 16, vec![(0, 0)]).unwrap();
        let out = transmit(&fix, &InterferenceMatrix::identity(8), &e);
        assert_eq!(out.hamming_distance(&fix), 1);
        assert!(!out.get(0, 0));

        let ones = InterferenceMatrix::new(BitMatrix::ones(8, 8)).unwrap();
        let out = transmit(&fix, &ones, &ErrorPattern::none());
        // XOR of the eight printed rows
        let sum: BitMatrix = "1111111100100000".parse().unwrap();
        for i in 0..8 {
            assert_eq!(out.row(i), sum);
        }
    }

    #[test]
    fn interference_matrix_validation() {
        assert!(InterferenceMatrix::new(BitMatrix::zeros(2, 2)).is_err());
        assert!(InterferenceMatrix::new(BitMatrix::ones(2, 3)).is_err());
        assert!(InterferenceMatrix::new(BitMatrix::ones(3, 3)).is_ok());
    }

    #[test]
    fn error_pattern_validation() {
        assert!(ErrorPattern::new(2, 2, vec![(0, 0), (0, 0)]).is_err());
        assert!(ErrorPattern::new(2, 2, vec![(2, 0)]).is_err());
        let e = ErrorPattern::new(3, 3, vec![(0, 1), (0, 2), (2, 2)]).unwrap();
        assert_eq!(e.rows_touched(), 2);
        assert_eq!(e.to_matrix(3, 3).weight(), 3);
    }

    #[test]
    fn streams_are_reproducible_and_separated() {
        let p = params(0.3, 20);
        let draw = |rng: &mut TrialRng| (sample_interference(&p, rng), sample_errors(&p, rng));
        let a = draw(&mut TrialRng::new(42, 9));
        let b = draw(&mut TrialRng::new(42, 9));
        assert_eq!(a, b);
        let c = draw(&mut TrialRng::new(42, 10));
        let d = draw(&mut TrialRng::derive(1, 42, 0, 9));
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn frozen_stream_prefix() {
        // Pins the documented derivation so a dependency bump that changes
        // the generator is caught.
        let mut rng = TrialRng::new(2024, 0);
        let a = sample_interference(&params(0.5, 0), &mut rng);
        assert_eq!(a, sample_interference(&params(0.5, 0), &mut TrialRng::new(2024, 0)));
        let first: Vec<u32> = (0..4).map(|_| rng.below(0, 1000)).collect();
        assert_eq!(first, FROZEN_PREFIX);
    }

    const FROZEN_PREFIX: [u32; 4] = [267, 797, 637, 112];
}
