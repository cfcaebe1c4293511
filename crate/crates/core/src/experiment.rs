//! Sweep orchestration: paired Monte Carlo trials over a grid of channel
//! parameters, reduced into one [`ResultRow`] per (scheme, sweep value).

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::bitlinalg::BitMatrix;
use crate::channel::{
    sample_errors, sample_interference, transmit, ChannelError, ChannelParams, ErrorPattern, InterferenceMatrix,
    TrialRng,
};
use crate::gf2m::FieldParams;
use crate::kkcode::{reference_matrix, generate_codebook, CodeParams, Codebook};
use crate::receivers::{rlnc_receive, routing_receive, subspace_receive, Scheme, TrialOutcome};

pub const DEFAULT_TRIALS: u64 = 1000;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("no schemes selected")]
    NoSchemes,
    #[error("sweep has no values")]
    EmptySweep,
    #[error("sweep value {0}: {1}")]
    Channel(f64, ChannelError),
    #[error("error count {0} is not a non-negative integer")]
    FractionalErrors(f64),
    #[error("packet length must be {expected} to carry codeword rows, got {got}")]
    PacketLength { expected: usize, got: usize },
    #[error("{got} channels requested; the source codeword has {max} packets")]
    TooManyChannels { got: usize, max: usize },
    #[error("subspace scheme needs exactly {expected} channels (one per codeword row), got {got}")]
    SubspaceChannels { expected: usize, got: usize },
    #[error("source message {0} outside the codebook")]
    Message(u32),
    #[error("unknown sweep variable {0:?} (expected p or errors)")]
    SweepVar(String),
    #[error("unknown preset {0:?} (expected fig4 or fig5)")]
    Preset(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    P,
    Errors,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::P => "p",
            SweepVar::Errors => "errors",
        }
    }

    /// Canonical text form of a sweep value.
    pub fn format_value(self, v: f64) -> String {
        match self {
            SweepVar::P => format!("{v:.6}"),
            SweepVar::Errors => format!("{}", v as u64),
        }
    }
}

impl fmt::Display for SweepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepVar {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "p" => Ok(SweepVar::P),
            "errors" | "t" => Ok(SweepVar::Errors),
            other => Err(SpecError::SweepVar(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub var: SweepVar,
    pub values: Vec<f64>,
}

impl Sweep {
    /// `0, step, 2·step, …, steps·step`, computed from integers so the
    /// grid points print cleanly.
    pub fn grid(var: SweepVar, step: f64, steps: usize) -> Self {
        Self {
            var,
            values: (0..=steps).map(|i| (i as f64 * step * 1e9).round() / 1e9).collect(),
        }
    }
}

/// Packets the main source feeds to the channel sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    /// The printed 8×16 codeword fixture.
    Fixture,
    /// Codeword for this message in the default (polynomial-basis) code.
    Message(u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub schemes: Vec<Scheme>,
    pub sweep: Sweep,
    /// Fixed channel parameters; the swept field is overwritten per point.
    pub base: ChannelParams,
    pub trials: u64,
    pub master_seed: u64,
    pub source: Source,
}

impl ExperimentSpec {
    /// Error-free sweep of p over 0, 0.05, …, 1.
    pub fn fig4() -> Self {
        Self {
            schemes: Scheme::ALL.to_vec(),
            sweep: Sweep::grid(SweepVar::P, 0.05, 20),
            base: ChannelParams::default(),
            trials: DEFAULT_TRIALS,
            master_seed: DEFAULT_SEED,
            source: Source::Fixture,
        }
    }

    /// Sweep of the error count 0, 5, …, 100 at p = 0.2.
    pub fn fig5() -> Self {
        Self {
            schemes: Scheme::ALL.to_vec(),
            sweep: Sweep::grid(SweepVar::Errors, 5.0, 20),
            base: ChannelParams {
                p: 0.2,
                ..ChannelParams::default()
            },
            trials: DEFAULT_TRIALS,
            master_seed: DEFAULT_SEED,
            source: Source::Fixture,
        }
    }

    pub fn preset(name: &str) -> Result<Self, SpecError> {
        match name.trim() {
            "fig4" => Ok(Self::fig4()),
            "fig5" => Ok(Self::fig5()),
            other => Err(SpecError::Preset(other.to_string())),
        }
    }

    /// Channel parameters at one sweep point.
    pub fn params_at(&self, value: f64) -> ChannelParams {
        let mut p = self.base;
        match self.sweep.var {
            SweepVar::P => p.p = value,
            SweepVar::Errors => p.t_errors = value as usize,
        }
        p
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        if self.trials == 0 {
            return Err(SpecError::NoTrials);
        }
        if self.schemes.is_empty() {
            return Err(SpecError::NoSchemes);
        }
        if self.sweep.values.is_empty() {
            return Err(SpecError::EmptySweep);
        }
        let code = CodeParams::default();
        if self.base.n_len != code.n_ambient() {
            return Err(SpecError::PacketLength {
                expected: code.n_ambient(),
                got: self.base.n_len,
            });
        }
        if self.base.m_channels > code.k_dim() {
            return Err(SpecError::TooManyChannels {
                got: self.base.m_channels,
                max: code.k_dim(),
            });
        }
        if self.schemes.contains(&Scheme::Subspace) && self.base.m_channels != code.k_dim() {
            return Err(SpecError::SubspaceChannels {
                expected: code.k_dim(),
                got: self.base.m_channels,
            });
        }
        if let Source::Message(msg) = self.source {
            if msg as usize >= code.cardinality() {
                return Err(SpecError::Message(msg));
            }
        }
        for &v in &self.sweep.values {
            if self.sweep.var == SweepVar::Errors && (v < 0.0 || v.fract() != 0.0 || !v.is_finite()) {
                return Err(SpecError::FractionalErrors(v));
            }
            self.params_at(v).validate().map_err(|e| SpecError::Channel(v, e))?;
        }
        Ok(())
    }
}

/// Source packets plus the codebook the subspace receivers decode against.
pub struct Scenario {
    codebook: Codebook,
    message: u32,
    truth: BitMatrix,
}

impl Scenario {
    pub fn new(source: Source, m_channels: usize) -> Self {
        let (code, message) = match source {
            // the fixture is message 1 of the code whose evaluation points
            // are the rows of its X block
            Source::Fixture => (
                CodeParams::through_codeword(FieldParams::default(), &reference_matrix())
                    .expect("fixture X block is invertible"),
                1,
            ),
            Source::Message(msg) => (CodeParams::default(), msg),
        };
        let codebook = generate_codebook(&code);
        let word = codebook.get(message).matrix();
        let mut truth = word.clone();
        truth.truncate_rows(m_channels);
        Self {
            codebook,
            message,
            truth,
        }
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    /// The `m×n` matrix of transmitted packets.
    pub fn truth(&self) -> &BitMatrix {
        &self.truth
    }
}

/// Everything one trial produced, including the channel realization.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub interference: InterferenceMatrix,
    pub errors: ErrorPattern,
    pub outcomes: Vec<TrialOutcome>,
}

/// One channel use, shared by every scheme in `schemes`.
pub fn run_trial(
    scenario: &Scenario,
    schemes: &[Scheme],
    params: &ChannelParams,
    master_seed: u64,
    cell_index: u64,
    trial_index: u64,
) -> TrialRecord {
    let mut rng = TrialRng::for_cell(master_seed, cell_index, trial_index);
    let a = sample_interference(params, &mut rng);
    let e = sample_errors(params, &mut rng);
    let received = transmit(&scenario.truth, &a, &e);
    let outcomes = schemes
        .iter()
        .map(|&s| match s {
            Scheme::Routing => routing_receive(&received, &scenario.truth),
            Scheme::Rlnc => rlnc_receive(&received, &a, &scenario.truth),
            Scheme::Subspace => subspace_receive(&received, &scenario.codebook, scenario.codebook.get(scenario.message)),
        })
        .collect();
    TrialRecord {
        interference: a,
        errors: e,
        outcomes,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scheme: Scheme,
    pub sweep_var: SweepVar,
    pub sweep_value: f64,
    pub trials: u64,
    pub m_channels: usize,
    pub system_failures: u64,
    /// Failed (destination, trial) pairs.
    pub destination_failures: u64,
    /// Σ over trials of (failed destinations)², for the per-destination stderr.
    pub destination_failures_sq: u64,
    pub master_seed: u64,
}

impl ResultRow {
    pub fn failure_rate_system(&self) -> f64 {
        self.system_failures as f64 / self.trials as f64
    }

    pub fn failure_rate_per_destination(&self) -> f64 {
        self.destination_failures as f64 / (self.trials as f64 * self.m_channels as f64)
    }

    pub fn stderr_system(&self) -> f64 {
        let f = self.failure_rate_system();
        (f * (1.0 - f) / self.trials as f64).sqrt()
    }

    /// Standard error of the per-destination average, from the per-trial
    /// failed fractions (destinations in one trial are not independent).
    pub fn stderr_per_destination(&self) -> f64 {
        let n = self.trials as f64;
        let m = self.m_channels as f64;
        let mean = self.destination_failures as f64 / (n * m);
        let mean_sq = self.destination_failures_sq as f64 / (n * m * m);
        ((mean_sq - mean * mean).max(0.0) / n).sqrt()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    system: u64,
    dest: u64,
    dest_sq: u64,
}

impl Tally {
    fn add(mut self, o: &TrialOutcome) -> Self {
        let f = o.failed_destinations() as u64;
        self.system += (!o.system_success()) as u64;
        self.dest += f;
        self.dest_sq += f * f;
        self
    }

    fn merge(mut self, other: Self) -> Self {
        self.system += other.system;
        self.dest += other.dest;
        self.dest_sq += other.dest_sq;
        self
    }
}

/// Runs every (sweep point, trial) pair on the current rayon pool. Tallies
/// are integer sums, so the result does not depend on scheduling.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRow>, SpecError> {
    spec.validate()?;
    let scenario = Scenario::new(spec.source, spec.base.m_channels);
    let k = spec.schemes.len();
    let mut per_cell: Vec<Vec<Tally>> = Vec::with_capacity(spec.sweep.values.len());
    for (cell, &value) in spec.sweep.values.iter().enumerate() {
        let params = spec.params_at(value);
        let tallies = (0..spec.trials)
            .into_par_iter()
            .fold(
                || vec![Tally::default(); k],
                |acc, t| {
                    let rec = run_trial(&scenario, &spec.schemes, &params, spec.master_seed, cell as u64, t);
                    acc.into_iter().zip(&rec.outcomes).map(|(a, o)| a.add(o)).collect()
                },
            )
            .reduce(
                || vec![Tally::default(); k],
                |x, y| x.into_iter().zip(y).map(|(a, b)| a.merge(b)).collect(),
            );
        per_cell.push(tallies);
    }
    let mut rows = Vec::with_capacity(k * per_cell.len());
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&i| spec.schemes[i]);
    for i in order {
        for (cell, &value) in spec.sweep.values.iter().enumerate() {
            let t = per_cell[cell][i];
            rows.push(ResultRow {
                scheme: spec.schemes[i],
                sweep_var: spec.sweep.var,
                sweep_value: value,
                trials: spec.trials,
                m_channels: spec.base.m_channels,
                system_failures: t.system,
                destination_failures: t.dest,
                destination_failures_sq: t.dest_sq,
                master_seed: spec.master_seed,
            });
        }
    }
    Ok(rows)
}

/// [`run_experiment`] on a dedicated pool of `workers` threads.
pub fn run_experiment_with_workers(spec: &ExperimentSpec, workers: usize) -> Result<Vec<ResultRow>, SpecError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool");
    pool.install(|| run_experiment(spec))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(var: SweepVar, values: Vec<f64>) -> ExperimentSpec {
        ExperimentSpec {
            sweep: Sweep { var, values },
            trials: 50,
            ..ExperimentSpec::fig4()
        }
    }

    #[test]
    fn presets() {
        let f4 = ExperimentSpec::fig4();
        assert_eq!(f4.sweep.values.len(), 21);
        assert_eq!(f4.sweep.values[1], 0.05);
        assert_eq!(f4.sweep.values[3], 0.15);
        assert_eq!(f4.sweep.values[20], 1.0);
        assert_eq!(f4.base.t_errors, 0);
        let f5 = ExperimentSpec::fig5();
        assert_eq!(f5.sweep.values.last(), Some(&100.0));
        assert_eq!(f5.base.p, 0.2);
        assert!(ExperimentSpec::preset("fig6").is_err());
    }

    #[test]
    fn validation() {
        let mut s = ExperimentSpec::fig4();
        s.trials = 0;
        assert_eq!(s.validate(), Err(SpecError::NoTrials));
        let mut s = ExperimentSpec::fig4();
        s.base.m_channels = 4;
        assert!(matches!(s.validate(), Err(SpecError::SubspaceChannels { .. })));
        s.schemes = vec![Scheme::Routing, Scheme::Rlnc];
        assert!(s.validate().is_ok());
        s.base.m_channels = 9;
        assert!(matches!(s.validate(), Err(SpecError::TooManyChannels { .. })));
        let s = small(SweepVar::Errors, vec![2.5]);
        assert_eq!(s.validate(), Err(SpecError::FractionalErrors(2.5)));
        let s = small(SweepVar::Errors, vec![129.0]);
        assert!(matches!(s.validate(), Err(SpecError::Channel(..))));
        let s = small(SweepVar::P, vec![1.2]);
        assert!(matches!(s.validate(), Err(SpecError::Channel(..))));
        let mut s = ExperimentSpec::fig4();
        s.source = Source::Message(256);
        assert_eq!(s.validate(), Err(SpecError::Message(256)));
    }

    #[test]
    fn trial_extremes() {
        let sc = Scenario::new(Source::Fixture, 8);
        let clean = ChannelParams::default();
        let rec = run_trial(&sc, &Scheme::ALL, &clean, 9, 0, 0);
        assert!(rec.outcomes.iter().all(|o| o.system_success()));

        let full = ChannelParams { p: 1.0, ..clean };
        let rec = run_trial(&sc, &Scheme::ALL, &full, 9, 0, 0);
        assert!(!rec.outcomes[0].system_success());
        assert!(!rec.outcomes[1].system_success());
        assert!(rec.outcomes[2].system_success());
    }

    #[test]
    fn trial_is_deterministic() {
        let sc = Scenario::new(Source::Fixture, 8);
        let params = ChannelParams {
            p: 0.3,
            t_errors: 7,
            ..Default::default()
        };
        let a = run_trial(&sc, &Scheme::ALL, &params, 5, 2, 17);
        let b = run_trial(&sc, &Scheme::ALL, &params, 5, 2, 17);
        assert_eq!(a.interference, b.interference);
        assert_eq!(a.errors, b.errors);
        assert_eq!(a.outcomes, b.outcomes);
    }

    #[test]
    fn rows_ordered_by_scheme_then_value() {
        let mut s = small(SweepVar::P, vec![0.0, 0.5]);
        s.schemes = vec![Scheme::Subspace, Scheme::Routing];
        let rows = run_experiment(&s).unwrap();
        let keys: Vec<_> = rows.iter().map(|r| (r.scheme, r.sweep_value)).collect();
        assert_eq!(
            keys,
            vec![
                (Scheme::Routing, 0.0),
                (Scheme::Routing, 0.5),
                (Scheme::Subspace, 0.0),
                (Scheme::Subspace, 0.5)
            ]
        );
        assert_eq!(rows[0].failure_rate_system(), 0.0);
        assert_eq!(rows[3].failure_rate_system(), 0.0);
    }

    #[test]
    fn generated_codeword_source() {
        let mut s = small(SweepVar::Errors, vec![0.0, 3.0]);
        s.source = Source::Message(0x42);
        s.base.p = 0.4;
        let rows = run_experiment(&s).unwrap();
        let sub: Vec<_> = rows.iter().filter(|r| r.scheme == Scheme::Subspace).collect();
        assert_eq!(sub[0].system_failures, 0);
    }

    #[test]
    fn per_destination_stderr_matches_hand_computation() {
        // two trials with 2 and 0 failed destinations out of 4
        let row = ResultRow {
            scheme: Scheme::Routing,
            sweep_var: SweepVar::P,
            sweep_value: 0.1,
            trials: 2,
            m_channels: 4,
            system_failures: 1,
            destination_failures: 2,
            destination_failures_sq: 4,
            master_seed: 0,
        };
        // fractions 0.5 and 0: mean 0.25, population variance 0.0625
        assert!((row.failure_rate_per_destination() - 0.25).abs() < 1e-12);
        assert!((row.stderr_per_destination() - (0.0625f64 / 2.0).sqrt()).abs() < 1e-12);
        assert!((row.stderr_system() - (0.25f64 / 2.0).sqrt()).abs() < 1e-12);
    }
}
