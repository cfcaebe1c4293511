use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use subspace_core::bitlinalg::subspace_distance;
use subspace_core::config::parse_config;
use subspace_core::experiment::{run_experiment, run_experiment_with_workers, DEFAULT_SEED, DEFAULT_TRIALS};
use subspace_core::kkcode::{reference_matrix, generate_codebook, parse_codebook_text, verify_fixture, CodeParams};
use subspace_core::oracles::{routing_failure_exact, singular_probability, Method, OracleResult};
use subspace_core::report::{self, Metric};
use subspace_core::{ExperimentSpec, Scheme, Source, Sweep, SweepVar};

#[derive(Parser)]
#[command(name = "subsim", version, about = "Subspace coding over a GF(2) interference channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build, export or check the (16,256,16,8) code.
    Code {
        #[arg(value_enum)]
        action: CodeAction,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Matrix file to verify instead of the built-in fixture.
        #[arg(long)]
        fixture: Option<PathBuf>,
    },
    /// One channel setting, every selected scheme.
    Simulate(SimArgs),
    /// A sweep over p or over the error count.
    Sweep {
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        var: Option<String>,
        /// Comma-separated values or start:step:end.
        #[arg(long)]
        values: Option<String>,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Closed-form / enumeration ground truth as CSV.
    Oracle {
        #[arg(long, value_enum)]
        which: OracleKind,
        /// Comma-separated list or start:step:end.
        #[arg(long, default_value = "0.2")]
        p: String,
        #[arg(long, default_value_t = 8)]
        m: usize,
        /// Monte Carlo samples when m is too large to enumerate.
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Re-render a results CSV as SVG.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        metric: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CodeAction {
    Generate,
    Export,
    Verify,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleKind {
    Routing,
    Singular,
}

#[derive(Args, Default)]
struct SimArgs {
    #[arg(long)]
    schemes: Option<String>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    errors: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    m: Option<usize>,
    /// `fixture` or a message value 0-255 of the generated code.
    #[arg(long)]
    source: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    /// per-destination (default) or system.
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    plot: Option<PathBuf>,
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    if let [start, step, end] = s.split(':').collect::<Vec<_>>()[..] {
        let (start, step, end): (f64, f64, f64) = (start.trim().parse()?, step.trim().parse()?, end.trim().parse()?);
        if step <= 0.0 || end < start {
            bail!("bad range {s:?}");
        }
        let n = ((end - start) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9).collect());
    }
    s.split(',')
        .filter(|v| !v.trim().is_empty())
        .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad number {v:?}")))
        .collect()
}

fn parse_schemes(s: &str) -> Result<Vec<Scheme>> {
    let mut out = Vec::new();
    for name in s.split(',').filter(|n| !n.trim().is_empty()) {
        let scheme: Scheme = name.parse().map_err(anyhow::Error::msg)?;
        if !out.contains(&scheme) {
            out.push(scheme);
        }
    }
    Ok(out)
}

fn parse_source(s: &str) -> Result<Source> {
    match s.trim() {
        "fixture" | "reference" => Ok(Source::Fixture),
        v => Ok(Source::Message(v.parse().with_context(|| format!("bad source {v:?}"))?)),
    }
}

/// Layered settings: built-in preset, then config file, then flags.
struct Layers {
    config: BTreeMap<String, String>,
}

impl Layers {
    fn load(path: Option<&Path>) -> Result<Self> {
        let config = match path {
            Some(p) => {
                let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                parse_config(&text).with_context(|| format!("parsing {}", p.display()))?
            }
            None => BTreeMap::new(),
        };
        Ok(Self { config })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.config.get(key).map(String::as_str)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|e| anyhow::anyhow!("config {key} = {v:?}: {e}")))
            .transpose()
    }
}

struct Run {
    spec: ExperimentSpec,
    workers: Option<usize>,
    metric: Metric,
    out: Option<PathBuf>,
    plot: Option<PathBuf>,
}

fn apply_sim(mut spec: ExperimentSpec, layers: &Layers, sim: &SimArgs) -> Result<Run> {
    if let Some(s) = sim.schemes.as_deref().or(layers.get("schemes")) {
        spec.schemes = parse_schemes(s)?;
    }
    if let Some(v) = sim.trials.or(layers.parsed("trials")?) {
        spec.trials = v;
    }
    if let Some(v) = sim.seed.or(layers.parsed("seed")?) {
        spec.master_seed = v;
    }
    if let Some(v) = sim.m.or(layers.parsed("m")?) {
        spec.base.m_channels = v;
    }
    if let Some(v) = sim.p.or(layers.parsed("p")?) {
        spec.base.p = v;
    }
    if let Some(v) = sim.errors.or(layers.parsed("errors")?) {
        spec.base.t_errors = v;
    }
    if let Some(s) = sim.source.as_deref().or(layers.get("source")) {
        spec.source = parse_source(s)?;
    }
    let metric = match sim.metric.as_deref().or(layers.get("metric")) {
        Some(s) => s.parse().map_err(anyhow::Error::msg)?,
        None => Metric::default(),
    };
    Ok(Run {
        spec,
        workers: sim.workers.or(layers.parsed("workers")?),
        metric,
        out: sim.out.clone().or(layers.get("out").map(PathBuf::from)),
        plot: sim.plot.clone().or(layers.get("plot").map(PathBuf::from)),
    })
}

fn execute(run: Run) -> Result<()> {
    let started = Instant::now();
    let rows = match run.workers {
        Some(w) => run_experiment_with_workers(&run.spec, w),
        None => run_experiment(&run.spec),
    }?;
    let csv = report::csv_string(&rows);
    match &run.out {
        Some(path) => report::emit_csv(&rows, path)?,
        None => print!("{csv}"),
    }
    if let Some(path) = &run.plot {
        report::emit_plot(&rows, path, run.metric)?;
    }
    eprintln!(
        "{} rows, {} trials per point, {:.2}s",
        rows.len(),
        run.spec.trials,
        started.elapsed().as_secs_f64()
    );
    Ok(())
}

fn code_command(action: CodeAction, out: Option<PathBuf>, fixture: Option<PathBuf>) -> Result<()> {
    let params = CodeParams::default();
    let book = generate_codebook(&params);
    match action {
        CodeAction::Generate | CodeAction::Export => {
            if matches!(action, CodeAction::Generate) {
                let mut min = usize::MAX;
                let mut max = 0;
                for (i, a) in book.words().iter().enumerate() {
                    for b in &book.words()[i + 1..] {
                        let d = subspace_distance(a.subspace(), b.subspace());
                        min = min.min(d);
                        max = max.max(d);
                    }
                }
                eprintln!(
                    "({}, {}, {}, {}) code over GF(2^{}) modulus {:#x}: pairwise distance {min}..={max}",
                    params.n_ambient(),
                    book.len(),
                    min,
                    params.k_dim(),
                    params.field().m(),
                    params.field().modulus()
                );
            }
            let text = book.to_text();
            match out {
                Some(p) => fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
                None if matches!(action, CodeAction::Export) => print!("{text}"),
                None => {}
            }
            Ok(())
        }
        CodeAction::Verify => {
            let fix = match fixture {
                Some(p) => {
                    let text = fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
                    let mut blocks = parse_codebook_text(&text).with_context(|| format!("parsing {}", p.display()))?;
                    if blocks.len() != 1 {
                        bail!("{}: expected one matrix, found {}", p.display(), blocks.len());
                    }
                    blocks.remove(0)
                }
                None => reference_matrix(),
            };
            let rep = verify_fixture(&fix, &book);
            let text = format!("{rep}\n");
            match out {
                Some(p) => fs::write(&p, &text).with_context(|| format!("writing {}", p.display()))?,
                None => print!("{text}"),
            }
            if !rep.structure_ok() {
                bail!("structural checks failed");
            }
            Ok(())
        }
    }
}

fn oracle_command(which: OracleKind, p: &str, m: usize, samples: u64, seed: u64) -> Result<()> {
    println!("{}", OracleResult::CSV_HEADER);
    for p in parse_list(p)? {
        if !(0.0..=1.0).contains(&p) {
            bail!("p = {p} outside [0, 1]");
        }
        match which {
            OracleKind::Routing => {
                let (per, sys) = routing_failure_exact(p, m);
                for (q, v) in [("routing_per_destination", per), ("routing_system", sys)] {
                    let r = OracleResult {
                        value: v,
                        method: Method::ClosedForm,
                        stderr: 0.0,
                        detail: "error-free".into(),
                    };
                    println!("{}", r.csv_row(q, p, m));
                }
            }
            OracleKind::Singular => {
                let r = singular_probability(p, m, samples, seed)?;
                println!("{}", r.csv_row("singular", p, m));
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Code { action, out, fixture } => code_command(action, out, fixture),
        Command::Simulate(sim) => {
            let layers = Layers::load(sim.config.as_deref())?;
            let base = ExperimentSpec {
                trials: DEFAULT_TRIALS,
                ..ExperimentSpec::fig4()
            };
            let mut run = apply_sim(base, &layers, &sim)?;
            run.spec.sweep = Sweep {
                var: SweepVar::P,
                values: vec![run.spec.base.p],
            };
            execute(run)
        }
        Command::Sweep { preset, var, values, sim } => {
            let layers = Layers::load(sim.config.as_deref())?;
            let preset = preset.or(layers.get("preset").map(String::from));
            let var = var.or(layers.get("var").map(String::from));
            let values = values.or(layers.get("values").map(String::from));
            let mut spec = match (&preset, &var) {
                (Some(name), _) => ExperimentSpec::preset(name)?,
                (None, Some(v)) => match v.parse::<SweepVar>()? {
                    SweepVar::P => ExperimentSpec::fig4(),
                    SweepVar::Errors => ExperimentSpec::fig5(),
                },
                (None, None) => bail!("sweep needs --preset or --var"),
            };
            if let Some(v) = var {
                spec.sweep.var = v.parse()?;
            }
            if let Some(v) = values {
                spec.sweep.values = parse_list(&v)?;
            }
            execute(apply_sim(spec, &layers, &sim)?)
        }
        Command::Oracle {
            which,
            p,
            m,
            samples,
            seed,
        } => oracle_command(which, &p, m, samples, seed),
        Command::Plot { input, out, metric } => {
            let text = fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let records = report::parse_csv(&text)?;
            let metric = match metric {
                Some(s) => s.parse().map_err(anyhow::Error::msg)?,
                None => Metric::default(),
            };
            let svg = report::render_svg(&records, metric)?;
            fs::write(&out, svg).with_context(|| format!("writing {}", out.display()))?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_lists() {
        assert_eq!(parse_list("0,0.5,1").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_list("0:5:20").unwrap(), vec![0.0, 5.0, 10.0, 15.0, 20.0]);
        assert_eq!(parse_list("0:0.1:0.3").unwrap(), vec![0.0, 0.1, 0.2, 0.3]);
        assert!(parse_list("0:0:1").is_err());
        assert!(parse_list("a,b").is_err());
    }

    #[test]
    fn scheme_lists() {
        assert_eq!(parse_schemes("rlnc,routing,rlnc").unwrap(), vec![Scheme::Rlnc, Scheme::Routing]);
        assert!(parse_schemes("flood").is_err());
    }

    #[test]
    fn flags_override_config() {
        let layers = Layers {
            config: parse_config("trials = 20\nseed = 9\np = 0.4").unwrap(),
        };
        let sim = SimArgs {
            trials: Some(30),
            ..Default::default()
        };
        let run = apply_sim(ExperimentSpec::fig4(), &layers, &sim).unwrap();
        assert_eq!(run.spec.trials, 30);
        assert_eq!(run.spec.master_seed, 9);
        assert_eq!(run.spec.base.p, 0.4);
    }
}
