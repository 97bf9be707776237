use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use totcorr::format::{fmt12, sig12, sig12_vec};
use totcorr::io::{read_state, EnsembleFile};
use totcorr::roof::roof_minimize;
use totcorr::states::{self, dm, epr, mix};
use totcorr::sweep::{default_n_range, default_x_grid, rows_to_csv, run_sweep, Family, SweepSpec};
use totcorr::verify::{run_suite, Suite};
use totcorr::{
    DensityMatrix, Ensemble, Error, Measure, MeasureReport, RegisterShape, Result, RoofConfig,
    State, Strategy, C64,
};

#[derive(Parser)]
#[command(
    name = "totcorr",
    version,
    about = "Total-correlation entanglement measures"
)]
struct Cli {
    /// Base seed for random states and optimizer restarts.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output format; `sweep` defaults to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate O, M, S and MW on a state.
    Measure(Source),
    /// Tabulate measures over families, sizes and parameters.
    Sweep(SweepArgs),
    /// Minimize a measure over decompositions of a mixed state.
    Roof(RoofArgs),
    /// Run a randomized verification suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Named {
    Ghz,
    W,
    Wbar,
    Cluster,
    Epr,
    EprPower,
    Family1,
    Family2,
    /// `p |EPR><EPR| + (1 - p) I/4`
    Werner,
    /// `(|00><00| + |11><11|)/2`
    Classical,
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "source")]
struct SourceChoice {
    /// Named state.
    #[arg(long, value_enum)]
    state: Option<Named>,
    /// JSON state file.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Args)]
struct Source {
    #[command(flatten)]
    choice: SourceChoice,
    /// Number of qubits for the named families.
    #[arg(long)]
    n: Option<usize>,
    /// Parameter of family1 / family2.
    #[arg(long)]
    x: Option<f64>,
    /// Singlet weight of the Werner state.
    #[arg(long)]
    p: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    /// Families to evaluate (repeatable); all of them by default.
    #[arg(long = "family", value_enum)]
    families: Vec<Family>,
    /// Register sizes (repeatable); 2..=12 by default.
    #[arg(long = "n")]
    ns: Vec<usize>,
    /// Smallest register size; combined with --n-max into a range.
    #[arg(long, conflicts_with = "ns")]
    n_min: Option<usize>,
    #[arg(long, conflicts_with = "ns")]
    n_max: Option<usize>,
    /// Parameter values for family1 / family2 (repeatable).
    #[arg(long = "x")]
    xs: Vec<f64>,
    /// Leave the *_rel columns empty.
    #[arg(long)]
    no_normalize: bool,
}

#[derive(Args)]
struct RoofArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, value_enum, default_value_t = Measure::M)]
    measure: Measure,
    #[arg(long, value_enum, default_value_t = Strategy::PureRoof)]
    strategy: Strategy,
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    #[arg(long, default_value_t = 2000)]
    max_iterations: usize,
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
    /// Decomposition size; defaults to rank².
    #[arg(long)]
    ensemble_size: Option<usize>,
    /// Largest register dimension accepted.
    #[arg(long, default_value_t = 256)]
    max_dim: usize,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    suite: Suite,
    /// Trials per check; each suite has its own default.
    #[arg(long)]
    trials: Option<usize>,
}

fn need<T>(v: Option<T>, flag: &str, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidArgument(format!("--state {name} needs --{flag}")))
}

fn werner(p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "p must lie in [0, 1], got {p}"
        )));
    }
    let shape = RegisterShape::qubits(2)?;
    let mm = DensityMatrix::maximally_mixed(shape.clone());
    let m = dm(&epr()).matrix() * C64::new(p, 0.0) + mm.matrix() * C64::new(1.0 - p, 0.0);
    DensityMatrix::new(shape, m)
}

fn classical() -> Result<DensityMatrix> {
    let shape = RegisterShape::qubits(2)?;
    let a = states::PureState::basis(shape.clone(), 0)?;
    let b = states::PureState::basis(shape, 3)?;
    Ok(mix(&Ensemble::new(
        vec![0.5, 0.5],
        vec![a.into(), b.into()],
    )?))
}

impl Source {
    fn load(&self) -> Result<State> {
        if let Some(path) = &self.choice.file {
            return read_state(path);
        }
        let name = self.choice.state.expect("clap enforces one source");
        let n = || need(self.n, "n", "family");
        let x = || need(self.x, "x", "family1/family2");
        Ok(match name {
            Named::Ghz => states::ghz(n()?)?.into(),
            Named::W => states::w(n()?)?.into(),
            Named::Wbar => states::wbar(n()?)?.into(),
            Named::Cluster => states::cluster(n()?)?.into(),
            Named::Epr => epr().into(),
            Named::EprPower => states::epr_power(n()?)?.into(),
            Named::Family1 => states::family1(x()?, n()?)?.into(),
            Named::Family2 => states::family2(x()?, n()?)?.into(),
            Named::Werner => State::Mixed(werner(need(self.p, "p", "werner")?)?),
            Named::Classical => State::Mixed(classical()?),
        })
    }
}

#[derive(Serialize)]
struct RoofOutput {
    measure: Measure,
    strategy: Strategy,
    #[serde(serialize_with = "sig12")]
    value: f64,
    converged: bool,
    #[serde(serialize_with = "sig12_vec")]
    per_restart_values: Vec<f64>,
    ensemble: EnsembleFile,
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn measure(src: &Source, format: Format) -> Result<String> {
    let r = MeasureReport::evaluate(&src.load()?)?;
    match format {
        Format::Json => json(&r),
        Format::Csv => Ok(format!(
            "O,M,S,MW,bound_M,bound_S\n{}\n",
            [r.o, r.m, r.s, r.mw, r.bound_m, r.bound_s]
                .map(fmt12)
                .join(",")
        )),
    }
}

fn sweep(args: &SweepArgs, format: Format) -> Result<String> {
    let n_range = match (args.n_min, args.n_max) {
        (None, None) if args.ns.is_empty() => default_n_range(),
        (None, None) => args.ns.clone(),
        (lo, hi) => (lo.unwrap_or(2)..=hi.unwrap_or(12)).collect(),
    };
    let spec = SweepSpec {
        families: if args.families.is_empty() {
            Family::ALL.to_vec()
        } else {
            args.families.clone()
        },
        n_range,
        x_grid: if args.xs.is_empty() {
            default_x_grid()
        } else {
            args.xs.clone()
        },
        normalize_to_ghz: !args.no_normalize,
    };
    let rows = run_sweep(&spec)?;
    match format {
        Format::Csv => Ok(rows_to_csv(&rows)),
        Format::Json => json(&rows),
    }
}

fn roof(args: &RoofArgs, seed: u64, format: Format) -> Result<String> {
    let state = args.source.load()?;
    let d = state.shape().total_dim();
    if d > args.max_dim {
        return Err(Error::ResourceCap(format!(
            "register dimension {d} exceeds the roof cap {}",
            args.max_dim
        )));
    }
    let config = RoofConfig {
        ensemble_size: args.ensemble_size,
        restarts: args.restarts,
        max_iterations: args.max_iterations,
        tolerance: args.tolerance,
        seed,
        strategy: args.strategy,
        max_dim: args.max_dim,
    };
    let r = roof_minimize(&state.to_density(), args.measure, &config)?;
    match format {
        Format::Json => json(&RoofOutput {
            measure: args.measure,
            strategy: args.strategy,
            value: r.value,
            converged: r.converged,
            per_restart_values: r.per_restart_values,
            ensemble: EnsembleFile::from(&r.ensemble),
        }),
        Format::Csv => Ok(format!(
            "value,converged\n{},{}\n",
            fmt12(r.value),
            r.converged
        )),
    }
}

fn verify(args: &VerifyArgs, seed: u64, format: Format) -> Result<(String, bool)> {
    let trials = args.trials.unwrap_or_else(|| args.suite.default_trials());
    let report = run_suite(args.suite, seed, trials)?;
    eprint!("{report}");
    let text = match format {
        Format::Json => json(&report)?,
        Format::Csv => {
            let mut s = String::from("check,trials,passed,worst_residual,tolerance\n");
            for c in &report.checks {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    c.name,
                    c.trials,
                    c.passed,
                    fmt12(c.worst_residual),
                    c.tolerance
                ));
            }
            s
        }
    };
    Ok((text, report.passed))
}

fn run(cli: &Cli) -> Result<bool> {
    let (text, ok) = match &cli.command {
        Command::Measure(src) => (measure(src, cli.format.unwrap_or(Format::Json))?, true),
        Command::Sweep(args) => (sweep(args, cli.format.unwrap_or(Format::Csv))?, true),
        Command::Roof(args) => (
            roof(args, cli.seed, cli.format.unwrap_or(Format::Json))?,
            true,
        ),
        Command::Verify(args) => verify(args, cli.seed, cli.format.unwrap_or(Format::Json))?,
    };
    match &cli.output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::ResourceCap(_) => 3,
                _ => 2,
            })
        }
    }
}
