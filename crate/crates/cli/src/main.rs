//! Command-line runner for pathslice studies and the acceptance suite.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pathslice::acceptance;
use pathslice::experiment::{self, Emit, ExperimentConfig, FunctionSpec, Study};
use pathslice::{Generator, ProjectorPolicy};

#[derive(Parser)]
#[command(name = "pathslice", version, about = "Time-sliced short-time propagators on symmetric manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single-step error of U(t) against the exact propagator over a list of times.
    SingleStep(StudyArgs),
    /// Error of U(t/N)^N ρ(E) over a list of slice counts.
    Slice(StudyArgs),
    /// Unitarity defect of the multipliers and norms of sliced products.
    NormSweep(StudyArgs),
    /// Stationary-phase residuals on a flat patch.
    StationaryPhase(StudyArgs),
    /// Run the acceptance criteria; exits nonzero if any fails.
    VerifyAll {
        /// Run only these criteria (repeatable).
        #[arg(long = "criterion", value_name = "ID")]
        criteria: Vec<u8>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitArg {
    Csv,
    Json,
    Both,
}

#[derive(Args)]
struct StudyArgs {
    /// JSON config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file stem.
    #[arg(long)]
    name: Option<String>,
    /// circle:R, torus:P1,P2 or sphere2:R.
    #[arg(long)]
    manifold: Option<String>,
    /// Cutoff support as a fraction of the injectivity radius.
    #[arg(long)]
    cutoff_support: Option<f64>,
    /// Cutoff plateau as a fraction of the injectivity radius.
    #[arg(long)]
    cutoff_plateau: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    t_list: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<u32>>,
    /// fixed:E, rho-n or rho-n-power[:ε].
    #[arg(long, alias = "policy")]
    energy: Option<ProjectorPolicy>,
    /// Eigenbasis truncation energy.
    #[arg(long)]
    e_max: Option<f64>,
    /// `level,m[,re[,im]];…` or `random:K`.
    #[arg(long)]
    function: Option<FunctionSpec>,
    /// Normalize the test function.
    #[arg(long)]
    normalize: bool,
    /// corrected or bare.
    #[arg(long)]
    generator: Option<Generator>,
    #[arg(long)]
    oscillation_budget: Option<u32>,
    #[arg(long)]
    quadrature_tolerance: Option<f64>,
    /// Flat-patch dimension (stationary-phase).
    #[arg(long)]
    dimension: Option<usize>,
    /// Expansion orders (stationary-phase).
    #[arg(long, value_delimiter = ',')]
    orders: Option<Vec<usize>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    emit: Option<EmitArg>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Fill the CSV runtime column.
    #[arg(long)]
    record_timings: bool,
}

impl StudyArgs {
    fn into_config(self, study: Study) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => {
                let c = ExperimentConfig::load(path).with_context(|| format!("reading {}", path.display()))?;
                if c.study != study {
                    bail!("config {} describes a {} study, not {}", path.display(), c.study.name(), study.name());
                }
                c
            }
            None => ExperimentConfig::new(study, ""),
        };
        macro_rules! set {
            ($field:ident) => {
                if let Some(v) = self.$field {
                    c.$field = v;
                }
            };
            ($field:ident, opt) => {
                if self.$field.is_some() {
                    c.$field = self.$field;
                }
            };
        }
        set!(manifold);
        set!(cutoff_support);
        set!(cutoff_plateau);
        set!(t_list);
        set!(n_list);
        set!(generator);
        set!(dimension);
        set!(orders);
        set!(seed);
        set!(name, opt);
        set!(t, opt);
        set!(energy, opt);
        set!(e_max, opt);
        set!(function, opt);
        set!(out_dir, opt);
        if let Some(b) = self.oscillation_budget {
            c.quadrature.oscillation_budget = b;
        }
        if let Some(tol) = self.quadrature_tolerance {
            c.quadrature.tolerance = tol;
        }
        if let Some(e) = self.emit {
            c.emit = match e {
                EmitArg::Csv => Emit::Csv,
                EmitArg::Json => Emit::Json,
                EmitArg::Both => Emit::Both,
            };
        }
        c.normalize |= self.normalize;
        c.record_timings |= self.record_timings;
        Ok(c)
    }
}

fn run_study(study: Study, args: StudyArgs) -> Result<ExitCode> {
    let config = args.into_config(study)?;
    let report = experiment::execute(&config)?;
    print!("{}", report.summary());
    if let Some(dir) = &config.out_dir {
        for path in report.write(dir)? {
            println!("wrote {}", path.display());
        }
    }
    Ok(if report.passed == Some(false) { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}

fn verify_all(criteria: &[u8]) -> Result<ExitCode> {
    let outcomes = if criteria.is_empty() {
        acceptance::run_all()
    } else {
        criteria
            .iter()
            .map(|&id| acceptance::run_criterion(id).with_context(|| format!("unknown criterion {id}")))
            .collect::<Result<Vec<_>>>()?
    };
    for o in &outcomes {
        println!("{o}");
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::SingleStep(a) => run_study(Study::SingleStep, a),
        Command::Slice(a) => run_study(Study::Slicing, a),
        Command::NormSweep(a) => run_study(Study::NormSweep, a),
        Command::StationaryPhase(a) => run_study(Study::StationaryPhase, a),
        Command::VerifyAll { criteria } => verify_all(&criteria),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(2)
    })
}
