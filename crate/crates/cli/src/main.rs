use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use conespec::algebra::DEFAULT_SIZE_BOUND;
use conespec::{Error, SpectralContext};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "conespec", version, about = "Spectra of finite rings and monoids relative to a cone system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args, Debug, Clone)]
struct Opts {
    /// zariski, domain or deitmar; defaults to zariski for rings and deitmar for monoids.
    #[arg(long, global = true)]
    context: Option<SpectralContext>,
    /// Input file; may also be given positionally.
    #[arg(long, global = true, alias = "space")]
    input: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Largest input algebra accepted.
    #[arg(long, global = true, default_value_t = DEFAULT_SIZE_BOUND as u64,
          value_parser = clap::value_parser!(u64).range(1..=DEFAULT_SIZE_BOUND as u64))]
    size_bound: u64,
    /// Saturation rounds for local-forms; defaults to |R| + 2.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    rounds: Option<u64>,
    #[arg(long, global = true)]
    property: Option<Property>,
    /// Hom file for `check --property geometric-iso`.
    #[arg(long, global = true)]
    hom: Option<PathBuf>,
    /// `default` (corpus algebras with at most 8 elements) or `corpus:N`.
    #[arg(long, global = true, default_value = "default")]
    site: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Spec of an algebra: DOT of the specialization order and a space file.
    Spec { file: Option<PathBuf> },
    /// Decide a property of an algebra or a hom.
    Check { file: Option<PathBuf> },
    /// Glue charts from a gluing spec and test the result for affineness.
    Glue { file: Option<PathBuf> },
    /// Nerve of a space file on a finite site, with the sheaf condition.
    Nerve { file: Option<PathBuf> },
    /// Local forms of an algebra with their cell paths.
    LocalForms { file: Option<PathBuf> },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    Reduced,
    MonoReduced,
    FixedPoint,
    GeometricIso,
    FlatCover,
}

/// Everything a subcommand needs, validated.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub context: Option<SpectralContext>,
    pub input: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub size_bound: usize,
    pub rounds: Option<usize>,
    pub property: Option<Property>,
    pub hom: Option<PathBuf>,
    pub site: String,
}

impl RunConfig {
    fn new(opts: Opts, file: Option<PathBuf>) -> conespec::Result<Self> {
        let input = match (opts.input, file) {
            (Some(_), Some(_)) => {
                return Err(Error::Input("give the input either positionally or with --input".into()))
            }
            (a, b) => a.or(b),
        };
        for p in input.iter().chain(&opts.hom) {
            if !p.is_file() {
                return Err(Error::Input(format!("{}: no such file", p.display())));
            }
        }
        Ok(RunConfig {
            context: opts.context,
            input,
            out_dir: opts.out_dir,
            size_bound: opts.size_bound as usize,
            rounds: opts.rounds.map(|r| r as usize),
            property: opts.property,
            hom: opts.hom,
            site: opts.site,
        })
    }

    pub fn input(&self) -> conespec::Result<&PathBuf> {
        self.input.as_ref().ok_or_else(|| Error::Input("no input file".into()))
    }
}

fn run(cli: Cli) -> conespec::Result<commands::Outcome> {
    let file = match &cli.command {
        Command::Spec { file }
        | Command::Check { file }
        | Command::Glue { file }
        | Command::Nerve { file }
        | Command::LocalForms { file } => file.clone(),
    };
    let cfg = RunConfig::new(cli.opts, file)?;
    match cli.command {
        Command::Spec { .. } => commands::spec(&cfg),
        Command::Check { .. } => commands::check(&cfg),
        Command::Glue { .. } => commands::glue(&cfg),
        Command::Nerve { .. } => commands::nerve(&cfg),
        Command::LocalForms { .. } => commands::local_forms(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(if out.holds { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
