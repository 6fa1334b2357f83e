mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use commands::{Output, Status};
use config::{Format, Overrides, RunConfig, ToleranceOverrides};

const EXIT_INVALID: u8 = 1;
const EXIT_ENUMERATION: u8 = 2;
const EXIT_SEARCH_BUDGET: u8 = 3;
const EXIT_VIOLATED: u8 = 4;

#[derive(Parser)]
#[command(name = "wellround", version, about = "Well-rounded lattices on diagonal orbits")]
struct Cli {
    /// TOML run configuration; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Maximum spread evaluations for `orbit search` (at least 100).
    #[arg(long, global = true)]
    budget: Option<usize>,
    #[arg(long, global = true)]
    rank_tol: Option<f64>,
    #[arg(long, global = true)]
    geom_tol: Option<f64>,
    #[arg(long, global = true)]
    eta_margin: Option<f64>,
    /// Also write every artifact into this directory.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Short vectors up to relative excess `delta_max`.
    Svp {
        lattice: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        delta_max: f64,
    },
    /// Well-roundedness, genericity and transversality rank.
    WrCheck { lattice: PathBuf },
    /// `dim_delta` at each given delta.
    DimDelta {
        lattice: PathBuf,
        #[arg(long, required = true, num_args = 1.., value_delimiter = ',')]
        delta: Vec<f64>,
    },
    /// Which cover sets `U_j` contain the diagonal element `a`.
    CoverMembership {
        lattice: PathBuf,
        /// Log coordinates of `a`, comma separated, summing to zero.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        a: Vec<f64>,
        #[arg(long, default_value_t = 0.04)]
        eps: f64,
    },
    #[command(subcommand)]
    Orbit(OrbitCommand),
    /// Nested multi-indices and the codimension check for a flag.
    Flag { file: PathBuf },
    /// Stabilizer of a support set in the trace-zero diagonal algebra.
    Stab {
        #[arg(long)]
        n: Option<usize>,
        /// A multi-index such as `1,3`; repeat for several.
        #[arg(long)]
        support: Vec<String>,
        /// Take the support of a wedge class file instead.
        #[arg(long, conflicts_with_all = ["n", "support"])]
        wedge: Option<PathBuf>,
    },
    #[command(subcommand)]
    Cover(CoverCommand),
}

#[derive(Subcommand)]
enum OrbitCommand {
    /// Search a closed orbit for a well-rounded lattice.
    Search { spec: PathBuf },
    /// Compact orbit attached to `Z[sqrt D]`.
    Compact {
        #[arg(long = "D", short = 'D')]
        d: i64,
    },
}

#[derive(Subcommand)]
enum CoverCommand {
    /// Multiplicity certificate on the grid.
    Certify {
        cover: PathBuf,
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long)]
        affine_radius: Option<f64>,
        #[arg(long)]
        skip_hypotheses: bool,
    },
    /// Pull a cover back along the folding map.
    Unfold {
        cover: PathBuf,
        #[arg(long)]
        window: f64,
        #[arg(long)]
        resolution: Option<usize>,
    },
}

impl Cli {
    fn config(&self) -> Result<RunConfig> {
        let mut layers = Vec::new();
        if let Some(path) = &self.config {
            layers.push(Overrides::from_file(path)?);
        }
        layers.push(Overrides {
            seed: self.seed,
            budget: self.budget,
            tolerances: ToleranceOverrides {
                rank_tol: self.rank_tol,
                geom_tol: self.geom_tol,
                eta_margin: self.eta_margin,
            },
            output_dir: self.output_dir.clone(),
            format: self.format,
        });
        RunConfig::resolve(&layers)
    }
}

fn run(cli: &Cli, cfg: &RunConfig) -> Result<Output> {
    match &cli.command {
        Command::Svp { lattice, delta_max } => commands::svp(lattice, *delta_max, cfg),
        Command::WrCheck { lattice } => commands::wr_check(lattice, cfg),
        Command::DimDelta { lattice, delta } => commands::dim_delta(lattice, delta, cfg),
        Command::CoverMembership { lattice, a, eps } => commands::membership(lattice, a, *eps, cfg),
        Command::Orbit(OrbitCommand::Search { spec }) => commands::orbit_search(spec, cfg),
        Command::Orbit(OrbitCommand::Compact { d }) => commands::orbit_compact(*d, cfg),
        Command::Flag { file } => commands::flag(file, cfg),
        Command::Stab { n, support, wedge } => commands::stab(*n, support, wedge.as_deref(), cfg),
        Command::Cover(CoverCommand::Certify { cover, resolution, affine_radius, skip_hypotheses }) => {
            commands::cover_certify(cover, *resolution, *affine_radius, *skip_hypotheses, cfg)
        }
        Command::Cover(CoverCommand::Unfold { cover, window, resolution }) => {
            commands::cover_unfold(cover, *window, *resolution, cfg)
        }
    }
}

fn write_outputs(out: &Output, cfg: &RunConfig) -> Result<()> {
    if let Some(dir) = &cfg.output_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (name, content) in &out.files {
            let path = dir.join(name);
            std::fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    let mut text = out.stdout.clone();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        // A closed pipe (e.g. `| head`) is not a failure of the run.
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<wellround::Error>() {
        Some(wellround::Error::EnumerationBudgetExceeded { .. }) => EXIT_ENUMERATION,
        Some(wellround::Error::BudgetExhausted(_)) => EXIT_SEARCH_BUDGET,
        _ => EXIT_INVALID,
    }
}

fn set_threads() -> Result<()> {
    if let Ok(v) = std::env::var("WELLROUND_THREADS") {
        let n: usize = v.trim().parse().with_context(|| format!("WELLROUND_THREADS={v}"))?;
        if n > 0 {
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_INVALID) } else { ExitCode::SUCCESS };
        }
    };
    let result = set_threads().and_then(|_| cli.config()).and_then(|cfg| {
        let out = run(&cli, &cfg)?;
        write_outputs(&out, &cfg)?;
        Ok(out.status)
    });
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::SearchBudget) => ExitCode::from(EXIT_SEARCH_BUDGET),
        Ok(Status::Violated) => ExitCode::from(EXIT_VIOLATED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
