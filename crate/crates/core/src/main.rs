use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ibn::experiment::{self, parse_depths, parse_grid, Command, ExperimentConfig, Family, TreeSource};
use ibn::flow_cut::DepthSchedule;
use ibn::generators::DEFAULT_MEMORY_CAP;
use ibn::Result;

#[derive(Parser)]
#[command(name = "ibn", version, about = "Intermediate branching number experiments")]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, env = "IBN_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    /// Largest number of vertices or group elements to materialise.
    #[arg(long, global = true, default_value_t = DEFAULT_MEMORY_CAP)]
    memory_cap: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Source {
    #[arg(long, value_enum, conflicts_with = "tree")]
    family: Option<FamilyArg>,
    #[arg(long)]
    depth: Option<usize>,
    /// Branch-mark file for `--family marks`.
    #[arg(long)]
    marks: Option<PathBuf>,
    /// Tree in the text format written by `generate`.
    #[arg(long)]
    tree: Option<PathBuf>,
}

#[derive(clap::ValueEnum, Clone, Copy)]
enum FamilyArg {
    Seq,
    ThreeOne,
    Binary,
    Path,
    Marks,
    Nathanson,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Seq => Family::Seq,
            FamilyArg::ThreeOne => Family::ThreeOne,
            FamilyArg::Binary => Family::Binary,
            FamilyArg::Path => Family::Path,
            FamilyArg::Marks => Family::Marks,
            FamilyArg::Nathanson => Family::Nathanson,
        }
    }
}

impl Source {
    fn resolve(&self, default_depth: usize) -> Result<(TreeSource, usize)> {
        match (&self.tree, self.family) {
            (Some(path), _) => Ok((TreeSource::File { path: path.clone() }, self.depth.unwrap_or(default_depth))),
            (None, Some(f)) => {
                let depth = self.depth.unwrap_or(default_depth);
                Ok((TreeSource::Family { family: f.into(), depth, marks: self.marks.clone() }, depth))
            }
            (None, None) => Err(ibn::Error::InvalidArgument("give --family or --tree".into())),
        }
    }
}

fn schedule(spec: &Option<String>, depth: usize) -> Result<Vec<usize>> {
    match spec {
        Some(s) => parse_depths(s),
        None => Ok(DepthSchedule::doubling(16.min(depth), depth)?.depths),
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a tree to a text file.
    Generate {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: PathBuf,
    },
    /// Min-cut sweep and IBN bracket.
    EstimateIbn {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value = "0.05:0.95:0.05")]
        grid: String,
        /// Comma list of depths; doubling from 16 by default.
        #[arg(long)]
        schedule: Option<String>,
        #[arg(long, default_value = "ibn.csv")]
        out: PathBuf,
    },
    /// Monte Carlo walks with conductance exp(-depth^lambda).
    Walk {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 1_000_000)]
        step_cap: u64,
        #[arg(long, default_value = "walk.csv")]
        out: PathBuf,
    },
    /// Recurrence/transience sweep under random conductances.
    Rwrc {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value = "0.05:0.95:0.05")]
        gamma_grid: String,
        #[arg(long)]
        schedule: Option<String>,
        #[arg(long, default_value = "rwrc.csv")]
        out: PathBuf,
    },
    /// Survival probabilities of depth-dependent percolation.
    Percolate {
        #[command(flatten)]
        source: Source,
        /// One value, a comma list or a:b:step.
        #[arg(long)]
        lambda: String,
        #[arg(long)]
        depths: Option<String>,
        /// Monte Carlo trials per cell.
        #[arg(long)]
        mc: Option<u64>,
        #[arg(long, default_value = "percolate.csv")]
        out: PathBuf,
    },
    /// Firefighter containment sweep.
    Firefight {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value = "0.05:0.95:0.05")]
        gamma_grid: String,
        /// Budget factor in front of exp(n^gamma).
        #[arg(long, default_value_t = 1.0)]
        factor: f64,
        /// Comma list of horizons.
        #[arg(long, default_value = "16,32,64,128,200")]
        horizon: String,
        #[arg(long, default_value = "firefight.csv")]
        out: PathBuf,
    },
    /// Ball statistics and lex tree of the matrix semigroup.
    Nathanson {
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        emit_tree: Option<PathBuf>,
        #[arg(long, default_value = "nathanson.csv")]
        emit_stats: PathBuf,
    },
    /// Search a word with a large inverted orbit and write its branch marks.
    Grig {
        #[arg(long)]
        search: usize,
        #[arg(long, default_value_t = 256)]
        beam: usize,
        #[arg(long, default_value = "marks.txt")]
        emit_marks: PathBuf,
    },
    /// Merge manifested runs into one summary table.
    Report {
        dir: PathBuf,
        #[arg(long, default_value = "summary.csv")]
        out: PathBuf,
    },
    /// Re-run from a config or manifest file.
    Replay { config: PathBuf },
}

fn build(cli: Cli) -> Result<ExperimentConfig> {
    let command = match cli.cmd {
        Cmd::Replay { config } => return ExperimentConfig::load(&config),
        Cmd::Generate { source, out } => Command::Generate { source: source.resolve(64)?.0, out },
        Cmd::EstimateIbn { source, grid, schedule: s, out } => {
            let (source, depth) = source.resolve(512)?;
            Command::EstimateIbn { source, grid: parse_grid(&grid)?, schedule: schedule(&s, depth)?, out }
        }
        Cmd::Walk { source, lambda, trials, step_cap, out } => {
            Command::Walk { source: source.resolve(512)?.0, lambda, trials, step_cap, out }
        }
        Cmd::Rwrc { source, lambda, gamma_grid, schedule: s, out } => {
            let (source, depth) = source.resolve(128)?;
            Command::Rwrc { source, lambda, gammas: parse_grid(&gamma_grid)?, schedule: schedule(&s, depth)?, out }
        }
        Cmd::Percolate { source, lambda, depths, mc, out } => {
            let (source, depth) = source.resolve(512)?;
            Command::Percolate { source, lambdas: parse_grid(&lambda)?, depths: schedule(&depths, depth)?, mc_trials: mc, out }
        }
        Cmd::Firefight { source, k, gamma_grid, factor, horizon, out } => {
            let horizons = parse_depths(&horizon)?;
            let deepest = horizons.iter().copied().max().unwrap_or(0);
            let (source, _) = source.resolve(2 * deepest + k + 2)?;
            Command::Firefight { source, k, gammas: parse_grid(&gamma_grid)?, factor, horizons, out }
        }
        Cmd::Nathanson { depth, emit_tree, emit_stats } => Command::Nathanson { depth, emit_tree, emit_stats },
        Cmd::Grig { search, beam, emit_marks } => Command::Grig { length: search, beam, emit_marks },
        Cmd::Report { dir, out } => Command::Report { dir, out },
    };
    Ok(ExperimentConfig {
        command,
        seed: cli.seed,
        threads: cli.threads,
        out_dir: cli.out_dir,
        memory_cap: cli.memory_cap,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build(cli).and_then(|cfg| experiment::run(&cfg));
    match result {
        Ok(out) => {
            for f in &out.files {
                println!("{}", f.display());
            }
            println!("{}", out.summary);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(experiment::exit_code(&e) as u8)
        }
    }
}
