use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand, ValueEnum};

mod commands;
mod render;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "lspine", version, about = "Marked graphs of finite groups and the spine of their outer space")]
pub struct Cli {
    /// Worker threads; reports do not depend on this.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Where to write the witness when a check fails.
    #[arg(long, global = true, default_value = "lspine-witness.json")]
    pub witness: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Norm of a reduced marked graph, directly and from its star graph.
    Norm { graph: PathBuf },
    /// Local star graphs with absolute values and component counts.
    Stargraph {
        graph: PathBuf,
        /// Print Graphviz DOT instead of a report.
        #[arg(long)]
        dot: bool,
    },
    /// Ideal edges with their absolute values and reductivity.
    IdealEdges {
        graph: PathBuf,
        #[arg(long)]
        vertex: Option<usize>,
        #[arg(long)]
        max_size: Option<usize>,
    },
    /// Lists Whitehead moves, or applies one by index.
    Move {
        graph: PathBuf,
        #[arg(long, value_name = "INDEX")]
        apply: Option<usize>,
        /// Write the resulting marked graph here.
        #[arg(long, requires = "apply")]
        output: Option<PathBuf>,
    },
    /// Explores the ball of briar patches of norm at most the radius.
    Ball {
        graph: PathBuf,
        #[arg(long)]
        radius: u64,
        /// Patch budget; also settable through LSPINE_BALL_BUDGET.
        #[arg(long)]
        budget: Option<usize>,
        /// Also compute the patches whose stars meet the ball.
        #[arg(long)]
        with_c: bool,
        #[arg(long)]
        dot: bool,
    },
    /// Runs the lemma oracles on random multigraphs and random patches.
    VerifyLemmas {
        #[arg(long, default_value = "all")]
        lemma: String,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Signatures as `orders:rank`, for example `2,2:1`.
        #[arg(long, num_args = 1.., default_values = ["2,2:1", "2,2,2:0", "2,3:2", "2,2,2,2:0", "2:2"])]
        signatures: Vec<String>,
    },
    /// Pushes a standard path out of the ball of radius k, keeping its endpoints.
    Push {
        #[arg(long, required_unless_present = "generate")]
        input: Option<PathBuf>,
        /// Generate a random valley path through the ball explored from this graph.
        #[arg(long, conflicts_with = "input")]
        generate: Option<PathBuf>,
        #[arg(long)]
        radius: u64,
        #[arg(long, action = ArgAction::Set, default_value_t = true)]
        emit_certificate: bool,
        #[arg(long, default_value = "certificate.json")]
        certificate: PathBuf,
        /// Write the pushed path here as JSON.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Pushes a loop based on the ray out of the ball of radius n.
    PushLoop {
        #[arg(long = "loop", required_unless_present = "generate")]
        loop_path: Option<PathBuf>,
        /// Generate a loop at the first ray patch above N(k), with the ray started here.
        #[arg(long, conflicts_with = "loop_path")]
        generate: Option<PathBuf>,
        /// Start of the ray when a loop file is given; defaults to the seed graph.
        #[arg(long, conflicts_with = "generate")]
        start: Option<PathBuf>,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 12)]
        ray_length: usize,
        #[arg(long, action = ArgAction::Set, default_value_t = true)]
        emit_certificate: bool,
        #[arg(long, default_value = "certificate.json")]
        certificate: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Greedy ray of increasing norm from a reduced marked graph.
    Ray {
        graph: PathBuf,
        #[arg(long, default_value_t = 8)]
        length: usize,
        /// Write the ray segment between two indices as a path file.
        #[arg(long, value_name = "A:B", requires = "output")]
        emit_path: Option<String>,
        /// Write a loop at this ray index as a path file.
        #[arg(long, value_name = "INDEX", requires = "output", conflicts_with = "emit_path")]
        emit_loop: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Checks the relation catalog for Out(A1 * A2 * Z).
    VerifyPresentation {
        /// Order of a cyclic group, or a group table file.
        #[arg(long)]
        a1: String,
        #[arg(long)]
        a2: String,
    },
    /// Number of ends and spine dimension for n finite factors and free rank k.
    Classify {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| commands::run(&cli)) {
        Ok(out) => {
            if let Some(text) = &out.raw {
                print!("{text}");
            } else {
                match cli.format {
                    Format::Json => println!("{}", serde_json::to_string_pretty(&out.report).expect("serializable")),
                    Format::Table => print!("{}", render::render(&out.report)),
                }
            }
            match out.witness {
                None => ExitCode::SUCCESS,
                Some(w) => {
                    let text = serde_json::to_string_pretty(&w).expect("serializable");
                    if let Err(e) = std::fs::write(&cli.witness, text + "\n") {
                        eprintln!("error: could not write witness to {}: {e}", cli.witness.display());
                    } else {
                        eprintln!("violation: witness written to {}", cli.witness.display());
                    }
                    ExitCode::from(1)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
