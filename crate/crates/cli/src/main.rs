use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use falg_cli::{
    cmd_check_identity, cmd_discretize, cmd_kernel, cmd_norm, cmd_surface, render, Outcome,
    RunConfig, EXIT_USAGE,
};

/// Experiments with lattice-linear-algebraic expressions and finite models
/// of free Banach f-algebras.
#[derive(Parser)]
#[command(name = "falg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test whether an expression vanishes on the reals and in random f-algebras.
    CheckIdentity(Params),
    /// Classify an expression as nonzero on the dual ball, a ball-kernel witness or an identity.
    Kernel(Params),
    /// Write CSV surfaces of the cylinder model (n = 2) into the --out directory.
    Surface(Params),
    /// Bound the free norm of an expression from below and above.
    Norm(Params),
    /// Run the level-set discretizer and verify its error bounds.
    Discretize(Params),
}

#[derive(Args)]
struct Params {
    /// Expression text; repeat for several expressions.
    #[arg(long = "expr")]
    exprs: Vec<String>,
    /// Generator images, e.g. "v=e1;w=e2" or "v=[0.5,-1]".
    #[arg(long)]
    gens: Option<String>,
    /// Dimension of l1^n.
    #[arg(long)]
    n: Option<usize>,
    /// Number of radial levels of the cylinder grid.
    #[arg(long, default_value_t = 33)]
    grid_r: usize,
    /// Values per free axis on each face of the sphere grid.
    #[arg(long, default_value_t = 8)]
    grid_sphere: usize,
    /// Discretizer meshes, comma separated or repeated.
    #[arg(long = "delta", value_delimiter = ',')]
    deltas: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Search iterations for norm estimation.
    #[arg(long, default_value_t = 10_000)]
    iters: usize,
    /// Report file, or the output directory for `surface`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON input with explicit functions for `discretize`.
    #[arg(long)]
    input: Option<PathBuf>,
}

impl From<Params> for RunConfig {
    fn from(p: Params) -> Self {
        RunConfig {
            exprs: p.exprs,
            gens: p.gens,
            n: p.n,
            grid_r: p.grid_r,
            grid_sphere: p.grid_sphere,
            deltas: p.deltas,
            seed: p.seed,
            tol: p.tol,
            iters: p.iters,
            out: p.out,
            input: p.input,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let is_surface = matches!(cli.command, Command::Surface(_));
    let (run, params): (fn(&RunConfig) -> anyhow::Result<Outcome>, Params) = match cli.command {
        Command::CheckIdentity(p) => (cmd_check_identity, p),
        Command::Kernel(p) => (cmd_kernel, p),
        Command::Surface(p) => (cmd_surface, p),
        Command::Norm(p) => (cmd_norm, p),
        Command::Discretize(p) => (cmd_discretize, p),
    };
    let cfg = RunConfig::from(params);
    let outcome = match run(&cfg) {
        Ok(o) => o,
        Err(err) => {
            eprintln!("error: {err:#}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let text = render(&outcome.report);
    match cfg.out.as_ref().filter(|_| !is_surface) {
        Some(path) => {
            if let Err(err) = fs::write(path, &text) {
                eprintln!("error: cannot write {}: {err}", path.display());
                return ExitCode::from(EXIT_USAGE as u8);
            }
        }
        None => print!("{text}"),
    }
    eprintln!("{}", outcome.summary);
    ExitCode::from(outcome.code as u8)
}
