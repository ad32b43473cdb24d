mod commands;
mod input;
mod report;

use clap::{Parser, Subcommand};
use commands::{Context, Outcome, Suite};
use input::{parse_real, InputError, Inputs};
use propinquity_core::io::round12;
use propinquity_core::propinquity::{default_grid, TunnelFamilySpec};
use report::{ErrorInfo, Report, Settings, Status};
use serde_json::Value;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "propinquity-lab", version, about = "Tunnels, Monge-Kantorovich distances and propinquity bounds")]
struct Cli {
    /// Tolerance for the inequality checks made by the CLI itself.
    #[arg(long, global = true, default_value_t = 1e-7)]
    tolerance: f64,
    #[arg(long, global = true, default_value_t = 2024)]
    seed: u64,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true, env = "PROPINQUITY_LAB_WORKERS")]
    workers: Option<usize>,
    /// Bridge ε values, e.g. `1,1/2,1/4`.
    #[arg(long, global = true, value_delimiter = ',', value_parser = parse_real)]
    epsilon_grid: Option<Vec<f64>>,
    #[arg(long, global = true, default_value_t = 2)]
    composition_depth: usize,
    /// Largest `|X|·|Y|` for the correspondence enumeration.
    #[arg(long, global = true, default_value_t = 12)]
    size_cap: usize,
    /// Report file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an algebra, space, Lip-norm, states or tunnel.
    Validate { file: PathBuf },
    /// Monge-Kantorovich distance between two points or named states.
    MkDist {
        file: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
    },
    /// Bridge tunnel between two endpoints.
    Tunnel {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_parser = parse_real)]
        epsilon: f64,
        /// Matched blocks, e.g. `0:0,1:1`.
        #[arg(long)]
        link: Option<String>,
    },
    /// ε-composition of two tunnels.
    Compose {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, value_parser = parse_real)]
        epsilon: f64,
    },
    /// Upper bound on the propinquity with its witness tunnel.
    Propinquity { a: PathBuf, b: PathBuf },
    /// Classical Gromov-Hausdorff distance by correspondence enumeration.
    Gh { x: PathBuf, y: PathBuf },
    /// Acceptance criteria over a fixture set.
    Audit {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        /// `default`, or a comma-separated list of space files.
        #[arg(long, default_value = "default")]
        fixtures: String,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::MkDist { .. } => "mk-dist",
            Command::Tunnel { .. } => "tunnel",
            Command::Compose { .. } => "compose",
            Command::Propinquity { .. } => "propinquity",
            Command::Gh { .. } => "gh",
            Command::Audit { .. } => "audit",
        }
    }
}

fn run(cmd: &Command, ctx: &mut Context) -> Result<Outcome, InputError> {
    match cmd {
        Command::Validate { file } => commands::validate(ctx, file),
        Command::MkDist { file, from, to } => commands::mk_dist(ctx, file, from, to),
        Command::Tunnel { a, b, epsilon, link } => commands::tunnel(ctx, a, b, *epsilon, link.as_deref()),
        Command::Compose { first, second, epsilon } => commands::compose(ctx, first, second, *epsilon),
        Command::Propinquity { a, b } => commands::propinquity(ctx, a, b),
        Command::Gh { x, y } => commands::gh(ctx, x, y),
        Command::Audit { suite, fixtures } => commands::audit(ctx, *suite, fixtures),
    }
}

/// Rounds every non-integer number so reports do not depend on the last
/// bits of a solve.
fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(round12).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(xs) => xs.iter_mut().for_each(round_numbers),
        Value::Object(m) => m.values_mut().for_each(round_numbers),
        _ => {}
    }
}

fn main() {
    let cli = Cli::parse();
    let grid = cli.epsilon_grid.clone().unwrap_or_else(|| default_grid(7));
    let settings = Settings {
        tolerance: cli.tolerance,
        epsilon_grid: grid.clone(),
        composition_depth: cli.composition_depth,
        size_cap: cli.size_cap,
    };
    let spec = TunnelFamilySpec {
        epsilon_grid: grid,
        max_composition_depth: cli.composition_depth,
        closure: cli.composition_depth >= 2,
        ..TunnelFamilySpec::default()
    };
    let mut ctx =
        Context { seed: cli.seed, tolerance: cli.tolerance, spec, size_cap: cli.size_cap, inputs: Inputs::default() };

    let outcome = if !(cli.tolerance.is_finite() && cli.tolerance > 0.0) {
        Err(InputError::new("--tolerance must be positive"))
    } else if cli.composition_depth == 0 {
        Err(InputError::new("--composition-depth must be at least 1"))
    } else {
        let mut pool = rayon::ThreadPoolBuilder::new();
        if let Some(w) = cli.workers.filter(|&w| w > 0) {
            pool = pool.num_threads(w);
        }
        match pool.build() {
            Ok(pool) => pool.install(|| run(&cli.command, &mut ctx)),
            Err(e) => Err(InputError::new(format!("cannot start workers: {e}"))),
        }
    };

    let (status, result, error) = match outcome {
        Ok(Outcome { status, mut result }) => {
            round_numbers(&mut result);
            (status, result, None)
        }
        Err(e) => {
            eprintln!("error: {e}");
            let info = ErrorInfo {
                message: e.message.clone(),
                path: e.path.as_ref().map(|p| p.display().to_string()),
                line: e.line,
                column: e.column,
            };
            (Status::Error, Value::Null, Some(info))
        }
    };
    let report = Report {
        schema: report::SCHEMA,
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command.name().to_string(),
        seed: cli.seed,
        settings,
        inputs: std::mem::take(&mut ctx.inputs.digests),
        status,
        result,
        error,
    };
    let text = report.render();
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                std::process::exit(2);
            }
        }
        None => print!("{text}"),
    }
    std::process::exit(status.exit_code());
}
