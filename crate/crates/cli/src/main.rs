mod config;
mod output;
mod study;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;
use xnyfem::elasticity::solve_constrained;

use config::RawConfig;
use output::write_atomic;
use study::Options;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] xnyfem::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) if e.is_input_error() => 2,
            _ => 3,
        }
    }
}

#[derive(Parser)]
#[command(name = "xnyfem", version, about = "Transition-element patch tests, convergence and singular studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the study described by a JSON config.
    Run {
        config: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Output directory; overrides the config's `out`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Patch studies: run all 6272 combinations.
        #[arg(long)]
        exhaustive: bool,
        /// Write the stiffness of the primary space as `matrix.mtx`.
        #[arg(long)]
        dump_matrix: bool,
        /// Write shape-function samples on a GRID × GRID reference grid.
        #[arg(long, value_name = "GRID")]
        dump_shapes: Option<usize>,
    },
}

struct RunArgs {
    config: PathBuf,
    out: Option<PathBuf>,
    exhaustive: bool,
    dump_matrix: bool,
    dump_shapes: Option<usize>,
}

fn run(args: RunArgs) -> Result<PathBuf, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("cannot read '{}': {e}", args.config.display())))?;
    let mut cfg = RawConfig::parse(&text)?.resolve()?;
    if let Some(out) = args.out {
        cfg.out = out;
    }
    if let Some(g) = args.dump_shapes {
        if g < 2 {
            return Err(CliError::Config("--dump-shapes needs a grid of at least 2".into()));
        }
    }
    let base = args.config.parent().map(Path::to_path_buf).unwrap_or_default();
    let start = Instant::now();
    let opts = Options {
        exhaustive: args.exhaustive,
        want_primary: args.dump_matrix || args.dump_shapes.is_some() || cfg.field_grid > 0,
    };
    let res = study::run(&cfg, &base, &opts)?;
    let elapsed = start.elapsed().as_secs_f64();

    std::fs::create_dir_all(&cfg.out)?;
    let out = cfg.out.clone();
    write_atomic(&out.join("result.csv"), output::result_csv(&res.rows).as_bytes())?;
    if let Some((space, sys)) = &res.primary {
        if args.dump_matrix {
            let mut buf = Vec::new();
            sys.k.write_matrix_market(&mut buf)?;
            write_atomic(&out.join("matrix.mtx"), &buf)?;
        }
        if cfg.field_grid > 0 {
            let (u, _) = solve_constrained(sys)?;
            let s = output::solution_csv(space, &u, &cfg.material, cfg.field_grid)?;
            write_atomic(&out.join("field_solution.csv"), s.as_bytes())?;
            if let Some(ex) = &res.exact {
                let s = output::exact_field_csv(space, ex.as_ref(), cfg.field_grid);
                write_atomic(&out.join("field_exact.csv"), s.as_bytes())?;
            }
        }
    }
    if let Some(g) = args.dump_shapes {
        for (i, set) in res.shapes.iter().enumerate() {
            write_atomic(&out.join(format!("shapes_{i}.csv")), output::shapes_csv(set, g).as_bytes())?;
        }
    }
    let meta = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "exhaustive": args.exhaustive,
        "elapsed_seconds": elapsed,
        "rows": res.rows.len(),
        "slopes": res.fits,
        "summary": res.extra,
    });
    let text = serde_json::to_string_pretty(&meta).expect("meta is plain data");
    write_atomic(&out.join("meta.json"), text.as_bytes())?;
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Run { config, jobs, out, exhaustive, dump_matrix, dump_shapes } = cli.command;
    if let Some(n) = jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("xnyfem: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(RunArgs { config, out, exhaustive, dump_matrix, dump_shapes }) {
        Ok(dir) => {
            eprintln!("xnyfem: wrote {}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("xnyfem: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
