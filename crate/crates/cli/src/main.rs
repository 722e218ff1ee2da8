use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

mod commands;
mod config;

use commands::Output;
use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "rhoscale",
    version,
    about = "Scale calculus, transferrable formulas and regularity verdicts on eps-grids"
)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for JSON/CSV results of the grid commands.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Epsilon ladder `J_MIN..J_MAX` (or `BASE:J_MIN..J_MAX`), for every dimension.
    #[arg(long, global = true)]
    ladder: Option<String>,
    /// Threshold overrides, e.g. `k_reg=10,window=4`.
    #[arg(long, global = true)]
    thresholds: Option<String>,
    /// Cutoff profile: loglog, sqrtlog, const:M or fixed:R.
    #[arg(long, global = true)]
    profile: Option<String>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify a power-log scale in rho, e.g. "3*rho^(-2)" or "L^(-1)".
    Scale { expr: String },
    /// Check that formulas are transferrable.
    Check {
        /// One formula per line.
        file: Option<PathBuf>,
        #[arg(long, short)]
        formula: Option<String>,
    },
    /// Compare standard truth with eventual truth of the star-transform.
    Transfer {
        file: Option<PathBuf>,
        #[arg(long, short)]
        formula: Option<String>,
        /// Structure as JSON; defaults to the built-in reference structure.
        #[arg(long)]
        structure: Option<PathBuf>,
    },
    /// Evaluate formulas at one eps, or eventually along the ladder.
    Eval {
        file: Option<PathBuf>,
        #[arg(long, short)]
        formula: Option<String>,
        #[arg(long)]
        structure: Option<PathBuf>,
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Microlocal regularity of a model at (x0, xi0).
    Mlreg {
        model: String,
        #[arg(long, allow_hyphen_values = true)]
        x0: String,
        #[arg(long, allow_hyphen_values = true)]
        xi0: String,
    },
    /// Wavefront scan over an x-grid and a direction grid.
    Wavefront {
        model: String,
        /// Axis `LO:HI:N`, used for every coordinate.
        #[arg(long, allow_hyphen_values = true)]
        axis: Option<String>,
        /// Directions per half-turn (1D always uses +1 and -1).
        #[arg(long, default_value_t = 8)]
        directions: usize,
    },
    /// Grid-sum partition of unity on a box.
    Gridsum {
        #[arg(long, allow_hyphen_values = true)]
        x0: String,
        #[arg(long, default_value_t = 0.5)]
        r: f64,
    },
    /// Derivative growth test at a point.
    Minfty {
        model: String,
        #[arg(long, allow_hyphen_values = true)]
        x0: String,
    },
}

fn formulas(file: Option<PathBuf>, formula: Option<String>) -> Result<Vec<String>> {
    match (file, formula) {
        (_, Some(f)) => Ok(vec![f]),
        (Some(p), None) => commands::read_formulas(&p),
        (None, None) => anyhow::bail!("give a formula file or --formula"),
    }
}

fn build_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(l) = &cli.ladder {
        let p = config::parse_ladder(l)?;
        cfg.ladder = p;
        cfg.ladder_2d = p;
    }
    if let Some(t) = &cli.thresholds {
        config::apply_thresholds(&mut cfg.thresholds, t)?;
    }
    if let Some(p) = &cli.profile {
        cfg.engine.profile = config::parse_profile(p)?;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn axis_grid(axis: &str, dim: usize) -> Result<Vec<Vec<f64>>> {
    let t = config::parse_axis(axis)?;
    Ok(if dim == 1 {
        t.iter().map(|&a| vec![a]).collect()
    } else {
        t.iter().flat_map(|&a| t.iter().map(move |&b| vec![a, b])).collect()
    })
}

fn run(cli: Cli) -> Result<Output> {
    let cfg = build_config(&cli)?;
    match cli.cmd {
        Cmd::Scale { expr } => commands::scale(&cfg, &expr),
        Cmd::Check { file, formula } => commands::check(&formulas(file, formula)?),
        Cmd::Transfer { file, formula, structure } => {
            let s = commands::read_structure(structure.as_deref())?;
            commands::transfer(&cfg, &formulas(file, formula)?, &s)
        }
        Cmd::Eval { file, formula, structure, eps } => {
            let s = commands::read_structure(structure.as_deref())?;
            commands::eval(&cfg, &formulas(file, formula)?, &s, eps)
        }
        Cmd::Mlreg { model, x0, xi0 } => {
            commands::mlreg(&cfg, &model, &config::parse_point(&x0)?, &config::parse_point(&xi0)?)
        }
        Cmd::Wavefront { model, axis, directions } => {
            let dim = rhoscale_engine::Model::from_id(&model)?.dim();
            let xs = axis.map(|a| axis_grid(&a, dim)).transpose()?;
            commands::wavefront(&cfg, &model, xs, directions)
        }
        Cmd::Gridsum { x0, r } => commands::gridsum(&cfg, &config::parse_point(&x0)?, r, cfg.engine.profile),
        Cmd::Minfty { model, x0 } => commands::minfty(&cfg, &model, &config::parse_point(&x0)?),
    }
    .map(|o| write_files(o, &cfg))?
}

/// Grid commands write `<name>.json` and `<name>.csv` under the output
/// directory and print the summary; the others print JSON.
fn write_files(o: Output, cfg: &RunConfig) -> Result<Output> {
    let Some(rows) = &o.csv else { return Ok(o) };
    std::fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let jp = cfg.out.join(format!("{}.json", o.name));
    let mut f = File::create(&jp).with_context(|| format!("writing {}", jp.display()))?;
    serde_json::to_writer_pretty(&mut f, &o.json)?;
    writeln!(f)?;
    let cp = cfg.out.join(format!("{}.csv", o.name));
    let mut w = csv::Writer::from_path(&cp).with_context(|| format!("writing {}", cp.display()))?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(o)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(o) => {
            let text = if o.csv.is_some() {
                o.summary.clone()
            } else {
                eprintln!("{}", o.summary);
                serde_json::to_string_pretty(&o.json).expect("JSON values serialize")
            };
            // a closed pipe (e.g. `| head`) is not an error
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            if o.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
