//! Command-line surface: codebook construction and inspection, rate
//! tables, SDE convergence experiments and cubature estimates.
//!
//! Exit codes: 0 success, 2 usage error, 3 numerical failure, 4 I/O.

use clap::{Args, Parser, Subcommand};
use fquant::codebook::{build_product_codebook, ProductCodebook};
use fquant::error::FqError;
use fquant::experiment::{
    cubature_estimate, pathwise_convergence_experiment, rate_holder, rate_quadratic, Table,
};
use fquant::qsde::{lookup_functional, lookup_spec};
use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fq", version, about = "Functional quantization of Brownian motion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or inspect product codebooks
    Codebook {
        #[command(subcommand)]
        action: CodebookCmd,
    },
    /// Convergence-rate tables
    Rate {
        #[command(subcommand)]
        action: RateCmd,
    },
    /// SDE experiments
    Sde {
        #[command(subcommand)]
        action: SdeCmd,
    },
    /// Weighted-ensemble cubature estimate of a path functional
    Cubature(CubatureArgs),
}

#[derive(Subcommand)]
enum CodebookCmd {
    /// Construct a codebook and write it as JSON
    Build(CodebookBuildArgs),
    /// Summarize a stored codebook JSON file
    Show {
        /// codebook JSON file
        file: PathBuf,
    },
}

#[derive(Args)]
struct CodebookBuildArgs {
    /// quantization budget (single value)
    #[arg(long = "N")]
    n: usize,
    /// Brownian dimension
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// time horizon
    #[arg(long = "T", default_value_t = 1.0)]
    horizon: f64,
    /// output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum RateCmd {
    /// Exact quadratic-distortion rate table
    Quadratic(RateQuadraticArgs),
    /// Monte Carlo Hölder / rough-path convergence table
    Holder(RateHolderArgs),
}

#[derive(Args)]
struct RateQuadraticArgs {
    /// budgets, comma-separated
    #[arg(long = "N", value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// time horizon
    #[arg(long = "T", default_value_t = 1.0)]
    horizon: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Args)]
struct RateHolderArgs {
    /// budgets, comma-separated
    #[arg(long = "N", value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// Brownian dimension
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// time horizon
    #[arg(long = "T", default_value_t = 1.0)]
    horizon: f64,
    /// Hölder parameter, 2 < q < 3
    #[arg(long, default_value_t = 2.5)]
    q: f64,
    /// grid size
    #[arg(long, default_value_t = 4096)]
    grid: usize,
    /// Monte Carlo path count
    #[arg(long, default_value_t = 200)]
    paths: usize,
    /// RNG seed (required: the experiment is stochastic)
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Subcommand)]
enum SdeCmd {
    /// Pathwise rough-path convergence of the quantized ensemble
    Converge(SdeConvergeArgs),
}

#[derive(Args)]
struct SdeConvergeArgs {
    /// budgets, comma-separated
    #[arg(long = "N", value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// registered SDE spec name
    #[arg(long, default_value = "gbm")]
    spec: String,
    /// time horizon
    #[arg(long = "T", default_value_t = 1.0)]
    horizon: f64,
    /// Hölder parameter, 2 < q < 3
    #[arg(long, default_value_t = 2.5)]
    q: f64,
    /// grid size
    #[arg(long, default_value_t = 1024)]
    grid: usize,
    /// Monte Carlo path count
    #[arg(long, default_value_t = 200)]
    paths: usize,
    /// RNG seed (required: the experiment is stochastic)
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Args)]
struct CubatureArgs {
    /// quantization budget (single value)
    #[arg(long = "N")]
    n: usize,
    /// registered SDE spec name
    #[arg(long, default_value = "gbm")]
    spec: String,
    /// registered path functional name
    #[arg(long, default_value = "terminal")]
    functional: String,
    /// time horizon
    #[arg(long = "T", default_value_t = 1.0)]
    horizon: f64,
    /// ODE grid size
    #[arg(long, default_value_t = 1024)]
    grid: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

fn exit_code_for(err: &FqError) -> u8 {
    match err {
        FqError::Io(_) | FqError::Json(_) => 4,
        FqError::Parse(_) | FqError::Domain(_) => 2,
        _ => 3,
    }
}

fn invocation() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

fn emit_table(table: &Table, out: Option<&PathBuf>, format: OutputFormat) -> fquant::Result<()> {
    let comments = vec![
        format!("invocation: {}", invocation()),
        format!("fquant version {}", fquant::VERSION),
    ];
    let body = match format {
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            table.write_csv(&mut buf, &comments)?;
            String::from_utf8(buf).expect("csv is utf-8")
        }
        OutputFormat::Json => {
            let rows: Vec<serde_json::Value> = table
                .rows
                .iter()
                .map(|row| {
                    table
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(c, v)| (c.clone(), serde_json::json!(v)))
                        .collect::<serde_json::Map<String, serde_json::Value>>()
                        .into()
                })
                .collect();
            let doc = serde_json::json!({
                "invocation": invocation(),
                "version": fquant::VERSION,
                "rows": rows,
            });
            serde_json::to_string_pretty(&doc).expect("table serializes")
        }
    };
    write_output(&body, out)
}

fn write_output(body: &str, out: Option<&PathBuf>) -> fquant::Result<()> {
    match out {
        Some(path) => {
            let mut f = File::create(path)
                .map_err(|e| FqError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
            f.write_all(body.as_bytes())?;
            if !body.ends_with('\n') {
                f.write_all(b"\n")?;
            }
        }
        None => {
            print!("{body}");
            if !body.ends_with('\n') {
                println!();
            }
        }
    }
    Ok(())
}

fn summarize(cb: &ProductCodebook) {
    println!(
        "codebook: d = {}, T = {}, budget {}, size {}",
        cb.dim,
        cb.horizon,
        cb.budget,
        cb.size()
    );
    println!("allocation: {:?}", cb.allocation.levels);
    println!("distortion: {:.8}", fquant::codebook::codebook_distortion(cb));
}

fn run() -> fquant::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Codebook { action } => match action {
            CodebookCmd::Build(args) => {
                let cb = build_product_codebook(args.n, args.d, args.horizon)?;
                summarize(&cb);
                let json = serde_json::to_string_pretty(&cb.to_json()).expect("codebook serializes");
                if let Some(out) = &args.out {
                    write_output(&json, Some(out))?;
                    println!("written to {}", out.display());
                } else {
                    println!("{json}");
                }
            }
            CodebookCmd::Show { file } => {
                let text = std::fs::read_to_string(&file).map_err(|e| {
                    FqError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", file.display())))
                })?;
                let value: serde_json::Value = serde_json::from_str(&text)?;
                let cb = ProductCodebook::from_json(&value)?;
                summarize(&cb);
            }
        },
        Command::Rate { action } => match action {
            RateCmd::Quadratic(args) => {
                let table = rate_quadratic(&args.n, args.horizon)?;
                emit_table(&table, args.out.as_ref(), args.format)?;
            }
            RateCmd::Holder(args) => {
                let table = rate_holder(
                    &args.n,
                    args.d,
                    args.horizon,
                    args.q,
                    args.grid,
                    args.paths,
                    args.seed,
                )?;
                emit_table(&table, args.out.as_ref(), args.format)?;
            }
        },
        Command::Sde { action } => match action {
            SdeCmd::Converge(args) => {
                let spec = lookup_spec(&args.spec)?;
                let table = pathwise_convergence_experiment(
                    &spec,
                    args.q,
                    &args.n,
                    args.horizon,
                    args.grid,
                    args.paths,
                    args.seed,
                )?;
                emit_table(&table, args.out.as_ref(), args.format)?;
            }
        },
        Command::Cubature(args) => {
            let spec = lookup_spec(&args.spec)?;
            let functional = lookup_functional(&args.functional)?;
            let estimate =
                cubature_estimate(&spec, functional, args.n, args.horizon, args.grid)?;
            let doc = serde_json::json!({
                "estimate": estimate,
                "N": args.n,
                "functional": args.functional,
                "spec": args.spec,
                "T": args.horizon,
                "grid": args.grid,
            });
            write_output(
                &serde_json::to_string_pretty(&doc).expect("doc serializes"),
                args.out.as_ref(),
            )?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
