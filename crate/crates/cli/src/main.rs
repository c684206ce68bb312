//! Command-line front end: validate a block-chain model, embed it into its
//! exact lifted form, and co-simulate the original against the lifted model.
//!
//! Exit codes: 0 success, 2 parse error, 3 validation error, 4 numerical
//! failure (divergence or non-finite values), 5 precondition error, 1 other
//! (I/O). `TOOL_LOG=debug|info` controls verbosity.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use serde::Serialize;

use blocklift::embed::{classify, embed_chain, model_to_json, reduce};
use blocklift::model::{parse_model, BlockChain};
use blocklift::sim::{compare, simulate_chain, simulate_piti, InputSignal, SimConfig};
use blocklift::Error;

#[derive(Parser)]
#[command(
    name = "blocklift",
    version,
    about = "Exact lifted models of block-chain systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model file and print the per-node interface dimensions.
    Validate {
        /// model file (JSON)
        model: PathBuf,
    },
    /// Embed a model into its exact lifted form and report the dimensions.
    Embed {
        /// model file (JSON)
        model: PathBuf,
        /// write the deduplicated (reduced) model instead of the full one
        #[arg(long)]
        reduce: bool,
        /// write the lifted model as JSON to this path
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate the original chain and the lifted model on the same input
    /// and report the output discrepancy.
    Compare(CompareArgs),
}

#[derive(Args)]
struct CompareArgs {
    /// model file (JSON)
    model: PathBuf,
    /// input signal: `gauss`, `multisine`, or `file:<csv>`
    #[arg(long, default_value = "gauss")]
    input: String,
    /// seed for the held Gaussian input
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// integration step size in seconds
    #[arg(long, default_value_t = 1e-4)]
    dt: f64,
    /// simulated horizon in seconds
    #[arg(long, default_value_t = 5.0)]
    horizon: f64,
    /// initial block states: `all-ones` or `file:<json>` keyed by block label
    #[arg(long, default_value = "all-ones")]
    x0: String,
    /// write the chain trajectory as CSV (t, inputs, outputs, states)
    #[arg(long)]
    out_csv: Option<PathBuf>,
}

/// Echo of everything needed to reproduce a run bit-identically.
#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    model: &'a Path,
    #[serde(skip_serializing_if = "Option::is_none")]
    reduce: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    input: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    x0: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<&'a Path>,
    #[serde(skip_serializing_if = "Option::is_none")]
    out_csv: Option<&'a Path>,
    version: &'a str,
}

impl RunManifest<'_> {
    fn print(&self) {
        println!(
            "manifest: {}",
            serde_json::to_string(self).expect("manifest serialization cannot fail")
        );
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Parse(_) => 2,
        Error::Validation(_) | Error::Dimension(_) => 3,
        Error::NonFinite { .. } => 4,
        Error::Precondition(_) => 5,
        Error::Io(_) => 1,
    }
}

fn read_model(path: &Path) -> Result<BlockChain, Error> {
    let text = fs::read_to_string(path)?;
    parse_model(&text)
}

fn cmd_validate(model_path: &Path) -> Result<(), Error> {
    RunManifest {
        command: "validate",
        model: model_path,
        reduce: None,
        input: None,
        seed: None,
        dt: None,
        horizon: None,
        x0: None,
        out: None,
        out_csv: None,
        version: env!("CARGO_PKG_VERSION"),
    }
    .print();
    let chain = read_model(model_path)?;
    let report = chain.validate()?;
    print!("{report}");
    println!("ok");
    Ok(())
}

fn cmd_embed(model_path: &Path, reduce_out: bool, out: Option<&Path>) -> Result<(), Error> {
    RunManifest {
        command: "embed",
        model: model_path,
        reduce: Some(reduce_out),
        input: None,
        seed: None,
        dt: None,
        horizon: None,
        x0: None,
        out,
        out_csv: None,
        version: env!("CARGO_PKG_VERSION"),
    }
    .print();
    let chain = read_model(model_path)?;
    chain.validate()?;
    let model = embed_chain(&chain)?;
    let class = classify(&model);
    let (reduced, _) = reduce(&model);
    println!("{} -> {}, class={}", model.n_z(), reduced.n_z(), class);
    if let Some(path) = out {
        let exported = if reduce_out { &reduced } else { &model };
        fs::write(path, model_to_json(exported))?;
        log::info!("wrote lifted model to {}", path.display());
    }
    Ok(())
}

fn parse_input_spec(args: &CompareArgs, n_u: usize, steps: usize) -> Result<InputSignal, Error> {
    match args.input.as_str() {
        "gauss" => Ok(InputSignal::WhiteNoise {
            seed: args.seed,
            scale: 1.0,
        }),
        "multisine" => Ok(InputSignal::standard_multisine()),
        other => {
            let path = other.strip_prefix("file:").ok_or_else(|| {
                Error::Precondition(format!(
                    "unknown input spec '{other}' (expected gauss, multisine, or file:<csv>)"
                ))
            })?;
            let text = fs::read_to_string(path)?;
            let mut samples = Vec::new();
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let fields: Result<Vec<f64>, _> =
                    line.split(',').map(|f| f.trim().parse::<f64>()).collect();
                match fields {
                    Ok(vals) => {
                        if vals.len() != n_u {
                            return Err(Error::Dimension(format!(
                                "input file line {}: {} columns, expected {n_u}",
                                lineno + 1,
                                vals.len()
                            )));
                        }
                        samples.push(DVector::from_vec(vals));
                    }
                    // a single non-numeric row is accepted as a header
                    Err(_) if samples.is_empty() && lineno == 0 => continue,
                    Err(e) => {
                        return Err(Error::Parse(format!("input file line {}: {e}", lineno + 1)))
                    }
                }
            }
            if samples.len() < steps + 1 {
                return Err(Error::Dimension(format!(
                    "input file provides {} samples, the grid needs {}",
                    samples.len(),
                    steps + 1
                )));
            }
            Ok(InputSignal::Samples(samples))
        }
    }
}

fn parse_x0(
    spec: &str,
    chain: &BlockChain,
) -> Result<BTreeMap<blocklift::atlas::BlockId, DVector<f64>>, Error> {
    if spec == "all-ones" {
        return Ok(chain.ones_initial_state());
    }
    let path = spec.strip_prefix("file:").ok_or_else(|| {
        Error::Precondition(format!(
            "unknown x0 spec '{spec}' (expected all-ones or file:<json>)"
        ))
    })?;
    let text = fs::read_to_string(path)?;
    let by_label: BTreeMap<String, Vec<f64>> =
        serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut out = BTreeMap::new();
    let mut seen = BTreeMap::new();
    for (id, block) in chain.dynamic_blocks() {
        if seen.insert(block.label.clone(), id).is_some() {
            return Err(Error::Precondition(format!(
                "duplicate dynamic-block label '{}'; labelled initial states are ambiguous",
                block.label
            )));
        }
        let values = by_label.get(&block.label).ok_or_else(|| {
            Error::Precondition(format!("x0 file misses block '{}'", block.label))
        })?;
        if values.len() != block.n_x() {
            return Err(Error::Dimension(format!(
                "x0 for block '{}' has {} entries, expected {}",
                block.label,
                values.len(),
                block.n_x()
            )));
        }
        out.insert(id, DVector::from_vec(values.clone()));
    }
    Ok(out)
}

fn cmd_compare(args: &CompareArgs) -> Result<(), Error> {
    RunManifest {
        command: "compare",
        model: &args.model,
        reduce: None,
        input: Some(&args.input),
        seed: Some(args.seed),
        dt: Some(args.dt),
        horizon: Some(args.horizon),
        x0: Some(&args.x0),
        out: None,
        out_csv: args.out_csv.as_deref(),
        version: env!("CARGO_PKG_VERSION"),
    }
    .print();
    let chain = read_model(&args.model)?;
    chain.validate()?;
    let cfg = SimConfig::new(args.dt, args.horizon)?;
    let input = parse_input_spec(args, chain.n_u, cfg.steps())?;
    let x0 = parse_x0(&args.x0, &chain)?;

    let model = embed_chain(&chain)?;
    let class = classify(&model);
    let (reduced, _) = reduce(&model);
    println!(
        "lifted: {} -> {}, class={}",
        model.n_z(),
        reduced.n_z(),
        class
    );
    log::info!("simulating {} steps at dt={}", cfg.steps(), cfg.dt);

    let z0 = reduced.atlas.lift(&x0)?;
    let chain_traj = simulate_chain(&chain, &x0, &input, &cfg)?;
    let lifted_traj = simulate_piti(&reduced, &z0, &input, &cfg)?;
    let report = compare(&chain_traj, &lifted_traj)?;

    println!("max_abs = {:.6e}", report.max_abs);
    println!("rms = {:.6e}", report.rms);
    for (i, v) in report.per_channel.iter().enumerate() {
        println!("channel {} max_abs = {:.6e}", i + 1, v);
    }
    if let Some(path) = &args.out_csv {
        let mut file = fs::File::create(path)?;
        chain_traj.write_csv(&mut file)?;
        log::info!("wrote chain trajectory to {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("TOOL_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate { model } => cmd_validate(model),
        Command::Embed { model, reduce, out } => cmd_embed(model, *reduce, out.as_deref()),
        Command::Compare(args) => cmd_compare(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
