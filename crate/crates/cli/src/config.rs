//! Command-line and config-file parsing.
//!
//! Config files are flat `key = value` text; `#` starts a comment. Flags
//! override file values. Every field is validated here so errors name the
//! offending field.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ssbmeasure::experiments::{ExperimentConfig, ExperimentKind, ReversalPolicy, DEFAULT_TRIALS};
use ssbmeasure::measurement::MeasurementModel;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "ssbmeasure", version, about = "Projective vs unitary measurement simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the operator identities over random amplitude pairs.
    Verify(VerifyArgs),
    /// Run an experiment and write the result document.
    Simulate(SimulateArgs),
    /// Reconstruct a state from a counts table CSV.
    Tomography(TomographyArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub tol: Option<String>,
    #[arg(long)]
    pub samples: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Args)]
pub struct SimulateArgs {
    /// Flat key=value file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub experiment: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub reversal: Option<String>,
    #[arg(long)]
    pub trials: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Shots per Pauli setting (0 disables tomography).
    #[arg(long)]
    pub tomography_shots: Option<String>,
    /// Reconstruct from exact expectations instead of sampled counts.
    #[arg(long)]
    pub exact: bool,
    /// Also run the other measurement model and attach a comparison.
    #[arg(long)]
    pub compare: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `json` (result document) or `csv` (tomography counts table).
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Args)]
pub struct TomographyArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub target: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    pub compare: bool,
    pub output_path: PathBuf,
    pub format: OutputFormat,
}

const KEYS: [&str; 10] = [
    "experiment",
    "model",
    "reversal",
    "trials",
    "seed",
    "tomography_shots",
    "exact",
    "compare",
    "out",
    "format",
];

/// Parses a flat `key = value` config file.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config file {}: {e}", path.display())))?;
    parse_config_text(&text)
}

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("config line {}: expected key = value", n + 1)))?;
        let k = k.trim().replace('-', "_");
        if !KEYS.contains(&k.as_str()) {
            return Err(CliError::Config(format!("config line {}: unknown key `{k}`", n + 1)));
        }
        map.insert(k, v.trim().to_string());
    }
    Ok(map)
}

fn parse_u64(field: &str, v: &str) -> Result<u64, CliError> {
    v.replace('_', "")
        .parse::<u64>()
        .or_else(|_| {
            // Accept integral scientific notation such as 1e5.
            v.parse::<f64>()
                .ok()
                .filter(|x| x.fract() == 0.0 && *x >= 0.0 && *x < 1.8e19)
                .map(|x| x as u64)
                .ok_or(())
        })
        .map_err(|_| CliError::field(field, format!("`{v}` is not a non-negative integer")))
}

fn parse_bool(field: &str, v: &str) -> Result<bool, CliError> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(CliError::field(field, format!("`{v}` is not a boolean"))),
    }
}

/// Merges flags over an optional config file and validates every field.
pub fn parse_config(args: &SimulateArgs) -> Result<RunConfig, CliError> {
    let mut file = match &args.config {
        Some(p) => read_config_file(p)?,
        None => BTreeMap::new(),
    };
    let mut pick = |key: &str, flag: &Option<String>| flag.clone().or_else(|| file.remove(key));

    let experiment = pick("experiment", &args.experiment)
        .ok_or_else(|| CliError::field("experiment", "missing"))?
        .parse::<ExperimentKind>()
        .map_err(|e| CliError::field("experiment", e))?;
    let model = pick("model", &args.model)
        .ok_or_else(|| CliError::field("model", "missing"))?
        .parse::<MeasurementModel>()
        .map_err(|e| CliError::field("model", e))?;
    let reversal_policy = pick("reversal", &args.reversal)
        .ok_or_else(|| CliError::field("reversal", "missing"))?
        .parse::<ReversalPolicy>()
        .map_err(|e| CliError::field("reversal", e))?;
    let trials = match pick("trials", &args.trials) {
        Some(v) => parse_u64("trials", &v)?,
        None => DEFAULT_TRIALS,
    };
    let seed = match pick("seed", &args.seed) {
        Some(v) => parse_u64("seed", &v)?,
        None => return Err(CliError::field("seed", "seed is mandatory for reproducibility")),
    };
    let tomography_shots = match pick("tomography_shots", &args.tomography_shots) {
        Some(v) => parse_u64("tomography_shots", &v)?,
        None => 0,
    };
    let exact_file = pick("exact", &None).map(|v| parse_bool("exact", &v)).transpose()?;
    let compare_file = pick("compare", &None).map(|v| parse_bool("compare", &v)).transpose()?;
    let format = match pick("format", &args.format).as_deref() {
        None | Some("json") => OutputFormat::Json,
        Some("csv") => OutputFormat::Csv,
        Some(other) => return Err(CliError::field("format", format!("`{other}` (expected json or csv)"))),
    };
    let output_path = args
        .out
        .clone()
        .or_else(|| file.remove("out").map(PathBuf::from))
        .ok_or_else(|| CliError::field("out", "missing"))?;

    let experiment = ExperimentConfig {
        experiment,
        model,
        trials,
        seed,
        reversal_policy,
        tomography_shots,
        tomography_exact: args.exact || exact_file.unwrap_or(false),
    };
    experiment
        .validate()
        .map_err(|e| CliError::field("trials", e))?;
    if format == OutputFormat::Csv && (tomography_shots == 0 || experiment.tomography_exact) {
        return Err(CliError::field(
            "format",
            "csv output is the tomography counts table and needs tomography_shots > 0 without --exact",
        ));
    }
    Ok(RunConfig {
        experiment,
        compare: args.compare || compare_file.unwrap_or(false),
        output_path,
        format,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> SimulateArgs {
        SimulateArgs {
            experiment: Some("bell-reversal".into()),
            model: Some("unitary-ssb".into()),
            reversal: Some("conditioned".into()),
            seed: Some("42".into()),
            out: Some("r.json".into()),
            ..Default::default()
        }
    }

    #[test]
    fn flags_only() {
        let rc = parse_config(&base()).unwrap();
        assert_eq!(rc.experiment.trials, DEFAULT_TRIALS);
        assert_eq!(rc.experiment.seed, 42);
        assert_eq!(rc.format, OutputFormat::Json);
        assert!(!rc.compare);
    }

    #[test]
    fn config_text_parsing() {
        let m = parse_config_text("# c\ntrials = 10  # ten\n\ntomography-shots=5\n").unwrap();
        assert_eq!(m["trials"], "10");
        assert_eq!(m["tomography_shots"], "5");
        assert!(parse_config_text("bogus = 1").is_err());
        assert!(parse_config_text("trials").is_err());
    }

    #[test]
    fn missing_seed_is_reported() {
        let err = parse_config(&SimulateArgs { seed: None, ..base() }).unwrap_err();
        assert!(err.to_string().contains("seed is mandatory for reproducibility"));
    }

    #[test]
    fn errors_name_their_field() {
        for (args, field) in [
            (SimulateArgs { experiment: Some("bell".into()), ..base() }, "experiment"),
            (SimulateArgs { model: Some("collapse".into()), ..base() }, "model"),
            (SimulateArgs { reversal: Some("maybe".into()), ..base() }, "reversal"),
            (SimulateArgs { trials: Some("0".into()), ..base() }, "trials"),
            (SimulateArgs { trials: Some("-3".into()), ..base() }, "trials"),
            (SimulateArgs { format: Some("xml".into()), ..base() }, "format"),
            (SimulateArgs { format: Some("csv".into()), ..base() }, "format"),
            (SimulateArgs { out: None, ..base() }, "out"),
        ] {
            let err = parse_config(&args).unwrap_err();
            assert!(err.to_string().contains(&format!("`{field}`")), "{err}");
        }
    }

    #[test]
    fn scientific_trials_accepted() {
        let rc = parse_config(&SimulateArgs { trials: Some("1e3".into()), ..base() }).unwrap();
        assert_eq!(rc.experiment.trials, 1000);
    }
}
