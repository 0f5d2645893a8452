use serde_json::Value;

use ssbmeasure::experiments::{compare_models, run_experiment, ExperimentConfig};
use ssbmeasure::measurement::{bell_state, BellState, MeasurementModel, QubitAmplitudes};
use ssbmeasure::qcore::Ket;
use ssbmeasure::tomography::{reconstruct, PauliSetting};

use crate::config::{parse_config, OutputFormat, SimulateArgs, TomographyArgs, VerifyArgs};
use crate::counts_csv::{read_counts, write_counts};
use crate::error::{CliError, ExitCode};
use crate::output::{canonical_json, to_value, write_file};
use crate::verify::cmd_verify;

/// Names accepted by `tomography --target`.
pub const TARGET_NAMES: [&str; 9] = [
    "zero",
    "one",
    "plus",
    "minus",
    "psi0",
    "bell-psi-plus",
    "bell-psi-minus",
    "bell-phi-plus",
    "bell-phi-minus",
];

pub fn named_target(name: &str) -> Option<Ket> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let ket = |a: f64, b: f64| Ket::normalized(vec![a.into(), b.into()]).expect("unit vector");
    Some(match name {
        "zero" => ket(1.0, 0.0),
        "one" => ket(0.0, 1.0),
        "plus" => ket(s, s),
        "minus" => ket(s, -s),
        "psi0" => QubitAmplitudes::balanced().ket(),
        "bell-psi-plus" => bell_state(BellState::PsiPlus),
        "bell-psi-minus" => bell_state(BellState::PsiMinus),
        "bell-phi-plus" => bell_state(BellState::PhiPlus),
        "bell-phi-minus" => bell_state(BellState::PhiMinus),
        _ => return None,
    })
}

fn require<T>(field: &str, v: Option<T>) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::field(field, "missing"))
}

pub fn verify(args: &VerifyArgs) -> Result<ExitCode, CliError> {
    let tol: f64 = require("tol", args.tol.as_deref())?
        .parse()
        .map_err(|_| CliError::field("tol", "not a number"))?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::field("tol", "must be a positive finite number"));
    }
    let samples: u64 = require("samples", args.samples.as_deref())?
        .parse()
        .map_err(|_| CliError::field("samples", "not a positive integer"))?;
    if samples == 0 {
        return Err(CliError::field("samples", "must be positive"));
    }
    let seed: u64 = match args.seed.as_deref() {
        Some(v) => v.parse().map_err(|_| CliError::field("seed", "not a non-negative integer"))?,
        None => return Err(CliError::field("seed", "seed is mandatory for reproducibility")),
    };
    let report = cmd_verify(tol, samples, seed);
    let text = canonical_json(&to_value(&report));
    print!("{text}");
    if let Some(out) = &args.out {
        write_file(out, &text)?;
    }
    Ok(if report.overall { ExitCode::Success } else { ExitCode::VerificationFailed })
}

fn simulate_document(cfg: &ExperimentConfig, compare: bool) -> Result<(Value, Option<String>), CliError> {
    let run = |c: &ExperimentConfig| run_experiment(c).map_err(|e| CliError::Data(e.to_string()));
    let result = run(cfg)?;
    let comparison = if compare {
        let other_model = match cfg.model {
            MeasurementModel::Projective => MeasurementModel::UnitarySsb,
            MeasurementModel::UnitarySsb => MeasurementModel::Projective,
        };
        let other = run(&ExperimentConfig { model: other_model, ..cfg.clone() })?;
        let (a, b) = match cfg.model {
            MeasurementModel::Projective => (&result, &other),
            MeasurementModel::UnitarySsb => (&other, &result),
        };
        Some(compare_models(a, b).map_err(|e| CliError::Data(e.to_string()))?)
    } else {
        None
    };
    let mut doc = to_value(&result);
    doc["comparison"] = comparison.map(|c| to_value(&c)).unwrap_or(Value::Null);
    let csv = result.tomography_counts.as_ref().map(write_counts);
    Ok((doc, csv))
}

pub fn simulate(args: &SimulateArgs) -> Result<ExitCode, CliError> {
    let rc = parse_config(args)?;
    let (doc, csv) = simulate_document(&rc.experiment, rc.compare)?;
    let text = match rc.format {
        OutputFormat::Json => canonical_json(&doc),
        OutputFormat::Csv => csv.ok_or_else(|| CliError::Data("run produced no counts table".into()))?,
    };
    write_file(&rc.output_path, &text)?;
    Ok(ExitCode::Success)
}

fn missing_strings(nqubits: usize, present: &[PauliSetting]) -> Vec<String> {
    PauliSetting::complete_set(nqubits)
        .expect("1 or 2 qubits")
        .into_iter()
        .filter(|s| !present.contains(s))
        .map(|s| s.to_string())
        .collect()
}

pub fn tomography(args: &TomographyArgs) -> Result<ExitCode, CliError> {
    let target = named_target(&args.target).ok_or_else(|| {
        CliError::field("target", format!("unknown state `{}` (expected one of: {})", args.target, TARGET_NAMES.join(", ")))
    })?;
    let file = std::fs::File::open(&args.input)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", args.input.display())))?;
    let table = read_counts(std::io::BufReader::new(file))?;
    let present: Vec<PauliSetting> = table.rows().iter().map(|r| r.setting.clone()).collect();
    let missing = missing_strings(table.nqubits(), &present);
    if !missing.is_empty() {
        return Err(CliError::Data(format!("incomplete settings; missing: {}", missing.join(", "))));
    }
    let result = reconstruct(&table, &target).map_err(|e| CliError::Data(e.to_string()))?;
    write_file(&args.out, &canonical_json(&to_value(&result)))?;
    Ok(ExitCode::Success)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_target_name_resolves() {
        for name in TARGET_NAMES {
            let k = named_target(name).unwrap();
            assert!(k.is_normalized(), "{name}");
        }
        assert!(named_target("bell").is_none());
    }

    #[test]
    fn missing_settings_listed_by_name() {
        let mut set = PauliSetting::complete_set(2).unwrap();
        set.retain(|s| s.to_string() != "YY");
        assert_eq!(missing_strings(2, &set), vec!["YY".to_string()]);
    }
}
