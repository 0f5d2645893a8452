//! Monte Carlo engines for the two discriminating experiments.
//!
//! *Single-qubit null result*: `|0⟩` passes a balanced beamsplitter
//! (`M₁|0⟩ = |ψ⟩₀`), detector D₁ watches `|1⟩`. Clicks are counted and
//! discarded; on a null result the model's update for outcome 0 acts, and a
//! second beamsplitter applies `M₀⁻¹ = M₁`.
//!
//! *Bell reversal*: `Ψ⁺` is measured on `span{|01⟩, |10⟩}` and optionally
//! reversed with the opposite `M^AB` operator.
//!
//! Each trial draws from its own stream derived from `(seed, trial index)`,
//! so runs are identical no matter how trials are scheduled.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::measurement::{
    bell_measurement_operator, bell_projector, bell_state, born_probabilities, measure, measure_bell,
    projector, ssb_inverse, ssb_unitary, BellState, MeasurementModel, OperatorTag, QubitAmplitudes,
};
use crate::qcore::{apply_operator, fidelity_pure, purity, DensityMatrix, Ket, Operator};
use crate::rng::{derive_stream, StreamDomain};
use crate::tomography::{reconstruct, simulate_counts, tomography_pipeline, CountsTable, PauliSetting, TomographyResult};

/// Default number of trials per run.
pub const DEFAULT_TRIALS: u64 = 100_000;
/// Default shots per tomography setting.
pub const DEFAULT_TOMOGRAPHY_SHOTS: u64 = 10_000;
/// Minimum chi-square p-value for an "indistinguishable" verdict.
pub const COMPARISON_P_VALUE_MIN: f64 = 0.01;
/// Maximum purity and fidelity difference for an "indistinguishable" verdict.
pub const COMPARISON_DIFFERENCE_MAX: f64 = 0.01;

macro_rules! string_enum {
    ($name:ident, $what:literal, { $($variant:ident => $s:literal),+ $(,)? }) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub fn as_str(&self) -> &'static str {
                match self { $(Self::$variant => $s),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($s => Ok(Self::$variant),)+
                    other => Err(Error::InvalidArgument(format!(
                        concat!("unknown ", $what, " `{}` (expected one of: {})"),
                        other,
                        [$($s),+].join(", ")
                    ))),
                }
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.serialize_str(self.as_str())
            }
        }
    };
}

string_enum!(ExperimentKind, "experiment", {
    SingleQubitNull => "single-qubit-null",
    BellReversal => "bell-reversal",
});

string_enum!(ReversalPolicy, "reversal policy", {
    Conditioned => "conditioned",
    Unconditioned => "unconditioned",
    None => "none",
});

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub model: MeasurementModel,
    pub trials: u64,
    pub seed: u64,
    pub reversal_policy: ReversalPolicy,
    /// Shots per tomography setting; 0 reports the exact ensemble only.
    pub tomography_shots: u64,
    /// Reconstruct from exact expectations instead of sampled counts.
    pub tomography_exact: bool,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, model: MeasurementModel, reversal_policy: ReversalPolicy, seed: u64) -> Self {
        Self {
            experiment,
            model,
            trials: DEFAULT_TRIALS,
            seed,
            reversal_policy,
            tomography_shots: 0,
            tomography_exact: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.trials >= 1 << 32 {
            return Err(Error::InvalidArgument("trials must be below 2^32".into()));
        }
        Ok(())
    }
}

/// What the detector or Bell measurement reported in one trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrialOutcome {
    Detector { fired: bool },
    Bell { outcome: u8 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub outcome: TrialOutcome,
    pub posterior: Ket,
    pub reversed: Option<Ket>,
    pub applied_op: OperatorTag,
    pub reversal_op: Option<OperatorTag>,
    pub discarded: bool,
}

impl TrialRecord {
    /// The state the trial ends in.
    pub fn final_state(&self) -> &Ket {
        self.reversed.as_ref().unwrap_or(&self.posterior)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FidelityRange {
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub counts: BTreeMap<String, u64>,
    pub kept: u64,
    pub discarded: u64,
    /// Born-weighted average over the kept outcome branches.
    pub exact_ensemble: DensityMatrix,
    /// Plain average over the kept trials.
    pub empirical_ensemble: DensityMatrix,
    pub purity_exact: f64,
    pub fidelity_to_target: f64,
    /// Ray fidelity of each kept trial's final state to the target.
    pub trial_fidelity: FidelityRange,
    pub target: &'static str,
    pub tomography: Option<TomographyResult>,
    #[serde(skip)]
    pub tomography_counts: Option<CountsTable>,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

/// `(1/N) Σ |s⟩⟨s|` over kept records, using the reversed state when asked
/// and present.
pub fn ensemble_density(records: &[TrialRecord], use_reversed: bool) -> Result<DensityMatrix> {
    let kept: Vec<&Ket> = records
        .iter()
        .filter(|r| !r.discarded)
        .map(|r| {
            if use_reversed {
                r.final_state()
            } else {
                &r.posterior
            }
        })
        .collect();
    let first = kept.first().ok_or(Error::EmptyEnsemble)?;
    let mut acc = Operator::zeros(first.dim())?;
    for s in &kept {
        acc = acc.add(&s.outer())?;
    }
    DensityMatrix::new(acc.scale(Complex64::new(1.0 / kept.len() as f64, 0.0)))
}

/// Deterministic evolution of one outcome branch.
struct Branch {
    posterior: Ket,
    reversed: Option<(Ket, OperatorTag)>,
    kept: bool,
}

fn single_qubit_reversal(posterior: &Ket, policy: ReversalPolicy) -> Result<Option<(Ket, OperatorTag)>> {
    match policy {
        ReversalPolicy::None => Ok(None),
        // Only the null branch survives, so both policies apply M₀⁻¹.
        ReversalPolicy::Conditioned | ReversalPolicy::Unconditioned => {
            let inv = ssb_inverse(&QubitAmplitudes::balanced(), 0)?;
            Ok(Some((apply_operator(&inv, posterior)?, OperatorTag::SsbInverse(0))))
        }
    }
}

fn bell_reversal(posterior: &Ket, m: u8, policy: ReversalPolicy) -> Result<Option<(Ket, OperatorTag)>> {
    let inverse = match policy {
        ReversalPolicy::None => return Ok(None),
        ReversalPolicy::Conditioned => 1 - m,
        ReversalPolicy::Unconditioned => 1,
    };
    let op = bell_measurement_operator(inverse)?;
    Ok(Some((apply_operator(&op, posterior)?, OperatorTag::BellSsb(inverse))))
}

/// Prepared state the measurement acts on.
fn prepared_state(kind: ExperimentKind) -> Result<Ket> {
    match kind {
        ExperimentKind::SingleQubitNull => {
            let splitter = ssb_unitary(&QubitAmplitudes::balanced(), 1)?;
            apply_operator(&splitter, &Ket::basis(2, 0)?)
        }
        ExperimentKind::BellReversal => Ok(bell_state(BellState::PsiPlus)),
    }
}

fn target_state(kind: ExperimentKind) -> (Ket, &'static str) {
    match kind {
        ExperimentKind::SingleQubitNull => (QubitAmplitudes::balanced().ket(), "psi0"),
        ExperimentKind::BellReversal => (bell_state(BellState::PsiPlus), "bell-psi-plus"),
    }
}

/// Branch evolution computed from the operators directly, without sampling.
fn branch(config: &ExperimentConfig, prepared: &Ket, m: u8) -> Result<Branch> {
    match config.experiment {
        ExperimentKind::SingleQubitNull => {
            let amps = QubitAmplitudes::balanced();
            let posterior = match config.model {
                MeasurementModel::Projective => apply_operator(&projector(m)?, prepared)?.renormalized()?,
                MeasurementModel::UnitarySsb => apply_operator(&ssb_unitary(&amps, m)?, prepared)?,
            };
            let kept = m == 0;
            let reversed = if kept {
                single_qubit_reversal(&posterior, config.reversal_policy)?
            } else {
                None
            };
            Ok(Branch { posterior, reversed, kept })
        }
        ExperimentKind::BellReversal => {
            let posterior = match config.model {
                MeasurementModel::Projective => apply_operator(&bell_projector(m)?, prepared)?.renormalized()?,
                MeasurementModel::UnitarySsb => apply_operator(&bell_measurement_operator(m)?, prepared)?,
            };
            let reversed = bell_reversal(&posterior, m, config.reversal_policy)?;
            Ok(Branch { posterior, reversed, kept: true })
        }
    }
}

/// Born weights of the two outcomes on the prepared state.
fn outcome_weights(kind: ExperimentKind, prepared: &Ket) -> Result<[f64; 2]> {
    let p = born_probabilities(prepared)?;
    Ok(match kind {
        ExperimentKind::SingleQubitNull => [p[0], p[1]],
        ExperimentKind::BellReversal => [p[1], p[2]],
    })
}

fn exact_ensemble(config: &ExperimentConfig, prepared: &Ket) -> Result<DensityMatrix> {
    let weights = outcome_weights(config.experiment, prepared)?;
    let mut acc: Option<Operator> = None;
    let mut total = 0.0;
    for m in 0..2u8 {
        let w = weights[m as usize];
        if w <= 0.0 {
            continue;
        }
        let b = branch(config, prepared, m)?;
        if !b.kept {
            continue;
        }
        let state = b.reversed.map(|(k, _)| k).unwrap_or(b.posterior);
        let term = state.outer().scale(Complex64::new(w, 0.0));
        acc = Some(match acc {
            Some(a) => a.add(&term)?,
            None => term,
        });
        total += w;
    }
    let acc = acc.ok_or(Error::EmptyEnsemble)?;
    DensityMatrix::new(acc.scale(Complex64::new(1.0 / total, 0.0)))
}

fn run_trial(config: &ExperimentConfig, prepared: &Ket, index: u64) -> Result<TrialRecord> {
    let mut rng = derive_stream(config.seed, StreamDomain::Trial, index);
    match config.experiment {
        ExperimentKind::SingleQubitNull => {
            let amps = QubitAmplitudes::balanced();
            let rec = measure(prepared, &amps, config.model, &mut rng)?;
            let fired = rec.outcome == 1;
            let reversed = if fired {
                None
            } else {
                single_qubit_reversal(&rec.posterior, config.reversal_policy)?
            };
            Ok(TrialRecord {
                trial_index: index,
                outcome: TrialOutcome::Detector { fired },
                posterior: rec.posterior,
                reversal_op: reversed.as_ref().map(|r| r.1),
                reversed: reversed.map(|r| r.0),
                applied_op: rec.applied_op,
                discarded: fired,
            })
        }
        ExperimentKind::BellReversal => {
            let rec = measure_bell(prepared, config.model, &mut rng)?;
            let reversed = bell_reversal(&rec.posterior, rec.outcome, config.reversal_policy)?;
            Ok(TrialRecord {
                trial_index: index,
                outcome: TrialOutcome::Bell { outcome: rec.outcome },
                posterior: rec.posterior,
                reversal_op: reversed.as_ref().map(|r| r.1),
                reversed: reversed.map(|r| r.0),
                applied_op: rec.applied_op,
                discarded: false,
            })
        }
    }
}

fn run(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let prepared = prepared_state(config.experiment)?;
    let records: Vec<TrialRecord> = (0..config.trials)
        .into_par_iter()
        .map(|i| run_trial(config, &prepared, i))
        .collect::<Result<_>>()?;

    let mut counts = BTreeMap::new();
    let keys: [&str; 2] = match config.experiment {
        ExperimentKind::SingleQubitNull => ["null", "detector_fired"],
        ExperimentKind::BellReversal => ["m0", "m1"],
    };
    for k in keys {
        counts.insert(k.to_string(), 0u64);
    }
    for r in &records {
        let k = match r.outcome {
            TrialOutcome::Detector { fired } => keys[fired as usize],
            TrialOutcome::Bell { outcome } => keys[outcome as usize],
        };
        *counts.get_mut(k).expect("key inserted above") += 1;
    }
    let discarded = records.iter().filter(|r| r.discarded).count() as u64;
    let kept = config.trials - discarded;

    let use_reversed = config.reversal_policy != ReversalPolicy::None;
    let empirical_ensemble = ensemble_density(&records, use_reversed)?;
    let exact = exact_ensemble(config, &prepared)?;

    let (target, target_label) = target_state(config.experiment);
    let trial_fidelity = records
        .iter()
        .filter(|r| !r.discarded)
        .map(|r| r.final_state().ray_fidelity(&target))
        .try_fold(
            FidelityRange {
                min: f64::INFINITY,
                max: f64::NEG_INFINITY,
            },
            |acc, f| {
                f.map(|f| FidelityRange {
                    min: acc.min.min(f),
                    max: acc.max.max(f),
                })
            },
        )?;

    let (tomography, tomography_counts) = if config.tomography_exact {
        let mut rng = derive_stream(config.seed, StreamDomain::Tomography, 0);
        (Some(tomography_pipeline(&exact, &target, 0, &mut rng)?), None)
    } else if config.tomography_shots > 0 {
        let mut rng = derive_stream(config.seed, StreamDomain::Tomography, 0);
        let nqubits = if exact.dim() == 2 { 1 } else { 2 };
        let settings = PauliSetting::complete_set(nqubits)?;
        let table = simulate_counts(&exact, &settings, config.tomography_shots, &mut rng)?;
        (Some(reconstruct(&table, &target)?), Some(table))
    } else {
        (None, None)
    };

    Ok(ExperimentResult {
        config: config.clone(),
        counts,
        kept,
        discarded,
        purity_exact: purity(&exact),
        fidelity_to_target: fidelity_pure(&target, &exact)?,
        exact_ensemble: exact,
        empirical_ensemble,
        trial_fidelity,
        target: target_label,
        tomography,
        tomography_counts,
        records,
    })
}

pub fn run_single_qubit_null(config: &ExperimentConfig) -> Result<ExperimentResult> {
    if config.experiment != ExperimentKind::SingleQubitNull {
        return Err(Error::ContractViolation(format!(
            "run_single_qubit_null called with experiment {}",
            config.experiment
        )));
    }
    run(config)
}

pub fn run_bell_reversal(config: &ExperimentConfig) -> Result<ExperimentResult> {
    if config.experiment != ExperimentKind::BellReversal {
        return Err(Error::ContractViolation(format!(
            "run_bell_reversal called with experiment {}",
            config.experiment
        )));
    }
    run(config)
}

/// Dispatches on `config.experiment`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    run(config)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Indistinguishable,
    Distinguishable,
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(match self {
            Verdict::Indistinguishable => "indistinguishable",
            Verdict::Distinguishable => "distinguishable",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub model_a: MeasurementModel,
    pub model_b: MeasurementModel,
    pub chi_square: f64,
    pub degrees_of_freedom: u64,
    pub p_value: f64,
    pub purity_difference: f64,
    pub fidelity_difference: f64,
    pub p_value_min: f64,
    pub difference_max: f64,
    pub verdict: Verdict,
}

/// Pearson chi-square test of homogeneity for two count vectors over the
/// same categories. Categories empty in both are dropped.
pub fn chi_square_homogeneity(a: &[u64], b: &[u64]) -> (f64, u64, f64) {
    let cols: Vec<(f64, f64)> = a
        .iter()
        .zip(b)
        .filter(|(x, y)| **x + **y > 0)
        .map(|(&x, &y)| (x as f64, y as f64))
        .collect();
    if cols.len() < 2 {
        return (0.0, 0, 1.0);
    }
    let row_a: f64 = cols.iter().map(|c| c.0).sum();
    let row_b: f64 = cols.iter().map(|c| c.1).sum();
    let grand = row_a + row_b;
    let stat: f64 = cols
        .iter()
        .map(|&(x, y)| {
            let col = x + y;
            let ea = row_a * col / grand;
            let eb = row_b * col / grand;
            (x - ea).powi(2) / ea + (y - eb).powi(2) / eb
        })
        .sum();
    let df = (cols.len() - 1) as u64;
    let p = ChiSquared::new(df as f64)
        .map(|d| d.sf(stat))
        .unwrap_or(1.0);
    (stat, df, p)
}

/// Statistical comparison of two runs of the same experiment.
pub fn compare_models(a: &ExperimentResult, b: &ExperimentResult) -> Result<ComparisonReport> {
    if a.config.experiment != b.config.experiment || a.config.trials != b.config.trials {
        return Err(Error::ContractViolation(
            "compared runs must share experiment and trial count".into(),
        ));
    }
    let ca: Vec<u64> = a.counts.values().copied().collect();
    let cb: Vec<u64> = b.counts.values().copied().collect();
    let (chi_square, degrees_of_freedom, p_value) = chi_square_homogeneity(&ca, &cb);
    let purity_difference = (a.purity_exact - b.purity_exact).abs();
    let fidelity_difference = (a.fidelity_to_target - b.fidelity_to_target).abs();
    let verdict = if p_value >= COMPARISON_P_VALUE_MIN
        && purity_difference < COMPARISON_DIFFERENCE_MAX
        && fidelity_difference < COMPARISON_DIFFERENCE_MAX
    {
        Verdict::Indistinguishable
    } else {
        Verdict::Distinguishable
    };
    Ok(ComparisonReport {
        model_a: a.config.model,
        model_b: b.config.model,
        chi_square,
        degrees_of_freedom,
        p_value,
        purity_difference,
        fidelity_difference,
        p_value_min: COMPARISON_P_VALUE_MIN,
        difference_max: COMPARISON_DIFFERENCE_MAX,
        verdict,
    })
}
