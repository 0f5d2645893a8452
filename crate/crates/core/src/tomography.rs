//! Pauli-basis state tomography for one and two qubits.
//!
//! Each qubit is measured in one of X, Y, Z per setting (3 settings for one
//! qubit, 9 for two). Every Pauli string with identities in some slots is a
//! marginal of several settings and is pooled across them. The estimate is
//! the linear inversion `ρ = 2⁻ⁿ Σ_P ⟨P⟩ P`, then clipped to the nearest
//! density matrix by the eigenvalue redistribution procedure.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::qcore::{fidelity_pure, purity, DensityMatrix, Ket, Operator, TensorProduct};
use crate::rng::sample_index;

/// Tolerances accepted by [`project_psd`] on its input.
pub const PSD_INPUT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> Operator {
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let rows = match self {
            Pauli::I => [[one, z], [z, one]],
            Pauli::X => [[z, one], [one, z]],
            Pauli::Y => [[z, -i], [i, z]],
            Pauli::Z => [[one, z], [z, -one]],
        };
        Operator::from_rows2(rows).expect("finite entries")
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    fn from_symbol(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// Rows are the ±1 eigenvectors (bras), +1 first.
    fn eigenbasis(self) -> Operator {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = |re, im| Complex64::new(re, im);
        let rows = match self {
            Pauli::X => [[c(s, 0.), c(s, 0.)], [c(s, 0.), c(-s, 0.)]],
            Pauli::Y => [[c(s, 0.), c(0., -s)], [c(s, 0.), c(0., s)]],
            Pauli::Z | Pauli::I => [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(1., 0.)]],
        };
        Operator::from_rows2(rows).expect("finite entries")
    }
}

/// Tensor product of single-qubit Paulis, first qubit leftmost (`"ZI"`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(paulis: Vec<Pauli>) -> Result<Self> {
        check_qubits(paulis.len())?;
        Ok(Self(paulis))
    }

    pub fn paulis(&self) -> &[Pauli] {
        &self.0
    }

    pub fn nqubits(&self) -> usize {
        self.0.len()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&p| p == Pauli::I)
    }

    pub fn matrix(&self) -> Operator {
        let mut it = self.0.iter();
        let first = it.next().expect("at least one qubit").matrix();
        it.fold(first, |acc, p| acc.tensor(&p.matrix()).expect("at most two qubits"))
    }

    /// All `4ⁿ` strings in lexicographic `I < X < Y < Z` order.
    pub fn all(nqubits: usize) -> Result<Vec<PauliString>> {
        check_qubits(nqubits)?;
        const P: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        Ok(match nqubits {
            1 => P.iter().map(|&p| PauliString(vec![p])).collect(),
            _ => P
                .iter()
                .flat_map(|&a| P.iter().map(move |&b| PauliString(vec![a, b])))
                .collect(),
        })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|p| write!(f, "{}", p.symbol()))
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let paulis = s
            .chars()
            .map(|c| {
                Pauli::from_symbol(c)
                    .ok_or_else(|| Error::InvalidArgument(format!("bad Pauli symbol `{c}` in `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(paulis)
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 1 || n == 2 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{n} qubits (expected 1 or 2)")))
    }
}

fn qubits_for_dim(dim: usize) -> usize {
    if dim == 2 {
        1
    } else {
        2
    }
}

/// Measurement axis per qubit, e.g. `ZX`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliSetting(Vec<Pauli>);

impl PauliSetting {
    pub fn new(axes: Vec<Pauli>) -> Result<Self> {
        check_qubits(axes.len())?;
        if axes.contains(&Pauli::I) {
            return Err(Error::InvalidArgument("settings measure X, Y or Z on every qubit".into()));
        }
        Ok(Self(axes))
    }

    pub fn axes(&self) -> &[Pauli] {
        &self.0
    }

    pub fn nqubits(&self) -> usize {
        self.0.len()
    }

    /// The informationally complete set, lexicographic.
    pub fn complete_set(nqubits: usize) -> Result<Vec<PauliSetting>> {
        Ok(PauliString::all(nqubits)?
            .into_iter()
            .filter(|s| !s.paulis().contains(&Pauli::I))
            .map(|s| PauliSetting(s.0))
            .collect())
    }

    /// Label of outcome index `k`: `+` for eigenvalue +1, `-` for −1, first
    /// qubit on the high bit.
    pub fn outcome_label(&self, k: usize) -> String {
        let n = self.nqubits();
        (0..n)
            .map(|q| if (k >> (n - 1 - q)) & 1 == 0 { '+' } else { '-' })
            .collect()
    }

    pub fn parse_outcome(&self, label: &str) -> Result<usize> {
        let n = self.nqubits();
        if label.chars().count() != n {
            return Err(Error::InvalidArgument(format!(
                "outcome `{label}` does not have {n} signs"
            )));
        }
        label.chars().try_fold(0usize, |acc, c| match c {
            '+' => Ok(acc << 1),
            '-' => Ok((acc << 1) | 1),
            _ => Err(Error::InvalidArgument(format!("bad outcome sign `{c}` in `{label}`"))),
        })
    }

    /// Pauli strings whose value this setting determines: the setting with
    /// any non-empty subset of its axes kept, the rest replaced by `I`.
    fn marginals(&self) -> Vec<(usize, PauliString)> {
        let n = self.nqubits();
        (1..(1usize << n))
            .map(|mask| {
                let s = (0..n)
                    .map(|q| if (mask >> (n - 1 - q)) & 1 == 1 { self.0[q] } else { Pauli::I })
                    .collect();
                (mask, PauliString(s))
            })
            .collect()
    }

    /// Product basis change whose rows are the setting's eigenvectors.
    fn basis_change(&self) -> Operator {
        let mut it = self.0.iter();
        let first = it.next().expect("non-empty").eigenbasis();
        it.fold(first, |acc, p| acc.tensor(&p.eigenbasis()).expect("at most two qubits"))
    }
}

impl fmt::Display for PauliSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|p| write!(f, "{}", p.symbol()))
    }
}

impl FromStr for PauliSetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::new(s.parse::<PauliString>()?.0)
    }
}

/// Counts for one setting, indexed by outcome (see [`PauliSetting::outcome_label`]).
#[derive(Clone, Debug, PartialEq)]
pub struct SettingCounts {
    pub setting: PauliSetting,
    pub counts: Vec<u64>,
}

impl SettingCounts {
    fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Empirical mean of the eigenvalue product over the qubits in `mask`.
    fn mean_parity(&self, mask: usize) -> f64 {
        let total = self.total() as f64;
        let signed: i64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                let sign = if (k & mask).count_ones().is_multiple_of(2) { 1 } else { -1 };
                sign * n as i64
            })
            .sum();
        signed as f64 / total
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CountsTable {
    nqubits: usize,
    shots_per_setting: u64,
    rows: Vec<SettingCounts>,
}

impl CountsTable {
    /// Validates qubit counts and that every setting has the same shot total.
    /// Settings appearing twice are rejected.
    pub fn new(rows: Vec<SettingCounts>) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::InvalidArgument("counts table has no settings".into()))?;
        let nqubits = first.setting.nqubits();
        let shots = first.total();
        if shots == 0 {
            return Err(Error::InvalidArgument(format!(
                "setting {} has zero shots",
                first.setting
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for r in &rows {
            if r.setting.nqubits() != nqubits || r.counts.len() != 1 << nqubits {
                return Err(Error::InvalidArgument(format!(
                    "setting {} does not match the table's {nqubits}-qubit layout",
                    r.setting
                )));
            }
            if r.total() != shots {
                return Err(Error::InvalidArgument(format!(
                    "setting {} has {} shots, expected {shots}",
                    r.setting,
                    r.total()
                )));
            }
            if !seen.insert(r.setting.clone()) {
                return Err(Error::InvalidArgument(format!("setting {} repeated", r.setting)));
            }
        }
        Ok(Self {
            nqubits,
            shots_per_setting: shots,
            rows,
        })
    }

    pub fn nqubits(&self) -> usize {
        self.nqubits
    }

    pub fn shots_per_setting(&self) -> u64 {
        self.shots_per_setting
    }

    pub fn rows(&self) -> &[SettingCounts] {
        &self.rows
    }

    /// `(setting, outcome, count)` triples in table order, as written to CSV.
    pub fn records(&self) -> impl Iterator<Item = (String, String, u64)> + '_ {
        self.rows.iter().flat_map(|r| {
            r.counts
                .iter()
                .enumerate()
                .map(move |(k, &n)| (r.setting.to_string(), r.setting.outcome_label(k), n))
        })
    }

    /// Expectation of `string` estimated from a single setting, if that
    /// setting determines it.
    pub fn expectation_in_setting(&self, setting: &PauliSetting, string: &PauliString) -> Option<f64> {
        let row = self.rows.iter().find(|r| &r.setting == setting)?;
        row.setting
            .marginals()
            .into_iter()
            .find(|(_, s)| s == string)
            .map(|(mask, _)| row.mean_parity(mask))
    }
}

/// Draws `shots` outcomes per setting from the Born distribution of the
/// setting's product eigenbasis.
pub fn simulate_counts<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    settings: &[PauliSetting],
    shots: u64,
    rng: &mut R,
) -> Result<CountsTable> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be positive".into()));
    }
    let nqubits = qubits_for_dim(rho.dim());
    let mut rows = Vec::with_capacity(settings.len());
    for setting in settings {
        if setting.nqubits() != nqubits {
            return Err(Error::DimensionMismatch {
                expected: nqubits,
                found: setting.nqubits(),
            });
        }
        let rotated = rho.as_operator().conjugated_by(&setting.basis_change())?;
        let mut probs: Vec<f64> = (0..rho.dim()).map(|k| rotated.entry(k, k).re.max(0.0)).collect();
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        let mut counts = vec![0u64; rho.dim()];
        for _ in 0..shots {
            counts[sample_index(&probs, rng)] += 1;
        }
        rows.push(SettingCounts {
            setting: setting.clone(),
            counts,
        });
    }
    CountsTable::new(rows)
}

pub type Expectations = BTreeMap<PauliString, f64>;

/// Empirical expectation of every Pauli string the table determines,
/// averaged over the settings that determine it.
pub fn expectations_from_counts(counts: &CountsTable) -> Expectations {
    let mut sums: BTreeMap<PauliString, (f64, usize)> = BTreeMap::new();
    for row in &counts.rows {
        for (mask, string) in row.setting.marginals() {
            let e = sums.entry(string).or_insert((0.0, 0));
            e.0 += row.mean_parity(mask);
            e.1 += 1;
        }
    }
    sums.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
}

/// `Tr(ρP)` for every non-identity Pauli string.
pub fn exact_expectations(rho: &DensityMatrix) -> Expectations {
    let nqubits = qubits_for_dim(rho.dim());
    PauliString::all(nqubits)
        .expect("one or two qubits")
        .into_iter()
        .filter(|s| !s.is_identity())
        .map(|s| {
            let v = rho.as_operator().compose(&s.matrix()).expect("same dimension").trace().re;
            (s, v)
        })
        .collect()
}

/// `2⁻ⁿ Σ_P ⟨P⟩ P` with `⟨I…I⟩ = 1`. The result is Hermitian with unit trace
/// but need not be positive semidefinite.
pub fn linear_inversion(expectations: &Expectations, nqubits: usize) -> Result<Operator> {
    let strings = PauliString::all(nqubits)?;
    let missing: Vec<String> = strings
        .iter()
        .filter(|s| !s.is_identity() && !expectations.contains_key(s))
        .map(|s| s.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::IncompleteData(missing));
    }
    let dim = 1usize << nqubits;
    let mut acc = Operator::zeros(dim)?;
    for s in &strings {
        let value = if s.is_identity() { 1.0 } else { expectations[s] };
        acc = acc.add(&s.matrix().scale(Complex64::new(value, 0.0)))?;
    }
    Ok(acc.scale(Complex64::new(1.0 / dim as f64, 0.0)))
}

/// Nearest unit-trace PSD matrix by eigenvalue clipping: negative
/// eigenvalues are zeroed from the smallest up and their mass is spread
/// uniformly over the eigenvalues that remain.
pub fn project_psd(h: &Operator) -> Result<DensityMatrix> {
    if !h.is_hermitian(PSD_INPUT_TOL) {
        return Err(Error::ContractViolation("input is not Hermitian".into()));
    }
    let tr = h.trace();
    let dev = ((tr.re - 1.0).powi(2) + tr.im.powi(2)).sqrt();
    if dev > PSD_INPUT_TOL {
        return Err(Error::TraceDeviation(dev));
    }
    let (mut values, vectors) = h.hermitian_eigen();
    if values[0] >= 0.0 {
        let herm = h.add(&h.adjoint())?.scale(Complex64::new(0.5, 0.0));
        return DensityMatrix::new(herm);
    }
    let d = values.len();
    let mut carried = 0.0;
    let mut first_kept = d;
    for (i, v) in values.iter_mut().enumerate() {
        let remaining = (d - i) as f64;
        if *v + carried / remaining < 0.0 {
            carried += *v;
            *v = 0.0;
        } else {
            first_kept = i;
            break;
        }
    }
    let remaining = (d - first_kept) as f64;
    for v in values.iter_mut().skip(first_kept) {
        *v += carried / remaining;
    }
    let mut acc = Operator::zeros(d)?;
    for (lambda, v) in values.iter().zip(&vectors) {
        if *lambda != 0.0 {
            acc = acc.add(&v.outer().scale(Complex64::new(*lambda, 0.0)))?;
        }
    }
    let herm = acc.add(&acc.adjoint())?.scale(Complex64::new(0.5, 0.0));
    DensityMatrix::new(herm)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReconstructionMethod {
    LinearInversionPsd,
}

impl Serialize for ReconstructionMethod {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str("linear-inversion+psd")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TomographyResult {
    pub rho_hat: DensityMatrix,
    pub purity_hat: f64,
    pub fidelity_hat: f64,
    /// Zero when the reconstruction used exact expectations.
    pub shots_per_setting: u64,
    pub method: ReconstructionMethod,
}

fn finish(expectations: &Expectations, nqubits: usize, target: &Ket, shots: u64) -> Result<TomographyResult> {
    let rho_hat = project_psd(&linear_inversion(expectations, nqubits)?)?;
    Ok(TomographyResult {
        purity_hat: purity(&rho_hat),
        fidelity_hat: fidelity_pure(target, &rho_hat)?,
        rho_hat,
        shots_per_setting: shots,
        method: ReconstructionMethod::LinearInversionPsd,
    })
}

/// Reconstruction from a counts table, scored against `target`.
pub fn reconstruct(counts: &CountsTable, target: &Ket) -> Result<TomographyResult> {
    if qubits_for_dim(target.dim()) != counts.nqubits() {
        return Err(Error::DimensionMismatch {
            expected: 1 << counts.nqubits(),
            found: target.dim(),
        });
    }
    finish(
        &expectations_from_counts(counts),
        counts.nqubits(),
        target,
        counts.shots_per_setting(),
    )
}

/// Full pipeline from a source state. `shots == 0` uses exact expectations.
pub fn tomography_pipeline<R: Rng + ?Sized>(
    rho_source: &DensityMatrix,
    target: &Ket,
    shots: u64,
    rng: &mut R,
) -> Result<TomographyResult> {
    let nqubits = qubits_for_dim(rho_source.dim());
    if shots == 0 {
        return finish(&exact_expectations(rho_source), nqubits, target, 0);
    }
    let counts = simulate_counts(rho_source, &PauliSetting::complete_set(nqubits)?, shots, rng)?;
    reconstruct(&counts, target)
}
