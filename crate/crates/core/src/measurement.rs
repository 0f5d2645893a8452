//! The two measurement models.
//!
//! *Projective*: apply `Πₘ` and renormalize. Many-to-one, no inverse.
//!
//! *Unitary SSB*: apply the state-dependent unitary `Mₘ` that rotates the
//! prepared state `α|0⟩ + β|1⟩` onto `|m⟩`:
//!
//! ```text
//! M₀ = [[α*, β*], [−β, α]]        M₁ = [[β, −α], [α*, β*]]
//! ```
//!
//! Both models draw the outcome `m` with the Born probability `|⟨m|ψ⟩|²`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::qcore::{apply_operator, DensityMatrix, Ket, Operator, NORM_TOL};
use crate::rng::sample_index;

/// Ray fidelity below which a state is considered different from the one the
/// SSB operators were built for.
pub const AMPS_CONSISTENCY_TOL: f64 = 1e-9;

/// Amplitudes `(α, β)` of a prepared qubit `α|0⟩ + β|1⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QubitAmplitudes {
    alpha: Complex64,
    beta: Complex64,
}

impl QubitAmplitudes {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        if ![alpha.re, alpha.im, beta.re, beta.im].iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("qubit amplitudes"));
        }
        let n = alpha.norm_sqr() + beta.norm_sqr();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n));
        }
        Ok(Self { alpha, beta })
    }

    /// `α = β = 1/√2`.
    pub fn balanced() -> Self {
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self { alpha: s, beta: s }
    }

    pub fn from_ket(ket: &Ket) -> Result<Self> {
        if ket.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: ket.dim(),
            });
        }
        Self::new(ket.amp(0), ket.amp(1))
    }

    /// Uniform over the Bloch sphere with a uniform global phase.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let cos_theta: f64 = 2.0 * rng.random::<f64>() - 1.0;
        let half = cos_theta.clamp(-1.0, 1.0).acos() / 2.0;
        let phi = 2.0 * PI * rng.random::<f64>();
        let chi = 2.0 * PI * rng.random::<f64>();
        Self {
            alpha: Complex64::from_polar(half.cos(), chi),
            beta: Complex64::from_polar(half.sin(), chi + phi),
        }
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    /// `φ = arg β`, taken as 0 when `β = 0`.
    pub fn phi(&self) -> f64 {
        if self.beta.norm() == 0.0 {
            0.0
        } else {
            self.beta.arg()
        }
    }

    pub fn ket(&self) -> Ket {
        Ket::new(vec![self.alpha, self.beta]).expect("two finite amplitudes")
    }

    pub fn probabilities(&self) -> [f64; 2] {
        [self.alpha.norm_sqr(), self.beta.norm_sqr()]
    }
}

/// Collapse rule applied by a measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MeasurementModel {
    Projective,
    UnitarySsb,
}

impl MeasurementModel {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Projective => "projective",
            Self::UnitarySsb => "unitary-ssb",
        }
    }
}

impl fmt::Display for MeasurementModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MeasurementModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "projective" => Ok(Self::Projective),
            "unitary-ssb" => Ok(Self::UnitarySsb),
            other => Err(Error::InvalidArgument(format!(
                "unknown measurement model `{other}` (expected projective or unitary-ssb)"
            ))),
        }
    }
}

impl Serialize for MeasurementModel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// Which operator acted on the state. Renders as `PI_0`, `M_1`, `M_AB_0`, ...
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OperatorTag {
    Projector(u8),
    Ssb(u8),
    SsbInverse(u8),
    BellProjector(u8),
    BellSsb(u8),
}

impl fmt::Display for OperatorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Projector(m) => write!(f, "PI_{m}"),
            Self::Ssb(m) => write!(f, "M_{m}"),
            Self::SsbInverse(m) => write!(f, "M_{m}_INV"),
            Self::BellProjector(m) => write!(f, "PI_AB_{m}"),
            Self::BellSsb(m) => write!(f, "M_AB_{m}"),
        }
    }
}

impl Serialize for OperatorTag {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Result of one sampled measurement.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutcomeRecord {
    pub outcome: u8,
    pub posterior: Ket,
    pub applied_op: OperatorTag,
}

fn check_outcome(m: u8) -> Result<()> {
    if m <= 1 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("outcome {m} is not 0 or 1")))
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `Π₀ = diag(1, 0)`, `Π₁ = diag(0, 1)`.
pub fn projector(m: u8) -> Result<Operator> {
    check_outcome(m)?;
    if m == 0 {
        Operator::diagonal(&[1.0, 0.0])
    } else {
        Operator::diagonal(&[0.0, 1.0])
    }
}

/// Unitary `Mₘ` built from the prepared amplitudes; `Mₘ (α, β)ᵀ = |m⟩`.
pub fn ssb_unitary(amps: &QubitAmplitudes, m: u8) -> Result<Operator> {
    check_outcome(m)?;
    let (a, b) = (amps.alpha, amps.beta);
    let rows = if m == 0 {
        [[a.conj(), b.conj()], [-b, a]]
    } else {
        [[b, -a], [a.conj(), b.conj()]]
    };
    Operator::from_rows2(rows)
}

/// `Mₘ⁻¹ = Mₘ†`.
pub fn ssb_inverse(amps: &QubitAmplitudes, m: u8) -> Result<Operator> {
    Ok(ssb_unitary(amps, m)?.adjoint())
}

/// Flipper `U = [[0, e^{iθ}], [1, 0]]` with `θ = −2φ`, `φ = arg β`.
///
/// `U M₀ U† = M₀⁻¹` holds for every `(α, β)`. `U M₁ U† = M₁⁻¹` needs the
/// extra condition `αβ ∈ ℝ`; otherwise the off-diagonal entries miss by
/// `|α* e^{iθ} − α|`.
pub fn flipper(amps: &QubitAmplitudes) -> Operator {
    let theta = -2.0 * amps.phi();
    Operator::from_rows2([[c(0.0, 0.0), Complex64::from_polar(1.0, theta)], [c(1.0, 0.0), c(0.0, 0.0)]])
        .expect("finite entries")
}

/// `|amps_k|²` for a normalized ket.
pub fn born_probabilities(ket: &Ket) -> Result<Vec<f64>> {
    ket.require_normalized()?;
    Ok(ket.amps().iter().map(|z| z.norm_sqr()).collect())
}

/// Samples one single-qubit measurement in the computational basis and
/// applies the model's state update.
///
/// For [`MeasurementModel::UnitarySsb`] the operators are built from `amps`,
/// so `ket` must be the state `amps` describes (up to global phase).
pub fn measure<R: Rng + ?Sized>(
    ket: &Ket,
    amps: &QubitAmplitudes,
    model: MeasurementModel,
    rng: &mut R,
) -> Result<OutcomeRecord> {
    if ket.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: ket.dim(),
        });
    }
    let probs = born_probabilities(ket)?;
    if model == MeasurementModel::UnitarySsb {
        let f = amps.ket().ray_fidelity(ket)?;
        if f < 1.0 - AMPS_CONSISTENCY_TOL {
            return Err(Error::ContractViolation(format!(
                "SSB operators built for a different state (ray fidelity {f})"
            )));
        }
    }
    let m = sample_index(&probs, rng) as u8;
    let (posterior, applied_op) = match model {
        MeasurementModel::Projective => (
            apply_operator(&projector(m)?, ket)?.renormalized()?,
            OperatorTag::Projector(m),
        ),
        MeasurementModel::UnitarySsb => (
            apply_operator(&ssb_unitary(amps, m)?, ket)?,
            OperatorTag::Ssb(m),
        ),
    };
    Ok(OutcomeRecord {
        outcome: m,
        posterior,
        applied_op,
    })
}

/// Ensemble average over both outcomes without reading the record.
///
/// Projective: `Σ Πₘ ρ Πₘ`. Unitary SSB: `Σ pₘ Mₘ ρ Mₘ†` with `pₘ` the Born
/// weights of the prepared state.
pub fn nonselective_channel(
    rho: &DensityMatrix,
    amps: &QubitAmplitudes,
    model: MeasurementModel,
) -> Result<DensityMatrix> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho.dim(),
        });
    }
    let weights = amps.probabilities();
    let mut acc = Operator::zeros(2)?;
    for m in 0..2u8 {
        let term = match model {
            MeasurementModel::Projective => rho.as_operator().conjugated_by(&projector(m)?)?,
            MeasurementModel::UnitarySsb => rho
                .as_operator()
                .conjugated_by(&ssb_unitary(amps, m)?)?
                .scale(c(weights[m as usize], 0.0)),
        };
        acc = acc.add(&term)?;
    }
    DensityMatrix::new(acc)
}

/// Keeps the `m` branch of a dephased qubit and renormalizes it.
pub fn subensemble(rho_mixed: &DensityMatrix, m: u8) -> Result<DensityMatrix> {
    check_outcome(m)?;
    if rho_mixed.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho_mixed.dim(),
        });
    }
    if rho_mixed.entry(0, 1).norm() > crate::qcore::HERM_TOL {
        return Err(Error::ContractViolation(
            "sub-ensemble selection needs a diagonal density matrix".into(),
        ));
    }
    let p = rho_mixed.entry(m as usize, m as usize).re;
    if p <= 0.0 {
        return Err(Error::DegenerateConditioning(m));
    }
    let kept = rho_mixed.as_operator().conjugated_by(&projector(m)?)?;
    DensityMatrix::new(kept.scale(c(1.0 / p, 0.0)))
}

/// The four Bell states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BellState {
    PsiPlus,
    PsiMinus,
    PhiPlus,
    PhiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] = [Self::PsiPlus, Self::PsiMinus, Self::PhiPlus, Self::PhiMinus];
}

/// Bell state in the `{|00⟩, |01⟩, |10⟩, |11⟩}` basis.
pub fn bell_state(kind: BellState) -> Ket {
    let s = FRAC_1_SQRT_2;
    let amps = match kind {
        BellState::PsiPlus => [0.0, s, s, 0.0],
        BellState::PsiMinus => [0.0, s, -s, 0.0],
        BellState::PhiPlus => [s, 0.0, 0.0, s],
        BellState::PhiMinus => [s, 0.0, 0.0, -s],
    };
    Ket::new(amps.iter().map(|&x| c(x, 0.0)).collect()).expect("four finite amplitudes")
}

/// Indices of `|01⟩` and `|10⟩`, the subspace Bell measurements act on.
const BELL_SUBSPACE: [usize; 2] = [1, 2];

/// `M^AB_m`: `(1/√2)[[1, 1], [−1, 1]]` (m = 0) or `(1/√2)[[1, −1], [1, 1]]`
/// (m = 1) on `span{|01⟩, |10⟩}`, identity on `span{|00⟩, |11⟩}`.
pub fn bell_measurement_operator(m: u8) -> Result<Operator> {
    check_outcome(m)?;
    let s = FRAC_1_SQRT_2;
    let block = if m == 0 { [[s, s], [-s, s]] } else { [[s, -s], [s, s]] };
    let mut entries = [c(0.0, 0.0); 16];
    entries[0] = c(1.0, 0.0);
    entries[15] = c(1.0, 0.0);
    for (bi, &i) in BELL_SUBSPACE.iter().enumerate() {
        for (bj, &j) in BELL_SUBSPACE.iter().enumerate() {
            entries[4 * i + j] = c(block[bi][bj], 0.0);
        }
    }
    Operator::from_row_slice(4, &entries)
}

/// `Π^AB₀ = |01⟩⟨01|`, `Π^AB₁ = |10⟩⟨10|`.
pub fn bell_projector(m: u8) -> Result<Operator> {
    check_outcome(m)?;
    let mut diag = [0.0; 4];
    diag[BELL_SUBSPACE[m as usize]] = 1.0;
    Operator::diagonal(&diag)
}

/// Samples a measurement of a two-qubit state confined to
/// `span{|01⟩, |10⟩}`, outcome `m` meaning `|01⟩` (0) or `|10⟩` (1).
///
/// The SSB branch uses [`bell_measurement_operator`], which is built for
/// `Ψ⁺`; any other input is a contract violation.
pub fn measure_bell<R: Rng + ?Sized>(
    ket: &Ket,
    model: MeasurementModel,
    rng: &mut R,
) -> Result<OutcomeRecord> {
    if ket.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: ket.dim(),
        });
    }
    let probs = born_probabilities(ket)?;
    let outside = probs[0] + probs[3];
    if outside > NORM_TOL {
        return Err(Error::ContractViolation(format!(
            "state has weight {outside:e} outside span{{|01>, |10>}}"
        )));
    }
    if model == MeasurementModel::UnitarySsb {
        let f = bell_state(BellState::PsiPlus).ray_fidelity(ket)?;
        if f < 1.0 - AMPS_CONSISTENCY_TOL {
            return Err(Error::ContractViolation(format!(
                "M_AB operators are built for Psi+ (ray fidelity {f})"
            )));
        }
    }
    let m = sample_index(&[probs[BELL_SUBSPACE[0]], probs[BELL_SUBSPACE[1]]], rng) as u8;
    let (posterior, applied_op) = match model {
        MeasurementModel::Projective => (
            apply_operator(&bell_projector(m)?, ket)?.renormalized()?,
            OperatorTag::BellProjector(m),
        ),
        MeasurementModel::UnitarySsb => (
            apply_operator(&bell_measurement_operator(m)?, ket)?,
            OperatorTag::BellSsb(m),
        ),
    };
    Ok(OutcomeRecord {
        outcome: m,
        posterior,
        applied_op,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{is_unitary, purity};
    use crate::rng::{derive_stream, StreamDomain};

    const S: f64 = FRAC_1_SQRT_2;

    fn amps(a: (f64, f64), b: (f64, f64)) -> QubitAmplitudes {
        QubitAmplitudes::new(c(a.0, a.1), c(b.0, b.1)).unwrap()
    }

    fn op2(rows: [[(f64, f64); 2]; 2]) -> Operator {
        Operator::from_rows2(rows.map(|r| r.map(|(x, y)| c(x, y)))).unwrap()
    }

    #[test]
    fn projectors_match_displayed_matrices() {
        assert_eq!(projector(0).unwrap(), op2([[(1., 0.), (0., 0.)], [(0., 0.), (0., 0.)]]));
        assert_eq!(projector(1).unwrap(), op2([[(0., 0.), (0., 0.)], [(0., 0.), (1., 0.)]]));
        let sum = projector(0).unwrap().add(&projector(1).unwrap()).unwrap();
        assert_eq!(sum, Operator::identity(2).unwrap());
        assert!(projector(2).is_err());
    }

    #[test]
    fn balanced_ssb_operators() {
        let a = QubitAmplitudes::balanced();
        let m0 = op2([[(S, 0.), (S, 0.)], [(-S, 0.), (S, 0.)]]);
        let m1 = op2([[(S, 0.), (-S, 0.)], [(S, 0.), (S, 0.)]]);
        assert_eq!(ssb_unitary(&a, 0).unwrap(), m0);
        assert_eq!(ssb_unitary(&a, 1).unwrap(), m1);
        assert_eq!(ssb_inverse(&a, 0).unwrap(), m1);
        assert_eq!(ssb_inverse(&a, 1).unwrap(), m0);
        let out = apply_operator(&m0, &a.ket()).unwrap();
        assert!(out.max_deviation(&Ket::basis(2, 0).unwrap()).unwrap() < 1e-15);
    }

    #[test]
    fn real_amplitudes_substitute_into_m0() {
        let a = amps((0.6, 0.), (0.8, 0.));
        let m0 = ssb_unitary(&a, 0).unwrap();
        assert_eq!(m0, op2([[(0.6, 0.), (0.8, 0.)], [(-0.8, 0.), (0.6, 0.)]]));
        let out = apply_operator(&m0, &a.ket()).unwrap();
        assert!(out.max_deviation(&Ket::basis(2, 0).unwrap()).unwrap() < 1e-15);
    }

    #[test]
    fn inverse_is_displayed_adjoint() {
        let a = amps((0.6, 0.), (0.0, 0.8));
        let (al, be) = (a.alpha(), a.beta());
        let expected = Operator::from_rows2([[al, -be.conj()], [be, al.conj()]]).unwrap();
        assert_eq!(ssb_inverse(&a, 0).unwrap(), expected);
        for m in 0..2 {
            let prod = ssb_inverse(&a, m).unwrap().compose(&ssb_unitary(&a, m).unwrap()).unwrap();
            assert!(prod.max_deviation(&Operator::identity(2).unwrap()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn flipper_examples() {
        let plain = flipper(&amps((0.6, 0.), (0.8, 0.)));
        assert_eq!(plain, op2([[(0., 0.), (1., 0.)], [(1., 0.), (0., 0.)]]));

        let phi = 0.7_f64;
        let a = QubitAmplitudes::new(c(0.6, 0.0), Complex64::from_polar(0.8, phi)).unwrap();
        let u = flipper(&a);
        assert!((u.entry(0, 1) - Complex64::from_polar(1.0, -2.0 * phi)).norm() < 1e-15);
        assert_eq!(u.entry(1, 0), c(1.0, 0.0));

        // β = 0 falls back to φ = 0.
        assert_eq!(flipper(&amps((1., 0.), (0., 0.))), plain);
    }

    /// Plain 2×2 matrix product, used as an oracle independent of nalgebra.
    fn mul2(a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
        let mut out = [[c(0., 0.); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }

    #[test]
    fn flipper_inverts_m0_for_imaginary_beta() {
        let (al, be) = (c(0.6, 0.0), c(0.0, 0.8));
        let theta = -2.0 * be.arg();
        let u = [[c(0., 0.), Complex64::from_polar(1.0, theta)], [c(1., 0.), c(0., 0.)]];
        let u_dag = [[c(0., 0.), c(1., 0.)], [Complex64::from_polar(1.0, -theta), c(0., 0.)]];
        let m0 = [[al.conj(), be.conj()], [-be, al]];
        let m0_inv = [[al, -be.conj()], [be, al.conj()]];
        let oracle = mul2(mul2(u, m0), u_dag);
        for i in 0..2 {
            for j in 0..2 {
                assert!((oracle[i][j] - m0_inv[i][j]).norm() < 1e-12);
            }
        }
        let a = QubitAmplitudes::new(al, be).unwrap();
        let lib = ssb_unitary(&a, 0).unwrap().conjugated_by(&flipper(&a)).unwrap();
        assert!(lib.max_deviation(&ssb_inverse(&a, 0).unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn flipper_misses_m1_when_alpha_beta_not_real() {
        // U M₁ U† − M₁† has off-diagonal entries α* e^{iθ} − α; here 1.2.
        let a = amps((0.6, 0.), (0.0, 0.8));
        let lhs = ssb_unitary(&a, 1).unwrap().conjugated_by(&flipper(&a)).unwrap();
        let dev = lhs.max_deviation(&ssb_inverse(&a, 1).unwrap()).unwrap();
        assert!((dev - 1.2).abs() < 1e-12);
    }

    #[test]
    fn born_examples() {
        let p = born_probabilities(&QubitAmplitudes::balanced().ket()).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        assert_eq!(born_probabilities(&Ket::basis(2, 0).unwrap()).unwrap(), vec![1.0, 0.0]);
        let p = born_probabilities(&amps((0.6, 0.), (0.8, 0.)).ket()).unwrap();
        assert!((p[0] - 0.36).abs() < 1e-15 && (p[1] - 0.64).abs() < 1e-15);
        assert!(born_probabilities(&Ket::new(vec![c(1., 0.), c(1., 0.)]).unwrap()).is_err());
    }

    #[test]
    fn measure_updates_per_model() {
        let a = amps((0.6, 0.), (0.0, 0.8));
        let psi = a.ket();
        for seed in 0..50 {
            let mut rng = derive_stream(seed, StreamDomain::Trial, 0);
            let proj = measure(&psi, &a, MeasurementModel::Projective, &mut rng).unwrap();
            let mut rng = derive_stream(seed, StreamDomain::Trial, 0);
            let ssb = measure(&psi, &a, MeasurementModel::UnitarySsb, &mut rng).unwrap();
            assert_eq!(proj.outcome, ssb.outcome);
            let target = Ket::basis(2, proj.outcome as usize).unwrap();
            // Projection leaves the phase of β on |1⟩; compare as rays.
            assert!((proj.posterior.ray_fidelity(&target).unwrap() - 1.0).abs() < 1e-12);
            assert!(ssb.posterior.max_deviation(&target).unwrap() < 1e-12);
            assert!((ssb.posterior.norm_sqr() - 1.0).abs() < 1e-12);
            assert_eq!(proj.applied_op.to_string(), format!("PI_{}", proj.outcome));
            assert_eq!(ssb.applied_op.to_string(), format!("M_{}", ssb.outcome));
        }
    }

    #[test]
    fn eigenstate_measures_deterministically() {
        let zero = Ket::basis(2, 0).unwrap();
        let a = QubitAmplitudes::from_ket(&zero).unwrap();
        let mut rng = derive_stream(9, StreamDomain::Trial, 0);
        for model in [MeasurementModel::Projective, MeasurementModel::UnitarySsb] {
            for _ in 0..100 {
                let r = measure(&zero, &a, model, &mut rng).unwrap();
                assert_eq!(r.outcome, 0);
                assert!(r.posterior.max_deviation(&zero).unwrap() < 1e-15);
            }
        }
    }

    #[test]
    fn ssb_measure_rejects_mismatched_amplitudes() {
        let mut rng = derive_stream(0, StreamDomain::Trial, 0);
        let err = measure(
            &Ket::basis(2, 0).unwrap(),
            &QubitAmplitudes::balanced(),
            MeasurementModel::UnitarySsb,
            &mut rng,
        );
        assert!(matches!(err, Err(Error::ContractViolation(_))));
    }

    #[test]
    fn nonselective_examples() {
        let a = amps((0.6, 0.), (0.0, 0.8));
        let rho = DensityMatrix::from_pure(&a.ket()).unwrap();
        let proj = nonselective_channel(&rho, &a, MeasurementModel::Projective).unwrap();
        let expected = DensityMatrix::diagonal(&[0.36, 0.64]).unwrap();
        assert!(proj.max_deviation(&expected).unwrap() < 1e-12);

        // ½ M₀ρM₀† + ½ M₁ρM₁† = ½|0⟩⟨0| + ½|1⟩⟨1|.
        let b = QubitAmplitudes::balanced();
        let rho = DensityMatrix::from_pure(&b.ket()).unwrap();
        let ssb = nonselective_channel(&rho, &b, MeasurementModel::UnitarySsb).unwrap();
        assert!(ssb.max_deviation(&DensityMatrix::diagonal(&[0.5, 0.5]).unwrap()).unwrap() < 1e-12);

        let zero = Ket::basis(2, 0).unwrap();
        let rho0 = DensityMatrix::from_pure(&zero).unwrap();
        let za = QubitAmplitudes::from_ket(&zero).unwrap();
        for model in [MeasurementModel::Projective, MeasurementModel::UnitarySsb] {
            let out = nonselective_channel(&rho0, &za, model).unwrap();
            assert!(out.max_deviation(&rho0).unwrap() < 1e-15);
        }
    }

    #[test]
    fn subensemble_examples() {
        let mixed = DensityMatrix::diagonal(&[0.36, 0.64]).unwrap();
        let a = subensemble(&mixed, 0).unwrap();
        let b = subensemble(&mixed, 1).unwrap();
        assert!(a.max_deviation(&DensityMatrix::diagonal(&[1.0, 0.0]).unwrap()).unwrap() < 1e-15);
        assert!(b.max_deviation(&DensityMatrix::diagonal(&[0.0, 1.0]).unwrap()).unwrap() < 1e-15);
        assert!((a.as_operator().trace().re - 1.0).abs() < 1e-12);
        assert_eq!(
            subensemble(&DensityMatrix::diagonal(&[1.0, 0.0]).unwrap(), 1),
            Err(Error::DegenerateConditioning(1))
        );
        let coherent = DensityMatrix::from_pure(&QubitAmplitudes::balanced().ket()).unwrap();
        assert!(matches!(subensemble(&coherent, 0), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn bell_states_examples_and_gram_oracle() {
        let expect = |v: [f64; 4]| Ket::new(v.iter().map(|&x| c(x, 0.)).collect()).unwrap();
        assert_eq!(bell_state(BellState::PsiPlus), expect([0., S, S, 0.]));
        assert_eq!(bell_state(BellState::PsiMinus), expect([0., S, -S, 0.]));
        assert_eq!(bell_state(BellState::PhiPlus), expect([S, 0., 0., S]));
        for (i, a) in BellState::ALL.iter().enumerate() {
            for (j, b) in BellState::ALL.iter().enumerate() {
                // Gram matrix by explicit sum over components.
                let g: Complex64 = bell_state(*a)
                    .amps()
                    .iter()
                    .zip(bell_state(*b).amps())
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - c(want, 0.)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn bell_operator_examples() {
        let psi = bell_state(BellState::PsiPlus);
        let m0 = bell_measurement_operator(0).unwrap();
        let m1 = bell_measurement_operator(1).unwrap();
        let out0 = apply_operator(&m0, &psi).unwrap();
        let out1 = apply_operator(&m1, &psi).unwrap();
        assert!(out0.max_deviation(&Ket::basis(4, 1).unwrap()).unwrap() < 1e-15);
        assert!(out1.max_deviation(&Ket::basis(4, 2).unwrap()).unwrap() < 1e-15);
        let back = apply_operator(&m1, &out0).unwrap();
        assert!((back.ray_fidelity(&psi).unwrap() - 1.0).abs() < 1e-12);
        let back = apply_operator(&m0, &out1).unwrap();
        assert!((back.ray_fidelity(&psi).unwrap() - 1.0).abs() < 1e-12);
        assert!(bell_measurement_operator(2).is_err());
    }

    #[test]
    fn bell_operators_unitary_and_block_diagonal() {
        let outer = Operator::diagonal(&[1.0, 0.0, 0.0, 1.0]).unwrap();
        for m in 0..2 {
            let op = bell_measurement_operator(m).unwrap();
            assert!(is_unitary(&op, 1e-12));
            let ab = op.compose(&outer).unwrap();
            let ba = outer.compose(&op).unwrap();
            assert!(ab.max_deviation(&ba).unwrap() < 1e-15);
        }
    }

    #[test]
    fn measure_bell_per_model() {
        let psi = bell_state(BellState::PsiPlus);
        let mut rng = derive_stream(3, StreamDomain::Trial, 0);
        for _ in 0..20 {
            for model in [MeasurementModel::Projective, MeasurementModel::UnitarySsb] {
                let r = measure_bell(&psi, model, &mut rng).unwrap();
                let idx = BELL_SUBSPACE[r.outcome as usize];
                assert!(r.posterior.max_deviation(&Ket::basis(4, idx).unwrap()).unwrap() < 1e-15);
            }
        }
        let phi = bell_state(BellState::PhiPlus);
        assert!(measure_bell(&phi, MeasurementModel::Projective, &mut rng).is_err());
        let minus = bell_state(BellState::PsiMinus);
        assert!(measure_bell(&minus, MeasurementModel::UnitarySsb, &mut rng).is_err());
        let r = measure_bell(&minus, MeasurementModel::Projective, &mut rng).unwrap();
        assert_eq!(r.applied_op.to_string(), format!("PI_AB_{}", r.outcome));
    }

    #[test]
    fn ssb_preserves_purity_projective_does_not() {
        let a = amps((0.6, 0.), (0.0, 0.8));
        let rho = DensityMatrix::from_pure(&a.ket()).unwrap();
        for m in 0..2 {
            let out = DensityMatrix::new(rho.as_operator().conjugated_by(&ssb_unitary(&a, m).unwrap()).unwrap())
                .unwrap();
            assert!((purity(&out) - 1.0).abs() < 1e-12);
        }
        let deph = nonselective_channel(&rho, &a, MeasurementModel::Projective).unwrap();
        assert!(deph.idempotency_defect() > 0.1);
    }

    #[test]
    fn model_names_round_trip() {
        for m in [MeasurementModel::Projective, MeasurementModel::UnitarySsb] {
            assert_eq!(m.as_str().parse::<MeasurementModel>().unwrap(), m);
        }
        assert!("collapse".parse::<MeasurementModel>().is_err());
    }
}
