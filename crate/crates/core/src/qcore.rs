//! Dense complex linear algebra over the 2- and 4-dimensional Hilbert spaces
//! of one and two qubits: kets, operators, density matrices and the metrics
//! (purity, fidelity, trace distance) the rest of the crate is built on.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Complex amplitude or matrix entry.
pub type ComplexScalar = Complex64;

/// Normalization tolerance for kets.
pub const NORM_TOL: f64 = 1e-12;
/// Entrywise Hermiticity tolerance for density matrices.
pub const HERM_TOL: f64 = 1e-12;
/// Unitarity tolerance used when none is supplied.
pub const UNITARY_TOL: f64 = 1e-12;
/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-12;
/// Smallest eigenvalue a density matrix may carry.
pub const PSD_FLOOR: f64 = -1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Builds a complex scalar, rejecting NaN and infinities.
pub fn complex(re: f64, im: f64) -> Result<ComplexScalar> {
    if re.is_finite() && im.is_finite() {
        Ok(Complex64::new(re, im))
    } else {
        Err(Error::NonFinite("complex scalar"))
    }
}

fn check_dim(dim: usize) -> Result<()> {
    match dim {
        2 | 4 => Ok(()),
        d => Err(Error::UnsupportedDimension(d)),
    }
}

fn all_finite<'a>(it: impl IntoIterator<Item = &'a Complex64>) -> bool {
    it.into_iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// State vector of one or two qubits.
///
/// A `Ket` is not necessarily normalized: operator application never
/// renormalizes, and projective updates call [`Ket::renormalized`] explicitly.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    amps: DVector<Complex64>,
}

impl Ket {
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        check_dim(amps.len())?;
        if !all_finite(&amps) {
            return Err(Error::NonFinite("ket"));
        }
        Ok(Self {
            amps: DVector::from_vec(amps),
        })
    }

    /// Builds a ket and checks that it is normalized within [`NORM_TOL`].
    pub fn normalized(amps: Vec<Complex64>) -> Result<Self> {
        let ket = Self::new(amps)?;
        ket.require_normalized()?;
        Ok(ket)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        check_dim(dim)?;
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Self::new(amps)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Complex64] {
        self.amps.as_slice()
    }

    pub fn amp(&self, k: usize) -> Complex64 {
        self.amps[k]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOL
    }

    pub(crate) fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized(self.norm_sqr()))
        }
    }

    /// Divides by the norm. Fails on the zero vector.
    pub fn renormalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return Err(Error::ContractViolation(
                "cannot renormalize the zero vector".into(),
            ));
        }
        Ok(Self {
            amps: &self.amps / Complex64::new(n, 0.0),
        })
    }

    /// Inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &Ket) -> Result<Complex64> {
        same_dim(self.dim(), other.dim())?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// `|⟨self|other⟩|²`, insensitive to global phase.
    pub fn ray_fidelity(&self, other: &Ket) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Outer product `|self⟩⟨self|` as an operator.
    pub fn outer(&self) -> Operator {
        Operator {
            m: &self.amps * self.amps.adjoint(),
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            amps: &self.amps * c,
        }
    }

    /// Largest entrywise distance to `other`.
    pub fn max_deviation(&self, other: &Ket) -> Result<f64> {
        same_dim(self.dim(), other.dim())?;
        Ok(self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

impl Serialize for Ket {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Ket", 2)?;
        st.serialize_field("re", &self.amps.iter().map(|z| z.re).collect::<Vec<_>>())?;
        st.serialize_field("im", &self.amps.iter().map(|z| z.im).collect::<Vec<_>>())?;
        st.end()
    }
}

fn same_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Square complex matrix acting on one or two qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    m: DMatrix<Complex64>,
}

impl Operator {
    /// Builds a `dim × dim` operator from row-major entries.
    pub fn from_row_slice(dim: usize, entries: &[Complex64]) -> Result<Self> {
        check_dim(dim)?;
        same_dim(dim * dim, entries.len())?;
        if !all_finite(entries) {
            return Err(Error::NonFinite("operator"));
        }
        Ok(Self {
            m: DMatrix::from_row_slice(dim, dim, entries),
        })
    }

    /// Builds a 2×2 operator from its rows.
    pub fn from_rows2(rows: [[Complex64; 2]; 2]) -> Result<Self> {
        Self::from_row_slice(2, rows.as_flattened())
    }

    pub(crate) fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::ContractViolation("operator must be square".into()));
        }
        check_dim(m.nrows())?;
        if !all_finite(m.iter()) {
            return Err(Error::NonFinite("operator"));
        }
        Ok(Self { m })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            m: DMatrix::identity(dim, dim),
        })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            m: DMatrix::zeros(dim, dim),
        })
    }

    /// Diagonal operator with real entries.
    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let d: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        check_dim(d.len())?;
        Self::from_matrix(DMatrix::from_diagonal(&DVector::from_vec(d)))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.m[(row, col)]
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn adjoint(&self) -> Self {
        Self {
            m: self.m.adjoint(),
        }
    }

    /// Matrix product `self · rhs`.
    pub fn compose(&self, rhs: &Operator) -> Result<Self> {
        same_dim(self.dim(), rhs.dim())?;
        Ok(Self { m: &self.m * &rhs.m })
    }

    pub fn add(&self, rhs: &Operator) -> Result<Self> {
        same_dim(self.dim(), rhs.dim())?;
        Ok(Self { m: &self.m + &rhs.m })
    }

    pub fn sub(&self, rhs: &Operator) -> Result<Self> {
        same_dim(self.dim(), rhs.dim())?;
        Ok(Self { m: &self.m - &rhs.m })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { m: &self.m * c }
    }

    /// `u · self · u†`.
    pub fn conjugated_by(&self, u: &Operator) -> Result<Self> {
        u.compose(self)?.compose(&u.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.m.trace()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise distance to `other`.
    pub fn max_deviation(&self, other: &Operator) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| (self.m[(i, j)] - self.m[(j, i)].conj()).norm() <= tol))
    }

    /// Eigen-decomposition of a Hermitian operator, eigenvalues ascending.
    ///
    /// Only the Hermitian part `(A + A†)/2` is decomposed.
    pub fn hermitian_eigen(&self) -> (Vec<f64>, Vec<Ket>) {
        let h = (&self.m + self.m.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = h.symmetric_eigen();
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = order
            .iter()
            .map(|&k| Ket {
                amps: eig.eigenvectors.column(k).into_owned(),
            })
            .collect();
        (values, vectors)
    }
}

impl Serialize for Operator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serialize_matrix(&self.m, "Operator", serializer)
    }
}

fn serialize_matrix<S: Serializer>(
    m: &DMatrix<Complex64>,
    name: &'static str,
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
            .collect()
    };
    let mut st = serializer.serialize_struct(name, 2)?;
    st.serialize_field("re", &rows(|z| z.re))?;
    st.serialize_field("im", &rows(|z| z.im))?;
    st.end()
}

/// Matrix-vector product. The result is not renormalized.
pub fn apply_operator(op: &Operator, ket: &Ket) -> Result<Ket> {
    same_dim(op.dim(), ket.dim())?;
    Ok(Ket {
        amps: &op.m * &ket.amps,
    })
}

/// Unitarity check: max entry of `op†op − 𝕀` at most `tol`.
pub fn is_unitary(op: &Operator, tol: f64) -> bool {
    let gram = &op.m.adjoint() * &op.m;
    let dev = (gram - DMatrix::<Complex64>::identity(op.dim(), op.dim()))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    dev <= tol
}

/// Kronecker product in the `{|00⟩, |01⟩, |10⟩, |11⟩}` ordering, first factor
/// on the high index.
pub trait TensorProduct: Sized {
    fn tensor(&self, other: &Self) -> Result<Self>;
}

impl TensorProduct for Ket {
    fn tensor(&self, other: &Self) -> Result<Self> {
        let amps = self.amps.kronecker(&other.amps);
        check_dim(amps.len())?;
        Ok(Ket { amps })
    }
}

impl TensorProduct for Operator {
    fn tensor(&self, other: &Self) -> Result<Self> {
        Operator::from_matrix(self.m.kronecker(&other.m))
    }
}

pub fn tensor_product<T: TensorProduct>(a: &T, b: &T) -> Result<T> {
    a.tensor(b)
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: Operator,
}

impl DensityMatrix {
    pub fn new(op: Operator) -> Result<Self> {
        if !op.is_hermitian(HERM_TOL) {
            return Err(Error::InvalidDensityMatrix("not Hermitian".into()));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} != 1")));
        }
        let (values, _) = op.hermitian_eigen();
        if values[0] < PSD_FLOOR {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {:e}",
                values[0]
            )));
        }
        Ok(Self { op })
    }

    /// `|ψ⟩⟨ψ|` for a normalized ket.
    pub fn from_pure(psi: &Ket) -> Result<Self> {
        psi.require_normalized()?;
        Self::new(psi.outer())
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(Operator::diagonal(diag)?)
    }

    /// Weighted mixture `Σ wₖ |ψₖ⟩⟨ψₖ|`. Weights must sum to 1.
    pub fn mixture(parts: &[(f64, Ket)]) -> Result<Self> {
        let first = parts.first().ok_or(Error::EmptyEnsemble)?;
        let mut acc = Operator::zeros(first.1.dim())?;
        for (w, psi) in parts {
            psi.require_normalized()?;
            acc = acc.add(&psi.outer().scale(Complex64::new(*w, 0.0)))?;
        }
        Self::new(acc)
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.op.entry(row, col)
    }

    pub fn as_operator(&self) -> &Operator {
        &self.op
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.op.hermitian_eigen().0
    }

    /// `ρ² − ρ` largest entry; zero iff the state is pure.
    pub fn idempotency_defect(&self) -> f64 {
        let sq = self.op.compose(&self.op).expect("same dimension");
        sq.max_deviation(&self.op).expect("same dimension")
    }

    pub fn max_deviation(&self, other: &DensityMatrix) -> Result<f64> {
        self.op.max_deviation(&other.op)
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serialize_matrix(&self.op.m, "DensityMatrix", serializer)
    }
}

/// `Tr(ρ²)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    let m = rho.op.matrix();
    // Tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ.
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// `⟨ψ|ρ|ψ⟩` for a normalized ket.
pub fn fidelity_pure(psi: &Ket, rho: &DensityMatrix) -> Result<f64> {
    psi.require_normalized()?;
    same_dim(rho.dim(), psi.dim())?;
    let v = rho.op.matrix() * &psi.amps;
    Ok(psi.amps.dotc(&v).re)
}

/// `½ Σ |λᵢ(a − b)|`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    let diff = a.op.sub(&b.op)?;
    let (values, _) = diff.hermitian_eigen();
    Ok(0.5 * values.iter().map(|x| x.abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_leaves_ket_alone() {
        let psi = Ket::normalized(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let out = apply_operator(&Operator::identity(2).unwrap(), &psi).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn projector_application_is_not_renormalized() {
        let pi0 = Operator::diagonal(&[1.0, 0.0]).unwrap();
        let psi = Ket::normalized(vec![c(0.6, 0.0), c(0.8, 0.0)]).unwrap();
        let out = apply_operator(&pi0, &psi).unwrap();
        assert_eq!(out.amps(), &[c(0.6, 0.0), c(0.0, 0.0)]);
        assert!(!out.is_normalized());
    }

    #[test]
    fn apply_rejects_dimension_mismatch() {
        let err = apply_operator(&Operator::identity(4).unwrap(), &Ket::basis(2, 0).unwrap());
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn constructors_reject_non_finite() {
        assert!(complex(f64::NAN, 0.0).is_err());
        assert!(Ket::new(vec![c(f64::INFINITY, 0.0), c(0.0, 0.0)]).is_err());
        assert!(Operator::from_rows2([[c(0.0, f64::NAN), ZERO], [ZERO, ONE]]).is_err());
        assert!(Ket::new(vec![ONE; 3]).is_err());
    }

    #[test]
    fn basis_kets_tensor_into_four_vector() {
        let k = tensor_product(&Ket::basis(2, 0).unwrap(), &Ket::basis(2, 1).unwrap()).unwrap();
        assert_eq!(k.amps(), &[ZERO, ONE, ZERO, ZERO]);
    }

    #[test]
    fn tensor_builds_psi_plus() {
        let k0 = Ket::basis(2, 0).unwrap();
        let k1 = Ket::basis(2, 1).unwrap();
        let a = tensor_product(&k0, &k1).unwrap();
        let b = tensor_product(&k1, &k0).unwrap();
        let s = c(FRAC_1_SQRT_2, 0.0);
        let psi: Vec<_> = a.amps().iter().zip(b.amps()).map(|(x, y)| (x + y) * s).collect();
        assert_eq!(psi, vec![ZERO, s, s, ZERO]);
    }

    #[test]
    fn tensor_of_identities_is_identity() {
        let i2 = Operator::identity(2).unwrap();
        assert_eq!(tensor_product(&i2, &i2).unwrap(), Operator::identity(4).unwrap());
        assert!(matches!(
            tensor_product(&Operator::identity(4).unwrap(), &i2),
            Err(Error::UnsupportedDimension(8))
        ));
    }

    #[test]
    fn purity_examples() {
        let pure = DensityMatrix::from_pure(&Ket::basis(2, 0).unwrap()).unwrap();
        assert_eq!(purity(&pure), 1.0);
        assert_eq!(purity(&DensityMatrix::diagonal(&[0.5, 0.5]).unwrap()), 0.5);
        let p = purity(&DensityMatrix::diagonal(&[0.36, 0.64]).unwrap());
        assert!((p - 0.5392).abs() < 1e-15);
    }

    #[test]
    fn fidelity_examples() {
        let psi = Ket::normalized(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        assert!((fidelity_pure(&psi, &rho).unwrap() - 1.0).abs() < 1e-12);

        let one = DensityMatrix::from_pure(&Ket::basis(2, 1).unwrap()).unwrap();
        assert_eq!(fidelity_pure(&Ket::basis(2, 0).unwrap(), &one).unwrap(), 0.0);

        // ⟨Ψ⁺|ρ̃|Ψ⁺⟩ = ½·½·(ρ₁₁ + ρ₂₂) = ½ for ρ̃ = diag(0, ½, ½, 0).
        let s = c(FRAC_1_SQRT_2, 0.0);
        let bell = Ket::normalized(vec![ZERO, s, s, ZERO]).unwrap();
        let mixed = DensityMatrix::diagonal(&[0.0, 0.5, 0.5, 0.0]).unwrap();
        assert!((fidelity_pure(&bell, &mixed).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fidelity_requires_normalized_matching_ket() {
        let rho = DensityMatrix::diagonal(&[0.5, 0.5]).unwrap();
        let unnorm = Ket::new(vec![ONE, ONE]).unwrap();
        assert!(matches!(fidelity_pure(&unnorm, &rho), Err(Error::NotNormalized(_))));
        let four = Ket::basis(4, 0).unwrap();
        assert!(matches!(
            fidelity_pure(&four, &rho),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn unitarity_examples() {
        assert!(is_unitary(&Operator::identity(2).unwrap(), 1e-12));
        assert!(!is_unitary(&Operator::diagonal(&[1.0, 0.0]).unwrap(), 1e-12));
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::diagonal(&[0.6, 0.6]).is_err());
        assert!(DensityMatrix::diagonal(&[1.1, -0.1]).is_err());
        let non_herm = Operator::from_rows2([[c(0.5, 0.0), c(0.1, 0.0)], [ZERO, c(0.5, 0.0)]]).unwrap();
        assert!(DensityMatrix::new(non_herm).is_err());
        assert!(DensityMatrix::diagonal(&[1.0 + 1e-11, -1e-11]).is_ok());
    }

    #[test]
    fn trace_distance_of_orthogonal_states_is_one() {
        let a = DensityMatrix::from_pure(&Ket::basis(2, 0).unwrap()).unwrap();
        let b = DensityMatrix::from_pure(&Ket::basis(2, 1).unwrap()).unwrap();
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-14);
        assert!(trace_distance(&a, &a).unwrap() < 1e-15);
    }

    #[test]
    fn ray_fidelity_ignores_global_phase() {
        let psi = Ket::normalized(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let rotated = psi.scaled(Complex64::from_polar(1.0, 1.234));
        assert!((psi.ray_fidelity(&rotated).unwrap() - 1.0).abs() < 1e-12);
        assert!(psi.max_deviation(&rotated).unwrap() > 0.1);
    }
}
