//! Catalog of the operator identities checked by `ssbmeasure verify`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::Serialize;

use ssbmeasure::measurement::{
    bell_measurement_operator, bell_state, flipper, nonselective_channel, projector, ssb_inverse, ssb_unitary,
    BellState, MeasurementModel, QubitAmplitudes,
};
use ssbmeasure::qcore::{apply_operator, DensityMatrix, Ket, Operator};
use ssbmeasure::rng::{derive_stream, StreamDomain};

/// Floor for the "is not a projector" rows.
pub const NON_PROJECTOR_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    /// Passes when the worst deviation is at most the tolerance.
    MaxDeviation,
    /// Passes when the smallest observed norm exceeds the tolerance.
    LowerBound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationRow {
    pub name: &'static str,
    pub identity: &'static str,
    pub kind: RowKind,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub tol: f64,
    pub samples: u64,
    pub seed: u64,
    pub rows: Vec<VerificationRow>,
    pub overall: bool,
}

impl VerificationReport {
    pub fn row(&self, name: &str) -> Option<&VerificationRow> {
        self.rows.iter().find(|r| r.name == name)
    }
}

struct Accumulator {
    name: &'static str,
    identity: &'static str,
    kind: RowKind,
    value: f64,
}

impl Accumulator {
    fn deviation(name: &'static str, identity: &'static str) -> Self {
        Self { name, identity, kind: RowKind::MaxDeviation, value: 0.0 }
    }

    fn lower_bound(name: &'static str, identity: &'static str) -> Self {
        Self { name, identity, kind: RowKind::LowerBound, value: f64::INFINITY }
    }

    fn observe(&mut self, x: f64) {
        self.value = match self.kind {
            RowKind::MaxDeviation => self.value.max(x),
            RowKind::LowerBound => self.value.min(x),
        };
    }

    fn finish(self, tol: f64) -> VerificationRow {
        let (tolerance, pass) = match self.kind {
            RowKind::MaxDeviation => (tol, self.value <= tol),
            RowKind::LowerBound => (NON_PROJECTOR_FLOOR, self.value > NON_PROJECTOR_FLOOR),
        };
        VerificationRow {
            name: self.name,
            identity: self.identity,
            kind: self.kind,
            value: self.value,
            tolerance,
            pass,
        }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// 2×2 inverse by the adjugate formula, independent of the adjoint route.
fn inverse2(op: &Operator) -> Operator {
    let (a, b, cc, d) = (op.entry(0, 0), op.entry(0, 1), op.entry(1, 0), op.entry(1, 1));
    let det = a * d - b * cc;
    Operator::from_rows2([[d / det, -b / det], [-cc / det, a / det]]).expect("invertible")
}

fn dev(a: &Operator, b: &Operator) -> f64 {
    a.max_deviation(b).expect("same dimension")
}

fn ket_dev(a: &Ket, b: &Ket) -> f64 {
    a.max_deviation(b).expect("same dimension")
}

/// Evaluates every cataloged identity over `samples` random amplitude pairs.
pub fn cmd_verify(tol: f64, samples: u64, seed: u64) -> VerificationReport {
    let id2 = Operator::identity(2).expect("dim 2");
    let id4 = Operator::identity(4).expect("dim 4");

    let mut m_unitary = [
        Accumulator::deviation("M0_unitary", "M0^dag M0 = I"),
        Accumulator::deviation("M1_unitary", "M1^dag M1 = I"),
    ];
    let mut m_maps = [
        Accumulator::deviation("M0_maps_psi_to_0", "M0 |psi> = |0>"),
        Accumulator::deviation("M1_maps_psi_to_1", "M1 |psi> = |1>"),
    ];
    let mut m_inverse = [
        Accumulator::deviation("M0_inverse_is_adjoint", "M0^-1 = M0^dag"),
        Accumulator::deviation("M1_inverse_is_adjoint", "M1^-1 = M1^dag"),
    ];
    let mut m0m1 = Accumulator::lower_bound("M0_M1_not_projectors", "M0 M1 != 0 and M1 M0 != 0");
    let mut m_sum = Accumulator::lower_bound("M0_plus_M1_not_identity", "M0 + M1 != I");
    let mut flip = [
        Accumulator::deviation("flipper_M0", "U M0 U^dag = M0^-1, theta = -2 phi"),
        Accumulator::deviation("flipper_M1", "U M1 U^dag = M1^-1, theta = -2 phi"),
    ];
    let mut channels = Accumulator::deviation(
        "nonselective_models_agree",
        "sum_m Pi_m rho Pi_m = sum_m p_m M_m rho M_m^dag",
    );

    let mut rng = derive_stream(seed, StreamDomain::Verification, 0);
    for _ in 0..samples {
        let amps = QubitAmplitudes::random(&mut rng);
        let psi = amps.ket();
        let m = [ssb_unitary(&amps, 0).expect("m=0"), ssb_unitary(&amps, 1).expect("m=1")];
        let u = flipper(&amps);
        for k in 0..2u8 {
            let op = &m[k as usize];
            let inv = ssb_inverse(&amps, k).expect("m in range");
            m_unitary[k as usize].observe(dev(&op.adjoint().compose(op).expect("2x2"), &id2));
            let image = apply_operator(op, &psi).expect("2x2");
            m_maps[k as usize].observe(ket_dev(&image, &Ket::basis(2, k as usize).expect("basis")));
            m_inverse[k as usize].observe(dev(&inverse2(op), &inv));
            flip[k as usize].observe(dev(&op.conjugated_by(&u).expect("2x2"), &inv));
        }
        let p01 = m[0].compose(&m[1]).expect("2x2").max_abs();
        let p10 = m[1].compose(&m[0]).expect("2x2").max_abs();
        m0m1.observe(p01.min(p10));
        m_sum.observe(m[0].add(&m[1]).and_then(|s| s.sub(&id2)).expect("2x2").max_abs());

        let rho = DensityMatrix::from_pure(&psi).expect("normalized");
        let a = nonselective_channel(&rho, &amps, MeasurementModel::Projective).expect("valid");
        let b = nonselective_channel(&rho, &amps, MeasurementModel::UnitarySsb).expect("valid");
        channels.observe(a.max_deviation(&b).expect("2x2"));
    }

    // Sample-independent identities.
    let (pi0, pi1) = (projector(0).expect("m=0"), projector(1).expect("m=1"));
    let zero2 = Operator::zeros(2).expect("dim 2");
    let mut pi_prod = Accumulator::deviation("PI_products_vanish", "Pi0 Pi1 = Pi1 Pi0 = 0");
    pi_prod.observe(dev(&pi0.compose(&pi1).expect("2x2"), &zero2));
    pi_prod.observe(dev(&pi1.compose(&pi0).expect("2x2"), &zero2));
    let mut pi_sum = Accumulator::deviation("PI_sum_identity", "Pi0 + Pi1 = I");
    pi_sum.observe(dev(&pi0.add(&pi1).expect("2x2"), &id2));

    let balanced = QubitAmplitudes::balanced();
    let i_sigma_y = Operator::from_rows2([[c(0., 0.), c(1., 0.)], [c(-1., 0.), c(0., 0.)]]).expect("finite");
    let s = c(FRAC_1_SQRT_2, 0.0);
    let plus = id2.add(&i_sigma_y).expect("2x2").scale(s);
    let minus = id2.sub(&i_sigma_y).expect("2x2").scale(s);
    let bm0 = ssb_unitary(&balanced, 0).expect("m=0");
    let bm1 = ssb_unitary(&balanced, 1).expect("m=1");
    let mut bal0 = Accumulator::deviation("balanced_M0", "M0 = (I + i sigma_y)/sqrt2 at alpha = beta = 1/sqrt2");
    bal0.observe(dev(&bm0, &plus));
    let mut bal1 = Accumulator::deviation("balanced_M1", "M1 = (I - i sigma_y)/sqrt2 at alpha = beta = 1/sqrt2");
    bal1.observe(dev(&bm1, &minus));
    let mut bal_inv = Accumulator::deviation("balanced_M0_is_M1_inverse", "M0 = M1^-1 at alpha = beta = 1/sqrt2");
    bal_inv.observe(dev(&bm0, &ssb_inverse(&balanced, 1).expect("m=1")));
    let mut bal_flip = Accumulator::deviation("balanced_flipper_is_X", "U = [[0,1],[1,0]] at alpha = beta = 1/sqrt2");
    bal_flip.observe(dev(
        &flipper(&balanced),
        &Operator::from_rows2([[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]]).expect("finite"),
    ));

    let bell = bell_state(BellState::PsiPlus);
    let (ab0, ab1) = (bell_measurement_operator(0).expect("m=0"), bell_measurement_operator(1).expect("m=1"));
    let mut bell_unitary = Accumulator::deviation("bell_M_AB_unitary", "M_AB_m^dag M_AB_m = I");
    for op in [&ab0, &ab1] {
        bell_unitary.observe(dev(&op.adjoint().compose(op).expect("4x4"), &id4));
    }
    let mut bell_map0 = Accumulator::deviation("bell_M_AB0_maps_to_01", "M_AB_0 |Psi+> = |01>");
    bell_map0.observe(ket_dev(&apply_operator(&ab0, &bell).expect("4x4"), &Ket::basis(4, 1).expect("basis")));
    let mut bell_map1 = Accumulator::deviation("bell_M_AB1_maps_to_10", "M_AB_1 |Psi+> = |10>");
    bell_map1.observe(ket_dev(&apply_operator(&ab1, &bell).expect("4x4"), &Ket::basis(4, 2).expect("basis")));
    let mut rev10 = Accumulator::deviation("bell_reversal_M1_M0", "M_AB_1 M_AB_0 |Psi+> = |Psi+>");
    rev10.observe(ket_dev(&apply_operator(&ab1.compose(&ab0).expect("4x4"), &bell).expect("4x4"), &bell));
    let mut rev01 = Accumulator::deviation("bell_reversal_M0_M1", "M_AB_0 M_AB_1 |Psi+> = |Psi+>");
    rev01.observe(ket_dev(&apply_operator(&ab0.compose(&ab1).expect("4x4"), &bell).expect("4x4"), &bell));

    let [mu0, mu1] = m_unitary;
    let [mm0, mm1] = m_maps;
    let [mi0, mi1] = m_inverse;
    let [f0, f1] = flip;
    let rows: Vec<VerificationRow> = [
        mu0, mu1, mm0, mm1, mi0, mi1, pi_prod, pi_sum, m0m1, m_sum, f0, f1, bal0, bal1, bal_inv, bal_flip, channels,
        bell_unitary, bell_map0, bell_map1, rev10, rev01,
    ]
    .into_iter()
    .map(|a| a.finish(tol))
    .collect();
    let overall = rows.iter().all(|r| r.pass);
    VerificationReport { tol, samples, seed, rows, overall }
}
