//! Complex matrices, unitaries and optical-element synthesis.
//!
//! Every unitary in this crate is read as a mode transformation on creation
//! operators, `a_i† ↦ Σ_j U[i][j] a_j†`. With that reading, applying element
//! `E₁` and then `E₂` yields the matrix product `E₁·E₂`, so
//! [`compose_interferometer`] multiplies elements in application order.
//!
//! Beamsplitters between modes `a` and `b` use the block
//!
//! ```text
//! [ cos θ            −e^{−iφ} sin θ ]
//! [ e^{iφ} sin θ      cos θ         ]
//! ```
//!
//! with row/column 0 standing for mode `a`. Phase shifters multiply one
//! creation operator by `e^{iφ}`.

use std::ops::{Deref, Index, IndexMut, Mul};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::io::{json_array, json_complex, JsonObject};

/// Maximum allowed `‖U†U − I‖_max` for a matrix accepted as unitary.
pub const UNITARITY_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::InvalidDimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidInput(format!(
                "non-finite entry at ({}, {})",
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidDimension("ragged rows".into()));
        }
        Self::new(r, c, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::InvalidDimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        Ok(out)
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Right-multiplies by a 2×2 block embedded at columns `(a, b)`.
    fn mix_columns(&mut self, a: usize, b: usize, block: [[Complex64; 2]; 2]) {
        for i in 0..self.rows {
            let x = self.data[i * self.cols + a];
            let y = self.data[i * self.cols + b];
            self.data[i * self.cols + a] = x * block[0][0] + y * block[1][0];
            self.data[i * self.cols + b] = x * block[0][1] + y * block[1][1];
        }
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    fn from_nalgebra(m: &DMatrix<Complex64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
            .expect("dimension mismatch in matrix product")
    }
}

/// Returns `‖A†A − I‖_max`.
pub fn unitarity_defect(a: &ComplexMatrix) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::InvalidDimension(format!(
            "unitarity needs a square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    let gram = &a.adjoint() * a;
    Ok(gram.max_abs_diff(&ComplexMatrix::identity(a.rows)))
}

/// A square matrix that passed the unitarity check.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix(ComplexMatrix);

impl UnitaryMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.rows == 0 {
            return Err(Error::InvalidDimension(
                "unitary must have dimension >= 1".into(),
            ));
        }
        let defect = unitarity_defect(&matrix)?;
        if defect.is_nan() || defect >= UNITARITY_TOL {
            return Err(Error::InvalidUnitary {
                defect,
                tol: UNITARITY_TOL,
            });
        }
        Ok(Self(matrix))
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_inner(self) -> ComplexMatrix {
        self.0
    }

    /// `{"dim": m, "entries": [[re, im], ...]}`, row-major.
    pub fn to_json(&self) -> String {
        JsonObject::new()
            .int("dim", self.dim() as u64)
            .raw(
                "entries",
                &json_array(self.0.data.iter().map(|z| json_complex(*z))),
            )
            .finish()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Wire {
            dim: usize,
            entries: Vec<[f64; 2]>,
        }
        let wire: Wire = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let data = wire
            .entries
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        Self::new(ComplexMatrix::new(wire.dim, wire.dim, data)?)
    }
}

impl Deref for UnitaryMatrix {
    type Target = ComplexMatrix;

    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// Haar-random `m × m` unitary, deterministic per seed.
///
/// QR-factorizes a complex Ginibre matrix and rescales each column of `Q` by
/// the phase of the matching diagonal entry of `R`, which removes the bias of
/// the factorization's sign convention.
pub fn haar_random_unitary(m: usize, seed: u64) -> Result<UnitaryMatrix> {
    if m == 0 {
        return Err(Error::InvalidDimension("Haar unitary needs m >= 1".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let ginibre = ComplexMatrix::from_fn(m, m, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * scale, im * scale)
    });
    let qr = ginibre.to_nalgebra().qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..m {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..m {
            q[(i, j)] *= phase;
        }
    }
    UnitaryMatrix::new(ComplexMatrix::from_nalgebra(&q))
}

/// A single passive optical element acting on one or two modes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ElementaryOp {
    Beamsplitter {
        theta: f64,
        phi: f64,
        mode_a: usize,
        mode_b: usize,
    },
    PhaseShifter {
        phi: f64,
        mode: usize,
    },
}

impl ElementaryOp {
    pub fn balanced_beamsplitter(mode_a: usize, mode_b: usize) -> Self {
        Self::Beamsplitter {
            theta: std::f64::consts::FRAC_PI_4,
            phi: 0.0,
            mode_a,
            mode_b,
        }
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        match *self {
            Self::Beamsplitter {
                theta,
                phi,
                mode_a,
                mode_b,
            } => {
                if mode_a >= m || mode_b >= m {
                    return Err(Error::InvalidOp(format!(
                        "beamsplitter modes ({mode_a}, {mode_b}) out of range for {m} modes"
                    )));
                }
                if mode_a == mode_b {
                    return Err(Error::InvalidOp(format!(
                        "beamsplitter couples mode {mode_a} to itself"
                    )));
                }
                if !theta.is_finite() || !phi.is_finite() {
                    return Err(Error::InvalidOp("non-finite beamsplitter angle".into()));
                }
            }
            Self::PhaseShifter { phi, mode } => {
                if mode >= m {
                    return Err(Error::InvalidOp(format!(
                        "phase shifter mode {mode} out of range for {m} modes"
                    )));
                }
                if !phi.is_finite() {
                    return Err(Error::InvalidOp("non-finite phase".into()));
                }
            }
        }
        Ok(())
    }

    /// The 2×2 block `[[B_aa, B_ab], [B_ba, B_bb]]` of a beamsplitter.
    pub fn beamsplitter_block(theta: f64, phi: f64) -> [[Complex64; 2]; 2] {
        let (s, c) = theta.sin_cos();
        let e = Complex64::from_polar(1.0, phi);
        [
            [Complex64::new(c, 0.0), -e.conj() * s],
            [e * s, Complex64::new(c, 0.0)],
        ]
    }

    pub fn to_matrix(&self, m: usize) -> Result<ComplexMatrix> {
        self.validate(m)?;
        let mut u = ComplexMatrix::identity(m);
        self.right_apply(&mut u);
        Ok(u)
    }

    fn right_apply(&self, u: &mut ComplexMatrix) {
        match *self {
            Self::Beamsplitter {
                theta,
                phi,
                mode_a,
                mode_b,
            } => {
                u.mix_columns(mode_a, mode_b, Self::beamsplitter_block(theta, phi));
            }
            Self::PhaseShifter { phi, mode } => {
                let e = Complex64::from_polar(1.0, phi);
                for i in 0..u.rows {
                    u[(i, mode)] *= e;
                }
            }
        }
    }
}

/// Multiplies elementary unitaries in application order.
pub fn compose_interferometer(ops: &[ElementaryOp], m: usize) -> Result<UnitaryMatrix> {
    if m == 0 {
        return Err(Error::InvalidDimension(
            "interferometer needs m >= 1".into(),
        ));
    }
    let mut u = ComplexMatrix::identity(m);
    for op in ops {
        op.validate(m)?;
        op.right_apply(&mut u);
    }
    UnitaryMatrix::new(u)
}

/// Factorizes `U` into a triangular nearest-neighbour beamsplitter mesh
/// followed by output phases.
///
/// Rows are cleared bottom-up: for row `r`, entries `0..r` are zeroed from
/// left to right by mixing columns `(j, j+1)`. Once row `r` is cleared,
/// unitarity forces column `r` to vanish off the diagonal as well, so later
/// steps never touch it. The leftover diagonal becomes phase shifters that
/// are applied first; zero phases and identity beamsplitters are dropped.
pub fn reck_decompose(u: &UnitaryMatrix) -> Vec<ElementaryOp> {
    let m = u.dim();
    let mut w = u.matrix().clone();
    let mut nulling = Vec::with_capacity(m * (m - 1) / 2);
    for r in (1..m).rev() {
        for j in 0..r {
            let x = w[(r, j)];
            if x.norm() == 0.0 {
                continue;
            }
            let y = w[(r, j + 1)];
            let theta = x.norm().atan2(y.norm());
            let phi = if y.norm() == 0.0 {
                0.0
            } else {
                (-x * y.conj()).arg()
            };
            let op = ElementaryOp::Beamsplitter {
                theta,
                phi,
                mode_a: j,
                mode_b: j + 1,
            };
            op.right_apply(&mut w);
            w[(r, j)] = ZERO;
            nulling.push(op);
        }
    }
    let mut ops: Vec<ElementaryOp> = (0..m)
        .filter_map(|k| {
            let phi = w[(k, k)].arg();
            (phi != 0.0).then_some(ElementaryOp::PhaseShifter { phi, mode: k })
        })
        .collect();
    // U·E₁⋯E_K = D  ⇒  U = D·E_K⁻¹⋯E₁⁻¹, and B(θ, φ)⁻¹ = B(−θ, φ).
    ops.extend(nulling.iter().rev().map(|op| match *op {
        ElementaryOp::Beamsplitter {
            theta,
            phi,
            mode_a,
            mode_b,
        } => ElementaryOp::Beamsplitter {
            theta: -theta,
            phi,
            mode_a,
            mode_b,
        },
        other => other,
    }));
    ops
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn haar_one_mode_is_a_phase() {
        let u = haar_random_unitary(1, 42).unwrap();
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn haar_is_seed_deterministic() {
        assert_eq!(
            haar_random_unitary(4, 7).unwrap(),
            haar_random_unitary(4, 7).unwrap()
        );
        assert_ne!(
            haar_random_unitary(4, 7).unwrap(),
            haar_random_unitary(4, 8).unwrap()
        );
    }

    #[test]
    fn haar_is_unitary() {
        let u = haar_random_unitary(5, 3).unwrap();
        assert!(unitarity_defect(&u).unwrap() < 1e-12);
        for j in 0..5 {
            let norm: f64 = (0..5).map(|i| u[(i, j)].norm_sqr()).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
        assert!(matches!(
            haar_random_unitary(0, 1),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn defect_examples() {
        assert_eq!(unitarity_defect(&ComplexMatrix::identity(3)).unwrap(), 0.0);
        let two = ComplexMatrix::identity(3).scale(c(2.0, 0.0));
        assert_eq!(unitarity_defect(&two).unwrap(), 3.0);
        assert!(unitarity_defect(&ComplexMatrix::zeros(2, 3)).is_err());
        assert!(matches!(
            UnitaryMatrix::new(two),
            Err(Error::InvalidUnitary { .. })
        ));
    }

    #[test]
    fn compose_examples() {
        let id = compose_interferometer(&[], 3).unwrap();
        assert_eq!(id.matrix(), &ComplexMatrix::identity(3));

        let ps =
            compose_interferometer(&[ElementaryOp::PhaseShifter { phi: PI, mode: 0 }], 2).unwrap();
        let expect = ComplexMatrix::from_rows(&[
            vec![c(-1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0)],
        ])
        .unwrap();
        assert!(ps.max_abs_diff(&expect) < 1e-15);

        let bs = compose_interferometer(&[ElementaryOp::balanced_beamsplitter(0, 1)], 2).unwrap();
        for z in bs.as_slice() {
            assert!((z.norm() - FRAC_1_SQRT_2).abs() < 1e-15);
        }
        // [[c, -s], [s, c]] at φ = 0
        assert!((bs[(0, 1)] - c(-FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((bs[(1, 0)] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn compose_uses_application_order() {
        let a = ElementaryOp::Beamsplitter {
            theta: 0.3,
            phi: 0.4,
            mode_a: 0,
            mode_b: 1,
        };
        let b = ElementaryOp::Beamsplitter {
            theta: 1.1,
            phi: -0.2,
            mode_a: 1,
            mode_b: 2,
        };
        let u = compose_interferometer(&[a, b], 3).unwrap();
        let expect = &a.to_matrix(3).unwrap() * &b.to_matrix(3).unwrap();
        assert!(u.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn compose_rejects_bad_modes() {
        let bad = ElementaryOp::Beamsplitter {
            theta: FRAC_PI_4,
            phi: 0.0,
            mode_a: 0,
            mode_b: 3,
        };
        assert!(matches!(
            compose_interferometer(&[bad], 3),
            Err(Error::InvalidOp(_))
        ));
        let same = ElementaryOp::Beamsplitter {
            theta: FRAC_PI_4,
            phi: 0.0,
            mode_a: 1,
            mode_b: 1,
        };
        assert!(matches!(
            compose_interferometer(&[same], 3),
            Err(Error::InvalidOp(_))
        ));
        let ps = ElementaryOp::PhaseShifter { phi: 1.0, mode: 2 };
        assert!(matches!(
            compose_interferometer(&[ps], 2),
            Err(Error::InvalidOp(_))
        ));
    }

    #[test]
    fn reck_identity_and_phases() {
        let ops = reck_decompose(&UnitaryMatrix::identity(3));
        let back = compose_interferometer(&ops, 3).unwrap();
        assert!(back.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-10);

        let phases = [0.3, -1.2, 2.0];
        let diag = ComplexMatrix::from_fn(3, 3, |i, j| {
            if i == j {
                Complex64::from_polar(1.0, phases[i])
            } else {
                ZERO
            }
        });
        let ops = reck_decompose(&UnitaryMatrix::new(diag.clone()).unwrap());
        assert!(ops
            .iter()
            .all(|op| matches!(op, ElementaryOp::PhaseShifter { .. })));
        assert!(compose_interferometer(&ops, 3).unwrap().max_abs_diff(&diag) < 1e-12);
    }

    #[test]
    fn reck_round_trip_haar() {
        let u = haar_random_unitary(4, 1).unwrap();
        let ops = reck_decompose(&u);
        let bs = ops
            .iter()
            .filter(|op| matches!(op, ElementaryOp::Beamsplitter { .. }))
            .count();
        assert!(bs <= 6);
        assert!(ops.len() - bs <= 4);
        assert!(compose_interferometer(&ops, 4).unwrap().max_abs_diff(&u) < 1e-8);
    }

    #[test]
    fn reck_handles_permutations() {
        // zero pivots exercise the θ = π/2 branch
        let perm = ComplexMatrix::from_fn(4, 4, |i, j| if j == (i + 1) % 4 { ONE } else { ZERO });
        let u = UnitaryMatrix::new(perm).unwrap();
        let back = compose_interferometer(&reck_decompose(&u), 4).unwrap();
        assert!(back.max_abs_diff(&u) < 1e-12);
    }

    #[test]
    fn matrix_json_round_trip() {
        let u = haar_random_unitary(3, 5).unwrap();
        let text = u.to_json();
        assert_eq!(UnitaryMatrix::from_json(&text).unwrap(), u);
        assert!(
            UnitaryMatrix::from_json(r#"{"dim":2,"entries":[[1,0],[0,0],[0,0],[2,0]]}"#).is_err()
        );
    }
}
