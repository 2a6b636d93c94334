//! Dense complex linear algebra for registers of 1 to 4 qubits.
//!
//! Party 0 is the most significant bit of a basis index, so for three
//! parties the basis state |abc⟩ has index 4a + 2b + c. All validated
//! types keep their invariants from construction onward; operations that
//! preserve physicality skip revalidation.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

use crate::error::{Error, Result};

/// Largest supported register size; dimensions stay at or below 16.
pub const MAX_QUBITS: usize = 4;
/// Tolerance on ⟨ψ|ψ⟩ = 1 for state vectors.
pub const KET_NORM_TOL: f64 = 1e-12;
/// Tolerance on Hermiticity of density matrices.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Tolerance on unit trace of density matrices.
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues above this floor count as nonnegative.
pub const EIGENVALUE_FLOOR: f64 = -1e-8;
/// Input tolerance (Hermiticity and trace) for [`nearest_physical_state`].
pub const PHYSICALIZE_INPUT_TOL: f64 = 1e-6;

/// Qubit owner, displayed as A, B, C, D by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Party(pub usize);

impl Party {
    pub fn name(self) -> char {
        char::from(b'A' + (self.0 as u8 % 26))
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Measurement axis of a Pauli observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn letter(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }

    pub fn from_letter(c: char) -> Option<Axis> {
        match c {
            'x' => Some(Axis::X),
            'y' => Some(Axis::Y),
            'z' => Some(Axis::Z),
            _ => None,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Single-qubit Hermitian observable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observable {
    matrix: Matrix2<Complex64>,
}

impl Observable {
    /// Validates Hermiticity within 1e-12.
    pub fn new(matrix: Matrix2<Complex64>) -> Result<Self> {
        let dev = (matrix[(0, 1)] - matrix[(1, 0)].conj()).norm().max(
            matrix[(0, 0)]
                .im
                .abs()
                .max(matrix[(1, 1)].im.abs()),
        );
        if dev > 1e-12 {
            return Err(Error::NotHermitian { deviation: dev });
        }
        Ok(Observable { matrix })
    }

    pub fn pauli(axis: Axis) -> Self {
        let (o, i) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0));
        let one = Complex64::new(1.0, 0.0);
        let matrix = match axis {
            Axis::X => Matrix2::new(o, one, one, o),
            Axis::Y => Matrix2::new(o, -i, i, o),
            Axis::Z => Matrix2::new(one, o, o, -one),
        };
        Observable { matrix }
    }

    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.matrix
    }
}

/// Rows are the ⟨+1| and ⟨−1| eigenbras of the Pauli on `axis`, so that
/// U σ U† = diag(1, −1). Outcome bit 0 maps to eigenvalue +1.
pub fn pauli_eigenbasis(axis: Axis) -> Matrix2<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (o, one) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    let h = Complex64::new(s, 0.0);
    match axis {
        Axis::X => Matrix2::new(h, h, h, -h),
        Axis::Y => Matrix2::new(h, Complex64::new(0.0, -s), h, Complex64::new(0.0, s)),
        Axis::Z => Matrix2::new(one, o, o, one),
    }
}

/// Value of party `party`'s bit inside basis index `index` of an
/// `qubit_count`-qubit register.
pub fn bit_of(index: usize, party: usize, qubit_count: usize) -> usize {
    (index >> (qubit_count - 1 - party)) & 1
}

fn qubits_for_dim(dim: usize) -> Option<usize> {
    (1..=MAX_QUBITS).find(|n| dim == 1 << n)
}

/// Pure state of 1 to 4 qubits, unit norm enforced at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    qubit_count: usize,
    amplitudes: DVector<Complex64>,
}

impl Ket {
    /// `amplitudes` in basis-index order; ⟨ψ|ψ⟩ must be 1 within 1e-12.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let qubit_count = qubits_for_dim(amplitudes.len()).ok_or(Error::BadDimension {
            len: amplitudes.len(),
            max: MAX_QUBITS,
        })?;
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        let deviation = (norm_sq - 1.0).abs();
        if deviation > KET_NORM_TOL {
            return Err(Error::NotNormalized { deviation });
        }
        Ok(Ket {
            qubit_count,
            amplitudes: DVector::from_vec(amplitudes),
        })
    }

    /// Computational basis state |index⟩.
    pub fn basis_state(qubit_count: usize, index: usize) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&qubit_count) {
            return Err(Error::TooManyQubits {
                total: qubit_count,
                max: MAX_QUBITS,
            });
        }
        let dim = 1 << qubit_count;
        if index >= dim {
            return Err(Error::BadDimension {
                len: index,
                max: MAX_QUBITS,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Ket {
            qubit_count,
            amplitudes: DVector::from_vec(amplitudes),
        })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    /// ⟨self|other⟩.
    pub fn overlap(&self, other: &Ket) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Tensor product; the combined register keeps `self` as the leading
    /// (most significant) parties.
    pub fn tensor(&self, other: &Ket) -> Result<Ket> {
        let total = self.qubit_count + other.qubit_count;
        if total > MAX_QUBITS {
            return Err(Error::TooManyQubits {
                total,
                max: MAX_QUBITS,
            });
        }
        Ok(Ket {
            qubit_count: total,
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        })
    }

    /// |ψ⟩⟨ψ| as a validated density matrix.
    pub fn density_matrix(&self) -> DensityMatrix {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix {
            qubit_count: self.qubit_count,
            matrix: m,
        }
    }

    /// Equality modulo a global phase: |⟨self|other⟩| = 1 within `tol`.
    pub fn eq_up_to_phase(&self, other: &Ket, tol: f64) -> bool {
        match self.overlap(other) {
            Ok(ov) => (ov.norm() - 1.0).abs() <= tol,
            Err(_) => false,
        }
    }
}

impl Serialize for Ket {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            qubit_count: usize,
            amplitudes: Vec<[f64; 2]>,
        }
        Repr {
            qubit_count: self.qubit_count,
            amplitudes: self.amplitudes.iter().map(|c| [c.re, c.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Ket {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            qubit_count: usize,
            amplitudes: Vec<[f64; 2]>,
        }
        let repr = Repr::deserialize(deserializer)?;
        let ket = Ket::new(
            repr.amplitudes
                .iter()
                .map(|p| Complex64::new(p[0], p[1]))
                .collect(),
        )
        .map_err(D::Error::custom)?;
        if ket.qubit_count != repr.qubit_count {
            return Err(D::Error::custom(format!(
                "qubit_count {} does not match {} amplitudes",
                repr.qubit_count,
                ket.dim()
            )));
        }
        Ok(ket)
    }
}

/// Mixed state of 1 to 4 qubits: Hermitian, unit trace, positive
/// semidefinite within tolerance, all enforced at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    qubit_count: usize,
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates shape, Hermiticity (1e-10), trace (1e-10) and spectrum
    /// (eigenvalues ≥ −1e-8).
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        let qubit_count = match qubits_for_dim(matrix.nrows()) {
            Some(n) if matrix.is_square() => n,
            _ => {
                return Err(Error::BadMatrixShape {
                    rows: matrix.nrows(),
                    cols: matrix.ncols(),
                    max: MAX_QUBITS,
                })
            }
        };
        let herm_dev = hermiticity_deviation(&matrix);
        if herm_dev > HERMITICITY_TOL {
            return Err(Error::NotHermitian {
                deviation: herm_dev,
            });
        }
        let trace_dev = (matrix.trace().re - 1.0).abs().max(matrix.trace().im.abs());
        if trace_dev > TRACE_TOL {
            return Err(Error::TraceNotOne {
                deviation: trace_dev,
            });
        }
        let eigenvalues = hermitian_eigenvalues(&matrix);
        if let Some(min) = eigenvalues.iter().cloned().reduce(f64::min) {
            if min < EIGENVALUE_FLOOR {
                return Err(Error::NotPositiveSemidefinite { value: min });
            }
        }
        Ok(DensityMatrix {
            qubit_count,
            matrix,
        })
    }

    /// For operations that provably preserve physicality.
    pub(crate) fn from_valid(qubit_count: usize, matrix: DMatrix<Complex64>) -> Self {
        DensityMatrix {
            qubit_count,
            matrix,
        }
    }

    /// I / 2ⁿ.
    pub fn maximally_mixed(qubit_count: usize) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&qubit_count) {
            return Err(Error::TooManyQubits {
                total: qubit_count,
                max: MAX_QUBITS,
            });
        }
        let dim = 1 << qubit_count;
        let scale = Complex64::new(1.0 / dim as f64, 0.0);
        Ok(DensityMatrix {
            qubit_count,
            matrix: DMatrix::identity(dim, dim) * scale,
        })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Tensor product with `self` as the leading parties.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let total = self.qubit_count + other.qubit_count;
        if total > MAX_QUBITS {
            return Err(Error::TooManyQubits {
                total,
                max: MAX_QUBITS,
            });
        }
        Ok(DensityMatrix {
            qubit_count: total,
            matrix: self.matrix.kronecker(&other.matrix),
        })
    }

    /// Reduced state over `keep`, in the listed order; listing parties in
    /// a different order permutes the output register accordingly.
    pub fn partial_trace(&self, keep: &[Party]) -> Result<DensityMatrix> {
        let n = self.qubit_count;
        if keep.is_empty() {
            return Err(Error::EmptyKeep);
        }
        for (pos, p) in keep.iter().enumerate() {
            if p.0 >= n {
                return Err(Error::PartyOutOfRange {
                    party: p.0,
                    qubit_count: n,
                });
            }
            if keep[..pos].contains(p) {
                return Err(Error::DuplicateParty { party: p.0 });
            }
        }
        let traced: Vec<usize> = (0..n).filter(|p| !keep.iter().any(|k| k.0 == *p)).collect();
        let k = keep.len();
        let dim_out = 1usize << k;
        let t_count = traced.len();
        // Full-register index with the kept bits set from `kept` (in keep
        // order) and traced bits from `t`.
        let full_index = |kept: usize, t: usize| -> usize {
            let mut idx = 0usize;
            for (pos, p) in keep.iter().enumerate() {
                idx |= ((kept >> (k - 1 - pos)) & 1) << (n - 1 - p.0);
            }
            for (pos, p) in traced.iter().enumerate() {
                idx |= ((t >> (t_count - 1 - pos)) & 1) << (n - 1 - p);
            }
            idx
        };
        let mut out = DMatrix::zeros(dim_out, dim_out);
        for i in 0..dim_out {
            for j in 0..dim_out {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in 0..(1usize << t_count) {
                    acc += self.matrix[(full_index(i, t), full_index(j, t))];
                }
                out[(i, j)] = acc;
            }
        }
        Ok(DensityMatrix {
            qubit_count: k,
            matrix: out,
        })
    }

    /// Tr(ρ · O₀ ⊗ O₁ ⊗ …) with identity on parties absent from
    /// `placements`. The imaginary part vanishes for Hermitian factors and
    /// is discarded.
    pub fn expectation(&self, placements: &[(Party, Observable)]) -> Result<f64> {
        let n = self.qubit_count;
        for (pos, (p, _)) in placements.iter().enumerate() {
            if p.0 >= n {
                return Err(Error::PartyOutOfRange {
                    party: p.0,
                    qubit_count: n,
                });
            }
            if placements[..pos].iter().any(|(q, _)| q.0 == p.0) {
                return Err(Error::DuplicateParty { party: p.0 });
            }
        }
        // Tr(ρ · ⊗ₚ Mₚ) = Σ_{i,j} ρ[i,j] Πₚ Mₚ[j_p, i_p]; the per-party
        // factor products avoid materializing the 2ⁿ x 2ⁿ operator.
        let dim = self.dim();
        let ident = Matrix2::identity();
        let factors: Vec<&Matrix2<Complex64>> = (0..n)
            .map(|p| {
                placements
                    .iter()
                    .find(|(q, _)| q.0 == p)
                    .map(|(_, o)| o.matrix())
                    .unwrap_or(&ident)
            })
            .collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..dim {
            for j in 0..dim {
                let mut prod = self.matrix[(i, j)];
                if prod.norm_sqr() == 0.0 {
                    continue;
                }
                for (p, m) in factors.iter().enumerate() {
                    prod *= m[(bit_of(j, p, n), bit_of(i, p, n))];
                }
                acc += prod;
            }
        }
        Ok(acc.re)
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            qubit_count: usize,
            entries: Vec<Vec<[f64; 2]>>,
        }
        Repr {
            qubit_count: self.qubit_count,
            entries: (0..self.dim())
                .map(|i| {
                    (0..self.dim())
                        .map(|j| {
                            let c = self.matrix[(i, j)];
                            [c.re, c.im]
                        })
                        .collect()
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            qubit_count: usize,
            entries: Vec<Vec<[f64; 2]>>,
        }
        let repr = Repr::deserialize(deserializer)?;
        let dim = repr.entries.len();
        if repr.entries.iter().any(|row| row.len() != dim) {
            return Err(D::Error::custom("entries is not a square matrix"));
        }
        let matrix = DMatrix::from_fn(dim, dim, |i, j| {
            Complex64::new(repr.entries[i][j][0], repr.entries[i][j][1])
        });
        let dm = DensityMatrix::new(matrix).map_err(D::Error::custom)?;
        if dm.qubit_count != repr.qubit_count {
            return Err(D::Error::custom(format!(
                "qubit_count {} does not match a {}x{} matrix",
                repr.qubit_count, dim, dim
            )));
        }
        Ok(dm)
    }
}

fn hermiticity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Eigenvalues of a Hermitian matrix, ascending order not guaranteed.
fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    m.clone().symmetric_eigen().eigenvalues.iter().cloned().collect()
}

/// Eigenvalue-noise floor relative to the largest eigenvalue. Square
/// roots amplify rounding noise (√1e-16 = 1e-8), so spectra are clipped
/// at this relative level before taking roots.
const SPECTRUM_CLIP: f64 = 1e-12;

fn clip_spectrum(eigenvalues: &mut [f64]) {
    let largest = eigenvalues.iter().cloned().fold(0.0, f64::max);
    for l in eigenvalues.iter_mut() {
        if *l < largest * SPECTRUM_CLIP {
            *l = 0.0;
        }
    }
}

/// V √Λ V† for Hermitian PSD m = V Λ V†, with the spectrum clipped.
fn hermitian_sqrt(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let eig = m.clone().symmetric_eigen();
    let mut values: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    clip_spectrum(&mut values);
    let d = DVector::from_iterator(
        values.len(),
        values.iter().map(|&l| Complex64::new(l.sqrt(), 0.0)),
    );
    &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.adjoint()
}

/// Uhlmann fidelity F(ρ₁, ρ₂) = Tr √(√ρ₁ ρ₂ √ρ₁) ∈ [0, 1]. Symmetric in
/// its arguments and equal to |⟨ψ|φ⟩| on pure states.
pub fn fidelity(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch {
            left: rho1.dim(),
            right: rho2.dim(),
        });
    }
    let s = hermitian_sqrt(rho1.matrix());
    let inner = &s * rho2.matrix() * &s;
    // Symmetrize before eigensolving; inner is Hermitian PSD up to rounding.
    let h = (&inner + inner.adjoint()).scale(0.5);
    let mut values = hermitian_eigenvalues(&h);
    clip_spectrum(&mut values);
    let f: f64 = values.iter().map(|&l| l.sqrt()).sum();
    Ok(f.min(1.0))
}

/// Euclidean projection onto the probability simplex: sort descending,
/// find the water level τ with Σ max(vᵢ − τ, 0) = 1, shift and clip.
fn simplex_project(values: &[f64]) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumulative = 0.0;
    let mut tau = 0.0;
    for (j, &s) in sorted.iter().enumerate() {
        cumulative += s;
        let level = (cumulative - 1.0) / (j + 1) as f64;
        if s - level > 0.0 {
            tau = level;
        }
    }
    values.iter().map(|&v| (v - tau).max(0.0)).collect()
}

/// Nearest density matrix (in the eigenvalue simplex sense) to a Hermitian,
/// trace-one input that may have gone slightly unphysical, e.g. a linear
/// inversion estimate. Valid inputs pass through unchanged up to rounding.
pub fn nearest_physical_state(matrix: &DMatrix<Complex64>) -> Result<DensityMatrix> {
    let qubit_count = match qubits_for_dim(matrix.nrows()) {
        Some(n) if matrix.is_square() => n,
        _ => {
            return Err(Error::BadMatrixShape {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
                max: MAX_QUBITS,
            })
        }
    };
    let herm_dev = hermiticity_deviation(matrix);
    if herm_dev > PHYSICALIZE_INPUT_TOL {
        return Err(Error::NotHermitian {
            deviation: herm_dev,
        });
    }
    let trace_dev = (matrix.trace().re - 1.0).abs();
    if trace_dev > PHYSICALIZE_INPUT_TOL {
        return Err(Error::TraceNotOne {
            deviation: trace_dev,
        });
    }
    let h = (matrix + matrix.adjoint()).scale(0.5);
    let eig = h.symmetric_eigen();
    let projected = simplex_project(eig.eigenvalues.as_slice());
    let d = DVector::from_iterator(
        projected.len(),
        projected.iter().map(|&l| Complex64::new(l, 0.0)),
    );
    let rebuilt = &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.adjoint();
    Ok(DensityMatrix::from_valid(qubit_count, rebuilt))
}
