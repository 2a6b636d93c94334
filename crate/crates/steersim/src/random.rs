//! Random states and unitaries for property tests and benchmarks.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::linalg::{DensityMatrix, Ket};

fn standard_complex(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Ginibre matrix with i.i.d. standard complex normal entries.
fn ginibre(dim: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    DMatrix::from_fn(dim, dim, |_, _| standard_complex(rng))
}

/// Haar-random pure state on `qubit_count` qubits.
pub fn random_ket(qubit_count: usize, rng: &mut impl Rng) -> Result<Ket> {
    let dim = 1usize << qubit_count;
    let raw = DVector::from_fn(dim, |_, _| standard_complex(rng));
    let norm = raw.norm();
    Ket::new((raw / Complex64::new(norm, 0.0)).iter().copied().collect())
}

/// Random full-rank mixed state, G G† normalized to unit trace.
pub fn random_density_matrix(qubit_count: usize, rng: &mut impl Rng) -> Result<DensityMatrix> {
    let dim = 1usize << qubit_count;
    let g = ginibre(dim, rng);
    let gram = &g * g.adjoint();
    let trace = gram.trace().re;
    DensityMatrix::new(gram / Complex64::new(trace, 0.0))
}

/// Haar-random unitary via QR of a Ginibre matrix with the phase convention
/// fixed so the decomposition is unique (R has positive real diagonal).
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let g = ginibre(dim, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 {
            d / Complex64::new(d.norm(), 0.0)
        } else {
            Complex64::new(1.0, 0.0)
        };
        for row in 0..dim {
            q[(row, k)] *= phase;
        }
    }
    q
}
