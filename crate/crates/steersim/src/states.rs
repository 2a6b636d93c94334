//! W-class state preparation: coefficient parametrizations, the waveplate
//! angles that realize them, and an element-by-element model of the
//! polarization / path / orbital-angular-momentum optical pipeline.
//!
//! The three-party basis encodes |H⟩→0, |V⟩→1 on the polarization qubit
//! (party A), up path→0, down path→1 on the path qubit (party B) and
//! +l→0, −l→1 on the OAM qubit (party C).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, Ket, MAX_QUBITS};

/// Tolerance on α² + β² + γ² = 1.
pub const COEFFICIENT_NORM_TOL: f64 = 1e-10;

/// Real amplitudes (α, β, γ) of α|001⟩ + β|010⟩ + γ|100⟩, unit norm.
/// Components may be negative: a waveplate past 45° flips signs, and the
/// relative sign is physical whenever two components are nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTriple {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl CoefficientTriple {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let norm_sq = alpha * alpha + beta * beta + gamma * gamma;
        let deviation = (norm_sq - 1.0).abs();
        if deviation > COEFFICIENT_NORM_TOL {
            return Err(Error::NotNormalized { deviation });
        }
        Ok(CoefficientTriple { alpha, beta, gamma })
    }

    /// Rescales an arbitrary nonzero tuple to unit norm.
    pub fn normalized(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let norm = (alpha * alpha + beta * beta + gamma * gamma).sqrt();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(CoefficientTriple {
            alpha: alpha / norm,
            beta: beta / norm,
            gamma: gamma / norm,
        })
    }

    /// The symmetric point α = β = γ = 1/√3.
    pub fn symmetric() -> Self {
        let a = 1.0 / 3f64.sqrt();
        CoefficientTriple {
            alpha: a,
            beta: a,
            gamma: a,
        }
    }
}

/// Half-waveplate pair that prepares a [`CoefficientTriple`], angles in
/// degrees. A waveplate at angle θ maps |H⟩ → cos 2θ|H⟩ + sin 2θ|V⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrepAngles {
    pub hwp1_deg: f64,
    pub hwp2_deg: f64,
}

/// Inversion result of [`coefficients_to_hwp`]. When β = γ = 0 the second
/// waveplate never sees the photon, θ₂ is reported as 0 by convention and
/// `hwp2_degenerate` is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HwpInversion {
    pub angles: PrepAngles,
    pub hwp2_degenerate: bool,
}

/// α|001⟩ + β|010⟩ + γ|100⟩ on parties (A, B, C).
pub fn w_like_state(c: CoefficientTriple) -> Ket {
    let mut amps = vec![Complex64::new(0.0, 0.0); 8];
    amps[1] = Complex64::new(c.alpha, 0.0);
    amps[2] = Complex64::new(c.beta, 0.0);
    amps[4] = Complex64::new(c.gamma, 0.0);
    Ket::new(amps).expect("unit-norm triple yields a unit-norm ket")
}

/// Symmetric N-party W state (1/√N) Σ_k |0…1…0⟩ for N in 2..=4.
pub fn w_n_state(party_count: usize) -> Result<Ket> {
    if !(2..=MAX_QUBITS).contains(&party_count) {
        return Err(Error::TooManyQubits {
            total: party_count,
            max: MAX_QUBITS,
        });
    }
    let dim = 1 << party_count;
    let amp = Complex64::new(1.0 / (party_count as f64).sqrt(), 0.0);
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    for k in 0..party_count {
        amps[1 << k] = amp;
    }
    Ket::new(amps)
}

/// μ|110⟩ + ν|001⟩, the two-branch state sitting between the second
/// waveplate (at 45°) and the final beam displacer of the pipeline.
pub fn ghz_like_state(mu: f64, nu: f64) -> Result<Ket> {
    let norm_sq = mu * mu + nu * nu;
    let deviation = (norm_sq - 1.0).abs();
    if deviation > COEFFICIENT_NORM_TOL {
        return Err(Error::NotNormalized { deviation });
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); 8];
    amps[6] = Complex64::new(mu, 0.0);
    amps[1] = Complex64::new(nu, 0.0);
    Ket::new(amps)
}

/// Coefficients produced by waveplate angles: α = sin 2θ₁,
/// β = cos 2θ₁ cos 2θ₂, γ = cos 2θ₁ sin 2θ₂. Normalization is automatic.
pub fn hwp_to_coefficients(p: PrepAngles) -> CoefficientTriple {
    let t1 = 2.0 * p.hwp1_deg.to_radians();
    let t2 = 2.0 * p.hwp2_deg.to_radians();
    CoefficientTriple {
        alpha: t1.sin(),
        beta: t1.cos() * t2.cos(),
        gamma: t1.cos() * t2.sin(),
    }
}

/// Inverse of [`hwp_to_coefficients`] on the nonnegative octant, angles in
/// [0°, 45°]: θ₁ = asin(α)/2, θ₂ = atan2(γ, β)/2.
pub fn coefficients_to_hwp(c: CoefficientTriple) -> Result<HwpInversion> {
    for value in [c.alpha, c.beta, c.gamma] {
        if value < 0.0 {
            return Err(Error::NegativeCoefficient { value });
        }
    }
    let degenerate = c.beta == 0.0 && c.gamma == 0.0;
    let theta2 = if degenerate {
        0.0
    } else {
        c.gamma.atan2(c.beta).to_degrees() / 2.0
    };
    Ok(HwpInversion {
        angles: PrepAngles {
            hwp1_deg: c.alpha.clamp(-1.0, 1.0).asin().to_degrees() / 2.0,
            hwp2_deg: theta2,
        },
        hwp2_degenerate: degenerate,
    })
}

/// Runs the five-element preparation pipeline at the given waveplate
/// angles and returns the final three-qubit state. Equals
/// `w_like_state(hwp_to_coefficients(p))` exactly.
///
/// Stages, acting on a register that grows from one qubit to three:
/// 1. HWP1 rotates the source polarization |H⟩.
/// 2. BD1 maps polarization onto a path qubit (|H⟩→down, |V⟩→up), and a
///    fixed 45° waveplate resets the up-path polarization to |H⟩.
/// 3. SLM1 tags each path with opposite orbital angular momentum.
/// 4. HWP2 rotates the down-path polarization by θ₂.
/// 5. BD2 lifts |V⟩ light from the down path to the up path.
pub fn pipeline_state(p: PrepAngles) -> Ket {
    let t1 = 2.0 * p.hwp1_deg.to_radians();
    let t2 = 2.0 * p.hwp2_deg.to_radians();
    let zero = Complex64::new(0.0, 0.0);

    // Stage 1: polarization qubit s after HWP1.
    let s_amp = [Complex64::new(t1.cos(), 0.0), Complex64::new(t1.sin(), 0.0)];

    // Stage 2: BD1 isometry |0⟩ₛ→|0⟩ₛ|1⟩ₚ, |1⟩ₛ→|1⟩ₛ|0⟩ₚ on (s, p).
    let mut sp = [zero; 4];
    sp[0b01] = s_amp[0];
    sp[0b10] = s_amp[1];
    // Fixed 45° waveplate on the up path (p = 0) flips s.
    sp.swap(0b00, 0b10);

    // Stage 3: SLM1 isometry adds the OAM qubit, m = 1 − p.
    let mut spm = [zero; 8];
    for s in 0..2 {
        for path in 0..2 {
            spm[(s << 2) | (path << 1) | (1 - path)] = sp[(s << 1) | path];
        }
    }

    // Stage 4: HWP2 acts on s inside the down path (p = 1); the waveplate
    // Jones matrix is [[cos 2θ, sin 2θ], [sin 2θ, −cos 2θ]].
    for m in 0..2 {
        let a = spm[0b010 | m];
        let b = spm[0b110 | m];
        spm[0b010 | m] = a * t2.cos() + b * t2.sin();
        spm[0b110 | m] = a * t2.sin() - b * t2.cos();
    }

    // Stage 5: BD2 swaps the path bit of |V⟩ (s = 1) light.
    for m in 0..2 {
        spm.swap(0b100 | m, 0b110 | m);
    }

    Ket::new(spm.to_vec()).expect("pipeline stages are norm-preserving")
}

/// (1 − p) ρ + p I/2ⁿ.
pub fn depolarize(rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability { value: p });
    }
    let mixed = DensityMatrix::maximally_mixed(rho.qubit_count())?;
    let blended = rho.matrix() * Complex64::new(1.0 - p, 0.0)
        + mixed.matrix() * Complex64::new(p, 0.0);
    Ok(DensityMatrix::from_valid(rho.qubit_count(), blended))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::fidelity;
    use approx::assert_relative_eq;

    #[test]
    fn coefficient_triple_validates_norm() {
        assert!(CoefficientTriple::new(0.5, 0.5, 0.5).is_err());
        assert!(CoefficientTriple::new(1.0, 0.0, 0.0).is_ok());
        let c = CoefficientTriple::normalized(1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(c.alpha, 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert!(CoefficientTriple::normalized(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn w_like_state_places_amplitudes_on_single_excitations() {
        let c = CoefficientTriple::new(0.2, 0.4, 0.8f64.sqrt()).unwrap();
        let ket = w_like_state(c);
        assert_relative_eq!(ket.amplitudes()[1].re, 0.2, epsilon = 1e-15);
        assert_relative_eq!(ket.amplitudes()[2].re, 0.4, epsilon = 1e-15);
        assert_relative_eq!(ket.amplitudes()[4].re, 0.8f64.sqrt(), epsilon = 1e-15);
        for idx in [0, 3, 5, 6, 7] {
            assert_eq!(ket.amplitudes()[idx].norm(), 0.0);
        }
    }

    #[test]
    fn w_n_state_is_symmetric_and_bounded() {
        let w4 = w_n_state(4).unwrap();
        for k in 0..4 {
            assert_relative_eq!(w4.amplitudes()[1 << k].re, 0.5, epsilon = 1e-15);
        }
        assert!(w_n_state(1).is_err());
        assert!(w_n_state(5).is_err());

        let w3 = w_n_state(3).unwrap();
        assert!(w3.eq_up_to_phase(&w_like_state(CoefficientTriple::symmetric()), 1e-12));
    }

    #[test]
    fn ghz_like_state_occupies_the_two_branches() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let g = ghz_like_state(s, s).unwrap();
        assert_relative_eq!(g.amplitudes()[6].re, s, epsilon = 1e-15);
        assert_relative_eq!(g.amplitudes()[1].re, s, epsilon = 1e-15);
        assert!(ghz_like_state(1.0, 1.0).is_err());
    }

    #[test]
    fn hwp_angles_for_the_symmetric_state() {
        let c = hwp_to_coefficients(PrepAngles {
            hwp1_deg: 17.632,
            hwp2_deg: 22.5,
        });
        // Frozen from an independent evaluation of the trig formulas at
        // the printed (rounded) angles.
        assert_relative_eq!(c.alpha, 0.5773447159812637, epsilon = 1e-12);
        assert_relative_eq!(c.beta, 0.577353045773777, epsilon = 1e-12);
        assert_relative_eq!(c.gamma, 0.5773530457737769, epsilon = 1e-12);

        // The exact angles land on 1/√3 to machine precision.
        let exact = PrepAngles {
            hwp1_deg: (1.0 / 3f64.sqrt()).asin().to_degrees() / 2.0,
            hwp2_deg: 22.5,
        };
        assert_relative_eq!(exact.hwp1_deg, 17.632, epsilon = 1e-3);
        let c = hwp_to_coefficients(exact);
        assert_relative_eq!(c.alpha, 1.0 / 3f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(c.beta, 1.0 / 3f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(c.gamma, 1.0 / 3f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn hwp_output_is_always_normalized() {
        for i in 0..40 {
            for j in 0..40 {
                let c = hwp_to_coefficients(PrepAngles {
                    hwp1_deg: i as f64 * 9.0,
                    hwp2_deg: j as f64 * 9.0,
                });
                let norm = c.alpha * c.alpha + c.beta * c.beta + c.gamma * c.gamma;
                assert_relative_eq!(norm, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn hwp_past_ninety_degrees_flips_signs() {
        let c = hwp_to_coefficients(PrepAngles {
            hwp1_deg: 90.0,
            hwp2_deg: 10.0,
        });
        let t2 = 20f64.to_radians();
        assert_relative_eq!(c.alpha, 0.0, epsilon = 1e-12);
        assert_relative_eq!(c.beta, -t2.cos(), epsilon = 1e-12);
        assert_relative_eq!(c.gamma, -t2.sin(), epsilon = 1e-12);
    }

    #[test]
    fn coefficient_inversion_round_trips() {
        let cases = [
            (0.2, 0.4, 0.8f64.sqrt()),
            (0.5, 0.5, std::f64::consts::FRAC_1_SQRT_2),
            (0.1, 0.9, (1.0f64 - 0.01 - 0.81).sqrt()),
        ];
        for (a, b, g) in cases {
            let c = CoefficientTriple::new(a, b, g).unwrap();
            let inv = coefficients_to_hwp(c).unwrap();
            assert!(!inv.hwp2_degenerate);
            assert!((0.0..=45.0).contains(&inv.angles.hwp1_deg));
            assert!((0.0..=45.0).contains(&inv.angles.hwp2_deg));
            let back = hwp_to_coefficients(inv.angles);
            assert_relative_eq!(back.alpha, a, epsilon = 1e-9);
            assert_relative_eq!(back.beta, b, epsilon = 1e-9);
            assert_relative_eq!(back.gamma, g, epsilon = 1e-9);
        }
    }

    #[test]
    fn coefficient_inversion_flags_the_degenerate_axis() {
        let inv = coefficients_to_hwp(CoefficientTriple::new(1.0, 0.0, 0.0).unwrap()).unwrap();
        assert!(inv.hwp2_degenerate);
        assert_relative_eq!(inv.angles.hwp1_deg, 45.0, epsilon = 1e-12);
        assert_eq!(inv.angles.hwp2_deg, 0.0);

        let c = CoefficientTriple::normalized(0.5, -0.5, 0.5).unwrap();
        assert!(matches!(
            coefficients_to_hwp(c),
            Err(Error::NegativeCoefficient { .. })
        ));
    }

    #[test]
    fn pipeline_matches_the_closed_form_on_a_grid() {
        for i in 0..10 {
            for j in 0..10 {
                let p = PrepAngles {
                    hwp1_deg: i as f64 * 9.9,
                    hwp2_deg: j as f64 * 9.9,
                };
                let from_pipeline = pipeline_state(p);
                let direct = w_like_state(hwp_to_coefficients(p));
                let overlap = from_pipeline.overlap(&direct).unwrap().norm_sqr();
                assert!(
                    (overlap - 1.0).abs() < 1e-10,
                    "squared overlap {overlap} at {p:?}"
                );
            }
        }
    }

    #[test]
    fn pipeline_special_angles() {
        // θ₁ = 0, θ₂ = 0: single down-path branch |010⟩.
        let ket = pipeline_state(PrepAngles {
            hwp1_deg: 0.0,
            hwp2_deg: 0.0,
        });
        assert_relative_eq!(ket.amplitudes()[2].re, 1.0, epsilon = 1e-12);

        // θ₂ = 45°: the β branch closes and only the two perfectly
        // correlated branches of the GHZ-like family survive.
        let theta1: f64 = 20.0;
        let ket = pipeline_state(PrepAngles {
            hwp1_deg: theta1,
            hwp2_deg: 45.0,
        });
        let (mu, nu) = (
            (2.0 * theta1.to_radians()).cos(),
            (2.0 * theta1.to_radians()).sin(),
        );
        assert_relative_eq!(ket.amplitudes()[1].re, nu, epsilon = 1e-12);
        assert_relative_eq!(ket.amplitudes()[4].re, mu, epsilon = 1e-12);
        assert_relative_eq!(ket.amplitudes()[2].norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn depolarize_interpolates_to_the_maximally_mixed_state() {
        let rho = w_like_state(CoefficientTriple::symmetric()).density_matrix();
        let noisy = depolarize(&rho, 0.1).unwrap();
        let f = fidelity(&noisy, &rho).unwrap();
        assert_relative_eq!(f, (0.9f64 + 0.1 / 8.0).sqrt(), epsilon = 1e-9);

        let full = depolarize(&rho, 1.0).unwrap();
        let mixed = DensityMatrix::maximally_mixed(3).unwrap();
        let dev = (full.matrix() - mixed.matrix()).map(|x| x.norm()).max();
        assert!(dev < 1e-15);

        assert!(depolarize(&rho, -0.1).is_err());
        assert!(depolarize(&rho, 1.1).is_err());
    }
}
