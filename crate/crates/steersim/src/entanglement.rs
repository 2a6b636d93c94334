//! Genuine tripartite entanglement certificates for three-qubit states.
//!
//! Two complementary routes: a fidelity witness built on the symmetric
//! W projector, and a shareability rule that reads the directed steering
//! graph. Two steerers sharing one steered party is impossible for
//! biseparable states, so in-degree ≥ 2 certifies genuine entanglement;
//! the converse does not hold, monogamous genuinely entangled states exist.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::DensityMatrix;
use crate::steering::{ArrowRule, SteeringMatrix};
use crate::states::{w_like_state, CoefficientTriple};

/// Witness evaluation: value = 2/3 − ⟨W|ρ|W⟩, negative only on states
/// whose W-projector overlap no biseparable state can reach.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessReport {
    pub value: f64,
    pub genuine: bool,
}

/// Evaluates the W-projector witness on a three-qubit state.
pub fn witness_value(rho: &DensityMatrix) -> Result<WitnessReport> {
    if rho.qubit_count() != 3 {
        return Err(Error::WrongQubitCount {
            count: rho.qubit_count(),
            expected: 3,
        });
    }
    let w = w_like_state(CoefficientTriple::symmetric());
    // ⟨W|ρ|W⟩ via the amplitude form; ρ is Hermitian so this is real.
    let mut overlap = 0.0;
    for i in 0..8 {
        for j in 0..8 {
            overlap += (w.amplitudes()[i].conj() * rho.matrix()[(i, j)] * w.amplitudes()[j]).re;
        }
    }
    let value = 2.0 / 3.0 - overlap;
    Ok(WitnessReport {
        value,
        genuine: value < 0.0,
    })
}

/// Verdict of the shareability rule. `witnessing_party` is the
/// lowest-index party steered by at least two others, when one exists.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShareabilityVerdict {
    pub genuine: bool,
    pub witnessing_party: Option<usize>,
    pub in_degrees: Vec<usize>,
}

/// Certifies genuine tripartite entanglement from steering shareability:
/// some party steered by both others under `rule`. Sufficient, not
/// necessary.
pub fn genuine_by_shareability(
    m: &SteeringMatrix,
    rule: &ArrowRule,
) -> Result<ShareabilityVerdict> {
    if m.party_count() != 3 {
        return Err(Error::WrongQubitCount {
            count: m.party_count(),
            expected: 3,
        });
    }
    let in_degrees = m.in_degrees(rule);
    let witnessing_party = in_degrees.iter().position(|&d| d >= 2);
    Ok(ShareabilityVerdict {
        genuine: witnessing_party.is_some(),
        witnessing_party,
        in_degrees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Ket;
    use crate::states::depolarize;
    use crate::steering::{steering_matrix, SteeringValue};
    use approx::assert_relative_eq;

    #[test]
    fn witness_reference_values() {
        let w = w_like_state(CoefficientTriple::symmetric()).density_matrix();
        let report = witness_value(&w).unwrap();
        assert_relative_eq!(report.value, -1.0 / 3.0, epsilon = 1e-12);
        assert!(report.genuine);

        let vacuum = Ket::basis_state(3, 0).unwrap().density_matrix();
        let report = witness_value(&vacuum).unwrap();
        assert_relative_eq!(report.value, 2.0 / 3.0, epsilon = 1e-12);
        assert!(!report.genuine);

        let mixed = DensityMatrix::maximally_mixed(3).unwrap();
        let report = witness_value(&mixed).unwrap();
        assert_relative_eq!(report.value, 13.0 / 24.0, epsilon = 1e-12);
        assert!(!report.genuine);
    }

    #[test]
    fn witness_survives_moderate_depolarization() {
        let w = w_like_state(CoefficientTriple::symmetric()).density_matrix();
        let report = witness_value(&depolarize(&w, 0.04).unwrap()).unwrap();
        assert_relative_eq!(report.value, 2.0 / 3.0 - (0.96 + 0.04 / 8.0), epsilon = 1e-12);
        for step in 0..=30 {
            let p = step as f64 / 100.0;
            let noisy = depolarize(&w, p).unwrap();
            assert!(
                witness_value(&noisy).unwrap().genuine,
                "witness must stay negative at p = {p}"
            );
        }
    }

    #[test]
    fn witness_is_affine_in_the_state() {
        let w = w_like_state(CoefficientTriple::symmetric()).density_matrix();
        let mixed = DensityMatrix::maximally_mixed(3).unwrap();
        let w_val = witness_value(&w).unwrap().value;
        let m_val = witness_value(&mixed).unwrap().value;
        for step in 0..=10 {
            let p = step as f64 / 10.0;
            let blend = depolarize(&w, p).unwrap();
            let expected = (1.0 - p) * w_val + p * m_val;
            assert_relative_eq!(witness_value(&blend).unwrap().value, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn witness_requires_three_parties() {
        let pair = DensityMatrix::maximally_mixed(2).unwrap();
        assert!(witness_value(&pair).is_err());
    }

    fn matrix_from(values: [(usize, usize, f64); 6]) -> SteeringMatrix {
        SteeringMatrix::from_values(
            values
                .iter()
                .map(|&(s, t, value)| SteeringValue {
                    steerer: s,
                    steered: t,
                    value,
                    threshold: 2.0,
                    stderr: None,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn two_steerers_on_one_party_certify_entanglement() {
        let m = matrix_from([
            (0, 1, 2.2),
            (0, 2, 2.2),
            (1, 0, 1.9),
            (1, 2, 2.2),
            (2, 0, 1.7),
            (2, 1, 2.2),
        ]);
        let verdict = genuine_by_shareability(&m, &ArrowRule::default()).unwrap();
        assert!(verdict.genuine);
        assert_eq!(verdict.witnessing_party, Some(0));
        assert_eq!(verdict.in_degrees, vec![2, 0, 0]);
    }

    #[test]
    fn mutual_monogamous_steering_is_not_certified() {
        let m = matrix_from([
            (0, 1, 1.55),
            (0, 2, 2.03),
            (1, 0, 1.56),
            (1, 2, 2.13),
            (2, 0, 2.60),
            (2, 1, 2.70),
        ]);
        let verdict = genuine_by_shareability(&m, &ArrowRule::default()).unwrap();
        assert!(!verdict.genuine);
        assert_eq!(verdict.witnessing_party, None);
        assert_eq!(verdict.in_degrees, vec![1, 1, 0]);
    }

    #[test]
    fn verdict_is_invariant_under_relabeling() {
        let c = CoefficientTriple::new(0.5, 0.5, std::f64::consts::FRAC_1_SQRT_2).unwrap();
        let base = steering_matrix(&w_like_state(c).density_matrix()).unwrap();
        let rule = ArrowRule::default();
        let reference = genuine_by_shareability(&base, &rule).unwrap().genuine;
        let permutations = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        for perm in permutations {
            let values: Vec<SteeringValue> = base
                .values()
                .iter()
                .map(|v| SteeringValue {
                    steerer: perm[v.steerer],
                    steered: perm[v.steered],
                    ..*v
                })
                .collect();
            let relabeled = SteeringMatrix::from_values(values).unwrap();
            let verdict = genuine_by_shareability(&relabeled, &rule).unwrap();
            assert_eq!(verdict.genuine, reference, "permutation {perm:?}");
        }
    }

    #[test]
    fn statistical_rule_discounts_uncertain_arrows() {
        let mut values = Vec::new();
        for s in 0..3usize {
            for t in 0..3usize {
                if s != t {
                    let steered_zero = t == 0;
                    values.push(SteeringValue {
                        steerer: s,
                        steered: t,
                        value: if steered_zero { 1.95 } else { 2.4 },
                        threshold: 2.0,
                        stderr: Some(0.03),
                    });
                }
            }
        }
        let m = SteeringMatrix::from_values(values).unwrap();
        // 1.95 + 0.03 < 2 passes at k = 1, 1.95 + 2·0.03 > 2 fails at k = 2.
        let verdict = genuine_by_shareability(&m, &ArrowRule::default()).unwrap();
        assert!(verdict.genuine);
        let strict = ArrowRule {
            epsilon: 0.0,
            sigma_k: 2.0,
        };
        let verdict = genuine_by_shareability(&m, &strict).unwrap();
        assert!(!verdict.genuine);
    }

    #[test]
    fn shareability_verdicts_are_sound_on_the_coefficient_grid() {
        // Pure single-excitation states are genuinely entangled exactly
        // when all three coefficients are nonzero, so a Y verdict on a
        // state with a vanishing coefficient would be unsound.
        let rule = ArrowRule::default();
        for i in 0..=7 {
            for j in 0..=7 {
                let alpha = i as f64 / 7.0;
                let beta = j as f64 / 7.0 * (1.0 - alpha * alpha).sqrt();
                let remainder = 1.0 - alpha * alpha - beta * beta;
                if remainder < -1e-12 {
                    continue;
                }
                let gamma = remainder.max(0.0).sqrt();
                let c = CoefficientTriple::new(alpha, beta, gamma).unwrap();
                let rho = w_like_state(c).density_matrix();
                let verdict =
                    genuine_by_shareability(&steering_matrix(&rho).unwrap(), &rule).unwrap();
                if verdict.genuine {
                    let genuinely_entangled = witness_value(&rho).unwrap().genuine
                        || (alpha.abs() > 1e-12 && beta.abs() > 1e-12 && gamma.abs() > 1e-12);
                    assert!(
                        genuinely_entangled,
                        "unsound verdict at ({alpha}, {beta}, {gamma})"
                    );
                }
            }
        }
    }
}
