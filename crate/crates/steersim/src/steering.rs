//! Three-setting steering parameters and their monogamy structure.
//!
//! For an ordered pair (steerer, steered) with Pauli settings σₓ, σ_y, σ_z
//! on both sides, the steering parameter is
//!
//!   P = Σᵢ δ²(αᵢ Aᵢ + Bᵢ) = Σᵢ [ δ²(Bᵢ) − C(Aᵢ, Bᵢ)² / δ²(Aᵢ) ]
//!
//! with the gain αᵢ = −C(Aᵢ, Bᵢ)/δ²(Aᵢ) chosen to minimize each term,
//! C(Aᵢ, Bᵢ) = ⟨AᵢBᵢ⟩ − ⟨Aᵢ⟩⟨Bᵢ⟩ and δ²(X) = ⟨X²⟩ − ⟨X⟩². Values below
//! the local-hidden-state bound of 2 certify that the steerer steers the
//! steered party. Arrows P_XY < 2 form a directed graph whose in-degree
//! pattern separates monogamous from shareable steering.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Axis, DensityMatrix, Observable, Party};
use crate::states::{w_like_state, CoefficientTriple};

/// A steerer-side variance below this is treated as exactly zero and its
/// term falls back to the unconditioned variance (gain α = 0).
pub const DEGENERATE_VARIANCE_TOL: f64 = 1e-12;

/// First- and second-moment data of one setting pair (Aᵢ, Bᵢ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SettingMoments {
    pub mean_steerer: f64,
    pub mean_steered: f64,
    /// ⟨AᵢBᵢ⟩.
    pub cross: f64,
    /// δ²(Aᵢ).
    pub variance_steerer: f64,
    /// δ²(Bᵢ).
    pub variance_steered: f64,
    /// C(Aᵢ, Bᵢ) = cross − mean_steerer · mean_steered.
    pub covariance: f64,
}

impl SettingMoments {
    /// Gain αᵢ minimizing δ²(αᵢ Aᵢ + Bᵢ); zero when the steerer variance
    /// is degenerate.
    pub fn optimal_gain(&self) -> f64 {
        if self.variance_steerer < DEGENERATE_VARIANCE_TOL {
            0.0
        } else {
            -self.covariance / self.variance_steerer
        }
    }

    /// Contribution δ²(Bᵢ) − C² / δ²(Aᵢ) of this setting to P.
    pub fn term(&self) -> f64 {
        if self.variance_steerer < DEGENERATE_VARIANCE_TOL {
            self.variance_steered
        } else {
            self.variance_steered - self.covariance * self.covariance / self.variance_steerer
        }
    }
}

/// Moments for the x, y, z settings of one ordered pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairMoments {
    pub x: SettingMoments,
    pub y: SettingMoments,
    pub z: SettingMoments,
}

impl PairMoments {
    pub fn get(&self, axis: Axis) -> &SettingMoments {
        match axis {
            Axis::X => &self.x,
            Axis::Y => &self.y,
            Axis::Z => &self.z,
        }
    }
}

/// Moments of a two-party state with the steerer on party 0 and the
/// steered party on party 1, Pauli settings on both sides.
pub fn pair_moments(rho_pair: &DensityMatrix) -> Result<PairMoments> {
    let settings = [
        Observable::pauli(Axis::X),
        Observable::pauli(Axis::Y),
        Observable::pauli(Axis::Z),
    ];
    pair_moments_with_settings(rho_pair, &settings, &settings)
}

/// Same as [`pair_moments`] with caller-chosen Hermitian settings; the
/// variance uses ⟨X²⟩ − ⟨X⟩², which reduces to 1 − ⟨X⟩² for Paulis.
pub fn pair_moments_with_settings(
    rho_pair: &DensityMatrix,
    steerer_settings: &[Observable; 3],
    steered_settings: &[Observable; 3],
) -> Result<PairMoments> {
    if rho_pair.qubit_count() != 2 {
        return Err(Error::WrongQubitCount {
            count: rho_pair.qubit_count(),
            expected: 2,
        });
    }
    let mut out = [SettingMoments {
        mean_steerer: 0.0,
        mean_steered: 0.0,
        cross: 0.0,
        variance_steerer: 0.0,
        variance_steered: 0.0,
        covariance: 0.0,
    }; 3];
    for (i, (sa, sb)) in steerer_settings.iter().zip(steered_settings).enumerate() {
        let a = rho_pair.expectation(&[(Party(0), *sa)])?;
        let b = rho_pair.expectation(&[(Party(1), *sb)])?;
        let ab = rho_pair.expectation(&[(Party(0), *sa), (Party(1), *sb)])?;
        let a_sq = Observable::new(sa.matrix() * sa.matrix()).expect("square is Hermitian");
        let b_sq = Observable::new(sb.matrix() * sb.matrix()).expect("square is Hermitian");
        let aa = rho_pair.expectation(&[(Party(0), a_sq)])?;
        let bb = rho_pair.expectation(&[(Party(1), b_sq)])?;
        out[i] = SettingMoments {
            mean_steerer: a,
            mean_steered: b,
            cross: ab,
            variance_steerer: aa - a * a,
            variance_steered: bb - b * b,
            covariance: ab - a * b,
        };
    }
    Ok(PairMoments {
        x: out[0],
        y: out[1],
        z: out[2],
    })
}

/// Local-hidden-state bound on Σᵢ δ²(αᵢ Aᵢ + Bᵢ): 2 for the three Pauli
/// settings, 1 for two.
pub fn min_variance_bound(setting_count: usize) -> Result<f64> {
    match setting_count {
        3 => Ok(2.0),
        2 => Ok(1.0),
        count => Err(Error::UnsupportedSettingCount { count }),
    }
}

/// P evaluated from precomputed moments; shared by the exact and the
/// counts-estimated paths.
pub fn parameter_from_moments(m: &PairMoments) -> f64 {
    m.x.term() + m.y.term() + m.z.term()
}

/// Steering parameter P for `steerer` → `steered` inside a state of two
/// or more parties; the other parties are traced out.
pub fn steering_parameter(rho: &DensityMatrix, steerer: Party, steered: Party) -> Result<f64> {
    if steerer == steered {
        return Err(Error::SamePartyPair);
    }
    let reduced = rho.partial_trace(&[steerer, steered])?;
    Ok(parameter_from_moments(&pair_moments(&reduced)?))
}

/// One directed entry of the steering matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteeringValue {
    pub steerer: usize,
    pub steered: usize,
    pub value: f64,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stderr: Option<f64>,
}

/// Arrow decision rule: an arrow steerer → steered exists when
/// value + sigma_k · stderr < threshold − epsilon, with stderr taken as 0
/// for exact values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrowRule {
    pub epsilon: f64,
    pub sigma_k: f64,
}

impl Default for ArrowRule {
    fn default() -> Self {
        ArrowRule {
            epsilon: 0.0,
            sigma_k: 1.0,
        }
    }
}

impl ArrowRule {
    pub fn exact(epsilon: f64) -> Self {
        ArrowRule {
            epsilon,
            sigma_k: 0.0,
        }
    }

    pub fn is_arrow(&self, v: &SteeringValue) -> bool {
        v.value + self.sigma_k * v.stderr.unwrap_or(0.0) < v.threshold - self.epsilon
    }
}

/// All n(n−1) ordered-pair steering values of an n-party state, stored in
/// lexicographic (steerer, steered) order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteeringMatrix {
    party_count: usize,
    values: Vec<SteeringValue>,
}

impl SteeringMatrix {
    /// Accepts exactly the full set of ordered pairs, in any order.
    pub fn from_values(mut values: Vec<SteeringValue>) -> Result<Self> {
        let party_count = (1..=8)
            .find(|n| n * (n - 1) == values.len())
            .filter(|&n| n >= 2)
            .ok_or(Error::IncompleteMatrix {
                expected: values.len(),
                party_count: 0,
            })?;
        values.sort_by_key(|v| (v.steerer, v.steered));
        let mut expected = Vec::new();
        for s in 0..party_count {
            for t in 0..party_count {
                if s != t {
                    expected.push((s, t));
                }
            }
        }
        let got: Vec<(usize, usize)> = values.iter().map(|v| (v.steerer, v.steered)).collect();
        if got != expected {
            return Err(Error::IncompleteMatrix {
                expected: party_count * (party_count - 1),
                party_count,
            });
        }
        Ok(SteeringMatrix {
            party_count,
            values,
        })
    }

    pub fn party_count(&self) -> usize {
        self.party_count
    }

    pub fn values(&self) -> &[SteeringValue] {
        &self.values
    }

    pub fn value(&self, steerer: Party, steered: Party) -> Option<&SteeringValue> {
        self.values
            .iter()
            .find(|v| v.steerer == steerer.0 && v.steered == steered.0)
    }

    /// Incoming arrow count per party under `rule`.
    pub fn in_degrees(&self, rule: &ArrowRule) -> Vec<usize> {
        let mut degrees = vec![0usize; self.party_count];
        for v in &self.values {
            if rule.is_arrow(v) {
                degrees[v.steered] += 1;
            }
        }
        degrees
    }
}

/// Full steering matrix of `rho` with Pauli settings and the three-setting
/// bound as threshold.
pub fn steering_matrix(rho: &DensityMatrix) -> Result<SteeringMatrix> {
    let n = rho.qubit_count();
    if n < 2 {
        return Err(Error::WrongQubitCount {
            count: n,
            expected: 2,
        });
    }
    let threshold = min_variance_bound(3)?;
    let mut values = Vec::with_capacity(n * (n - 1));
    for s in 0..n {
        for t in 0..n {
            if s != t {
                values.push(SteeringValue {
                    steerer: s,
                    steered: t,
                    value: steering_parameter(rho, Party(s), Party(t))?,
                    threshold,
                    stderr: None,
                });
            }
        }
    }
    Ok(SteeringMatrix {
        party_count: n,
        values,
    })
}

/// Monogamy class of the directed steering graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteeringCategory {
    /// No arrows at all.
    Unsteerable,
    /// Arrows exist but every party has at most one steerer.
    Monogamous,
    /// Some party is steered by two or more others.
    Shareable,
    /// Every ordered pair violates the bound; a sub-case of shareable.
    FullyMutual,
}

impl SteeringCategory {
    pub fn label(self) -> &'static str {
        match self {
            SteeringCategory::Unsteerable => "unsteerable",
            SteeringCategory::Monogamous => "monogamous",
            SteeringCategory::Shareable => "shareable",
            SteeringCategory::FullyMutual => "fully_mutual",
        }
    }
}

/// Classification result: the category with the arrows and in-degrees
/// behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteeringConfiguration {
    pub category: SteeringCategory,
    /// Arrows as (steerer, steered) index pairs, lexicographic.
    pub arrows: Vec<(usize, usize)>,
    pub in_degrees: Vec<usize>,
}

/// Classifies the directed graph of arrows under `rule`.
pub fn classify_configuration(m: &SteeringMatrix, rule: &ArrowRule) -> SteeringConfiguration {
    let arrows: Vec<(usize, usize)> = m
        .values()
        .iter()
        .filter(|v| rule.is_arrow(v))
        .map(|v| (v.steerer, v.steered))
        .collect();
    let in_degrees = m.in_degrees(rule);
    let n = m.party_count();
    let category = if arrows.is_empty() {
        SteeringCategory::Unsteerable
    } else if arrows.len() == n * (n - 1) {
        SteeringCategory::FullyMutual
    } else if in_degrees.iter().any(|&d| d >= 2) {
        SteeringCategory::Shareable
    } else {
        SteeringCategory::Monogamous
    };
    SteeringConfiguration {
        category,
        arrows,
        in_degrees,
    }
}

/// Rectangular grid over the (α, β) coefficient plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub beta_min: f64,
    pub beta_max: f64,
    /// Points per axis, endpoints included.
    pub resolution: usize,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            alpha_min: 0.0,
            alpha_max: 1.0,
            beta_min: 0.0,
            beta_max: 1.0,
            resolution: 200,
        }
    }
}

/// One sweep cell; `gamma`, `parameters` and `category` are `None` when
/// α² + β² > 1 leaves no real γ.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: Option<f64>,
    /// P values in the order AB, BA, AC, CA, BC, CB.
    pub parameters: Option<[f64; 6]>,
    pub category: Option<SteeringCategory>,
}

/// Sweeps w_like_state(α, β, γ(α, β)) over the grid and classifies each
/// cell. Cells are independent; the row-major output order and every
/// float in it are identical for any worker count.
pub fn sweep_region_map(grid: &SweepGrid, rule: &ArrowRule) -> Result<Vec<SweepCell>> {
    if grid.resolution < 2 {
        return Err(Error::Parse(format!(
            "sweep resolution must be at least 2, got {}",
            grid.resolution
        )));
    }
    let res = grid.resolution;
    let coord = |min: f64, max: f64, i: usize| min + (max - min) * i as f64 / (res - 1) as f64;
    let cells: Vec<SweepCell> = (0..res * res)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / res, idx % res);
            let alpha = coord(grid.alpha_min, grid.alpha_max, i);
            let beta = coord(grid.beta_min, grid.beta_max, j);
            let remainder = 1.0 - alpha * alpha - beta * beta;
            if remainder < 0.0 {
                return SweepCell {
                    alpha,
                    beta,
                    gamma: None,
                    parameters: None,
                    category: None,
                };
            }
            let gamma = remainder.sqrt();
            let triple = CoefficientTriple::new(alpha, beta, gamma)
                .expect("grid cells inside the disk are normalized");
            let rho = w_like_state(triple).density_matrix();
            let matrix = steering_matrix(&rho).expect("three-party state");
            let p = |s: usize, t: usize| matrix.value(Party(s), Party(t)).unwrap().value;
            let parameters = [p(0, 1), p(1, 0), p(0, 2), p(2, 0), p(1, 2), p(2, 1)];
            let category = classify_configuration(&matrix, rule).category;
            SweepCell {
                alpha,
                beta,
                gamma: Some(gamma),
                parameters: Some(parameters),
                category: Some(category),
            }
        })
        .collect();
    Ok(cells)
}

/// CSV form of a sweep: header plus one row per cell; invalid cells keep
/// empty numeric fields and the category `invalid`.
pub fn sweep_to_csv(cells: &[SweepCell]) -> String {
    let mut out = String::from("alpha,beta,gamma,P_AB,P_BA,P_AC,P_CA,P_BC,P_CB,category\n");
    for cell in cells {
        match (&cell.gamma, &cell.parameters, &cell.category) {
            (Some(g), Some(p), Some(cat)) => {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    cell.alpha,
                    cell.beta,
                    g,
                    p[0],
                    p[1],
                    p[2],
                    p[3],
                    p[4],
                    p[5],
                    cat.label()
                ));
            }
            _ => {
                out.push_str(&format!("{},{},,,,,,,,invalid\n", cell.alpha, cell.beta));
            }
        }
    }
    out
}
