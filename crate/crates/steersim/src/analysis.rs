//! Report assembly shared by the command line and the C API: steering
//! matrices with classification and entanglement verdicts, rendered to
//! JSON (full precision) or CSV, with values also in the parenthesis
//! uncertainty notation that experimental tables use.

use serde::Serialize;

use crate::entanglement::{genuine_by_shareability, witness_value};
use crate::error::Result;
use crate::linalg::{DensityMatrix, Party};
use crate::measurement::{
    all_settings, estimate_steering_parameter, exact_record, simulate_counts, CountsRecord,
    SamplingMode,
};
use crate::steering::{
    classify_configuration, steering_matrix, ArrowRule, SteeringMatrix, SteeringValue,
};

/// `value(uncertainty)` notation: the uncertainty is rounded to one
/// significant digit and the value to the same decimal place, so
/// (1.7781, 0.023) prints as "1.78(2)". Exact values (stderr 0) print
/// with four decimals.
pub fn format_uncertain(value: f64, stderr: f64) -> String {
    if !stderr.is_finite() || stderr <= 0.0 {
        return format!("{value:.4}");
    }
    let mut exponent = stderr.log10().floor() as i32;
    let mut digit = (stderr / 10f64.powi(exponent)).round() as i64;
    if digit == 10 {
        digit = 1;
        exponent += 1;
    }
    if exponent < 0 {
        let decimals = (-exponent) as usize;
        format!("{value:.decimals$}({digit})")
    } else {
        let scale = 10f64.powi(exponent);
        let rounded = (value / scale).round() * scale;
        format!("{rounded:.0}({})", (digit as f64 * scale) as i64)
    }
}

/// One ordered pair in a report, parties by letter. `stderr` and
/// `resamples` appear only in estimated (simulated) reports.
#[derive(Debug, Clone, Serialize)]
pub struct PairEntry {
    pub steerer: String,
    pub steered: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resamples: Option<usize>,
    pub threshold: f64,
    pub violated: bool,
    pub display: String,
}

fn pair_entries(matrix: &SteeringMatrix, rule: &ArrowRule) -> Vec<PairEntry> {
    matrix
        .values()
        .iter()
        .map(|v| PairEntry {
            steerer: Party(v.steerer).name().to_string(),
            steered: Party(v.steered).name().to_string(),
            value: v.value,
            stderr: v.stderr,
            resamples: None,
            threshold: v.threshold,
            violated: rule.is_arrow(v),
            display: format_uncertain(v.value, v.stderr.unwrap_or(0.0)),
        })
        .collect()
}

fn arrow_names(arrows: &[(usize, usize)]) -> Vec<[String; 2]> {
    arrows
        .iter()
        .map(|&(s, t)| [Party(s).name().to_string(), Party(t).name().to_string()])
        .collect()
}

/// Analytic report: exact steering matrix, monogamy classification, and
/// for tripartite states the witness and shareability verdicts.
#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeReport {
    pub state: String,
    pub noise: f64,
    pub epsilon: f64,
    pub qubit_count: usize,
    pub steering_matrix: Vec<PairEntry>,
    pub category: String,
    pub arrows: Vec<[String; 2]>,
    pub in_degrees: Vec<usize>,
    pub witness: Option<f64>,
    pub witness_display: Option<String>,
    pub genuine_witness: Option<bool>,
    pub sr_verdict: Option<String>,
    pub witnessing_party: Option<String>,
}

pub fn analyze_report(
    rho: &DensityMatrix,
    state: &str,
    noise: f64,
    epsilon: f64,
) -> Result<AnalyzeReport> {
    let matrix = steering_matrix(rho)?;
    let rule = ArrowRule::exact(epsilon);
    let config = classify_configuration(&matrix, &rule);
    let tripartite = rho.qubit_count() == 3;
    let witness = tripartite.then(|| witness_value(rho)).transpose()?;
    let verdict = tripartite
        .then(|| genuine_by_shareability(&matrix, &rule))
        .transpose()?;
    Ok(AnalyzeReport {
        state: state.to_string(),
        noise,
        epsilon,
        qubit_count: rho.qubit_count(),
        steering_matrix: pair_entries(&matrix, &rule),
        category: config.category.label().to_string(),
        arrows: arrow_names(&config.arrows),
        in_degrees: config.in_degrees,
        witness: witness.map(|w| w.value),
        witness_display: witness.map(|w| format!("{:.4}", w.value)),
        genuine_witness: witness.map(|w| w.genuine),
        sr_verdict: verdict
            .as_ref()
            .map(|v| if v.genuine { "Y" } else { "N" }.to_string()),
        witnessing_party: verdict
            .as_ref()
            .and_then(|v| v.witnessing_party)
            .map(|p| Party(p).name().to_string()),
    })
}

/// Steering-matrix rows as CSV, same columns for exact and estimated
/// reports (stderr empty when exact).
pub fn matrix_to_csv(entries: &[PairEntry]) -> String {
    let mut out = String::from("steerer,steered,value,stderr,threshold,violated,display\n");
    for e in entries {
        let stderr = e.stderr.map(|s| s.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            e.steerer, e.steered, e.value, stderr, e.threshold, e.violated, e.display
        ));
    }
    out
}

/// Finite-shot report: estimated steering matrix with bootstrap error
/// bars, classification under the statistical arrow rule, shareability
/// verdict, and the raw counts it was computed from.
#[derive(Debug, Clone, Serialize)]
pub struct SimulateReport {
    pub state: String,
    pub noise: f64,
    pub shots: u64,
    pub seed: u64,
    pub resamples: usize,
    pub epsilon: f64,
    pub sigma_k: f64,
    pub mode: String,
    pub qubit_count: usize,
    pub steering_matrix: Vec<PairEntry>,
    pub category: String,
    pub arrows: Vec<[String; 2]>,
    pub in_degrees: Vec<usize>,
    pub sr_verdict: Option<String>,
    pub witnessing_party: Option<String>,
    pub counts: CountsRecord,
}

/// Simulation plus estimation config; shots = 0 switches to the exact
/// (analytic probabilities) record.
#[derive(Debug, Clone, Copy)]
pub struct SimulateConfig {
    pub shots: u64,
    pub seed: u64,
    pub resamples: usize,
    pub epsilon: f64,
    pub sigma_k: f64,
    pub mode: SamplingMode,
}

pub fn simulate_report(
    rho: &DensityMatrix,
    state: &str,
    noise: f64,
    config: SimulateConfig,
) -> Result<SimulateReport> {
    let n = rho.qubit_count();
    let settings = all_settings(n);
    let record = if config.shots == 0 {
        exact_record(rho, &settings)?
    } else {
        simulate_counts(rho, &settings, config.shots, config.seed, config.mode)?
    };
    let threshold = crate::steering::min_variance_bound(3)?;
    let mut values = Vec::with_capacity(n * (n - 1));
    let mut entry_resamples = Vec::new();
    for steerer in 0..n {
        for steered in 0..n {
            if steerer == steered {
                continue;
            }
            let est = estimate_steering_parameter(
                &record,
                Party(steerer),
                Party(steered),
                config.resamples,
                config.seed,
            )?;
            values.push(SteeringValue {
                steerer,
                steered,
                value: est.value,
                threshold,
                stderr: Some(est.stderr),
            });
            entry_resamples.push(est.resamples);
        }
    }
    let matrix = SteeringMatrix::from_values(values)?;
    let rule = ArrowRule {
        epsilon: config.epsilon,
        sigma_k: config.sigma_k,
    };
    let classification = classify_configuration(&matrix, &rule);
    let verdict = (n == 3)
        .then(|| genuine_by_shareability(&matrix, &rule))
        .transpose()?;
    let mut entries = pair_entries(&matrix, &rule);
    for (entry, r) in entries.iter_mut().zip(entry_resamples) {
        entry.resamples = Some(r);
    }
    Ok(SimulateReport {
        state: state.to_string(),
        noise,
        shots: record.shots(),
        seed: config.seed,
        resamples: config.resamples,
        epsilon: config.epsilon,
        sigma_k: config.sigma_k,
        mode: record.mode().to_string(),
        qubit_count: n,
        steering_matrix: entries,
        category: classification.category.label().to_string(),
        arrows: arrow_names(&classification.arrows),
        in_degrees: classification.in_degrees,
        sr_verdict: verdict
            .as_ref()
            .map(|v| if v.genuine { "Y" } else { "N" }.to_string()),
        witnessing_party: verdict
            .as_ref()
            .and_then(|v| v.witnessing_party)
            .map(|p| Party(p).name().to_string()),
        counts: record,
    })
}

/// Tomography outcome: counts are simulated on the prepared (noisy)
/// state; fidelity compares the reconstruction against the ideal
/// noise-free target, as an experiment would.
#[derive(Debug, Clone, Serialize)]
pub struct TomoReport {
    pub state: String,
    pub noise: f64,
    pub shots: u64,
    pub seed: u64,
    pub mode: String,
    pub fidelity: f64,
    pub display: String,
}

pub fn tomo_report(
    prepared: &DensityMatrix,
    ideal: &DensityMatrix,
    state: &str,
    noise: f64,
    shots: u64,
    seed: u64,
    mode: SamplingMode,
) -> Result<(TomoReport, DensityMatrix)> {
    let settings = all_settings(prepared.qubit_count());
    let record = if shots == 0 {
        exact_record(prepared, &settings)?
    } else {
        simulate_counts(prepared, &settings, shots, seed, mode)?
    };
    let reconstructed = crate::measurement::tomography_reconstruct(&record)?;
    let fidelity = crate::linalg::fidelity(&reconstructed, ideal)?;
    Ok((
        TomoReport {
            state: state.to_string(),
            noise,
            shots: record.shots(),
            seed,
            mode: record.mode().to_string(),
            fidelity,
            display: format!("{fidelity:.6}"),
        },
        reconstructed,
    ))
}
