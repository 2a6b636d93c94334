//! Finite-shot measurement simulation, bootstrap moment estimation
//! and linear-inversion state tomography.
//!
//! A [`CountsRecord`] holds outcome tallies for a list of product Pauli
//! settings. Records are produced analytically ([`exact_record`]) or by
//! sampling ([`simulate_counts`]); estimators and the tomographic
//! reconstruction consume them uniformly. All randomness is ChaCha8
//! keyed by a user seed, with one stream per task so a (seed, task)
//! pair fully determines the draws regardless of thread count.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;
use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{bit_of, pauli_eigenbasis, DensityMatrix, Observable, Party, MAX_QUBITS};
use crate::steering::{parameter_from_moments, PairMoments, SettingMoments};
use crate::Axis;

/// Bootstrap streams start here so a seed shared between simulation and
/// resampling never reuses a stream across the two stages.
const RESAMPLE_STREAM_OFFSET: u64 = 1 << 32;

/// One product measurement setting, one Pauli axis per party.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MeasurementSetting {
    axes: Vec<Axis>,
}

impl MeasurementSetting {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > MAX_QUBITS {
            return Err(Error::Parse(format!(
                "setting needs 1 to {MAX_QUBITS} axes, got {}",
                axes.len()
            )));
        }
        Ok(MeasurementSetting { axes })
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, party: usize) -> Axis {
        self.axes[party]
    }

    pub fn qubit_count(&self) -> usize {
        self.axes.len()
    }
}

impl fmt::Display for MeasurementSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for axis in &self.axes {
            write!(f, "{axis}")?;
        }
        Ok(())
    }
}

impl FromStr for MeasurementSetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let axes = s
            .chars()
            .map(|c| {
                Axis::from_letter(c)
                    .ok_or_else(|| Error::Parse(format!("invalid axis letter {c:?} in setting {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        MeasurementSetting::new(axes)
    }
}

/// All 3^n product settings in lexicographic order (xx.., .., zz..).
pub fn all_settings(qubit_count: usize) -> Vec<MeasurementSetting> {
    let total = 3usize.pow(qubit_count as u32);
    (0..total)
        .map(|mut code| {
            let mut axes = vec![Axis::X; qubit_count];
            for slot in (0..qubit_count).rev() {
                axes[slot] = Axis::ALL[code % 3];
                code /= 3;
            }
            MeasurementSetting { axes }
        })
        .collect()
}

/// How outcome tallies are generated from the Born-rule probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMode {
    /// Fixed total per setting, counts drawn jointly.
    Multinomial,
    /// Independent Poisson tally per outcome with mean shots x p.
    Poissonized,
    /// Probabilities stored directly, `shots` is the 0 sentinel.
    Exact,
}

impl fmt::Display for SamplingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SamplingMode::Multinomial => "multinomial",
            SamplingMode::Poissonized => "poissonized",
            SamplingMode::Exact => "exact",
        };
        write!(f, "{name}")
    }
}

/// Outcome tallies for a set of measurement settings on one state.
///
/// Rows are kept sorted by setting string, so serialization and the
/// estimators' pooling order do not depend on construction order.
/// Counts are stored as f64: integral in the sampled modes (enforced),
/// Born probabilities in exact mode.
#[derive(Debug, Clone, PartialEq)]
pub struct CountsRecord {
    qubit_count: usize,
    shots: u64,
    seed: u64,
    mode: SamplingMode,
    rows: Vec<(MeasurementSetting, Vec<f64>)>,
}

impl CountsRecord {
    pub fn new(
        qubit_count: usize,
        shots: u64,
        seed: u64,
        mode: SamplingMode,
        mut rows: Vec<(MeasurementSetting, Vec<f64>)>,
    ) -> Result<Self> {
        if qubit_count == 0 || qubit_count > MAX_QUBITS {
            return Err(Error::Parse(format!(
                "record needs 1 to {MAX_QUBITS} qubits, got {qubit_count}"
            )));
        }
        if rows.is_empty() {
            return Err(Error::Parse("record has no settings".into()));
        }
        let dim = 1usize << qubit_count;
        let sampled = mode != SamplingMode::Exact;
        if sampled && shots == 0 {
            return Err(Error::ZeroShots);
        }
        if !sampled && shots != 0 {
            return Err(Error::Parse(
                "exact records use the shots = 0 sentinel".into(),
            ));
        }
        for (setting, counts) in &rows {
            if setting.qubit_count() != qubit_count {
                return Err(Error::WrongQubitCount {
                    count: setting.qubit_count(),
                    expected: qubit_count,
                });
            }
            if counts.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: counts.len(),
                    right: dim,
                });
            }
            let mut total = 0.0;
            for &c in counts {
                if !c.is_finite() || c < 0.0 {
                    return Err(Error::NonIntegerCount { value: c });
                }
                if sampled && c.fract() != 0.0 {
                    return Err(Error::NonIntegerCount { value: c });
                }
                total += c;
            }
            match mode {
                SamplingMode::Multinomial => {
                    if (total - shots as f64).abs() > 0.5 {
                        return Err(Error::Parse(format!(
                            "setting {setting} tallies {total} shots, header says {shots}"
                        )));
                    }
                }
                SamplingMode::Exact => {
                    if (total - 1.0).abs() > 1e-6 {
                        return Err(Error::Parse(format!(
                            "setting {setting} probabilities sum to {total}"
                        )));
                    }
                }
                SamplingMode::Poissonized => {}
            }
        }
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        if rows.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Parse("duplicate setting in record".into()));
        }
        Ok(CountsRecord {
            qubit_count,
            shots,
            seed,
            mode,
            rows,
        })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    /// Nominal shots per setting; 0 marks an exact record.
    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn mode(&self) -> SamplingMode {
        self.mode
    }

    /// Rows sorted by setting string.
    pub fn rows(&self) -> &[(MeasurementSetting, Vec<f64>)] {
        &self.rows
    }

    /// Flat table with a `setting,outcome,count` header; outcomes are
    /// bit strings, counts print as integers in the sampled modes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("setting,outcome,count\n");
        for (setting, counts) in &self.rows {
            for (index, &count) in counts.iter().enumerate() {
                let outcome = format_outcome(index, self.qubit_count);
                out.push_str(&format!("{setting},{outcome},{}\n", format_count(count)));
            }
        }
        out
    }
}

fn format_outcome(index: usize, qubit_count: usize) -> String {
    format!("{index:0width$b}", width = qubit_count)
}

fn format_count(count: f64) -> String {
    if count.fract() == 0.0 && count.abs() < 9e15 {
        format!("{}", count as i64)
    } else {
        format!("{count}")
    }
}

impl Serialize for CountsRecord {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        struct CountsField<'a>(&'a CountsRecord);

        impl Serialize for CountsField<'_> {
            fn serialize<S: Serializer>(
                &self,
                serializer: S,
            ) -> std::result::Result<S::Ok, S::Error> {
                let mut map = serializer.serialize_map(Some(self.0.rows.len()))?;
                for (setting, counts) in &self.0.rows {
                    let mut outcomes = BTreeMap::new();
                    for (index, &count) in counts.iter().enumerate() {
                        outcomes.insert(
                            format_outcome(index, self.0.qubit_count),
                            CountValue {
                                value: count,
                                integral: self.0.mode != SamplingMode::Exact,
                            },
                        );
                    }
                    map.serialize_entry(&setting.to_string(), &outcomes)?;
                }
                map.end()
            }
        }

        let mut map = serializer.serialize_map(Some(5))?;
        map.serialize_entry("qubit_count", &self.qubit_count)?;
        map.serialize_entry("shots", &self.shots)?;
        map.serialize_entry("seed", &self.seed)?;
        map.serialize_entry("mode", &self.mode)?;
        map.serialize_entry("counts", &CountsField(self))?;
        map.end()
    }
}

struct CountValue {
    value: f64,
    integral: bool,
}

impl Serialize for CountValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.integral {
            serializer.serialize_u64(self.value as u64)
        } else {
            serializer.serialize_f64(self.value)
        }
    }
}

#[derive(Deserialize)]
struct RecordWire {
    qubit_count: usize,
    shots: u64,
    seed: u64,
    mode: SamplingMode,
    counts: BTreeMap<String, BTreeMap<String, f64>>,
}

impl<'de> Deserialize<'de> for CountsRecord {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = RecordWire::deserialize(deserializer)?;
        let dim = 1usize
            .checked_shl(wire.qubit_count as u32)
            .filter(|_| wire.qubit_count >= 1 && wire.qubit_count <= MAX_QUBITS)
            .ok_or_else(|| D::Error::custom("qubit_count out of range"))?;
        let mut rows = Vec::with_capacity(wire.counts.len());
        for (key, outcomes) in wire.counts {
            let setting: MeasurementSetting = key.parse().map_err(D::Error::custom)?;
            let mut counts = vec![0.0; dim];
            for (outcome, count) in outcomes {
                if outcome.len() != wire.qubit_count
                    || outcome.bytes().any(|b| b != b'0' && b != b'1')
                {
                    return Err(D::Error::custom(format!(
                        "outcome key {outcome:?} is not a {}-bit string",
                        wire.qubit_count
                    )));
                }
                let index = usize::from_str_radix(&outcome, 2).expect("binary string");
                counts[index] = count;
            }
            rows.push((setting, counts));
        }
        CountsRecord::new(wire.qubit_count, wire.shots, wire.seed, wire.mode, rows)
            .map_err(D::Error::custom)
    }
}

/// Born-rule outcome probabilities of `setting` on `rho`, indexed so
/// party p's outcome bit sits at position `qubit_count - 1 - p`.
fn outcome_probabilities(rho: &DensityMatrix, setting: &MeasurementSetting) -> Vec<f64> {
    let mut basis = DMatrix::<Complex64>::identity(1, 1);
    for party in 0..rho.qubit_count() {
        basis = basis.kronecker(&pauli_eigenbasis(setting.axis(party)));
    }
    let rotated = &basis * rho.matrix() * basis.adjoint();
    let dim = rho.dim();
    let mut probs: Vec<f64> = (0..dim).map(|o| rotated[(o, o)].re.max(0.0)).collect();
    let total: f64 = probs.iter().sum();
    if total > 0.0 {
        for p in &mut probs {
            *p /= total;
        }
    }
    probs
}

/// Joint multinomial draw by sequential binomial splitting; the tallies
/// always sum to exactly `shots`.
fn multinomial_draw(probs: &[f64], shots: u64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut counts = vec![0.0; probs.len()];
    let mut remaining = shots;
    let mut rest: f64 = probs.iter().sum();
    for (k, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if k + 1 == probs.len() {
            counts[k] = remaining as f64;
            break;
        }
        let ratio = if rest > 0.0 { (p / rest).clamp(0.0, 1.0) } else { 1.0 };
        let draw = if ratio >= 1.0 {
            remaining
        } else if ratio <= 0.0 {
            0
        } else {
            Binomial::new(remaining, ratio)
                .expect("ratio is a probability")
                .sample(rng)
        };
        counts[k] = draw as f64;
        remaining -= draw;
        rest -= p;
    }
    counts
}

fn poisson_draw(probs: &[f64], shots: u64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    probs
        .iter()
        .map(|&p| {
            let mean = p * shots as f64;
            if mean > 0.0 {
                Poisson::new(mean).expect("positive mean").sample(rng)
            } else {
                0.0
            }
        })
        .collect()
}

/// Simulates counts for every setting. Settings are independent tasks:
/// task i uses ChaCha8 stream i of `seed`, so results are identical for
/// any thread count and any later re-run. [`SamplingMode::Exact`]
/// ignores `shots` and `seed` and delegates to [`exact_record`].
pub fn simulate_counts(
    rho: &DensityMatrix,
    settings: &[MeasurementSetting],
    shots: u64,
    seed: u64,
    mode: SamplingMode,
) -> Result<CountsRecord> {
    if mode == SamplingMode::Exact {
        return exact_record(rho, settings);
    }
    if settings.is_empty() {
        return Err(Error::Parse("settings list is empty".into()));
    }
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    for setting in settings {
        if setting.qubit_count() != rho.qubit_count() {
            return Err(Error::WrongQubitCount {
                count: setting.qubit_count(),
                expected: rho.qubit_count(),
            });
        }
    }
    let rows: Vec<(MeasurementSetting, Vec<f64>)> = settings
        .par_iter()
        .enumerate()
        .map(|(task, setting)| {
            let probs = outcome_probabilities(rho, setting);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(task as u64);
            let counts = match mode {
                SamplingMode::Multinomial => multinomial_draw(&probs, shots, &mut rng),
                SamplingMode::Poissonized => poisson_draw(&probs, shots, &mut rng),
                SamplingMode::Exact => unreachable!("handled above"),
            };
            (setting.clone(), counts)
        })
        .collect();
    CountsRecord::new(rho.qubit_count(), shots, seed, mode, rows)
}

/// Record holding the analytic Born probabilities instead of samples,
/// marked by the shots = 0 sentinel. Estimators then return the exact
/// population values.
pub fn exact_record(rho: &DensityMatrix, settings: &[MeasurementSetting]) -> Result<CountsRecord> {
    if settings.is_empty() {
        return Err(Error::Parse("settings list is empty".into()));
    }
    for setting in settings {
        if setting.qubit_count() != rho.qubit_count() {
            return Err(Error::WrongQubitCount {
                count: setting.qubit_count(),
                expected: rho.qubit_count(),
            });
        }
    }
    let rows = settings
        .iter()
        .map(|s| (s.clone(), outcome_probabilities(rho, s)))
        .collect();
    CountsRecord::new(rho.qubit_count(), 0, 0, SamplingMode::Exact, rows)
}

#[derive(Debug, Clone, Copy, Default)]
struct Tallies {
    total: f64,
    sum_a: f64,
    sum_b: f64,
    sum_ab: f64,
}

/// Plug-in moments from explicit count rows (either the record's own or
/// a bootstrap resample). For each axis, every setting whose steerer
/// and steered slots align on that axis is pooled, in stored order.
fn moments_from_counts(
    record: &CountsRecord,
    steerer: Party,
    steered: Party,
    counts: &[Vec<f64>],
) -> Result<PairMoments> {
    let n = record.qubit_count;
    for party in [steerer, steered] {
        if party.0 >= n {
            return Err(Error::PartyOutOfRange {
                party: party.0,
                qubit_count: n,
            });
        }
    }
    if steerer == steered {
        return Err(Error::SamePartyPair);
    }
    let mut tallies = [Tallies::default(); 3];
    let mut seen = [false; 3];
    for ((setting, _), row) in record.rows.iter().zip(counts) {
        let axis = setting.axis(steerer.0);
        if axis != setting.axis(steered.0) {
            continue;
        }
        let slot = axis as usize;
        seen[slot] = true;
        let t = &mut tallies[slot];
        for (outcome, &count) in row.iter().enumerate() {
            if count == 0.0 {
                continue;
            }
            let a = 1.0 - 2.0 * bit_of(outcome, steerer.0, n) as f64;
            let b = 1.0 - 2.0 * bit_of(outcome, steered.0, n) as f64;
            t.total += count;
            t.sum_a += count * a;
            t.sum_b += count * b;
            t.sum_ab += count * a * b;
        }
    }
    let mut per_axis = [SettingMoments {
        mean_steerer: 0.0,
        mean_steered: 0.0,
        cross: 0.0,
        variance_steerer: 0.0,
        variance_steered: 0.0,
        covariance: 0.0,
    }; 3];
    for axis in Axis::ALL {
        let slot = axis as usize;
        if !seen[slot] {
            return Err(Error::MissingAlignedSetting {
                axis: axis.letter(),
            });
        }
        let t = tallies[slot];
        if t.total <= 0.0 {
            return Err(Error::EmptyCounts {
                setting: format!("{0}{0} pool", axis.letter()),
            });
        }
        let mean_a = t.sum_a / t.total;
        let mean_b = t.sum_b / t.total;
        let cross = t.sum_ab / t.total;
        per_axis[slot] = SettingMoments {
            mean_steerer: mean_a,
            mean_steered: mean_b,
            cross,
            variance_steerer: 1.0 - mean_a * mean_a,
            variance_steered: 1.0 - mean_b * mean_b,
            covariance: cross - mean_a * mean_b,
        };
    }
    Ok(PairMoments {
        x: per_axis[0],
        y: per_axis[1],
        z: per_axis[2],
    })
}

fn record_counts(record: &CountsRecord) -> Vec<Vec<f64>> {
    record.rows.iter().map(|(_, c)| c.clone()).collect()
}

/// Plug-in pair moments from a counts record. Pauli outcomes are +-1,
/// so variances are 1 - mean^2.
pub fn estimate_moments(
    record: &CountsRecord,
    steerer: Party,
    steered: Party,
) -> Result<PairMoments> {
    moments_from_counts(record, steerer, steered, &record_counts(record))
}

/// One Poisson bootstrap resample of the rows this pair's estimator
/// reads; other rows are passed through untouched. Draw order is fixed
/// (rows in stored order, outcomes ascending) for determinism.
fn resample_counts(
    record: &CountsRecord,
    steerer: Party,
    steered: Party,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<f64>> {
    record
        .rows
        .iter()
        .map(|(setting, row)| {
            if setting.axis(steerer.0) != setting.axis(steered.0) {
                return row.clone();
            }
            row.iter()
                .map(|&c| {
                    if c > 0.0 {
                        Poisson::new(c).expect("positive mean").sample(rng)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

fn resample_rng(seed: u64, resample: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(RESAMPLE_STREAM_OFFSET + resample as u64);
    rng
}

fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
        / (values.len() - 1) as f64;
    var.max(0.0).sqrt()
}

fn bootstrap_moments(
    record: &CountsRecord,
    steerer: Party,
    steered: Party,
    resamples: usize,
    seed: u64,
) -> Result<Vec<PairMoments>> {
    // Exact records hold probabilities, not tallies; there is no
    // sampling noise to resample and the standard error is zero.
    if record.mode == SamplingMode::Exact {
        return Ok(Vec::new());
    }
    (0..resamples)
        .into_par_iter()
        .map(|r| {
            let mut rng = resample_rng(seed, r);
            let counts = resample_counts(record, steerer, steered, &mut rng);
            moments_from_counts(record, steerer, steered, &counts)
        })
        .collect()
}

/// Plug-in moments together with per-entry standard errors from the
/// Poisson bootstrap (each raw count replaced by a Poisson draw with
/// that mean, `resamples` times).
pub fn estimate_moments_with_stderr(
    record: &CountsRecord,
    steerer: Party,
    steered: Party,
    resamples: usize,
    seed: u64,
) -> Result<(PairMoments, PairMoments)> {
    let point = estimate_moments(record, steerer, steered)?;
    let draws = bootstrap_moments(record, steerer, steered, resamples, seed)?;
    let fields: [fn(&SettingMoments) -> f64; 6] = [
        |m| m.mean_steerer,
        |m| m.mean_steered,
        |m| m.cross,
        |m| m.variance_steerer,
        |m| m.variance_steered,
        |m| m.covariance,
    ];
    let spread = |axis: Axis| {
        let values: Vec<[f64; 6]> = draws
            .iter()
            .map(|d| {
                let m = d.get(axis);
                [
                    fields[0](m),
                    fields[1](m),
                    fields[2](m),
                    fields[3](m),
                    fields[4](m),
                    fields[5](m),
                ]
            })
            .collect();
        let std_of = |k: usize| sample_std(&values.iter().map(|v| v[k]).collect::<Vec<_>>());
        SettingMoments {
            mean_steerer: std_of(0),
            mean_steered: std_of(1),
            cross: std_of(2),
            variance_steerer: std_of(3),
            variance_steered: std_of(4),
            covariance: std_of(5),
        }
    };
    Ok((
        point,
        PairMoments {
            x: spread(Axis::X),
            y: spread(Axis::Y),
            z: spread(Axis::Z),
        },
    ))
}

/// Steering-parameter estimate with its bootstrap standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub value: f64,
    pub stderr: f64,
    pub resamples: usize,
}

/// P estimate for one ordered pair from a counts record: the point value
/// from plug-in moments, the standard error as the sample std of the
/// parameter over Poisson bootstrap resamples. Degenerate resampled
/// steerer variances fall back to the unconditioned term, as in the
/// exact path.
pub fn estimate_steering_parameter(
    record: &CountsRecord,
    steerer: Party,
    steered: Party,
    resamples: usize,
    seed: u64,
) -> Result<EstimateWithError> {
    let value = parameter_from_moments(&estimate_moments(record, steerer, steered)?);
    let draws = bootstrap_moments(record, steerer, steered, resamples, seed)?;
    let params: Vec<f64> = draws.iter().map(parameter_from_moments).collect();
    Ok(EstimateWithError {
        value,
        stderr: sample_std(&params),
        resamples: draws.len(),
    })
}

/// Linear-inversion tomography over the full Pauli basis.
///
/// Needs every one of the 3^n settings (each Pauli string's expectation
/// is pooled from all settings matching it on its support, identity
/// slots marginalized), assembles rho = 2^-n * sum of <P> P over all
/// 4^n strings, then projects onto the physical set.
pub fn tomography_reconstruct(record: &CountsRecord) -> Result<DensityMatrix> {
    let n = record.qubit_count;
    let expected = 3usize.pow(n as u32);
    if record.rows.len() != expected {
        return Err(Error::IncompleteTomographyRecord {
            got: record.rows.len(),
            expected,
        });
    }
    let dim = 1usize << n;
    let strings = 4usize.pow(n as u32);
    let mut accumulated = DMatrix::<Complex64>::zeros(dim, dim);
    for code in 0..strings {
        let mut slots: Vec<Option<Axis>> = Vec::with_capacity(n);
        let mut rest = code;
        for _ in 0..n {
            slots.push(match rest % 4 {
                0 => None,
                k => Some(Axis::ALL[k - 1]),
            });
            rest /= 4;
        }
        slots.reverse();
        let expectation = pauli_string_expectation(record, &slots)?;
        let mut op = DMatrix::<Complex64>::identity(1, 1);
        for slot in &slots {
            let factor: Matrix2<Complex64> = match slot {
                None => Matrix2::identity(),
                Some(axis) => *Observable::pauli(*axis).matrix(),
            };
            op = op.kronecker(&factor);
        }
        accumulated += op * Complex64::new(expectation, 0.0);
    }
    accumulated /= Complex64::new(dim as f64, 0.0);
    crate::linalg::nearest_physical_state(&accumulated)
}

/// Pooled expectation of one Pauli string (None = identity slot) over
/// all settings that match the string on its support.
fn pauli_string_expectation(record: &CountsRecord, slots: &[Option<Axis>]) -> Result<f64> {
    if slots.iter().all(Option::is_none) {
        return Ok(1.0);
    }
    let n = record.qubit_count;
    let mut total = 0.0;
    let mut weighted = 0.0;
    for (setting, counts) in &record.rows {
        let matches = slots
            .iter()
            .enumerate()
            .all(|(p, slot)| slot.is_none_or(|axis| setting.axis(p) == axis));
        if !matches {
            continue;
        }
        for (outcome, &count) in counts.iter().enumerate() {
            if count == 0.0 {
                continue;
            }
            let mut sign = 1.0;
            for (p, slot) in slots.iter().enumerate() {
                if slot.is_some() {
                    sign *= 1.0 - 2.0 * bit_of(outcome, p, n) as f64;
                }
            }
            total += count;
            weighted += count * sign;
        }
    }
    if total <= 0.0 {
        let label: String = slots
            .iter()
            .map(|s| s.map_or('I', |a| a.letter().to_ascii_uppercase()))
            .collect();
        return Err(Error::EmptyCounts {
            setting: format!("{label} pool"),
        });
    }
    Ok(weighted / total)
}
