//! Textual state specifiers used by the command line and the C API.
//!
//! Grammar (case-sensitive prefixes, comma-separated numbers):
//!   w:a,b,g      W-class state a|001> + b|010> + g|100>, tuple normalized
//!   wn:N         symmetric W state of N parties, N in 2..=4
//!   ghz:mu,nu    GHZ-class state mu|110> + nu|001>, tuple normalized
//!   prep:t1,t2   waveplate pipeline state at angles t1, t2 in degrees
//!   file:path    a serialized DensityMatrix or Ket (JSON)
//!
//! Tuples are rescaled to unit norm, so specifiers rounded to a few
//! digits stay valid; an all-zero tuple is rejected.

use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, Ket};
use crate::states::{ghz_like_state, pipeline_state, w_like_state, w_n_state, CoefficientTriple, PrepAngles};

/// A parsed specifier: pure states keep their amplitudes so callers can
/// form overlaps; `file:` may carry a mixed state directly.
#[derive(Debug, Clone, PartialEq)]
pub enum ParsedState {
    Pure(Ket),
    Mixed(DensityMatrix),
}

impl ParsedState {
    pub fn density_matrix(&self) -> DensityMatrix {
        match self {
            ParsedState::Pure(ket) => ket.density_matrix(),
            ParsedState::Mixed(rho) => rho.clone(),
        }
    }

    pub fn qubit_count(&self) -> usize {
        match self {
            ParsedState::Pure(ket) => ket.qubit_count(),
            ParsedState::Mixed(rho) => rho.qubit_count(),
        }
    }
}

fn numbers(spec: &str, payload: &str, expected: usize) -> Result<Vec<f64>> {
    let parts: Vec<&str> = payload.split(',').collect();
    if parts.len() != expected {
        return Err(Error::StateSpec(format!(
            "{spec:?} needs {expected} comma-separated numbers, got {}",
            parts.len()
        )));
    }
    parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::StateSpec(format!("{:?} is not a number in {spec:?}", p.trim())))
        })
        .collect()
}

/// Parses a state specifier. Tuple specifiers are normalized; `file:`
/// loads JSON, trying DensityMatrix first and Ket second.
pub fn parse_state_spec(spec: &str) -> Result<ParsedState> {
    let (prefix, payload) = spec
        .split_once(':')
        .ok_or_else(|| Error::StateSpec(format!("{spec:?} has no prefix: expected w:, wn:, ghz:, prep: or file:")))?;
    match prefix {
        "w" => {
            let v = numbers(spec, payload, 3)?;
            let triple = CoefficientTriple::normalized(v[0], v[1], v[2])
                .map_err(|e| Error::StateSpec(format!("{spec:?}: {e}")))?;
            Ok(ParsedState::Pure(w_like_state(triple)))
        }
        "wn" => {
            let n: usize = payload
                .trim()
                .parse()
                .map_err(|_| Error::StateSpec(format!("{payload:?} is not a party count in {spec:?}")))?;
            let ket = w_n_state(n).map_err(|e| Error::StateSpec(format!("{spec:?}: {e}")))?;
            Ok(ParsedState::Pure(ket))
        }
        "ghz" => {
            let v = numbers(spec, payload, 2)?;
            let norm = v[0].hypot(v[1]);
            if norm < 1e-12 {
                return Err(Error::StateSpec(format!("{spec:?} has zero norm")));
            }
            let ket = ghz_like_state(v[0] / norm, v[1] / norm)
                .map_err(|e| Error::StateSpec(format!("{spec:?}: {e}")))?;
            Ok(ParsedState::Pure(ket))
        }
        "prep" => {
            let v = numbers(spec, payload, 2)?;
            Ok(ParsedState::Pure(pipeline_state(PrepAngles {
                hwp1_deg: v[0],
                hwp2_deg: v[1],
            })))
        }
        "file" => {
            let text = std::fs::read_to_string(payload)?;
            if let Ok(rho) = serde_json::from_str::<DensityMatrix>(&text) {
                return Ok(ParsedState::Mixed(rho));
            }
            match serde_json::from_str::<Ket>(&text) {
                Ok(ket) => Ok(ParsedState::Pure(ket)),
                Err(e) => Err(Error::StateSpec(format!(
                    "{payload:?} is neither a DensityMatrix nor a Ket JSON file: {e}"
                ))),
            }
        }
        other => Err(Error::StateSpec(format!(
            "unknown state family {other:?} in {spec:?}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn w_specifier_is_normalized() {
        let state = parse_state_spec("w:0.57735,0.57735,0.57735").unwrap();
        let rho = state.density_matrix();
        assert_eq!(rho.qubit_count(), 3);
        // Rounded input still lands exactly on the symmetric state.
        let exact = w_like_state(CoefficientTriple::symmetric()).density_matrix();
        assert!(crate::linalg::fidelity(&rho, &exact).unwrap() > 1.0 - 1e-9);
    }

    #[test]
    fn w_specifier_keeps_asymmetry() {
        let state = parse_state_spec("w:0.2,0.4,0.8944272").unwrap();
        if let ParsedState::Pure(ket) = &state {
            assert_abs_diff_eq!(ket.amplitudes()[1].re, 0.2, epsilon = 1e-7);
            assert_abs_diff_eq!(ket.amplitudes()[2].re, 0.4, epsilon = 1e-7);
        } else {
            panic!("expected a pure state");
        }
    }

    #[test]
    fn wn_specifier_sets_party_count() {
        assert_eq!(parse_state_spec("wn:2").unwrap().qubit_count(), 2);
        assert_eq!(parse_state_spec("wn:4").unwrap().qubit_count(), 4);
        assert!(parse_state_spec("wn:5").is_err());
        assert!(parse_state_spec("wn:x").is_err());
    }

    #[test]
    fn ghz_specifier_is_normalized() {
        let state = parse_state_spec("ghz:0.7071068,0.7071068").unwrap();
        if let ParsedState::Pure(ket) = &state {
            assert_abs_diff_eq!(
                ket.amplitudes()[6].re,
                std::f64::consts::FRAC_1_SQRT_2,
                epsilon = 1e-9
            );
            assert_abs_diff_eq!(
                ket.amplitudes()[1].re,
                std::f64::consts::FRAC_1_SQRT_2,
                epsilon = 1e-9
            );
        } else {
            panic!("expected a pure state");
        }
    }

    #[test]
    fn prep_specifier_matches_waveplate_model() {
        let state = parse_state_spec("prep:17.632,22.5").unwrap();
        let direct = pipeline_state(PrepAngles {
            hwp1_deg: 17.632,
            hwp2_deg: 22.5,
        });
        if let ParsedState::Pure(ket) = &state {
            assert_eq!(ket, &direct);
        } else {
            panic!("expected a pure state");
        }
    }

    #[test]
    fn file_specifier_round_trips_both_forms() {
        let dir = tempfile::tempdir().unwrap();
        let ket = w_like_state(CoefficientTriple::symmetric());

        let ket_path = dir.path().join("state.ket.json");
        std::fs::write(&ket_path, serde_json::to_string(&ket).unwrap()).unwrap();
        let loaded = parse_state_spec(&format!("file:{}", ket_path.display())).unwrap();
        assert_eq!(loaded, ParsedState::Pure(ket.clone()));

        let rho = ket.density_matrix();
        let dm_path = dir.path().join("state.dm.json");
        std::fs::write(&dm_path, serde_json::to_string(&rho).unwrap()).unwrap();
        let loaded = parse_state_spec(&format!("file:{}", dm_path.display())).unwrap();
        assert_eq!(loaded, ParsedState::Mixed(rho));
    }

    #[test]
    fn malformed_specifiers_name_the_offending_token() {
        let err = parse_state_spec("w:0.2,oops,0.4").unwrap_err();
        assert!(err.to_string().contains("oops"), "{err}");
        let err = parse_state_spec("nope:1,2").unwrap_err();
        assert!(err.to_string().contains("nope"), "{err}");
        let err = parse_state_spec("w:0,0,0").unwrap_err();
        assert!(matches!(err, Error::StateSpec(_)), "{err}");
        assert!(parse_state_spec("plain").is_err());
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let err = parse_state_spec("file:/nonexistent/state.json").unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }
}
