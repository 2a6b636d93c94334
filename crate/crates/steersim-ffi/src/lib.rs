//! C ABI for the steering-analysis library.
//!
//! States live behind an opaque handle created by
//! [`steersim_state_parse`] and released by [`steersim_state_free`].
//! Every fallible call returns a [`SteersimStatus`] code and writes its
//! result through an out-pointer; a human-readable detail for the most
//! recent failure on the current thread is available from
//! [`steersim_last_error_message`]. JSON strings handed out by the
//! library must be released with [`steersim_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use steersim::analysis::{analyze_report, simulate_report, SimulateConfig};
use steersim::entanglement::witness_value;
use steersim::measurement::SamplingMode;
use steersim::statespec::parse_state_spec;
use steersim::states::depolarize;
use steersim::steering::steering_parameter;
use steersim::{DensityMatrix, Error, Party};

/// Result codes of every fallible API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteersimStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Malformed state specifier or other unparsable input.
    ParseError = 2,
    /// Underlying file could not be read.
    IoError = 3,
    /// Counts too sparse for a stable estimate.
    StatisticalError = 4,
    /// Argument outside its domain (party index, probability, ...).
    InvalidArgument = 5,
    /// Numerical validation failed (non-physical state, ...).
    NumericalError = 6,
    /// Internal panic; the library state is still consistent.
    Panic = 7,
}

/// Opaque state handle: a density matrix plus the specifier and noise
/// level it was built from.
pub struct SteersimState {
    rho: DensityMatrix,
    label: String,
    noise: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("NUL bytes stripped");
    });
}

fn status_of(err: &Error) -> SteersimStatus {
    match err {
        Error::StateSpec(_) | Error::Parse(_) => SteersimStatus::ParseError,
        Error::Io(_) => SteersimStatus::IoError,
        Error::EmptyCounts { .. } | Error::MissingAlignedSetting { .. } => {
            SteersimStatus::StatisticalError
        }
        Error::PartyOutOfRange { .. }
        | Error::SamePartyPair
        | Error::WrongQubitCount { .. }
        | Error::InvalidProbability { .. }
        | Error::ZeroShots => SteersimStatus::InvalidArgument,
        _ => SteersimStatus::NumericalError,
    }
}

fn fail(err: Error) -> SteersimStatus {
    set_last_error(&err.to_string());
    status_of(&err)
}

/// Runs `body` with panics converted to [`SteersimStatus::Panic`].
fn guarded(body: impl FnOnce() -> SteersimStatus) -> SteersimStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("internal panic");
            SteersimStatus::Panic
        }
    }
}

/// Static name of a status code; never null, do not free.
#[no_mangle]
pub extern "C" fn steersim_status_name(status: SteersimStatus) -> *const c_char {
    let name: &'static CStr = match status {
        SteersimStatus::Ok => c"ok",
        SteersimStatus::NullArgument => c"null argument",
        SteersimStatus::ParseError => c"parse error",
        SteersimStatus::IoError => c"io error",
        SteersimStatus::StatisticalError => c"statistical error",
        SteersimStatus::InvalidArgument => c"invalid argument",
        SteersimStatus::NumericalError => c"numerical error",
        SteersimStatus::Panic => c"panic",
    };
    name.as_ptr()
}

/// Detail message of the most recent failure on this thread. The
/// pointer stays valid until the next failing call on the same thread;
/// do not free it.
#[no_mangle]
pub extern "C" fn steersim_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parses a state specifier (w:a,b,g | wn:N | ghz:mu,nu | prep:t1,t2 |
/// file:path), applies depolarizing noise of strength `noise`, and
/// writes a new handle to `out_state`.
///
/// # Safety
///
/// `spec` must point to a NUL-terminated string and `out_state` to a
/// writable pointer slot. The handle must be released with
/// [`steersim_state_free`].
#[no_mangle]
pub unsafe extern "C" fn steersim_state_parse(
    spec: *const c_char,
    noise: f64,
    out_state: *mut *mut SteersimState,
) -> SteersimStatus {
    if spec.is_null() || out_state.is_null() {
        set_last_error("spec and out_state must not be null");
        return SteersimStatus::NullArgument;
    }
    let spec = match CStr::from_ptr(spec).to_str() {
        Ok(s) => s.to_string(),
        Err(_) => {
            set_last_error("spec is not valid UTF-8");
            return SteersimStatus::ParseError;
        }
    };
    guarded(|| {
        let parsed = match parse_state_spec(&spec) {
            Ok(p) => p,
            Err(e) => return fail(e),
        };
        let mut rho = parsed.density_matrix();
        if noise != 0.0 {
            rho = match depolarize(&rho, noise) {
                Ok(r) => r,
                Err(e) => return fail(e),
            };
        }
        let handle = Box::new(SteersimState {
            rho,
            label: spec,
            noise,
        });
        *out_state = Box::into_raw(handle);
        SteersimStatus::Ok
    })
}

/// Releases a handle created by [`steersim_state_parse`]. Null is a
/// no-op.
///
/// # Safety
///
/// `state` must be null or a pointer previously returned by
/// [`steersim_state_parse`] that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn steersim_state_free(state: *mut SteersimState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Writes the number of qubits of the state to `out_count`.
///
/// # Safety
///
/// `state` must be a live handle and `out_count` writable.
#[no_mangle]
pub unsafe extern "C" fn steersim_state_qubit_count(
    state: *const SteersimState,
    out_count: *mut u32,
) -> SteersimStatus {
    if state.is_null() || out_count.is_null() {
        set_last_error("state and out_count must not be null");
        return SteersimStatus::NullArgument;
    }
    *out_count = (*state).rho.qubit_count() as u32;
    SteersimStatus::Ok
}

/// Writes the three-setting steering parameter of the ordered pair
/// (steerer, steered) to `out_value`; values below 2 certify steering.
///
/// # Safety
///
/// `state` must be a live handle and `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn steersim_steering_parameter(
    state: *const SteersimState,
    steerer: u32,
    steered: u32,
    out_value: *mut f64,
) -> SteersimStatus {
    if state.is_null() || out_value.is_null() {
        set_last_error("state and out_value must not be null");
        return SteersimStatus::NullArgument;
    }
    let state = &*state;
    guarded(|| {
        match steering_parameter(
            &state.rho,
            Party(steerer as usize),
            Party(steered as usize),
        ) {
            Ok(value) => {
                *out_value = value;
                SteersimStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Writes the W-projector witness value (negative certifies genuine
/// tripartite entanglement) to `out_value`; three-qubit states only.
///
/// # Safety
///
/// `state` must be a live handle and `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn steersim_witness_value(
    state: *const SteersimState,
    out_value: *mut f64,
) -> SteersimStatus {
    if state.is_null() || out_value.is_null() {
        set_last_error("state and out_value must not be null");
        return SteersimStatus::NullArgument;
    }
    let state = &*state;
    guarded(|| match witness_value(&state.rho) {
        Ok(report) => {
            *out_value = report.value;
            SteersimStatus::Ok
        }
        Err(e) => fail(e),
    })
}

unsafe fn write_json<T: serde::Serialize>(
    value: &T,
    out_json: *mut *mut c_char,
) -> SteersimStatus {
    let text = match serde_json::to_string(value) {
        Ok(t) => t,
        Err(e) => {
            set_last_error(&format!("serialization failed: {e}"));
            return SteersimStatus::NumericalError;
        }
    };
    match CString::new(text) {
        Ok(cstring) => {
            *out_json = cstring.into_raw();
            SteersimStatus::Ok
        }
        Err(_) => {
            set_last_error("serialized JSON contained a NUL byte");
            SteersimStatus::NumericalError
        }
    }
}

/// Writes the full analytic report (steering matrix, classification,
/// witness and shareability verdicts) as a JSON string to `out_json`.
///
/// # Safety
///
/// `state` must be a live handle and `out_json` writable; release the
/// string with [`steersim_string_free`].
#[no_mangle]
pub unsafe extern "C" fn steersim_analyze_json(
    state: *const SteersimState,
    epsilon: f64,
    out_json: *mut *mut c_char,
) -> SteersimStatus {
    if state.is_null() || out_json.is_null() {
        set_last_error("state and out_json must not be null");
        return SteersimStatus::NullArgument;
    }
    let state = &*state;
    guarded(
        || match analyze_report(&state.rho, &state.label, state.noise, epsilon) {
            Ok(report) => write_json(&report, out_json),
            Err(e) => fail(e),
        },
    )
}

/// Simulates counts for all settings, estimates the steering matrix
/// with bootstrap error bars, and writes the report as a JSON string to
/// `out_json`. `shots` = 0 uses analytic probabilities.
///
/// # Safety
///
/// `state` must be a live handle and `out_json` writable; release the
/// string with [`steersim_string_free`].
#[no_mangle]
pub unsafe extern "C" fn steersim_simulate_json(
    state: *const SteersimState,
    shots: u64,
    seed: u64,
    resamples: u32,
    epsilon: f64,
    sigma_k: f64,
    out_json: *mut *mut c_char,
) -> SteersimStatus {
    if state.is_null() || out_json.is_null() {
        set_last_error("state and out_json must not be null");
        return SteersimStatus::NullArgument;
    }
    let state = &*state;
    guarded(|| {
        let config = SimulateConfig {
            shots,
            seed,
            resamples: resamples as usize,
            epsilon,
            sigma_k,
            mode: SamplingMode::Multinomial,
        };
        match simulate_report(&state.rho, &state.label, state.noise, config) {
            Ok(report) => write_json(&report, out_json),
            Err(e) => fail(e),
        }
    })
}

/// Releases a string returned by this library. Null is a no-op.
///
/// # Safety
///
/// `text` must be null or a pointer obtained from this library that has
/// not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn steersim_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    fn parse(spec: &str, noise: f64) -> *mut SteersimState {
        let spec = CString::new(spec).unwrap();
        let mut state: *mut SteersimState = ptr::null_mut();
        let status = unsafe { steersim_state_parse(spec.as_ptr(), noise, &mut state) };
        assert_eq!(status, SteersimStatus::Ok);
        assert!(!state.is_null());
        state
    }

    #[test]
    fn parse_analyze_and_free_round_trip() {
        let state = parse("w:0.57735,0.57735,0.57735", 0.0);
        unsafe {
            let mut qubits = 0u32;
            assert_eq!(
                steersim_state_qubit_count(state, &mut qubits),
                SteersimStatus::Ok
            );
            assert_eq!(qubits, 3);

            let mut value = 0.0;
            assert_eq!(
                steersim_steering_parameter(state, 0, 1, &mut value),
                SteersimStatus::Ok
            );
            assert!((value - 16.0 / 9.0).abs() < 1e-9);

            let mut witness = 0.0;
            assert_eq!(
                steersim_witness_value(state, &mut witness),
                SteersimStatus::Ok
            );
            assert!((witness + 1.0 / 3.0).abs() < 1e-9);

            let mut json: *mut c_char = ptr::null_mut();
            assert_eq!(
                steersim_analyze_json(state, 0.0, &mut json),
                SteersimStatus::Ok
            );
            let text = CStr::from_ptr(json).to_str().unwrap();
            let report: serde_json::Value = serde_json::from_str(text).unwrap();
            assert_eq!(report["category"], "fully_mutual");
            assert_eq!(report["sr_verdict"], "Y");
            steersim_string_free(json);

            steersim_state_free(state);
        }
    }

    #[test]
    fn simulate_json_is_deterministic() {
        let state = parse("w:0.57735,0.57735,0.57735", 0.0);
        unsafe {
            let mut a: *mut c_char = ptr::null_mut();
            let mut b: *mut c_char = ptr::null_mut();
            assert_eq!(
                steersim_simulate_json(state, 2000, 7, 50, 0.0, 1.0, &mut a),
                SteersimStatus::Ok
            );
            assert_eq!(
                steersim_simulate_json(state, 2000, 7, 50, 0.0, 1.0, &mut b),
                SteersimStatus::Ok
            );
            assert_eq!(CStr::from_ptr(a).to_bytes(), CStr::from_ptr(b).to_bytes());
            steersim_string_free(a);
            steersim_string_free(b);
            steersim_state_free(state);
        }
    }

    #[test]
    fn error_paths_set_codes_and_messages() {
        unsafe {
            let mut state: *mut SteersimState = ptr::null_mut();
            let bad = CString::new("w:0.2,oops,0.4").unwrap();
            assert_eq!(
                steersim_state_parse(bad.as_ptr(), 0.0, &mut state),
                SteersimStatus::ParseError
            );
            let message = CStr::from_ptr(steersim_last_error_message())
                .to_str()
                .unwrap();
            assert!(message.contains("oops"), "{message}");

            assert_eq!(
                steersim_state_parse(ptr::null(), 0.0, &mut state),
                SteersimStatus::NullArgument
            );

            let good = parse("w:0.57735,0.57735,0.57735", 0.0);
            let mut value = 0.0;
            assert_eq!(
                steersim_steering_parameter(good, 1, 1, &mut value),
                SteersimStatus::InvalidArgument
            );
            assert_eq!(
                steersim_steering_parameter(good, 9, 0, &mut value),
                SteersimStatus::InvalidArgument
            );

            let two_qubit = parse("wn:2", 0.0);
            let mut witness = 0.0;
            assert_eq!(
                steersim_witness_value(two_qubit, &mut witness),
                SteersimStatus::InvalidArgument
            );
            steersim_state_free(two_qubit);
            steersim_state_free(good);

            let missing = CString::new("file:/nonexistent/state.json").unwrap();
            assert_eq!(
                steersim_state_parse(missing.as_ptr(), 0.0, &mut state),
                SteersimStatus::IoError
            );
        }
    }

    #[test]
    fn status_names_are_stable() {
        unsafe {
            let name = CStr::from_ptr(steersim_status_name(SteersimStatus::Ok));
            assert_eq!(name.to_str().unwrap(), "ok");
            let name = CStr::from_ptr(steersim_status_name(SteersimStatus::StatisticalError));
            assert_eq!(name.to_str().unwrap(), "statistical error");
        }
    }

    #[test]
    fn noise_parameter_is_applied_at_parse_time() {
        let state = parse("w:0.57735,0.57735,0.57735", 0.3);
        unsafe {
            let mut witness = 0.0;
            assert_eq!(
                steersim_witness_value(state, &mut witness),
                SteersimStatus::Ok
            );
            // Depolarized witness stays barely negative at p = 0.3.
            assert!((witness + 0.070833333333).abs() < 1e-9, "{witness}");
            steersim_state_free(state);
        }
    }

    #[test]
    fn generated_header_declares_the_api() {
        let header = std::fs::read_to_string(
            std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/steersim.h"),
        )
        .expect("header generated by build script");
        for symbol in [
            "steersim_state_parse",
            "steersim_state_free",
            "steersim_steering_parameter",
            "steersim_witness_value",
            "steersim_analyze_json",
            "steersim_simulate_json",
            "steersim_string_free",
            "steersim_status_name",
            "steersim_last_error_message",
            "SteersimStatus",
        ] {
            assert!(header.contains(symbol), "header lacks {symbol}");
        }
    }
}
