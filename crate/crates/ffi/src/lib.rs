//! C ABI for the qcpmd emulator.
//!
//! Objects cross the boundary as opaque handles created by `*_new` and
//! released by the matching `*_free`. Every fallible call returns a
//! [`QcpmdStatus`]; on failure the message is available from
//! [`qcpmd_last_error_message`] on the same thread. Strings returned to C
//! are owned by the caller and released with [`qcpmd_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qcpmd::chem::{build_qubit_hamiltonian, GeometryInput, MolecularGeometry, MolecularModel};
use qcpmd::cli::{fci_energy, RunConfig};
use qcpmd::dynamics::{initialize_parameters, MDState, Simulation};
use qcpmd::error::Error;
use qcpmd::operator::QubitOperator;
use qcpmd::units::{angular_to_wavenumber, beta_from_kelvin, AMU_TO_ME};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcpmdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConfigError = 3,
    NumericalError = 4,
    IoError = 5,
    Panic = 6,
}

/// Qubit Hamiltonian of a molecule at a fixed geometry.
pub struct QcpmdHamiltonian {
    op: QubitOperator,
    n_electrons: usize,
}

/// A QCPMD or VQE-MD simulation advanced step by step.
pub struct QcpmdSimulation {
    sim: Simulation<MolecularModel>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> QcpmdStatus {
    match err {
        Error::Io(_) => QcpmdStatus::IoError,
        Error::Config(_)
        | Error::Json(_)
        | Error::Schema(_)
        | Error::Window(_)
        | Error::UnsupportedElement(_)
        | Error::InvalidMolecule(_)
        | Error::CoincidentNuclei(..)
        | Error::ParameterCount { .. }
        | Error::QubitMismatch(..)
        | Error::CapExceeded { .. } => QcpmdStatus::ConfigError,
        _ => QcpmdStatus::NumericalError,
    }
}

enum Failure {
    Status(QcpmdStatus, String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> QcpmdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            QcpmdStatus::Ok
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            QcpmdStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(QcpmdStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Status(QcpmdStatus::InvalidArgument, msg.into())
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Copy of the last error message on this thread, or null if the last call
/// succeeded. Release with `qcpmd_string_free`.
#[no_mangle]
pub extern "C" fn qcpmd_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |s| s.clone().into_raw()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn qcpmd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qcpmd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Hamiltonian of H2 along z with the given bond length in bohr.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qcpmd_hamiltonian_new_h2(bond_bohr: f64, out: *mut *mut QcpmdHamiltonian) -> QcpmdStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if !(bond_bohr > 0.0 && bond_bohr.is_finite()) {
            return Err(invalid(format!("bond length must be positive, got {bond_bohr}")));
        }
        let g = MolecularGeometry::h2(bond_bohr);
        let op = build_qubit_hamiltonian(&g)?;
        *out = Box::into_raw(Box::new(QcpmdHamiltonian { op, n_electrons: g.n_electrons() }));
        Ok(())
    })
}

/// Hamiltonian from a geometry JSON document
/// (`{"atoms": [{"element", "xyz_angstrom"}], "charge"}`).
///
/// # Safety
/// `json` must be NUL-terminated; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qcpmd_hamiltonian_from_geometry_json(
    json: *const c_char,
    out: *mut *mut QcpmdHamiltonian,
) -> QcpmdStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let g = GeometryInput::from_json_str(str_arg(json, "json")?)?;
        let op = build_qubit_hamiltonian(&g)?;
        *out = Box::into_raw(Box::new(QcpmdHamiltonian { op, n_electrons: g.n_electrons() }));
        Ok(())
    })
}

/// # Safety
/// `h` must come from a `qcpmd_hamiltonian_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qcpmd_hamiltonian_free(h: *mut QcpmdHamiltonian) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Number of qubits and Pauli terms (identity included).
///
/// # Safety
/// `h` must be a live handle; output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qcpmd_hamiltonian_shape(
    h: *const QcpmdHamiltonian,
    n_qubits: *mut usize,
    n_terms: *mut usize,
) -> QcpmdStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("h"))?;
        *out_ref(n_qubits, "n_qubits")? = h.op.n_qubits();
        *out_ref(n_terms, "n_terms")? = h.op.len();
        Ok(())
    })
}

/// Ground-state energy in the molecule's electron-number sector, hartree.
///
/// # Safety
/// `h` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qcpmd_hamiltonian_fci_energy(h: *const QcpmdHamiltonian, out: *mut f64) -> QcpmdStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("h"))?;
        *out_ref(out, "out")? = fci_energy(&h.op, h.n_electrons)?;
        Ok(())
    })
}

/// JSON `{n_qubits, terms: [[label, coefficient]]}`. Release with
/// `qcpmd_string_free`.
///
/// # Safety
/// `h` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qcpmd_hamiltonian_to_json(h: *const QcpmdHamiltonian, out: *mut *mut c_char) -> QcpmdStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("h"))?;
        let out = out_ref(out, "out")?;
        let text = serde_json::to_string(&h.op.to_json()).map_err(Error::from)?;
        *out = CString::new(text).map_err(|_| invalid("interior NUL"))?.into_raw();
        Ok(())
    })
}

/// Simulation from a run-config JSON document. The geometry must be given
/// inline or through `bond_angstrom`; the angles are initialized by a
/// noiseless optimization and frame 0 is evaluated.
///
/// # Safety
/// `config_json` must be NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qcpmd_simulation_new(
    config_json: *const c_char,
    out: *mut *mut QcpmdSimulation,
) -> QcpmdStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let cfg = RunConfig::from_json_str(str_arg(config_json, "config_json")?, std::path::Path::new("."))?;
        let geom = cfg.molecule()?;
        let model = MolecularModel::new(geom.clone())?;
        let circuit = cfg.circuit(&geom);
        let langevin = cfg.langevin(&geom, circuit.n_params());
        let positions = geom.positions();
        let theta = initialize_parameters(&model, &positions, &circuit, cfg.seed)?;
        let sim = Simulation::new(model, circuit, langevin, cfg.method, MDState::at_rest(positions, theta))?;
        *out = Box::into_raw(Box::new(QcpmdSimulation { sim }));
        Ok(())
    })
}

/// # Safety
/// `sim` must come from `qcpmd_simulation_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qcpmd_simulation_free(sim: *mut QcpmdSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Advances by `n_steps` steps (not limited by the config's `n_steps`).
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qcpmd_simulation_step(sim: *mut QcpmdSimulation, n_steps: u64) -> QcpmdStatus {
    guard(|| {
        let s = sim.as_mut().ok_or_else(|| null("sim"))?;
        for _ in 0..n_steps {
            s.sim.step()?;
        }
        Ok(())
    })
}

/// Number of nuclear coordinates (3N) and ansatz parameters.
///
/// # Safety
/// `sim` must be a live handle; output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qcpmd_simulation_shape(
    sim: *const QcpmdSimulation,
    n_coordinates: *mut usize,
    n_params: *mut usize,
) -> QcpmdStatus {
    guard(|| {
        let s = sim.as_ref().ok_or_else(|| null("sim"))?;
        *out_ref(n_coordinates, "n_coordinates")? = s.sim.state().r.len();
        *out_ref(n_params, "n_params")? = s.sim.state().theta.len();
        Ok(())
    })
}

/// Copies the current state. `r` and `v` hold `n_coordinates` values,
/// `theta` and `xi` hold `n_params`; any of them may be null to skip it.
/// Atomic units throughout.
///
/// # Safety
/// Non-null buffers must have the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn qcpmd_simulation_state(
    sim: *const QcpmdSimulation,
    r: *mut f64,
    v: *mut f64,
    n_coordinates: usize,
    theta: *mut f64,
    xi: *mut f64,
    n_params: usize,
    step: *mut u64,
    time: *mut f64,
) -> QcpmdStatus {
    guard(|| {
        let s = sim.as_ref().ok_or_else(|| null("sim"))?;
        let st = s.sim.state();
        if n_coordinates != st.r.len() || n_params != st.theta.len() {
            return Err(invalid(format!(
                "buffer sizes {n_coordinates}/{n_params}, state has {}/{}",
                st.r.len(),
                st.theta.len()
            )));
        }
        for (dst, src) in [(r, &st.r), (v, &st.v), (theta, &st.theta), (xi, &st.xi)] {
            if !dst.is_null() {
                ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
            }
        }
        if let Some(step) = step.as_mut() {
            *step = st.step;
        }
        if let Some(time) = time.as_mut() {
            *time = st.time;
        }
        Ok(())
    })
}

/// Energy estimate of the current frame and its variance.
///
/// # Safety
/// `sim` must be a live handle; output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qcpmd_simulation_energy(
    sim: *const QcpmdSimulation,
    energy: *mut f64,
    variance: *mut f64,
) -> QcpmdStatus {
    guard(|| {
        let s = sim.as_ref().ok_or_else(|| null("sim"))?;
        let f = s.sim.frame();
        *out_ref(energy, "energy")? = f.energy;
        *out_ref(variance, "variance")? = f.energy_var;
        Ok(())
    })
}

/// Cumulative shots and circuit executions.
///
/// # Safety
/// `sim` must be a live handle; output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qcpmd_simulation_resources(
    sim: *const QcpmdSimulation,
    shots: *mut u64,
    circuits: *mut u64,
) -> QcpmdStatus {
    guard(|| {
        let s = sim.as_ref().ok_or_else(|| null("sim"))?;
        *out_ref(shots, "shots")? = s.sim.ledger().n_shot_total;
        *out_ref(circuits, "circuits")? = s.sim.ledger().n_circuit_total;
        Ok(())
    })
}

/// Harmonic wavenumber (cm^-1) implied by the thermal variance of a bond
/// length: `omega = sqrt(1 / (beta mu_red var))`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qcpmd_wavenumber_from_bond_variance(
    variance_bohr2: f64,
    reduced_mass_amu: f64,
    temperature_k: f64,
    out: *mut f64,
) -> QcpmdStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if !(variance_bohr2 > 0.0 && reduced_mass_amu > 0.0 && temperature_k > 0.0) {
            return Err(invalid("variance, reduced mass and temperature must be positive"));
        }
        let beta = beta_from_kelvin(temperature_k);
        let mu = reduced_mass_amu * AMU_TO_ME;
        *out = angular_to_wavenumber((1.0 / (beta * mu * variance_bohr2)).sqrt());
        Ok(())
    })
}
