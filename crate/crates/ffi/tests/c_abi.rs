use std::ffi::{CStr, CString};
use std::ptr;

use qcpmd_ffi::*;

fn last_error() -> String {
    let p = qcpmd_last_error_message();
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { qcpmd_string_free(p) };
    s
}

#[test]
fn h2_hamiltonian_round_trip() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { qcpmd_hamiltonian_new_h2(1.4, &mut h) }, QcpmdStatus::Ok);
    assert!(qcpmd_last_error_message().is_null());
    let (mut nq, mut nt) = (0usize, 0usize);
    assert_eq!(unsafe { qcpmd_hamiltonian_shape(h, &mut nq, &mut nt) }, QcpmdStatus::Ok);
    assert_eq!((nq, nt), (4, 15));
    let mut e = 0.0;
    assert_eq!(unsafe { qcpmd_hamiltonian_fci_energy(h, &mut e) }, QcpmdStatus::Ok);
    assert!((e + 1.1373).abs() < 1e-3, "{e}");
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { qcpmd_hamiltonian_to_json(h, &mut json) }, QcpmdStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { qcpmd_string_free(json) };
    assert!(text.contains("ZZII") || text.contains("IIZZ"), "{text}");
    unsafe { qcpmd_hamiltonian_free(h) };
}

#[test]
fn geometry_json_matches_h2_constructor() {
    let json =
        CString::new(r#"{"atoms":[{"element":"H","xyz_bohr":[0,0,-0.7]},{"element":"H","xyz_bohr":[0,0,0.7]}]}"#)
            .unwrap();
    let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
    assert_eq!(unsafe { qcpmd_hamiltonian_from_geometry_json(json.as_ptr(), &mut a) }, QcpmdStatus::Ok);
    assert_eq!(unsafe { qcpmd_hamiltonian_new_h2(1.4, &mut b) }, QcpmdStatus::Ok);
    let (mut ea, mut eb) = (0.0, 0.0);
    unsafe {
        qcpmd_hamiltonian_fci_energy(a, &mut ea);
        qcpmd_hamiltonian_fci_energy(b, &mut eb);
        qcpmd_hamiltonian_free(a);
        qcpmd_hamiltonian_free(b);
    }
    assert!((ea - eb).abs() < 1e-12);
}

#[test]
fn errors_are_reported() {
    assert_eq!(unsafe { qcpmd_hamiltonian_new_h2(1.4, ptr::null_mut()) }, QcpmdStatus::NullPointer);
    assert!(last_error().contains("null"));
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { qcpmd_hamiltonian_new_h2(-1.0, &mut h) }, QcpmdStatus::InvalidArgument);
    assert!(h.is_null());
    let bad = CString::new(r#"{"atoms":[{"element":"Xx","xyz_bohr":[0,0,0]}]}"#).unwrap();
    assert_eq!(unsafe { qcpmd_hamiltonian_from_geometry_json(bad.as_ptr(), &mut h) }, QcpmdStatus::ConfigError);
    assert!(last_error().contains("Xx"));
    let mut sim = ptr::null_mut();
    let cfg = CString::new(r#"{"bond_angstrom": 0.735, "dt": 1}"#).unwrap();
    assert_eq!(unsafe { qcpmd_simulation_new(cfg.as_ptr(), &mut sim) }, QcpmdStatus::ConfigError);
    assert!(last_error().contains("dt"));
    unsafe {
        qcpmd_hamiltonian_free(ptr::null_mut());
        qcpmd_simulation_free(ptr::null_mut());
        qcpmd_string_free(ptr::null_mut());
    }
}

#[test]
fn simulation_steps_deterministically() {
    let cfg = CString::new(r#"{"bond_angstrom": 0.735, "seed": 3, "n_steps": 0}"#).unwrap();
    let run = || {
        let mut sim = ptr::null_mut();
        assert_eq!(unsafe { qcpmd_simulation_new(cfg.as_ptr(), &mut sim) }, QcpmdStatus::Ok);
        let (mut nc, mut np) = (0usize, 0usize);
        assert_eq!(unsafe { qcpmd_simulation_shape(sim, &mut nc, &mut np) }, QcpmdStatus::Ok);
        assert_eq!((nc, np), (6, 12));
        assert_eq!(unsafe { qcpmd_simulation_step(sim, 5) }, QcpmdStatus::Ok);
        let mut r = vec![0.0; nc];
        let mut theta = vec![0.0; np];
        let (mut step, mut time) = (0u64, 0.0);
        let status = unsafe {
            qcpmd_simulation_state(
                sim,
                r.as_mut_ptr(),
                ptr::null_mut(),
                nc,
                theta.as_mut_ptr(),
                ptr::null_mut(),
                np,
                &mut step,
                &mut time,
            )
        };
        assert_eq!(status, QcpmdStatus::Ok);
        assert_eq!(step, 5);
        let bad = unsafe {
            qcpmd_simulation_state(
                sim,
                r.as_mut_ptr(),
                ptr::null_mut(),
                3,
                ptr::null_mut(),
                ptr::null_mut(),
                np,
                ptr::null_mut(),
                ptr::null_mut(),
            )
        };
        assert_eq!(bad, QcpmdStatus::InvalidArgument);
        let (mut shots, mut circuits) = (0u64, 0u64);
        unsafe { qcpmd_simulation_resources(sim, &mut shots, &mut circuits) };
        assert_eq!(circuits, 6 * 14 + 5 * 672);
        assert_eq!(shots, 51 * circuits);
        let (mut e, mut var) = (0.0, 0.0);
        unsafe { qcpmd_simulation_energy(sim, &mut e, &mut var) };
        assert!(e < -1.0 && var > 0.0);
        unsafe { qcpmd_simulation_free(sim) };
        (r, theta, e)
    };
    assert_eq!(run(), run());
}

#[test]
fn wavenumber_helper_inverts_equipartition() {
    // var = 1 / (beta mu omega^2) for 4989 cm^-1 at 70 K, mu = m_H / 2
    let kb = 3.166_811_563_455_6e-6;
    let mu = 1.00794 / 2.0;
    let omega = 4989.0 / 219_474.631_363_2;
    let var = kb * 70.0 / (mu * 1_822.888_486_209 * omega * omega);
    let mut nu = 0.0;
    assert_eq!(unsafe { qcpmd_wavenumber_from_bond_variance(var, mu, 70.0, &mut nu) }, QcpmdStatus::Ok);
    assert!((nu - 4989.0).abs() < 1e-6, "{nu}");
    assert_eq!(unsafe { qcpmd_wavenumber_from_bond_variance(0.0, mu, 70.0, &mut nu) }, QcpmdStatus::InvalidArgument);
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(qcpmd_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
