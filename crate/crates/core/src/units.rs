//! Unit conversions. Everything inside the crate is hartree atomic units
//! (hartree, bohr, electron mass, atomic time); conversion happens only at
//! the I/O boundary.

pub const BOHR_ANGSTROM: f64 = 0.529_177_210_903;
pub const ANGSTROM_TO_BOHR: f64 = 1.0 / BOHR_ANGSTROM;
/// One atomic unit of time in femtoseconds.
pub const AU_TIME_FS: f64 = 2.418_884_326_585_7e-2;
pub const AMU_TO_ME: f64 = 1_822.888_486_209;
/// Boltzmann constant in hartree per kelvin.
pub const KB_HARTREE: f64 = 3.166_811_563_455_6e-6;
pub const HARTREE_TO_WAVENUMBER: f64 = 219_474.631_363_2;

pub fn fs_to_au(t_fs: f64) -> f64 {
    t_fs / AU_TIME_FS
}

pub fn au_to_fs(t_au: f64) -> f64 {
    t_au * AU_TIME_FS
}

pub fn beta_from_kelvin(t: f64) -> f64 {
    1.0 / (KB_HARTREE * t)
}

/// Angular frequency in rad per atomic time unit to wavenumber (cm^-1).
/// With hbar = 1 the angular frequency equals the quantum energy in hartree.
pub fn angular_to_wavenumber(omega: f64) -> f64 {
    omega * HARTREE_TO_WAVENUMBER
}

pub fn wavenumber_to_angular(nu: f64) -> f64 {
    nu / HARTREE_TO_WAVENUMBER
}
