//! Geometry-dependent qubit Hamiltonians for s-orbital molecules.
//!
//! The pipeline is STO-3G basis -> closed-form Gaussian integrals ->
//! restricted Hartree-Fock -> MO-basis second-quantized Hamiltonian ->
//! Jordan-Wigner qubit operator with the nuclear repulsion folded into the
//! identity coefficient. Spin orbitals are interleaved: qubit `2p` is the
//! alpha spin orbital of MO `p`, qubit `2p + 1` its beta partner.

mod basis;
mod geometry;
mod hamiltonian;
mod integrals;
mod scf;

pub use basis::{sto3g_basis, ContractedGaussian};
pub use geometry::{element_info, Atom, AtomInput, GeometryInput, MolecularGeometry};
pub use hamiltonian::{
    build_qubit_hamiltonian, hamiltonian_coefficient_derivative, ElectronicStructure, HamiltonianBuilder,
    HamiltonianModel, HamiltonianSet, MolecularModel, DEFAULT_FD_STEP,
};
pub use integrals::{boys_f0, compute_integrals, EriTensor, MolecularIntegrals};
pub use scf::{run_rhf, run_rhf_with, RhfOptions, RhfResult};
