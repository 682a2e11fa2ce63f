use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

use super::integrals::MolecularIntegrals;

#[derive(Debug, Clone, Copy)]
pub struct RhfOptions {
    pub max_iterations: usize,
    /// Convergence threshold on the largest density-matrix element change.
    pub density_tolerance: f64,
}

impl Default for RhfOptions {
    fn default() -> Self {
        Self { max_iterations: 200, density_tolerance: 1e-10 }
    }
}

#[derive(Debug, Clone)]
pub struct RhfResult {
    pub orbital_energies: DVector<f64>,
    /// MO coefficients, one column per orbital in ascending energy order.
    pub coefficients: DMatrix<f64>,
    /// Total energy including nuclear repulsion.
    pub energy: f64,
    pub iterations: usize,
}

pub fn run_rhf(ints: &MolecularIntegrals, n_electrons: usize) -> Result<RhfResult> {
    run_rhf_with(ints, n_electrons, RhfOptions::default())
}

/// Closed-shell Roothaan iteration from a core-Hamiltonian guess with
/// symmetric orthogonalization.
pub fn run_rhf_with(ints: &MolecularIntegrals, n_electrons: usize, opts: RhfOptions) -> Result<RhfResult> {
    let n = ints.n_basis();
    if !n_electrons.is_multiple_of(2) {
        return Err(Error::InvalidMolecule("RHF needs an even electron count".into()));
    }
    let n_occ = n_electrons / 2;
    if n_occ > n {
        return Err(Error::InvalidMolecule(format!("{n_occ} occupied orbitals in a basis of {n}")));
    }

    let s_eig = ints.overlap.clone().symmetric_eigen();
    let inv_sqrt = DMatrix::from_diagonal(&s_eig.eigenvalues.map(|x| 1.0 / x.sqrt()));
    let x = &s_eig.eigenvectors * inv_sqrt * s_eig.eigenvectors.transpose();
    let h = ints.core_hamiltonian();

    let solve = |fock: &DMatrix<f64>| {
        let fp = x.transpose() * fock * &x;
        let eig = fp.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let energies = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
        let mut c = DMatrix::zeros(n, n);
        for (col, &i) in order.iter().enumerate() {
            let v = &x * eig.eigenvectors.column(i);
            c.set_column(col, &fix_phase(v));
        }
        (energies, c)
    };
    let density = |c: &DMatrix<f64>| {
        let occ = c.columns(0, n_occ);
        2.0 * &occ * occ.transpose()
    };

    let (_, mut c) = solve(&h);
    let mut p = density(&c);
    for iter in 1..=opts.max_iterations {
        let fock = fock_matrix(ints, &h, &p);
        let (e_new, c_new) = solve(&fock);
        let p_new = density(&c_new);
        let change = (&p_new - &p).abs().max();
        c = c_new;
        p = p_new;
        if change < opts.density_tolerance {
            let fock = fock_matrix(ints, &h, &p);
            let electronic = 0.5 * p.component_mul(&(&h + &fock)).sum();
            return Ok(RhfResult {
                orbital_energies: e_new,
                coefficients: c,
                energy: electronic + ints.nuclear_repulsion,
                iterations: iter,
            });
        }
    }
    Err(Error::ScfNotConverged(opts.max_iterations))
}

fn fock_matrix(ints: &MolecularIntegrals, h: &DMatrix<f64>, p: &DMatrix<f64>) -> DMatrix<f64> {
    let n = h.nrows();
    let mut f = h.clone();
    for i in 0..n {
        for j in 0..n {
            let mut g = 0.0;
            for k in 0..n {
                for l in 0..n {
                    g += p[(k, l)] * (ints.eri.get(i, j, l, k) - 0.5 * ints.eri.get(i, k, l, j));
                }
            }
            f[(i, j)] += g;
        }
    }
    f
}

/// Sign convention: the largest-magnitude coefficient is positive, ties
/// broken by the lowest basis index. Keeps the qubit Hamiltonian continuous
/// in the nuclear coordinates.
fn fix_phase(v: DVector<f64>) -> DVector<f64> {
    let max = v.amax();
    let pivot = v.iter().position(|x| x.abs() >= max * (1.0 - 1e-8)).unwrap_or(0);
    if v[pivot] < 0.0 {
        -v
    } else {
        v
    }
}
