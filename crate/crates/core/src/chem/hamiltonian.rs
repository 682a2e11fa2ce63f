use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::{Pauli, PauliString, QubitOperator};

use super::basis::sto3g_basis;
use super::geometry::MolecularGeometry;
use super::integrals::{compute_integrals, EriTensor, MolecularIntegrals};
use super::scf::{run_rhf, RhfResult};

/// Central-difference step for nuclear derivatives of the Hamiltonian, bohr.
pub const DEFAULT_FD_STEP: f64 = 1e-3;

type ComplexPauliSum = BTreeMap<Vec<Pauli>, Complex64>;

fn pauli_product(a: Pauli, b: Pauli) -> (Complex64, Pauli) {
    use Pauli::*;
    let i = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    match (a, b) {
        (I, p) | (p, I) => (one, p),
        (X, X) | (Y, Y) | (Z, Z) => (one, I),
        (X, Y) => (i, Z),
        (Y, X) => (-i, Z),
        (Y, Z) => (i, X),
        (Z, Y) => (-i, X),
        (Z, X) => (i, Y),
        (X, Z) => (-i, Y),
    }
}

fn multiply(a: &ComplexPauliSum, b: &ComplexPauliSum) -> ComplexPauliSum {
    let mut out = ComplexPauliSum::new();
    for (pa, ca) in a {
        for (pb, cb) in b {
            let mut phase = ca * cb;
            let axes: Vec<Pauli> = pa
                .iter()
                .zip(pb)
                .map(|(&x, &y)| {
                    let (ph, p) = pauli_product(x, y);
                    phase *= ph;
                    p
                })
                .collect();
            *out.entry(axes).or_insert(Complex64::new(0.0, 0.0)) += phase;
        }
    }
    out.retain(|_, c| c.norm() > 1e-14);
    out
}

/// Jordan-Wigner image of a creation (`dagger`) or annihilation operator on
/// spin orbital `j`: `Z_0 ... Z_{j-1} (X_j -+ i Y_j) / 2`.
fn ladder(n_qubits: usize, j: usize, dagger: bool) -> ComplexPauliSum {
    let mut base = vec![Pauli::I; n_qubits];
    for q in base.iter_mut().take(j) {
        *q = Pauli::Z;
    }
    let mut x = base.clone();
    x[j] = Pauli::X;
    let mut y = base;
    y[j] = Pauli::Y;
    let sign = if dagger { -1.0 } else { 1.0 };
    ComplexPauliSum::from([(x, Complex64::new(0.5, 0.0)), (y, Complex64::new(0.0, 0.5 * sign))])
}

fn product_of(n_qubits: usize, ops: &[(usize, bool)]) -> ComplexPauliSum {
    let mut acc = ComplexPauliSum::from([(vec![Pauli::I; n_qubits], Complex64::new(1.0, 0.0))]);
    for &(j, dag) in ops {
        acc = multiply(&acc, &ladder(n_qubits, j, dag));
    }
    acc
}

/// Linear map from MO integrals to qubit-operator coefficients, precomputed
/// once per orbital count. Each entry lists `(term index, weight)` pairs.
#[derive(Debug, Clone)]
struct JwTemplate {
    n_orbitals: usize,
    strings: Vec<PauliString>,
    identity: usize,
    one_body: Vec<Vec<(usize, Complex64)>>,
    two_body: Vec<Vec<(usize, Complex64)>>,
}

impl JwTemplate {
    fn new(n_orbitals: usize) -> Self {
        let nq = 2 * n_orbitals;
        let mut index: BTreeMap<Vec<Pauli>, usize> = BTreeMap::new();
        let mut intern = |sum: ComplexPauliSum| -> Vec<(usize, Complex64)> {
            sum.into_iter()
                .map(|(axes, c)| {
                    let len = index.len();
                    (*index.entry(axes).or_insert(len), c)
                })
                .collect()
        };
        let identity = intern(ComplexPauliSum::from([(vec![Pauli::I; nq], Complex64::new(1.0, 0.0))]))[0].0;

        let n = n_orbitals;
        let mut one_body = Vec::with_capacity(n * n);
        for p in 0..n {
            for q in 0..n {
                let mut sum = ComplexPauliSum::new();
                for s in 0..2 {
                    for (k, v) in product_of(nq, &[(2 * p + s, true), (2 * q + s, false)]) {
                        *sum.entry(k).or_insert(Complex64::new(0.0, 0.0)) += v;
                    }
                }
                one_body.push(intern(sum));
            }
        }
        // 1/2 sum_{pqrs} sum_{st} (pr|qs) a+_{p s} a+_{q t} a_{s t} a_{r s}
        let mut two_body = Vec::with_capacity(n.pow(4));
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let mut sum = ComplexPauliSum::new();
                        for sa in 0..2 {
                            for sb in 0..2 {
                                let (ip, iq, ir, is) = (2 * p + sa, 2 * q + sb, 2 * r + sa, 2 * s + sb);
                                if ip == iq || ir == is {
                                    continue;
                                }
                                let ops = [(ip, true), (iq, true), (is, false), (ir, false)];
                                for (k, v) in product_of(nq, &ops) {
                                    *sum.entry(k).or_insert(Complex64::new(0.0, 0.0)) += v * 0.5;
                                }
                            }
                        }
                        sum.retain(|_, c| c.norm() > 1e-14);
                        two_body.push(intern(sum));
                    }
                }
            }
        }
        let mut strings = vec![PauliString::identity(nq); index.len()];
        for (axes, i) in index {
            strings[i] = PauliString::new(axes);
        }
        Self { n_orbitals, strings, identity, one_body, two_body }
    }

    /// `h` and `eri` in the MO basis.
    fn apply(&self, h: &DMatrix<f64>, eri: &EriTensor, constant: f64) -> QubitOperator {
        let n = self.n_orbitals;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.strings.len()];
        for p in 0..n {
            for q in 0..n {
                let w = h[(p, q)];
                for &(t, c) in &self.one_body[p * n + q] {
                    coeffs[t] += c * w;
                }
            }
        }
        let mut idx = 0;
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        // <pq|rs> = (pr|qs)
                        let w = eri.get(p, r, q, s);
                        for &(t, c) in &self.two_body[idx] {
                            coeffs[t] += c * w;
                        }
                        idx += 1;
                    }
                }
            }
        }
        coeffs[self.identity] += constant;
        let terms = self.strings.iter().zip(coeffs).map(|(p, c)| {
            assert!(c.im.abs() < 1e-10, "non-Hermitian JW coefficient {c} on {p}");
            (p.clone(), c.re)
        });
        QubitOperator::from_terms(2 * n, terms).expect("consistent qubit count")
    }
}

/// Everything computed on the way to a qubit Hamiltonian at one geometry.
#[derive(Debug, Clone)]
pub struct ElectronicStructure {
    pub integrals: MolecularIntegrals,
    pub rhf: RhfResult,
    pub hamiltonian: QubitOperator,
}

/// Reusable geometry -> qubit Hamiltonian pipeline.
#[derive(Debug, Clone)]
pub struct HamiltonianBuilder {
    template: JwTemplate,
}

impl HamiltonianBuilder {
    pub fn new(n_orbitals: usize) -> Self {
        Self { template: JwTemplate::new(n_orbitals) }
    }

    pub fn for_geometry(geom: &MolecularGeometry) -> Self {
        Self::new(geom.atoms.len())
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.template.n_orbitals
    }

    pub fn electronic_structure(&self, geom: &MolecularGeometry) -> Result<ElectronicStructure> {
        let basis = sto3g_basis(geom)?;
        if basis.len() != self.template.n_orbitals {
            return Err(Error::InvalidMolecule(format!(
                "builder prepared for {} orbitals, geometry has {}",
                self.template.n_orbitals,
                basis.len()
            )));
        }
        let integrals = compute_integrals(&basis, geom)?;
        let rhf = run_rhf(&integrals, geom.n_electrons())?;
        let c = &rhf.coefficients;
        let h_mo = c.transpose() * integrals.core_hamiltonian() * c;
        let eri_mo = integrals.eri.transform(c);
        let hamiltonian = self.template.apply(&h_mo, &eri_mo, integrals.nuclear_repulsion);
        Ok(ElectronicStructure { integrals, rhf, hamiltonian })
    }

    pub fn build(&self, geom: &MolecularGeometry) -> Result<QubitOperator> {
        Ok(self.electronic_structure(geom)?.hamiltonian)
    }

    /// Central difference `(H(R + d e) - H(R - d e)) / 2d` for one coordinate.
    pub fn derivative(&self, geom: &MolecularGeometry, atom: usize, axis: usize, step: f64) -> Result<QubitOperator> {
        let mut plus = geom.clone();
        let mut minus = geom.clone();
        plus.atoms[atom].position[axis] += step;
        minus.atoms[atom].position[axis] -= step;
        let hp = self.build(&plus)?;
        let hm = self.build(&minus)?;
        if !hp.same_term_set(&hm) {
            return Err(Error::TermSetMismatch);
        }
        Ok(hp.sub(&hm)?.scale(1.0 / (2.0 * step)))
    }
}

pub fn build_qubit_hamiltonian(geom: &MolecularGeometry) -> Result<QubitOperator> {
    HamiltonianBuilder::for_geometry(geom).build(geom)
}

pub fn hamiltonian_coefficient_derivative(
    geom: &MolecularGeometry,
    atom: usize,
    axis: usize,
    step: f64,
) -> Result<QubitOperator> {
    HamiltonianBuilder::for_geometry(geom).derivative(geom, atom, axis, step)
}

/// `H(R)` together with `dH/dR_i` for every Cartesian coordinate.
#[derive(Debug, Clone)]
pub struct HamiltonianSet {
    pub hamiltonian: QubitOperator,
    pub gradient: Vec<QubitOperator>,
}

/// Source of geometry-dependent qubit Hamiltonians for the integrators.
pub trait HamiltonianModel: Send + Sync {
    fn n_qubits(&self) -> usize;
    fn n_coordinates(&self) -> usize;
    fn hamiltonian(&self, positions: &[f64]) -> Result<QubitOperator>;
    fn hamiltonian_with_gradient(&self, positions: &[f64]) -> Result<HamiltonianSet>;
}

/// The molecular pipeline behind [`HamiltonianModel`].
#[derive(Debug, Clone)]
pub struct MolecularModel {
    template: MolecularGeometry,
    builder: HamiltonianBuilder,
    pub fd_step: f64,
}

impl MolecularModel {
    pub fn new(template: MolecularGeometry) -> Result<Self> {
        template.validate()?;
        sto3g_basis(&template)?;
        let builder = HamiltonianBuilder::for_geometry(&template);
        Ok(Self { template, builder, fd_step: DEFAULT_FD_STEP })
    }

    pub fn geometry(&self) -> &MolecularGeometry {
        &self.template
    }

    pub fn builder(&self) -> &HamiltonianBuilder {
        &self.builder
    }
}

impl HamiltonianModel for MolecularModel {
    fn n_qubits(&self) -> usize {
        self.builder.n_qubits()
    }

    fn n_coordinates(&self) -> usize {
        self.template.n_coordinates()
    }

    fn hamiltonian(&self, positions: &[f64]) -> Result<QubitOperator> {
        self.builder.build(&self.template.with_positions(positions))
    }

    fn hamiltonian_with_gradient(&self, positions: &[f64]) -> Result<HamiltonianSet> {
        let geom = self.template.with_positions(positions);
        let hamiltonian = self.builder.build(&geom)?;
        let mut gradient = Vec::with_capacity(geom.n_coordinates());
        for atom in 0..geom.atoms.len() {
            for axis in 0..3 {
                gradient.push(self.builder.derivative(&geom, atom, axis, self.fd_step)?);
            }
        }
        Ok(HamiltonianSet { hamiltonian, gradient })
    }
}
