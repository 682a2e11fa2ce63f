//! Pauli strings and real-weighted qubit operators.
//!
//! Qubit `j` is character `j` of an axes string and bit `j` of a basis-state
//! index (little-endian), so `"ZI"` acts with Z on qubit 0.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::StateVector;

/// Coefficients with magnitude below this after arithmetic are dropped.
pub const PRUNE_TOLERANCE: f64 = 1e-12;
/// Default cap on qubit count for dense realizations.
pub const DENSE_QUBIT_CAP: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    axes: Vec<Pauli>,
}

impl PauliString {
    pub fn new(axes: Vec<Pauli>) -> Self {
        Self { axes }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self { axes: vec![Pauli::I; n_qubits] }
    }

    /// A string with the given non-identity factors.
    pub fn from_sparse(n_qubits: usize, factors: &[(usize, Pauli)]) -> Self {
        let mut axes = vec![Pauli::I; n_qubits];
        for &(q, p) in factors {
            axes[q] = p;
        }
        Self { axes }
    }

    pub fn n_qubits(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Pauli] {
        &self.axes
    }

    pub fn is_identity(&self) -> bool {
        self.axes.iter().all(|&p| p == Pauli::I)
    }

    /// Bit masks describing the action on basis states:
    /// `P|b> = i^{n_y} (-1)^{popcount(b & phase_mask)} |b ^ flip_mask>`.
    pub fn masks(&self) -> PauliMasks {
        let mut flip = 0usize;
        let mut phase = 0usize;
        let mut n_y = 0u32;
        for (q, &p) in self.axes.iter().enumerate() {
            match p {
                Pauli::I => {}
                Pauli::X => flip |= 1 << q,
                Pauli::Y => {
                    flip |= 1 << q;
                    phase |= 1 << q;
                    n_y += 1;
                }
                Pauli::Z => phase |= 1 << q,
            }
        }
        PauliMasks { flip, phase, n_y }
    }

    /// Support of the string: qubits acted on by a non-identity factor.
    pub fn support_mask(&self) -> usize {
        self.axes.iter().enumerate().filter(|(_, &p)| p != Pauli::I).fold(0, |m, (q, _)| m | (1 << q))
    }

    /// `<psi|P|psi>` for raw amplitudes.
    pub fn expectation(&self, amps: &[Complex64]) -> Complex64 {
        let m = self.masks();
        let global = i_pow(m.n_y);
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, a) in amps.iter().enumerate() {
            let sign = if (b & m.phase).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
            // <b'|P|b> with b' = b ^ flip
            acc += amps[b ^ m.flip].conj() * a * sign;
        }
        acc * global
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PauliMasks {
    pub flip: usize,
    pub phase: usize,
    pub n_y: u32,
}

pub(crate) fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.axes {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let axes = s
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::Schema(format!("invalid Pauli axis '{other}'"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { axes })
    }
}

/// Weighted sum of Pauli strings with real coefficients, kept in canonical
/// (lexicographic) order with zero terms removed.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitOperator {
    n_qubits: usize,
    terms: BTreeMap<PauliString, f64>,
}

impl QubitOperator {
    pub fn zero(n_qubits: usize) -> Self {
        Self { n_qubits, terms: BTreeMap::new() }
    }

    pub fn from_terms<I>(n_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliString, f64)>,
    {
        let mut op = Self::zero(n_qubits);
        for (p, c) in terms {
            if p.n_qubits() != n_qubits {
                return Err(Error::QubitMismatch(n_qubits, p.n_qubits()));
            }
            *op.terms.entry(p).or_insert(0.0) += c;
        }
        op.prune();
        Ok(op)
    }

    /// Parse `(axes, coeff)` pairs, e.g. `[("ZI", 1.0)]`.
    pub fn from_labels(n_qubits: usize, terms: &[(&str, f64)]) -> Result<Self> {
        let parsed = terms.iter().map(|(s, c)| Ok((s.parse::<PauliString>()?, *c))).collect::<Result<Vec<_>>>()?;
        Self::from_terms(n_qubits, parsed)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, f64)> {
        self.terms.iter().map(|(p, &c)| (p, c))
    }

    pub fn coefficient(&self, p: &PauliString) -> f64 {
        self.terms.get(p).copied().unwrap_or(0.0)
    }

    pub fn identity_coefficient(&self) -> f64 {
        self.coefficient(&PauliString::identity(self.n_qubits))
    }

    /// Number of terms that require a circuit execution to estimate.
    pub fn non_identity_len(&self) -> usize {
        self.terms.keys().filter(|p| !p.is_identity()).count()
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| c.abs() >= PRUNE_TOLERANCE);
    }

    pub fn add(&self, other: &QubitOperator) -> Result<QubitOperator> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &QubitOperator) -> Result<QubitOperator> {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &QubitOperator, sign: f64) -> Result<QubitOperator> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch(self.n_qubits, other.n_qubits));
        }
        let mut out = self.clone();
        for (p, c) in &other.terms {
            *out.terms.entry(p.clone()).or_insert(0.0) += sign * c;
        }
        out.prune();
        Ok(out)
    }

    pub fn scale(&self, factor: f64) -> QubitOperator {
        let mut out =
            Self { n_qubits: self.n_qubits, terms: self.terms.iter().map(|(p, c)| (p.clone(), c * factor)).collect() };
        out.prune();
        out
    }

    /// True when both operators carry exactly the same Pauli strings.
    pub fn same_term_set(&self, other: &QubitOperator) -> bool {
        self.n_qubits == other.n_qubits && self.terms.keys().eq(other.terms.keys())
    }

    pub fn dense_matrix(&self) -> Result<DMatrix<Complex64>> {
        self.dense_matrix_with_cap(DENSE_QUBIT_CAP)
    }

    pub fn dense_matrix_with_cap(&self, cap: usize) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > cap {
            return Err(Error::CapExceeded { n_qubits: self.n_qubits, cap });
        }
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for (p, &c) in &self.terms {
            let masks = p.masks();
            let global = i_pow(masks.n_y) * c;
            for b in 0..dim {
                let sign = if (b & masks.phase).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                m[(b ^ masks.flip, b)] += global * sign;
            }
        }
        Ok(m)
    }

    /// `<psi|H|psi>` in the infinite-shot limit.
    pub fn exact_expectation(&self, state: &StateVector) -> Result<f64> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::QubitMismatch(self.n_qubits, state.n_qubits()));
        }
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Unnormalized(norm));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (p, &c) in &self.terms {
            acc += p.expectation(state.amplitudes()) * c;
        }
        assert!(acc.im.abs() < 1e-12, "Hermitian expectation has imaginary residue {}", acc.im);
        Ok(acc.re)
    }

    /// Lowest eigenvalue and a unit eigenvector of the dense matrix.
    pub fn min_eigenpair(&self) -> Result<(f64, DVector<Complex64>)> {
        let m = self.dense_matrix()?;
        let eig = m.symmetric_eigen();
        let (idx, &val) =
            eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty spectrum");
        let v = eig.eigenvectors.column(idx).into_owned();
        let n = v.norm();
        Ok((val, v / Complex64::new(n, 0.0)))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(OperatorRepr::from(self)).expect("operator serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let repr: OperatorRepr = serde_json::from_value(value.clone())?;
        repr.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    axes: String,
    coeff: f64,
}

#[derive(Serialize, Deserialize)]
struct OperatorRepr {
    n_qubits: usize,
    terms: Vec<TermRepr>,
}

impl From<&QubitOperator> for OperatorRepr {
    fn from(op: &QubitOperator) -> Self {
        Self {
            n_qubits: op.n_qubits,
            terms: op.terms.iter().map(|(p, &c)| TermRepr { axes: p.to_string(), coeff: c }).collect(),
        }
    }
}

impl TryFrom<OperatorRepr> for QubitOperator {
    type Error = Error;

    fn try_from(r: OperatorRepr) -> Result<Self> {
        let terms =
            r.terms.into_iter().map(|t| Ok((t.axes.parse::<PauliString>()?, t.coeff))).collect::<Result<Vec<_>>>()?;
        QubitOperator::from_terms(r.n_qubits, terms)
    }
}

impl Serialize for QubitOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        OperatorRepr::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for QubitOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = OperatorRepr::deserialize(d)?;
        r.try_into().map_err(serde::de::Error::custom)
    }
}
