use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

use super::basis::ContractedGaussian;
use super::geometry::MolecularGeometry;

/// Boys function of order zero, `F0(t) = int_0^1 exp(-t u^2) du`.
pub fn boys_f0(t: f64) -> f64 {
    if t < 1e-3 {
        1.0 - t / 3.0 + t * t / 10.0 - t * t * t / 42.0 + t.powi(4) / 216.0
    } else {
        0.5 * (PI / t).sqrt() * libm::erf(t.sqrt())
    }
}

/// Two-electron integrals `(ij|kl)` in chemists' notation, dense storage.
#[derive(Debug, Clone, PartialEq)]
pub struct EriTensor {
    n: usize,
    data: Vec<f64>,
}

impl EriTensor {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n.pow(4)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[self.idx(i, j, k, l)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        let idx = self.idx(i, j, k, l);
        self.data[idx] = v;
    }

    /// Writes `v` to all eight permutations of `(ij|kl)`.
    pub fn set_symmetric(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        for (a, b, c, d) in [
            (i, j, k, l),
            (j, i, k, l),
            (i, j, l, k),
            (j, i, l, k),
            (k, l, i, j),
            (l, k, i, j),
            (k, l, j, i),
            (l, k, j, i),
        ] {
            self.set(a, b, c, d, v);
        }
    }

    /// Four-index transform `(pq|rs) = sum C_ip C_jq C_kr C_ls (ij|kl)`.
    pub fn transform(&self, c: &DMatrix<f64>) -> EriTensor {
        let n = self.n;
        let m = c.ncols();
        let mut cur = self.data.clone();
        let mut dims = [n, n, n, n];
        // contract one index at a time; index `axis` goes from n to m
        for axis in 0..4 {
            let mut new_dims = dims;
            new_dims[axis] = m;
            let mut out = vec![0.0; new_dims.iter().product()];
            let stride = |d: &[usize; 4], ax: usize| d[ax + 1..].iter().product::<usize>();
            let (s_old, s_new) = (stride(&dims, axis), stride(&new_dims, axis));
            let outer: usize = dims[..axis].iter().product();
            for o in 0..outer {
                for p in 0..m {
                    for i in 0..dims[axis] {
                        let cip = c[(i, p)];
                        if cip == 0.0 {
                            continue;
                        }
                        let src = o * dims[axis] * s_old + i * s_old;
                        let dst = o * m * s_new + p * s_new;
                        for t in 0..s_old {
                            out[dst + t] += cip * cur[src + t];
                        }
                    }
                }
            }
            cur = out;
            dims = new_dims;
        }
        EriTensor { n: m, data: cur }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MolecularIntegrals {
    pub overlap: DMatrix<f64>,
    pub kinetic: DMatrix<f64>,
    pub nuclear: DMatrix<f64>,
    pub eri: EriTensor,
    pub nuclear_repulsion: f64,
}

impl MolecularIntegrals {
    pub fn core_hamiltonian(&self) -> DMatrix<f64> {
        &self.kinetic + &self.nuclear
    }

    pub fn n_basis(&self) -> usize {
        self.overlap.nrows()
    }
}

fn dist2(a: [f64; 3], b: [f64; 3]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

fn product_center(a: f64, ca: [f64; 3], b: f64, cb: [f64; 3]) -> [f64; 3] {
    let p = a + b;
    [(a * ca[0] + b * cb[0]) / p, (a * ca[1] + b * cb[1]) / p, (a * ca[2] + b * cb[2]) / p]
}

fn overlap_prim(a: f64, ca: [f64; 3], b: f64, cb: [f64; 3]) -> f64 {
    let p = a + b;
    (PI / p).powf(1.5) * (-a * b / p * dist2(ca, cb)).exp()
}

fn kinetic_prim(a: f64, ca: [f64; 3], b: f64, cb: [f64; 3]) -> f64 {
    let p = a + b;
    let red = a * b / p;
    red * (3.0 - 2.0 * red * dist2(ca, cb)) * overlap_prim(a, ca, b, cb)
}

fn nuclear_prim(a: f64, ca: [f64; 3], b: f64, cb: [f64; 3], z: f64, cc: [f64; 3]) -> f64 {
    let p = a + b;
    let pc = product_center(a, ca, b, cb);
    -z * 2.0 * PI / p * (-a * b / p * dist2(ca, cb)).exp() * boys_f0(p * dist2(pc, cc))
}

fn eri_prim(
    (a, ca): (f64, [f64; 3]),
    (b, cb): (f64, [f64; 3]),
    (c, cc): (f64, [f64; 3]),
    (d, cd): (f64, [f64; 3]),
) -> f64 {
    let p = a + b;
    let q = c + d;
    let pc = product_center(a, ca, b, cb);
    let qc = product_center(c, cc, d, cd);
    let pre = 2.0 * PI.powf(2.5) / (p * q * (p + q).sqrt());
    pre * (-a * b / p * dist2(ca, cb) - c * d / q * dist2(cc, cd)).exp() * boys_f0(p * q / (p + q) * dist2(pc, qc))
}

fn contract2(f: &ContractedGaussian, g: &ContractedGaussian, prim: impl Fn(f64, f64) -> f64) -> f64 {
    let mut s = 0.0;
    for &(a, da) in &f.primitives {
        for &(b, db) in &g.primitives {
            s += da * db * prim(a, b);
        }
    }
    s
}

fn eri_contracted(
    f: &ContractedGaussian,
    g: &ContractedGaussian,
    h: &ContractedGaussian,
    k: &ContractedGaussian,
) -> f64 {
    let mut s = 0.0;
    for &(a, da) in &f.primitives {
        for &(b, db) in &g.primitives {
            for &(c, dc) in &h.primitives {
                for &(d, dd) in &k.primitives {
                    s += da * db * dc * dd * eri_prim((a, f.center), (b, g.center), (c, h.center), (d, k.center));
                }
            }
        }
    }
    s
}

/// Overlap, kinetic, nuclear attraction, two-electron integrals and nuclear
/// repulsion for s-type contracted Gaussians.
pub fn compute_integrals(basis: &[ContractedGaussian], geom: &MolecularGeometry) -> Result<MolecularIntegrals> {
    let n = basis.len();
    let mut e_nuc = 0.0;
    for i in 0..geom.atoms.len() {
        for j in i + 1..geom.atoms.len() {
            let r = geom.distance(i, j);
            if r < 1e-8 {
                return Err(Error::CoincidentNuclei(i, j));
            }
            e_nuc += (geom.atoms[i].z * geom.atoms[j].z) as f64 / r;
        }
    }

    let mut overlap = DMatrix::zeros(n, n);
    let mut kinetic = DMatrix::zeros(n, n);
    let mut nuclear = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let (f, g) = (&basis[i], &basis[j]);
            let s = contract2(f, g, |a, b| overlap_prim(a, f.center, b, g.center));
            let t = contract2(f, g, |a, b| kinetic_prim(a, f.center, b, g.center));
            let v: f64 = geom
                .atoms
                .iter()
                .map(|atom| {
                    contract2(f, g, |a, b| nuclear_prim(a, f.center, b, g.center, atom.z as f64, atom.position))
                })
                .sum();
            for (m, x) in [(&mut overlap, s), (&mut kinetic, t), (&mut nuclear, v)] {
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
        }
    }

    let mut eri = EriTensor::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let ij = i * (i + 1) / 2 + j;
            for k in 0..n {
                for l in 0..=k {
                    let kl = k * (k + 1) / 2 + l;
                    if kl > ij {
                        continue;
                    }
                    let v = eri_contracted(&basis[i], &basis[j], &basis[k], &basis[l]);
                    eri.set_symmetric(i, j, k, l, v);
                }
            }
        }
    }

    Ok(MolecularIntegrals { overlap, kinetic, nuclear, eri, nuclear_repulsion: e_nuc })
}
