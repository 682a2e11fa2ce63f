//! Independent numerical oracle for the Gaussian integral engine and the
//! RHF solver.
//!
//! The oracle never uses the Boys function or Gaussian-product closed forms
//! for the Coulomb terms. Overlap and kinetic integrals are Cartesian
//! products of 1-D quadratures. Nuclear attraction and electron repulsion
//! integrals are taken per primitive pair in spherical coordinates about the
//! nucleus (or the other pair's product centre), with the polar axis through
//! the pair's product centre. The azimuth is then trivial and the radial and
//! polar integrals are done by composite Gauss-Legendre quadrature. The
//! Coulomb potential of a spherical Gaussian is itself obtained from Gauss's
//! law by quadrature.

use std::f64::consts::PI;

use qcpmd::chem::{compute_integrals, sto3g_basis, MolecularGeometry};

// STO-3G, entered independently of the library tables.
const D: [f64; 3] = [0.154_328_97, 0.535_328_14, 0.444_634_54];
const H_EXP: [f64; 3] = [3.425_250_91, 0.623_913_73, 0.168_855_40];
const HE_EXP: [f64; 3] = [6.362_421_39, 1.158_923_00, 0.313_649_79];

/// `n`-point Gauss-Legendre nodes and weights on [-1, 1], from Newton
/// iteration on the Legendre recurrence.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (mut q0, mut q1) = (1.0, x);
                for k in 2..=n {
                    let q2 = ((2 * k - 1) as f64 * x * q1 - (k - 1) as f64 * q0) / k as f64;
                    q0 = q1;
                    q1 = q2;
                }
                let dq = n as f64 * (x * q1 - q0) / (x * x - 1.0);
                out.push((x, 2.0 / ((1.0 - x * x) * dq * dq)));
                break;
            }
        }
    }
    out
}

/// Composite rule: `panels` equal panels of `n`-point Gauss-Legendre.
struct Rule {
    nodes: Vec<(f64, f64)>,
}

impl Rule {
    fn new(a: f64, b: f64, panels: usize, n: usize) -> Self {
        let gl = gauss_legendre(n);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * n);
        for p in 0..panels {
            let lo = a + p as f64 * h;
            for &(x, w) in &gl {
                nodes.push((lo + 0.5 * h * (x + 1.0), 0.5 * h * w));
            }
        }
        Self { nodes }
    }

    fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().map(|&(x, w)| w * f(x)).sum()
    }
}

#[derive(Clone)]
struct Shell {
    center: [f64; 3],
    prims: Vec<(f64, f64)>,
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

struct Oracle {
    line: Rule,
    radial: Rule,
    polar: Rule,
}

impl Oracle {
    fn new() -> Self {
        Self {
            line: Rule::new(-14.0, 14.0, 56, 16),
            radial: Rule::new(0.0, 14.0, 70, 16),
            polar: Rule::new(-1.0, 1.0, 16, 16),
        }
    }

    /// Normalized contracted function with coefficients for normalized
    /// primitives; the normalization integral is done numerically.
    fn shell(&self, center: [f64; 3], exps: &[f64]) -> Shell {
        let raw =
            Shell { center, prims: exps.iter().zip(D).map(|(&a, d)| (a, d * (2.0 * a / PI).powf(0.75))).collect() };
        let s = self.overlap(&raw, &raw);
        Shell { center, prims: raw.prims.iter().map(|&(a, d)| (a, d / s.sqrt())).collect() }
    }

    fn axis(&self, a: f64, ac: f64, b: f64, bc: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.line.integrate(|x| (-a * (x - ac).powi(2) - b * (x - bc).powi(2)).exp() * f(x))
    }

    fn overlap(&self, u: &Shell, v: &Shell) -> f64 {
        let mut s = 0.0;
        for &(a, da) in &u.prims {
            for &(b, db) in &v.prims {
                let p: f64 = (0..3).map(|k| self.axis(a, u.center[k], b, v.center[k], |_| 1.0)).product();
                s += da * db * p;
            }
        }
        s
    }

    fn kinetic(&self, u: &Shell, v: &Shell) -> f64 {
        let mut t = 0.0;
        for &(a, da) in &u.prims {
            for &(b, db) in &v.prims {
                let s: Vec<f64> = (0..3).map(|k| self.axis(a, u.center[k], b, v.center[k], |_| 1.0)).collect();
                let lap: Vec<f64> = (0..3)
                    .map(|k| {
                        let bc = v.center[k];
                        self.axis(a, u.center[k], b, bc, |x| 4.0 * b * b * (x - bc).powi(2) - 2.0 * b)
                    })
                    .collect();
                let sum = lap[0] * s[1] * s[2] + s[0] * lap[1] * s[2] + s[0] * s[1] * lap[2];
                t += -0.5 * da * db * sum;
            }
        }
        t
    }

    /// `int f(|r - c|, angle) d^3r` for `f(r, cos)` with the polar axis from
    /// `c` towards another point; azimuth integrated analytically.
    fn spherical(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        2.0 * PI * self.radial.integrate(|r| r * r * self.polar.integrate(|c| f(r, c)))
    }

    /// `exp(-a|r-A|^2 - b|r-B|^2)` at distance `r` from `origin` and polar
    /// cosine `c` about the axis from `origin` to the product centre `P`.
    /// The product is spherical about `P`, so it is axially symmetric here.
    fn pair_at(a: f64, ac: [f64; 3], b: f64, bc: [f64; 3], origin: [f64; 3], r: f64, c: f64) -> f64 {
        let p = [0, 1, 2].map(|k| (a * ac[k] + b * bc[k]) / (a + b));
        let n = dist(origin, p);
        let e = if n > 1e-12 { [0, 1, 2].map(|k| (p[k] - origin[k]) / n) } else { [0.0, 0.0, 1.0] };
        let t = if e[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let d = t[0] * e[0] + t[1] * e[1] + t[2] * e[2];
        let perp = [0, 1, 2].map(|k| t[k] - d * e[k]);
        let pn = (perp[0] * perp[0] + perp[1] * perp[1] + perp[2] * perp[2]).sqrt();
        let s = (1.0 - c * c).max(0.0).sqrt();
        let point = [0, 1, 2].map(|k| origin[k] + r * (c * e[k] + s * perp[k] / pn));
        (-a * dist(point, ac).powi(2) - b * dist(point, bc).powi(2)).exp()
    }

    /// `-Z int u v / |r - C|` on a spherical grid about `C`.
    fn nuclear(&self, u: &Shell, v: &Shell, c: [f64; 3], z: f64) -> f64 {
        let mut total = 0.0;
        for &(a, da) in &u.prims {
            for &(b, db) in &v.prims {
                total += da * db * self.spherical(|r, cos| Self::pair_at(a, u.center, b, v.center, c, r, cos) / r);
            }
        }
        -z * total
    }

    /// Potential at distance `s` of the unit-amplitude spherical Gaussian
    /// `exp(-q r^2)`, from Gauss's law.
    fn gaussian_potential(&self, q: f64, s: f64) -> f64 {
        let inner = Rule::new(0.0, s, 4, 16).integrate(|x| (-q * x * x).exp() * x * x);
        let outer = Rule::new(s, s + 14.0, 28, 16).integrate(|x| (-q * x * x).exp() * x);
        4.0 * PI * (inner / s + outer)
    }

    /// `(uv|wx)`: each `wx` primitive pair is a spherical Gaussian about its
    /// product centre `Q`; its potential is integrated against each `uv`
    /// primitive pair on a spherical grid about `Q`.
    fn eri(&self, u: &Shell, v: &Shell, w: &Shell, x: &Shell) -> f64 {
        let mut total = 0.0;
        for &(c, dc) in &w.prims {
            for &(d, dd) in &x.prims {
                let q = c + d;
                let q_center = [0, 1, 2].map(|k| (c * w.center[k] + d * x.center[k]) / q);
                let k_cd = (-c * d / q * dist(w.center, x.center).powi(2)).exp();
                let phi: Vec<f64> = self.radial.nodes.iter().map(|&(r, _)| self.gaussian_potential(q, r)).collect();
                for &(a, da) in &u.prims {
                    for &(b, db) in &v.prims {
                        let mut acc = 0.0;
                        for (i, &(r, wr)) in self.radial.nodes.iter().enumerate() {
                            let ang =
                                self.polar.integrate(|cos| Self::pair_at(a, u.center, b, v.center, q_center, r, cos));
                            acc += wr * r * r * phi[i] * ang;
                        }
                        total += da * db * dc * dd * k_cd * 2.0 * PI * acc;
                    }
                }
            }
        }
        total
    }
}

fn shells(oracle: &Oracle, geom: &MolecularGeometry) -> Vec<Shell> {
    geom.atoms.iter().map(|a| oracle.shell(a.position, if a.z == 1 { &H_EXP } else { &HE_EXP })).collect()
}

/// Largest engine/oracle discrepancy over every one- and two-electron
/// integral of `geom`, with a label for the worst entry.
pub struct IntegralComparison {
    pub max_deviation: f64,
    pub worst: String,
    pub n_integrals: usize,
}

pub fn compare_integrals(geom: &MolecularGeometry) -> IntegralComparison {
    let oracle = Oracle::new();
    let ints = compute_integrals(&sto3g_basis(geom).unwrap(), geom).unwrap();
    let s = shells(&oracle, geom);
    let n = s.len();
    let mut out = IntegralComparison { max_deviation: 0.0, worst: String::new(), n_integrals: 0 };
    let mut record = |label: String, got: f64, want: f64| {
        out.n_integrals += 1;
        let d = (got - want).abs();
        if d >= out.max_deviation {
            out.max_deviation = d;
            out.worst = format!("{label}: engine {got:.12}, oracle {want:.12}");
        }
    };
    for i in 0..n {
        for j in 0..=i {
            record(format!("S[{i}{j}]"), ints.overlap[(i, j)], oracle.overlap(&s[i], &s[j]));
            record(format!("T[{i}{j}]"), ints.kinetic[(i, j)], oracle.kinetic(&s[i], &s[j]));
            let v = geom.atoms.iter().map(|a| oracle.nuclear(&s[i], &s[j], a.position, a.z as f64)).sum();
            record(format!("V[{i}{j}]"), ints.nuclear[(i, j)], v);
        }
    }
    for i in 0..n {
        for j in 0..=i {
            for k in 0..n {
                for l in 0..=k {
                    if i * (i + 1) / 2 + j < k * (k + 1) / 2 + l {
                        continue;
                    }
                    let want = oracle.eri(&s[i], &s[j], &s[k], &s[l]);
                    record(format!("({i}{j}|{k}{l})"), ints.eri.get(i, j, k, l), want);
                }
            }
        }
    }
    let mut vnn = 0.0;
    for a in 0..geom.atoms.len() {
        for b in 0..a {
            let (za, zb) = (geom.atoms[a].z as f64, geom.atoms[b].z as f64);
            vnn += za * zb / dist(geom.atoms[a].position, geom.atoms[b].position);
        }
    }
    record("V_nn".into(), ints.nuclear_repulsion, vnn);
    out
}

/// Closed-shell 2x2 Roothaan SCF on oracle integrals: symmetric
/// orthogonalization, fixed-point iteration on the density.
#[allow(clippy::needless_range_loop)]
fn roothaan_2x2(s: [[f64; 2]; 2], h: [[f64; 2]; 2], eri: impl Fn(usize, usize, usize, usize) -> f64, vnn: f64) -> f64 {
    // X = S^-1/2 for a symmetric 2x2 with equal diagonal
    let (a, b) = (s[0][0], s[0][1]);
    let (cp, cm) = (0.5 / (a + b).sqrt(), 0.5 / (a - b).sqrt());
    let x = [[cp + cm, cp - cm], [cp - cm, cp + cm]];
    let mut p = [[0.0; 2]; 2];
    let mut energy = 0.0;
    for _ in 0..200 {
        let mut f = h;
        for m in 0..2 {
            for n in 0..2 {
                for l in 0..2 {
                    for t in 0..2 {
                        f[m][n] += p[l][t] * (eri(m, n, t, l) - 0.5 * eri(m, l, t, n));
                    }
                }
            }
        }
        // F' = X F X, lowest eigenvector of a symmetric 2x2
        let mut fp = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                fp[i][j] = (0..2).map(|k| (0..2).map(|l| x[i][k] * f[k][l] * x[l][j]).sum::<f64>()).sum();
            }
        }
        let tr = fp[0][0] + fp[1][1];
        let det = fp[0][0] * fp[1][1] - fp[0][1] * fp[1][0];
        let e_low = 0.5 * tr - (0.25 * tr * tr - det).sqrt();
        let v = if fp[0][1].abs() > 1e-14 { [fp[0][1], e_low - fp[0][0]] } else { [1.0, 0.0] };
        let nv = (v[0] * v[0] + v[1] * v[1]).sqrt();
        let cprime = [v[0] / nv, v[1] / nv];
        let c = [x[0][0] * cprime[0] + x[0][1] * cprime[1], x[1][0] * cprime[0] + x[1][1] * cprime[1]];
        let mut new_energy = vnn;
        for m in 0..2 {
            for n in 0..2 {
                new_energy += 0.5 * p[n][m] * (h[m][n] + f[m][n]);
            }
        }
        for m in 0..2 {
            for n in 0..2 {
                p[m][n] = 2.0 * c[m] * c[n];
            }
        }
        if (new_energy - energy).abs() < 1e-13 {
            return new_energy;
        }
        energy = new_energy;
    }
    energy
}

/// RHF energy of H2 at `bond` bohr from oracle integrals and the 2x2
/// Roothaan solver above.
pub fn h2_rhf_oracle(bond: f64) -> f64 {
    let geom = MolecularGeometry::h2(bond);
    let oracle = Oracle::new();
    let s = shells(&oracle, &geom);
    let mut smat = [[0.0; 2]; 2];
    let mut h = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            smat[i][j] = oracle.overlap(&s[i], &s[j]);
            h[i][j] = oracle.kinetic(&s[i], &s[j])
                + geom.atoms.iter().map(|a| oracle.nuclear(&s[i], &s[j], a.position, 1.0)).sum::<f64>();
        }
    }
    let mut eri = [[[[0.0; 2]; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    eri[i][j][k][l] = oracle.eri(&s[i], &s[j], &s[k], &s[l]);
                }
            }
        }
    }
    roothaan_2x2(smat, h, |i, j, k, l| eri[i][j][k][l], 1.0 / bond)
}
