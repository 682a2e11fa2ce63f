use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{AMU_TO_ME, ANGSTROM_TO_BOHR};

/// Atomic number and isotope-averaged mass (amu) by symbol.
pub fn element_info(symbol: &str) -> Option<(u32, f64)> {
    let table: [(&str, u32, f64); 10] = [
        ("H", 1, 1.007_94),
        ("He", 2, 4.002_602),
        ("Li", 3, 6.941),
        ("Be", 4, 9.012_182),
        ("B", 5, 10.811),
        ("C", 6, 12.010_7),
        ("N", 7, 14.006_7),
        ("O", 8, 15.999_4),
        ("F", 9, 18.998_403_2),
        ("Ne", 10, 20.179_7),
    ];
    table.iter().find(|(s, _, _)| s.eq_ignore_ascii_case(symbol)).map(|&(_, z, m)| (z, m))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub z: u32,
    pub mass_amu: f64,
    /// Cartesian position in bohr.
    pub position: [f64; 3],
}

impl Atom {
    pub fn new(z: u32, mass_amu: f64, position: [f64; 3]) -> Self {
        Self { z, mass_amu, position }
    }

    pub fn hydrogen(position: [f64; 3]) -> Self {
        Self::new(1, 1.007_94, position)
    }

    /// Mass in electron masses.
    pub fn mass_au(&self) -> f64 {
        self.mass_amu * AMU_TO_ME
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MolecularGeometry {
    pub atoms: Vec<Atom>,
    pub charge: i32,
}

impl MolecularGeometry {
    pub fn new(atoms: Vec<Atom>, charge: i32) -> Result<Self> {
        let g = Self { atoms, charge };
        g.validate()?;
        Ok(g)
    }

    /// H2 along z, centred at the origin.
    pub fn h2(bond_bohr: f64) -> Self {
        Self {
            atoms: vec![Atom::hydrogen([0.0, 0.0, -0.5 * bond_bohr]), Atom::hydrogen([0.0, 0.0, 0.5 * bond_bohr])],
            charge: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.atoms.is_empty() {
            return Err(Error::InvalidMolecule("no atoms".into()));
        }
        for a in &self.atoms {
            if a.z == 0 || !(a.mass_amu > 0.0) {
                return Err(Error::InvalidMolecule(format!("bad atom Z={} m={}", a.z, a.mass_amu)));
            }
        }
        let n = self.atoms.iter().map(|a| a.z as i64).sum::<i64>() - self.charge as i64;
        if n < 0 || n % 2 != 0 {
            return Err(Error::InvalidMolecule(format!(
                "closed-shell RHF needs an even, non-negative electron count (got {n})"
            )));
        }
        Ok(())
    }

    pub fn n_electrons(&self) -> usize {
        (self.atoms.iter().map(|a| a.z as i64).sum::<i64>() - self.charge as i64) as usize
    }

    pub fn n_coordinates(&self) -> usize {
        3 * self.atoms.len()
    }

    pub fn positions(&self) -> Vec<f64> {
        self.atoms.iter().flat_map(|a| a.position).collect()
    }

    /// Same atoms at new flattened positions (bohr).
    pub fn with_positions(&self, flat: &[f64]) -> Self {
        assert_eq!(flat.len(), self.n_coordinates());
        let mut g = self.clone();
        for (a, p) in g.atoms.iter_mut().zip(flat.chunks_exact(3)) {
            a.position = [p[0], p[1], p[2]];
        }
        g
    }

    /// Per-coordinate masses (electron masses), three entries per atom.
    pub fn coordinate_masses(&self) -> Vec<f64> {
        self.atoms.iter().flat_map(|a| [a.mass_au(); 3]).collect()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.atoms[i].position, self.atoms[j].position);
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    }

    /// Moves atom 1 along the current bond axis so that the bond length is
    /// `r` bohr, keeping the centre of the bond fixed.
    pub fn with_bond_length(&self, r: f64) -> Result<Self> {
        if self.atoms.len() != 2 {
            return Err(Error::InvalidMolecule("bond scans need a diatomic".into()));
        }
        let (a, b) = (self.atoms[0].position, self.atoms[1].position);
        let d = self.distance(0, 1);
        let axis = if d > 0.0 { [(b[0] - a[0]) / d, (b[1] - a[1]) / d, (b[2] - a[2]) / d] } else { [0.0, 0.0, 1.0] };
        let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0, (a[2] + b[2]) / 2.0];
        let mut g = self.clone();
        for k in 0..3 {
            g.atoms[0].position[k] = mid[k] - 0.5 * r * axis[k];
            g.atoms[1].position[k] = mid[k] + 0.5 * r * axis[k];
        }
        Ok(g)
    }
}

/// Geometry file schema: `{atoms: [{element, mass_amu?, xyz_angstrom | xyz_bohr}], charge}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryInput {
    pub atoms: Vec<AtomInput>,
    #[serde(default)]
    pub charge: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomInput {
    pub element: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_amu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xyz_angstrom: Option<[f64; 3]>,
    /// Exact alternative to `xyz_angstrom`, used when replaying runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xyz_bohr: Option<[f64; 3]>,
}

impl GeometryInput {
    pub fn to_geometry(&self) -> Result<MolecularGeometry> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| {
                let (z, default_mass) =
                    element_info(&a.element).ok_or_else(|| Error::UnsupportedElement(a.element.clone()))?;
                let p = match (a.xyz_angstrom, a.xyz_bohr) {
                    (Some(p), None) => p.map(|x| x * ANGSTROM_TO_BOHR),
                    (None, Some(p)) => p,
                    _ => {
                        return Err(Error::InvalidMolecule(format!(
                            "atom {} needs exactly one of xyz_angstrom and xyz_bohr",
                            a.element
                        )))
                    }
                };
                Ok(Atom::new(z, a.mass_amu.unwrap_or(default_mass), p))
            })
            .collect::<Result<Vec<_>>>()?;
        MolecularGeometry::new(atoms, self.charge)
    }

    pub fn from_json_str(s: &str) -> Result<MolecularGeometry> {
        let input: GeometryInput = serde_json::from_str(s)?;
        input.to_geometry()
    }
}
