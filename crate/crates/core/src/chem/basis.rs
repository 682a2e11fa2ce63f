use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::geometry::MolecularGeometry;

const STO3G_COEFFS: [f64; 3] = [0.154_328_97, 0.535_328_14, 0.444_634_54];
const STO3G_H_EXPONENTS: [f64; 3] = [3.425_250_91, 0.623_913_73, 0.168_855_40];
const STO3G_HE_EXPONENTS: [f64; 3] = [6.362_421_39, 1.158_923_00, 0.313_649_79];

/// Contracted s-type Gaussian `sum_i d_i exp(-a_i |r - C|^2)`; the stored
/// `d_i` already include primitive and contraction normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractedGaussian {
    pub center: [f64; 3],
    pub primitives: Vec<(f64, f64)>,
}

impl ContractedGaussian {
    /// Builds a normalized function from raw contraction coefficients that
    /// multiply normalized primitives.
    pub fn normalized(center: [f64; 3], exponents: &[f64], coeffs: &[f64]) -> Self {
        let mut primitives: Vec<(f64, f64)> =
            exponents.iter().zip(coeffs).map(|(&a, &d)| (a, d * (2.0 * a / PI).powf(0.75))).collect();
        let mut s = 0.0;
        for &(a, da) in &primitives {
            for &(b, db) in &primitives {
                s += da * db * (PI / (a + b)).powf(1.5);
            }
        }
        let scale = 1.0 / s.sqrt();
        for p in &mut primitives {
            p.1 *= scale;
        }
        Self { center, primitives }
    }

    pub fn value(&self, r: [f64; 3]) -> f64 {
        let d2 = (r[0] - self.center[0]).powi(2) + (r[1] - self.center[1]).powi(2) + (r[2] - self.center[2]).powi(2);
        self.primitives.iter().map(|&(a, d)| d * (-a * d2).exp()).sum()
    }
}

/// One contracted STO-3G s function per atom; H and He only.
pub fn sto3g_basis(geom: &MolecularGeometry) -> Result<Vec<ContractedGaussian>> {
    geom.atoms
        .iter()
        .map(|atom| {
            let exps = match atom.z {
                1 => &STO3G_H_EXPONENTS,
                2 => &STO3G_HE_EXPONENTS,
                z => return Err(Error::UnsupportedElement(format!("Z = {z}"))),
            };
            Ok(ContractedGaussian::normalized(atom.position, exps, &STO3G_COEFFS))
        })
        .collect()
}
