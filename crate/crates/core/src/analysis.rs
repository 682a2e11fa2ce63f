//! Trajectory statistics: mass-weighted internal coordinates, the
//! coordinate-covariance frequency analysis, block jackknife errors, Gaussian
//! fits of histograms and kinetic temperatures.
//!
//! In the harmonic limit the Boltzmann covariance of mass-weighted
//! displacements is `C = A^-1 / beta` with `A` the mass-weighted Hessian, so
//! the eigenvalues of `A` are `1 / (beta lambda_C)` and its eigenvectors are
//! those of `C`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::dynamics::Frame;
use crate::error::{Error, Result};
use crate::units::{angular_to_wavenumber, KB_HARTREE};

/// Relative eigenvalue floor below which a covariance mode counts as null.
pub const NULL_MODE_FLOOR: f64 = 1e-12;

/// Default equilibration span dropped before analysis, in fs.
pub const DEFAULT_DISCARD_FS: f64 = 500.0;

/// Samples of a vector-valued coordinate; row `t` is the sample at `times[t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub times: Vec<f64>,
    pub values: DMatrix<f64>,
}

impl Series {
    pub fn new(times: Vec<f64>, values: DMatrix<f64>) -> Result<Self> {
        if times.len() != values.nrows() {
            return Err(Error::Degenerate(format!("{} times for {} samples", times.len(), values.nrows())));
        }
        Ok(Self { times, values })
    }

    pub fn from_scalars(times: Vec<f64>, values: &[f64]) -> Result<Self> {
        Self::new(times, DMatrix::from_column_slice(values.len(), 1, values))
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    /// Rows `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> Series {
        Series { times: self.times[start..end].to_vec(), values: self.values.rows(start, end - start).into_owned() }
    }

    /// All rows except `start..end`.
    pub fn without(&self, start: usize, end: usize) -> Series {
        let keep: Vec<usize> = (0..self.len()).filter(|t| *t < start || *t >= end).collect();
        Series { times: keep.iter().map(|&t| self.times[t]).collect(), values: self.values.select_rows(keep.iter()) }
    }

    /// Values of component `j`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.column(j).iter().copied().collect()
    }
}

/// Frames at or after `discard` (a.t.u.) from the start of the trajectory.
pub fn window(frames: &[Frame], discard: f64) -> Result<&[Frame]> {
    let Some(first) = frames.first() else {
        return Err(Error::Window("empty trajectory".into()));
    };
    let start = frames.partition_point(|f| f.time - first.time < discard * (1.0 - 1e-12));
    if start >= frames.len() {
        let span = frames.last().map_or(0.0, |f| f.time - first.time);
        return Err(Error::Window(format!(
            "discard span {discard} a.t.u. covers the whole trajectory ({span} a.t.u.)"
        )));
    }
    Ok(&frames[start..])
}

/// Distance between atoms `i` and `j` in every frame.
pub fn bond_lengths(frames: &[Frame], i: usize, j: usize) -> Vec<f64> {
    frames.iter().map(|f| distance(&f.r, i, j)).collect()
}

fn distance(r: &[f64], i: usize, j: usize) -> f64 {
    (0..3).map(|a| (r[3 * i + a] - r[3 * j + a]).powi(2)).sum::<f64>().sqrt()
}

/// Mass-weighted displacement coordinates about the window time mean.
///
/// For a diatomic this is the scalar `sqrt(mu_red) (r - <r>)`. For more
/// atoms it is the mass-weighted Cartesian displacement with the
/// translations and infinitesimal rotations about the mean structure
/// projected out; those directions then show up as null modes.
/// `masses` holds one entry per Cartesian coordinate.
pub fn internal_coordinates(frames: &[Frame], masses: &[f64]) -> Result<Series> {
    if frames.is_empty() {
        return Err(Error::Window("empty window".into()));
    }
    let n_coord = frames[0].r.len();
    if !n_coord.is_multiple_of(3) || masses.len() != n_coord {
        return Err(Error::Degenerate(format!("{n_coord} coordinates with {} masses", masses.len())));
    }
    let times: Vec<f64> = frames.iter().map(|f| f.time).collect();
    let n_atoms = n_coord / 3;
    if n_atoms == 2 {
        let mu = masses[0] * masses[3] / (masses[0] + masses[3]);
        let r = bond_lengths(frames, 0, 1);
        let mean = r.iter().sum::<f64>() / r.len() as f64;
        let s: Vec<f64> = r.iter().map(|r| mu.sqrt() * (r - mean)).collect();
        return Series::from_scalars(times, &s);
    }
    let n = frames.len();
    let mut mean = DVector::zeros(n_coord);
    for f in frames {
        mean += DVector::from_column_slice(&f.r);
    }
    mean /= n as f64;
    let projector = rigid_body_projector(mean.as_slice(), masses);
    let sqrt_m = DVector::from_iterator(n_coord, masses.iter().map(|m| m.sqrt()));
    let mut values = DMatrix::zeros(n, n_coord);
    for (t, f) in frames.iter().enumerate() {
        let x = (DVector::from_column_slice(&f.r) - &mean).component_mul(&sqrt_m);
        values.set_row(t, &(&projector * x).transpose());
    }
    Series::new(times, values)
}

/// `I - Q Q^T` with `Q` an orthonormal basis of mass-weighted translations and
/// rotations about the centre of mass of `positions`.
fn rigid_body_projector(positions: &[f64], masses: &[f64]) -> DMatrix<f64> {
    let n = positions.len();
    let n_atoms = n / 3;
    let total: f64 = (0..n_atoms).map(|i| masses[3 * i]).sum();
    let mut com = [0.0; 3];
    for i in 0..n_atoms {
        for a in 0..3 {
            com[a] += masses[3 * i] * positions[3 * i + a] / total;
        }
    }
    let mut candidates = Vec::new();
    for a in 0..3 {
        candidates.push(DVector::from_fn(n, |k, _| if k % 3 == a { masses[k].sqrt() } else { 0.0 }));
    }
    for a in 0..3 {
        let mut v = DVector::zeros(n);
        for i in 0..n_atoms {
            let d = [0, 1, 2].map(|b| positions[3 * i + b] - com[b]);
            // e_a x d
            let cross = match a {
                0 => [0.0, -d[2], d[1]],
                1 => [d[2], 0.0, -d[0]],
                _ => [-d[1], d[0], 0.0],
            };
            for b in 0..3 {
                v[3 * i + b] = masses[3 * i + b].sqrt() * cross[b];
            }
        }
        candidates.push(v);
    }
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for mut v in candidates {
        let scale = v.norm();
        for q in &basis {
            v -= q * q.dot(&v);
        }
        if v.norm() > 1e-8 * scale.max(1e-300) {
            basis.push(v.normalize());
        }
    }
    let mut p = DMatrix::identity(n, n);
    for q in &basis {
        p -= q * q.transpose();
    }
    p
}

/// Time-average covariance `<(s - <s>)(s - <s>)^T>` with `1/n` normalization.
pub fn covariance(series: &Series) -> Result<DMatrix<f64>> {
    let n = series.len();
    if n < 2 {
        return Err(Error::Window(format!("covariance needs at least 2 samples, got {n}")));
    }
    let mean = series.values.row_mean();
    let mut centered = series.values.clone();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    let c = centered.transpose() * &centered / n as f64;
    Ok((&c + c.transpose()) * 0.5)
}

/// Frequencies and normal modes recovered from a displacement covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyReport {
    /// Vibrational wavenumbers in cm^-1, ascending.
    pub frequencies: Vec<f64>,
    /// Block-jackknife standard errors matching `frequencies`, when computed.
    pub standard_errors: Option<Vec<f64>>,
    /// Bias-corrected jackknife estimates matching `frequencies`, when computed.
    pub jackknife_means: Option<Vec<f64>>,
    /// Column `k` is the mode of `frequencies[k]`.
    pub modes: Vec<Vec<f64>>,
    /// Covariance eigenvectors discarded as null modes.
    pub null_modes: Vec<Vec<f64>>,
    pub covariance: Vec<Vec<f64>>,
    /// Equilibration span dropped before the window, a.t.u.
    pub discarded: f64,
    pub n_samples: usize,
}

/// Eigen-analysis of `C_s`: `lambda_A = 1 / (beta lambda_C)` and
/// `omega = sqrt(lambda_A)`, reported in cm^-1.
pub fn frequencies_from_covariance(c: &DMatrix<f64>, beta: f64) -> Result<FrequencyReport> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Degenerate(format!("beta must be positive, got {beta}")));
    }
    if !c.is_square() || c.nrows() == 0 {
        return Err(Error::Degenerate("covariance must be a non-empty square matrix".into()));
    }
    let eig = SymmetricEigen::new((c + c.transpose()) * 0.5);
    let max = eig.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l));
    if !(max > 0.0) {
        return Err(Error::Degenerate("all covariance eigenvalues are at the null floor".into()));
    }
    let floor = NULL_MODE_FLOOR * max;
    let mut modes: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut null_modes = Vec::new();
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        let v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        if lambda > floor {
            modes.push((angular_to_wavenumber((1.0 / (beta * lambda)).sqrt()), v));
        } else {
            null_modes.push(v);
        }
    }
    modes.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(FrequencyReport {
        frequencies: modes.iter().map(|m| m.0).collect(),
        standard_errors: None,
        jackknife_means: None,
        modes: modes.into_iter().map(|m| m.1).collect(),
        null_modes,
        covariance: c.row_iter().map(|r| r.iter().copied().collect()).collect(),
        discarded: 0.0,
        n_samples: 0,
    })
}

/// Block-jackknife estimate of the covariance frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JackknifeEstimate {
    /// Estimate from all blocks together.
    pub plain: Vec<f64>,
    /// Bias-corrected `n theta_hat - (n - 1) mean(theta_i)`.
    pub mean: Vec<f64>,
    pub standard_error: Vec<f64>,
    /// Leave-one-block-out estimates, one row per dropped block.
    pub leave_one_out: Vec<Vec<f64>>,
}

/// Splits `series` into `bins` contiguous equal blocks (tail truncated) and
/// recomputes the frequencies with each block left out.
pub fn jackknife_frequency(series: &Series, bins: usize, beta: f64) -> Result<JackknifeEstimate> {
    if bins < 2 {
        return Err(Error::Degenerate(format!("jackknife needs at least 2 bins, got {bins}")));
    }
    let block = series.len() / bins;
    if block < 2 {
        return Err(Error::Window(format!("{} samples cannot fill {bins} bins", series.len())));
    }
    let used = series.slice(0, block * bins);
    let plain = frequencies_from_covariance(&covariance(&used)?, beta)?.frequencies;
    let mut leave_one_out = Vec::with_capacity(bins);
    for b in 0..bins {
        let rest = used.without(b * block, (b + 1) * block);
        let f = frequencies_from_covariance(&covariance(&rest)?, beta)?.frequencies;
        if f.len() != plain.len() {
            return Err(Error::Degenerate(format!("block {b} has {} modes, full window {}", f.len(), plain.len())));
        }
        leave_one_out.push(f);
    }
    let n = bins as f64;
    let mut mean = Vec::with_capacity(plain.len());
    let mut standard_error = Vec::with_capacity(plain.len());
    for k in 0..plain.len() {
        let avg = leave_one_out.iter().map(|f| f[k]).sum::<f64>() / n;
        let ss = leave_one_out.iter().map(|f| (f[k] - avg).powi(2)).sum::<f64>();
        mean.push(n * plain[k] - (n - 1.0) * avg);
        standard_error.push(((n - 1.0) / n * ss).sqrt());
    }
    Ok(JackknifeEstimate { plain, mean, standard_error, leave_one_out })
}

/// Full frequency analysis of a trajectory: window, internal coordinates,
/// covariance eigen-analysis and block-jackknife errors.
pub fn analyze_frequencies(
    frames: &[Frame],
    masses: &[f64],
    beta: f64,
    discard: f64,
    bins: usize,
) -> Result<FrequencyReport> {
    let w = window(frames, discard)?;
    let s = internal_coordinates(w, masses)?;
    let mut report = frequencies_from_covariance(&covariance(&s)?, beta)?;
    let jk = jackknife_frequency(&s, bins, beta)?;
    report.standard_errors = Some(jk.standard_error);
    report.jackknife_means = Some(jk.mean);
    report.discarded = w[0].time - frames[0].time;
    report.n_samples = s.len();
    Ok(report)
}

/// Equal-width histogram; `counts[k]` covers `[edges[k], edges[k + 1])`, the
/// last bin is closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Freedman-Diaconis binning: width `2 IQR n^(-1/3)`, falling back to
    /// Scott's `3.49 sigma n^(-1/3)` when the IQR vanishes.
    pub fn freedman_diaconis(samples: &[f64]) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(Error::Degenerate(format!("histogram needs at least 2 samples, got {n}")));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let (lo, hi) = (sorted[0], sorted[n - 1]);
        if !(hi > lo) {
            return Err(Error::Degenerate("all samples are equal".into()));
        }
        let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
        let cube = (n as f64).cbrt();
        let mut width = 2.0 * iqr / cube;
        if !(width > 0.0) {
            let (_, std) = mean_std(samples);
            width = 3.49 * std / cube;
        }
        let n_bins = (((hi - lo) / width).ceil() as usize).clamp(1, 100_000);
        Ok(Self::with_edges(samples, lo, hi, n_bins))
    }

    /// `n_bins` equal bins over `[lo, hi]`; samples outside are dropped.
    pub fn with_edges(samples: &[f64], lo: f64, hi: f64, n_bins: usize) -> Self {
        let width = (hi - lo) / n_bins as f64;
        let edges: Vec<f64> = (0..=n_bins).map(|k| lo + k as f64 * width).collect();
        let mut counts = vec![0u64; n_bins];
        for &x in samples {
            if x < lo || x > hi {
                continue;
            }
            let k = (((x - lo) / width) as usize).min(n_bins - 1);
            counts[k] += 1;
        }
        Self { edges, counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Density-normalized bin heights.
    pub fn density(&self) -> Vec<f64> {
        let total = self.total() as f64;
        self.counts.iter().zip(self.edges.windows(2)).map(|(&c, e)| c as f64 / (total * (e[1] - e[0]))).collect()
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[i]
    }
}

fn mean_std(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Maximum-likelihood Gaussian and its total-variation distance from the
/// sample histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub mean: f64,
    pub std: f64,
    /// `1/2 sum_k |p_emp,k - p_gauss,k|` over the bins plus half the fitted
    /// mass outside the histogram range.
    pub tv_distance: f64,
    pub histogram: Histogram,
}

impl GaussianFit {
    /// Fitted probability mass of bin `k`.
    pub fn bin_mass(&self, k: usize) -> f64 {
        let e = &self.histogram.edges;
        normal_cdf((e[k + 1] - self.mean) / self.std) - normal_cdf((e[k] - self.mean) / self.std)
    }
}

/// Fits a Gaussian by maximum likelihood and measures its TV distance on
/// Freedman-Diaconis bins.
pub fn gaussian_fit(samples: &[f64]) -> Result<GaussianFit> {
    if samples.len() < 100 {
        return Err(Error::Degenerate(format!("Gaussian fit needs at least 100 samples, got {}", samples.len())));
    }
    let (mean, std) = mean_std(samples);
    if !(std > 0.0) {
        return Err(Error::Degenerate("zero standard deviation".into()));
    }
    let histogram = Histogram::freedman_diaconis(samples)?;
    gaussian_fit_on(samples, histogram, mean, std)
}

/// TV distance between the histogram and `N(mean, std^2)` on given bins.
pub fn gaussian_fit_on(samples: &[f64], histogram: Histogram, mean: f64, std: f64) -> Result<GaussianFit> {
    let total = histogram.total() as f64;
    if total == 0.0 || !(std > 0.0) {
        return Err(Error::Degenerate("empty histogram or zero standard deviation".into()));
    }
    let mut fit = GaussianFit { mean, std, tv_distance: 0.0, histogram };
    let mut inside = 0.0;
    let mut tv = 0.0;
    for k in 0..fit.histogram.counts.len() {
        let g = fit.bin_mass(k);
        inside += g;
        tv += (fit.histogram.counts[k] as f64 / total - g).abs();
    }
    let dropped = samples.len() as f64 - total;
    tv += (1.0 - inside).max(0.0) + dropped / samples.len() as f64;
    fit.tv_distance = 0.5 * tv;
    Ok(fit)
}

/// Time-averaged kinetic temperatures in K.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KineticTemperature {
    /// All `3N` Cartesian degrees of freedom.
    pub total: f64,
    /// Centre-of-mass translation, 3 degrees of freedom.
    pub center_of_mass: f64,
    /// Motion relative to the centre of mass, `3N - 3` degrees of freedom.
    pub internal: f64,
    /// Bond stretch of a diatomic, 1 degree of freedom.
    pub vibrational: Option<f64>,
}

/// `2 <K> / (k_B dof)` over the frames for each partition of the motion.
pub fn kinetic_temperature(frames: &[Frame], masses: &[f64]) -> Result<KineticTemperature> {
    if frames.is_empty() {
        return Err(Error::Window("empty window".into()));
    }
    let n_coord = masses.len();
    if !n_coord.is_multiple_of(3) || frames[0].v.len() != n_coord {
        return Err(Error::Degenerate(format!("{} velocities with {n_coord} masses", frames[0].v.len())));
    }
    let n_atoms = n_coord / 3;
    let m_total: f64 = (0..n_atoms).map(|i| masses[3 * i]).sum();
    let (mut k_total, mut k_com, mut k_vib) = (0.0, 0.0, 0.0);
    for f in frames {
        let mut p = [0.0; 3];
        for (k, (&m, &v)) in masses.iter().zip(&f.v).enumerate() {
            k_total += 0.5 * m * v * v;
            p[k % 3] += m * v;
        }
        k_com += p.iter().map(|p| 0.5 * p * p / m_total).sum::<f64>();
        if n_atoms == 2 {
            let mu = masses[0] * masses[3] / (masses[0] + masses[3]);
            let d: Vec<f64> = (0..3).map(|a| f.r[3 + a] - f.r[a]).collect();
            let len = d.iter().map(|x| x * x).sum::<f64>().sqrt();
            let vr: f64 = (0..3).map(|a| (f.v[3 + a] - f.v[a]) * d[a] / len).sum();
            k_vib += 0.5 * mu * vr * vr;
        }
    }
    let n = frames.len() as f64;
    let temp = |k: f64, dof: f64| 2.0 * k / (n * KB_HARTREE * dof);
    let internal = if n_atoms > 1 { temp(k_total - k_com, (n_coord - 3) as f64) } else { 0.0 };
    Ok(KineticTemperature {
        total: temp(k_total, n_coord as f64),
        center_of_mass: temp(k_com, 3.0),
        internal,
        vibrational: (n_atoms == 2).then(|| temp(k_vib, 1.0)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{beta_from_kelvin, wavenumber_to_angular, AMU_TO_ME};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    use rand_xoshiro::Xoshiro256PlusPlus;

    fn frame(time: f64, r: Vec<f64>, v: Vec<f64>) -> Frame {
        Frame {
            step: 0,
            time,
            r,
            v,
            theta: vec![],
            xi: vec![],
            energy: 0.0,
            energy_var: 0.0,
            force: vec![],
            force_var: vec![],
            flagged: false,
        }
    }

    fn diatomic(t: f64, bond: f64, v: [f64; 6]) -> Frame {
        frame(t, vec![0.0, 0.0, -bond / 2.0, 0.0, 0.0, bond / 2.0], v.to_vec())
    }

    fn h_masses(n_atoms: usize) -> Vec<f64> {
        vec![1.00794 * AMU_TO_ME; 3 * n_atoms]
    }

    fn gaussian_series(n: usize, std: &[f64], seed: u64) -> Series {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        let values = DMatrix::from_fn(n, std.len(), |_, j| {
            std[j] * {
                let z: f64 = StandardNormal.sample(&mut rng);
                z
            }
        });
        Series::new((0..n).map(|t| t as f64).collect(), values).unwrap()
    }

    #[test]
    fn constant_bond_gives_zero_coordinate() {
        let frames: Vec<Frame> = (0..10).map(|t| diatomic(t as f64, 1.4, [0.0; 6])).collect();
        let s = internal_coordinates(&frames, &h_masses(2)).unwrap();
        assert!(s.values.iter().all(|x| x.abs() < 1e-12));
        assert!(covariance(&s).unwrap().iter().all(|x| x.abs() < 1e-30));
    }

    #[test]
    fn sinusoid_amplitude_is_mass_weighted() {
        let (r0, a, w) = (1.4, 0.05, 0.02);
        let n = 10_000;
        let period = 2.0 * std::f64::consts::PI / w;
        let dt = 10.0 * period / n as f64;
        let frames: Vec<Frame> =
            (0..n).map(|t| diatomic(t as f64 * dt, r0 + a * (w * t as f64 * dt).sin(), [0.0; 6])).collect();
        let m = h_masses(2);
        let mu: f64 = m[0] / 2.0;
        let s = internal_coordinates(&frames, &m).unwrap().column(0);
        let mean = s.iter().sum::<f64>() / n as f64;
        let max = s.iter().fold(f64::MIN, |m, &x| m.max(x));
        assert!(mean.abs() < 1e-12);
        assert!((max - mu.sqrt() * a).abs() < 1e-4 * mu.sqrt() * a);
    }

    #[test]
    fn window_drops_equilibration() {
        let frames: Vec<Frame> = (0..10).map(|t| diatomic(t as f64, 1.4, [0.0; 6])).collect();
        assert_eq!(window(&frames, 3.0).unwrap().len(), 7);
        assert_eq!(window(&frames, 0.0).unwrap().len(), 10);
        assert!(matches!(window(&frames, 9.5), Err(Error::Window(_))));
        assert!(matches!(window(&[], 0.0), Err(Error::Window(_))));
    }

    #[test]
    fn iid_covariance_is_identity() {
        let s = gaussian_series(1_000_000, &[1.0, 1.0, 1.0], 5);
        let c = covariance(&s).unwrap();
        let err = (c - DMatrix::<f64>::identity(3, 3)).abs().max();
        assert!(err < 5e-3, "{err}");
    }

    #[test]
    fn correlated_covariance_recovered() {
        let sigma = DMatrix::from_row_slice(2, 2, &[2.0, 0.8, 0.8, 0.5]);
        let l = sigma.clone().cholesky().unwrap().l();
        let z = gaussian_series(1_000_000, &[1.0, 1.0], 6);
        let values = &z.values * l.transpose();
        let c = covariance(&Series::new(z.times, values).unwrap()).unwrap();
        for (a, b) in c.iter().zip(sigma.iter()) {
            assert!((a - b).abs() < 0.01 * b.abs(), "{c}");
        }
    }

    #[test]
    fn one_dimensional_inversion_is_exact() {
        let beta = beta_from_kelvin(70.0);
        let omega = wavenumber_to_angular(4989.0);
        let c = DMatrix::from_element(1, 1, 1.0 / (beta * omega * omega));
        let rep = frequencies_from_covariance(&c, beta).unwrap();
        assert!((rep.frequencies[0] - 4989.0).abs() < 1e-9);
        assert!(rep.null_modes.is_empty());
    }

    #[test]
    fn null_modes_are_not_inverted() {
        let c = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0, 1e-20]));
        let rep = frequencies_from_covariance(&c, 1.0).unwrap();
        assert_eq!(rep.frequencies.len(), 1);
        assert_eq!(rep.null_modes.len(), 2);
        assert!(matches!(frequencies_from_covariance(&DMatrix::zeros(2, 2), 1.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn two_mode_boltzmann_frequencies() {
        // Exact Boltzmann samples of a rotated 2-D quadratic potential.
        let beta: f64 = 2.0;
        let omegas = [0.3, 1.1];
        let std: Vec<f64> = omegas.iter().map(|w| 1.0 / (beta.sqrt() * w)).collect();
        let z = gaussian_series(1_000_000, &std, 7);
        let (c, s) = (0.6f64.cos(), 0.6f64.sin());
        let rot = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let values = &z.values * rot.transpose();
        let cov = covariance(&Series::new(z.times, values).unwrap()).unwrap();
        let rep = frequencies_from_covariance(&cov, beta).unwrap();
        for (got, w) in rep.frequencies.iter().zip(omegas) {
            let want = angular_to_wavenumber(w);
            assert!((got - want).abs() < 0.02 * want, "{got} vs {want}");
        }
        // Modes are the rotated axes, hence eigenvectors of the Hessian too.
        let hessian =
            &rot * DMatrix::from_diagonal(&DVector::from_vec(omegas.iter().map(|w| w * w).collect())) * rot.transpose();
        for (k, mode) in rep.modes.iter().enumerate() {
            let v = DVector::from_column_slice(mode);
            let hv = &hessian * &v;
            let lambda = v.dot(&hv);
            assert!((hv - v * lambda).norm() < 0.02 * lambda, "mode {k}");
        }
    }

    #[test]
    fn general_n_projects_rigid_motion() {
        // Triatomic with one internal stretch; rigid translations added.
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(3);
        let base = [0.0, 0.0, 0.0, 1.5, 0.0, 0.0, -0.3, 1.2, 0.0];
        let frames: Vec<Frame> = (0..2000)
            .map(|t| {
                let a: f64 = 0.01 * {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z
                };
                let shift: [f64; 3] = [0, 1, 2].map(|_| StandardNormal.sample(&mut rng));
                let mut r = base.to_vec();
                r[3] += a;
                for (k, x) in r.iter_mut().enumerate() {
                    *x += shift[k % 3];
                }
                frame(t as f64, r, vec![0.0; 9])
            })
            .collect();
        let s = internal_coordinates(&frames, &h_masses(3)).unwrap();
        let rep = frequencies_from_covariance(&covariance(&s).unwrap(), 1.0).unwrap();
        assert!(rep.null_modes.len() >= 3, "{}", rep.null_modes.len());
        assert!(rep.frequencies.len() <= 6);
    }

    #[test]
    fn jackknife_of_identical_blocks_has_no_spread() {
        let period: Vec<f64> = (0..100).map(|t| (t as f64 * 2.0 * std::f64::consts::PI / 100.0).sin()).collect();
        let values: Vec<f64> = (0..5).flat_map(|_| period.iter().copied()).collect();
        let s = Series::from_scalars((0..500).map(|t| t as f64).collect(), &values).unwrap();
        let jk = jackknife_frequency(&s, 5, 1.0).unwrap();
        assert!(jk.standard_error[0] < 1e-9 * jk.plain[0]);
        assert!((jk.mean[0] - jk.plain[0]).abs() < 1e-9 * jk.plain[0]);
        assert!(matches!(jackknife_frequency(&s.slice(0, 8), 5, 1.0), Err(Error::Window(_))));
    }

    /// AR(1) stand-in for a thermostatted coordinate with stationary variance
    /// `1 / (beta omega^2)`.
    fn ar1(n: usize, rho: f64, omega: f64, beta: f64, rng: &mut Xoshiro256PlusPlus) -> Vec<f64> {
        let std = 1.0 / (beta.sqrt() * omega);
        let innov = std * (1.0 - rho * rho).sqrt();
        let mut x = std * {
            let z: f64 = StandardNormal.sample(rng);
            z
        };
        (0..n)
            .map(|_| {
                x = rho * x
                    + innov * {
                        let z: f64 = StandardNormal.sample(rng);
                        z
                    };
                x
            })
            .collect()
    }

    #[test]
    fn jackknife_reduces_bias_on_short_correlated_series() {
        let (omega, beta) = (1.0, 1.0);
        let want = angular_to_wavenumber(omega);
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(11);
        let (mut plain, mut corrected) = (0.0, 0.0);
        for _ in 0..100 {
            let x = ar1(500, 0.95, omega, beta, &mut rng);
            let s = Series::from_scalars((0..500).map(|t| t as f64).collect(), &x).unwrap();
            let jk = jackknife_frequency(&s, 5, beta).unwrap();
            plain += jk.plain[0] / 100.0;
            corrected += jk.mean[0] / 100.0;
        }
        assert!((corrected - want).abs() < (plain - want).abs(), "plain {plain} corrected {corrected} want {want}");
    }

    /// Expected TV of a histogram of `n` exact Gaussian samples against the
    /// true density: `1/2 sum_k sqrt(2 p_k / (pi n))` for bin masses `p_k`.
    fn sampling_floor(fit: &GaussianFit, n: usize) -> f64 {
        let c = (2.0 / (std::f64::consts::PI * n as f64)).sqrt();
        0.5 * c * (0..fit.histogram.counts.len()).map(|k| fit.bin_mass(k).sqrt()).sum::<f64>()
    }

    #[test]
    fn gaussian_samples_fit_well() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(12);
        let x: Vec<f64> = (0..1_000_000)
            .map(|_| {
                3.0 + 0.5 * {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z
                }
            })
            .collect();
        let fit = gaussian_fit(&x).unwrap();
        assert!(fit.tv_distance < 0.01, "{}", fit.tv_distance);
        assert!((fit.mean - 3.0).abs() < 0.01 && (fit.std - 0.5).abs() < 0.01);
        let d = fit.histogram.density();
        let integral: f64 = d.iter().zip(fit.histogram.edges.windows(2)).map(|(d, e)| d * (e[1] - e[0])).sum();
        assert!((integral - 1.0).abs() < 1e-12);
        // At 1e5 samples the binning noise alone is about 0.012.
        let small = gaussian_fit(&x[..100_000]).unwrap();
        let floor = sampling_floor(&small, 100_000);
        assert!((small.tv_distance - floor).abs() < 0.25 * floor, "{} vs {floor}", small.tv_distance);
    }

    #[test]
    fn two_point_distribution_is_far_from_gaussian() {
        let x: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!(gaussian_fit(&x).unwrap().tv_distance > 0.5);
    }

    #[test]
    fn degenerate_fits_are_rejected() {
        assert!(matches!(gaussian_fit(&[1.0; 200]), Err(Error::Degenerate(_))));
        assert!(matches!(gaussian_fit(&[1.0, 2.0]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn resting_nuclei_are_cold() {
        let frames: Vec<Frame> = (0..5).map(|t| diatomic(t as f64, 1.4, [0.0; 6])).collect();
        let t = kinetic_temperature(&frames, &h_masses(2)).unwrap();
        assert_eq!((t.total, t.center_of_mass, t.internal, t.vibrational), (0.0, 0.0, 0.0, Some(0.0)));
    }

    #[test]
    fn maxwell_boltzmann_velocities_give_target_temperature() {
        let m = h_masses(2);
        let kt = KB_HARTREE * 300.0;
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(13);
        let frames: Vec<Frame> = (0..1_000_000)
            .map(|t| {
                let v: [f64; 6] = std::array::from_fn(|k| {
                    (kt / m[k]).sqrt() * {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        z
                    }
                });
                diatomic(t as f64, 1.4, v)
            })
            .collect();
        let t = kinetic_temperature(&frames, &m).unwrap();
        assert!((t.total - 300.0).abs() < 3.0, "{t:?}");
        assert!((t.center_of_mass - 300.0).abs() < 3.0, "{t:?}");
        assert!((t.internal - 300.0).abs() < 3.0, "{t:?}");
        assert!((t.vibrational.unwrap() - 300.0).abs() < 3.0, "{t:?}");
    }

    #[test]
    fn pure_translation_has_no_internal_temperature() {
        let frames: Vec<Frame> = (0..5).map(|t| diatomic(t as f64, 1.4, [1e-4, 0.0, 2e-4, 1e-4, 0.0, 2e-4])).collect();
        let t = kinetic_temperature(&frames, &h_masses(2)).unwrap();
        assert!(t.internal.abs() < 1e-9 * t.total && t.vibrational.unwrap().abs() < 1e-9 * t.total);
        assert!((t.center_of_mass - 2.0 * t.total).abs() < 1e-9 * t.total);
    }

    proptest! {
        #[test]
        fn tv_is_affine_invariant(seed in 0u64..1000, scale in 0.01f64..100.0, shift in -50.0f64..50.0) {
            let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
            let x: Vec<f64> = (0..500).map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z + 0.3 * z * z
            }).collect();
            let y: Vec<f64> = x.iter().map(|x| scale * x + shift).collect();
            let a = gaussian_fit(&x).unwrap();
            let b = gaussian_fit(&y).unwrap();
            prop_assert_eq!(a.histogram.counts.len(), b.histogram.counts.len());
            prop_assert!((a.tv_distance - b.tv_distance).abs() < 1e-6);
        }

        #[test]
        fn covariance_is_symmetric_psd(seed in 0u64..1000, n in 2usize..60) {
            let s = gaussian_series(n, &[1.0, 2.0, 0.5], seed);
            let c = covariance(&s).unwrap();
            prop_assert!((&c - c.transpose()).abs().max() == 0.0);
            let eig = SymmetricEigen::new(c.clone());
            prop_assert!(eig.eigenvalues.iter().all(|&l| l > -1e-12 * c.abs().max()));
        }
    }
}
