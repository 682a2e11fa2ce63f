//! Run orchestration behind the `qcpmd` binary: JSON run configs with
//! unit-bearing keys, the `run`, `analyze`, `scan` and `force-histogram`
//! commands, and their on-disk artifacts.
//!
//! Every artifact is data: CSV tables plus JSON reports. Trajectories are
//! written in atomic units with a JSON schema sidecar, and `metadata.json`
//! carries a complete run config (geometry inlined) that replays the run
//! bit for bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    analyze_frequencies, bond_lengths, gaussian_fit, gaussian_fit_on, kinetic_temperature, window, FrequencyReport,
    GaussianFit, Histogram, KineticTemperature, DEFAULT_DISCARD_FS,
};
use crate::chem::{GeometryInput, HamiltonianBuilder, HamiltonianModel, MolecularGeometry, MolecularModel};
use crate::dynamics::{
    initialize_parameters, Frame, FrameSink, FrictionModel, LangevinConfig, MDState, Method, PositionUpdate,
    Simulation, Thermostat, VqeOptions,
};
use crate::error::{Error, Result};
use crate::estimator::{
    estimate_energy, estimate_nuclear_force, ledger_report, EstimationConfig, EstimationMode, LedgerReport,
};
use crate::operator::QubitOperator;
use crate::qsim::{AnsatzCircuit, GateKind, ShotSampler};
use crate::rng::StreamTag;
use crate::units::{angular_to_wavenumber, au_to_fs, fs_to_au, AMU_TO_ME, ANGSTROM_TO_BOHR, BOHR_ANGSTROM};

/// Environment variable under which relative output directories are placed.
pub const OUTPUT_ROOT_ENV: &str = "QCPMD_OUTPUT_ROOT";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Trajectory files are flushed at least this often, in steps.
pub const CHECKPOINT_STEPS: u64 = 10_000;

const FORMAT_VERSION: u32 = 1;

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::Json(_)
        | Error::Schema(_)
        | Error::Window(_)
        | Error::UnsupportedElement(_)
        | Error::InvalidMolecule(_)
        | Error::CoincidentNuclei(..)
        | Error::ParameterCount { .. }
        | Error::QubitMismatch(..)
        | Error::CapExceeded { .. } => EXIT_CONFIG,
        Error::Io(_) => EXIT_FAILURE,
        _ => EXIT_NUMERICAL,
    }
}

/// Geometry given as a path to a geometry file or inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GeometrySource {
    Path(PathBuf),
    Inline(GeometryInput),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisOptions {
    #[serde(default = "default_discard")]
    pub discard_fs: f64,
    #[serde(default = "default_bins")]
    pub jackknife_bins: usize,
}

fn default_discard() -> f64 {
    DEFAULT_DISCARD_FS
}

fn default_bins() -> usize {
    5
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self { discard_fs: DEFAULT_DISCARD_FS, jackknife_bins: 5 }
    }
}

/// Run configuration in I/O units (fs, K, angstrom, amu).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Geometry file (relative to the config file) or inline geometry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometrySource>,
    /// H2 along z with this bond length; alternative to `geometry`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bond_angstrom: Option<f64>,
    #[serde(default)]
    pub method: Method,
    #[serde(default = "RunConfig::default_dt")]
    pub dt_fs: f64,
    #[serde(rename = "temperature_K", default = "RunConfig::default_temperature")]
    pub temperature_k: f64,
    #[serde(default = "RunConfig::default_steps")]
    pub n_steps: u64,
    /// Virtual parameter mass in amu. Default 0.01 when `mu_au` is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_amu: Option<f64>,
    /// Virtual parameter mass in electron masses.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_au: Option<f64>,
    #[serde(default)]
    pub thermostat: Thermostat,
    #[serde(default)]
    pub friction: FrictionModel,
    #[serde(default)]
    pub position_update: PositionUpdate,
    #[serde(default = "RunConfig::default_shots")]
    pub n_shot: u64,
    /// Noiseless expectation values instead of sampling.
    #[serde(default)]
    pub exact: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "RunConfig::default_sampler")]
    pub sampler: ShotSampler,
    #[serde(default = "RunConfig::default_depth")]
    pub depth: usize,
    #[serde(default)]
    pub gate: GateKind,
    #[serde(default)]
    pub vqe: VqeOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Persist every `stride`-th frame.
    #[serde(default = "RunConfig::default_stride")]
    pub stride: u64,
    #[serde(default)]
    pub analysis: AnalysisOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            geometry: None,
            bond_angstrom: None,
            method: Method::Qcpmd,
            dt_fs: Self::default_dt(),
            temperature_k: Self::default_temperature(),
            n_steps: Self::default_steps(),
            mu_amu: None,
            mu_au: None,
            thermostat: Thermostat::Fdt,
            friction: FrictionModel::Covariance,
            position_update: PositionUpdate::Updated,
            n_shot: Self::default_shots(),
            exact: false,
            seed: 0,
            sampler: Self::default_sampler(),
            depth: Self::default_depth(),
            gate: GateKind::Symmetric,
            vqe: VqeOptions::default(),
            output_dir: None,
            stride: Self::default_stride(),
            analysis: AnalysisOptions::default(),
        }
    }
}

impl RunConfig {
    fn default_dt() -> f64 {
        0.01
    }
    fn default_temperature() -> f64 {
        70.0
    }
    fn default_steps() -> u64 {
        400_000
    }
    fn default_shots() -> u64 {
        51
    }
    fn default_sampler() -> ShotSampler {
        ShotSampler::Binomial
    }
    fn default_depth() -> usize {
        4
    }
    fn default_stride() -> u64 {
        1
    }

    /// H2 at `bond_angstrom` with all other settings at their defaults.
    pub fn h2(bond_angstrom: f64) -> Self {
        Self { bond_angstrom: Some(bond_angstrom), ..Default::default() }
    }

    /// Parses a config; relative geometry paths resolve against `base_dir`
    /// and are inlined.
    pub fn from_json_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        if let Some(GeometrySource::Path(p)) = &cfg.geometry {
            let path = if p.is_relative() { base_dir.join(p) } else { p.clone() };
            let text = fs::read_to_string(&path)
                .map_err(|e| Error::Config(format!("geometry file {}: {e}", path.display())))?;
            let input: GeometryInput = serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("geometry file {}: {e}", path.display())))?;
            cfg.geometry = Some(GeometrySource::Inline(input));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        match (&self.geometry, self.bond_angstrom) {
            (None, None) => return bad("one of `geometry` or `bond_angstrom` is required".into()),
            (Some(_), Some(_)) => return bad("`geometry` and `bond_angstrom` are mutually exclusive".into()),
            (Some(GeometrySource::Path(p)), None) => {
                return bad(format!("geometry path {} was not resolved", p.display()))
            }
            (None, Some(r)) if !(r > 0.0 && r.is_finite()) => {
                return bad(format!("bond_angstrom must be positive, got {r}"))
            }
            _ => {}
        }
        if !(self.dt_fs > 0.0 && self.dt_fs.is_finite()) {
            return bad(format!("dt_fs must be positive, got {}", self.dt_fs));
        }
        if !(self.temperature_k > 0.0 && self.temperature_k.is_finite()) {
            return bad(format!("temperature_K must be positive, got {}", self.temperature_k));
        }
        if self.mu_amu.is_some() && self.mu_au.is_some() {
            return bad("`mu_amu` and `mu_au` are mutually exclusive".into());
        }
        if !(self.mu() > 0.0 && self.mu().is_finite()) {
            return bad(format!("virtual mass must be positive, got {}", self.mu()));
        }
        if !self.exact && self.n_shot == 0 {
            return bad("n_shot must be at least 1".into());
        }
        if self.depth == 0 {
            return bad("depth must be at least 1".into());
        }
        if self.stride == 0 {
            return bad("stride must be at least 1".into());
        }
        if !(self.analysis.discard_fs >= 0.0) || self.analysis.jackknife_bins < 2 {
            return bad("analysis needs discard_fs >= 0 and jackknife_bins >= 2".into());
        }
        Ok(())
    }

    /// Virtual parameter mass in electron masses.
    pub fn mu(&self) -> f64 {
        match (self.mu_au, self.mu_amu) {
            (Some(m), _) => m,
            (None, Some(m)) => m * AMU_TO_ME,
            (None, None) => 0.01 * AMU_TO_ME,
        }
    }

    pub fn molecule(&self) -> Result<MolecularGeometry> {
        match (&self.geometry, self.bond_angstrom) {
            (Some(GeometrySource::Inline(g)), _) => g.to_geometry(),
            (None, Some(r)) => Ok(MolecularGeometry::h2(r * ANGSTROM_TO_BOHR)),
            _ => Err(Error::Config("geometry is not resolved".into())),
        }
    }

    pub fn estimation(&self) -> EstimationConfig {
        if self.exact {
            EstimationConfig { seed: self.seed, ..EstimationConfig::exact() }
        } else {
            EstimationConfig::sampled(self.n_shot, self.seed).with_sampler(self.sampler)
        }
    }

    pub fn circuit(&self, geom: &MolecularGeometry) -> AnsatzCircuit {
        AnsatzCircuit::for_electrons(2 * geom.atoms.len(), geom.n_electrons(), self.depth).with_gate(self.gate)
    }

    pub fn langevin(&self, geom: &MolecularGeometry, n_params: usize) -> LangevinConfig {
        LangevinConfig {
            dt: fs_to_au(self.dt_fs),
            temperature: self.temperature_k,
            mu: vec![self.mu(); n_params],
            masses: geom.coordinate_masses(),
            n_steps: self.n_steps,
            thermostat: self.thermostat,
            friction: self.friction,
            position_update: self.position_update,
            estimation: self.estimation(),
            vqe: self.vqe,
        }
    }

    /// Output directory, placed under `$QCPMD_OUTPUT_ROOT` when relative.
    pub fn resolved_output_dir(&self) -> PathBuf {
        let dir = self.output_dir.clone().unwrap_or_else(|| {
            let method = match self.method {
                Method::Qcpmd => "qcpmd",
                Method::VqeMd => "vqe-md",
            };
            PathBuf::from(format!("runs/{method}-seed{}", self.seed))
        });
        resolve_output(&dir)
    }

    /// Same config with the geometry inlined, suitable for `metadata.json`.
    pub fn inlined(&self) -> Result<Self> {
        let geom = self.molecule()?;
        Ok(Self { geometry: Some(GeometrySource::Inline(geometry_input(&geom))), bond_angstrom: None, ..self.clone() })
    }
}

/// `dir` under `$QCPMD_OUTPUT_ROOT` when relative and the variable is set.
pub fn resolve_output(dir: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_ROOT_ENV) {
        Some(root) if dir.is_relative() && !root.is_empty() => PathBuf::from(root).join(dir),
        _ => dir.to_path_buf(),
    }
}

fn element_symbol(z: u32) -> Result<&'static str> {
    const SYMBOLS: [&str; 10] = ["H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne"];
    SYMBOLS.get((z as usize).wrapping_sub(1)).copied().ok_or_else(|| Error::UnsupportedElement(format!("Z = {z}")))
}

/// Geometry in the file schema, positions in bohr and explicit masses.
pub fn geometry_input(geom: &MolecularGeometry) -> GeometryInput {
    GeometryInput {
        atoms: geom
            .atoms
            .iter()
            .map(|a| crate::chem::AtomInput {
                element: element_symbol(a.z).unwrap_or("?").to_string(),
                mass_amu: Some(a.mass_amu),
                xyz_angstrom: None,
                xyz_bohr: Some(a.position),
            })
            .collect(),
        charge: geom.charge,
    }
}

// ---------------------------------------------------------------- trajectory

/// Column names of a trajectory CSV.
pub fn trajectory_columns(n_coord: usize, n_params: usize) -> Vec<String> {
    let mut cols = vec!["step".to_string(), "time".to_string()];
    for (prefix, n) in [("r", n_coord), ("v", n_coord), ("theta", n_params), ("xi", n_params)] {
        cols.extend((0..n).map(|i| format!("{prefix}_{i}")));
    }
    cols.push("energy".into());
    cols.push("energy_var".into());
    cols.extend((0..n_coord).map(|i| format!("force_{i}")));
    cols.extend((0..n_coord).map(|i| format!("force_var_{i}")));
    cols.push("flagged".into());
    cols
}

/// Sidecar describing the trajectory columns.
pub fn trajectory_schema(n_coord: usize, n_params: usize) -> serde_json::Value {
    serde_json::json!({
        "format_version": FORMAT_VERSION,
        "n_coordinates": n_coord,
        "n_params": n_params,
        "columns": trajectory_columns(n_coord, n_params),
        "units": {
            "time": "atomic time unit",
            "r": "bohr",
            "v": "bohr per atomic time unit",
            "theta": "rad",
            "xi": "rad per atomic time unit",
            "energy": "hartree",
            "energy_var": "hartree^2 (variance of the estimate)",
            "force": "hartree per bohr",
            "force_var": "(hartree per bohr)^2 (variance of the estimate)",
            "flagged": "1 when the VQE optimizer diverged and the previous angles were kept"
        }
    })
}

fn frame_row(f: &Frame) -> String {
    let mut s = String::with_capacity(1024);
    let _ = write!(s, "{},{}", f.step, f.time);
    for x in f.r.iter().chain(&f.v).chain(&f.theta).chain(&f.xi) {
        let _ = write!(s, ",{x}");
    }
    let _ = write!(s, ",{},{}", f.energy, f.energy_var);
    for x in f.force.iter().chain(&f.force_var) {
        let _ = write!(s, ",{x}");
    }
    let _ = write!(s, ",{}", u8::from(f.flagged));
    s
}

/// Writes frames as CSV rows, flushing every `CHECKPOINT_STEPS` steps.
pub struct CsvTrajectoryWriter {
    out: BufWriter<File>,
    last_flush: u64,
    pub rows: u64,
}

impl CsvTrajectoryWriter {
    pub fn create(path: &Path, n_coord: usize, n_params: usize) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{}", trajectory_columns(n_coord, n_params).join(","))?;
        Ok(Self { out, last_flush: 0, rows: 0 })
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

impl FrameSink for CsvTrajectoryWriter {
    fn push(&mut self, frame: &Frame) -> Result<()> {
        writeln!(self.out, "{}", frame_row(frame))?;
        self.rows += 1;
        if frame.step >= self.last_flush + CHECKPOINT_STEPS {
            self.out.flush()?;
            self.last_flush = frame.step;
        }
        Ok(())
    }
}

/// Keeps positions and velocities of each frame for the run summary.
#[derive(Default)]
struct KinematicsSink {
    frames: Vec<Frame>,
}

impl FrameSink for KinematicsSink {
    fn push(&mut self, f: &Frame) -> Result<()> {
        self.frames.push(Frame { theta: vec![], xi: vec![], force: vec![], force_var: vec![], ..f.clone() });
        Ok(())
    }
}

struct Tee<'a>(&'a mut dyn FrameSink, &'a mut dyn FrameSink);

impl FrameSink for Tee<'_> {
    fn push(&mut self, f: &Frame) -> Result<()> {
        self.0.push(f)?;
        self.1.push(f)
    }
}

/// Reads a trajectory CSV written by `run`, checking the header.
pub fn read_trajectory(path: &Path, n_coord: usize, n_params: usize) -> Result<Vec<Frame>> {
    let file = File::open(path).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
    let mut lines = BufReader::new(file).lines();
    let header = lines.next().transpose()?.ok_or_else(|| Error::Schema("empty trajectory file".into()))?;
    let expected = trajectory_columns(n_coord, n_params).join(",");
    if header.trim_end() != expected {
        return Err(Error::Schema(format!("header does not match {n_coord} coordinates and {n_params} parameters")));
    }
    let width = 2 + 2 * n_coord + 2 * n_params + 2 + 2 * n_coord + 1;
    let mut frames = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != width {
            return Err(Error::Schema(format!("row {} has {} fields, expected {width}", i + 2, fields.len())));
        }
        let num = |k: usize| -> Result<f64> {
            fields[k].parse::<f64>().map_err(|e| Error::Schema(format!("row {}, column {k}: {e}", i + 2)))
        };
        let vec = |start: usize, n: usize| -> Result<Vec<f64>> { (start..start + n).map(num).collect() };
        let step = fields[0].parse::<u64>().map_err(|e| Error::Schema(format!("row {}: {e}", i + 2)))?;
        let mut at = 2;
        let r = vec(at, n_coord)?;
        at += n_coord;
        let v = vec(at, n_coord)?;
        at += n_coord;
        let theta = vec(at, n_params)?;
        at += n_params;
        let xi = vec(at, n_params)?;
        at += n_params;
        let energy = num(at)?;
        let energy_var = num(at + 1)?;
        at += 2;
        let force = vec(at, n_coord)?;
        at += n_coord;
        let force_var = vec(at, n_coord)?;
        at += n_coord;
        let flagged = fields[at] == "1";
        frames.push(Frame { step, time: num(1)?, r, v, theta, xi, energy, energy_var, force, force_var, flagged });
    }
    for w in frames.windows(2) {
        if !(w[1].time > w[0].time) {
            return Err(Error::Schema(format!("time is not increasing at step {}", w[1].step)));
        }
    }
    Ok(frames)
}

// ---------------------------------------------------------------------- run

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Completed,
    Aborted,
}

/// Everything needed to interpret and replay a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub format_version: u32,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Replayable config with the geometry inlined.
    pub config: RunConfig,
    pub langevin: LangevinConfig,
    pub circuit: AnsatzCircuit,
    pub initial_theta: Vec<f64>,
    pub n_coordinates: usize,
    pub n_params: usize,
    pub frames_written: u64,
    pub ledger: LedgerReport,
    pub conventions: BTreeMap<String, String>,
}

fn conventions() -> BTreeMap<String, String> {
    [
        ("units", "atomic units internally and in trajectory.csv; config keys carry their unit"),
        ("mu", "langevin.mu is in electron masses; config mu_amu is converted with 1 amu = 1822.888486 m_e"),
        ("masses", "langevin.masses are per Cartesian coordinate in electron masses"),
        (
            "n_circuit",
            "one circuit per (state preparation, measurement basis) per estimator call; identity terms excluded",
        ),
        ("n_shot", "shots per Pauli term per expectation value"),
        ("qubits", "little-endian; qubit 2p is the alpha spin orbital of MO p"),
        ("friction", "covariance: gamma = beta dt M^-1 Sigma_F / 2; diagonal: gamma_i = f_i^2 beta dt / (2 m_i)"),
        ("rng", "substream per (seed, step, tag, call, term)"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

/// Bond-length statistics of a diatomic run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BondStatistics {
    pub mean_angstrom: f64,
    pub std_angstrom: f64,
    pub tv_distance: f64,
    /// `1 / (beta mu_red omega^2)` with omega from the frequency report, bohr^2.
    pub equipartition_variance: Option<f64>,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub status: RunStatus,
    pub steps: u64,
    pub simulated_fs: f64,
    pub window_start_fs: f64,
    pub temperature: Option<KineticTemperature>,
    pub bond: Option<BondStatistics>,
    pub frequency: Option<FrequencyReport>,
    pub mean_energy: Option<f64>,
    pub flagged_frames: u64,
    pub ledger: LedgerReport,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Paths of the artifacts of one run.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub trajectory: PathBuf,
    pub schema: PathBuf,
    pub metadata: PathBuf,
    pub summary: PathBuf,
}

impl RunArtifacts {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            trajectory: dir.join("trajectory.csv"),
            schema: dir.join("trajectory.schema.json"),
            metadata: dir.join("metadata.json"),
            summary: dir.join("summary.json"),
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Runs a simulation and writes trajectory, schema, metadata and summary.
/// On a mid-run failure the partial trajectory and the metadata (status
/// `aborted`) are still written before the error is returned.
pub fn cmd_run(cfg: &RunConfig) -> Result<(RunArtifacts, RunSummary)> {
    cfg.validate()?;
    let geom = cfg.molecule()?;
    let model = MolecularModel::new(geom.clone())?;
    let circuit = cfg.circuit(&geom);
    let langevin = cfg.langevin(&geom, circuit.n_params());
    langevin.validate(model.n_coordinates(), circuit.n_params())?;
    let art = RunArtifacts::in_dir(&cfg.resolved_output_dir());
    fs::create_dir_all(&art.dir)?;

    let positions = geom.positions();
    let theta0 = initialize_parameters(&model, &positions, &circuit, cfg.seed)?;
    let (n_coord, n_params) = (positions.len(), circuit.n_params());
    write_json(&art.schema, &trajectory_schema(n_coord, n_params))?;
    let mut writer = CsvTrajectoryWriter::create(&art.trajectory, n_coord, n_params)?;
    let mut kin = KinematicsSink::default();

    let mut metadata = Metadata {
        format_version: FORMAT_VERSION,
        status: RunStatus::Aborted,
        error: None,
        config: cfg.inlined()?,
        langevin: langevin.clone(),
        circuit: circuit.clone(),
        initial_theta: theta0.clone(),
        n_coordinates: n_coord,
        n_params,
        frames_written: 0,
        ledger: ledger_report(&Default::default()),
        conventions: conventions(),
    };
    let outcome = Simulation::new(model, circuit, langevin.clone(), cfg.method, MDState::at_rest(positions, theta0))
        .and_then(|mut sim| {
            let r = sim.run(&mut Tee(&mut writer, &mut kin), cfg.stride);
            metadata.ledger = ledger_report(sim.ledger());
            r
        });
    writer.flush()?;
    metadata.frames_written = writer.rows;
    if let Err(err) = outcome {
        metadata.error = Some(err.to_string());
        write_json(&art.metadata, &metadata)?;
        return Err(err);
    }
    metadata.status = RunStatus::Completed;
    write_json(&art.metadata, &metadata)?;

    let summary = summarize(&kin.frames, &langevin, &cfg.analysis, metadata.ledger.clone());
    write_json(&art.summary, &summary)?;
    Ok((art, summary))
}

fn summarize(frames: &[Frame], langevin: &LangevinConfig, opts: &AnalysisOptions, ledger: LedgerReport) -> RunSummary {
    let mut notes = Vec::new();
    let last_time = frames.last().map_or(0.0, |f| f.time);
    let discard = fs_to_au(opts.discard_fs);
    let (win, start) = match window(frames, discard) {
        Ok(w) => (w, w[0].time),
        Err(e) => {
            notes.push(format!("{e}; statistics use the whole trajectory"));
            (frames, frames.first().map_or(0.0, |f| f.time))
        }
    };
    let beta = langevin.beta();
    let temperature = kinetic_temperature(win, &langevin.masses).ok();
    let frequency = match analyze_frequencies(win, &langevin.masses, beta, 0.0, opts.jackknife_bins) {
        Ok(mut f) => {
            f.discarded = start - frames.first().map_or(0.0, |f| f.time);
            Some(f)
        }
        Err(e) => {
            notes.push(format!("frequency analysis skipped: {e}"));
            None
        }
    };
    let bond = (langevin.masses.len() == 6)
        .then(|| bond_statistics(win, &langevin.masses, beta, frequency.as_ref()))
        .flatten();
    let mean_energy = (!win.is_empty()).then(|| win.iter().map(|f| f.energy).sum::<f64>() / win.len() as f64);
    RunSummary {
        status: RunStatus::Completed,
        steps: frames.last().map_or(0, |f| f.step),
        simulated_fs: au_to_fs(last_time),
        window_start_fs: au_to_fs(start),
        temperature,
        bond,
        frequency,
        mean_energy,
        flagged_frames: frames.iter().filter(|f| f.flagged).count() as u64,
        ledger,
        notes,
    }
}

fn bond_statistics(win: &[Frame], masses: &[f64], beta: f64, freq: Option<&FrequencyReport>) -> Option<BondStatistics> {
    let r = bond_lengths(win, 0, 1);
    let fit = gaussian_fit(&r).ok()?;
    let mu = masses[0] * masses[3] / (masses[0] + masses[3]);
    let omega = freq.and_then(|f| f.frequencies.first()).map(|nu| nu / angular_to_wavenumber(1.0));
    Some(BondStatistics {
        mean_angstrom: fit.mean * BOHR_ANGSTROM,
        std_angstrom: fit.std * BOHR_ANGSTROM,
        tv_distance: fit.tv_distance,
        equipartition_variance: omega.map(|w| 1.0 / (beta * mu * w * w)),
        variance: fit.std * fit.std,
    })
}

// ------------------------------------------------------------------ analyze

/// Frequency analysis of a persisted run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub frequency: FrequencyReport,
    pub temperature: KineticTemperature,
    /// Bond-length fit for a diatomic.
    pub bond_fit: Option<GaussianFit>,
    /// Harmonic FCI reference for a diatomic, cm^-1.
    pub fci_reference: Option<HarmonicReference>,
    pub n_shot: Option<u64>,
    pub method: Method,
}

/// Reads `trajectory.csv` next to `metadata.json` and analyzes it.
/// `discard_fs` and `bins` default to the run's analysis options.
pub fn cmd_analyze(
    trajectory: &Path,
    metadata: Option<&Path>,
    discard_fs: Option<f64>,
    bins: Option<usize>,
    output: Option<&Path>,
) -> Result<AnalysisReport> {
    let meta_path = match metadata {
        Some(p) => p.to_path_buf(),
        None => trajectory.with_file_name("metadata.json"),
    };
    let meta_text =
        fs::read_to_string(&meta_path).map_err(|e| Error::Schema(format!("{}: {e}", meta_path.display())))?;
    let meta: Metadata =
        serde_json::from_str(&meta_text).map_err(|e| Error::Schema(format!("{}: {e}", meta_path.display())))?;
    let frames = read_trajectory(trajectory, meta.n_coordinates, meta.n_params)?;
    let discard = fs_to_au(discard_fs.unwrap_or(meta.config.analysis.discard_fs));
    let bins = bins.unwrap_or(meta.config.analysis.jackknife_bins);
    let masses = &meta.langevin.masses;
    let beta = meta.langevin.beta();
    let frequency = analyze_frequencies(&frames, masses, beta, discard, bins)?;
    let win = window(&frames, discard)?;
    let temperature = kinetic_temperature(win, masses)?;
    let diatomic = meta.n_coordinates == 6;
    let bond_fit = if diatomic { gaussian_fit(&bond_lengths(win, 0, 1)).ok() } else { None };
    let fci_reference = if diatomic { Some(harmonic_reference(&meta.config.molecule()?)?) } else { None };
    let report = AnalysisReport {
        frequency,
        temperature,
        bond_fit,
        fci_reference,
        n_shot: (meta.langevin.estimation.mode == EstimationMode::Sampled).then_some(meta.langevin.estimation.n_shot),
        method: meta.config.method,
    };
    let out_dir = match output {
        Some(d) => resolve_output(d),
        None => trajectory.parent().unwrap_or(Path::new(".")).to_path_buf(),
    };
    fs::create_dir_all(&out_dir)?;
    write_json(&out_dir.join("frequency_report.json"), &report)?;
    if let Some(fit) = &report.bond_fit {
        fs::write(out_dir.join("bond_histogram.csv"), histogram_csv(fit, BOHR_ANGSTROM, "bond_angstrom"))?;
    }
    Ok(report)
}

/// Table with one row per method, frequency and jackknife error in cm^-1.
pub fn frequency_table(report: &AnalysisReport) -> String {
    let mut s = String::new();
    let label = match (report.method, report.n_shot) {
        (Method::Qcpmd, Some(n)) => format!("QCPMD (n_shot = {n})"),
        (Method::Qcpmd, None) => "QCPMD (exact)".to_string(),
        (Method::VqeMd, Some(n)) => format!("VQE-MD (n_shot = {n})"),
        (Method::VqeMd, None) => "VQE-MD (exact)".to_string(),
    };
    let _ = writeln!(s, "{:<24} {:>16} {:>12}", "method", "frequency/cm-1", "jackknife");
    let f = &report.frequency;
    for (k, nu) in f.frequencies.iter().enumerate() {
        let se = f.standard_errors.as_ref().map_or(f64::NAN, |e| e[k]);
        let _ = writeln!(s, "{:<24} {:>16.1} {:>12.1}", if k == 0 { label.as_str() } else { "" }, nu, se);
    }
    if let Some(r) = &report.fci_reference {
        let _ = writeln!(s, "{:<24} {:>16.1} {:>12}", "FCI (harmonic)", r.frequency_cm, "-");
    }
    let t = &report.temperature;
    let _ = writeln!(s, "kinetic temperature: total {:.1} K, internal {:.1} K", t.total, t.internal);
    if let Some(tv) = t.vibrational {
        let _ = writeln!(s, "bond-stretch temperature: {tv:.1} K");
    }
    s
}

fn histogram_csv(fit: &GaussianFit, scale: f64, name: &str) -> String {
    let h = &fit.histogram;
    let total = h.total() as f64;
    let mut s = format!("{name}_lo,{name}_hi,count,density,fitted_density\n");
    for (k, &c) in h.counts.iter().enumerate() {
        let width = h.edges[k + 1] - h.edges[k];
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            h.edges[k] * scale,
            h.edges[k + 1] * scale,
            c,
            c as f64 / (total * width * scale),
            fit.bin_mass(k) / (width * scale)
        );
    }
    s
}

// --------------------------------------------------------------------- scan

/// Ground-state energy in the sector with `n_electrons` particles.
pub fn fci_energy(h: &QubitOperator, n_electrons: usize) -> Result<f64> {
    let dense = h.dense_matrix()?;
    let idx: Vec<usize> = (0..dense.nrows()).filter(|i| i.count_ones() as usize == n_electrons).collect();
    if idx.is_empty() {
        return Err(Error::InvalidMolecule(format!("no basis state holds {n_electrons} electrons")));
    }
    let block = dense.select_rows(idx.iter()).select_columns(idx.iter());
    let eig = SymmetricEigen::new(block);
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

/// One point of a potential-energy scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub bond_angstrom: f64,
    pub e_rhf: Option<f64>,
    pub e_fci: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// FCI minimum of a diatomic and the harmonic frequency there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicReference {
    pub bond_angstrom: f64,
    pub energy: f64,
    /// Second derivative of the FCI energy along the bond, hartree/bohr^2.
    pub force_constant: f64,
    pub frequency_cm: f64,
}

fn diatomic_energies(template: &MolecularGeometry, bond_bohr: f64) -> Result<(f64, f64)> {
    let g = template.with_bond_length(bond_bohr)?;
    let es = HamiltonianBuilder::for_geometry(&g).electronic_structure(&g)?;
    Ok((es.rhf.energy, fci_energy(&es.hamiltonian, g.n_electrons())?))
}

/// RHF and FCI energies over a bond-length grid in angstrom.
pub fn scan(template: &MolecularGeometry, grid: &[f64]) -> Result<Vec<ScanRow>> {
    if template.atoms.len() != 2 {
        return Err(Error::Config("scan needs a diatomic geometry".into()));
    }
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("bond grid must be non-empty and strictly increasing".into()));
    }
    Ok(grid
        .iter()
        .map(|&r| match diatomic_energies(template, r * ANGSTROM_TO_BOHR) {
            Ok((rhf, fci)) => ScanRow { bond_angstrom: r, e_rhf: Some(rhf), e_fci: Some(fci), error: None },
            Err(e) => ScanRow { bond_angstrom: r, e_rhf: None, e_fci: None, error: Some(e.to_string()) },
        })
        .collect())
}

/// Locates the FCI minimum of a diatomic by golden-section search from a
/// coarse scan, then takes a central second difference for the force
/// constant.
pub fn harmonic_reference(template: &MolecularGeometry) -> Result<HarmonicReference> {
    if template.atoms.len() != 2 {
        return Err(Error::Config("harmonic reference needs a diatomic geometry".into()));
    }
    let fci = |r: f64| diatomic_energies(template, r).map(|e| e.1);
    let grid: Vec<f64> = (0..=40).map(|i| 0.8 + 0.05 * i as f64).collect();
    let mut energies = Vec::with_capacity(grid.len());
    for &r in &grid {
        energies.push(fci(r)?);
    }
    let i = (1..grid.len() - 1)
        .min_by(|&a, &b| energies[a].total_cmp(&energies[b]))
        .ok_or_else(|| Error::Degenerate("empty scan".into()))?;
    let (mut a, mut b) = (grid[i - 1], grid[i + 1]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (b - g * (b - a), a + g * (b - a));
    let (mut f1, mut f2) = (fci(x1)?, fci(x2)?);
    while b - a > 1e-7 {
        if f1 < f2 {
            b = x2;
            (x2, f2) = (x1, f1);
            x1 = b - g * (b - a);
            f1 = fci(x1)?;
        } else {
            a = x1;
            (x1, f1) = (x2, f2);
            x2 = a + g * (b - a);
            f2 = fci(x2)?;
        }
    }
    let r = 0.5 * (a + b);
    let h = 5e-3;
    let e0 = fci(r)?;
    let k = (fci(r + h)? - 2.0 * e0 + fci(r - h)?) / (h * h);
    let (m1, m2) = (template.atoms[0].mass_au(), template.atoms[1].mass_au());
    let mu = m1 * m2 / (m1 + m2);
    Ok(HarmonicReference {
        bond_angstrom: r * BOHR_ANGSTROM,
        energy: e0,
        force_constant: k,
        frequency_cm: angular_to_wavenumber((k / mu).sqrt()),
    })
}

/// Writes `scan.csv` and `scan.json` (rows plus the harmonic reference).
pub fn cmd_scan(
    template: &MolecularGeometry,
    grid: &[f64],
    out_dir: &Path,
) -> Result<(Vec<ScanRow>, HarmonicReference)> {
    let rows = scan(template, grid)?;
    let reference = harmonic_reference(template)?;
    fs::create_dir_all(out_dir)?;
    let mut csv = String::from("bond_angstrom,e_rhf,e_fci,error\n");
    for r in &rows {
        let opt = |x: Option<f64>| x.map_or(String::new(), |x| x.to_string());
        let _ =
            writeln!(csv, "{},{},{},{}", r.bond_angstrom, opt(r.e_rhf), opt(r.e_fci), r.error.as_deref().unwrap_or(""));
    }
    fs::write(out_dir.join("scan.csv"), csv)?;
    write_json(&out_dir.join("scan.json"), &serde_json::json!({ "rows": rows, "harmonic_reference": reference }))?;
    Ok((rows, reference))
}

// ---------------------------------------------------------- force histogram

/// Force-noise statistics at one shot count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceHistogramReport {
    pub n_shot: Option<u64>,
    pub repetitions: usize,
    pub mean: f64,
    pub std: f64,
    /// `None` when every sample is identical (exact mode).
    pub tv_distance: Option<f64>,
    pub degenerate: bool,
}

/// Repeated force estimates on the second atom along the bond at fixed
/// geometry and angles, one independent substream per repetition.
pub fn force_samples(
    geom: &MolecularGeometry,
    circuit: &AnsatzCircuit,
    theta: &[f64],
    cfg: &EstimationConfig,
    repetitions: usize,
) -> Result<Vec<f64>> {
    if geom.atoms.len() != 2 {
        return Err(Error::Config("force histograms need a diatomic geometry".into()));
    }
    let model = MolecularModel::new(geom.clone())?;
    let set = model.hamiltonian_with_gradient(&geom.positions())?;
    let d: Vec<f64> = (0..3).map(|a| geom.atoms[1].position[a] - geom.atoms[0].position[a]).collect();
    let len = d.iter().map(|x| x * x).sum::<f64>().sqrt();
    (0..repetitions)
        .map(|rep| {
            let key = cfg.key(rep as u64, StreamTag::ForceHistogram, 0);
            let (_, cache) = estimate_energy(&set.hamiltonian, circuit, theta, cfg, key)?;
            let f = estimate_nuclear_force(&set.gradient, &cache)?;
            Ok((0..3).map(|a| f.value[3 + a] * d[a] / len).sum())
        })
        .collect()
}

/// Force histograms for several shot counts at the initial geometry.
/// Writes `force_histogram_<n>.csv` per shot count and `force_histogram.json`.
pub fn cmd_force_histogram(
    cfg: &RunConfig,
    shot_counts: &[u64],
    repetitions: usize,
    out_dir: &Path,
) -> Result<Vec<ForceHistogramReport>> {
    if repetitions < 100 {
        return Err(Error::Config(format!("at least 100 repetitions are needed, got {repetitions}")));
    }
    let geom = cfg.molecule()?;
    let model = MolecularModel::new(geom.clone())?;
    let circuit = cfg.circuit(&geom);
    let theta = initialize_parameters(&model, &geom.positions(), &circuit, cfg.seed)?;
    fs::create_dir_all(out_dir)?;
    let mut reports = Vec::new();
    let mut modes: Vec<Option<u64>> = shot_counts.iter().map(|&n| Some(n)).collect();
    if cfg.exact || modes.is_empty() {
        modes = vec![None];
    }
    for n in modes {
        let est = match n {
            Some(n) => EstimationConfig::sampled(n, cfg.seed).with_sampler(cfg.sampler),
            None => EstimationConfig::exact(),
        };
        est.validate()?;
        let samples = force_samples(&geom, &circuit, &theta, &est, repetitions)?;
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let std = (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / samples.len() as f64).sqrt();
        let tag = n.map_or("exact".to_string(), |n| n.to_string());
        let report = match gaussian_fit(&samples) {
            Ok(fit) => {
                fs::write(out_dir.join(format!("force_histogram_{tag}.csv")), histogram_csv(&fit, 1.0, "force"))?;
                ForceHistogramReport {
                    n_shot: n,
                    repetitions,
                    mean,
                    std,
                    tv_distance: Some(fit.tv_distance),
                    degenerate: false,
                }
            }
            Err(Error::Degenerate(_)) => {
                ForceHistogramReport { n_shot: n, repetitions, mean, std, tv_distance: None, degenerate: true }
            }
            Err(e) => return Err(e),
        };
        reports.push(report);
    }
    write_json(&out_dir.join("force_histogram.json"), &reports)?;
    Ok(reports)
}

/// TV distance of `samples` against a given Gaussian on the samples' own
/// Freedman-Diaconis bins.
pub fn tv_against(samples: &[f64], mean: f64, std: f64) -> Result<f64> {
    let h = Histogram::freedman_diaconis(samples)?;
    Ok(gaussian_fit_on(samples, h, mean, std)?.tv_distance)
}

// ---------------------------------------------------------------- arguments

#[derive(Debug, Parser)]
#[command(name = "qcpmd", version, about = "Shot-noise Car-Parrinello Langevin dynamics emulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run QCPMD or VQE-MD from a JSON config.
    Run(RunArgs),
    /// Frequency analysis of a finished run.
    Analyze(AnalyzeArgs),
    /// RHF/FCI potential curve of a diatomic and its harmonic frequency.
    Scan(ScanArgs),
    /// Force-noise histograms at the initial geometry.
    ForceHistogram(ForceHistogramArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON run config.
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n_steps: Option<u64>,
    #[arg(long)]
    pub n_shot: Option<u64>,
    #[arg(long, value_parser = parse_method)]
    pub method: Option<Method>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub stride: Option<u64>,
    #[arg(long)]
    pub exact: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// trajectory.csv written by `run`.
    pub trajectory: PathBuf,
    /// Defaults to metadata.json next to the trajectory.
    #[arg(long)]
    pub metadata: Option<PathBuf>,
    #[arg(long)]
    pub discard_fs: Option<f64>,
    #[arg(long)]
    pub bins: Option<usize>,
    /// Defaults to the trajectory's directory.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Geometry file of a diatomic; H2 when omitted.
    #[arg(long)]
    pub geometry: Option<PathBuf>,
    #[arg(long, default_value_t = 0.3)]
    pub from_angstrom: f64,
    #[arg(long, default_value_t = 2.5)]
    pub to_angstrom: f64,
    #[arg(long, default_value_t = 0.01)]
    pub step_angstrom: f64,
    #[arg(long, default_value = "scan")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ForceHistogramArgs {
    /// Run config providing geometry, ansatz and seed; H2 at 0.735 A when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "51,204,3276")]
    pub n_shot: Vec<u64>,
    #[arg(long, default_value_t = 10_000)]
    pub repetitions: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub exact: bool,
    #[arg(long, default_value = "force-histogram")]
    pub output_dir: PathBuf,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    match s {
        "qcpmd" => Ok(Method::Qcpmd),
        "vqe-md" => Ok(Method::VqeMd),
        _ => Err(format!("unknown method `{s}` (qcpmd, vqe-md)")),
    }
}

/// Bond-length grid `from..=to` in steps of `step`, angstrom.
pub fn bond_grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(to >= from) || !(from > 0.0) {
        return Err(Error::Config(format!("invalid grid {from}..{to} step {step}")));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| from + step * i as f64).collect())
}

/// Executes a parsed command line, printing a short report to stdout.
pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(a) => {
            let mut cfg = RunConfig::from_file(&a.config)?;
            if let Some(s) = a.seed {
                cfg.seed = s;
            }
            if let Some(n) = a.n_steps {
                cfg.n_steps = n;
            }
            if let Some(n) = a.n_shot {
                cfg.n_shot = n;
            }
            if let Some(m) = a.method {
                cfg.method = m;
            }
            if let Some(d) = a.output_dir {
                cfg.output_dir = Some(d);
            }
            if let Some(s) = a.stride {
                cfg.stride = s;
            }
            cfg.exact |= a.exact;
            cfg.validate()?;
            let (art, summary) = cmd_run(&cfg)?;
            println!("wrote {}", art.dir.display());
            println!(
                "steps {}  simulated {:.1} fs  shots/step {:.0}  circuits/step {:.0}",
                summary.steps, summary.simulated_fs, summary.ledger.shots_per_step, summary.ledger.circuits_per_step
            );
            if let Some(t) = summary.temperature {
                println!("kinetic temperature: total {:.1} K, internal {:.1} K", t.total, t.internal);
            }
            if let Some(f) = &summary.frequency {
                for (k, nu) in f.frequencies.iter().enumerate() {
                    let se = f.standard_errors.as_ref().map_or(f64::NAN, |e| e[k]);
                    println!("frequency {nu:.1} cm-1 (jackknife {se:.1})");
                }
            }
            for n in &summary.notes {
                println!("note: {n}");
            }
        }
        Command::Analyze(a) => {
            let report =
                cmd_analyze(&a.trajectory, a.metadata.as_deref(), a.discard_fs, a.bins, a.output_dir.as_deref())?;
            print!("{}", frequency_table(&report));
        }
        Command::Scan(a) => {
            let template = match &a.geometry {
                Some(p) => {
                    let text = fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                    GeometryInput::from_json_str(&text)?
                }
                None => MolecularGeometry::h2(1.4),
            };
            let grid = bond_grid(a.from_angstrom, a.to_angstrom, a.step_angstrom)?;
            let out = resolve_output(&a.output_dir);
            let (rows, reference) = cmd_scan(&template, &grid, &out)?;
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            println!("wrote {} ({} points, {failed} failed)", out.display(), rows.len());
            println!(
                "FCI minimum {:.5} A, E = {:.8} Eh, harmonic frequency {:.1} cm-1",
                reference.bond_angstrom, reference.energy, reference.frequency_cm
            );
        }
        Command::ForceHistogram(a) => {
            let mut cfg = match &a.config {
                Some(p) => RunConfig::from_file(p)?,
                None => RunConfig::h2(0.735),
            };
            if let Some(s) = a.seed {
                cfg.seed = s;
            }
            cfg.exact |= a.exact;
            let out = resolve_output(&a.output_dir);
            let reports = cmd_force_histogram(&cfg, &a.n_shot, a.repetitions, &out)?;
            println!("wrote {}", out.display());
            println!("{:>8} {:>14} {:>12} {:>8}", "n_shot", "mean/Eh bohr-1", "std", "TV");
            for r in reports {
                let n = r.n_shot.map_or("exact".to_string(), |n| n.to_string());
                let tv = r.tv_distance.map_or("degenerate".to_string(), |t| format!("{t:.4}"));
                println!("{n:>8} {:>14.6} {:>12.6} {tv:>8}", r.mean, r.std);
            }
        }
    }
    Ok(())
}
