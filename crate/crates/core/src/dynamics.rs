//! Langevin integrators: QCPMD, where nuclei and ansatz angles evolve
//! together, and the VQE-MD baseline, where the angles are re-optimized at
//! every step.
//!
//! In sampled mode the only noise is the shot noise already inside the
//! estimated forces. Friction is fixed from the estimated force variance by
//! the fluctuation-dissipation relation `gamma = beta dt M^-1 Sigma / 2`,
//! where `Sigma` is the covariance of the force estimator. For independent
//! components this is the diagonal `f^2 beta dt / (2 m)`. Nuclear forces of
//! one step share their Pauli samples and are correlated (for a diatomic
//! they are exactly opposite), so the default uses the full covariance.
//! Parameter forces come from disjoint circuits and are independent, so
//! `zeta` is always diagonal.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chem::{HamiltonianModel, HamiltonianSet};
use crate::error::{Error, Result};
use crate::estimator::{
    estimate_energy, estimate_nuclear_force, estimate_parameter_force, EstimationConfig, EstimationResult,
    ResourceLedger,
};
use crate::optimize::{bfgs, BfgsOptions, BfgsStatus};
use crate::qsim::AnsatzCircuit;
use crate::rng::{StreamKey, StreamTag};
use crate::units::beta_from_kelvin;

/// Phase-space point of the coupled nuclear / parameter system, atomic units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MDState {
    pub r: Vec<f64>,
    pub v: Vec<f64>,
    pub theta: Vec<f64>,
    pub xi: Vec<f64>,
    pub step: u64,
    pub time: f64,
}

impl MDState {
    pub fn at_rest(r: Vec<f64>, theta: Vec<f64>) -> Self {
        let (n, m) = (r.len(), theta.len());
        Self { r, v: vec![0.0; n], theta, xi: vec![0.0; m], step: 0, time: 0.0 }
    }

    fn check_finite(&self) -> Result<()> {
        for (name, xs) in [("R", &self.r), ("v", &self.v), ("theta", &self.theta), ("xi", &self.xi)] {
            if let Some(i) = xs.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite { step: self.step as usize, what: format!("{name}[{i}] = {}", xs[i]) });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    Qcpmd,
    VqeMd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Thermostat {
    #[default]
    Fdt,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrictionModel {
    /// `gamma = beta dt M^-1 Sigma_F / 2` with the full force covariance.
    #[default]
    Covariance,
    /// Componentwise `gamma_i = f_i^2 beta dt / (2 m_i)`.
    Diagonal,
}

/// Which velocity drives the coordinate update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PositionUpdate {
    /// `R(k+1) = R(k) + v(k+1) dt`, and likewise for theta.
    #[default]
    Updated,
    /// `R(k+1) = R(k) + v(k) dt`: explicit Euler, which pumps energy into
    /// every oscillation at a rate of about `omega^2 dt`.
    Lagged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VqeOptions {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub max_line_search: usize,
}

impl Default for VqeOptions {
    fn default() -> Self {
        Self { max_iterations: 50, gradient_tolerance: 1e-5, max_line_search: 10 }
    }
}

/// Integrator settings in atomic units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LangevinConfig {
    pub dt: f64,
    /// Kelvin.
    pub temperature: f64,
    /// Virtual mass per parameter, electron masses.
    pub mu: Vec<f64>,
    /// Mass per Cartesian coordinate, electron masses.
    pub masses: Vec<f64>,
    pub n_steps: u64,
    pub thermostat: Thermostat,
    pub friction: FrictionModel,
    pub position_update: PositionUpdate,
    pub estimation: EstimationConfig,
    pub vqe: VqeOptions,
}

impl LangevinConfig {
    pub fn beta(&self) -> f64 {
        beta_from_kelvin(self.temperature)
    }

    pub fn validate(&self, n_coordinates: usize, n_params: usize) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return bad("temperature must be positive");
        }
        if self.mu.len() != n_params || self.mu.iter().any(|&m| !(m > 0.0)) {
            return bad("mu must be positive, one per parameter");
        }
        if self.masses.len() != n_coordinates || self.masses.iter().any(|&m| !(m > 0.0)) {
            return bad("masses must be positive, one per coordinate");
        }
        self.estimation.validate()
    }

    fn thermostat_active(&self) -> bool {
        self.thermostat == Thermostat::Fdt && !self.estimation.is_exact()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermostatState {
    pub gamma_diag: Vec<f64>,
    pub zeta_diag: Vec<f64>,
}

fn guard(rate: f64, dt: f64, what: &str, i: usize) -> Result<()> {
    if !(rate * dt < 1.0) {
        return Err(Error::Stability(format!("{what}[{i}] dt = {} >= 1", rate * dt)));
    }
    Ok(())
}

/// Componentwise `gamma = f^2 beta dt / (2 m)`, `zeta = f_theta^2 beta dt / (2 mu)`.
pub fn fdt_coefficients(
    force_var: &[f64],
    param_force_var: &[f64],
    beta: f64,
    dt: f64,
    masses: &[f64],
    mu: &[f64],
) -> Result<ThermostatState> {
    let coeffs = |var: &[f64], mass: &[f64], what: &str| -> Result<Vec<f64>> {
        var.iter()
            .zip(mass)
            .enumerate()
            .map(|(i, (&f2, &m))| {
                let g = f2 * beta * dt / (2.0 * m);
                guard(g, dt, what, i).map(|_| g)
            })
            .collect()
    };
    Ok(ThermostatState {
        gamma_diag: coeffs(force_var, masses, "gamma")?,
        zeta_diag: coeffs(param_force_var, mu, "zeta")?,
    })
}

/// `gamma = beta dt M^-1 Sigma / 2`. The guard is applied to the eigenvalues
/// of `gamma`, which are those of the symmetric `M^-1/2 Sigma M^-1/2`.
pub fn fdt_friction_matrix(force_cov: &DMatrix<f64>, beta: f64, dt: f64, masses: &[f64]) -> Result<DMatrix<f64>> {
    let n = masses.len();
    let scale = 0.5 * beta * dt;
    let gamma = DMatrix::from_fn(n, n, |i, j| scale * force_cov[(i, j)] / masses[i]);
    let sym = DMatrix::from_fn(n, n, |i, j| scale * force_cov[(i, j)] / (masses[i] * masses[j]).sqrt());
    let top = sym.symmetric_eigenvalues().iter().copied().fold(0.0, f64::max);
    guard(top, dt, "gamma eigenvalue", 0)?;
    Ok(gamma)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Friction {
    Diagonal(Vec<f64>),
    Matrix(DMatrix<f64>),
}

impl Friction {
    pub fn zero(n: usize) -> Self {
        Friction::Diagonal(vec![0.0; n])
    }

    /// `gamma v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        match self {
            Friction::Diagonal(g) => g.iter().zip(v).map(|(g, v)| g * v).collect(),
            Friction::Matrix(g) => (g * DVector::from_column_slice(v)).as_slice().to_vec(),
        }
    }
}

/// `v' = v - dt gamma v + dt F / m`.
pub fn langevin_velocity(v: &[f64], force: &[f64], friction: &Friction, masses: &[f64], dt: f64) -> Vec<f64> {
    let damp = friction.apply(v);
    v.iter().zip(&damp).zip(force.iter().zip(masses)).map(|((v, d), (f, m))| v - dt * d + dt * f / m).collect()
}

/// `x' = x + dt u`.
pub fn drift(x: &[f64], u: &[f64], dt: f64) -> Vec<f64> {
    x.iter().zip(u).map(|(x, u)| x + dt * u).collect()
}

/// One persisted sample of the trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub step: u64,
    pub time: f64,
    pub r: Vec<f64>,
    pub v: Vec<f64>,
    pub theta: Vec<f64>,
    pub xi: Vec<f64>,
    pub energy: f64,
    pub energy_var: f64,
    pub force: Vec<f64>,
    pub force_var: Vec<f64>,
    /// Set when the VQE optimizer diverged and the previous angles were kept.
    pub flagged: bool,
}

/// Receiver of frames as they are produced.
pub trait FrameSink {
    fn push(&mut self, frame: &Frame) -> Result<()>;
}

impl FrameSink for Vec<Frame> {
    fn push(&mut self, frame: &Frame) -> Result<()> {
        Vec::push(self, frame.clone());
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Evaluation {
    energy: EstimationResult,
    force: EstimationResult,
}

/// A running QCPMD or VQE-MD simulation, advanced one step at a time.
pub struct Simulation<M: HamiltonianModel> {
    model: M,
    circuit: AnsatzCircuit,
    config: LangevinConfig,
    method: Method,
    state: MDState,
    eval: Evaluation,
    ledger: ResourceLedger,
    thermostat: ThermostatState,
    flagged: bool,
}

impl<M: HamiltonianModel> Simulation<M> {
    /// Starts from `state` and evaluates frame 0. For VQE-MD the angles are
    /// first optimized at the initial geometry.
    pub fn new(
        model: M,
        circuit: AnsatzCircuit,
        config: LangevinConfig,
        method: Method,
        state: MDState,
    ) -> Result<Self> {
        circuit.validate()?;
        if circuit.n_qubits != model.n_qubits() {
            return Err(Error::QubitMismatch(circuit.n_qubits, model.n_qubits()));
        }
        config.validate(model.n_coordinates(), circuit.n_params())?;
        if state.r.len() != model.n_coordinates() || state.v.len() != state.r.len() {
            return Err(Error::Config("initial positions/velocities do not match the model".into()));
        }
        if state.theta.len() != circuit.n_params() || state.xi.len() != state.theta.len() {
            return Err(Error::ParameterCount { expected: circuit.n_params(), got: state.theta.len() });
        }
        state.check_finite()?;
        let set = model.hamiltonian_with_gradient(&state.r)?;
        let mut ledger = ResourceLedger::default();
        let mut state = state;
        let mut flagged = false;
        if method == Method::VqeMd {
            let (theta, ok) = vqe_optimize(&set, &circuit, &state.theta, &config, state.step, &mut ledger)?;
            state.theta = theta;
            flagged = !ok;
        }
        let eval = evaluate(&set, &circuit, &state, &config, &mut ledger)?;
        let n = state.r.len();
        let m = state.theta.len();
        let thermostat = ThermostatState { gamma_diag: vec![0.0; n], zeta_diag: vec![0.0; m] };
        Ok(Self { model, circuit, config, method, state, eval, ledger, thermostat, flagged })
    }

    pub fn state(&self) -> &MDState {
        &self.state
    }

    pub fn config(&self) -> &LangevinConfig {
        &self.config
    }

    pub fn circuit(&self) -> &AnsatzCircuit {
        &self.circuit
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn model(&self) -> &M {
        &self.model
    }

    pub fn ledger(&self) -> &ResourceLedger {
        &self.ledger
    }

    /// Friction coefficients used by the last completed step.
    pub fn thermostat(&self) -> &ThermostatState {
        &self.thermostat
    }

    pub fn frame(&self) -> Frame {
        let s = &self.state;
        Frame {
            step: s.step,
            time: s.time,
            r: s.r.clone(),
            v: s.v.clone(),
            theta: s.theta.clone(),
            xi: s.xi.clone(),
            energy: self.eval.energy.value[0],
            energy_var: self.eval.energy.variance[0],
            force: self.eval.force.value.clone(),
            force_var: self.eval.force.variance.clone(),
            flagged: self.flagged,
        }
    }

    /// Advances from frame `k` to frame `k + 1`.
    pub fn step(&mut self) -> Result<()> {
        let cfg = &self.config;
        let dt = cfg.dt;
        let beta = cfg.beta();
        let k = self.state.step;
        let active = cfg.thermostat_active();

        // nuclei, with F and its covariance measured at (theta_k, R_k)
        let force = &self.eval.force;
        let friction = if !active {
            Friction::zero(self.state.v.len())
        } else {
            match cfg.friction {
                FrictionModel::Covariance => {
                    let cov = force.covariance.as_ref().expect("nuclear force carries its covariance");
                    Friction::Matrix(fdt_friction_matrix(cov, beta, dt, &cfg.masses)?)
                }
                FrictionModel::Diagonal => {
                    let t = fdt_coefficients(&force.variance, &[], beta, dt, &cfg.masses, &[])?;
                    Friction::Diagonal(t.gamma_diag)
                }
            }
        };
        let gamma_diag = match &friction {
            Friction::Diagonal(g) => g.clone(),
            Friction::Matrix(g) => g.diagonal().iter().copied().collect(),
        };
        let v_new = langevin_velocity(&self.state.v, &force.value, &friction, &cfg.masses, dt);
        let r_new = match cfg.position_update {
            PositionUpdate::Updated => drift(&self.state.r, &v_new, dt),
            PositionUpdate::Lagged => drift(&self.state.r, &self.state.v, dt),
        };
        let set = self.model.hamiltonian_with_gradient(&r_new)?;

        let mut flagged = false;
        let (theta_new, xi_new, zeta_diag) = match self.method {
            Method::Qcpmd => {
                // F_theta and f_theta^2 at (theta_k, R_{k+1})
                let key = cfg.estimation.key(k, StreamTag::ParameterShift, 0);
                let ft =
                    estimate_parameter_force(&set.hamiltonian, &self.circuit, &self.state.theta, &cfg.estimation, key)?;
                self.ledger.record_result(k, StreamTag::ParameterShift, &ft);
                let zeta = if active {
                    fdt_coefficients(&[], &ft.variance, beta, dt, &[], &cfg.mu)?.zeta_diag
                } else {
                    vec![0.0; ft.value.len()]
                };
                let xi_new =
                    langevin_velocity(&self.state.xi, &ft.value, &Friction::Diagonal(zeta.clone()), &cfg.mu, dt);
                let theta_new = match cfg.position_update {
                    PositionUpdate::Updated => drift(&self.state.theta, &xi_new, dt),
                    PositionUpdate::Lagged => drift(&self.state.theta, &self.state.xi, dt),
                };
                (theta_new, xi_new, zeta)
            }
            Method::VqeMd => {
                let (theta, ok) = vqe_optimize(&set, &self.circuit, &self.state.theta, cfg, k + 1, &mut self.ledger)?;
                flagged = !ok;
                let m = theta.len();
                (theta, vec![0.0; m], vec![0.0; m])
            }
        };

        let next = MDState { r: r_new, v: v_new, theta: theta_new, xi: xi_new, step: k + 1, time: (k + 1) as f64 * dt };
        next.check_finite()?;
        let eval = evaluate(&set, &self.circuit, &next, cfg, &mut self.ledger)?;
        self.state = next;
        self.eval = eval;
        self.thermostat = ThermostatState { gamma_diag, zeta_diag };
        self.flagged = flagged;
        Ok(())
    }

    /// Pushes frame 0 if at the start, then steps until `config.n_steps`,
    /// pushing every `stride`-th frame and the last one.
    pub fn run(&mut self, sink: &mut dyn FrameSink, stride: u64) -> Result<()> {
        let stride = stride.max(1);
        let n = self.config.n_steps;
        if self.state.step == 0 {
            sink.push(&self.frame())?;
        }
        while self.state.step < n {
            self.step()?;
            let s = self.state.step;
            if s.is_multiple_of(stride) || s == n {
                sink.push(&self.frame())?;
            }
        }
        Ok(())
    }
}

/// Energy and nuclear forces at the state's `(theta, R)` from one set of samples.
fn evaluate(
    set: &HamiltonianSet,
    circuit: &AnsatzCircuit,
    state: &MDState,
    cfg: &LangevinConfig,
    ledger: &mut ResourceLedger,
) -> Result<Evaluation> {
    let key = cfg.estimation.key(state.step, StreamTag::Energy, 0);
    let (energy, cache) = estimate_energy(&set.hamiltonian, circuit, &state.theta, &cfg.estimation, key)?;
    ledger.record_result(state.step, StreamTag::Energy, &energy);
    let force = estimate_nuclear_force(&set.gradient, &cache)?;
    Ok(Evaluation { energy, force })
}

/// Per-step VQE: BFGS on sampled energies and parameter-shift gradients,
/// warm-started from `theta0`. Returns the new angles and whether they were
/// accepted; on divergence the previous angles are kept.
fn vqe_optimize(
    set: &HamiltonianSet,
    circuit: &AnsatzCircuit,
    theta0: &[f64],
    cfg: &LangevinConfig,
    step: u64,
    ledger: &mut ResourceLedger,
) -> Result<(Vec<f64>, bool)> {
    let opts = BfgsOptions {
        max_iterations: cfg.vqe.max_iterations,
        gradient_tolerance: cfg.vqe.gradient_tolerance,
        max_line_search: cfg.vqe.max_line_search,
        ..Default::default()
    };
    let mut call = 0u64;
    let mut failure = None;
    let h = &set.hamiltonian;
    let result = bfgs(theta0, &opts, |theta| {
        let est = &cfg.estimation;
        let evaluated =
            estimate_energy(h, circuit, theta, est, est.key(step, StreamTag::VqeEnergy, call)).and_then(|(e, _)| {
                let g = estimate_parameter_force(h, circuit, theta, est, est.key(step, StreamTag::VqeGradient, call))?;
                Ok((e, g))
            });
        call += 1;
        match evaluated {
            Ok((e, g)) => {
                ledger.record_result(step, StreamTag::VqeEnergy, &e);
                ledger.record_result(step, StreamTag::VqeGradient, &g);
                (e.value[0], g.value.iter().map(|f| -f).collect())
            }
            Err(err) => {
                failure.get_or_insert(err);
                (f64::NAN, vec![f64::NAN; theta.len()])
            }
        }
    });
    if let Some(err) = failure {
        return Err(err);
    }
    if result.status == BfgsStatus::NonFinite || result.x.iter().any(|x| !x.is_finite()) {
        return Ok((theta0.to_vec(), false));
    }
    Ok((result.x, true))
}

/// Noiseless minimization of `L(theta, R0)` to `|grad| < 1e-6`, from a small
/// seeded random start (the reference state itself is a stationary point).
pub fn initialize_parameters<M: HamiltonianModel>(
    model: &M,
    positions: &[f64],
    circuit: &AnsatzCircuit,
    seed: u64,
) -> Result<Vec<f64>> {
    let h = model.hamiltonian(positions)?;
    let exact = EstimationConfig::exact();
    let mut rng = StreamKey::new(seed, 0, StreamTag::Initialization, 0).rng();
    let x0: Vec<f64> = (0..circuit.n_params()).map(|_| rng.random_range(-0.1..0.1)).collect();
    let key = exact.key(0, StreamTag::Initialization, 0);
    let mut failure = None;
    let opts = BfgsOptions { max_iterations: 1000, gradient_tolerance: 1e-6, ..Default::default() };
    let result = bfgs(&x0, &opts, |theta| {
        let e = estimate_energy(&h, circuit, theta, &exact, key).map(|(e, _)| e.value[0]);
        let g = estimate_parameter_force(&h, circuit, theta, &exact, key);
        match (e, g) {
            (Ok(e), Ok(g)) => (e, g.value.iter().map(|f| -f).collect()),
            (Err(err), _) | (_, Err(err)) => {
                failure.get_or_insert(err);
                (f64::NAN, vec![f64::NAN; theta.len()])
            }
        }
    });
    if let Some(err) = failure {
        return Err(err);
    }
    if result.status != BfgsStatus::Converged {
        return Err(Error::OptimizerStall(format!(
            "{:?} after {} iterations with |grad| = {:.3e}",
            result.status,
            result.iterations,
            result.gradient_norm()
        )));
    }
    Ok(result.x)
}

/// In-memory trajectory with its resource ledger.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub frames: Vec<Frame>,
    pub ledger: ResourceLedger,
    pub dt: f64,
    pub stride: u64,
}

/// Initializes the angles at `positions` and runs `config.n_steps` QCPMD steps.
pub fn run_qcpmd<M: HamiltonianModel>(
    model: M,
    circuit: AnsatzCircuit,
    config: LangevinConfig,
    positions: Vec<f64>,
) -> Result<Trajectory> {
    let theta = initialize_parameters(&model, &positions, &circuit, config.estimation.seed)?;
    let dt = config.dt;
    let mut sim = Simulation::new(model, circuit, config, Method::Qcpmd, MDState::at_rest(positions, theta))?;
    let mut frames = Vec::new();
    sim.run(&mut frames, 1)?;
    Ok(Trajectory { frames, ledger: sim.ledger().clone(), dt, stride: 1 })
}
