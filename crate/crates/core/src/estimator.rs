//! Shot-based estimators of the energy, nuclear forces and parameter forces,
//! each returning the statistical variance of every component, plus the
//! resource ledger that counts shots and circuit executions.
//!
//! Counting convention: one circuit execution is one (state preparation,
//! measurement basis) batch, i.e. one non-identity Pauli term measured on one
//! prepared state. Identity terms cost nothing. Exact mode costs nothing.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{PauliString, QubitOperator};
use crate::qsim::{
    exact_pauli, sample_pauli_with, shifted_circuits, AnsatzCircuit, SampleStats, ShotSampler, StateVector,
};
use crate::rng::{StreamKey, StreamTag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimationMode {
    #[default]
    Sampled,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimationConfig {
    /// Shots per Pauli term per expectation value.
    pub n_shot: u64,
    pub mode: EstimationMode,
    pub seed: u64,
    #[serde(default)]
    pub sampler: ShotSampler,
}

impl EstimationConfig {
    pub fn sampled(n_shot: u64, seed: u64) -> Self {
        Self { n_shot, mode: EstimationMode::Sampled, seed, sampler: ShotSampler::Bitstring }
    }

    pub fn exact() -> Self {
        Self { n_shot: 0, mode: EstimationMode::Exact, seed: 0, sampler: ShotSampler::Bitstring }
    }

    pub fn with_sampler(self, sampler: ShotSampler) -> Self {
        Self { sampler, ..self }
    }

    pub fn is_exact(&self) -> bool {
        self.mode == EstimationMode::Exact
    }

    pub fn validate(&self) -> Result<()> {
        if !self.is_exact() && self.n_shot == 0 {
            return Err(Error::Config("n_shot must be at least 1 in sampled mode".into()));
        }
        Ok(())
    }

    /// Substream key for estimator call `call` of kind `tag` at `step`.
    pub fn key(&self, step: u64, tag: StreamTag, call: u64) -> StreamKey {
        StreamKey::new(self.seed, step, tag, call)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    pub value: Vec<f64>,
    /// Variance of each component estimator (not of a single shot).
    pub variance: Vec<f64>,
    /// Full covariance of the component estimators, where components share samples.
    pub covariance: Option<DMatrix<f64>>,
    pub shots_used: u64,
    pub circuits_used: u64,
}

impl EstimationResult {
    pub fn scalar(&self) -> f64 {
        self.value[0]
    }
}

/// Per-term outcome statistics measured on one prepared state.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSampleCache {
    stats: BTreeMap<PauliString, SampleStats>,
    exact: bool,
}

impl PauliSampleCache {
    pub fn get(&self, p: &PauliString) -> Option<&SampleStats> {
        self.stats.get(p)
    }

    pub fn len(&self) -> usize {
        self.stats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stats.is_empty()
    }

    /// Mean and estimator variance of `<p>`. Identity terms need no samples,
    /// so they resolve even when the measured operator had pruned them.
    fn lookup(&self, p: &PauliString) -> Result<(f64, f64)> {
        if p.is_identity() {
            return Ok((1.0, 0.0));
        }
        let s = self.stats.get(p).ok_or_else(|| Error::CacheMiss(p.to_string()))?;
        let var = if self.exact || s.shots == 0 { 0.0 } else { s.sample_variance / s.shots as f64 };
        Ok((s.mean, var))
    }

    /// `sum_i c_i <P_i>` and its estimator variance.
    pub fn evaluate(&self, op: &QubitOperator) -> Result<(f64, f64)> {
        let mut value = 0.0;
        let mut var = 0.0;
        for (p, c) in op.terms() {
            let (mean, v) = self.lookup(p)?;
            value += c * mean;
            var += c * c * v;
        }
        Ok((value, var))
    }
}

/// Measures every term of `h` on `state`, one substream per term.
/// Returns the cache and the circuit count.
pub fn measure_terms(
    h: &QubitOperator,
    state: &StateVector,
    cfg: &EstimationConfig,
    key: StreamKey,
) -> (PauliSampleCache, u64) {
    let mut stats = BTreeMap::new();
    let mut circuits = 0;
    for (i, (p, _)) in h.terms().enumerate() {
        let s = if p.is_identity() {
            SampleStats::deterministic(1.0)
        } else if cfg.is_exact() {
            SampleStats::deterministic(exact_pauli(state, p))
        } else {
            circuits += 1;
            let mut rng = key.child(i as u64).rng();
            sample_pauli_with(cfg.sampler, state, p, cfg.n_shot, &mut rng)
        };
        stats.insert(p.clone(), s);
    }
    (PauliSampleCache { stats, exact: cfg.is_exact() }, circuits)
}

/// Energy on an explicit state. Also returns the samples for reuse.
pub fn estimate_energy_on_state(
    h: &QubitOperator,
    state: &StateVector,
    cfg: &EstimationConfig,
    key: StreamKey,
) -> Result<(EstimationResult, PauliSampleCache)> {
    if h.n_qubits() != state.n_qubits() {
        return Err(Error::QubitMismatch(h.n_qubits(), state.n_qubits()));
    }
    let (cache, circuits) = measure_terms(h, state, cfg, key);
    let (value, var) = cache.evaluate(h)?;
    let result = EstimationResult {
        value: vec![value],
        variance: vec![var],
        covariance: None,
        shots_used: circuits * cfg.n_shot,
        circuits_used: circuits,
    };
    Ok((result, cache))
}

/// `L(theta, R) = <psi(theta)|H(R)|psi(theta)>`.
pub fn estimate_energy(
    h: &QubitOperator,
    circuit: &AnsatzCircuit,
    params: &[f64],
    cfg: &EstimationConfig,
    key: StreamKey,
) -> Result<(EstimationResult, PauliSampleCache)> {
    let state = circuit.prepare(params)?;
    estimate_energy_on_state(h, &state, cfg, key)
}

/// Hellmann-Feynman forces `F_a = -sum_i (dc_i/dR_a) <P_i>` from the samples
/// already taken for the energy. Consumes no shots. The covariance is
/// reported because all components share the same samples.
pub fn estimate_nuclear_force(gradient: &[QubitOperator], cache: &PauliSampleCache) -> Result<EstimationResult> {
    let n = gradient.len();
    let mut value = Vec::with_capacity(n);
    let mut cov = DMatrix::zeros(n, n);
    for (a, da) in gradient.iter().enumerate() {
        let mut f = 0.0;
        for (p, c) in da.terms() {
            f -= c * cache.lookup(p)?.0;
        }
        value.push(f);
        for (b, db) in gradient.iter().enumerate().skip(a) {
            let mut s = 0.0;
            for (p, ca) in da.terms() {
                let cb = db.coefficient(p);
                if cb != 0.0 {
                    s += ca * cb * cache.lookup(p)?.1;
                }
            }
            cov[(a, b)] = s;
            cov[(b, a)] = s;
        }
    }
    Ok(EstimationResult {
        value,
        variance: cov.diagonal().iter().copied().collect(),
        covariance: Some(cov),
        shots_used: 0,
        circuits_used: 0,
    })
}

/// Parameter forces `F_theta = -dL/dtheta` by the parameter-shift rule: four
/// shifted circuits per angle, each measured over every term of `h`.
pub fn estimate_parameter_force(
    h: &QubitOperator,
    circuit: &AnsatzCircuit,
    params: &[f64],
    cfg: &EstimationConfig,
    key: StreamKey,
) -> Result<EstimationResult> {
    let m = circuit.n_params();
    if params.len() != m {
        return Err(Error::ParameterCount { expected: m, got: params.len() });
    }
    let mut value = Vec::with_capacity(m);
    let mut variance = Vec::with_capacity(m);
    let mut circuits = 0;
    for k in 0..m {
        let mut grad = 0.0;
        let mut var = 0.0;
        for (j, term) in shifted_circuits(circuit, params, k)?.iter().enumerate() {
            for (sign, angles) in [(1.0, &term.plus), (-1.0, &term.minus)] {
                let call = (4 * k + 2 * j + usize::from(sign < 0.0)) as u64;
                let state = circuit.prepare_compiled(angles)?;
                let (cache, c) = measure_terms(h, &state, cfg, key.child(call));
                let (e, v) = cache.evaluate(h)?;
                circuits += c;
                grad += sign * term.weight * e;
                var += term.weight * term.weight * v;
            }
        }
        value.push(-grad);
        variance.push(var);
    }
    Ok(EstimationResult {
        value,
        variance,
        covariance: None,
        shots_used: circuits * cfg.n_shot,
        circuits_used: circuits,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ResourceCount {
    pub shots: u64,
    pub circuits: u64,
}

impl ResourceCount {
    fn add(&mut self, shots: u64, circuits: u64) {
        self.shots += shots;
        self.circuits += circuits;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepResources {
    pub step: u64,
    pub shots: u64,
    pub circuits: u64,
}

/// Cumulative shot and circuit counts with a per-step series.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResourceLedger {
    pub n_shot_total: u64,
    pub n_circuit_total: u64,
    pub by_tag: BTreeMap<StreamTag, ResourceCount>,
    pub per_step: Vec<StepResources>,
}

impl ResourceLedger {
    pub fn record(&mut self, step: u64, tag: StreamTag, shots: u64, circuits: u64) {
        self.n_shot_total += shots;
        self.n_circuit_total += circuits;
        self.by_tag.entry(tag).or_default().add(shots, circuits);
        match self.per_step.last_mut() {
            Some(last) if last.step == step => {
                last.shots += shots;
                last.circuits += circuits;
            }
            _ => self.per_step.push(StepResources { step, shots, circuits }),
        }
    }

    pub fn record_result(&mut self, step: u64, tag: StreamTag, r: &EstimationResult) {
        self.record(step, tag, r.shots_used, r.circuits_used);
    }

    pub fn n_steps(&self) -> usize {
        self.per_step.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagReport {
    pub shots: u64,
    pub circuits: u64,
    pub shots_per_step: f64,
    pub circuits_per_step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerReport {
    pub steps: usize,
    pub n_shot_total: u64,
    pub n_circuit_total: u64,
    pub shots_per_step: f64,
    pub circuits_per_step: f64,
    pub by_tag: BTreeMap<StreamTag, TagReport>,
}

pub fn ledger_report(ledger: &ResourceLedger) -> LedgerReport {
    let steps = ledger.n_steps();
    let per = |x: u64| if steps == 0 { 0.0 } else { x as f64 / steps as f64 };
    LedgerReport {
        steps,
        n_shot_total: ledger.n_shot_total,
        n_circuit_total: ledger.n_circuit_total,
        shots_per_step: per(ledger.n_shot_total),
        circuits_per_step: per(ledger.n_circuit_total),
        by_tag: ledger
            .by_tag
            .iter()
            .map(|(t, c)| {
                let r = TagReport {
                    shots: c.shots,
                    circuits: c.circuits,
                    shots_per_step: per(c.shots),
                    circuits_per_step: per(c.circuits),
                };
                (*t, r)
            })
            .collect(),
    }
}
