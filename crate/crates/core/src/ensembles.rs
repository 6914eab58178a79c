//! Monte Carlo experiments over random brickwork circuits.
//!
//! Each sample prepares `|0…0⟩`, optionally injects magic with Haar
//! unitaries on M, applies `depth` brickwork layers, optionally measures,
//! and evaluates the measures on the reduced state of A. Outcomes are
//! Born-weighted. Every sample draws from its own ChaCha stream derived from
//! the master seed, so results do not depend on the number of workers.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cliffordgen::random_clifford;
use crate::densesim::{
    brickwork_pairs, haar_operator, measure_region, von_neumann_entropy, DenseState, MeasureBasis,
    MeasureMode, Region, ENUMERATE_GUARD, MEMORY_GUARD, REGION_GUARD,
};
use crate::error::{Error, Result};
use crate::operator::DenseOperator;
use crate::phasespace::{moment_operator, sre_m2, wigner_table, MomentKind, PhaseSpace};
use crate::statmech::{predict, weingarten_matrix, Geometry, Permutation, Scenario};

/// Largest dimension `q^{|M|}` of a multi-qudit injection unitary.
pub const INJECTION_GUARD: u128 = 2187;
/// Deviations below this count as exact agreement.
pub const EXACT_TOL: f64 = 1e-9;
/// Largest replica count `2n` accepted by the exact oracle.
pub const ORACLE_REPLICA_GUARD: usize = 4;
/// Largest number of gates accepted by the exact oracle.
pub const ORACLE_GATE_GUARD: usize = 2;

/// Distribution of the two-qudit brickwork gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateEnsemble {
    Haar,
    Clifford,
    Identity,
}

/// How magic enters before the brickwork.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Injection {
    None,
    /// An independent Haar unitary on every site of M.
    SingleQudit,
    /// One Haar unitary on all of M.
    MultiQudit,
}

/// Treatment of measurement outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomePolicy {
    /// Enumerate when `q^{|R|}` is within the enumeration guard, else sample.
    #[default]
    Auto,
    Enumerate,
    Sample,
}

fn default_replicas() -> Vec<usize> {
    vec![1, 2]
}

fn default_samples() -> usize {
    100
}

/// One experiment. Optional fields fall back to the scenario's protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub q: u64,
    pub n_sites: usize,
    pub depth: usize,
    pub scenario: Scenario,
    pub region_a: Vec<usize>,
    #[serde(default)]
    pub region_m: Vec<usize>,
    /// Sites measured in the computational basis. Defaults to B for the
    /// concentration and teleportation scenarios and nothing otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measured: Option<Vec<usize>>,
    /// One entry for all layers or one entry per layer.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gates: Vec<GateEnsemble>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub injection: Option<Injection>,
    /// Replica indices `n` of the Wigner moments `W^(2n)`.
    #[serde(default = "default_replicas")]
    pub replicas: Vec<usize>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub outcome_policy: OutcomePolicy,
}

impl ExperimentConfig {
    /// The scenario's protocol on `geometry` with default options.
    pub fn new(q: u64, geometry: &Geometry, scenario: Scenario, samples: usize, seed: u64) -> Self {
        ExperimentConfig {
            q,
            n_sites: geometry.n_sites,
            depth: geometry.depth,
            scenario,
            region_a: geometry.region_a.clone(),
            region_m: geometry.region_m.clone(),
            measured: None,
            gates: Vec::new(),
            injection: None,
            replicas: default_replicas(),
            samples,
            seed,
            outcome_policy: OutcomePolicy::Auto,
        }
    }

    pub fn geometry(&self) -> Result<Geometry> {
        Geometry::new(self.n_sites, self.depth, &self.region_a, &self.region_m)
    }

    pub fn default_gates(&self) -> GateEnsemble {
        if self.scenario.is_haar() {
            GateEnsemble::Haar
        } else {
            GateEnsemble::Clifford
        }
    }

    pub fn default_injection(&self) -> Injection {
        match self.scenario {
            Scenario::HaarSubsystem | Scenario::Teleportation => Injection::None,
            Scenario::SingleQuditInjection | Scenario::Concentration => Injection::SingleQudit,
            Scenario::MultiQuditInjection | Scenario::CoherentInfo => Injection::MultiQudit,
        }
    }

    pub fn injection(&self) -> Injection {
        self.injection.unwrap_or_else(|| self.default_injection())
    }

    /// Ensemble of each layer.
    pub fn layer_gates(&self) -> Vec<GateEnsemble> {
        match self.gates.len() {
            0 => vec![self.default_gates(); self.depth],
            1 => vec![self.gates[0]; self.depth],
            _ => self.gates.clone(),
        }
    }

    /// Computational-basis measured region.
    pub fn measured_region(&self) -> Result<Region> {
        if let Some(m) = &self.measured {
            return Region::new(m);
        }
        match self.scenario {
            Scenario::Concentration | Scenario::Teleportation => self.geometry()?.b(self.scenario),
            _ => Ok(Region::empty()),
        }
    }

    /// Sites rotated by single-qudit Haar unitaries before measurement.
    pub fn haar_measured_region(&self) -> Result<Region> {
        if self.scenario == Scenario::Teleportation {
            Region::new(&self.region_m)
        } else {
            Ok(Region::empty())
        }
    }

    /// Whether the statmech prediction describes this protocol.
    pub fn follows_protocol(&self) -> bool {
        self.layer_gates().iter().all(|&g| g == self.default_gates())
            && self.injection() == self.default_injection()
            && self.measured.is_none()
    }

    /// Checks consistency and every size guard, before any sampling.
    pub fn validate(&self) -> Result<()> {
        let ps = PhaseSpace::new(self.q)?;
        let g = self.geometry()?;
        g.validate(self.scenario)?;
        if self.samples == 0 {
            return Err(Error::Validation("sample count must be at least 1".into()));
        }
        if self.replicas.is_empty() || self.replicas.contains(&0) {
            return Err(Error::Validation("replica indices must be at least 1".into()));
        }
        if self.gates.len() > 1 && self.gates.len() != self.depth {
            return Err(Error::Validation(format!(
                "{} gate ensembles given for {} layers",
                self.gates.len(),
                self.depth
            )));
        }
        if self.depth > 0 && self.n_sites < 2 {
            return Err(Error::Validation("brickwork needs at least two sites".into()));
        }
        let q = ps.q() as u128;
        let pow = |k: usize| q.checked_pow(k as u32).unwrap_or(u128::MAX);
        let m = g.m()?;
        let extra = if self.scenario == Scenario::CoherentInfo { m.len() } else { 0 };
        Error::guard("state amplitudes q^N", pow(self.n_sites + extra), MEMORY_GUARD)?;
        Error::guard("reduced density dimension q^|A|", pow(g.a()?.len()), REGION_GUARD)?;
        if self.injection() == Injection::MultiQudit {
            Error::guard("injection unitary dimension q^|M|", pow(m.len()), INJECTION_GUARD)?;
        }
        let measured = self.measured_region()?;
        measured.check(self.n_sites)?;
        let rotated = self.haar_measured_region()?;
        let all = measured.union(&rotated);
        if all.sites().iter().any(|&s| g.a().map(|a| a.contains(s)).unwrap_or(false)) {
            return Err(Error::Validation("measured sites must lie outside A".into()));
        }
        if self.outcome_policy == OutcomePolicy::Enumerate {
            Error::guard("measurement outcomes q^|R|", pow(all.len()), ENUMERATE_GUARD)?;
        }
        if self.scenario == Scenario::Concentration && self.measures_whole_state() {
            Error::guard("pre-measurement density q^N", pow(self.n_sites), REGION_GUARD)?;
        }
        Ok(())
    }

    fn measures_whole_state(&self) -> bool {
        self.measured_region()
            .map(|r| r.len() + self.region_a.len() == self.n_sites)
            .unwrap_or(false)
    }

    /// Outcome mode actually used.
    pub fn outcome_mode(&self) -> Result<MeasureMode> {
        let k = self.measured_region()?.union(&self.haar_measured_region()?).len();
        let needed = (self.q as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
        Ok(match self.outcome_policy {
            OutcomePolicy::Enumerate => MeasureMode::Enumerate,
            OutcomePolicy::Sample => MeasureMode::Sample,
            OutcomePolicy::Auto if needed <= ENUMERATE_GUARD => MeasureMode::Enumerate,
            OutcomePolicy::Auto => MeasureMode::Sample,
        })
    }

    /// Human-readable record of the resolved options.
    pub fn policy_flags(&self) -> Result<Vec<String>> {
        let mut flags = vec![
            "initial:zero".to_string(),
            "outcome_weighting:born".to_string(),
            "errors:jackknife".to_string(),
            format!("injection:{}", tag(&self.injection())),
        ];
        let gates: Vec<String> = self.layer_gates().iter().map(tag).collect();
        flags.push(format!("gates:{}", gates.join(",")));
        if self.layer_gates().contains(&GateEnsemble::Clifford) {
            flags.push("clifford_pauli_shift:uniform".into());
        }
        let measured = self.measured_region()?.union(&self.haar_measured_region()?);
        if !measured.is_empty() {
            let mode = match self.outcome_mode()? {
                MeasureMode::Enumerate => "enumerate",
                MeasureMode::Sample => "sample",
            };
            flags.push(format!("outcomes:{mode}"));
        }
        Ok(flags)
    }
}

fn tag<T: Serialize>(value: &T) -> String {
    match serde_json::to_value(value) {
        Ok(serde_json::Value::String(s)) => s,
        _ => "?".into(),
    }
}

/// One per-sample measure value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample_id: usize,
    pub seed: u64,
    pub measure: String,
    pub value: f64,
}

/// Aggregate of one measure over the samples. Means are in nats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub measure: String,
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
    pub seed: u64,
    pub policy: Vec<String>,
    pub prediction: Option<f64>,
    pub deviation_abs: Option<f64>,
    /// `|mean - prediction| / std_error`; zero below [`EXACT_TOL`] and
    /// absent when the error is zero and the values differ.
    pub deviation_sigma: Option<f64>,
}

impl EstimateRecord {
    fn with_prediction(mut self, prediction: Option<f64>) -> Self {
        self.prediction = prediction;
        if let Some(p) = prediction {
            let dev = (self.mean - p).abs();
            self.deviation_abs = Some(dev);
            self.deviation_sigma = if dev < EXACT_TOL {
                Some(0.0)
            } else if self.std_error > 0.0 {
                Some(dev / self.std_error)
            } else {
                None
            };
        }
        self
    }
}

/// Everything one run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub policy: Vec<String>,
    pub records: Vec<EstimateRecord>,
    pub samples: Vec<SampleRecord>,
}

impl RunReport {
    pub fn record(&self, measure: &str) -> Option<&EstimateRecord> {
        self.records.iter().find(|r| r.measure == measure)
    }

    /// Per-sample values of one measure, in sample order.
    pub fn values(&self, measure: &str) -> Vec<f64> {
        self.samples
            .iter()
            .filter(|s| s.measure == measure)
            .map(|s| s.value)
            .collect()
    }
}

/// Seed of sample `index`: the first word of ChaCha stream `index` under
/// the master seed.
pub fn sample_seed(master: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index as u64);
    rng.next_u64()
}

/// Jackknife estimate and standard error of `f` applied to column means.
/// For `f` the identity on one column this is the sample standard deviation
/// over `√count`.
pub fn jackknife<F>(columns: &[Vec<f64>], f: F) -> (f64, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let n = columns.first().map_or(0, Vec::len);
    let totals: Vec<f64> = columns.iter().map(|c| c.iter().sum()).collect();
    let means: Vec<f64> = totals.iter().map(|t| t / n as f64).collect();
    let estimate = f(&means);
    if n < 2 {
        return (estimate, 0.0);
    }
    let leave_out: Vec<f64> = (0..n)
        .map(|i| {
            let m: Vec<f64> = columns
                .iter()
                .zip(&totals)
                .map(|(c, t)| (t - c[i]) / (n - 1) as f64)
                .collect();
            f(&m)
        })
        .collect();
    let bar = leave_out.iter().sum::<f64>() / n as f64;
    let var = leave_out.iter().map(|x| (x - bar).powi(2)).sum::<f64>() * (n - 1) as f64 / n as f64;
    (estimate, var.sqrt())
}

/// Measures of one reduced state. The moment entries follow the replica
/// list of the config.
#[derive(Debug, Clone, PartialEq)]
pub struct StateMeasures {
    pub one_norm: f64,
    pub mana: f64,
    pub sre_m2: f64,
    pub entropy: f64,
    pub wigner_moments: Vec<f64>,
}

/// `Z_n = d^{2n-1} Σ_u |W(u)|^{2n}` for every `n` in `replicas`, plus the
/// other measures of `rho`.
pub fn state_measures(ps: &PhaseSpace, rho: &DenseOperator, replicas: &[usize]) -> Result<StateMeasures> {
    let table = wigner_table(ps, rho)?;
    let d = rho.dim() as f64;
    let m = table.measures();
    Ok(StateMeasures {
        one_norm: m.one_norm,
        mana: m.mana,
        sre_m2: sre_m2(ps, rho)?,
        entropy: von_neumann_entropy(rho),
        wigner_moments: replicas
            .iter()
            .map(|&n| d.powi(2 * n as i32 - 1) * table.renyi_moment(n as f64))
            .collect(),
    })
}

/// `I_c = S(A) - S(AR)` for a state whose reference qudits follow the
/// first `n_system` sites.
pub fn coherent_information(state: &DenseState, n_system: usize, region_a: &Region) -> Result<f64> {
    let refs: Vec<usize> = (n_system..state.n_sites()).collect();
    let ar = region_a.union(&Region::new(&refs)?);
    Ok(pure_entropy(state, region_a)? - pure_entropy(state, &ar)?)
}

/// Entropy of a region of a pure state, from whichever side is smaller.
fn pure_entropy(state: &DenseState, region: &Region) -> Result<f64> {
    let rest = region.complement(state.n_sites());
    let side = if rest.len() < region.len() { &rest } else { region };
    if side.is_empty() {
        return Ok(0.0);
    }
    Ok(von_neumann_entropy(&state.reduced_density(side)?))
}

fn measure_names(cfg: &ExperimentConfig) -> Vec<String> {
    let mut names: Vec<String> = ["one_norm", "mana", "sre_m2", "entropy_a"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    names.extend(cfg.replicas.iter().map(|n| format!("wigner_moment_{n}")));
    if cfg.scenario == Scenario::Concentration && cfg.measures_whole_state() {
        names.push("pre_measurement_one_norm".into());
    }
    if cfg.scenario == Scenario::CoherentInfo {
        names.push("coherent_info".into());
    }
    names
}

fn draw_gate(ps: &PhaseSpace, ensemble: GateEnsemble, rng: &mut ChaCha8Rng) -> Result<DenseOperator> {
    match ensemble {
        GateEnsemble::Haar => haar_operator(rng, ps.q(), 2),
        GateEnsemble::Clifford => Ok(random_clifford(ps, 2, rng).unitary().clone()),
        GateEnsemble::Identity => DenseOperator::identity(ps.q(), 2),
    }
}

/// Values of `measure_names(cfg)` for one sample.
fn run_sample(cfg: &ExperimentConfig, ps: &PhaseSpace, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = cfg.q;
    let m = Region::new(&cfg.region_m)?;
    let a = Region::new(&cfg.region_a)?;
    let mut state = DenseState::zero(q, cfg.n_sites)?;
    match cfg.injection() {
        Injection::None => {}
        Injection::SingleQudit => {
            for &s in m.sites() {
                state.apply_gate(&haar_operator(&mut rng, q, 1)?, &[s])?;
            }
        }
        Injection::MultiQudit => {
            if !m.is_empty() {
                state.apply_gate(&haar_operator(&mut rng, q, m.len())?, m.sites())?;
            }
        }
    }
    let mut circuit = Vec::with_capacity(cfg.depth);
    for (layer, ens) in cfg.layer_gates().into_iter().enumerate() {
        for (i, j) in brickwork_pairs(cfg.n_sites, layer) {
            circuit.push((draw_gate(ps, ens, &mut rng)?, i, j));
        }
    }
    for (g, i, j) in &circuit {
        state.apply_two_qudit_gate(g, *i, *j)?;
    }

    let pre_norm = if cfg.scenario == Scenario::Concentration && cfg.measures_whole_state() {
        let all = Region::range(0, cfg.n_sites);
        Some(wigner_table(ps, &state.reduced_density(&all)?)?.one_norm())
    } else {
        None
    };

    let rotated = cfg.haar_measured_region()?;
    for &s in rotated.sites() {
        state.apply_gate(&haar_operator(&mut rng, q, 1)?, &[s])?;
    }
    let measured = cfg.measured_region()?.union(&rotated);
    let outcomes: Vec<(f64, DenseState)> = if measured.is_empty() {
        vec![(1.0, state)]
    } else {
        measure_region(
            &state,
            &measured,
            cfg.outcome_mode()?,
            MeasureBasis::Computational,
            &mut rng,
        )?
        .into_iter()
        .map(|o| (o.probability, o.post_state))
        .collect()
    };
    // Sampled outcomes are already Born-distributed; enumerated ones carry
    // their probabilities.
    let total: f64 = outcomes.iter().map(|o| o.0).sum();
    let mut acc = vec![0.0; 4 + cfg.replicas.len()];
    for (p, post) in &outcomes {
        let w = p / total;
        let sm = state_measures(ps, &post.reduced_density(&a)?, &cfg.replicas)?;
        let vals = [sm.one_norm, sm.mana, sm.sre_m2, sm.entropy]
            .into_iter()
            .chain(sm.wigner_moments);
        for (slot, v) in acc.iter_mut().zip(vals) {
            *slot += w * v;
        }
    }
    acc.extend(pre_norm);
    if cfg.scenario == Scenario::CoherentInfo {
        let mut extended = DenseState::zero(q, cfg.n_sites)?.attach_reference(&m)?;
        for (g, i, j) in &circuit {
            extended.apply_two_qudit_gate(g, *i, *j)?;
        }
        acc.push(coherent_information(&extended, cfg.n_sites, &a)?);
    }
    Ok(acc)
}

/// Runs the experiment described by `cfg`.
pub fn run_scenario(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let ps = PhaseSpace::new(cfg.q)?;
    let names = measure_names(cfg);
    let seeds: Vec<u64> = (0..cfg.samples).map(|i| sample_seed(cfg.seed, i)).collect();
    let per_sample: Vec<Vec<f64>> = seeds
        .par_iter()
        .map(|&s| run_sample(cfg, &ps, s))
        .collect::<Result<_>>()?;
    let mut samples = Vec::with_capacity(cfg.samples * names.len());
    for (id, (vals, &seed)) in per_sample.iter().zip(&seeds).enumerate() {
        for (name, &value) in names.iter().zip(vals) {
            samples.push(SampleRecord {
                sample_id: id,
                seed,
                measure: name.clone(),
                value,
            });
        }
    }
    let columns: Vec<Vec<f64>> = (0..names.len())
        .map(|k| per_sample.iter().map(|v| v[k]).collect())
        .collect();
    let policy = cfg.policy_flags()?;
    let record = |measure: &str, (mean, se): (f64, f64)| EstimateRecord {
        measure: measure.to_string(),
        mean,
        std_error: se,
        count: cfg.samples,
        seed: cfg.seed,
        policy: policy.clone(),
        prediction: None,
        deviation_abs: None,
        deviation_sigma: None,
    };

    let prediction = if cfg.follows_protocol() {
        Some(predict(&cfg.geometry()?, cfg.scenario)?)
    } else {
        None
    };
    let ln_q = (cfg.q as f64).ln();
    let mut records = Vec::new();
    for (k, name) in names.iter().enumerate() {
        let est = jackknife(&columns[k..=k], |m| m[0]);
        let pred = prediction.as_ref().and_then(|p| match name.as_str() {
            "mana" => Some(p.mana * ln_q),
            "entropy_a" => p.entropy_a.map(|e| e * ln_q),
            "coherent_info" => p.coherent_info.map(|c| c * ln_q),
            _ => None,
        });
        records.push(record(name, est).with_prediction(pred));
    }
    let norm_col = &columns[0];
    let log_col: Vec<f64> = norm_col.iter().map(|x| x.ln()).collect();
    let pair = [norm_col.clone(), log_col];
    records.push(record("annealed_mana", jackknife(&pair[..1], |m| m[0].ln())));
    records.push(record(
        "quenched_annealed_gap",
        jackknife(&pair, |m| m[0].ln() - m[1]),
    ));
    Ok(RunReport {
        config: cfg.clone(),
        policy,
        records,
        samples,
    })
}

/// Quenched and annealed averages of the Wigner one-norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuenchedAnnealed {
    /// `E ln ‖ρ_A‖_W`.
    pub quenched: f64,
    /// `ln E ‖ρ_A‖_W`.
    pub annealed: f64,
    /// `annealed - quenched`, non-negative by concavity of the logarithm.
    pub gap: f64,
    pub gap_error: f64,
}

pub fn quenched_vs_annealed(cfg: &ExperimentConfig) -> Result<QuenchedAnnealed> {
    let report = run_scenario(cfg)?;
    quenched_vs_annealed_from(&report)
}

pub fn quenched_vs_annealed_from(report: &RunReport) -> Result<QuenchedAnnealed> {
    let get = |m: &str| {
        report
            .record(m)
            .ok_or_else(|| Error::Numerical(format!("run has no {m} record")))
    };
    let quenched = get("mana")?.mean;
    let annealed = get("annealed_mana")?.mean;
    let gap = get("quenched_annealed_gap")?;
    Ok(QuenchedAnnealed {
        quenched,
        annealed,
        gap: gap.mean,
        gap_error: gap.std_error,
    })
}

/// Coherent information record of a config whose M is entangled with a
/// reference.
pub fn coherent_info_experiment(cfg: &ExperimentConfig) -> Result<EstimateRecord> {
    let mut c = cfg.clone();
    if c.scenario != Scenario::CoherentInfo {
        c.scenario = Scenario::CoherentInfo;
        c.injection.get_or_insert(cfg.injection());
        if c.gates.is_empty() {
            c.gates = vec![cfg.default_gates()];
        }
    }
    let report = run_scenario(&c)?;
    report
        .record("coherent_info")
        .cloned()
        .ok_or_else(|| Error::Numerical("coherent information missing".into()))
}

/// Operator of the permutation `σ` on `k` copies of a `d`-level system,
/// `P_σ |x_0 … x_{k-1}⟩ = |x_{σ⁻¹(0)} … x_{σ⁻¹(k-1)}⟩`.
fn permutation_operator(d: usize, sigma: &Permutation) -> DMatrix<f64> {
    let k = sigma.len();
    let dim = d.pow(k as u32);
    let mut p = DMatrix::zeros(dim, dim);
    let mut digits = vec![0; k];
    let mut out = vec![0; k];
    for x in 0..dim {
        let mut r = x;
        for slot in digits.iter_mut().rev() {
            *slot = r % d;
            r /= d;
        }
        for (i, &xi) in digits.iter().enumerate() {
            out[sigma.apply(i)] = xi;
        }
        let y = out.iter().fold(0, |acc, &v| acc * d + v);
        p[(y, x)] = 1.0;
    }
    p
}

/// Exact circuit average of `Z_n = d_A^{2n-1} Σ_u |W(u)|^{2n}` for a single
/// brickwork layer on `|0…0⟩`, by summing the Weingarten expansion over all
/// spin pairs of each gate. The state factorizes over gates and idle
/// sites, so the average is a product of per-gate sums.
pub fn exact_small_circuit_oracle(
    q: u64,
    n_sites: usize,
    depth: usize,
    region_a: &Region,
    ensemble: GateEnsemble,
    n: usize,
) -> Result<f64> {
    let ps = PhaseSpace::new(q)?;
    region_a.check(n_sites)?;
    Error::guard("oracle replicas 2n", 2 * n as u128, ORACLE_REPLICA_GUARD as u128)?;
    Error::guard("oracle depth", depth as u128, 1)?;
    let pairs = if depth == 1 {
        brickwork_pairs(n_sites, 0)
    } else {
        Vec::new()
    };
    Error::guard("oracle gates", pairs.len() as u128, ORACLE_GATE_GUARD as u128)?;
    if ensemble == GateEnsemble::Clifford && n > 1 {
        return Err(Error::Validation(
            "the oracle averages Clifford gates only at two replicas".into(),
        ));
    }
    let k = 2 * n;
    // Per-site replica operator A^(2n)/q.
    let site_op = moment_operator(&ps, MomentKind::PhasePoint, n)?
        .matrix()
        .map(|z| z / q as f64);
    let zero_moment = site_op[(0, 0)].re;
    let mut value = 1.0;
    let mut covered = vec![false; n_sites];
    for &(i, j) in &pairs {
        covered[i] = true;
        covered[j] = true;
        let in_a = [i, j].iter().filter(|&&s| region_a.contains(s)).count();
        value *= match ensemble {
            GateEnsemble::Identity => zero_moment.powi(in_a as i32),
            _ => gate_average(q, k, &site_op, in_a)?,
        };
    }
    for s in 0..n_sites {
        if !covered[s] && region_a.contains(s) {
            value *= zero_moment;
        }
    }
    Ok(value)
}

/// `E Tr[(O^{⊗in_a} ⊗ I) (UρU†)^{⊗k}]` for a Haar two-qudit gate on a pure
/// product input: `Σ_{σ,τ} Wg(σ,τ) Tr[O P_σ]^{in_a} (q^{#σ})^{2-in_a}`.
fn gate_average(q: u64, k: usize, site_op: &DMatrix<Complex64>, in_a: usize) -> Result<f64> {
    let hw = weingarten_matrix(k, q * q)?;
    let mut total = 0.0;
    for (s, sigma) in hw.perms.iter().enumerate() {
        let p = permutation_operator(q as usize, sigma);
        let tr: Complex64 = site_op
            .iter()
            .zip(p.transpose().iter())
            .map(|(a, b)| a * b)
            .sum();
        let factor = tr.re.powi(in_a as i32) * (q as f64).powi((sigma.cycles() * (2 - in_a)) as i32);
        let row: f64 = (0..hw.perms.len()).map(|t| hw.wg[(s, t)]).sum();
        total += row * factor;
    }
    Ok(total)
}
