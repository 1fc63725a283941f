//! Sequential evaporation cascades.
//!
//! Energy is quantized in units of `ε`; the mass after `k` remaining units is
//! `stop_mass + k·ε`, recomputed from the integer count at every step so
//! conservation bookkeeping is exact. Charge and angular-momentum moves, when
//! enabled, are integer multiples of their own quanta.
//!
//! Each step carries two numbers: the raw entropy-difference weight
//! `ln Γ = S(after) − S(before)` and the log-probability under the per-step
//! normalized distribution the sampler actually draws from.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::logspace::{logsumexp, neumaier_sum, plogp_from_log};
use crate::models::{extremal_mass, BlackHoleState, Emission, Family, Hairs, Remnant};
use crate::spectrum::emission_log_weight;

/// Largest number of energy quanta [`enumerate_chains`] accepts.
pub const MAX_ENUMERATION_QUANTA: u64 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    #[default]
    UnitSumPerStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadePolicy {
    pub energy_quantum: f64,
    pub stop_mass: f64,
    #[serde(default)]
    pub sampling: Sampling,
    pub max_steps: usize,
    /// Charge quantum; charge moves are `k · charge_quantum`, `|k| ≤ charge_moves`.
    #[serde(default = "one")]
    pub charge_quantum: f64,
    #[serde(default)]
    pub charge_moves: u32,
    #[serde(default = "one")]
    pub spin_quantum: f64,
    #[serde(default)]
    pub spin_moves: u32,
}

fn one() -> f64 {
    1.0
}

impl CascadePolicy {
    /// Energy-only policy with enough steps for total evaporation.
    pub fn energy_only(state: &BlackHoleState, energy_quantum: f64, stop_mass: f64) -> Self {
        let max_steps = (state.mass() / energy_quantum).ceil().max(0.0) as usize;
        CascadePolicy {
            energy_quantum,
            stop_mass,
            sampling: Sampling::UnitSumPerStep,
            max_steps,
            charge_quantum: 1.0,
            charge_moves: 0,
            spin_quantum: 1.0,
            spin_moves: 0,
        }
    }

    /// 0 for Schwarzschild, otherwise the extremal mass for the hole's `Q`, `J`.
    pub fn default_stop_mass(state: &BlackHoleState) -> f64 {
        match state.family() {
            Family::Schwarzschild => 0.0,
            _ => extremal_mass(state.charge(), state.angular_momentum()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Every quantum radiated down to `M = 0`.
    Exhausted,
    /// Reached a positive stopping mass.
    StopMass,
    MaxSteps,
}

/// Integer description of an emission: energy units and charge/spin quanta.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Quanta {
    pub units: u64,
    pub charge: i64,
    pub spin: i64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainStep {
    pub emission: Emission,
    pub quanta: Quanta,
    pub mass_before: f64,
    pub state_after: Remnant,
    /// `S(after) − S(before)`, nats.
    pub step_log_weight: f64,
    /// Log-probability under the per-step normalized distribution.
    pub step_log_prob: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmissionChain {
    pub initial: BlackHoleState,
    pub steps: Vec<ChainStep>,
    pub terminated: Termination,
}

impl EmissionChain {
    pub fn final_remnant(&self) -> Remnant {
        self.steps
            .last()
            .map(|s| s.state_after)
            .unwrap_or(Remnant::Hole(self.initial))
    }

    pub fn identity(&self) -> Vec<Quanta> {
        self.steps.iter().map(|s| s.quanta).collect()
    }

    pub fn is_complete(&self) -> bool {
        matches!(self.terminated, Termination::Exhausted | Termination::StopMass)
    }

    /// Hairs radiated over the whole chain.
    pub fn emitted(&self) -> Hairs {
        self.steps
            .iter()
            .fold(Hairs::ZERO, |acc, s| acc + s.emission.as_hairs())
    }
}

/// `(raw, normalized)` chain log-probabilities.
pub fn chain_log_probability(chain: &EmissionChain) -> (f64, f64) {
    (
        neumaier_sum(chain.steps.iter().map(|s| s.step_log_weight)),
        neumaier_sum(chain.steps.iter().map(|s| s.step_log_prob)),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Position {
    units: u64,
    charge: i64,
    spin: i64,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    quanta: Quanta,
    emission: Emission,
    log_weight: f64,
    log_prob: f64,
}

/// A validated (state, policy) pair with integer bookkeeping.
#[derive(Debug, Clone)]
pub struct Cascade {
    initial: BlackHoleState,
    policy: CascadePolicy,
    units: u64,
}

impl Cascade {
    pub fn new(initial: BlackHoleState, policy: CascadePolicy) -> Result<Self> {
        let p = &policy;
        if !(p.energy_quantum.is_finite() && p.energy_quantum > 0.0) {
            return Err(Error::Usage(format!("energy quantum {} must be > 0", p.energy_quantum)));
        }
        if !(p.stop_mass.is_finite() && p.stop_mass >= 0.0) {
            return Err(Error::Usage(format!("stop mass {} must be ≥ 0", p.stop_mass)));
        }
        if p.stop_mass > initial.mass() {
            return Err(Error::Usage(format!(
                "stop mass {} exceeds the initial mass {}",
                p.stop_mass,
                initial.mass()
            )));
        }
        if initial.alpha() != 0.0 && p.stop_mass <= 0.0 {
            return Err(Error::Usage(
                "a log-corrected entropy (alpha ≠ 0) diverges at M = 0; set stop mass > 0".into(),
            ));
        }
        let ratio = (initial.mass() - p.stop_mass) / p.energy_quantum;
        let units = ratio.round();
        if (ratio - units).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::Usage(format!(
                "M − stop_mass = {} is not an integer multiple of ε = {}",
                initial.mass() - p.stop_mass,
                p.energy_quantum
            )));
        }
        let needed = (initial.mass() / p.energy_quantum).ceil() as usize;
        if p.max_steps < needed.max(1) {
            return Err(Error::Usage(format!(
                "max_steps = {} is below ceil(M/ε) = {needed}",
                p.max_steps
            )));
        }
        if p.charge_moves > 0 {
            if !initial.family().carries_charge() {
                return Err(Error::Usage(format!("{} holes have no charge moves", initial.family())));
            }
            if !(p.charge_quantum.is_finite() && p.charge_quantum > 0.0) {
                return Err(Error::Usage("charge quantum must be > 0".into()));
            }
        }
        if p.spin_moves > 0 {
            if !initial.family().carries_spin() {
                return Err(Error::Usage(format!(
                    "{} holes have no angular-momentum moves",
                    initial.family()
                )));
            }
            if !(p.spin_quantum.is_finite() && p.spin_quantum > 0.0) {
                return Err(Error::Usage("angular-momentum quantum must be > 0".into()));
            }
        }
        Ok(Cascade {
            initial,
            policy,
            units: units as u64,
        })
    }

    pub fn initial(&self) -> &BlackHoleState {
        &self.initial
    }

    pub fn policy(&self) -> &CascadePolicy {
        &self.policy
    }

    /// `(M − stop_mass) / ε`.
    pub fn units(&self) -> u64 {
        self.units
    }

    fn start(&self) -> Position {
        Position {
            units: self.units,
            charge: 0,
            spin: 0,
        }
    }

    fn mass_at(&self, units: u64) -> f64 {
        if units == self.units {
            self.initial.mass()
        } else {
            self.policy.stop_mass + units as f64 * self.policy.energy_quantum
        }
    }

    fn remnant_at(&self, pos: Position) -> Result<Remnant> {
        let hairs = Hairs::new(
            self.mass_at(pos.units),
            self.initial.charge() - pos.charge as f64 * self.policy.charge_quantum,
            self.initial.angular_momentum() - pos.spin as f64 * self.policy.spin_quantum,
        );
        if hairs == Hairs::ZERO && self.initial.alpha() == 0.0 {
            return Ok(Remnant::Evaporated);
        }
        BlackHoleState::from_hairs(self.initial.family(), hairs, self.initial.alpha())
            .map(Remnant::Hole)
            .map_err(|e| Error::RemnantInvalid(e.to_string()))
    }

    fn candidates(&self, pos: Position) -> Result<Vec<Candidate>> {
        let state = match self.remnant_at(pos)? {
            Remnant::Hole(s) => s,
            Remnant::Evaporated => return Ok(Vec::new()),
        };
        let cm = self.policy.charge_moves as i64;
        let sm = self.policy.spin_moves as i64;
        let mut out = Vec::new();
        for units in 1..=pos.units {
            for dq in -cm..=cm {
                for dj in -sm..=sm {
                    let emission = Emission {
                        omega: units as f64 * self.policy.energy_quantum,
                        q: dq as f64 * self.policy.charge_quantum,
                        j: dj as f64 * self.policy.spin_quantum,
                    };
                    let next = Position {
                        units: pos.units - units,
                        charge: pos.charge + dq,
                        spin: pos.spin + dj,
                    };
                    if self.remnant_at(next).is_err() {
                        continue;
                    }
                    match emission_log_weight(&state, &emission) {
                        Ok(lw) => out.push(Candidate {
                            quanta: Quanta {
                                units,
                                charge: dq,
                                spin: dj,
                            },
                            emission,
                            log_weight: lw,
                            log_prob: 0.0,
                        }),
                        Err(Error::RemnantInvalid(_)) => {}
                        Err(e) => return Err(e),
                    }
                }
            }
        }
        let lws: Vec<f64> = out.iter().map(|c| c.log_weight).collect();
        let z = logsumexp(&lws);
        for c in &mut out {
            c.log_prob = c.log_weight - z;
        }
        Ok(out)
    }

    fn step_to(&self, pos: Position, c: &Candidate) -> Result<(Position, ChainStep)> {
        let next = Position {
            units: pos.units - c.quanta.units,
            charge: pos.charge + c.quanta.charge,
            spin: pos.spin + c.quanta.spin,
        };
        let step = ChainStep {
            emission: c.emission,
            quanta: c.quanta,
            mass_before: self.mass_at(pos.units),
            state_after: self.remnant_at(next)?,
            step_log_weight: c.log_weight,
            step_log_prob: c.log_prob,
        };
        Ok((next, step))
    }

    fn termination(&self) -> Termination {
        if self.policy.stop_mass == 0.0 {
            Termination::Exhausted
        } else {
            Termination::StopMass
        }
    }

    /// Per-step normalized distribution of the first emission, by quanta.
    pub fn first_step_distribution(&self) -> Result<Vec<(Quanta, f64)>> {
        Ok(self
            .candidates(self.start())?
            .into_iter()
            .map(|c| (c.quanta, c.log_prob.exp()))
            .collect())
    }

    /// Draw one cascade. The random stream is a pure function of
    /// `(seed, sample_index)`.
    pub fn sample(&self, seed: u64, sample_index: u64) -> Result<EmissionChain> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(sample_index);
        let mut pos = self.start();
        let mut steps = Vec::new();
        let terminated = loop {
            if pos.units == 0 {
                break self.termination();
            }
            if steps.len() >= self.policy.max_steps {
                break Termination::MaxSteps;
            }
            let cands = self.candidates(pos)?;
            if cands.is_empty() {
                return Err(Error::SimulationStuck(format!(
                    "no admissible emission at M = {} (stop mass {}) after {} steps",
                    self.mass_at(pos.units),
                    self.policy.stop_mass,
                    steps.len()
                )));
            }
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut pick = cands.len() - 1;
            for (i, c) in cands.iter().enumerate() {
                acc += c.log_prob.exp();
                if u < acc {
                    pick = i;
                    break;
                }
            }
            let (next, step) = self.step_to(pos, &cands[pick])?;
            steps.push(step);
            pos = next;
        };
        Ok(EmissionChain {
            initial: self.initial,
            steps,
            terminated,
        })
    }

    /// Every complete cascade, depth first in increasing emission order.
    pub fn enumerate(&self) -> Result<Vec<EnumeratedChain>> {
        if self.units > MAX_ENUMERATION_QUANTA {
            return Err(Error::Usage(format!(
                "enumeration limited to n ≤ {MAX_ENUMERATION_QUANTA} quanta, got {}",
                self.units
            )));
        }
        let mut memo: HashMap<Position, Vec<Candidate>> = HashMap::new();
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.enumerate_from(self.start(), &mut memo, &mut path, 0.0, 0.0, &mut out)?;
        Ok(out)
    }

    fn enumerate_from(
        &self,
        pos: Position,
        memo: &mut HashMap<Position, Vec<Candidate>>,
        path: &mut Vec<Quanta>,
        raw: f64,
        normalized: f64,
        out: &mut Vec<EnumeratedChain>,
    ) -> Result<()> {
        if pos.units == 0 {
            out.push(EnumeratedChain {
                quanta: path.clone(),
                raw_log_prob: raw,
                normalized_log_prob: normalized,
            });
            return Ok(());
        }
        if !memo.contains_key(&pos) {
            let c = self.candidates(pos)?;
            memo.insert(pos, c);
        }
        let cands = memo[&pos].clone();
        if cands.is_empty() {
            return Err(Error::SimulationStuck(format!(
                "no admissible emission at M = {}",
                self.mass_at(pos.units)
            )));
        }
        for c in cands {
            let next = Position {
                units: pos.units - c.quanta.units,
                charge: pos.charge + c.quanta.charge,
                spin: pos.spin + c.quanta.spin,
            };
            path.push(c.quanta);
            self.enumerate_from(next, memo, path, raw + c.log_weight, normalized + c.log_prob, out)?;
            path.pop();
        }
        Ok(())
    }

    /// Rebuild the full chain for a sequence of emission quanta.
    pub fn replay(&self, quanta: &[Quanta]) -> Result<EmissionChain> {
        let mut pos = self.start();
        let mut steps = Vec::with_capacity(quanta.len());
        for q in quanta {
            let cands = self.candidates(pos)?;
            let c = cands
                .iter()
                .find(|c| c.quanta == *q)
                .ok_or_else(|| Error::Usage(format!("emission {q:?} is not admissible here")))?;
            let (next, step) = self.step_to(pos, c)?;
            steps.push(step);
            pos = next;
        }
        let terminated = if pos.units == 0 {
            self.termination()
        } else {
            Termination::MaxSteps
        };
        Ok(EmissionChain {
            initial: self.initial,
            steps,
            terminated,
        })
    }
}

/// Compact result of [`enumerate_chains`]; use [`Cascade::replay`] for the
/// full chain.
#[derive(Debug, Clone, PartialEq)]
pub struct EnumeratedChain {
    pub quanta: Vec<Quanta>,
    pub raw_log_prob: f64,
    pub normalized_log_prob: f64,
}

pub fn sample_cascade(
    state: &BlackHoleState,
    policy: &CascadePolicy,
    seed: u64,
    sample_index: u64,
) -> Result<EmissionChain> {
    Cascade::new(*state, *policy)?.sample(seed, sample_index)
}

/// Exhaustive enumeration of every ordered emission sequence (for energy-only
/// cascades, every composition of `n = (M − stop)/ε`).
pub fn enumerate_chains(state: &BlackHoleState, policy: &CascadePolicy) -> Result<Vec<EnumeratedChain>> {
    Cascade::new(*state, *policy)?.enumerate()
}

/// Draw `n_samples` chains in parallel. Output order is sample order.
pub fn sample_ensemble(
    state: &BlackHoleState,
    policy: &CascadePolicy,
    n_samples: u64,
    seed: u64,
) -> Result<Vec<EmissionChain>> {
    let cascade = Cascade::new(*state, *policy)?;
    (0..n_samples)
        .into_par_iter()
        .map(|i| cascade.sample(seed, i))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstEmissionBin {
    pub quanta: Quanta,
    pub count: u64,
    pub empirical: f64,
    pub expected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleReport {
    pub n_samples: u64,
    pub seed: u64,
    pub chain_lengths: Vec<usize>,
    pub mean_chain_length: f64,
    pub first_emission: Vec<FirstEmissionBin>,
    /// Shannon entropy of sampled chain identities; only for `n ≤ 20`.
    pub chain_identity_entropy: Option<f64>,
    pub distinct_chains: usize,
    pub mean_log_prob_normalized: f64,
    pub mean_log_weight_raw: f64,
    /// `S(final) − S(initial)` of the first chain.
    pub telescoped_total: f64,
    pub max_telescoping_residual: f64,
    pub max_energy_conservation_residual: f64,
}

struct ChainSummary {
    identity: Vec<Quanta>,
    len: usize,
    raw: f64,
    normalized: f64,
    telescoped: f64,
    residual: f64,
    energy_residual: f64,
}

fn summarize(chain: &EmissionChain) -> ChainSummary {
    let (raw, normalized) = chain_log_probability(chain);
    let telescoped = chain.final_remnant().entropy() - chain.initial.entropy();
    let emitted = chain.emitted().mass;
    let lost = chain.initial.mass() - chain.final_remnant().hairs().mass;
    ChainSummary {
        identity: chain.identity(),
        len: chain.steps.len(),
        raw,
        normalized,
        telescoped,
        residual: (raw - telescoped).abs(),
        energy_residual: (emitted - lost).abs(),
    }
}

/// Sample an ensemble and reduce it to summary statistics.
pub fn cascade_ensemble_stats(
    state: &BlackHoleState,
    policy: &CascadePolicy,
    n_samples: u64,
    seed: u64,
) -> Result<EnsembleReport> {
    if n_samples == 0 {
        return Err(Error::Usage("ensemble needs at least one sample".into()));
    }
    let cascade = Cascade::new(*state, *policy)?;
    let summaries: Vec<ChainSummary> = (0..n_samples)
        .into_par_iter()
        .map(|i| cascade.sample(seed, i).map(|c| summarize(&c)))
        .collect::<Result<_>>()?;
    let first = cascade.first_step_distribution()?;
    Ok(report_from(&cascade, summaries, first, seed))
}

/// Statistics for an already-sampled ensemble.
pub fn ensemble_report(
    state: &BlackHoleState,
    policy: &CascadePolicy,
    chains: &[EmissionChain],
    seed: u64,
) -> Result<EnsembleReport> {
    if chains.is_empty() {
        return Err(Error::Usage("ensemble needs at least one sample".into()));
    }
    let cascade = Cascade::new(*state, *policy)?;
    let summaries = chains.iter().map(summarize).collect();
    let first = cascade.first_step_distribution()?;
    Ok(report_from(&cascade, summaries, first, seed))
}

fn report_from(
    cascade: &Cascade,
    summaries: Vec<ChainSummary>,
    first: Vec<(Quanta, f64)>,
    seed: u64,
) -> EnsembleReport {
    let n = summaries.len() as u64;
    let nf = n as f64;
    let mut first_counts: BTreeMap<Quanta, u64> = BTreeMap::new();
    let mut identities: BTreeMap<&[Quanta], u64> = BTreeMap::new();
    for s in &summaries {
        if let Some(q) = s.identity.first() {
            *first_counts.entry(*q).or_default() += 1;
        }
        *identities.entry(s.identity.as_slice()).or_default() += 1;
    }
    let first_emission = first
        .iter()
        .map(|(q, p)| {
            let count = first_counts.get(q).copied().unwrap_or(0);
            FirstEmissionBin {
                quanta: *q,
                count,
                empirical: count as f64 / nf,
                expected: *p,
            }
        })
        .collect();
    let chain_identity_entropy = (cascade.units() <= MAX_ENUMERATION_QUANTA).then(|| {
        -neumaier_sum(
            identities
                .values()
                .map(|&c| plogp_from_log((c as f64 / nf).ln())),
        )
    });
    EnsembleReport {
        n_samples: n,
        seed,
        mean_chain_length: neumaier_sum(summaries.iter().map(|s| s.len as f64)) / nf,
        chain_lengths: summaries.iter().map(|s| s.len).collect(),
        first_emission,
        chain_identity_entropy,
        distinct_chains: identities.len(),
        mean_log_prob_normalized: neumaier_sum(summaries.iter().map(|s| s.normalized)) / nf,
        mean_log_weight_raw: neumaier_sum(summaries.iter().map(|s| s.raw)) / nf,
        telescoped_total: summaries[0].telescoped,
        max_telescoping_residual: summaries.iter().map(|s| s.residual).fold(0.0, f64::max),
        max_energy_conservation_residual: summaries
            .iter()
            .map(|s| s.energy_residual)
            .fold(0.0, f64::max),
    }
}

/// Pearson χ² goodness of fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

/// χ² test of observed category counts against expected probabilities.
/// Categories with expected count below 5 are pooled into one.
pub fn chi_square_test(observed: &[u64], expected_prob: &[f64]) -> Result<ChiSquareTest> {
    if observed.len() != expected_prob.len() || observed.is_empty() {
        return Err(Error::Usage("χ² needs matching, non-empty category lists".into()));
    }
    let n: u64 = observed.iter().sum();
    let nf = n as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(expected_prob) {
        let e = p * nf;
        if e < 5.0 {
            pooled.0 += o as f64;
            pooled.1 += e;
        } else {
            cells.push((o as f64, e));
        }
    }
    if pooled.1 > 0.0 {
        cells.push(pooled);
    }
    if cells.len() < 2 {
        return Err(Error::Usage("χ² needs at least two categories after pooling".into()));
    }
    let statistic = neumaier_sum(cells.iter().map(|(o, e)| (o - e) * (o - e) / e));
    let dof = cells.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Numerical(e.to_string()))?;
    Ok(ChiSquareTest {
        statistic,
        degrees_of_freedom: dof,
        p_value: 1.0 - dist.cdf(statistic),
    })
}

/// χ² of sampled chain identities against the exhaustive enumeration.
pub fn sampler_chi_square(
    state: &BlackHoleState,
    policy: &CascadePolicy,
    n_samples: u64,
    seed: u64,
) -> Result<ChiSquareTest> {
    let cascade = Cascade::new(*state, *policy)?;
    let chains = cascade.enumerate()?;
    let index: HashMap<&[Quanta], usize> = chains
        .iter()
        .enumerate()
        .map(|(i, c)| (c.quanta.as_slice(), i))
        .collect();
    let ids: Vec<Vec<Quanta>> = (0..n_samples)
        .into_par_iter()
        .map(|i| cascade.sample(seed, i).map(|c| c.identity()))
        .collect::<Result<_>>()?;
    let mut counts = vec![0u64; chains.len()];
    for id in &ids {
        let i = index
            .get(id.as_slice())
            .ok_or_else(|| Error::Numerical("sampled a chain missing from the enumeration".into()))?;
        counts[*i] += 1;
    }
    let probs: Vec<f64> = chains.iter().map(|c| c.normalized_log_prob.exp()).collect();
    chi_square_test(&counts, &probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sch(m: f64) -> BlackHoleState {
        BlackHoleState::schwarzschild(m).unwrap()
    }

    #[test]
    fn single_quantum_is_forced() {
        let s = sch(0.5);
        let p = CascadePolicy::energy_only(&s, 0.5, 0.0);
        let chain = sample_cascade(&s, &p, 1, 0).unwrap();
        assert_eq!(chain.steps.len(), 1);
        assert_eq!(chain.steps[0].step_log_prob, 0.0);
        let (raw, norm) = chain_log_probability(&chain);
        assert!((raw + s.entropy()).abs() < 1e-12);
        assert_eq!(norm, 0.0);
        assert_eq!(chain.terminated, Termination::Exhausted);
        assert_eq!(chain.final_remnant(), Remnant::Evaporated);
    }

    #[test]
    fn schwarzschild_chains_telescope_to_minus_entropy() {
        let eps = 0.2;
        let s = sch(5.0 * eps);
        let p = CascadePolicy::energy_only(&s, eps, 0.0);
        for i in 0..50 {
            let chain = sample_cascade(&s, &p, 9, i).unwrap();
            let (raw, _) = chain_log_probability(&chain);
            assert!((raw + 4.0 * PI * 1.0).abs() < 1e-9, "{raw}");
            let units: u64 = chain.steps.iter().map(|s| s.quanta.units).sum();
            assert_eq!(units, 5);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let s = sch(2.0);
        let p = CascadePolicy::energy_only(&s, 0.1, 0.0);
        let a = sample_cascade(&s, &p, 77, 3).unwrap();
        let b = sample_cascade(&s, &p, 77, 3).unwrap();
        assert_eq!(a, b);
        let c = sample_cascade(&s, &p, 77, 4).unwrap();
        let d = sample_cascade(&s, &p, 78, 3).unwrap();
        assert!(a.identity() != c.identity() || a.identity() != d.identity());
    }

    #[test]
    fn empty_chain_has_zero_log_probability() {
        let chain = EmissionChain {
            initial: sch(1.0),
            steps: vec![],
            terminated: Termination::MaxSteps,
        };
        assert_eq!(chain_log_probability(&chain), (0.0, 0.0));
    }

    #[test]
    fn log_corrected_chain_telescopes() {
        let s = sch(2.0).with_alpha(1.0).unwrap();
        let p = CascadePolicy::energy_only(&s, 0.25, 0.5);
        let stop = sch(0.5).with_alpha(1.0).unwrap();
        for i in 0..20 {
            let chain = sample_cascade(&s, &p, 5, i).unwrap();
            let (raw, _) = chain_log_probability(&chain);
            assert!((raw - (stop.entropy() - s.entropy())).abs() < 1e-9);
            assert_eq!(chain.terminated, Termination::StopMass);
        }
    }

    #[test]
    fn enumeration_counts_compositions() {
        for n in 1..=8u64 {
            let s = sch(n as f64 * 0.5);
            let p = CascadePolicy::energy_only(&s, 0.5, 0.0);
            let chains = enumerate_chains(&s, &p).unwrap();
            assert_eq!(chains.len() as u64, 1 << (n - 1));
            let total = logsumexp(&chains.iter().map(|c| c.normalized_log_prob).collect::<Vec<_>>());
            assert!(total.abs() < 1e-9);
        }
    }

    #[test]
    fn enumeration_is_path_independent() {
        let s = sch(1.0);
        let p = CascadePolicy::energy_only(&s, 0.2, 0.0);
        let chains = enumerate_chains(&s, &p).unwrap();
        assert_eq!(chains.len(), 16);
        for c in &chains {
            assert!((c.raw_log_prob + 4.0 * PI).abs() < 1e-9);
        }
    }

    #[test]
    fn enumeration_limit() {
        let s = sch(21.0);
        let p = CascadePolicy::energy_only(&s, 1.0, 0.0);
        assert!(matches!(enumerate_chains(&s, &p), Err(Error::Usage(_))));
    }

    #[test]
    fn replay_matches_enumeration() {
        let s = sch(1.0);
        let p = CascadePolicy::energy_only(&s, 0.25, 0.0);
        let cascade = Cascade::new(s, p).unwrap();
        for e in cascade.enumerate().unwrap() {
            let chain = cascade.replay(&e.quanta).unwrap();
            let (raw, norm) = chain_log_probability(&chain);
            assert!((raw - e.raw_log_prob).abs() < 1e-12);
            assert!((norm - e.normalized_log_prob).abs() < 1e-12);
        }
    }

    #[test]
    fn policy_validation() {
        let s = sch(1.0);
        let mut p = CascadePolicy::energy_only(&s, 0.3, 0.0);
        assert!(matches!(Cascade::new(s, p), Err(Error::Usage(_))));
        p = CascadePolicy::energy_only(&s, 0.25, 0.0);
        p.max_steps = 0;
        assert!(matches!(Cascade::new(s, p), Err(Error::Usage(_))));
        let corrected = s.with_alpha(-1.0).unwrap();
        let p = CascadePolicy::energy_only(&corrected, 0.25, 0.0);
        assert!(matches!(Cascade::new(corrected, p), Err(Error::Usage(_))));
        let mut p = CascadePolicy::energy_only(&s, 0.25, 0.0);
        p.charge_moves = 1;
        assert!(matches!(Cascade::new(s, p), Err(Error::Usage(_))));
    }

    #[test]
    fn charged_cascade_without_charge_moves_gets_stuck_below_extremality() {
        let s = BlackHoleState::reissner_nordstrom(1.0, 0.5).unwrap();
        let p = CascadePolicy::energy_only(&s, 0.25, 0.0);
        let err = sample_cascade(&s, &p, 1, 0).unwrap_err();
        assert!(matches!(err, Error::SimulationStuck(_)));
    }

    #[test]
    fn charged_cascade_to_extremal_stop() {
        let s = BlackHoleState::reissner_nordstrom(2.0, 1.0).unwrap();
        let stop = CascadePolicy::default_stop_mass(&s);
        assert_eq!(stop, 1.0);
        let p = CascadePolicy::energy_only(&s, 0.25, stop);
        let chains = enumerate_chains(&s, &p).unwrap();
        assert_eq!(chains.len(), 8);
        let ext = BlackHoleState::reissner_nordstrom(1.0, 1.0).unwrap();
        for c in chains {
            assert!((c.raw_log_prob - (ext.entropy() - s.entropy())).abs() < 1e-9);
        }
    }

    #[test]
    fn charge_moves_conserve_charge() {
        let s = BlackHoleState::reissner_nordstrom(2.0, 1.0).unwrap();
        let mut p = CascadePolicy::energy_only(&s, 0.25, 0.0);
        p.charge_quantum = 0.25;
        p.charge_moves = 1;
        for i in 0..30 {
            let chain = sample_cascade(&s, &p, 3, i).unwrap();
            let emitted = chain.emitted();
            let fin = chain.final_remnant().hairs();
            assert!((emitted.charge - (s.charge() - fin.charge)).abs() < 1e-12);
            let (raw, _) = chain_log_probability(&chain);
            let tele = chain.final_remnant().entropy() - s.entropy();
            assert!((raw - tele).abs() < 1e-9);
        }
    }

    #[test]
    fn ensemble_stats_single_sample() {
        let s = sch(1.0);
        let p = CascadePolicy::energy_only(&s, 0.2, 0.0);
        let r = cascade_ensemble_stats(&s, &p, 1, 11).unwrap();
        let chain = sample_cascade(&s, &p, 11, 0).unwrap();
        assert_eq!(r.chain_lengths, vec![chain.steps.len()]);
        assert_eq!(r.distinct_chains, 1);
        assert_eq!(r.chain_identity_entropy, Some(0.0));
        assert!((r.telescoped_total + 4.0 * PI).abs() < 1e-12);
        assert!(matches!(cascade_ensemble_stats(&s, &p, 0, 1), Err(Error::Usage(_))));
    }

    #[test]
    fn ensemble_is_independent_of_thread_count() {
        let s = sch(1.0);
        let p = CascadePolicy::energy_only(&s, 0.1, 0.0);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| sample_ensemble(&s, &p, 500, 21).unwrap());
        let b = four.install(|| sample_ensemble(&s, &p, 500, 21).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn chi_square_detects_bias() {
        let fair = chi_square_test(&[500, 500], &[0.5, 0.5]).unwrap();
        assert_eq!(fair.statistic, 0.0);
        assert!((fair.p_value - 1.0).abs() < 1e-12);
        let biased = chi_square_test(&[600, 400], &[0.5, 0.5]).unwrap();
        assert!(biased.p_value < 1e-9);
    }
}
