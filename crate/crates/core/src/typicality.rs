//! Canonical typicality on a finite universe.
//!
//! The universe `U = B ⊗ O` is restricted to total energy `E_U`. A system
//! level `b` with energy `E_b` and degeneracy `g_b` couples only to the
//! `Ω_O(E_U − E_b)` environment micro-states of the complementary energy,
//! so the coefficient array is stored block-wise: one `g_b × Ω_O` block per
//! system level.
//!
//! Coefficients are stored globally normalized (`Σ |c|² = 1`). The
//! unnormalized convention `C(b,o) / sqrt(Ω_U)` with `⟨|C|²⟩ = 1` is the same
//! state with `C = sqrt(Ω_U) · c`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::logspace::neumaier_sum;
use crate::models::{BlackHoleState, Family, Hairs};

/// Default cap on `dim_U` for the full-coefficient path.
pub const DEFAULT_MAX_UNIVERSE_DIM: usize = 1 << 16;

const ENERGY_MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemLevel {
    pub energy: f64,
    pub degeneracy: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvironmentLevel {
    pub energy: f64,
    /// `Ω_O(E_O)`; zero marks an energy the environment cannot absorb.
    pub degeneracy: u64,
}

/// Energy bookkeeping of the universe: system levels, environment density
/// of states and the total energy.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLedger {
    system: Vec<SystemLevel>,
    environment: Vec<EnvironmentLevel>,
    total_energy: f64,
    // Ω_O(E_U − E_b) for each system level, resolved at construction.
    sectors: Vec<u64>,
}

impl EnergyLedger {
    pub fn new(
        system: Vec<SystemLevel>,
        environment: Vec<EnvironmentLevel>,
        total_energy: f64,
    ) -> Result<Self> {
        if system.is_empty() {
            return Err(Error::Domain("energy ledger has no system levels".into()));
        }
        if !total_energy.is_finite() {
            return Err(Error::Domain("total energy is not finite".into()));
        }
        let mut sectors = Vec::with_capacity(system.len());
        for level in &system {
            if level.degeneracy == 0 {
                return Err(Error::Domain(format!(
                    "system level at E = {} has zero degeneracy",
                    level.energy
                )));
            }
            if !level.energy.is_finite() || level.energy > total_energy {
                return Err(Error::Domain(format!(
                    "system level energy {} exceeds total energy {total_energy}",
                    level.energy
                )));
            }
            let target = total_energy - level.energy;
            let tol = ENERGY_MATCH_TOL * total_energy.abs().max(1.0);
            let omega = environment
                .iter()
                .find(|o| (o.energy - target).abs() <= tol)
                .map(|o| o.degeneracy)
                .ok_or_else(|| {
                    Error::Domain(format!(
                        "no environment entry for E_O = {target} (system level E = {})",
                        level.energy
                    ))
                })?;
            sectors.push(omega);
        }
        Ok(EnergyLedger {
            system,
            environment,
            total_energy,
            sectors,
        })
    }

    /// `n_levels` system levels at energies `0, 1, …` each with degeneracy
    /// `degeneracy`, in an environment whose density of states halves per
    /// unit of absorbed energy: `Ω_O(E_U − k) = dim_o / 2^k`.
    pub fn halving(n_levels: usize, degeneracy: u64, dim_o: u64) -> Result<Self> {
        if n_levels == 0 {
            return Err(Error::Domain("energy ledger has no system levels".into()));
        }
        let total = (n_levels - 1) as f64;
        let system = (0..n_levels)
            .map(|k| SystemLevel {
                energy: k as f64,
                degeneracy,
            })
            .collect();
        let environment = (0..n_levels)
            .map(|k| EnvironmentLevel {
                energy: total - k as f64,
                degeneracy: dim_o >> k,
            })
            .collect();
        EnergyLedger::new(system, environment, total)
    }

    /// Single system level of degeneracy `dim_b` sharing one environment
    /// sector of size `dim_o`.
    pub fn uniform(dim_b: u64, dim_o: u64) -> Result<Self> {
        EnergyLedger::new(
            vec![SystemLevel {
                energy: 0.0,
                degeneracy: dim_b,
            }],
            vec![EnvironmentLevel {
                energy: 0.0,
                degeneracy: dim_o,
            }],
            0.0,
        )
    }

    pub fn system_levels(&self) -> &[SystemLevel] {
        &self.system
    }

    pub fn environment_levels(&self) -> &[EnvironmentLevel] {
        &self.environment
    }

    pub fn total_energy(&self) -> f64 {
        self.total_energy
    }

    /// `Ω_O(E_U − E_b)` for system level `level`.
    pub fn sector_size(&self, level: usize) -> u64 {
        self.sectors[level]
    }

    /// Number of system micro-states, `Σ g_b`.
    pub fn dim_system(&self) -> usize {
        self.system.iter().map(|l| l.degeneracy as usize).sum()
    }

    /// Number of universe micro-states at `E_U`, `Ω_U = Σ g_b Ω_O(E_U − E_b)`.
    pub fn dim_universe(&self) -> u128 {
        self.system
            .iter()
            .zip(&self.sectors)
            .map(|(l, &o)| l.degeneracy as u128 * o as u128)
            .sum()
    }

    /// Index of the system level owning each system micro-state.
    pub fn micro_state_levels(&self) -> Vec<usize> {
        self.system
            .iter()
            .enumerate()
            .flat_map(|(i, l)| std::iter::repeat(i).take(l.degeneracy as usize))
            .collect()
    }
}

/// A normalized random pure state of the universe.
#[derive(Debug, Clone, PartialEq)]
pub struct PureStateSample {
    /// One row-major `g_b × Ω_O(E_U − E_b)` block per system level.
    blocks: Vec<Vec<Complex64>>,
    ledger: EnergyLedger,
    seed: u64,
}

impl PureStateSample {
    /// Wrap explicit coefficients; the block shapes must match the ledger
    /// and the squared norm must be 1 within `1e-12`.
    pub fn from_coefficients(ledger: EnergyLedger, blocks: Vec<Vec<Complex64>>, seed: u64) -> Result<Self> {
        if blocks.len() != ledger.system.len() {
            return Err(Error::Usage(format!(
                "{} coefficient blocks for {} system levels",
                blocks.len(),
                ledger.system.len()
            )));
        }
        for (i, block) in blocks.iter().enumerate() {
            let want = ledger.system[i].degeneracy as usize * ledger.sectors[i] as usize;
            if block.len() != want {
                return Err(Error::Usage(format!(
                    "block {i} has {} coefficients, ledger requires {want}",
                    block.len()
                )));
            }
        }
        let norm = neumaier_sum(blocks.iter().flatten().map(|c| c.norm_sqr()));
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("state has squared norm {norm}, expected 1")));
        }
        Ok(PureStateSample { blocks, ledger, seed })
    }

    pub fn blocks(&self) -> &[Vec<Complex64>] {
        &self.blocks
    }

    pub fn ledger(&self) -> &EnergyLedger {
        &self.ledger
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn squared_norm(&self) -> f64 {
        neumaier_sum(self.blocks.iter().flatten().map(|c| c.norm_sqr()))
    }

    pub fn coefficients(&self) -> impl Iterator<Item = &Complex64> {
        self.blocks.iter().flatten()
    }
}

/// Draw i.i.d. complex standard normal coefficients and normalize globally.
pub fn sample_universe_state(ledger: &EnergyLedger, seed: u64) -> Result<PureStateSample> {
    sample_universe_state_capped(ledger, seed, DEFAULT_MAX_UNIVERSE_DIM)
}

pub fn sample_universe_state_capped(
    ledger: &EnergyLedger,
    seed: u64,
    max_universe_dim: usize,
) -> Result<PureStateSample> {
    let dim_u = ledger.dim_universe();
    if dim_u == 0 {
        return Err(Error::Domain(
            "universe has no micro-states at the total energy".into(),
        ));
    }
    if dim_u > max_universe_dim as u128 {
        return Err(Error::Usage(format!(
            "dim_U = {dim_u} exceeds the full-state limit {max_universe_dim}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut blocks: Vec<Vec<Complex64>> = ledger
        .system
        .iter()
        .zip(&ledger.sectors)
        .map(|(level, &omega)| {
            let n = level.degeneracy as usize * omega as usize;
            (0..n)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(re, im)
                })
                .collect()
        })
        .collect();
    let norm = neumaier_sum(blocks.iter().flatten().map(|c| c.norm_sqr())).sqrt();
    if !(norm > 0.0) {
        return Err(Error::Numerical("sampled state has zero norm".into()));
    }
    for c in blocks.iter_mut().flatten() {
        *c /= norm;
    }
    Ok(PureStateSample {
        blocks,
        ledger: ledger.clone(),
        seed,
    })
}

/// Reduced density matrix of the system, over its micro-states.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensity {
    pub matrix: DMatrix<Complex64>,
}

impl ReducedDensity {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    /// Largest `|ρ_ij − conj(ρ_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().copied().collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// Root-mean-square magnitude of the off-diagonal entries.
    pub fn offdiag_rms(&self) -> f64 {
        let n = self.dim();
        if n < 2 {
            return 0.0;
        }
        let mut sq = Vec::with_capacity(n * (n - 1));
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    sq.push(self.matrix[(i, j)].norm_sqr());
                }
            }
        }
        (neumaier_sum(sq) / (n * (n - 1)) as f64).sqrt()
    }

    /// Diagonal summed within each system energy level.
    pub fn level_populations(&self, ledger: &EnergyLedger) -> Vec<f64> {
        let mut pops = vec![0.0; ledger.system.len()];
        for (i, level) in ledger.micro_state_levels().into_iter().enumerate() {
            pops[level] += self.matrix[(i, i)].re;
        }
        pops
    }
}

/// Exact partial trace over the environment, off-diagonals included.
///
/// Micro-states of different system energies pair with disjoint environment
/// sectors, so their coherences vanish identically; within a degenerate
/// level they are overlaps `⟨Ψ_b'|Ψ_b⟩` of random environment vectors.
pub fn reduce_to_system(sample: &PureStateSample) -> ReducedDensity {
    let ledger = &sample.ledger;
    let n = ledger.dim_system();
    let mut matrix = DMatrix::<Complex64>::zeros(n, n);
    let mut offset = 0;
    for (level, block) in ledger.system.iter().zip(&sample.blocks) {
        let g = level.degeneracy as usize;
        let omega = if g == 0 { 0 } else { block.len() / g };
        for a in 0..g {
            let row_a = &block[a * omega..(a + 1) * omega];
            for b in 0..g {
                let row_b = &block[b * omega..(b + 1) * omega];
                let mut acc = Complex64::new(0.0, 0.0);
                for (x, y) in row_a.iter().zip(row_b) {
                    acc += x * y.conj();
                }
                matrix[(offset + a, offset + b)] = acc;
            }
        }
        offset += g;
    }
    ReducedDensity { matrix }
}

/// Microcanonical weight of each system level,
/// `Ω_O(E_U − E_b) g_b / Σ Ω_O(E_U − E_b') g_b'`.
pub fn microcanonical_weights(ledger: &EnergyLedger) -> Result<Vec<f64>> {
    let raw: Vec<f64> = ledger
        .system
        .iter()
        .zip(&ledger.sectors)
        .map(|(l, &o)| l.degeneracy as f64 * o as f64)
        .collect();
    let total = neumaier_sum(raw.iter().copied());
    if !(total > 0.0) {
        return Err(Error::Domain(
            "environment cannot absorb the energy of any system level".into(),
        ));
    }
    Ok(raw.into_iter().map(|w| w / total).collect())
}

/// Seed-averaged typicality diagnostics for one ledger.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TypicalityStats {
    pub dim_system: usize,
    pub dim_universe: u128,
    pub n_seeds: usize,
    /// Mean of `‖level populations − microcanonical weights‖₁`.
    pub mean_weight_l1: f64,
    pub mean_offdiag_rms: f64,
    /// Mean over seeds of the RMS relative deviation of each micro-state's
    /// diagonal entry from `Ω_O(E_U − E_b) / Ω_U`.
    pub mean_diag_rel_rms: f64,
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

struct SeedResult {
    l1: f64,
    offdiag: f64,
    diag_rel: f64,
    trace_err: f64,
    herm_err: f64,
    min_eig: f64,
}

/// Run `reduce_to_system` on one sample per seed and average the diagnostics.
/// Seeds are processed in parallel; the reduction is in seed order.
pub fn typicality_experiment(ledger: &EnergyLedger, seeds: &[u64]) -> Result<TypicalityStats> {
    if seeds.is_empty() {
        return Err(Error::Usage("typicality experiment needs at least one seed".into()));
    }
    let weights = microcanonical_weights(ledger)?;
    let dim_u = ledger.dim_universe() as f64;
    let per_state: Vec<f64> = ledger
        .micro_state_levels()
        .into_iter()
        .map(|l| ledger.sectors[l] as f64 / dim_u)
        .collect();
    let results: Vec<SeedResult> = seeds
        .par_iter()
        .map(|&seed| {
            let sample = sample_universe_state(ledger, seed)?;
            let rho = reduce_to_system(&sample);
            let pops = rho.level_populations(ledger);
            let l1 = neumaier_sum(pops.iter().zip(&weights).map(|(p, w)| (p - w).abs()));
            let diag = rho.diagonal();
            let rel_sq = neumaier_sum(
                diag.iter()
                    .zip(&per_state)
                    .filter(|(_, &w)| w > 0.0)
                    .map(|(d, w)| ((d - w) / w).powi(2)),
            );
            Ok(SeedResult {
                l1,
                offdiag: rho.offdiag_rms(),
                diag_rel: (rel_sq / diag.len() as f64).sqrt(),
                trace_err: (rho.trace() - 1.0).abs(),
                herm_err: rho.hermiticity_error(),
                min_eig: rho.min_eigenvalue(),
            })
        })
        .collect::<Result<_>>()?;
    let n = results.len() as f64;
    Ok(TypicalityStats {
        dim_system: ledger.dim_system(),
        dim_universe: ledger.dim_universe(),
        n_seeds: results.len(),
        mean_weight_l1: neumaier_sum(results.iter().map(|r| r.l1)) / n,
        mean_offdiag_rms: neumaier_sum(results.iter().map(|r| r.offdiag)) / n,
        mean_diag_rel_rms: neumaier_sum(results.iter().map(|r| r.diag_rel)) / n,
        max_trace_error: results.iter().map(|r| r.trace_err).fold(0.0, f64::max),
        max_hermiticity_error: results.iter().map(|r| r.herm_err).fold(0.0, f64::max),
        min_eigenvalue: results.iter().map(|r| r.min_eig).fold(f64::INFINITY, f64::min),
    })
}

/// An entropy `S(macro-state)` in nats together with its domain of validity.
///
/// Implementations must be deterministic.
pub trait EntropyFunction: Sync {
    fn entropy(&self, state: &Hairs) -> f64;
    fn is_valid(&self, state: &Hairs) -> bool;
}

/// `S(E) = β E` on `E ≥ 0`; the canonical (thermal) case.
#[derive(Debug, Clone, Copy)]
pub struct LinearEntropy {
    pub beta: f64,
}

impl EntropyFunction for LinearEntropy {
    fn entropy(&self, state: &Hairs) -> f64 {
        self.beta * state.mass
    }
    fn is_valid(&self, state: &Hairs) -> bool {
        state.mass >= 0.0
    }
}

/// Horizon entropy of a black-hole family as a function of its hairs.
/// The exactly evaporated state has entropy 0 when `α = 0`.
#[derive(Debug, Clone, Copy)]
pub struct HorizonEntropy {
    pub family: Family,
    pub alpha: f64,
}

impl EntropyFunction for HorizonEntropy {
    fn entropy(&self, state: &Hairs) -> f64 {
        match BlackHoleState::from_hairs(self.family, *state, self.alpha) {
            Ok(s) => s.entropy(),
            Err(_) if *state == Hairs::ZERO && self.alpha == 0.0 => 0.0,
            Err(_) => f64::NAN,
        }
    }
    fn is_valid(&self, state: &Hairs) -> bool {
        BlackHoleState::from_hairs(self.family, *state, self.alpha).is_ok()
            || (*state == Hairs::ZERO && self.alpha == 0.0)
    }
}

/// Entropy given by closures.
pub struct FnEntropy<S, V> {
    pub entropy: S,
    pub valid: V,
}

impl<S, V> EntropyFunction for FnEntropy<S, V>
where
    S: Fn(&Hairs) -> f64 + Sync,
    V: Fn(&Hairs) -> bool + Sync,
{
    fn entropy(&self, state: &Hairs) -> f64 {
        (self.entropy)(state)
    }
    fn is_valid(&self, state: &Hairs) -> bool {
        (self.valid)(state)
    }
}

/// One point of an entropy-difference spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyBin {
    pub delta: Hairs,
    /// `S(total − delta) − S(total)`; `-inf` for invalid bins.
    pub log_weight: f64,
    pub valid: bool,
}

/// Log-weights `S(total − r) − S(total)` for each subtracted macro-delta `r`.
///
/// No normalization is applied. Deltas whose remainder falls outside the
/// entropy's validity domain are kept and flagged invalid.
pub fn spectrum_from_entropy<S: EntropyFunction + ?Sized>(
    entropy: &S,
    total: Hairs,
    deltas: &[Hairs],
) -> Result<Vec<EntropyBin>> {
    if !entropy.is_valid(&total) {
        return Err(Error::Domain(format!("total macro-state {total:?} is outside the entropy's domain")));
    }
    let s_total = entropy.entropy(&total);
    let bins: Vec<EntropyBin> = deltas
        .iter()
        .map(|&delta| {
            let rest = total - delta;
            if entropy.is_valid(&rest) {
                EntropyBin {
                    delta,
                    log_weight: entropy.entropy(&rest) - s_total,
                    valid: true,
                }
            } else {
                EntropyBin {
                    delta,
                    log_weight: f64::NEG_INFINITY,
                    valid: false,
                }
            }
        })
        .collect();
    if !bins.iter().any(|b| b.valid) {
        return Err(Error::Domain("every grid point leaves an invalid remainder".into()));
    }
    Ok(bins)
}
