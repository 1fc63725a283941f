//! Discretized radiation spectra from horizon-entropy differences.
//!
//! The weight of emitting `(ω, q, j)` from a hole with hairs `(M, Q, J)` is
//! `exp[S(M − ω, Q − q, J − j) − S(M, Q, J)]`. Everything here is carried in
//! log space; exponentiation is left to output formatting.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logspace::{logsumexp, neumaier_sum};
use crate::models::{BlackHoleState, Emission, Family};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// Literal weights `exp(−ΔS)`, with weight 1 at zero emission.
    Raw,
    /// Renormalized to unit total over the valid bins.
    UnitSum,
}

impl std::str::FromStr for Normalization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "raw" => Ok(Normalization::Raw),
            "unitsum" | "unit_sum" | "unit-sum" => Ok(Normalization::UnitSum),
            other => Err(Error::Usage(format!("unknown normalization `{other}`"))),
        }
    }
}

/// Integer-quantized axis: values `k · step` for `k ∈ [min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumAxis {
    pub step: f64,
    pub min: i64,
    pub max: i64,
}

impl QuantumAxis {
    pub fn values(&self) -> Vec<f64> {
        (self.min..=self.max).map(|k| k as f64 * self.step).collect()
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::Usage(format!("{name} step must be finite and > 0")));
        }
        if self.min > self.max {
            return Err(Error::Usage(format!("{name} axis has min > max")));
        }
        Ok(())
    }
}

/// Emission grid. Energy nodes are `ω_min + (ω_max − ω_min) k / n` for
/// `k = 1..=n`, i.e. a uniform grid on `(ω_min, ω_max]` evaluated pointwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub omega_min: f64,
    pub omega_max: f64,
    pub n_omega: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charge: Option<QuantumAxis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spin: Option<QuantumAxis>,
}

impl GridSpec {
    /// Energy-only grid on `(0, omega_max]`.
    pub fn energy(omega_max: f64, n_omega: usize) -> Self {
        GridSpec {
            omega_min: 0.0,
            omega_max,
            n_omega,
            charge: None,
            spin: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_omega == 0 {
            return Err(Error::Usage("grid has no energy bins".into()));
        }
        if !(self.omega_min.is_finite() && self.omega_max.is_finite()) {
            return Err(Error::Usage("energy bounds must be finite".into()));
        }
        if self.omega_min < 0.0 || self.omega_max < self.omega_min {
            return Err(Error::Usage(format!(
                "energy range [{}, {}] must satisfy 0 ≤ ω_min ≤ ω_max",
                self.omega_min, self.omega_max
            )));
        }
        if let Some(ax) = &self.charge {
            ax.validate("charge")?;
        }
        if let Some(ax) = &self.spin {
            ax.validate("angular-momentum")?;
        }
        Ok(())
    }

    pub fn omegas(&self) -> Vec<f64> {
        let n = self.n_omega;
        let span = self.omega_max - self.omega_min;
        (1..=n)
            .map(|k| {
                if k == n {
                    self.omega_max
                } else {
                    self.omega_min + span * (k as f64 / n as f64)
                }
            })
            .collect()
    }

    /// All grid emissions, energy-major then charge then angular momentum.
    pub fn emissions(&self) -> Vec<Emission> {
        let qs = self.charge.map(|a| a.values()).unwrap_or_else(|| vec![0.0]);
        let js = self.spin.map(|a| a.values()).unwrap_or_else(|| vec![0.0]);
        let mut out = Vec::with_capacity(self.n_omega * qs.len() * js.len());
        for omega in self.omegas() {
            for &q in &qs {
                for &j in &js {
                    out.push(Emission { omega, q, j });
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.n_omega
            * self.charge.map_or(1, |a| (a.max - a.min + 1) as usize)
            * self.spin.map_or(1, |a| (a.max - a.min + 1) as usize)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumBin {
    pub emission: Emission,
    /// Nats; `-inf` when the bin is invalid.
    pub log_weight: f64,
    pub valid: bool,
}

/// Diagonal of the radiation density matrix on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumGrid {
    pub bins: Vec<SpectrumBin>,
    pub normalization: Normalization,
    pub source_state: BlackHoleState,
    pub grid_spec: GridSpec,
    /// Log of the raw total over valid bins that was subtracted (0 for `Raw`).
    pub log_normalizer: f64,
}

impl SpectrumGrid {
    pub fn valid_bins(&self) -> impl Iterator<Item = &SpectrumBin> {
        self.bins.iter().filter(|b| b.valid)
    }

    /// `Σ exp(log_weight)` over valid bins.
    pub fn total_weight(&self) -> f64 {
        neumaier_sum(self.valid_bins().map(|b| b.log_weight.exp()))
    }
}

/// `ln Γ(e | state) = S(remnant) − S(state)` with `S` the (log-corrected)
/// horizon entropy.
///
/// With `α ≠ 0` the correction contributes `α ln(R'²/R²)`, i.e. the
/// `(R'_H / R_H)^{2α}` prefactor in log form. The area difference is
/// computed from the emitted quantities directly, so the result stays
/// accurate to a few ulps of itself even when `ω ≪ M`.
pub fn emission_log_weight(state: &BlackHoleState, e: &Emission) -> Result<f64> {
    let (_, d_area_sq) = state.area_radius_sq_change(e)?;
    let area_term = PI * d_area_sq;
    if state.alpha() == 0.0 {
        Ok(area_term)
    } else {
        let ratio = d_area_sq / state.area_radius_sq();
        Ok(area_term + state.alpha() * ratio.ln_1p())
    }
}

/// Boltzmann baseline `−ω / T_H`; for Schwarzschild `−8πMω`.
pub fn thermal_log_weight(state: &BlackHoleState, omega: f64) -> Result<f64> {
    if state.family() == Family::Schwarzschild {
        return Ok(-8.0 * PI * state.mass() * omega);
    }
    let t = state.hawking_temperature()?;
    Ok(-omega / t)
}

fn check_grid_for(state: &BlackHoleState, grid: &GridSpec) -> Result<()> {
    grid.validate()?;
    if grid.omega_max > state.mass() {
        return Err(Error::Usage(format!(
            "ω_max = {} exceeds the black-hole mass {}",
            grid.omega_max,
            state.mass()
        )));
    }
    if grid.charge.is_some() && !state.family().carries_charge() {
        return Err(Error::Usage(format!("{} grid cannot have a charge axis", state.family())));
    }
    if grid.spin.is_some() && !state.family().carries_spin() {
        return Err(Error::Usage(format!(
            "{} grid cannot have an angular-momentum axis",
            state.family()
        )));
    }
    Ok(())
}

fn normalize(bins: &mut [SpectrumBin], normalization: Normalization) -> Result<f64> {
    if !bins.iter().any(|b| b.valid) {
        return Err(Error::Domain("every grid bin leaves an invalid remnant".into()));
    }
    match normalization {
        Normalization::Raw => Ok(0.0),
        Normalization::UnitSum => {
            let lws: Vec<f64> = bins.iter().filter(|b| b.valid).map(|b| b.log_weight).collect();
            let z = logsumexp(&lws);
            if !z.is_finite() {
                return Err(Error::Numerical(format!("spectrum normalizer is {z}")));
            }
            for b in bins.iter_mut().filter(|b| b.valid) {
                b.log_weight -= z;
            }
            Ok(z)
        }
    }
}

fn evaluate_bins<F>(grid: &GridSpec, f: F) -> Result<Vec<SpectrumBin>>
where
    F: Fn(&Emission) -> Result<f64> + Sync,
{
    grid.emissions()
        .into_par_iter()
        .map(|emission| match f(&emission) {
            Ok(lw) => Ok(SpectrumBin {
                emission,
                log_weight: lw,
                valid: true,
            }),
            Err(Error::RemnantInvalid(_)) => Ok(SpectrumBin {
                emission,
                log_weight: f64::NEG_INFINITY,
                valid: false,
            }),
            Err(e) => Err(e),
        })
        .collect()
}

/// Evaluate [`emission_log_weight`] on every grid bin. Bins with an invalid
/// remnant stay in place, flagged.
pub fn build_spectrum(
    state: &BlackHoleState,
    grid: &GridSpec,
    normalization: Normalization,
) -> Result<SpectrumGrid> {
    check_grid_for(state, grid)?;
    let mut bins = evaluate_bins(grid, |e| emission_log_weight(state, e))?;
    let log_normalizer = normalize(&mut bins, normalization)?;
    Ok(SpectrumGrid {
        bins,
        normalization,
        source_state: *state,
        grid_spec: grid.clone(),
        log_normalizer,
    })
}

/// Thermal baseline on the same grid and with the same validity mask as
/// [`build_spectrum`].
pub fn build_thermal_spectrum(
    state: &BlackHoleState,
    grid: &GridSpec,
    normalization: Normalization,
) -> Result<SpectrumGrid> {
    check_grid_for(state, grid)?;
    if state.family() != Family::Schwarzschild {
        state.hawking_temperature()?;
    }
    let mut bins = evaluate_bins(grid, |e| {
        state.remnant(e)?;
        thermal_log_weight(state, e.omega)
    })?;
    let log_normalizer = normalize(&mut bins, normalization)?;
    Ok(SpectrumGrid {
        bins,
        normalization,
        source_state: *state,
        grid_spec: grid.clone(),
        log_normalizer,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumComparison {
    /// `KL(nonthermal ‖ thermal)`; only defined when both spectra are `UnitSum`.
    pub kl_divergence: Option<f64>,
    pub max_abs_log_ratio: f64,
    pub mean_abs_log_ratio: f64,
    pub common_bins: usize,
}

/// Compare two spectra on an identical grid, over bins valid in both.
pub fn compare_thermal(nonthermal: &SpectrumGrid, thermal: &SpectrumGrid) -> Result<SpectrumComparison> {
    if nonthermal.grid_spec != thermal.grid_spec || nonthermal.bins.len() != thermal.bins.len() {
        return Err(Error::Usage("spectra are defined on different grids".into()));
    }
    let pairs: Vec<(f64, f64)> = nonthermal
        .bins
        .iter()
        .zip(&thermal.bins)
        .filter(|(a, b)| a.valid && b.valid)
        .map(|(a, b)| (a.log_weight, b.log_weight))
        .collect();
    if pairs.is_empty() {
        return Err(Error::Usage("spectra share no valid bins".into()));
    }
    let diffs: Vec<f64> = pairs.iter().map(|(a, b)| (a - b).abs()).collect();
    let max_abs = diffs.iter().copied().fold(0.0, f64::max);
    let mean_abs = neumaier_sum(diffs.iter().copied()) / diffs.len() as f64;
    let kl = match (nonthermal.normalization, thermal.normalization) {
        (Normalization::UnitSum, Normalization::UnitSum) => {
            Some(neumaier_sum(pairs.iter().map(|(a, b)| a.exp() * (a - b))))
        }
        _ => None,
    };
    Ok(SpectrumComparison {
        kl_divergence: kl,
        max_abs_log_ratio: max_abs,
        mean_abs_log_ratio: mean_abs,
        common_bins: pairs.len(),
    })
}
