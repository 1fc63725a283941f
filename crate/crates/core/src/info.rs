//! Entropy and correlation functionals of the radiation.

use std::f64::consts::PI;

use serde::Serialize;

use crate::cascade::EmissionChain;
use crate::error::{Error, Result};
use crate::logspace::{logsumexp, neumaier_sum, plogp_from_log};
use crate::models::{BlackHoleState, Emission, Hairs, Remnant};
use crate::spectrum::{build_spectrum, emission_log_weight, GridSpec, Normalization, SpectrumGrid};
use crate::typicality::EntropyFunction;

/// Excluded probability above which a conditional-entropy result is flagged.
pub const EXCLUDED_MASS_WARNING: f64 = 1e-6;

/// Shannon entropy `−Σ p ln p` of a unit-sum spectrum's valid bins.
pub fn radiation_entropy(spectrum: &SpectrumGrid) -> Result<f64> {
    if spectrum.normalization != Normalization::UnitSum {
        return Err(Error::Usage(
            "radiation entropy requires a unit-sum spectrum".into(),
        ));
    }
    Ok(-neumaier_sum(spectrum.valid_bins().map(|b| plogp_from_log(b.log_weight))))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionalEntropy {
    /// `Σ_r p(r) S(remnant(r))` under unit-sum weights.
    pub exact: f64,
    /// `S` evaluated at the mean remnant hairs.
    pub lowenergy: f64,
    /// The same sum weighted by the literal (raw) weights `exp(−ΔS)`.
    pub raw_weighted: f64,
    /// Radiation internal energy `⟨ω⟩`.
    pub mean_omega: f64,
    pub mean_charge: f64,
    pub mean_spin: f64,
    /// `M − ⟨ω⟩`.
    pub remnant_energy: f64,
    pub excluded_mass: f64,
    pub warning: bool,
}

/// Conditional entropy of the remaining hole given the radiation.
///
/// Weights are the spectrum's valid bins renormalized to unit sum (so a raw
/// spectrum is accepted too). Bins whose remnant from `state` is invalid are
/// excluded and their probability reported.
pub fn conditional_entropy(state: &BlackHoleState, spectrum: &SpectrumGrid) -> Result<ConditionalEntropy> {
    let valid: Vec<_> = spectrum.valid_bins().collect();
    let z_all = logsumexp(&valid.iter().map(|b| b.log_weight).collect::<Vec<_>>());
    if !z_all.is_finite() {
        return Err(Error::Domain("spectrum has no weight on valid bins".into()));
    }
    let mut kept = Vec::with_capacity(valid.len());
    let mut excluded = Vec::new();
    for b in valid {
        let p_log = b.log_weight - z_all;
        match state.remnant(&b.emission) {
            Ok(r) => kept.push((b, p_log, r)),
            Err(Error::RemnantInvalid(_)) => excluded.push(p_log),
            Err(e) => return Err(e),
        }
    }
    if kept.is_empty() {
        return Err(Error::Domain("every spectrum bin leaves an invalid remnant".into()));
    }
    let excluded_mass = neumaier_sum(excluded.iter().map(|l| l.exp()));
    let z = logsumexp(&kept.iter().map(|(_, l, _)| *l).collect::<Vec<_>>());
    let p: Vec<f64> = kept.iter().map(|(_, l, _)| (l - z).exp()).collect();
    let exact = neumaier_sum(p.iter().zip(&kept).map(|(p, (_, _, r))| p * r.entropy()));
    let mean_omega = neumaier_sum(p.iter().zip(&kept).map(|(p, (b, _, _))| p * b.emission.omega));
    let mean_charge = neumaier_sum(p.iter().zip(&kept).map(|(p, (b, _, _))| p * b.emission.q));
    let mean_spin = neumaier_sum(p.iter().zip(&kept).map(|(p, (b, _, _))| p * b.emission.j));
    let raw_weighted = neumaier_sum(
        kept.iter()
            .map(|(b, _, r)| (b.log_weight + spectrum.log_normalizer).exp() * r.entropy()),
    );
    let mean_hairs = state.hairs() - Hairs::new(mean_omega, mean_charge, mean_spin);
    let lowenergy = if mean_hairs == Hairs::ZERO && state.alpha() == 0.0 {
        0.0
    } else {
        BlackHoleState::from_hairs(state.family(), mean_hairs, state.alpha())?.entropy()
    };
    Ok(ConditionalEntropy {
        exact,
        lowenergy,
        raw_weighted,
        mean_omega,
        mean_charge,
        mean_spin,
        remnant_energy: state.mass() - mean_omega,
        excluded_mass,
        warning: excluded_mass > EXCLUDED_MASS_WARNING,
    })
}

/// `ln p(e₁ ⊕ e₂) − ln p(e₁) − ln p(e₂)`, all from `state`.
///
/// Zero for an entropy linear in the hairs; `8π ω₁ ω₂` for Schwarzschild.
pub fn pairwise_correlation(state: &BlackHoleState, e1: &Emission, e2: &Emission) -> Result<f64> {
    let joint = emission_log_weight(state, &(*e1 + *e2))?;
    Ok(joint - emission_log_weight(state, e1)? - emission_log_weight(state, e2)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MutualInformation {
    /// `Σ q ln[q / (q₁ q₂)]` for the sequential joint `q ∝ p(ω₁|M) p(ω₂|M−ω₁)`.
    pub mi_numeric: f64,
    /// `8π ⟨ω₁⟩_{q₁} ⟨ω₂⟩_{q₂}`.
    pub mi_paper_form: f64,
    /// `8π ⟨ω₁ ω₂⟩_q`.
    pub mi_moment_form: f64,
    /// `Σ p(ω₁+ω₂) ln[p(ω₁+ω₂) / (p(ω₁) p(ω₂))]` with literal raw weights;
    /// not a normalized joint, reported as a diagnostic only.
    pub mi_paper_literal: f64,
    pub mean_omega1: f64,
    pub mean_omega2: f64,
    pub covariance: f64,
    /// Grid pairs dropped because `ω₁ + ω₂` leaves no valid remnant.
    pub excluded_pairs: usize,
}

fn mutual_information_core<F1, F2>(omegas: &[f64], first: F1, second: F2) -> Result<MutualInformation>
where
    F1: Fn(f64) -> Result<Option<f64>>,
    F2: Fn(f64, f64) -> Result<Option<f64>>,
{
    let n = omegas.len();
    if n < 2 {
        return Err(Error::Usage("mutual information needs at least 2 bins per axis".into()));
    }
    let mut log_joint = vec![f64::NEG_INFINITY; n * n];
    let mut literal = Vec::new();
    let mut excluded = 0;
    let singles: Vec<Option<f64>> = omegas.iter().map(|&w| first(w)).collect::<Result<_>>()?;
    for (i, &w1) in omegas.iter().enumerate() {
        for (k, &w2) in omegas.iter().enumerate() {
            let (Some(l1), Some(l2_alone)) = (singles[i], singles[k]) else {
                excluded += 1;
                continue;
            };
            match second(w1, w2)? {
                Some(l2) => {
                    log_joint[i * n + k] = l1 + l2;
                    if let Some(l12) = first(w1 + w2)? {
                        literal.push(l12.exp() * (l12 - l1 - l2_alone));
                    }
                }
                None => excluded += 1,
            }
        }
    }
    let z = logsumexp(&log_joint);
    if !z.is_finite() {
        return Err(Error::Domain("joint emission distribution is empty on this grid".into()));
    }
    for l in &mut log_joint {
        *l -= z;
    }
    let row: Vec<f64> = (0..n).map(|i| logsumexp(&log_joint[i * n..(i + 1) * n])).collect();
    let col: Vec<f64> = (0..n)
        .map(|k| logsumexp(&(0..n).map(|i| log_joint[i * n + k]).collect::<Vec<_>>()))
        .collect();
    let mut mi_terms = Vec::with_capacity(n * n);
    let mut cross = Vec::with_capacity(n * n);
    for i in 0..n {
        for k in 0..n {
            let l = log_joint[i * n + k];
            if l == f64::NEG_INFINITY {
                continue;
            }
            let q = l.exp();
            mi_terms.push(q * (l - row[i] - col[k]));
            cross.push(q * omegas[i] * omegas[k]);
        }
    }
    let mean1 = neumaier_sum((0..n).map(|i| row[i].exp() * omegas[i]));
    let mean2 = neumaier_sum((0..n).map(|k| col[k].exp() * omegas[k]));
    let mut cov_terms = Vec::with_capacity(n * n);
    for i in 0..n {
        for k in 0..n {
            let l = log_joint[i * n + k];
            if l != f64::NEG_INFINITY {
                cov_terms.push(l.exp() * (omegas[i] - mean1) * (omegas[k] - mean2));
            }
        }
    }
    Ok(MutualInformation {
        mi_numeric: neumaier_sum(mi_terms),
        mi_paper_form: 8.0 * PI * mean1 * mean2,
        mi_moment_form: 8.0 * PI * neumaier_sum(cross),
        mi_paper_literal: neumaier_sum(literal),
        mean_omega1: mean1,
        mean_omega2: mean2,
        covariance: neumaier_sum(cov_terms),
        excluded_pairs: excluded,
    })
}

fn energy_axis(grid: &GridSpec) -> Result<Vec<f64>> {
    grid.validate()?;
    if grid.charge.is_some() || grid.spin.is_some() {
        return Err(Error::Usage("mutual information is defined on energy-only grids".into()));
    }
    Ok(grid.omegas())
}

/// Mutual information between two successive emissions of a black hole on
/// an energy grid used for both axes.
pub fn mutual_information(state: &BlackHoleState, grid: &GridSpec) -> Result<MutualInformation> {
    let omegas = energy_axis(grid)?;
    let weight = |s: &BlackHoleState, w: f64| -> Result<Option<f64>> {
        match emission_log_weight(s, &Emission::energy(w)?) {
            Ok(l) => Ok(Some(l)),
            Err(Error::RemnantInvalid(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };
    mutual_information_core(
        &omegas,
        |w| weight(state, w),
        |w1, w2| match state.remnant(&Emission::energy(w1)?) {
            Ok(Remnant::Hole(mid)) => weight(&mid, w2),
            Ok(Remnant::Evaporated) => Ok(None),
            Err(Error::RemnantInvalid(_)) => Ok(None),
            Err(e) => Err(e),
        },
    )
}

/// [`mutual_information`] for an arbitrary entropy function, using the
/// literal differences `S(E − ω) − S(E)`.
pub fn mutual_information_with<S: EntropyFunction + ?Sized>(
    entropy: &S,
    total: Hairs,
    grid: &GridSpec,
) -> Result<MutualInformation> {
    let omegas = energy_axis(grid)?;
    if !entropy.is_valid(&total) {
        return Err(Error::Domain("total macro-state is outside the entropy's domain".into()));
    }
    let log_p = |from: Hairs, w: f64| -> Option<f64> {
        let rest = from - Hairs::energy(w);
        entropy.is_valid(&rest).then(|| entropy.entropy(&rest) - entropy.entropy(&from))
    };
    mutual_information_core(
        &omegas,
        |w| Ok(log_p(total, w)),
        |w1, w2| {
            let mid = total - Hairs::energy(w1);
            Ok(if entropy.is_valid(&mid) { log_p(mid, w2) } else { None })
        },
    )
}

/// Everything the information analysis reports for one state and grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfoReport {
    pub s_r: f64,
    pub s_cond: f64,
    pub s_cond_lowenergy: f64,
    pub s_cond_raw_weighted: f64,
    pub excluded_mass: f64,
    pub excluded_mass_warning: bool,
    pub e_r: f64,
    pub e_bprime: f64,
    pub correlation_mean: f64,
    pub correlation_max: f64,
    pub mi_numeric: f64,
    pub mi_paper_form: f64,
    pub mi_moment_form: f64,
    pub mi_paper_literal: f64,
    pub mi_covariance: f64,
}

pub fn info_report(state: &BlackHoleState, grid: &GridSpec) -> Result<InfoReport> {
    let spectrum = build_spectrum(state, grid, Normalization::UnitSum)?;
    let s_r = radiation_entropy(&spectrum)?;
    let cond = conditional_entropy(state, &spectrum)?;
    let energy_grid = GridSpec {
        charge: None,
        spin: None,
        ..grid.clone()
    };
    let omegas = energy_grid.omegas();
    let mut correlations = Vec::new();
    for &w1 in &omegas {
        for &w2 in &omegas {
            match pairwise_correlation(state, &Emission::energy(w1)?, &Emission::energy(w2)?) {
                Ok(c) => correlations.push(c),
                Err(Error::RemnantInvalid(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    let (correlation_mean, correlation_max) = if correlations.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        (
            neumaier_sum(correlations.iter().copied()) / correlations.len() as f64,
            correlations.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    };
    let mi = mutual_information(state, &energy_grid)?;
    Ok(InfoReport {
        s_r,
        s_cond: cond.exact,
        s_cond_lowenergy: cond.lowenergy,
        s_cond_raw_weighted: cond.raw_weighted,
        excluded_mass: cond.excluded_mass,
        excluded_mass_warning: cond.warning,
        e_r: cond.mean_omega,
        e_bprime: cond.remnant_energy,
        correlation_mean,
        correlation_max,
        mi_numeric: mi.mi_numeric,
        mi_paper_form: mi.mi_paper_form,
        mi_moment_form: mi.mi_moment_form,
        mi_paper_literal: mi.mi_paper_literal,
        mi_covariance: mi.covariance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub step: usize,
    /// `−ln Γ` of this emission.
    pub self_information: f64,
    /// Correlation of this emission with everything emitted before it, both
    /// measured from the initial state; `None` if this emission alone would
    /// leave an invalid remnant of the initial hole.
    pub correlation_with_prior: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InformationLedger {
    pub entries: Vec<LedgerEntry>,
    pub total_self_information: f64,
    /// `S(initial) − S(final)`.
    pub entropy_drop: f64,
    pub residual: f64,
    pub total_correlation: f64,
}

/// Per-emission self-information of a complete cascade and its total.
pub fn chain_information_ledger(chain: &EmissionChain) -> Result<InformationLedger> {
    if !chain.is_complete() {
        return Err(Error::Usage(format!(
            "information ledger needs a complete chain, got {:?}",
            chain.terminated
        )));
    }
    let mut entries = Vec::with_capacity(chain.steps.len());
    let mut prior = Emission::NONE;
    for (i, step) in chain.steps.iter().enumerate() {
        let correlation = match pairwise_correlation(&chain.initial, &prior, &step.emission) {
            Ok(c) => Some(c),
            Err(Error::RemnantInvalid(_)) => None,
            Err(e) => return Err(e),
        };
        entries.push(LedgerEntry {
            step: i,
            self_information: -step.step_log_weight,
            correlation_with_prior: correlation,
        });
        prior = prior + step.emission;
    }
    let total = neumaier_sum(entries.iter().map(|e| e.self_information));
    let drop = chain.initial.entropy() - chain.final_remnant().entropy();
    Ok(InformationLedger {
        total_correlation: neumaier_sum(entries.iter().filter_map(|e| e.correlation_with_prior)),
        entries,
        total_self_information: total,
        entropy_drop: drop,
        residual: (total - drop).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::{sample_cascade, Cascade, CascadePolicy, Termination};
    use crate::spectrum::QuantumAxis;
    use crate::typicality::LinearEntropy;

    fn sch(m: f64) -> BlackHoleState {
        BlackHoleState::schwarzschild(m).unwrap()
    }

    #[test]
    fn radiation_entropy_examples() {
        let one = build_spectrum(&sch(1.0), &GridSpec::energy(0.3, 1), Normalization::UnitSum).unwrap();
        assert_eq!(radiation_entropy(&one).unwrap(), 0.0);

        // Charge ±q from an uncharged hole: two bins of equal weight.
        let rn = BlackHoleState::reissner_nordstrom(2.0, 0.0).unwrap();
        let grid = GridSpec {
            charge: Some(QuantumAxis { step: 0.2, min: -1, max: 1 }),
            ..GridSpec::energy(0.5, 1)
        };
        let mut spec = build_spectrum(&rn, &grid, Normalization::UnitSum).unwrap();
        spec.bins.retain(|b| b.emission.q != 0.0);
        for b in &mut spec.bins {
            b.log_weight = 0.5f64.ln();
        }
        assert!((radiation_entropy(&spec).unwrap() - 2f64.ln()).abs() < 1e-15);

        let raw = build_spectrum(&sch(1.0), &GridSpec::energy(0.3, 4), Normalization::Raw).unwrap();
        assert!(matches!(radiation_entropy(&raw), Err(Error::Usage(_))));
    }

    #[test]
    fn conditional_entropy_concentrated_on_zero() {
        let s = sch(3.0);
        let grid = GridSpec::energy(0.0, 1);
        let spec = build_spectrum(&s, &grid, Normalization::UnitSum).unwrap();
        let c = conditional_entropy(&s, &spec).unwrap();
        assert_eq!(c.exact, s.entropy());
        assert_eq!(c.lowenergy, s.entropy());
        assert_eq!(c.mean_omega, 0.0);
        assert!(!c.warning);
    }

    #[test]
    fn conditional_entropy_low_energy_limit() {
        let s = sch(10.0);
        let spec = build_spectrum(&s, &GridSpec::energy(0.01, 64), Normalization::UnitSum).unwrap();
        let c = conditional_entropy(&s, &spec).unwrap();
        assert!(((c.exact - c.lowenergy) / c.exact).abs() <= 1e-4);
    }

    #[test]
    fn conditional_entropy_below_total() {
        let s = sch(1.0);
        let spec = build_spectrum(&s, &GridSpec::energy(1.0, 32), Normalization::UnitSum).unwrap();
        let c = conditional_entropy(&s, &spec).unwrap();
        assert!(c.exact < s.entropy());
        assert!((c.remnant_energy - (1.0 - c.mean_omega)).abs() < 1e-15);
    }

    #[test]
    fn conditional_entropy_reports_excluded_mass() {
        // Spectrum of a lightly charged hole evaluated against a heavily
        // charged one: some remnants become super-extremal.
        let light = BlackHoleState::reissner_nordstrom(1.0, 0.0).unwrap();
        let heavy = BlackHoleState::reissner_nordstrom(1.0, 0.9).unwrap();
        let spec = build_spectrum(&light, &GridSpec::energy(0.5, 8), Normalization::UnitSum).unwrap();
        let c = conditional_entropy(&heavy, &spec).unwrap();
        assert!(c.excluded_mass > 0.0);
        assert!(c.warning);
    }

    #[test]
    fn correlation_examples() {
        let s = sch(1.0);
        let e = Emission::energy(0.1).unwrap();
        let c = pairwise_correlation(&s, &e, &e).unwrap();
        assert!((c - 8.0 * PI * 0.01).abs() < 1e-12);
        assert!((c - 0.251327).abs() < 1e-6);
        assert_eq!(pairwise_correlation(&s, &e, &Emission::NONE).unwrap(), 0.0);
    }

    #[test]
    fn correlation_rn_matches_hand_arithmetic() {
        let s = BlackHoleState::reissner_nordstrom(2.0, 1.0).unwrap();
        let e1 = Emission::new(0.3, 0.2, 0.0).unwrap();
        let e2 = Emission::new(0.4, 0.1, 0.0).unwrap();
        let area = |m: f64, q: f64| {
            let r = m + (m * m - q * q).sqrt();
            PI * r * r
        };
        let s0 = area(2.0, 1.0);
        let oracle = (area(1.3, 0.7) - s0) - (area(1.7, 0.8) - s0) - (area(1.6, 0.9) - s0);
        let got = pairwise_correlation(&s, &e1, &e2).unwrap();
        assert!((got - oracle).abs() < 1e-10, "{got} vs {oracle}");
    }

    #[test]
    fn mutual_information_needs_two_bins() {
        assert!(matches!(
            mutual_information(&sch(1.0), &GridSpec::energy(0.5, 1)),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn linear_entropy_has_zero_mutual_information() {
        let lin = LinearEntropy { beta: 3.0 };
        let mi = mutual_information_with(&lin, Hairs::energy(10.0), &GridSpec::energy(2.0, 16)).unwrap();
        assert!(mi.mi_numeric.abs() < 1e-12, "{mi:?}");
        assert!(mi.covariance.abs() < 1e-12);
    }

    #[test]
    fn schwarzschild_mutual_information_identity() {
        let mi = mutual_information(&sch(1.0), &GridSpec::energy(0.5, 32)).unwrap();
        assert!(mi.mi_numeric >= -1e-10);
        // Brute-force moments of the same joint.
        let omegas = GridSpec::energy(0.5, 32).omegas();
        let mut joint = Vec::new();
        for &a in &omegas {
            for &b in &omegas {
                let l = -8.0 * PI * a * (1.0 - a / 2.0) - 8.0 * PI * b * ((1.0 - a) - b / 2.0);
                joint.push((a, b, l));
            }
        }
        let z = logsumexp(&joint.iter().map(|t| t.2).collect::<Vec<_>>());
        let m1: f64 = joint.iter().map(|t| (t.2 - z).exp() * t.0).sum();
        let m2: f64 = joint.iter().map(|t| (t.2 - z).exp() * t.1).sum();
        let m12: f64 = joint.iter().map(|t| (t.2 - z).exp() * t.0 * t.1).sum();
        let cov = m12 - m1 * m2;
        assert!(((mi.mi_moment_form - mi.mi_paper_form) - 8.0 * PI * cov).abs() < 1e-10);
    }

    #[test]
    fn info_report_fields() {
        let r = info_report(&sch(1.0), &GridSpec::energy(0.5, 16)).unwrap();
        assert!(r.s_r >= 0.0);
        assert!(r.mi_numeric >= -1e-10);
        assert!((r.e_r + r.e_bprime - 1.0).abs() < 1e-15);
        assert!(r.correlation_max > 0.0);
    }

    #[test]
    fn ledger_of_total_evaporation() {
        let s = sch(0.7);
        let p = CascadePolicy::energy_only(&s, 0.7, 0.0);
        let chain = sample_cascade(&s, &p, 0, 0).unwrap();
        let l = chain_information_ledger(&chain).unwrap();
        assert!((l.total_self_information - s.entropy()).abs() < 1e-12);
        assert_eq!(l.entries[0].correlation_with_prior, Some(0.0));
    }

    #[test]
    fn ledger_identical_across_enumeration() {
        let s = sch(1.0);
        let p = CascadePolicy::energy_only(&s, 0.2, 0.0);
        let cascade = Cascade::new(s, p).unwrap();
        for e in cascade.enumerate().unwrap() {
            let l = chain_information_ledger(&cascade.replay(&e.quanta).unwrap()).unwrap();
            assert!((l.total_self_information - 4.0 * PI).abs() < 1e-9);
        }
    }

    #[test]
    fn ledger_with_log_correction() {
        let s = sch(2.0).with_alpha(1.0).unwrap();
        let p = CascadePolicy::energy_only(&s, 0.5, 0.5);
        let chain = sample_cascade(&s, &p, 4, 2).unwrap();
        let l = chain_information_ledger(&chain).unwrap();
        let stop = sch(0.5).with_alpha(1.0).unwrap();
        assert!((l.total_self_information - (s.entropy() - stop.entropy())).abs() < 1e-9);
    }

    #[test]
    fn ledger_rejects_incomplete_chain() {
        let chain = EmissionChain {
            initial: sch(1.0),
            steps: vec![],
            terminated: Termination::MaxSteps,
        };
        assert!(matches!(chain_information_ledger(&chain), Err(Error::Usage(_))));
    }
}
