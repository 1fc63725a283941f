//! Release gate. Runs every acceptance criterion at its stated size and
//! tolerance and prints one PASS/FAIL line each. Exits non-zero on any
//! failure.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nonthermal::cascade::{enumerate_chains, sampler_chi_square, CascadePolicy};
use nonthermal::typicality::typicality_experiment;
use nonthermal::verify::{
    cascade_telescoping_residual, correlation_residual, ledger_residual, log_correction_residual,
    parikh_wilczek_residual, reissner_nordstrom_residual, thermal_deviation_residual, typicality_ledger,
};
use nonthermal::BlackHoleState;

const SEED: u64 = 20240917;

struct Outcome {
    passed: bool,
    detail: String,
}

fn criterion(id: u32, name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let out = f();
    let elapsed = t.elapsed();
    let in_time = elapsed <= limit;
    let passed = out.passed && in_time;
    println!(
        "criterion {id} {name}: {} ({}; {:.2}s of {}s)",
        if passed { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    passed
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_nonthermal")
}

fn run_cli(args: &[&str], dir: &Path) -> (i32, Vec<u8>) {
    let out = Command::new(bin()).args(args).current_dir(dir).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn strip_timestamp(manifest: &[u8]) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_slice(manifest).expect("manifest is JSON");
    v.as_object_mut().expect("object").remove("timestamp");
    v
}

fn main() {
    let mut all = true;

    all &= criterion(1, "parikh_wilczek_identity", Duration::from_secs(5), || {
        let r = parikh_wilczek_residual(1_000_000, SEED).unwrap();
        Outcome {
            passed: r <= 1e-9,
            detail: format!("10^6 pairs, max scaled residual {r:.3e} <= 1e-9"),
        }
    });

    all &= criterion(2, "reissner_nordstrom_identity", Duration::from_secs(5), || {
        let r = reissner_nordstrom_residual(100_000, SEED).unwrap();
        Outcome {
            passed: r <= 1e-9,
            detail: format!("10^5 draws, max relative residual {r:.3e} <= 1e-9"),
        }
    });

    all &= criterion(3, "factorization_telescoping", Duration::from_secs(10), || {
        let (tele, _) = cascade_telescoping_residual(10_000, SEED, 1.0).unwrap();
        let m = 1.0;
        let s = BlackHoleState::schwarzschild(m).unwrap();
        let chains = enumerate_chains(&s, &CascadePolicy::energy_only(&s, m / 5.0, 0.0)).unwrap();
        let path = chains
            .iter()
            .map(|c| (c.raw_log_prob + 4.0 * PI * m * m).abs())
            .fold(0.0, f64::max);
        Outcome {
            passed: tele <= 1e-9 && chains.len() == 16 && path <= 1e-9,
            detail: format!(
                "10^4 chains max residual {tele:.3e}; {} enumerated chains, max |raw + 4πM²| {path:.3e}",
                chains.len()
            ),
        }
    });

    all &= criterion(4, "thermal_limit_identity", Duration::from_secs(1), || {
        let r = thermal_deviation_residual(100_000, SEED).unwrap();
        Outcome {
            passed: r <= 1e-10,
            detail: format!("10^5 draws, max |Δ + 4πω²| {r:.3e} <= 1e-10"),
        }
    });

    all &= criterion(5, "correlation_witness", Duration::from_secs(10), || {
        let c = correlation_residual(100_000, SEED).unwrap();
        let l = ledger_residual(1000, SEED, 1.0).unwrap();
        Outcome {
            passed: c <= 1e-9 && l <= 1e-9,
            detail: format!("correlation residual {c:.3e}, ledger residual {l:.3e}"),
        }
    });

    all &= criterion(6, "typicality_lab", Duration::from_secs(60), || {
        let seeds: Vec<u64> = (0..100).map(|i| SEED + i).collect();
        let base = typicality_experiment(&typicality_ledger(1 << 12).unwrap(), &seeds).unwrap();
        let quad = typicality_experiment(&typicality_ledger(1 << 14).unwrap(), &seeds).unwrap();
        let ratio = quad.mean_offdiag_rms / base.mean_offdiag_rms;
        Outcome {
            passed: base.dim_system == 4 && base.mean_weight_l1 < 0.05 && (0.35..=0.7).contains(&ratio),
            detail: format!(
                "dim_B {}, mean L1 {:.4e} < 0.05, off-diagonal ratio {ratio:.4} in [0.35, 0.7]",
                base.dim_system, base.mean_weight_l1
            ),
        }
    });

    all &= criterion(7, "sampler_consistency", Duration::from_secs(30), || {
        let s = BlackHoleState::schwarzschild(1.0).unwrap();
        let chi = sampler_chi_square(&s, &CascadePolicy::energy_only(&s, 0.2, 0.0), 1_000_000, SEED).unwrap();
        Outcome {
            passed: chi.p_value >= 0.01,
            detail: format!(
                "10^6 samples, χ² {:.3} on {} dof, p {:.4} >= 0.01",
                chi.statistic, chi.degrees_of_freedom, chi.p_value
            ),
        }
    });

    all &= criterion(8, "log_correction_identity", Duration::from_secs(1), || {
        let r = log_correction_residual(10_000, SEED, &[1.0, -1.0, 0.5, -2.5]).unwrap();
        Outcome {
            passed: r <= 1e-10,
            detail: format!("10^4 draws, max residual {r:.3e} <= 1e-10"),
        }
    });

    all &= criterion(9, "determinism_gate", Duration::from_secs(180), || {
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        let mut runs = Vec::new();
        for d in &dirs {
            let (code, stdout) = run_cli(&["verify", "--suite", "all", "--output", "report.json"], d.path());
            let report = std::fs::read(d.path().join("report.json")).unwrap_or_default();
            let spectrum_args = [
                "spectrum", "--family", "kn", "--mass", "3", "--charge", "0.5", "--angular-momentum", "1",
                "--alpha", "1", "--bins", "256", "--seed", "7", "--output", "s.csv", "--report", "r.json",
            ];
            let (scode, _) = run_cli(&spectrum_args, d.path());
            let csv = std::fs::read(d.path().join("s.csv")).unwrap_or_default();
            let info = std::fs::read(d.path().join("r.json")).unwrap_or_default();
            let manifest = strip_timestamp(&std::fs::read(d.path().join("s.manifest.json")).unwrap());
            runs.push((code, stdout, report, scode, csv, info, manifest));
        }
        let (a, b) = (&runs[0], &runs[1]);
        let exits_ok = a.0 == 0 && b.0 == 0 && a.3 == 0 && b.3 == 0;
        let identical = a.1 == b.1 && a.2 == b.2 && a.4 == b.4 && a.5 == b.5 && a.6 == b.6;
        Outcome {
            passed: exits_ok && identical && !a.2.is_empty() && !a.4.is_empty(),
            detail: format!(
                "verify exits {}/{}, spectrum exits {}/{}, outputs byte-identical: {identical}",
                a.0, b.0, a.3, b.3
            ),
        }
    });

    if all {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: FAILED");
        std::process::exit(1);
    }
}
