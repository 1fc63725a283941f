use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime};

use nonthermal::cascade::{ensemble_report, sample_ensemble, CascadePolicy};
use nonthermal::info::info_report;
use nonthermal::spectrum::QuantumAxis;
use nonthermal::typicality::{typicality_experiment, EnergyLedger};
use nonthermal::verify::{self, Suite, VerifyConfig};
use nonthermal::{build_spectrum, build_thermal_spectrum, BlackHoleState, Family, GridSpec, Normalization};
use serde::Serialize;

use crate::config::{Command, Resolver, RunConfig, TypicalitySetup};
use crate::output::{create, sci, sibling, write_json, Manifest, Tagged};
use crate::{CascadeArgs, Cli, Cmd, SpectrumArgs, StateArgs, TypicalityArgs, VerifyArgs};

/// CLI-level failure carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Core(nonthermal::Error),
    Io(PathBuf, std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => e.exit_code() as u8,
            CliError::Io(..) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
        }
    }
}

impl From<nonthermal::Error> for CliError {
    fn from(e: nonthermal::Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn io<T>(path: &Path, r: std::io::Result<T>) -> Result<T> {
    r.map_err(|e| CliError::Io(path.to_path_buf(), e))
}

pub fn dispatch(cli: Cli) -> Result<u8> {
    let cfg = match &cli.config {
        Some(p) => Resolver::from_file(p)?,
        None => Resolver::empty(),
    };
    if let Some(n) = cfg.get::<usize>("threads", cli.threads)? {
        if n == 0 {
            return Err(nonthermal::Error::Usage("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| nonthermal::Error::Usage(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Cmd::Spectrum(a) => spectrum(a, &cfg),
        Cmd::Cascade(a) => cascade(a, &cfg),
        Cmd::Verify(a) => verify(a, &cfg),
        Cmd::Typicality(a) => typicality(a, &cfg),
    }
}

fn state(a: StateArgs, cfg: &Resolver) -> Result<BlackHoleState> {
    let family: Family = cfg.parsed("family", a.family, "schwarzschild")?;
    let mass = cfg.require("mass", a.mass)?;
    let charge = cfg.or("charge", a.charge, 0.0)?;
    let j = cfg.or("angular-momentum", a.angular_momentum, 0.0)?;
    let alpha = cfg.or("alpha", a.alpha, 0.0)?;
    Ok(BlackHoleState::new(family, mass, charge, j, alpha)?)
}

fn axis(cfg: &Resolver, name: &str, step: Option<f64>, min: Option<i64>, max: Option<i64>) -> Result<Option<QuantumAxis>> {
    let step = cfg.get::<f64>(&format!("{name}-step"), step)?;
    let min = cfg.or(&format!("{name}-min"), min, 0)?;
    let max = cfg.or(&format!("{name}-max"), max, 0)?;
    Ok(step.map(|step| QuantumAxis { step, min, max }))
}

fn spectrum(a: SpectrumArgs, cfg: &Resolver) -> Result<u8> {
    let started = SystemTime::now();
    let clock = Instant::now();
    let s = state(a.state, cfg)?;
    let grid = GridSpec {
        omega_min: cfg.or("omega-min", a.omega_min, 0.0)?,
        omega_max: cfg.or("omega-max", a.omega_max, s.mass())?,
        n_omega: cfg.or("bins", a.bins, 64)?,
        charge: axis(cfg, "charge", a.charge_step, a.charge_min, a.charge_max)?,
        spin: axis(cfg, "spin", a.spin_step, a.spin_min, a.spin_max)?,
    };
    let normalization: Normalization = cfg.parsed("normalization", a.normalization, "unitsum")?;
    let seed = cfg.or("seed", a.seed, 0)?;
    let out = cfg.or("output", a.output, PathBuf::from("spectrum.csv"))?;
    let manifest_path = cfg.get("manifest", a.manifest)?.unwrap_or_else(|| sibling(&out, "manifest.json"));
    let report_path: Option<PathBuf> = cfg.get("report", a.report)?;
    cfg.finish()?;

    let mut run = RunConfig::new(Command::Spectrum, seed);
    run.state = Some(s);
    run.grid_spec = Some(grid.clone());
    run.normalization = Some(normalization);
    let hash = run.hash();

    let spec = build_spectrum(&s, &grid, normalization)?;
    let thermal = match build_thermal_spectrum(&s, &grid, normalization) {
        Ok(t) => Some(t),
        // No temperature at extremality; the column is NaN.
        Err(nonthermal::Error::Domain(_)) if s.is_extremal() => None,
        Err(e) => return Err(e.into()),
    };
    let report = report_path.as_ref().map(|_| info_report(&s, &grid)).transpose()?;

    let mut w = io(&out, create(&out))?;
    let mut body = format!("# config_hash={hash}\nomega,q,j,log_weight,weight,thermal_log_weight,valid\n");
    for (i, b) in spec.bins.iter().enumerate() {
        let th = thermal.as_ref().map_or(f64::NAN, |t| t.bins[i].log_weight);
        let weight = if b.valid { b.log_weight.exp() } else { 0.0 };
        body.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            sci(b.emission.omega),
            sci(b.emission.q),
            sci(b.emission.j),
            sci(b.log_weight),
            sci(weight),
            sci(th),
            b.valid
        ));
    }
    io(&out, w.write_all(body.as_bytes()).and_then(|_| w.flush()))?;

    let mut manifest = Manifest::new(&run, started, clock.elapsed()).output("csv", &out);
    if let (Some(p), Some(r)) = (&report_path, &report) {
        io(p, write_json(p, &Tagged { config_hash: &hash, body: r }))?;
        manifest = manifest.output("report", p);
    }
    io(&manifest_path, write_json(&manifest_path, &manifest))?;
    Ok(0)
}

#[derive(Serialize)]
struct StepRecord {
    sample_index: u64,
    step: usize,
    omega: f64,
    q: f64,
    j: f64,
    mass_before: f64,
    log_weight_raw: f64,
    log_prob_norm: f64,
    config_hash: String,
}

fn cascade(a: CascadeArgs, cfg: &Resolver) -> Result<u8> {
    let started = SystemTime::now();
    let clock = Instant::now();
    let s = state(a.state, cfg)?;
    let eps: f64 = cfg.require("energy-quantum", a.energy_quantum)?;
    let stop = cfg.or("stop-mass", a.stop_mass, CascadePolicy::default_stop_mass(&s))?;
    let mut policy = CascadePolicy::energy_only(&s, eps, stop);
    policy.max_steps = cfg.or("max-steps", a.max_steps, policy.max_steps)?;
    policy.charge_quantum = cfg.or("charge-quantum", a.charge_quantum, 1.0)?;
    policy.charge_moves = cfg.or("charge-moves", a.charge_moves, 0)?;
    policy.spin_quantum = cfg.or("spin-quantum", a.spin_quantum, 1.0)?;
    policy.spin_moves = cfg.or("spin-moves", a.spin_moves, 0)?;
    let n = cfg.or("samples", a.samples, 1000)?;
    let seed = cfg.or("seed", a.seed, 0)?;
    let out = cfg.or("output", a.output, PathBuf::from("cascade.jsonl"))?;
    let ensemble_path = cfg.get("ensemble", a.ensemble)?.unwrap_or_else(|| sibling(&out, "ensemble.json"));
    let manifest_path = cfg.get("manifest", a.manifest)?.unwrap_or_else(|| sibling(&out, "manifest.json"));
    cfg.finish()?;
    if n == 0 {
        return Err(nonthermal::Error::Usage("--samples must be at least 1".into()).into());
    }

    let mut run = RunConfig::new(Command::Cascade, seed);
    run.state = Some(s);
    run.policy = Some(policy);
    run.n_samples = Some(n);
    let hash = run.hash();

    let chains = sample_ensemble(&s, &policy, n, seed)?;
    let report = ensemble_report(&s, &policy, &chains, seed)?;

    let mut w = io(&out, create(&out))?;
    for (i, chain) in chains.iter().enumerate() {
        for (k, st) in chain.steps.iter().enumerate() {
            let rec = StepRecord {
                sample_index: i as u64,
                step: k,
                omega: st.emission.omega,
                q: st.emission.q,
                j: st.emission.j,
                mass_before: st.mass_before,
                log_weight_raw: st.step_log_weight,
                log_prob_norm: st.step_log_prob,
                config_hash: hash.clone(),
            };
            let line = serde_json::to_string(&rec).expect("step record serializes");
            io(&out, writeln!(w, "{line}"))?;
        }
    }
    io(&out, w.flush())?;
    io(&ensemble_path, write_json(&ensemble_path, &Tagged { config_hash: &hash, body: &report }))?;
    let manifest = Manifest::new(&run, started, clock.elapsed())
        .output("jsonl", &out)
        .output("ensemble", &ensemble_path);
    io(&manifest_path, write_json(&manifest_path, &manifest))?;
    Ok(0)
}

fn verify(a: VerifyArgs, cfg: &Resolver) -> Result<u8> {
    let suite: Suite = cfg.parsed("suite", a.suite, "all")?;
    let mut vc = VerifyConfig {
        seed: cfg.or("seed", a.seed, 42)?,
        ..VerifyConfig::default()
    };
    if let Some(alpha) = a.test_alpha {
        vc.alpha = alpha;
    }
    let output: Option<PathBuf> = cfg.get("output", a.output)?;
    let json = cfg.or("json", Some(a.json).filter(|j| *j), false)?;
    cfg.finish()?;

    let mut run = RunConfig::new(Command::Verify, vc.seed);
    run.suite = Some(suite.to_string());
    let hash = run.hash();
    let report = verify::run(suite, &vc)?;
    let tagged = Tagged { config_hash: &hash, body: &report };
    if let Some(p) = &output {
        io(p, write_json(p, &tagged))?;
    }
    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    let text = if json {
        serde_json::to_string_pretty(&tagged).expect("report serializes") + "\n"
    } else {
        let mut t = String::new();
        for s in &report.suites {
            for c in &s.checks {
                t.push_str(&format!(
                    "{}/{}: {} (measured {}, tolerance {})\n",
                    s.suite,
                    c.name,
                    if c.passed { "pass" } else { "FAIL" },
                    sci(c.measured),
                    sci(c.tolerance)
                ));
            }
        }
        t.push_str(if report.passed { "all checks passed\n" } else { "verification FAILED\n" });
        t
    };
    io(Path::new("<stdout>"), w.write_all(text.as_bytes()))?;
    Ok(if report.passed { 0 } else { 3 })
}

#[derive(Serialize)]
struct TypicalityOutput<'a> {
    config: &'a RunConfig,
    config_hash: String,
    microcanonical_weights: Vec<f64>,
    stats: nonthermal::typicality::TypicalityStats,
}

fn typicality(a: TypicalityArgs, cfg: &Resolver) -> Result<u8> {
    let setup = TypicalitySetup {
        levels: cfg.or("levels", a.levels, 2)?,
        degeneracy: cfg.or("degeneracy", a.degeneracy, 2)?,
        dim_o: cfg.or("dim-o", a.dim_o, 4096)?,
        n_seeds: cfg.or("samples", a.samples, 100)?,
    };
    let seed = cfg.or("seed", a.seed, 0)?;
    let output: Option<PathBuf> = cfg.get("output", a.output)?;
    cfg.finish()?;
    if setup.n_seeds == 0 {
        return Err(nonthermal::Error::Usage("--samples must be at least 1".into()).into());
    }
    let ledger = EnergyLedger::halving(setup.levels, setup.degeneracy, setup.dim_o)?;
    if ledger.dim_universe() > nonthermal::typicality::DEFAULT_MAX_UNIVERSE_DIM as u128 {
        return Err(nonthermal::Error::Usage(format!(
            "universe dimension {} exceeds the limit {}",
            ledger.dim_universe(),
            nonthermal::typicality::DEFAULT_MAX_UNIVERSE_DIM
        ))
        .into());
    }
    let seeds: Vec<u64> = (0..setup.n_seeds).map(|i| seed.wrapping_add(i)).collect();
    let stats = typicality_experiment(&ledger, &seeds)?;
    let mut run = RunConfig::new(Command::Typicality, seed);
    run.typicality = Some(setup);
    let doc = TypicalityOutput {
        config_hash: run.hash(),
        config: &run,
        microcanonical_weights: nonthermal::typicality::microcanonical_weights(&ledger)?,
        stats,
    };
    match output {
        Some(p) => io(&p, write_json(&p, &doc))?,
        None => println!("{}", serde_json::to_string_pretty(&doc).expect("serializes")),
    }
    Ok(0)
}
