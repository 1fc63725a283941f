//! Output formats. Everything except the manifest timestamp is a pure
//! function of the run configuration.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::RunConfig;

pub const ARTIFACT: &str = "nonthermal";
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// 17 significant digits, round-trip exact for `f64`.
pub fn sci(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn create(path: &Path) -> std::io::Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()
}

/// `spectrum.csv` -> `spectrum.<suffix>`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

/// Attaches the config hash to a report.
#[derive(Serialize)]
pub struct Tagged<'a, T: Serialize> {
    pub config_hash: &'a str,
    #[serde(flatten)]
    pub body: &'a T,
}

#[derive(Serialize)]
pub struct Timestamp {
    pub started_unix_ms: u128,
    pub wall_time_ms: u128,
}

#[derive(Serialize)]
pub struct Manifest<'a> {
    pub artifact: &'static str,
    pub artifact_version: &'static str,
    pub config: &'a RunConfig,
    pub config_hash: String,
    pub outputs: BTreeMap<&'static str, String>,
    pub timestamp: Timestamp,
}

impl<'a> Manifest<'a> {
    pub fn new(config: &'a RunConfig, started: SystemTime, elapsed: Duration) -> Self {
        Manifest {
            artifact: ARTIFACT,
            artifact_version: ARTIFACT_VERSION,
            config,
            config_hash: config.hash(),
            outputs: BTreeMap::new(),
            timestamp: Timestamp {
                started_unix_ms: started.duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0),
                wall_time_ms: elapsed.as_millis(),
            },
        }
    }

    pub fn output(mut self, role: &'static str, path: &Path) -> Self {
        self.outputs.insert(role, path.display().to_string());
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scientific_format_round_trips() {
        for x in [0.1, -8.0 * std::f64::consts::PI, 1e-300, 123456789.0, 0.0] {
            let s = sci(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.len(), 18, "{s}");
        }
        assert_eq!(sci(f64::NAN), "NaN");
        assert_eq!(sci(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn sibling_swaps_extension() {
        assert_eq!(sibling(Path::new("out/a.csv"), "manifest.json"), Path::new("out/a.manifest.json"));
    }
}
