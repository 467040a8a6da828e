//! Executes a configuration and writes its output directory.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::json::to_string_pretty;
use crate::scenarios::{Artifact, Check};

pub const RESULTS_FILE: &str = "results.json";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedSource {
    Config,
    Environment,
}

/// Provenance of one run. Unlike `results.json` this is not reproducible
/// byte for byte: it records wall time and a timestamp.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub config: Value,
    pub config_hash: String,
    pub seed: u64,
    pub seed_source: SeedSource,
    pub version: String,
    /// `git rev-parse HEAD` of the working directory, when available.
    pub git_commit: Option<String>,
    pub started_unix_seconds: u64,
    pub wall_time_seconds: f64,
    pub output_dir: PathBuf,
    pub files: Vec<String>,
    pub checks: Vec<Check>,
    pub all_checks_passed: bool,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub seed_override: Option<u64>,
}

/// `--out`, then the configured `output_path`, then `runs/<scenario>-<hash prefix>`.
pub fn output_dir(config: &ExperimentConfig, options: &RunOptions) -> PathBuf {
    options
        .out_dir
        .clone()
        .or_else(|| config.output_path.clone())
        .unwrap_or_else(|| {
            PathBuf::from("runs").join(format!(
                "{}-{}",
                config.scenario.name(),
                &config.hash()[..12]
            ))
        })
}

fn write_csv(
    path: &Path,
    hash: &str,
    header: &[String],
    rows: &[Vec<String>],
) -> Result<(), CliError> {
    let mut file = fs::File::create(path)?;
    writeln!(file, "# config_hash={hash}")?;
    let mut writer = csv::Writer::from_writer(file);
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    writer.write_record(header).map_err(io)?;
    for row in rows {
        writer.write_record(row).map_err(io)?;
    }
    writer.flush()?;
    Ok(())
}

fn git_commit() -> Option<String> {
    let out = std::process::Command::new("git")
        .args(["rev-parse", "HEAD"])
        .output()
        .ok()?;
    out.status
        .success()
        .then(|| String::from_utf8_lossy(&out.stdout).trim().to_string())
}

pub fn run(config: ExperimentConfig, options: &RunOptions) -> Result<RunReport, CliError> {
    let started = Instant::now();
    let started_unix_seconds = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut config = config;
    let seed_source = match options.seed_override {
        Some(seed) => {
            config.seed = seed;
            SeedSource::Environment
        }
        None => SeedSource::Config,
    };
    let hash = config.hash();
    let out_dir = output_dir(&config, options);

    let output = config.scenario.run(&config.parameters, config.seed)?;

    fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    let results = json!({
        "scenario": config.scenario.name(),
        "seed": config.seed,
        "config_hash": hash,
        "parameters": Value::Object(config.parameters.clone()),
        "results": output.results,
        "checks": serde_json::to_value(&output.checks).expect("serializable"),
    });
    fs::write(out_dir.join(RESULTS_FILE), to_string_pretty(&results))?;
    let mut files = vec![RESULTS_FILE.to_string()];
    for artifact in &output.artifacts {
        let path = out_dir.join(artifact.file());
        match artifact {
            Artifact::Csv { header, rows, .. } => write_csv(&path, &hash, header, rows)?,
            Artifact::Json { value, .. } => fs::write(&path, to_string_pretty(value))?,
        }
        files.push(artifact.file().to_string());
    }
    files.push(REPORT_FILE.to_string());

    let mut echoed = config.canonical();
    if let Some(p) = &config.output_path {
        echoed["output_path"] = json!(p);
    }
    let report = RunReport {
        scenario: config.scenario.name().to_string(),
        config: echoed,
        config_hash: hash,
        seed: config.seed,
        seed_source,
        version: env!("CARGO_PKG_VERSION").to_string(),
        git_commit: git_commit(),
        started_unix_seconds,
        wall_time_seconds: started.elapsed().as_secs_f64(),
        output_dir: out_dir.clone(),
        files,
        all_checks_passed: output.checks.iter().all(|c| c.passed),
        checks: output.checks,
    };
    fs::write(
        out_dir.join(REPORT_FILE),
        to_string_pretty(&serde_json::to_value(&report).expect("serializable")),
    )?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse;

    fn curves() -> ExperimentConfig {
        parse(&json!({
            "scenario": "zeno-curves",
            "seed": 4,
            "parameters": {"N": [1, 3], "r": [0.6], "sigma": 0.1, "points": 21},
        }))
        .unwrap()
    }

    #[test]
    fn output_dir_precedence() {
        let mut cfg = curves();
        let default = output_dir(&cfg, &RunOptions::default());
        assert!(default.starts_with("runs"));
        cfg.output_path = Some("configured".into());
        assert_eq!(
            output_dir(&cfg, &RunOptions::default()),
            PathBuf::from("configured")
        );
        let opts = RunOptions {
            out_dir: Some("flag".into()),
            seed_override: None,
        };
        assert_eq!(output_dir(&cfg, &opts), PathBuf::from("flag"));
    }

    #[test]
    fn writes_results_artifacts_and_report() {
        let dir = tempfile::tempdir().unwrap();
        let opts = RunOptions {
            out_dir: Some(dir.path().to_path_buf()),
            seed_override: Some(77),
        };
        let report = run(curves(), &opts).unwrap();
        assert_eq!(report.seed, 77);
        assert_eq!(report.seed_source, SeedSource::Environment);
        assert!(report.all_checks_passed);
        let csv = fs::read_to_string(dir.path().join("zeno_curves.csv")).unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            format!("# config_hash={}", report.config_hash)
        );
        assert_eq!(lines.next().unwrap(), "N,r,Q,f_exact,f_gauss");
        assert_eq!(lines.count(), 2 * 21);
        let results: Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join(RESULTS_FILE)).unwrap())
                .unwrap();
        assert_eq!(results["seed"], 77);
        assert!(dir.path().join(REPORT_FILE).exists());
    }
}
