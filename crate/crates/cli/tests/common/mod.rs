#![allow(dead_code)]

use std::path::{Path, PathBuf};

use atomlink_cli::config::Job;
use atomlink_cli::{execute, preset, presets, Artifact};

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

/// Runs a bundled preset with `threads` workers. Artifact paths are bare
/// file names so they can be matched against the golden directory.
pub fn run_preset(name: &str, threads: usize) -> Vec<Artifact> {
    let config = preset(name).unwrap_or_else(|e| panic!("{name}: {e}"));
    let ext = match config.job {
        Job::Storage(_) => "json",
        _ => "csv",
    };
    let out = PathBuf::from(format!("{name}.{ext}"));
    execute(&config, Some(&out), Some(threads)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn bless() -> bool {
    std::env::var_os("ATOMLINK_BLESS").is_some()
}

/// Compares the artifacts byte for byte against the committed files, or
/// rewrites them when blessing. Returns a description of every mismatch.
pub fn check_golden(artifacts: &[Artifact]) -> Vec<String> {
    let dir = golden_dir();
    let mut problems = Vec::new();
    for a in artifacts {
        let path = dir.join(&a.path);
        if bless() {
            std::fs::write(&path, &a.contents).unwrap();
            continue;
        }
        match std::fs::read(&path) {
            Ok(expected) if expected == a.contents => {}
            Ok(expected) => problems.push(format!(
                "{}: differs from golden ({} vs {} bytes)",
                a.path.display(),
                a.contents.len(),
                expected.len()
            )),
            Err(e) => problems.push(format!("{}: {e}", path.display())),
        }
    }
    problems
}

pub fn preset_names() -> Vec<&'static str> {
    presets::names().collect()
}

/// Parses CSV text into a header and rows of fields.
pub fn read_csv(bytes: &[u8]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers().unwrap().iter().map(str::to_owned).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(str::to_owned).collect())
        .collect();
    (header, rows)
}

pub fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

pub fn artifact<'a>(artifacts: &'a [Artifact], suffix: &str) -> &'a Artifact {
    artifacts
        .iter()
        .find(|a| a.path.to_string_lossy().ends_with(suffix))
        .unwrap_or_else(|| panic!("no artifact ending in {suffix}"))
}
