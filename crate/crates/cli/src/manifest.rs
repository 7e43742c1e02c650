//! Run manifests: a provenance header plus the canonical config.
//!
//! - written into the output directory before any result file
//! - the body is a valid config file, so `--config manifest.txt` reruns
//!   the experiment and reproduces every output byte for byte
//! - header comments carry the experiment name, tool version, and the
//!   list of files the run produces

use std::fmt::Write as _;
use std::path::Path;

use crate::config::{runtime, CliError, ExperimentConfig};

pub const MANIFEST_FILE: &str = "manifest.txt";

pub fn manifest_text(experiment: &str, cfg: &ExperimentConfig, outputs: &[&str]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# aquamimo run manifest");
    let _ = writeln!(s, "# experiment: {experiment}");
    let _ = writeln!(
        s,
        "# version: {} {}",
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION")
    );
    let _ = writeln!(s, "# outputs: {}", outputs.join(", "));
    let _ = writeln!(
        s,
        "# rerun: aquamimo {experiment} --config {MANIFEST_FILE} --out DIR"
    );
    s.push('\n');
    s.push_str(&cfg.canonical_text());
    s
}

/// Creates the output directory and writes the manifest. Called before
/// the experiment runs, so an interrupted run still records its intent.
pub fn write_manifest(
    out_dir: &Path,
    experiment: &str,
    cfg: &ExperimentConfig,
    outputs: &[&str],
) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| runtime(format!("cannot create {}: {e}", out_dir.display())))?;
    let path = out_dir.join(MANIFEST_FILE);
    std::fs::write(&path, manifest_text(experiment, cfg, outputs))
        .map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_body_parses_back_to_the_same_config() {
        let cfg = ExperimentConfig::parse_str(
            "n=8\npower=16\nsnr_db=12\nrate=16\nallocator=mwf\naqam=lemma4\nseed=7\n",
        )
        .expect("config must parse");
        let text = manifest_text("alloc", &cfg, &["alloc.csv"]);
        let back = ExperimentConfig::parse_str(&text).expect("manifest body must parse");
        assert_eq!(
            back.canonical_text(),
            cfg.canonical_text(),
            "manifest round trip changed the config"
        );
        assert!(
            text.contains("# experiment: alloc"),
            "missing experiment header in:\n{text}"
        );
    }
}
