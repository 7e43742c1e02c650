//! Flat key=value configuration files for the simulator commands.
//!
//! - one `key=value` pair per line, `#` comments and blank lines skipped
//! - unknown keys rejected with a message listing all of them
//! - duplicate keys rejected
//! - values validated on read, so commands start from a checked config
//!
//! The same format doubles as the run manifest body: a manifest written
//! by one run parses back into the identical configuration, which is
//! what makes byte-identical reruns possible.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use aquamimo_core::{Allocator, AqamRule, LinkConfig, Precoder, ProfileSource};

/// Command failure, split by exit code: usage errors exit with 1,
/// runtime errors with 2.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Runtime(msg) => write!(f, "{msg}"),
        }
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn runtime(msg: impl std::fmt::Display) -> CliError {
    CliError::Runtime(msg.to_string())
}

const KNOWN_KEYS: [&str; 13] = [
    "n",
    "power",
    "snr_db",
    "snr_grid_db",
    "rate",
    "allocator",
    "aqam",
    "target_ser",
    "precoder",
    "profile",
    "trials",
    "seed",
    "k_grid",
];

/// Everything a config file can specify. Single-point keys stay `Option`
/// because each subcommand needs a different subset; `parse` checks the
/// keys every command needs and `LinkConfig::validate` checks the rest.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub n: usize,
    pub power: f64,
    pub snr_db: Option<f64>,
    pub snr_grid_db: Option<Vec<f64>>,
    pub rate: u64,
    pub allocator: Allocator,
    pub aqam: AqamRule,
    pub target_ser: Option<f64>,
    pub precoder: Precoder,
    pub profile: ProfileSource,
    pub trials: Option<u64>,
    pub seed: u64,
    pub k_grid: Option<Vec<usize>>,
}

impl ExperimentConfig {
    /// Reads and validates a config file. Errors are usage errors: the
    /// file is the user's input, and every message names the offending
    /// key or line.
    pub fn parse(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse_str(&text)
    }

    pub fn parse_str(text: &str) -> Result<Self, CliError> {
        let map = key_value_map(text)?;
        let cfg = ExperimentConfig {
            n: required(&map, "n")?,
            power: required(&map, "power")?,
            snr_db: optional(&map, "snr_db")?,
            snr_grid_db: map
                .get("snr_grid_db")
                .map(|v| float_list(v))
                .transpose()
                .map_err(|e| usage(format!("key 'snr_grid_db': {e}")))?,
            rate: required(&map, "rate")?,
            allocator: allocator_value(required::<String>(&map, "allocator")?.as_str())?,
            aqam: aqam_value(required::<String>(&map, "aqam")?.as_str())?,
            target_ser: optional(&map, "target_ser")?,
            precoder: match map.get("precoder") {
                Some(v) => precoder_value(v)?,
                None => Precoder::FullSvd,
            },
            profile: match map.get("profile") {
                Some(v) => profile_value(v)?,
                None => ProfileSource::Asymptotic,
            },
            trials: optional(&map, "trials")?,
            seed: optional(&map, "seed")?.unwrap_or(1),
            k_grid: map
                .get("k_grid")
                .map(|v| index_list(v))
                .transpose()
                .map_err(|e| usage(format!("key 'k_grid': {e}")))?,
        };
        if cfg.snr_db.is_none() && cfg.snr_grid_db.is_none() {
            return Err(usage("config needs snr_db or snr_grid_db"));
        }
        cfg.link_config(cfg.representative_snr())
            .validate()
            .map_err(|e| usage(e.to_string()))?;
        Ok(cfg)
    }

    /// The link configuration at one operating point. BER sweeps call
    /// this once per grid entry; single-point commands use `snr_db`.
    pub fn link_config(&self, snr_db: f64) -> LinkConfig {
        LinkConfig {
            n: self.n,
            power: self.power,
            snr_db,
            target_rate: self.rate,
            allocator: self.allocator,
            aqam: self.aqam,
            target_ser: self.target_ser,
            precoder: self.precoder,
            profile_source: self.profile,
        }
    }

    fn representative_snr(&self) -> f64 {
        self.snr_db
            .or_else(|| self.snr_grid_db.as_ref().and_then(|g| g.first().copied()))
            .unwrap_or(0.0)
    }

    /// Canonical key=value rendering. Parsing this text reproduces the
    /// configuration exactly, including the effective seed, so it is the
    /// body of every run manifest.
    pub fn canonical_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n={}", self.n);
        let _ = writeln!(s, "power={}", self.power);
        if let Some(v) = self.snr_db {
            let _ = writeln!(s, "snr_db={v}");
        }
        if let Some(g) = &self.snr_grid_db {
            let _ = writeln!(s, "snr_grid_db={}", join_floats(g));
        }
        let _ = writeln!(s, "rate={}", self.rate);
        let _ = writeln!(
            s,
            "allocator={}",
            match self.allocator {
                Allocator::Wf => "wf",
                Allocator::Mwf => "mwf",
                Allocator::Ewf => "ewf",
                Allocator::SerWf => "ser_wf",
            }
        );
        let _ = writeln!(
            s,
            "aqam={}",
            match self.aqam {
                AqamRule::FromWf => "lemma4",
                AqamRule::Palomar => "palomar",
            }
        );
        if let Some(v) = self.target_ser {
            let _ = writeln!(s, "target_ser={v}");
        }
        let _ = writeln!(
            s,
            "precoder={}",
            match self.precoder {
                Precoder::FullSvd => "full_svd",
                Precoder::TruncatedSvd => "truncated_svd",
            }
        );
        let _ = writeln!(
            s,
            "profile={}",
            match self.profile {
                ProfileSource::Asymptotic => "asymptotic",
                ProfileSource::Empirical => "empirical",
            }
        );
        if let Some(t) = self.trials {
            let _ = writeln!(s, "trials={t}");
        }
        let _ = writeln!(s, "seed={}", self.seed);
        if let Some(g) = &self.k_grid {
            let _ = writeln!(
                s,
                "k_grid={}",
                g.iter()
                    .map(|k| k.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            );
        }
        s
    }
}

fn key_value_map(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    let mut unknown = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(usage(format!(
                "config line {}: expected key=value, got '{line}'",
                idx + 1
            )));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            unknown.push(key);
            continue;
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(usage(format!("duplicate config key '{key}'")));
        }
    }
    if !unknown.is_empty() {
        unknown.sort();
        unknown.dedup();
        return Err(usage(format!(
            "unknown config keys: {}",
            unknown.join(", ")
        )));
    }
    Ok(map)
}

fn required<T: std::str::FromStr>(
    map: &BTreeMap<String, String>,
    key: &str,
) -> Result<T, CliError> {
    match map.get(key) {
        Some(v) => parse_value(key, v),
        None => Err(usage(format!("missing required config key '{key}'"))),
    }
}

fn optional<T: std::str::FromStr>(
    map: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>, CliError> {
    map.get(key).map(|v| parse_value(key, v)).transpose()
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| usage(format!("key '{key}': cannot parse value '{value}'")))
}

fn allocator_value(v: &str) -> Result<Allocator, CliError> {
    match v {
        "wf" => Ok(Allocator::Wf),
        "mwf" => Ok(Allocator::Mwf),
        "ewf" => Ok(Allocator::Ewf),
        "ser_wf" => Ok(Allocator::SerWf),
        other => Err(usage(format!(
            "key 'allocator': expected wf, mwf, ewf, or ser_wf, got '{other}'"
        ))),
    }
}

fn aqam_value(v: &str) -> Result<AqamRule, CliError> {
    match v {
        "lemma4" => Ok(AqamRule::FromWf),
        "palomar" => Ok(AqamRule::Palomar),
        other => Err(usage(format!(
            "key 'aqam': expected lemma4 or palomar, got '{other}'"
        ))),
    }
}

fn precoder_value(v: &str) -> Result<Precoder, CliError> {
    match v {
        "full_svd" => Ok(Precoder::FullSvd),
        "truncated_svd" => Ok(Precoder::TruncatedSvd),
        other => Err(usage(format!(
            "key 'precoder': expected full_svd or truncated_svd, got '{other}'"
        ))),
    }
}

fn profile_value(v: &str) -> Result<ProfileSource, CliError> {
    match v {
        "asymptotic" => Ok(ProfileSource::Asymptotic),
        "empirical" => Ok(ProfileSource::Empirical),
        other => Err(usage(format!(
            "key 'profile': expected asymptotic or empirical, got '{other}'"
        ))),
    }
}

/// Comma-separated floats; an empty value is an empty list.
fn float_list(v: &str) -> Result<Vec<f64>, String> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|item| {
            let item = item.trim();
            item.parse::<f64>()
                .map_err(|_| format!("cannot parse '{item}' as a number"))
        })
        .collect()
}

fn join_floats(g: &[f64]) -> String {
    g.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Comma-separated indices, each either one integer or a half-open
/// range `a..b`; an empty value is an empty list.
fn index_list(v: &str) -> Result<Vec<usize>, String> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for item in v.split(',') {
        let item = item.trim();
        if let Some((a, b)) = item.split_once("..") {
            let a: usize = a
                .trim()
                .parse()
                .map_err(|_| format!("cannot parse '{a}' as an index"))?;
            let b: usize = b
                .trim()
                .parse()
                .map_err(|_| format!("cannot parse '{b}' as an index"))?;
            if a >= b {
                return Err(format!("empty range '{item}'"));
            }
            out.extend(a..b);
        } else {
            out.push(
                item.parse()
                    .map_err(|_| format!("cannot parse '{item}' as an index"))?,
            );
        }
    }
    Ok(out)
}
