//! CSV emission and plot-script generation.
//!
//! - fixed column sets per experiment, header row always present
//! - floats rendered with `{}` so the file reads back to the exact
//!   in-process value; decimal separator is always '.'
//! - every file ends with a newline
//! - plots are generated matplotlib scripts next to the CSV, not images

use std::fmt::Write as _;
use std::path::Path;

use aquamimo_core::{BerRow, CapacityRow};

use crate::config::{runtime, CliError};

/// One row of the alloc table: subchannel index, normalized noise power,
/// transmit power, constellation size, and analytic BER.
pub struct AllocRow {
    pub i: usize,
    pub eta: f64,
    pub p: f64,
    pub m: u32,
    pub ber: f64,
}

pub fn capacity_csv(rows: &[CapacityRow]) -> String {
    let mut s = String::from("k,scheme,mean_capacity,ci95,trials\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.k, r.scheme, r.mean_capacity, r.ci95, r.trials
        );
    }
    s
}

pub fn ber_csv(rows: &[BerRow]) -> String {
    let mut s = String::from("snr_db,scheme,ber,ci95,bits,k_opt\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.snr_db, r.scheme, r.ber, r.ci95, r.bits, r.k_opt
        );
    }
    s
}

pub fn alloc_csv(rows: &[AllocRow]) -> String {
    let mut s = String::from("i,eta,p,m,ber\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{},{}", r.i, r.eta, r.p, r.m, r.ber);
    }
    s
}

pub fn profile_csv(eta: &[f64]) -> String {
    let mut s = String::from("i,eta\n");
    for (i, e) in eta.iter().enumerate() {
        let _ = writeln!(s, "{i},{e}");
    }
    s
}

pub fn write_file(dir: &Path, name: &str, content: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, content)
        .map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))
}

pub const PLOT_CAPACITY: &str = r#"#!/usr/bin/env python3
"""Plot mean capacity against the number of deactivated subchannels."""
import csv
import os
from collections import defaultdict

import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
series = defaultdict(lambda: ([], [], []))
with open(os.path.join(here, "capacity.csv"), newline="") as f:
    for row in csv.DictReader(f):
        xs, ys, es = series[row["scheme"]]
        xs.append(int(row["k"]))
        ys.append(float(row["mean_capacity"]))
        es.append(float(row["ci95"]))

fig, ax = plt.subplots(figsize=(7, 4.5))
for scheme in sorted(series):
    xs, ys, es = series[scheme]
    ax.errorbar(xs, ys, yerr=es, marker="o", markersize=3, capsize=2, label=scheme)
ax.set_xlabel("deactivated subchannels k")
ax.set_ylabel("mean capacity (bit / channel use)")
ax.grid(True, alpha=0.3)
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(here, "capacity.png"), dpi=160)
print("wrote capacity.png")
"#;

pub const PLOT_BER: &str = r#"#!/usr/bin/env python3
"""Plot BER against SNR for each precoding scheme."""
import csv
import os
from collections import defaultdict

import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
series = defaultdict(lambda: ([], [], []))
with open(os.path.join(here, "ber.csv"), newline="") as f:
    for row in csv.DictReader(f):
        xs, ys, es = series[row["scheme"]]
        xs.append(float(row["snr_db"]))
        ys.append(float(row["ber"]))
        es.append(float(row["ci95"]))

fig, ax = plt.subplots(figsize=(7, 4.5))
for scheme in sorted(series):
    xs, ys, es = series[scheme]
    ax.errorbar(xs, ys, yerr=es, marker="s", markersize=4, capsize=2, label=scheme)
ax.set_yscale("log")
ax.set_xlabel("SNR (dB)")
ax.set_ylabel("bit error rate")
ax.grid(True, which="both", alpha=0.3)
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(here, "ber.png"), dpi=160)
print("wrote ber.png")
"#;
