//! Command-line front end for the MIMO link simulator.
//!
//! - subcommands: `alloc`, `capacity-vs-k`, `ber-sweep`, `profile`
//! - flat key=value config files, validated before anything runs
//! - every output directory gets a manifest first, then the CSVs and a
//!   matplotlib script; reruns from a manifest are byte-identical
//! - exit codes: 0 success, 1 usage error, 2 runtime error
//!
//! Thread count comes from `--threads`, overridden by the
//! `AQUAMIMO_THREADS` environment variable when set.

mod config;
mod manifest;
mod output;

use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::Parser;

use aquamimo_core::{
    asymptotic_profile, ber_analytic, ber_sweep, build_plan, capacity_vs_k, derive_seed,
    profile_from_svd, sample_channel, svd, CapacityScheme, ExperimentResult, LinkConfig, LinkPlan,
    ProfileSource, SubchannelProfile,
};

use config::{runtime, usage, CliError, ExperimentConfig};
use manifest::write_manifest;
use output::AllocRow;

const THREADS_ENV: &str = "AQUAMIMO_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "aquamimo",
    version,
    about = "Power allocation, adaptive QAM sizing, and BER simulation for SVD-precoded MIMO links"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, clap::Subcommand)]
enum Cmd {
    /// Print the per-subchannel power, size, and BER table for one operating point
    Alloc(RunArgs),
    /// Sweep deactivation counts and write a mean-capacity CSV plus plot script
    CapacityVsK(RunArgs),
    /// Sweep SNR, simulate BER for each precoding scheme, write CSV plus plot script
    BerSweep(RunArgs),
    /// Dump the asymptotic subchannel noise profile
    Profile(RunArgs),
}

impl Cmd {
    fn args(&self) -> &RunArgs {
        match self {
            Cmd::Alloc(a) | Cmd::CapacityVsK(a) | Cmd::BerSweep(a) | Cmd::Profile(a) => a,
        }
    }
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// Path to the key=value config file
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Master seed; overrides the config file's seed key
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory for the manifest, CSV, and plot script
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker thread count, 0 for automatic
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli.cmd) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn dispatch(cmd: &Cmd) -> Result<(), CliError> {
    let args = cmd.args();
    configure_threads(args.threads)?;
    let mut cfg = ExperimentConfig::parse(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = args.out.as_deref();
    match cmd {
        Cmd::Alloc(_) => cmd_alloc(&cfg, out),
        Cmd::CapacityVsK(_) => cmd_capacity_vs_k(&cfg, out),
        Cmd::BerSweep(_) => cmd_ber_sweep(&cfg, out),
        Cmd::Profile(_) => cmd_profile(&cfg, out),
    }
}

/// Applies the thread count before any parallel work starts. The
/// environment variable wins over the flag; zero means automatic.
fn configure_threads(flag: Option<usize>) -> Result<(), CliError> {
    let count = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
            usage(format!("{THREADS_ENV} must be an unsigned integer, got '{v}'"))
        })?),
        Err(_) => flag,
    };
    if let Some(count) = count {
        rayon::ThreadPoolBuilder::new()
            .num_threads(count)
            .build_global()
            .map_err(|e| runtime(format!("cannot configure thread pool: {e}")))?;
    }
    Ok(())
}

fn build_profile(
    link: &LinkConfig,
    cfg: &ExperimentConfig,
) -> Result<SubchannelProfile, CliError> {
    match cfg.profile {
        ProfileSource::Asymptotic => {
            asymptotic_profile(link.n, link.noise_variance()).map_err(runtime)
        }
        ProfileSource::Empirical => {
            let channel = sample_channel(link.n, derive_seed(cfg.seed, 0)).map_err(runtime)?;
            let factors = svd(&channel.h).map_err(runtime)?;
            profile_from_svd(&factors, link.noise_variance()).map_err(runtime)
        }
    }
}

fn alloc_rows(profile: &SubchannelProfile, lp: &LinkPlan) -> Result<Vec<AllocRow>, CliError> {
    let sizes = lp.plan.sizes();
    let mut rows = Vec::with_capacity(profile.len());
    for i in 0..profile.len() {
        let m = sizes[i];
        let p = lp.alloc.p[i];
        let eta = profile.eta[i];
        let ber = if m >= 4 {
            ber_analytic(m, p, eta).map_err(runtime)?
        } else {
            0.0
        };
        rows.push(AllocRow { i, eta, p, m, ber });
    }
    Ok(rows)
}

fn cmd_alloc(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<(), CliError> {
    let snr = cfg.snr_db.ok_or_else(|| usage("alloc needs snr_db"))?;
    let link = cfg.link_config(snr);
    let profile = build_profile(&link, cfg)?;
    let lp = build_plan(&link, &profile).map_err(runtime)?;
    let rows = alloc_rows(&profile, &lp)?;
    println!(
        "{:>4} {:>14} {:>14} {:>7} {:>12}",
        "i", "eta", "p", "M", "ber"
    );
    for r in &rows {
        println!(
            "{:>4} {:>14.6e} {:>14.6e} {:>7} {:>12.4e}",
            r.i, r.eta, r.p, r.m, r.ber
        );
    }
    println!("k_opt={}", lp.k_opt);
    if let Some(dir) = out {
        write_manifest(dir, "alloc", cfg, &["alloc.csv"])?;
        output::write_file(dir, "alloc.csv", &output::alloc_csv(&rows))?;
    }
    Ok(())
}

fn cmd_capacity_vs_k(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<(), CliError> {
    let dir = out.ok_or_else(|| usage("capacity-vs-k needs --out DIR"))?;
    let snr = cfg.snr_db.ok_or_else(|| usage("capacity-vs-k needs snr_db"))?;
    let k_grid = cfg
        .k_grid
        .as_deref()
        .ok_or_else(|| usage("capacity-vs-k needs k_grid"))?;
    let trials = cfg
        .trials
        .ok_or_else(|| usage("capacity-vs-k needs trials"))?;
    if trials == 0 {
        return Err(usage("trials must be at least 1"));
    }
    if let Some(&bad) = k_grid.iter().find(|&&k| k >= cfg.n) {
        return Err(usage(format!(
            "k_grid entry {bad} must be below n = {}",
            cfg.n
        )));
    }
    let mut schemes = vec![
        CapacityScheme::Gaussian,
        CapacityScheme::Mwf,
        CapacityScheme::Ewf,
        CapacityScheme::WfEstimate,
    ];
    if let Some(target_ser) = cfg.target_ser {
        schemes.push(CapacityScheme::Palomar { target_ser });
    }
    write_manifest(
        dir,
        "capacity-vs-k",
        cfg,
        &["capacity.csv", "plot_capacity.py"],
    )?;
    let result = capacity_vs_k(cfg.n, cfg.power, snr, k_grid, trials, &schemes, cfg.seed)
        .map_err(runtime)?;
    let ExperimentResult::Capacity(rows) = result else {
        return Err(runtime("capacity sweep returned the wrong result kind"));
    };
    output::write_file(dir, "capacity.csv", &output::capacity_csv(&rows))?;
    output::write_file(dir, "plot_capacity.py", output::PLOT_CAPACITY)?;
    println!(
        "wrote {} rows to {}",
        rows.len(),
        dir.join("capacity.csv").display()
    );
    Ok(())
}

fn cmd_ber_sweep(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<(), CliError> {
    let dir = out.ok_or_else(|| usage("ber-sweep needs --out DIR"))?;
    let grid = cfg
        .snr_grid_db
        .as_deref()
        .ok_or_else(|| usage("ber-sweep needs snr_grid_db"))?;
    let trials = cfg.trials.ok_or_else(|| usage("ber-sweep needs trials"))?;
    if trials == 0 {
        return Err(usage("trials must be at least 1"));
    }
    if cfg.rate == 0 {
        return Err(usage("ber-sweep needs a positive even rate"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(usage("snr_grid_db must be strictly ascending"));
    }
    let snr0 = grid.first().copied().or(cfg.snr_db).unwrap_or(0.0);
    let template = cfg.link_config(snr0);
    write_manifest(dir, "ber-sweep", cfg, &["ber.csv", "plot_ber.py"])?;
    let result = ber_sweep(&template, grid, trials, cfg.seed).map_err(runtime)?;
    let ExperimentResult::Ber(rows) = result else {
        return Err(runtime("BER sweep returned the wrong result kind"));
    };
    output::write_file(dir, "ber.csv", &output::ber_csv(&rows))?;
    output::write_file(dir, "plot_ber.py", output::PLOT_BER)?;
    println!(
        "wrote {} rows to {}",
        rows.len(),
        dir.join("ber.csv").display()
    );
    Ok(())
}

fn cmd_profile(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<(), CliError> {
    let snr = cfg.snr_db.ok_or_else(|| usage("profile needs snr_db"))?;
    let link = cfg.link_config(snr);
    let profile = asymptotic_profile(cfg.n, link.noise_variance()).map_err(runtime)?;
    let csv = output::profile_csv(&profile.eta);
    print!("{csv}");
    if let Some(dir) = out {
        write_manifest(dir, "profile", cfg, &["profile.csv"])?;
        output::write_file(dir, "profile.csv", &csv)?;
    }
    Ok(())
}
