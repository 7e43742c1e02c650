//! End-to-end link assembly and the two experiment drivers.
//!
//! A link plan is built in five stages: waterfilling-family base powers,
//! adaptive constellation sizing, a constellation-aware re-allocation,
//! greedy bit allocation to the exact target rate, and a final
//! re-allocation so powers match the final sizes. Monte Carlo trials
//! push random bits through the full transmit path (precode, channel,
//! noise, rotate, equalize, slice) and count bit errors.
//!
//! Trials are independent tasks keyed by (master seed, trial index) and
//! reduced in index order, so results do not depend on thread count or
//! scheduling.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::bitalloc::bit_allocate;
use crate::channel::{
    derive_seed, profile_from_svd, sample_channel, svd, truncated_svd, ProfileSource,
    SubchannelProfile,
};
use crate::error::{Error, Result};
use crate::numerics::Tolerance;
use crate::power::{
    count_deactivated, error_waterfill, mercury_waterfill, ser_waterfill, waterfill, Policy,
    PowerAllocation,
};
use crate::qam::{aqam_from_wf, aqam_palomar, capacity_gaussian, capacity_qam,
    capacity_wf_estimate, Constellation, QamPlan};

/// Power allocator selector for a link.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Allocator {
    Wf,
    Mwf,
    Ewf,
    SerWf,
}

/// Adaptive constellation sizing rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AqamRule {
    /// Sizes from the waterfilling ratio p/eta.
    FromWf,
    /// Sizes from 1 + p/(eta Gamma) at the configured target SER, powered
    /// by the gap-scaled waterfilling.
    Palomar,
}

/// Which factorization the transmitter precodes with.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precoder {
    FullSvd,
    TruncatedSvd,
}

/// Full description of one link experiment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkConfig {
    pub n: usize,
    /// Total transmit power budget P.
    pub power: f64,
    /// SNR in dB; the noise variance is P / 10^(snr_db/10).
    pub snr_db: f64,
    /// Target bits per channel use, even.
    pub target_rate: u64,
    pub allocator: Allocator,
    pub aqam: AqamRule,
    /// Required when the allocator is SerWf or the sizing rule is
    /// Palomar.
    pub target_ser: Option<f64>,
    pub precoder: Precoder,
    pub profile_source: ProfileSource,
}

impl LinkConfig {
    pub fn noise_variance(&self) -> f64 {
        self.power * 10f64.powf(-self.snr_db / 10.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::domain("channel dimension must be at least 1"));
        }
        if !(self.power > 0.0 && self.power.is_finite()) {
            return Err(Error::domain(format!(
                "power budget must be positive and finite, got {}",
                self.power
            )));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::domain(format!("snr_db must be finite, got {}", self.snr_db)));
        }
        if self.target_rate % 2 != 0 {
            return Err(Error::domain(format!(
                "target rate must be even, got {}",
                self.target_rate
            )));
        }
        match self.target_ser {
            Some(s) if !(s > 0.0 && s < 1.0) => {
                return Err(Error::domain(format!(
                    "target SER must lie in (0, 1), got {s}"
                )));
            }
            None if self.allocator == Allocator::SerWf || self.aqam == AqamRule::Palomar => {
                return Err(Error::domain(
                    "target_ser is required by the chosen allocator or sizing rule",
                ));
            }
            _ => {}
        }
        Ok(())
    }

    fn ser(&self) -> Result<f64> {
        self.target_ser
            .ok_or_else(|| Error::domain("target_ser is required but missing"))
    }
}

/// Output of `build_plan`: powers, sizes, and the deactivation count.
#[derive(Clone, Debug)]
pub struct LinkPlan {
    pub alloc: PowerAllocation,
    pub plan: QamPlan,
    pub k_opt: usize,
}

/// Error accounting of one Monte Carlo trial (one channel realization,
/// many symbol vectors).
#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    pub bits_sent: u64,
    pub bit_errors: u64,
    /// Subchannel count the precoder actually used: the truncation rank,
    /// or n for full-SVD precoding.
    pub k_used: usize,
    /// Deactivated subchannels in the plan this trial transmitted with.
    pub k_opt: usize,
    pub per_channel_errors: Vec<u64>,
    /// Summed squared norm of the transmitted vectors, for power checks.
    pub tx_energy: f64,
    pub vectors: u64,
}

/// One capacity-versus-deactivation data point.
#[derive(Clone, Debug, PartialEq)]
pub struct CapacityRow {
    pub k: usize,
    pub scheme: String,
    pub mean_capacity: f64,
    pub ci95: f64,
    pub trials: u64,
}

/// One BER-versus-SNR data point.
#[derive(Clone, Debug, PartialEq)]
pub struct BerRow {
    pub snr_db: f64,
    pub scheme: String,
    pub ber: f64,
    pub ci95: f64,
    pub bits: u64,
    pub k_opt: usize,
}

/// Rows of one experiment, tagged by kind.
#[derive(Clone, Debug, PartialEq)]
pub enum ExperimentResult {
    Capacity(Vec<CapacityRow>),
    Ber(Vec<BerRow>),
}

/// Rate metric selectors for `capacity_vs_k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CapacityScheme {
    /// Gaussian-input capacity under waterfilling.
    Gaussian,
    /// Discrete-input capacity with ratio-rounded sizes, powers re-solved
    /// by mercury/waterfilling.
    Mwf,
    /// Same sizes, powers re-solved by the BER-minimizing allocator.
    Ewf,
    /// Closed-form estimate from the waterfilling ratios alone.
    WfEstimate,
    /// SER-targeted sizing and powers.
    Palomar { target_ser: f64 },
}

impl CapacityScheme {
    pub fn label(&self) -> &'static str {
        match self {
            CapacityScheme::Gaussian => "gaussian",
            CapacityScheme::Mwf => "mwf",
            CapacityScheme::Ewf => "ewf",
            CapacityScheme::WfEstimate => "estimate",
            CapacityScheme::Palomar { .. } => "palomar",
        }
    }
}

/// Re-solves powers so they are consistent with the sizes in `plan`.
/// The waterfilling-family allocators run on the subprofile of sized
/// subchannels (a size-1 subchannel must hold zero power); the
/// constellation-aware allocators handle exclusion themselves.
fn allocate_on_plan(
    profile: &SubchannelProfile,
    plan: &QamPlan,
    allocator: Allocator,
    power: f64,
    target_ser: Option<f64>,
    tol: &Tolerance,
) -> Result<PowerAllocation> {
    match allocator {
        Allocator::Mwf => mercury_waterfill(profile, plan, power, tol),
        Allocator::Ewf => error_waterfill(profile, plan, power, tol),
        Allocator::Wf | Allocator::SerWf => {
            let idx: Vec<usize> = (0..plan.len()).filter(|&i| plan.sizes()[i] >= 4).collect();
            if idx.is_empty() {
                return Err(Error::domain(
                    "no subchannel carries a constellation, nothing to power",
                ));
            }
            let sub_eta: Vec<f64> = idx.iter().map(|&i| profile.eta[i]).collect();
            let sub = SubchannelProfile::new(
                profile.n,
                sub_eta,
                profile.noise_variance,
                profile.source,
            )?;
            let sub_alloc = match allocator {
                Allocator::Wf => waterfill(&sub, power)?,
                _ => ser_waterfill(
                    &sub,
                    target_ser.ok_or_else(|| Error::domain("target_ser required"))?,
                    power,
                )?,
            };
            let mut p = vec![0.0; plan.len()];
            for (slot, &i) in idx.iter().enumerate() {
                p[i] = sub_alloc.p[slot];
            }
            let mut out = PowerAllocation::from_powers(p, sub_alloc.lambda, sub_alloc.policy);
            out.policy = sub_alloc.policy;
            Ok(out)
        }
    }
}

/// Builds the transmit plan for one profile: base powers, adaptive
/// sizes, re-allocation, exact-rate bit allocation, final re-allocation.
/// A zero target rate short-circuits to the fully deactivated plan.
pub fn build_plan(config: &LinkConfig, profile: &SubchannelProfile) -> Result<LinkPlan> {
    config.validate()?;
    let n = config.n;
    if profile.len() != n || profile.n != n {
        return Err(Error::domain(format!(
            "profile covers {} of {} subchannels",
            profile.len(),
            n
        )));
    }
    let sigma2 = config.noise_variance();
    if (profile.noise_variance - sigma2).abs() > 1e-9 * sigma2 {
        return Err(Error::domain(format!(
            "profile noise variance {} does not match the configured {sigma2}",
            profile.noise_variance
        )));
    }
    if config.target_rate == 0 {
        // Nothing to send: every subchannel off, multiplier at the
        // convention for "no power clears the budget".
        let lambda = match config.allocator {
            Allocator::Mwf | Allocator::Ewf => f64::INFINITY,
            Allocator::Wf | Allocator::SerWf => 0.0,
        };
        let alloc = PowerAllocation {
            p: vec![0.0; n],
            lambda,
            active: vec![false; n],
            policy: allocator_policy(config.allocator),
        };
        let plan = QamPlan::new(vec![1; n])?;
        return Ok(LinkPlan {
            alloc,
            plan,
            k_opt: n,
        });
    }
    let tol = Tolerance::default();
    // Base powers and sizes; each sizing rule starts from its own
    // waterfilling variant.
    let base = match config.aqam {
        AqamRule::FromWf => waterfill(profile, config.power)?,
        AqamRule::Palomar => ser_waterfill(profile, config.ser()?, config.power)?,
    };
    let sized = match config.aqam {
        AqamRule::FromWf => aqam_from_wf(profile, &base)?,
        AqamRule::Palomar => aqam_palomar(profile, &base, config.ser()?)?,
    };
    if sized.rate() == 0 {
        return Err(Error::InfeasibleRate {
            rate: config.target_rate,
            detail: "adaptive sizing deactivated every subchannel".to_string(),
        });
    }
    // Powers consistent with the sized plan; plain waterfilling variants
    // keep their base powers at this stage.
    let mid = match config.allocator {
        Allocator::Wf | Allocator::SerWf => base,
        _ => allocate_on_plan(
            profile,
            &sized,
            config.allocator,
            config.power,
            config.target_ser,
            &tol,
        )?,
    };
    let final_plan = bit_allocate(&sized, profile, &mid, config.target_rate)?;
    let final_alloc = allocate_on_plan(
        profile,
        &final_plan,
        config.allocator,
        config.power,
        config.target_ser,
        &tol,
    )?;
    let k_opt = count_deactivated(&final_alloc, Some(&final_plan))?;
    Ok(LinkPlan {
        alloc: final_alloc,
        plan: final_plan,
        k_opt,
    })
}

fn allocator_policy(a: Allocator) -> Policy {
    match a {
        Allocator::Wf => Policy::Wf,
        Allocator::Mwf => Policy::Mwf,
        Allocator::Ewf => Policy::Ewf,
        Allocator::SerWf => Policy::SerWf,
    }
}

/// Subchannels that actually carry symbols: sized and powered.
fn transmit_channels(lp: &LinkPlan) -> Vec<usize> {
    (0..lp.plan.len())
        .filter(|&i| lp.plan.sizes()[i] >= 4 && lp.alloc.p[i] > 0.0)
        .collect()
}

/// Number of leading subchannels the precoder must keep so every
/// transmitting subchannel survives truncation.
fn transmit_rank(lp: &LinkPlan) -> Result<usize> {
    transmit_channels(lp)
        .last()
        .map(|&i| i + 1)
        .ok_or_else(|| Error::domain("plan carries no bits on any powered subchannel"))
}

struct ActiveChannel {
    idx: usize,
    mask: u32,
    bits: u32,
    /// Per-symbol amplitude sqrt(p/2).
    amp: f64,
    /// Equalizer divisor sqrt(n) R_ii sqrt(p/2).
    denom: f64,
    cons: usize,
}

/// Runs one Monte Carlo trial: draws a channel, builds or reuses a plan,
/// and pushes `vectors` symbol vectors through the full transmit path.
///
/// With an empirical profile source the plan is rebuilt from this
/// realization's singular values; with the asymptotic source the
/// precomputed plan is required and reused unchanged. The noise vector
/// is always drawn in the ambient n-dimensional space and then rotated,
/// which is what makes truncated and full precoding comparable sample
/// by sample.
pub fn run_ber_trial(
    config: &LinkConfig,
    precomputed: Option<&LinkPlan>,
    vectors: u64,
    seed: u64,
) -> Result<TrialOutcome> {
    config.validate()?;
    let n = config.n;
    let sigma2 = config.noise_variance();
    let channel = sample_channel(n, derive_seed(seed, 0))?;
    let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, 1));

    let mut full_factors = None;
    let owned;
    let lp: &LinkPlan = match config.profile_source {
        ProfileSource::Empirical => {
            let f = svd(&channel.h)?;
            let prof = profile_from_svd(&f, sigma2)?;
            owned = build_plan(config, &prof)?;
            full_factors = Some(f);
            &owned
        }
        ProfileSource::Asymptotic => precomputed.ok_or_else(|| {
            Error::domain("asymptotic profile runs need a precomputed plan")
        })?,
    };
    let rank = transmit_rank(lp)?;
    let factors = match config.precoder {
        Precoder::FullSvd => match full_factors.take() {
            Some(f) => f,
            None => svd(&channel.h)?,
        },
        Precoder::TruncatedSvd => match full_factors.take() {
            Some(f) => f.truncate(rank)?,
            None => truncated_svd(&channel.h, rank)?,
        },
    };
    let width = factors.v.ncols();
    let sqrt_n = (n as f64).sqrt();

    // Constellation cache and the per-channel transmit parameters.
    let mut cons: Vec<Constellation> = Vec::new();
    let mut channels: Vec<ActiveChannel> = Vec::new();
    for i in transmit_channels(lp) {
        if i >= width {
            return Err(Error::domain(format!(
                "transmitting subchannel {i} fell outside the rank-{width} precoder"
            )));
        }
        let m = lp.plan.sizes()[i];
        let cons_idx = match cons.iter().position(|c| c.m() == m) {
            Some(pos) => pos,
            None => {
                cons.push(Constellation::new(m)?);
                cons.len() - 1
            }
        };
        let amp = (lp.alloc.p[i] / 2.0).sqrt();
        channels.push(ActiveChannel {
            idx: i,
            mask: m - 1,
            bits: m.trailing_zeros(),
            amp,
            denom: sqrt_n * factors.singular_values[i] * amp,
            cons: cons_idx,
        });
    }

    let uh = factors.u.adjoint();
    let noise_scale = (sigma2 / 2.0).sqrt();
    let mut s = DVector::<Complex64>::zeros(width);
    let mut words = vec![0u32; channels.len()];
    let mut per_channel_errors = vec![0u64; n];
    let mut bit_errors = 0u64;
    let mut bits_sent = 0u64;
    let mut tx_energy = 0.0f64;

    for _ in 0..vectors {
        for (slot, ch) in channels.iter().enumerate() {
            let w = rng.random::<u32>() & ch.mask;
            words[slot] = w;
            s[ch.idx] = cons[ch.cons].modulate(w)? * ch.amp;
        }
        let x = &factors.v * &s;
        tx_energy += x.norm_squared();
        let mut y = &channel.h * &x;
        for j in 0..n {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            y[j] = y[j] * sqrt_n + Complex64::new(re * noise_scale, im * noise_scale);
        }
        let received = &uh * &y;
        for (slot, ch) in channels.iter().enumerate() {
            let equalized = received[ch.idx].unscale(ch.denom);
            let decoded = cons[ch.cons].demodulate(equalized);
            let flips = (words[slot] ^ decoded).count_ones() as u64;
            per_channel_errors[ch.idx] += flips;
            bit_errors += flips;
            bits_sent += ch.bits as u64;
        }
    }

    Ok(TrialOutcome {
        bits_sent,
        bit_errors,
        k_used: width,
        k_opt: lp.k_opt,
        per_channel_errors,
        tx_energy,
        vectors,
    })
}

/// Mean and 95% half-width under the normal model; zero width for a
/// single observation.
fn mean_ci95(values: &[f64]) -> (f64, f64) {
    let t = values.len() as f64;
    let mean = values.iter().sum::<f64>() / t;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (t - 1.0);
    (mean, 1.96 * (var / t).sqrt())
}

/// 95% binomial half-width with a continuity safeguard, so a zero-error
/// point still reports a nonzero uncertainty.
fn binomial_ci95(errors: u64, bits: u64) -> f64 {
    if bits == 0 {
        return 0.0;
    }
    let n = bits as f64;
    let p = errors as f64 / n;
    1.96 * (p * (1.0 - p) / n).sqrt() + 0.5 / n
}

fn scheme_capacity(sub: &SubchannelProfile, power: f64, scheme: &CapacityScheme) -> Result<f64> {
    let tol = Tolerance::default();
    match scheme {
        CapacityScheme::Gaussian => {
            let wf = waterfill(sub, power)?;
            capacity_gaussian(sub, &wf)
        }
        CapacityScheme::WfEstimate => {
            let wf = waterfill(sub, power)?;
            capacity_wf_estimate(sub, &wf)
        }
        CapacityScheme::Mwf => {
            let wf = waterfill(sub, power)?;
            let plan = aqam_from_wf(sub, &wf)?;
            if plan.rate() == 0 {
                return Ok(0.0);
            }
            let alloc = mercury_waterfill(sub, &plan, power, &tol)?;
            capacity_qam(sub, &alloc, &plan)
        }
        CapacityScheme::Ewf => {
            let wf = waterfill(sub, power)?;
            let plan = aqam_from_wf(sub, &wf)?;
            if plan.rate() == 0 {
                return Ok(0.0);
            }
            let alloc = error_waterfill(sub, &plan, power, &tol)?;
            capacity_qam(sub, &alloc, &plan)
        }
        CapacityScheme::Palomar { target_ser } => {
            let swf = ser_waterfill(sub, *target_ser, power)?;
            let plan = aqam_palomar(sub, &swf, *target_ser)?;
            capacity_qam(sub, &swf, &plan)
        }
    }
}

/// Average rate metric of each scheme after deactivating the k weakest
/// subchannels, for every k in the grid, over independent channel draws.
pub fn capacity_vs_k(
    n: usize,
    power: f64,
    snr_db: f64,
    k_grid: &[usize],
    trials: u64,
    schemes: &[CapacityScheme],
    seed: u64,
) -> Result<ExperimentResult> {
    if n == 0 {
        return Err(Error::domain("channel dimension must be at least 1"));
    }
    if trials == 0 {
        return Err(Error::domain("at least one trial is required"));
    }
    if let Some(&bad) = k_grid.iter().find(|&&k| k >= n) {
        return Err(Error::domain(format!(
            "deactivation count {bad} leaves no subchannel of {n}"
        )));
    }
    let sigma2 = power * 10f64.powf(-snr_db / 10.0);
    let per_trial: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<Vec<f64>> {
            let channel = sample_channel(n, derive_seed(seed, t))?;
            let factors = svd(&channel.h)?;
            let prof = profile_from_svd(&factors, sigma2)?;
            let mut vals = Vec::with_capacity(k_grid.len() * schemes.len());
            for &k in k_grid {
                let sub = prof.leading(n - k)?;
                for scheme in schemes {
                    vals.push(scheme_capacity(&sub, power, scheme)?);
                }
            }
            Ok(vals)
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(k_grid.len() * schemes.len());
    for (ki, &k) in k_grid.iter().enumerate() {
        for (si, scheme) in schemes.iter().enumerate() {
            let col = ki * schemes.len() + si;
            let series: Vec<f64> = per_trial.iter().map(|v| v[col]).collect();
            let (mean, ci) = mean_ci95(&series);
            rows.push(CapacityRow {
                k,
                scheme: scheme.label().to_string(),
                mean_capacity: mean,
                ci95: ci,
                trials,
            });
        }
    }
    Ok(ExperimentResult::Capacity(rows))
}

/// Symbol vectors simulated per Monte Carlo trial.
pub const BER_VECTORS_PER_TRIAL: u64 = 64;
/// Stop adding batches once a point has this many bit errors.
pub const BER_MIN_ERRORS: u64 = 100;
/// Hard per-point bit budget for very low error rates.
pub const BER_MAX_BITS: u64 = 100_000_000;

/// The three precoding schemes measured by the BER sweep.
fn ber_schemes() -> [(&'static str, Allocator, Precoder, ProfileSource); 3] {
    [
        (
            "tsvd_ewf",
            Allocator::Ewf,
            Precoder::TruncatedSvd,
            ProfileSource::Asymptotic,
        ),
        (
            "tsvd_mwf",
            Allocator::Mwf,
            Precoder::TruncatedSvd,
            ProfileSource::Asymptotic,
        ),
        (
            "full_ewf",
            Allocator::Ewf,
            Precoder::FullSvd,
            ProfileSource::Empirical,
        ),
    ]
}

/// Measures BER against SNR for truncated-SVD and full-SVD links.
///
/// `template` supplies n, power, rate, and sizing rule; allocator,
/// precoder, and profile source are overridden per scheme. Trials run
/// in deterministic batches of `trials_per_batch` until a point has
/// `BER_MIN_ERRORS` errors or `BER_MAX_BITS` bits, so low-BER points get
/// proportionally more data without breaking reproducibility.
pub fn ber_sweep(
    template: &LinkConfig,
    snr_grid_db: &[f64],
    trials_per_batch: u64,
    seed: u64,
) -> Result<ExperimentResult> {
    template.validate()?;
    if template.target_rate == 0 {
        return Err(Error::domain("a BER sweep needs a positive target rate"));
    }
    if trials_per_batch == 0 {
        return Err(Error::domain("at least one trial per batch is required"));
    }
    if snr_grid_db.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("the SNR grid must be strictly ascending"));
    }
    let mut rows = Vec::with_capacity(snr_grid_db.len() * 3);
    for (snr_idx, &snr_db) in snr_grid_db.iter().enumerate() {
        for (scheme_idx, (label, allocator, precoder, source)) in
            ber_schemes().into_iter().enumerate()
        {
            let cfg = LinkConfig {
                snr_db,
                allocator,
                precoder,
                profile_source: source,
                ..*template
            };
            let plan = match source {
                ProfileSource::Asymptotic => {
                    let prof = crate::channel::asymptotic_profile(cfg.n, cfg.noise_variance())?;
                    Some(build_plan(&cfg, &prof)?)
                }
                ProfileSource::Empirical => None,
            };
            let point_seed =
                derive_seed(seed, (snr_idx * ber_schemes().len() + scheme_idx) as u64);
            let mut bits = 0u64;
            let mut errors = 0u64;
            let mut k_opt_sum = 0u64;
            let mut trial_count = 0u64;
            let mut batch = 0u64;
            loop {
                let outcomes: Vec<TrialOutcome> = (0..trials_per_batch)
                    .into_par_iter()
                    .map(|j| {
                        let trial = batch * trials_per_batch + j;
                        run_ber_trial(
                            &cfg,
                            plan.as_ref(),
                            BER_VECTORS_PER_TRIAL,
                            derive_seed(point_seed, trial),
                        )
                    })
                    .collect::<Result<_>>()?;
                for o in outcomes {
                    bits += o.bits_sent;
                    errors += o.bit_errors;
                    k_opt_sum += o.k_opt as u64;
                    trial_count += 1;
                }
                batch += 1;
                if errors >= BER_MIN_ERRORS || bits >= BER_MAX_BITS {
                    break;
                }
            }
            let k_opt = ((k_opt_sum as f64 / trial_count as f64).round()) as usize;
            rows.push(BerRow {
                snr_db,
                scheme: label.to_string(),
                ber: errors as f64 / bits as f64,
                ci95: binomial_ci95(errors, bits),
                bits,
                k_opt,
            });
        }
    }
    Ok(ExperimentResult::Ber(rows))
}
