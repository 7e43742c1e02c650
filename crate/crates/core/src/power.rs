//! Power allocation over parallel subchannels under a total budget.
//!
//! Four allocators share the `PowerAllocation` result type:
//! waterfilling in closed form over the exact active set, a
//! constellation-aware mercury/waterfilling solved by bisection on the
//! multiplier, a bit-error-rate minimizer with a Lambert W closed form
//! per channel, and an SER-targeted variant of waterfilling with a gap
//! factor derived from the target symbol error rate.
//!
//! Every allocator treats the subchannel order as immaterial: permuting
//! the profile permutes the powers. Iterative solvers bisect in the log
//! of the multiplier, so brackets stay positive by construction.

use crate::channel::SubchannelProfile;
use crate::error::{Error, Result};
use crate::numerics::{lambert_w0_exp, Tolerance};
use crate::qam::QamPlan;

/// Which allocator produced a `PowerAllocation`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Policy {
    Wf,
    Mwf,
    Ewf,
    SerWf,
}

/// Per-subchannel transmit powers plus the multiplier they were solved
/// at. `active[i]` is `p[i] > 0`; deactivated subchannels carry exactly
/// zero power.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerAllocation {
    pub p: Vec<f64>,
    pub lambda: f64,
    pub active: Vec<bool>,
    pub policy: Policy,
}

impl PowerAllocation {
    pub(crate) fn from_powers(p: Vec<f64>, lambda: f64, policy: Policy) -> Self {
        let active = p.iter().map(|&x| x > 0.0).collect();
        PowerAllocation {
            p,
            lambda,
            active,
            policy,
        }
    }

    /// Sum of allocated powers.
    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

fn check_budget(budget: f64) -> Result<()> {
    if !(budget > 0.0 && budget.is_finite()) {
        return Err(Error::domain(format!(
            "power budget must be positive and finite, got {budget}"
        )));
    }
    Ok(())
}

fn check_plan_len(profile: &SubchannelProfile, plan: &QamPlan) -> Result<()> {
    if profile.len() != plan.len() {
        return Err(Error::domain(format!(
            "profile has {} subchannels but plan has {}",
            profile.len(),
            plan.len()
        )));
    }
    Ok(())
}

/// Closed-form waterfilling over `costs`: p_i = max(0, lambda - costs[i])
/// with the exact active set. Scanning candidate set sizes from largest
/// to smallest finds the unique size whose water level clears its highest
/// included cost; a level exactly equal to a cost leaves that channel
/// inactive.
fn exact_waterfill(costs: &[f64], budget: f64) -> (Vec<f64>, f64) {
    let m = costs.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        costs[a]
            .partial_cmp(&costs[b])
            .expect("profile costs are finite")
            .then(a.cmp(&b))
    });
    let mut prefix = vec![0.0; m + 1];
    for (rank, &i) in order.iter().enumerate() {
        prefix[rank + 1] = prefix[rank] + costs[i];
    }
    let mut p = vec![0.0; m];
    for k in (1..=m).rev() {
        let lambda = (budget + prefix[k]) / k as f64;
        if lambda > costs[order[k - 1]] {
            for &i in &order[..k] {
                p[i] = lambda - costs[i];
            }
            return (p, lambda);
        }
    }
    unreachable!("a positive budget always activates the cheapest channel");
}

/// Capacity-optimal waterfilling against inverse channel gains:
/// p_i = max(0, lambda - eta_i), sum p_i = budget.
pub fn waterfill(profile: &SubchannelProfile, budget: f64) -> Result<PowerAllocation> {
    check_budget(budget)?;
    let (p, lambda) = exact_waterfill(&profile.eta, budget);
    Ok(PowerAllocation::from_powers(p, lambda, Policy::Wf))
}

/// SNR gap factor for a target symbol error rate:
/// Gamma = (2/3) ln(2 / SER). Equals 1 at SER = 2 exp(-3/2), where the
/// SER-targeted allocation coincides with plain waterfilling.
pub fn ser_gamma(target_ser: f64) -> Result<f64> {
    if !(target_ser > 0.0 && target_ser < 1.0) {
        return Err(Error::domain(format!(
            "target SER must lie in (0, 1), got {target_ser}"
        )));
    }
    Ok((2.0 / 3.0) * (2.0 / target_ser).ln())
}

/// Waterfilling against gap-scaled costs: p_i = max(0, lambda -
/// Gamma eta_i). A gap above 1 deactivates weak subchannels earlier than
/// plain waterfilling.
pub fn ser_waterfill(
    profile: &SubchannelProfile,
    target_ser: f64,
    budget: f64,
) -> Result<PowerAllocation> {
    check_budget(budget)?;
    let gamma = ser_gamma(target_ser)?;
    let costs: Vec<f64> = profile.eta.iter().map(|&e| gamma * e).collect();
    let (p, lambda) = exact_waterfill(&costs, budget);
    Ok(PowerAllocation::from_powers(p, lambda, Policy::SerWf))
}

/// Bisects the log-multiplier until the summed powers meet the budget.
/// `sum_powers` must be non-increasing in the multiplier. Brackets are
/// widened by factor-4 steps if floating point puts the root outside.
fn bisect_budget(
    mut sum_powers: impl FnMut(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    budget: f64,
    tol: &Tolerance,
    what: &str,
) -> Result<f64> {
    const LN_4: f64 = 1.3862943611198906;
    let mut tries = 0;
    while sum_powers(lo) < budget {
        lo -= LN_4;
        tries += 1;
        if tries > 60 {
            return Err(Error::Convergence {
                what: format!("{what} lower bracket"),
                iters: tries,
            });
        }
    }
    tries = 0;
    while sum_powers(hi) > budget {
        hi += LN_4;
        tries += 1;
        if tries > 60 {
            return Err(Error::Convergence {
                what: format!("{what} upper bracket"),
                iters: tries,
            });
        }
    }
    let target = tol.abs_tol + tol.rel_tol * budget;
    for _ in 0..tol.max_iter {
        let mid = 0.5 * (lo + hi);
        let s = sum_powers(mid);
        if (s - budget).abs() <= target {
            return Ok(mid);
        }
        if s > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Convergence {
        what: what.to_string(),
        iters: tol.max_iter,
    })
}

/// Mercury/waterfilling power for one subchannel at multiplier `lambda`.
///
/// Rationalized form of (eta/2)(sqrt((M-1)^2 + 4(M-1)/(eta lambda)) -
/// M - 1): the difference of near-equal large terms is replaced by the
/// quotient (d - 4c - 4)/(sqrt(c^2 + d) + c + 2), which stays accurate
/// when M is large. Power is positive exactly when
/// lambda < (M - 1)/(M eta).
fn mwf_power(m: f64, eta: f64, lambda: f64) -> f64 {
    let c = m - 1.0;
    let d = 4.0 * c / (eta * lambda);
    let num = d - 4.0 * c - 4.0;
    if num <= 0.0 {
        return 0.0;
    }
    0.5 * eta * num / ((c * c + d).sqrt() + c + 2.0)
}

/// Mutual-information-optimal allocation for the given constellation
/// sizes. Subchannels with M = 1 are excluded and get zero power; a
/// subchannel stays unpowered when the solved multiplier sits at or
/// above its activation threshold (M - 1)/(M eta).
pub fn mercury_waterfill(
    profile: &SubchannelProfile,
    plan: &QamPlan,
    budget: f64,
    tol: &Tolerance,
) -> Result<PowerAllocation> {
    check_budget(budget)?;
    check_plan_len(profile, plan)?;
    tol.validate()?;
    let eligible: Vec<(usize, f64, f64)> = plan
        .sizes()
        .iter()
        .enumerate()
        .filter(|&(_, &m)| m >= 4)
        .map(|(i, &m)| (i, m as f64, profile.eta[i]))
        .collect();
    if eligible.is_empty() {
        return Err(Error::domain(
            "no subchannel carries a constellation, nothing to power",
        ));
    }
    // At the threshold multiplier every power is zero; at lo the
    // best-case channel alone would absorb the whole budget.
    let hi = eligible
        .iter()
        .map(|&(_, m, eta)| (m - 1.0) / (m * eta))
        .fold(f64::MIN, f64::max)
        .ln();
    let lo = eligible
        .iter()
        .map(|&(_, m, eta)| {
            (m - 1.0) / (budget * budget / eta + (m + 1.0) * budget + m * eta)
        })
        .fold(f64::MAX, f64::min)
        .ln();
    let sum = |log_lambda: f64| {
        let lambda = log_lambda.exp();
        eligible
            .iter()
            .map(|&(_, m, eta)| mwf_power(m, eta, lambda))
            .sum::<f64>()
    };
    let root = bisect_budget(sum, lo, hi, budget, tol, "mercury_waterfill")?;
    let lambda = root.exp();
    let mut p = vec![0.0; profile.len()];
    for &(i, m, eta) in &eligible {
        p[i] = mwf_power(m, eta, lambda);
    }
    Ok(PowerAllocation::from_powers(p, lambda, Policy::Mwf))
}

/// Closed-form constants of the per-channel BER stationarity condition
/// p_i = W((A_i lambda)^-2) / B_i, together with the indices of the
/// subchannels they describe (those with M >= 4).
#[derive(Clone, Debug)]
pub struct EwfCoefficients {
    pub idx: Vec<usize>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl EwfCoefficients {
    /// B_i = 3 / ((M_i - 1) eta_i) and
    /// A_i = sqrt(2 pi M_i) log2(M_i) / (2 B_i (sqrt(M_i) - 1)), so that
    /// the analytic BER slope at p_i = W((A_i lambda)^-2)/B_i equals
    /// -lambda on every included subchannel.
    pub fn from_plan(profile: &SubchannelProfile, plan: &QamPlan) -> Result<Self> {
        check_plan_len(profile, plan)?;
        let mut idx = Vec::new();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (i, &m) in plan.sizes().iter().enumerate() {
            if m < 4 {
                continue;
            }
            let mf = m as f64;
            let eta = profile.eta[i];
            let bi = 3.0 / ((mf - 1.0) * eta);
            let bits = m.trailing_zeros() as f64;
            let sqrt_m = (1u32 << (m.trailing_zeros() / 2)) as f64;
            let ai = (2.0 * std::f64::consts::PI * mf).sqrt() * bits
                / (2.0 * bi * (sqrt_m - 1.0));
            idx.push(i);
            a.push(ai);
            b.push(bi);
        }
        if idx.is_empty() {
            return Err(Error::domain(
                "no subchannel carries a constellation, nothing to power",
            ));
        }
        Ok(EwfCoefficients { idx, a, b })
    }

    pub fn len(&self) -> usize {
        self.idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }
}

/// Total-BER-minimizing allocation for the given constellation sizes.
///
/// Solves sum_i W((A_i lambda)^-2)/B_i = budget for the multiplier by
/// bisection in log lambda; the Lambert W argument is kept in log form
/// end to end, so extreme multipliers never overflow. Every subchannel
/// with M >= 4 receives strictly positive power.
pub fn error_waterfill(
    profile: &SubchannelProfile,
    plan: &QamPlan,
    budget: f64,
    tol: &Tolerance,
) -> Result<PowerAllocation> {
    check_budget(budget)?;
    tol.validate()?;
    let coeffs = EwfCoefficients::from_plan(profile, plan)?;
    let ln_a: Vec<f64> = coeffs.a.iter().map(|&a| a.ln()).collect();
    // Lower bracket: the multiplier at which the single cheapest channel
    // would already absorb the whole budget, from inverting
    // W(exp(t)) = B P into t = B P + ln(B P).
    let lo = ln_a
        .iter()
        .zip(&coeffs.b)
        .map(|(&la, &b)| {
            let t = b * budget;
            -la - 0.5 * (t + t.ln())
        })
        .fold(f64::MAX, f64::min);
    // Upper bracket from W(x) <= x: powers sum to at most
    // sum 1/(A_i^2 B_i) / lambda^2, which is budget/2 at this lambda.
    let cap: f64 = ln_a
        .iter()
        .zip(&coeffs.b)
        .map(|(&la, &b)| (-2.0 * la - b.ln()).exp())
        .sum();
    let hi = 0.5 * ((2.0 * cap / budget).ln());
    let sum = |log_lambda: f64| {
        ln_a.iter()
            .zip(&coeffs.b)
            .map(|(&la, &b)| lambert_w0_exp(-2.0 * (la + log_lambda)) / b)
            .sum::<f64>()
    };
    let root = bisect_budget(sum, lo, hi, budget, tol, "error_waterfill")?;
    let mut p = vec![0.0; profile.len()];
    for ((&i, &la), &b) in coeffs.idx.iter().zip(&ln_a).zip(&coeffs.b) {
        p[i] = lambert_w0_exp(-2.0 * (la + root)) / b;
    }
    Ok(PowerAllocation::from_powers(p, root.exp(), Policy::Ewf))
}

/// Number of switched-off subchannels: zero power, or constellation size
/// 1 when a plan is given.
pub fn count_deactivated(alloc: &PowerAllocation, plan: Option<&QamPlan>) -> Result<usize> {
    match plan {
        Some(plan) => {
            if plan.len() != alloc.p.len() {
                return Err(Error::domain(format!(
                    "allocation has {} subchannels but plan has {}",
                    alloc.p.len(),
                    plan.len()
                )));
            }
            Ok(alloc
                .p
                .iter()
                .zip(plan.sizes())
                .filter(|&(&p, &m)| p == 0.0 || m == 1)
                .count())
        }
        None => Ok(alloc.p.iter().filter(|&&p| p == 0.0).count()),
    }
}
