//! Greedy bit allocation: walk a constellation plan to an exact target
//! rate, two bits at a time, always touching the subchannel that hurts
//! the worst-case bit error rate least.
//!
//! Candidate subchannels live in ordered sets keyed by current BER, so
//! each step costs O(log m) and an instrumented counter exposes the
//! number of set operations performed. Powers are held fixed for the
//! whole adjustment; re-running an allocator afterwards is the caller's
//! job.

use std::collections::BTreeSet;

use crate::channel::SubchannelProfile;
use crate::error::{Error, Result};
use crate::power::PowerAllocation;
use crate::qam::{ber_analytic, QamPlan, M_MAX};

/// Running totals of one adjustment: greedy steps taken and ordered-set
/// operations (inserts and removes) spent inside the step loop.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BitAllocStats {
    pub steps: u64,
    pub set_ops: u64,
}

/// In-progress state of the rate adjustment. `advance` performs one
/// 2-bit step; the state is exposed so callers can watch the worst-case
/// BER trajectory step by step.
#[derive(Clone, Debug)]
pub struct BitAllocState {
    sizes: Vec<u32>,
    ber: Vec<f64>,
    eta: Vec<f64>,
    p: Vec<f64>,
    /// Shrink candidates ordered by descending BER: key is the bitwise
    /// complement of the BER bits, so `first` is the worst channel and
    /// ties resolve to the lowest index.
    shrink: BTreeSet<(u64, usize)>,
    /// Grow candidates ordered by ascending BER.
    grow: BTreeSet<(u64, usize)>,
    remaining: u64,
    removing: bool,
    stats: BitAllocStats,
}

/// Nonnegative finite floats compare like their IEEE bit patterns.
fn ber_bits(ber: f64) -> u64 {
    ber.to_bits()
}

impl BitAllocState {
    pub fn new(
        plan: &QamPlan,
        profile: &SubchannelProfile,
        alloc: &PowerAllocation,
        rate: u64,
    ) -> Result<Self> {
        let m = plan.len();
        if profile.len() != m || alloc.p.len() != m {
            return Err(Error::domain(format!(
                "plan has {m} subchannels but profile has {} and allocation {}",
                profile.len(),
                alloc.p.len()
            )));
        }
        if rate % 2 != 0 {
            return Err(Error::domain(format!(
                "target rate must be even, got {rate}: sizes move two bits at a time"
            )));
        }
        let surplus = plan.rate() as i128 - rate as i128;
        let mut state = BitAllocState {
            sizes: plan.sizes().to_vec(),
            ber: vec![0.0; m],
            eta: profile.eta.clone(),
            p: alloc.p.clone(),
            shrink: BTreeSet::new(),
            grow: BTreeSet::new(),
            remaining: (surplus.unsigned_abs() / 2) as u64,
            removing: surplus > 0,
            stats: BitAllocStats::default(),
        };
        for i in 0..m {
            if state.sizes[i] >= 4 {
                state.ber[i] = ber_analytic(state.sizes[i], state.p[i], state.eta[i])?;
                state.shrink.insert((!ber_bits(state.ber[i]), i));
                if state.growable(i) {
                    state.grow.insert((ber_bits(state.ber[i]), i));
                }
            }
        }
        Ok(state)
    }

    fn growable(&self, i: usize) -> bool {
        self.sizes[i] >= 4 && self.sizes[i] < M_MAX && self.p[i] > 0.0
    }

    /// Performs one 2-bit step and returns the touched channel, or
    /// `None` when the plan already sits at the target rate.
    pub fn advance(&mut self) -> Result<Option<usize>> {
        if self.remaining == 0 {
            return Ok(None);
        }
        let i = if self.removing {
            let &(key, i) = self
                .shrink
                .first()
                .expect("a plan above the target rate has a shrinkable channel");
            self.shrink.remove(&(key, i));
            self.stats.set_ops += 1;
            if self.grow.remove(&(ber_bits(self.ber[i]), i)) {
                self.stats.set_ops += 1;
            }
            self.sizes[i] /= 4;
            if self.sizes[i] == 1 {
                // Deactivated: sentinel BER 0 and out of both sets for good.
                self.ber[i] = 0.0;
            } else {
                self.ber[i] = ber_analytic(self.sizes[i], self.p[i], self.eta[i])?;
                self.shrink.insert((!ber_bits(self.ber[i]), i));
                self.stats.set_ops += 1;
                if self.growable(i) {
                    self.grow.insert((ber_bits(self.ber[i]), i));
                    self.stats.set_ops += 1;
                }
            }
            i
        } else {
            let &(key, i) = self.grow.first().ok_or_else(|| Error::InfeasibleRate {
                rate: self.target_rate(),
                detail: "no powered subchannel can take more bits".to_string(),
            })?;
            self.grow.remove(&(key, i));
            self.stats.set_ops += 1;
            if self.shrink.remove(&(!ber_bits(self.ber[i]), i)) {
                self.stats.set_ops += 1;
            }
            self.sizes[i] *= 4;
            self.ber[i] = ber_analytic(self.sizes[i], self.p[i], self.eta[i])?;
            self.shrink.insert((!ber_bits(self.ber[i]), i));
            self.stats.set_ops += 1;
            if self.growable(i) {
                self.grow.insert((ber_bits(self.ber[i]), i));
                self.stats.set_ops += 1;
            }
            i
        };
        self.remaining -= 1;
        self.stats.steps += 1;
        Ok(Some(i))
    }

    pub fn run(&mut self) -> Result<()> {
        while self.advance()?.is_some() {}
        Ok(())
    }

    /// Current sizes as a plan.
    pub fn plan(&self) -> QamPlan {
        QamPlan::new(self.sizes.clone()).expect("state sizes stay valid")
    }

    pub fn sizes(&self) -> &[u32] {
        &self.sizes
    }

    /// Current per-channel BERs, sentinel 0 where M = 1.
    pub fn ber(&self) -> &[f64] {
        &self.ber
    }

    /// Signed bit surplus still to clear: positive while shrinking.
    pub fn surplus(&self) -> i64 {
        let b = 2 * self.remaining as i64;
        if self.removing {
            b
        } else {
            -b
        }
    }

    fn target_rate(&self) -> u64 {
        let current: u64 = self.sizes.iter().map(|&m| m.trailing_zeros() as u64).sum();
        (current as i128 - self.surplus() as i128) as u64
    }

    pub fn stats(&self) -> BitAllocStats {
        self.stats
    }
}

/// Adjusts `plan` to carry exactly `rate` bits per channel use. Rate
/// deficits grow the lowest-BER powered subchannel; surpluses shrink the
/// highest-BER subchannel, deactivating it when it falls past QPSK.
pub fn bit_allocate(
    plan: &QamPlan,
    profile: &SubchannelProfile,
    alloc: &PowerAllocation,
    rate: u64,
) -> Result<QamPlan> {
    Ok(bit_allocate_with_stats(plan, profile, alloc, rate)?.0)
}

/// `bit_allocate` plus the step and set-operation counts.
pub fn bit_allocate_with_stats(
    plan: &QamPlan,
    profile: &SubchannelProfile,
    alloc: &PowerAllocation,
    rate: u64,
) -> Result<(QamPlan, BitAllocStats)> {
    let mut state = BitAllocState::new(plan, profile, alloc, rate)?;
    state.run()?;
    Ok((state.plan(), state.stats()))
}

/// Largest analytic BER over subchannels carrying a constellation;
/// 0 when every subchannel is deactivated.
pub fn worst_case_ber(
    plan: &QamPlan,
    profile: &SubchannelProfile,
    alloc: &PowerAllocation,
) -> Result<f64> {
    if profile.len() != plan.len() || alloc.p.len() != plan.len() {
        return Err(Error::domain(format!(
            "plan has {} subchannels but profile has {} and allocation {}",
            plan.len(),
            profile.len(),
            alloc.p.len()
        )));
    }
    let mut worst = 0.0f64;
    for (i, &m) in plan.sizes().iter().enumerate() {
        if m >= 4 {
            worst = worst.max(ber_analytic(m, alloc.p[i], profile.eta[i])?);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ProfileSource;
    use crate::power::Policy;
    use proptest::prelude::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn profile(eta: Vec<f64>) -> SubchannelProfile {
        let n = eta.len();
        SubchannelProfile::new(n, eta, 1.0, ProfileSource::Empirical).unwrap()
    }

    fn alloc(p: Vec<f64>) -> PowerAllocation {
        let active = p.iter().map(|&x| x > 0.0).collect();
        PowerAllocation {
            p,
            lambda: 1.0,
            active,
            policy: Policy::Wf,
        }
    }

    fn plan(m: Vec<u32>) -> QamPlan {
        QamPlan::new(m).unwrap()
    }

    #[test]
    fn matching_rate_is_identity() {
        let prof = profile(vec![1.0, 1.0]);
        let al = alloc(vec![2.0, 2.0]);
        let pl = plan(vec![16, 4]);
        let (out, stats) = bit_allocate_with_stats(&pl, &prof, &al, 6).unwrap();
        assert_eq!(out, pl, "plan at target rate must come back unchanged");
        assert_eq!(stats.steps, 0);
        assert_eq!(stats.set_ops, 0, "no loop, no counted operations");
    }

    #[test]
    fn deficit_grows_the_lowest_ber_channel() {
        // Channel 0 has far more power, hence lower BER at equal size.
        let prof = profile(vec![1.0, 1.0]);
        let al = alloc(vec![30.0, 3.0]);
        let pl = plan(vec![16, 16]);
        let out = bit_allocate(&pl, &prof, &al, 10).unwrap();
        assert_eq!(out.sizes(), &[64, 16], "deficit must land on the clean channel");
    }

    #[test]
    fn surplus_shrinks_the_highest_ber_channel() {
        let prof = profile(vec![1.0, 1.0]);
        let al = alloc(vec![3.0, 0.5]);
        let pl = plan(vec![4, 4]);
        let out = bit_allocate(&pl, &prof, &al, 2).unwrap();
        assert_eq!(
            out.sizes(),
            &[4, 1],
            "surplus must deactivate the noisy channel"
        );
    }

    #[test]
    fn deactivated_channels_never_return() {
        let prof = profile(vec![1.0, 1.0]);
        let al = alloc(vec![0.1, 10.0]);
        let pl = plan(vec![4, 16]);
        let mut state = BitAllocState::new(&pl, &prof, &al, 0).unwrap();
        let first = state.advance().unwrap();
        assert_eq!(first, Some(0), "worst channel shrinks first");
        assert_eq!(state.sizes(), &[1, 16]);
        assert_eq!(state.ber()[0], 0.0, "deactivation leaves the 0 sentinel");
        let second = state.advance().unwrap();
        assert_eq!(second, Some(1), "sentinel must not be picked again");
        let third = state.advance().unwrap();
        assert_eq!(third, Some(1));
        assert_eq!(state.advance().unwrap(), None);
        assert_eq!(state.sizes(), &[1, 1]);
        assert_eq!(state.surplus(), 0);
    }

    #[test]
    fn ties_break_at_the_lowest_index() {
        let prof = profile(vec![1.0, 1.0, 1.0]);
        let al = alloc(vec![2.0, 2.0, 2.0]);
        let pl = plan(vec![16, 16, 16]);
        let out = bit_allocate(&pl, &prof, &al, 10).unwrap();
        assert_eq!(out.sizes(), &[4, 16, 16], "equal BERs shrink channel 0 first");
        let out = bit_allocate(&pl, &prof, &al, 14).unwrap();
        assert_eq!(out.sizes(), &[64, 16, 16], "equal BERs grow channel 0 first");
    }

    #[test]
    fn infeasible_targets_are_reported() {
        let prof = profile(vec![1.0, 1.0]);
        // No powered channel with a constellation: nothing can grow.
        let al = alloc(vec![0.0, 0.0]);
        let pl = plan(vec![1, 1]);
        match bit_allocate(&pl, &prof, &al, 4) {
            Err(Error::InfeasibleRate { rate, .. }) => assert_eq!(rate, 4),
            other => panic!("expected infeasible-rate error, got {other:?}"),
        }
        // Cap reached on the only eligible channel.
        let al = alloc(vec![1.0, 0.0]);
        let pl = plan(vec![M_MAX, 1]);
        assert!(matches!(
            bit_allocate(&pl, &prof, &al, 34),
            Err(Error::InfeasibleRate { .. })
        ));
        // Odd targets can never be met two bits at a time.
        let pl = plan(vec![4, 4]);
        let al = alloc(vec![1.0, 1.0]);
        assert!(matches!(
            bit_allocate(&pl, &prof, &al, 3),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn zero_rate_deactivates_everything() {
        let prof = profile(vec![0.5, 1.0, 2.0]);
        let al = alloc(vec![1.0, 1.0, 1.0]);
        let pl = plan(vec![16, 4, 64]);
        let out = bit_allocate(&pl, &prof, &al, 0).unwrap();
        assert_eq!(out.sizes(), &[1, 1, 1]);
        assert_eq!(out.rate(), 0);
    }

    /// Greedy reference that rescans plain vectors each step instead of
    /// maintaining ordered sets.
    fn greedy_oracle(
        sizes: &mut Vec<u32>,
        p: &[f64],
        eta: &[f64],
        rate: u64,
    ) -> Option<Vec<usize>> {
        let mut picked = Vec::new();
        let mut surplus = sizes
            .iter()
            .map(|&m| m.trailing_zeros() as i64)
            .sum::<i64>()
            - rate as i64;
        while surplus != 0 {
            let mut best: Option<(f64, usize)> = None;
            for i in 0..sizes.len() {
                let eligible = if surplus > 0 {
                    sizes[i] >= 4
                } else {
                    sizes[i] >= 4 && sizes[i] < M_MAX && p[i] > 0.0
                };
                if !eligible {
                    continue;
                }
                let ber = ber_analytic(sizes[i], p[i], eta[i]).unwrap();
                let better = match best {
                    None => true,
                    Some((b, _)) => {
                        if surplus > 0 {
                            ber > b
                        } else {
                            ber < b
                        }
                    }
                };
                if better {
                    best = Some((ber, i));
                }
            }
            let (_, i) = best?;
            if surplus > 0 {
                sizes[i] /= 4;
                surplus -= 2;
            } else {
                sizes[i] *= 4;
                surplus += 2;
            }
            picked.push(i);
        }
        Some(picked)
    }

    #[test]
    fn matches_rescanning_oracle_on_random_instances() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        for trial in 0..300 {
            let m = rng.random_range(2..=6);
            let eta: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..5.0)).collect();
            let p: Vec<f64> = (0..m)
                .map(|_| {
                    if rng.random::<f64>() < 0.2 {
                        0.0
                    } else {
                        rng.random_range(0.1..30.0)
                    }
                })
                .collect();
            let sizes: Vec<u32> = (0..m)
                .map(|i| {
                    if p[i] == 0.0 && rng.random::<f64>() < 0.5 {
                        1
                    } else {
                        1u32 << (2 * rng.random_range(1..=4))
                    }
                })
                .collect();
            let start_rate: u64 = sizes.iter().map(|&s| s.trailing_zeros() as u64).sum();
            let shift = 2 * rng.random_range(0..=4i64) - 4;
            let rate = (start_rate as i64 + shift).max(0) as u64;

            let prof = profile(eta.clone());
            let al = alloc(p.clone());
            let pl = plan(sizes.clone());
            let got = bit_allocate(&pl, &prof, &al, rate);

            let mut oracle_sizes = sizes.clone();
            let oracle = greedy_oracle(&mut oracle_sizes, &p, &eta, rate);
            match (got, oracle) {
                (Ok(out), Some(_)) => {
                    assert_eq!(
                        out.sizes(),
                        &oracle_sizes[..],
                        "trial {trial}: set-based and rescanning greedy disagree"
                    );
                    assert_eq!(out.rate(), rate, "trial {trial}: rate missed");
                }
                (Err(Error::InfeasibleRate { .. }), None) => {}
                (got, oracle) => panic!(
                    "trial {trial}: feasibility disagreement: {got:?} vs oracle {oracle:?}"
                ),
            }
        }
    }

    #[test]
    fn shrink_sequence_minimizes_worst_case_over_all_sequences() {
        // Exhaustive three-step lookahead: every sequence of three
        // quarter-moves on three channels, compared on final worst BER.
        let eta = vec![0.4, 1.0, 2.5];
        let p = vec![2.0, 3.0, 1.0];
        let prof = profile(eta.clone());
        let al = alloc(p.clone());
        let pl = plan(vec![64, 64, 16]);
        let rate = 10;
        let out = bit_allocate(&pl, &prof, &al, rate).unwrap();
        let got = worst_case_ber(&out, &prof, &al).unwrap();

        let mut best = f64::INFINITY;
        let steps = ((pl.rate() - rate) / 2) as usize;
        let mut stack = vec![(pl.sizes().to_vec(), 0usize)];
        while let Some((sizes, done)) = stack.pop() {
            if done == steps {
                let worst = sizes
                    .iter()
                    .enumerate()
                    .filter(|&(_, &m)| m >= 4)
                    .map(|(i, &m)| ber_analytic(m, p[i], eta[i]).unwrap())
                    .fold(0.0f64, f64::max);
                best = best.min(worst);
                continue;
            }
            for i in 0..sizes.len() {
                if sizes[i] >= 4 {
                    let mut next = sizes.clone();
                    next[i] /= 4;
                    stack.push((next, done + 1));
                }
            }
        }
        assert!(
            got <= best + 1e-18,
            "greedy worst case {got} vs exhaustive optimum {best}"
        );
    }

    #[test]
    fn operation_counter_respects_the_tree_bound() {
        let mut rng = ChaCha12Rng::seed_from_u64(22);
        for _ in 0..100 {
            let m = rng.random_range(2..=16);
            let eta: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..5.0)).collect();
            let p: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..20.0)).collect();
            let sizes: Vec<u32> = (0..m)
                .map(|_| 1u32 << (2 * rng.random_range(1..=4)))
                .collect();
            let start: u64 = sizes.iter().map(|&s| s.trailing_zeros() as u64).sum();
            let rate = if rng.random::<bool>() && start >= 8 {
                start - 8
            } else {
                start + 8
            };
            let prof = profile(eta);
            let al = alloc(p);
            let pl = plan(sizes);
            if let Ok((out, stats)) = bit_allocate_with_stats(&pl, &prof, &al, rate) {
                assert_eq!(out.rate(), rate);
                let half_b = start.abs_diff(rate) / 2;
                assert_eq!(stats.steps, half_b, "every step must move exactly 2 bits");
                assert!(
                    stats.set_ops <= 4 * half_b,
                    "set operations {} exceed 4 per step over {half_b} steps",
                    stats.set_ops
                );
                let log_m = (m as f64).log2().ceil().max(1.0) as u64;
                assert!(
                    stats.set_ops <= 4 * half_b * log_m,
                    "set operations {} exceed the tree bound {}",
                    stats.set_ops,
                    4 * half_b * log_m
                );
            }
        }
    }

    #[test]
    fn worst_case_ber_reports_the_maximum() {
        let prof = profile(vec![1.0, 1.0]);
        let al = alloc(vec![4.0, 16.0]);
        let pl = plan(vec![4, 4]);
        let w = worst_case_ber(&pl, &prof, &al).unwrap();
        let b0 = ber_analytic(4, 4.0, 1.0).unwrap();
        assert!((w - b0).abs() <= 1e-18, "worst case {w} vs channel-0 BER {b0}");
        let none = plan(vec![1, 1]);
        assert_eq!(worst_case_ber(&none, &prof, &al).unwrap(), 0.0);
        let single = plan(vec![1, 16]);
        let w = worst_case_ber(&single, &prof, &al).unwrap();
        let b1 = ber_analytic(16, 16.0, 1.0).unwrap();
        assert!((w - b1).abs() <= 1e-18, "single active channel: {w} vs {b1}");
    }

    #[test]
    fn surplus_is_visible_while_stepping() {
        let prof = profile(vec![1.0, 1.0]);
        let al = alloc(vec![2.0, 4.0]);
        let pl = plan(vec![16, 16]);
        let mut state = BitAllocState::new(&pl, &prof, &al, 4).unwrap();
        assert_eq!(state.surplus(), 4);
        state.advance().unwrap();
        assert_eq!(state.surplus(), 2);
        state.advance().unwrap();
        assert_eq!(state.surplus(), 0);
        assert_eq!(state.advance().unwrap(), None);
        let state = BitAllocState::new(&pl, &prof, &al, 12).unwrap();
        assert_eq!(state.surplus(), -4);
    }

    proptest! {
        #[test]
        fn prop_rate_is_exact_or_infeasible(
            eta in prop::collection::vec(0.05f64..5.0, 2..6),
            pows in prop::collection::vec(0.0f64..10.0, 2..6),
            exps in prop::collection::vec(0u32..=3, 2..6),
            target_halves in 0u64..20,
        ) {
            let m = eta.len().min(pows.len()).min(exps.len());
            let sizes: Vec<u32> = exps[..m]
                .iter()
                .map(|&e| if e == 0 { 1 } else { 1u32 << (2 * e) })
                .collect();
            let prof = profile(eta[..m].to_vec());
            let al = alloc(pows[..m].to_vec());
            let pl = plan(sizes);
            let rate = 2 * target_halves;
            match bit_allocate(&pl, &prof, &al, rate) {
                Ok(out) => {
                    prop_assert_eq!(out.rate(), rate);
                    for &s in out.sizes() {
                        prop_assert!(s == 1 || (s.is_power_of_two() && s.trailing_zeros() % 2 == 0));
                    }
                }
                Err(Error::InfeasibleRate { .. }) => {}
                Err(e) => return Err(TestCaseError::fail(format!("unexpected error {e}"))),
            }
        }
    }
}
