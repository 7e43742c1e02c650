//! Square Gray-mapped QAM, the per-subchannel BER formula, capacity
//! formulas, and both adaptive size selectors.
//!
//! Constellation sizes are 1 (deactivated) or powers of 4 up to 4^15.
//! Per-dimension levels are (2l - sqrt(M) - 1) * sqrt(3 / (M - 1)), which
//! normalizes the mean square of each dimension to 1; transmit power then
//! lives entirely in the power allocation.

use num_complex::Complex64;

use crate::channel::SubchannelProfile;
use crate::error::{Error, Result};
use crate::numerics::q_function;
use crate::power::{ser_gamma, PowerAllocation};

/// Largest supported constellation, 4^15. Caps table sizes and the bit
/// width of packed symbol words.
pub const M_MAX: u32 = 1 << 30;

/// Per-subchannel constellation sizes; 1 marks a deactivated subchannel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QamPlan {
    m: Vec<u32>,
}

impl QamPlan {
    /// Validates that every size is 1 or a power of 4 within `M_MAX`.
    pub fn new(m: Vec<u32>) -> Result<Self> {
        for &size in &m {
            if size != 1 && !is_qam_size(size) {
                return Err(Error::domain(format!(
                    "constellation size {size} is not 1 or a power of 4 up to 4^15"
                )));
            }
        }
        Ok(QamPlan { m })
    }

    pub fn sizes(&self) -> &[u32] {
        &self.m
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    /// Bits per symbol on subchannel `i`: log2 of its size.
    pub fn bits(&self, i: usize) -> u32 {
        self.m[i].trailing_zeros()
    }

    /// Total bits per channel use, the plan's rate.
    pub fn rate(&self) -> u64 {
        self.m.iter().map(|&m| m.trailing_zeros() as u64).sum()
    }

    /// Replaces the size of subchannel `i`, keeping the plan invariant.
    pub fn set_size(&mut self, i: usize, size: u32) -> Result<()> {
        if size != 1 && !is_qam_size(size) {
            return Err(Error::domain(format!(
                "constellation size {size} is not 1 or a power of 4 up to 4^15"
            )));
        }
        self.m[i] = size;
        Ok(())
    }

    /// Plan restricted to the first `k` subchannels.
    pub fn leading(&self, k: usize) -> Result<QamPlan> {
        if k == 0 || k > self.m.len() {
            return Err(Error::domain(format!(
                "cannot keep {k} of {} plan entries",
                self.m.len()
            )));
        }
        Ok(QamPlan {
            m: self.m[..k].to_vec(),
        })
    }
}

/// True for powers of 4 in [4, 4^15].
fn is_qam_size(m: u32) -> bool {
    m >= 4 && m <= M_MAX && m.is_power_of_two() && m.trailing_zeros() % 2 == 0
}

fn gray_encode(x: u32) -> u32 {
    x ^ (x >> 1)
}

fn gray_decode(mut g: u32) -> u32 {
    let mut b = 0;
    while g != 0 {
        b ^= g;
        g >>= 1;
    }
    b
}

/// One square QAM constellation with binary-reflected Gray labeling.
///
/// A symbol word packs log2(M) bits; the high half selects the in-phase
/// level, the low half the quadrature level. Within each dimension the
/// bits are a Gray codeword whose rank is the level index, so adjacent
/// levels differ in exactly one bit.
#[derive(Clone, Debug)]
pub struct Constellation {
    m: u32,
    side: u32,
    half_bits: u32,
    scale: f64,
    levels: Vec<f64>,
}

impl Constellation {
    pub fn new(m: u32) -> Result<Self> {
        if !is_qam_size(m) {
            return Err(Error::domain(format!(
                "constellation size must be a power of 4 in [4, 4^15], got {m}"
            )));
        }
        let bits = m.trailing_zeros();
        let side = 1u32 << (bits / 2);
        let scale = (3.0 / (m as f64 - 1.0)).sqrt();
        let levels = (0..side)
            .map(|l| (2.0 * l as f64 - side as f64 + 1.0) * scale)
            .collect();
        Ok(Constellation {
            m,
            side,
            half_bits: bits / 2,
            scale,
            levels,
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn bits_per_symbol(&self) -> u32 {
        2 * self.half_bits
    }

    /// Maps a packed bit word to its constellation point.
    pub fn modulate(&self, word: u32) -> Result<Complex64> {
        if word >= self.m {
            return Err(Error::domain(format!(
                "word {word} does not fit in {} bits",
                self.bits_per_symbol()
            )));
        }
        let wi = word >> self.half_bits;
        let wq = word & (self.side - 1);
        let re = self.levels[gray_decode(wi) as usize];
        let im = self.levels[gray_decode(wq) as usize];
        Ok(Complex64::new(re, im))
    }

    /// Nearest-level slicing per dimension followed by Gray encoding.
    /// Total over all complex inputs.
    pub fn demodulate(&self, y: Complex64) -> u32 {
        let wi = gray_encode(self.slice(y.re));
        let wq = gray_encode(self.slice(y.im));
        (wi << self.half_bits) | wq
    }

    fn slice(&self, v: f64) -> u32 {
        let idx = (v / self.scale + self.side as f64 - 1.0) / 2.0;
        let idx = idx.round();
        if idx <= 0.0 {
            0
        } else if idx >= (self.side - 1) as f64 {
            self.side - 1
        } else {
            idx as u32
        }
    }

    /// All (word, point) pairs; intended for tests and table dumps.
    pub fn points(&self) -> impl Iterator<Item = (u32, Complex64)> + '_ {
        (0..self.m).map(|w| (w, self.modulate(w).expect("word < m")))
    }
}

/// Rounds a positive ratio to the nearest power of 4 in log domain,
/// deactivating below 2. The floor at 4 never binds beyond the threshold:
/// any ratio >= 2 already rounds to at least 4.
fn round_ratio_to_size(ratio: f64) -> u32 {
    if !(ratio >= 2.0) {
        return 1;
    }
    let exp = (ratio.log2() / 2.0).round();
    let exp = exp.clamp(1.0, 15.0) as u32;
    1u32 << (2 * exp)
}

/// Constellation sizes from a waterfilling allocation: M_i is the nearest
/// power of 4 to p_i / eta_i, with ratios below 2 (and unpowered
/// subchannels) deactivated.
pub fn aqam_from_wf(profile: &SubchannelProfile, alloc: &PowerAllocation) -> Result<QamPlan> {
    if profile.len() != alloc.p.len() {
        return Err(Error::domain(format!(
            "profile has {} subchannels but allocation has {}",
            profile.len(),
            alloc.p.len()
        )));
    }
    let m = profile
        .eta
        .iter()
        .zip(&alloc.p)
        .map(|(&eta, &p)| if p > 0.0 { round_ratio_to_size(p / eta) } else { 1 })
        .collect();
    QamPlan::new(m)
}

/// Constellation sizes for the SER-targeted baseline: M_i is the nearest
/// power of 4 to 1 + p_i / (eta_i * Gamma), same deactivation rule as
/// `aqam_from_wf`. Expects `alloc` from `ser_waterfill` at the same
/// target SER.
pub fn aqam_palomar(
    profile: &SubchannelProfile,
    alloc: &PowerAllocation,
    target_ser: f64,
) -> Result<QamPlan> {
    if profile.len() != alloc.p.len() {
        return Err(Error::domain(format!(
            "profile has {} subchannels but allocation has {}",
            profile.len(),
            alloc.p.len()
        )));
    }
    let gamma = ser_gamma(target_ser)?;
    let m = profile
        .eta
        .iter()
        .zip(&alloc.p)
        .map(|(&eta, &p)| {
            if p > 0.0 {
                round_ratio_to_size(1.0 + p / (eta * gamma))
            } else {
                1
            }
        })
        .collect();
    QamPlan::new(m)
}

/// Gray-mapped square-QAM bit error rate:
/// (4 / log2 M)(1 - 1 / sqrt(M)) Q(sqrt((p / eta) * 3 / (M - 1))).
///
/// Valid for M >= 4; a deactivated subchannel has no error rate and M = 1
/// is a domain error rather than a silent 0.
pub fn ber_analytic(m: u32, p: f64, eta: f64) -> Result<f64> {
    if !is_qam_size(m) {
        return Err(Error::domain(format!(
            "ber_analytic needs M in {{4, 16, 64, ...}}, got {m}"
        )));
    }
    if !(p >= 0.0 && p.is_finite()) || !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::domain(format!(
            "ber_analytic needs p >= 0 and eta > 0, got p = {p}, eta = {eta}"
        )));
    }
    let bits = m.trailing_zeros() as f64;
    let sqrt_m = (1u32 << (m.trailing_zeros() / 2)) as f64;
    let prefactor = (4.0 / bits) * (1.0 - 1.0 / sqrt_m);
    let arg = ((p / eta) * 3.0 / (m as f64 - 1.0)).sqrt();
    Ok(prefactor * q_function(arg)?)
}

fn check_conformal(profile: &SubchannelProfile, alloc: &PowerAllocation) -> Result<()> {
    if profile.len() != alloc.p.len() {
        return Err(Error::domain(format!(
            "profile has {} subchannels but allocation has {}",
            profile.len(),
            alloc.p.len()
        )));
    }
    Ok(())
}

/// Gaussian-input capacity sum log2(1 + p_i / eta_i).
pub fn capacity_gaussian(profile: &SubchannelProfile, alloc: &PowerAllocation) -> Result<f64> {
    check_conformal(profile, alloc)?;
    Ok(profile
        .eta
        .iter()
        .zip(&alloc.p)
        .map(|(&eta, &p)| (1.0 + p / eta).log2())
        .sum())
}

/// QAM-input capacity approximation with real-valued sizes:
/// sum over subchannels with size > 1 of
/// log2(1 + p/eta) - log2(1 + p/(eta * size)).
///
/// Sizes at or below 1 mark deactivated subchannels and contribute 0.
/// The real-valued entry point exists because the size rule M = p/eta is
/// an identity before rounding; integer plans go through `capacity_qam`.
pub fn capacity_qam_sized(
    profile: &SubchannelProfile,
    alloc: &PowerAllocation,
    sizes: &[f64],
) -> Result<f64> {
    check_conformal(profile, alloc)?;
    if sizes.len() != profile.len() {
        return Err(Error::domain(format!(
            "profile has {} subchannels but {} sizes given",
            profile.len(),
            sizes.len()
        )));
    }
    let mut total = 0.0;
    for ((&eta, &p), &m) in profile.eta.iter().zip(&alloc.p).zip(sizes) {
        if m > 1.0 && p > 0.0 {
            let r = p / eta;
            total += (1.0 + r).log2() - (1.0 + r / m).log2();
        }
    }
    Ok(total)
}

/// QAM-input capacity approximation for an integer plan.
pub fn capacity_qam(
    profile: &SubchannelProfile,
    alloc: &PowerAllocation,
    plan: &QamPlan,
) -> Result<f64> {
    let sizes: Vec<f64> = plan.sizes().iter().map(|&m| m as f64).collect();
    capacity_qam_sized(profile, alloc, &sizes)
}

/// Capacity estimate from a waterfilling allocation alone:
/// sum of max(0, log2(1 + p_i / eta_i) - 1).
///
/// This is what `capacity_qam_sized` reduces to when each active size is
/// exactly p_i / eta_i, so it estimates the discrete-input rate without
/// choosing sizes.
pub fn capacity_wf_estimate(profile: &SubchannelProfile, alloc: &PowerAllocation) -> Result<f64> {
    check_conformal(profile, alloc)?;
    Ok(profile
        .eta
        .iter()
        .zip(&alloc.p)
        .map(|(&eta, &p)| ((1.0 + p / eta).log2() - 1.0).max(0.0))
        .sum())
}
