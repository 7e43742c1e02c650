//! Power allocation, adaptive QAM sizing, and link simulation for square
//! MIMO channels decomposed by the singular value decomposition.
//!
//! The crate is organized as a pipeline:
//!
//! - `channel`: random channel draws, full and truncated SVD, and the
//!   per-subchannel noise-to-gain profile the allocators consume.
//! - `power`: waterfilling and its constellation-aware refinements under
//!   a total power budget.
//! - `qam`: Gray-mapped square constellations, the analytic bit error
//!   rate, capacity formulas, and adaptive size selection.
//! - `bitalloc`: greedy rate adjustment to hit an exact bits-per-use
//!   target.
//! - `sim`: end-to-end link plans, Monte Carlo trials, and the two
//!   experiment drivers behind the command-line tool.
//! - `numerics`: the small special-function and root-finding kit the
//!   rest builds on.

pub mod bitalloc;
pub mod channel;
pub mod error;
pub mod numerics;
pub mod power;
pub mod qam;
pub mod sim;

pub use channel::{
    asymptotic_profile, derive_seed, profile_from_svd, sample_channel, svd, truncated_svd,
    ChannelRealization, ProfileSource, SubchannelProfile, SvdFactors,
};
pub use error::{Error, Result};
pub use numerics::{lambert_w0, q_function, quarter_circle_quantile, Tolerance};
pub use power::{
    count_deactivated, error_waterfill, mercury_waterfill, ser_gamma, ser_waterfill, waterfill,
    EwfCoefficients, Policy, PowerAllocation,
};
pub use qam::{
    aqam_from_wf, aqam_palomar, ber_analytic, capacity_gaussian, capacity_qam, capacity_qam_sized,
    capacity_wf_estimate, Constellation, QamPlan, M_MAX,
};
pub use sim::{
    ber_sweep, build_plan, capacity_vs_k, run_ber_trial, Allocator, AqamRule, BerRow, CapacityRow,
    CapacityScheme, ExperimentResult, LinkConfig, LinkPlan, Precoder, TrialOutcome,
};
