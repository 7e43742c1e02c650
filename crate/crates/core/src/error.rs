//! Error type shared by every module in the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the numeric and simulation layers.
///
/// All functions in this crate are total over their documented domains;
/// anything outside that domain is reported through `Error` rather than
/// silently clamped.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// A root bracket did not straddle a sign change.
    #[error("bracketing error: f has the same sign at both ends of [{lo}, {hi}]")]
    Bracketing { lo: f64, hi: f64 },

    /// An iterative solve ran out of iterations before meeting tolerance.
    #[error("convergence error: {what} did not converge within {iters} iterations")]
    Convergence { what: String, iters: u32 },

    /// A channel matrix produced a zero singular value, so no finite
    /// noise profile exists for the affected subchannel.
    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    /// The bit-allocation loop cannot reach the requested rate.
    #[error("infeasible rate {rate}: {detail}")]
    InfeasibleRate { rate: u64, detail: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
