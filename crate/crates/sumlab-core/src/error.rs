//! Error type shared by every module.
//!
//! All fallible operations return [`Result`]. Errors are value-like and
//! carry enough context to reproduce the failing call; none of them wrap
//! panics. Arithmetic overflow is a bug guard: the scale cap (m ≤ 24) is
//! chosen so that checked paths never trigger it in supported ranges.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("scale exponent m={0} outside the supported range 1..=24")]
    ScaleRange(u32),

    #[error("index {index} out of range for scale m={m} (expected {lo}..={hi})")]
    IndexRange { index: i64, m: u32, lo: i64, hi: i64 },

    #[error("scale mismatch: m={0} vs m={1}")]
    ScaleMismatch(u32, u32),

    #[error("empty set: {0}")]
    EmptySet(&'static str),

    #[error("{context}: {needed} elements exceed the cap {cap}; reduce sets or raise cap")]
    CapExceeded {
        context: &'static str,
        needed: u128,
        cap: u64,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("density hypothesis fails: sum of subset sizes {sum} is below delta*|S|*|T| = {required}")]
    DensityHypothesis { sum: u128, required: String },

    #[error("energy precondition fails: E = {energy} is below (|A||B|)^(3/2)/K_hint ~ {required:.6}")]
    EnergyPrecondition { energy: u128, required: f64 },

    #[error("extraction degenerated to an empty set at stage `{0}`")]
    EmptyStage(&'static str),

    #[error("empty ratio set: {0}")]
    EmptyRatioSet(String),

    #[error("incidence/energy totals disagree: direct={direct}, via_lines={via_lines} (implementation bug)")]
    IdentityMismatch { direct: u128, via_lines: u128 },

    #[error("pigeonhole certificate violated: |P| = {pairs} below the guaranteed floor {floor} (implementation bug)")]
    CertificateViolated { pairs: u64, floor: String },

    #[error("orientation mismatch: the line metric requires slope-intercept form on both lines")]
    Orientation,

    #[error("hypothesis t > 1 fails (t = {0}); the planar d=2, n=1 incidence bound needs t > d - n")]
    HypothesisT(f64),

    #[error("hypothesis alpha + beta > 1 fails (alpha = {0}, beta = {1})")]
    HypothesisAlphaBeta(f64, f64),

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
