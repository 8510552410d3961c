//! Computational verification toolkit for almost-prime counts in short
//! intervals.
//!
//! The toolkit supports a single headline claim: every interval
//! `(n^2, (n+1)^2)` contains an integer with at most four prime factors
//! counted with multiplicity. The proof route combines a weighted sieve with
//! explicit linear-sieve bound functions, and every analytic ingredient it
//! relies on is either a closed form we can evaluate or a finite computation
//! we can run to exhaustion. This crate implements both halves:
//!
//! * **Exact integer machinery** ([`primes`]): segmented prime sieves,
//!   interval factorization, multiplicity counts, squarefree counts, and
//!   prime products — the ground truth every analytic bound is checked
//!   against.
//! * **Closed-form bounds** ([`bounds`]): the linear-sieve companion
//!   functions `F`, `f`, `h`, the lower envelope `C`, bands for the
//!   Mertens-type product `I(x)` and the sieve value `V(z)`, and a classical
//!   prime-counting upper bound.
//! * **Sieve estimates** ([`linear_sieve`], [`kuhn`]): the lower bound for
//!   the sifted count of the short interval, the upper bounds for the
//!   `S(A_q)` sum, the weighted-sieve remainder accounting, and the full
//!   pipeline that assembles them into a positive lower bound for the count
//!   of integers with at most four prime factors.
//! * **Exhaustive scans** ([`verifier`]): the finite inequality scans the
//!   argument delegates to computation — a Mertens-product inequality at
//!   every prime up to 4·10^9, a two-parameter ratio scan establishing the
//!   epsilon of the `V(z)` band, and direct interval verifications at small
//!   `n`.
//! * **Reports** ([`report`], [`cli`]): deterministic JSON/CSV/text reports
//!   with a ledger of computed constants against their reference values,
//!   exposed through the `sievekit` command-line tool.
//!
//! Scans are deterministic: fixed work partitioning and ordered merges make
//! every report byte-identical across worker counts (timing field aside).
//! Floating-point accumulation uses compensated summation throughout, and
//! comparisons that come within a relative `1e-9` of a bound escalate to
//! 192-bit arithmetic (~57 significant digits) before a verdict is recorded.

pub mod bounds;
pub mod checkpoint;
pub mod cli;
pub mod kuhn;
pub mod linear_sieve;
pub mod primes;
pub mod report;
pub mod scalar;
pub mod verifier;

use thiserror::Error;

/// Default floating-point scalar used by the concrete pipeline entry points.
pub type Scalar = f64;

/// Exact rational type used for weighted-sieve weights (denominators are
/// powers of two, numerators stay far below `i64` range at every supported
/// scale).
pub type Weight = num_rational::Ratio<i64>;

/// High-precision scalar (192-bit mantissa, ~57 significant digits) used for
/// escalated comparisons and as an oracle backend.
pub type HighPrec = scalar::HighPrec;

/// Errors reported by sievekit operations.
///
/// Every variant carries enough context to state which contract was violated
/// and by what value; callers that print an error get an actionable message.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument fell outside the closed-form's domain.
    #[error("domain error: {what} = {value} outside {range}")]
    Domain {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    /// An operation over a range or table was asked for an empty domain.
    #[error("empty domain: {0}")]
    EmptyDomain(String),

    /// An input for which the requested quantity is mathematically undefined.
    #[error("undefined input: {0}")]
    Undefined(String),

    /// A stated precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The supplied prime table is too small for the requested computation.
    #[error("prime table too small: need primes up to {needed}, table covers {have}")]
    InsufficientTable { needed: u64, have: u64 },

    /// The argument lies outside every regime a band is proved in.
    #[error("regime error: x = {x} is in no supported regime ({detail})")]
    Regime { x: f64, detail: &'static str },

    /// An input violates a structural contract (e.g. a member of a sifted set
    /// still divisible by a small prime).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A computed constant failed its required direction against the
    /// reference value.
    #[error("ledger violation: {name} computed {computed} fails direction {direction} {reference}")]
    Ledger {
        name: String,
        computed: f64,
        direction: &'static str,
        reference: f64,
    },

    /// Checkpoint file problems (corrupt, mismatched header, bad checksum).
    /// The scan can be restarted from scratch by deleting the file.
    #[error("checkpoint error ({path}): {detail}")]
    Checkpoint { path: String, detail: String },

    /// Malformed command-line input.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialize(#[from] serde_json::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
