use thiserror::Error;

/// Protocol and engine faults. A fault signals a violated precondition or a
/// broken invariant; it is a test failure, never a silently degraded result.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Fault {
    #[error("round limit {limit} exceeded after {rounds} rounds")]
    Timeout { limit: u64, rounds: u64 },

    #[error("operation requires the {expected} topology")]
    WrongTopology { expected: &'static str },

    #[error("routing target {target} receives {actual} words, declared bound {declared}")]
    RouteOverload {
        target: u32,
        actual: u64,
        declared: u64,
    },

    #[error("a routing source derives messages from {actual} bits, allowed {allowed}")]
    RouteSourceBits { actual: u64, allowed: u64 },

    #[error("instance outside the theorem regime: {0}")]
    OutsideRegime(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Fault {
    pub fn invariant(msg: impl Into<String>) -> Self {
        Fault::Invariant(msg.into())
    }
    pub fn precondition(msg: impl Into<String>) -> Self {
        Fault::Precondition(msg.into())
    }
}
