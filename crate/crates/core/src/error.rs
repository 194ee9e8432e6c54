use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what}: non-finite argument {value}")]
    NonFinite { what: &'static str, value: f64 },

    #[error("{what}: argument {value} outside the domain ({reason})")]
    Domain {
        what: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("{what}: not defined for lambda = {lambda} ({reason})")]
    Regime {
        what: &'static str,
        lambda: f64,
        reason: &'static str,
    },

    #[error("n = {n} is below n0(lambda) = {n_zero} for lambda = {lambda}")]
    BelowNZero { lambda: f64, n: f64, n_zero: u64 },

    #[error(
        "sup search for lambda = {lambda}, n = {n} did not settle: window [{lo}, {hi}] still has \
         endpoint discrepancy {endpoint} against a supremum of {delta}"
    )]
    SearchWindow {
        lambda: f64,
        n: u64,
        lo: f64,
        hi: f64,
        endpoint: f64,
        delta: f64,
    },

    #[error("monte carlo request of {requested} draws exceeds the limit of {limit}")]
    ResourceCap { requested: u128, limit: u128 },

    #[error("invalid grid: {0}")]
    Grid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn finite(what: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { what, value })
    }
}
