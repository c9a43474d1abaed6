use alloc::string::String;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("quadrature did not reach tolerance {tolerance:e} within {nodes} nodes (estimate {estimate:e})")]
    Quadrature { tolerance: f64, nodes: usize, estimate: f64 },
    #[error("fit failed: {0}")]
    FitFailure(String),
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
    #[error("unstable configuration: {0}")]
    Instability(String),
    #[error("{what} = {value:e} lies outside [{lo:e}, {hi:e}]")]
    OutOfRange { what: &'static str, value: f64, lo: f64, hi: f64 },
    #[error("Fock truncation breached: top level population {population:e} at t = {time:e} s (cut {cut})")]
    Truncation { population: f64, time: f64, cut: usize },
    #[error("integrator failed at t = {time:e} s: {reason}")]
    Integration { time: f64, reason: String },
    #[error("singular {0}")]
    Singular(&'static str),
    #[error("Monte Carlo did not converge: stderr {stderr:e} vs mean {mean:e} after {shots} shots")]
    MonteCarlo { mean: f64, stderr: f64, shots: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}

pub(crate) fn require(cond: bool, name: &'static str, reason: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(invalid(name, reason))
    }
}
