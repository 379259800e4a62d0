use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A physical parameter or argument lies outside its allowed domain.
    #[error("parameter domain error: {0}")]
    Domain(String),

    /// The state does not have the register/excitation layout an operation expects.
    #[error("structural error: {0}")]
    Structural(String),

    /// A caller violated an operation contract (missing path, mismatched grids, ...).
    #[error("contract error: {0}")]
    Contract(String),

    /// A term would leave the truncated Fock ladder. Unreachable from the protocol's initial state.
    #[error("Fock cap exceeded: photon number {0} > {cap}", cap = crate::state::FOCK_CAP)]
    FockCap(u8),

    #[error("grid domain too small: {0}")]
    DomainTooSmall(String),

    #[error("numerical instability: norm drift {drift:e} exceeds {limit:e}")]
    Instability { drift: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn structural(msg: impl Into<String>) -> Error {
    Error::Structural(msg.into())
}

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
