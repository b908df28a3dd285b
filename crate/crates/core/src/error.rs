use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("slot out of range: {0}")]
    SlotOutOfRange(String),

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("Lamb-Dicke limit violated in mode {mode}: margin {margin:.5} >= threshold {threshold}")]
    LambDicke {
        mode: usize,
        margin: f64,
        threshold: f64,
    },

    #[error("Rabi frequency resonant with mode {mode} (Omega = nu = {nu})")]
    Resonance { mode: usize, nu: f64 },

    #[error("gate frequency vanishes; gate time undefined")]
    ZeroGateFrequency,

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("norm drift {drift:e} exceeds tolerance at t = {t}")]
    NormDrift { t: f64, drift: f64 },

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Json(#[from] serde_json::Error),
}
