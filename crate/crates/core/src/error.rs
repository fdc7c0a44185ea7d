use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite component in {0}")]
    NonFinite(&'static str),

    #[error("four-velocity not normalized: v.v = {dot:e}, expected c^2 = {c2:e}")]
    NotNormalized { dot: f64, c2: f64 },

    #[error("four-velocity is spacelike or past-directed")]
    InvalidVelocity,

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("force four-vector is timelike (radicand {0:e})")]
    TimelikeForce(f64),

    #[error("quadrature did not converge: estimated error {err:e} after {evals} evaluations")]
    Quadrature { err: f64, evals: usize },

    #[error("step size underflow at tau = {tau:e}")]
    StepUnderflow { tau: f64 },

    #[error("maximum number of steps ({0}) exceeded")]
    MaxSteps(usize),

    #[error("singular projection: |v.v| = {0:e}")]
    SingularProjection(f64),

    #[error("drift blow-up: |V| = {magnitude:e} exceeds bound {bound:e}")]
    DriftBlowUp { magnitude: f64, bound: f64 },

    #[error("wavefunction node: |phi|^2 = {0:e}")]
    WavefunctionNode(f64),

    #[error("not enough samples: need at least {need}, got {got}")]
    TooFewSamples { need: usize, got: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("grid too large: {cells} cells exceeds cap {cap}")]
    GridTooLarge { cells: usize, cap: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
