use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("cannot convert {from} to {to}: incompatible dimensions")]
    IncompatibleUnits { from: &'static str, to: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown channel `{0}`")]
    UnknownChannel(String),

    #[error("eigenvalue search did not converge: {0}")]
    Convergence(String),

    #[error("continuum energy must be above the asymptote (got {0:e} Hartree)")]
    InvalidEnergy(f64),

    #[error("invalid quantum numbers: {0}")]
    InvalidQuantumNumbers(String),

    #[error("need at least {needed} levels, got {got}")]
    InsufficientLevels { needed: usize, got: usize },

    #[error("no dipole function connects `{excited}` and `{ground}`")]
    MissingDipole { excited: String, ground: String },

    #[error("selection rule violated: {0}")]
    SelectionRule(String),

    #[error("exactly on resonance at {nu_cm1} cm^-1 with zero linewidth")]
    OnResonance { nu_cm1: f64 },

    #[error("level v={v} in `{channel}` unbinds under the mass perturbation")]
    LevelLost { channel: String, v: u32 },

    #[error("degenerate level pair: {0}")]
    DegeneratePair(String),

    #[error("window {0}..{1} cm^-1 lies entirely inside pole-exclusion zones")]
    AllPoles(f64, f64),

    #[error("no level {0}")]
    NoSuchLevel(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Numerical failures (as opposed to bad input) map to a distinct exit status in the CLI.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Convergence(_) | Error::LevelLost { .. } | Error::OnResonance { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
