use thiserror::Error;

/// Errors raised by the model, the solvers and the command-line runner.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter set: {0}")]
    InvalidParameters(String),

    #[error("negative input for {what}: {value}")]
    NegativeInput { what: &'static str, value: f64 },

    #[error("the ODE closure requires constant polymerization and degradation rates")]
    NonConstantRates,

    #[error("step size underflow at t = {t}: h = {h:e}")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("maximum number of steps ({0}) exceeded")]
    TooManySteps(usize),

    #[error("component {component} went negative at t = {t}: {value:e}")]
    NegativeState { t: f64, component: &'static str, value: f64 },

    #[error("could not bracket the positive root of Q after {0} doublings")]
    BracketFailure(usize),

    #[error("the Lyapunov certificate requires alpha = 0 (got {0})")]
    NucleationPresent(f64),

    #[error(
        "Lyapunov chain condition violated: 1+2(delta+gamma_u)/sigma = {cond1}, \
         delta/(2 gamma_p) = {cond2}, gamma_p/sigma = {cond3}"
    )]
    LyapunovCondition { cond1: f64, cond2: f64, cond3: f64 },

    #[error("time step {dt:e} exceeds the CFL limit {limit:e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("negative density {value:e} in cell {cell}")]
    NegativeDensity { cell: usize, value: f64 },

    #[error("singular influx: u(s0) rho(x0) = 0 at s0 = {s0}")]
    SingularInflux { s0: f64 },

    #[error("time {t} is outside the sampled span [{lo}, {hi}]")]
    OutsideSpan { t: f64, lo: f64, hi: f64 },

    #[error("Picard iteration diverged (contraction ratios {ratios:?}); shrink the horizon T")]
    PicardDivergence { ratios: Vec<f64> },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of a numerical solver, as opposed to bad input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::StepSizeUnderflow { .. }
                | Error::TooManySteps(_)
                | Error::NegativeState { .. }
                | Error::BracketFailure(_)
                | Error::CflViolation { .. }
                | Error::NegativeDensity { .. }
                | Error::SingularInflux { .. }
                | Error::OutsideSpan { .. }
                | Error::PicardDivergence { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
