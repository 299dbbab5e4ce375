use num_complex::Complex64;
use thiserror::Error;

/// Every failure mode the numerical routes and the report layer can produce.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("path passes within {distance:e} of turning point {root}")]
    TurningPointOnPath { root: Complex64, distance: f64 },

    #[error("branch of sqrt(Q) cannot be continued near {at} (phase jump {jump:.3} rad)")]
    BranchAmbiguity { at: Complex64, jump: f64 },

    #[error("quadrature did not reach tolerance {tol:e} (estimate {estimate:e})")]
    QuadratureFailure { tol: f64, estimate: f64 },

    #[error("degenerate leading coefficient")]
    DegenerateLeadingCoefficient,

    #[error("root iteration did not converge (best iterate {best}, |f| = {residual:e})")]
    NoConvergence { best: Complex64, residual: f64 },

    #[error("integration step underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("right-hand side not finite at t = {t}")]
    RhsSingular { t: f64 },

    #[error("Airy evaluation overflows at z = {0}")]
    OverflowRisk(Complex64),

    #[error("z = {0} lies outside the sector of this asymptotic form")]
    SectorViolation(Complex64),

    #[error("operation requires the linear model n = 0 (got n = {0})")]
    WrongModel(u32),

    #[error("integration failed: {0}")]
    IntegrationFailure(String),

    #[error("spectrum incomplete: found {found} of {expected} eigenvalues")]
    IncompleteSpectrum { found: usize, expected: usize },

    #[error("eigenfunction normalization degenerate")]
    NormalizationDegenerate,

    #[error("mapped energy too close to zero: |E| = {0:e}")]
    DegenerateEnergy(f64),

    #[error("anti-Stokes tracing stalled near {0}")]
    TracingStalled(Complex64),

    #[error("no conjugate-symmetric turning point pair for mapped energy {0}")]
    TurningPairUnavailable(Complex64),

    #[error("root bracketing failed: {0}")]
    NotMonotone(String),

    #[error("ODE denominator vanishes at tau = {0}")]
    SingularDenominator(f64),

    #[error("branch never reaches the real axis for tau <= {0}")]
    NoRealCrossing(f64),

    #[error("mode {j} has tau = {tau} beyond the branch end tau_c = {tau_c}")]
    OutOfBranch { j: u32, tau: f64, tau_c: f64 },

    #[error("invalid config at {pointer}: {message}")]
    ConfigInvalid { pointer: String, message: String },

    #[error("bundle lacks output of task `{0}`")]
    MissingTaskOutput(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
