use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("improper transfer function: numerator degree {num} exceeds denominator degree {den}")]
    Improper { num: usize, den: usize },

    #[error("resolvent (jwI - A) is singular at w = {omega} rad/s (undamped pole on the imaginary axis)")]
    SingularResolvent { omega: f64 },

    #[error("matrix contains NaN or infinite entries")]
    NonFinite,

    #[error("singular matrix: {0}")]
    Singular(&'static str),

    #[error("reset-matrix singularity at w = {omega} rad/s: (I + A_rho e^(pi A/w)) is not invertible")]
    ResetSingularity { omega: f64 },

    #[error("harmonic peak lies on the search bracket edge at w = {omega} rad/s; widen the bracket")]
    PeakOnBoundary { omega: f64 },

    #[error("no steady state: {0}")]
    NoSteadyState(String),

    #[error("optimizer did not converge: {0}")]
    NoConvergence(String),

    #[error("infeasible combination: order {order}, gamma {gamma}, theta {theta_deg} deg (max achievable phase {max_phase_deg:.2} deg)")]
    Infeasible {
        order: u8,
        gamma: f64,
        theta_deg: f64,
        max_phase_deg: f64,
    },

    #[error("no feasible candidate for theta = {theta_deg} deg")]
    NoFeasibleCandidate { theta_deg: f64 },

    #[error("closed loop unstable: output diverged at t = {time} s")]
    Unstable { time: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
