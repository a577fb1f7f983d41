use thiserror::Error;

/// Errors produced anywhere in the computation pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the function it was passed to.
    #[error("domain error: {0}")]
    Domain(String),

    /// The small-momentum behaviour of a moment integrand is not integrable.
    #[error("moment {index} is not integrable at C -> 0 (local exponent {exponent:.3} <= -1)")]
    NonIntegrable { index: String, exponent: f64 },

    /// Adaptive subdivision hit its cap before meeting the tolerance.
    #[error(
        "quadrature failed after {subdivisions} subdivisions: error estimate {abs_err:.3e} \
         (worst panel [{worst_lo:.6e}, {worst_hi:.6e}] with {worst_err:.3e})"
    )]
    Quadrature {
        subdivisions: usize,
        abs_err: f64,
        worst_lo: f64,
        worst_hi: f64,
        worst_err: f64,
    },

    /// The wavenumber quadrature did not settle under node doubling.
    #[error("k-quadrature did not converge: last relative change {last_change:.3e} at {nodes} nodes")]
    KQuadrature { nodes: usize, last_change: f64 },

    /// omega(k) lost positivity, so the pole-elimination scheme is ill posed.
    #[error("dispersion function degenerate at k = {k:.6e}: omega = {omega:.6e}")]
    DispersionDegeneracy { k: f64, omega: f64 },

    /// Oscillatory Fourier inversion cannot be resolved at the requested depth.
    #[error("profile at x = {x} needs {panels} oscillation panels; use the Chapman-Enskog asymptote there")]
    Oscillatory { x: f64, panels: usize },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
