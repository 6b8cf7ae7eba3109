use thiserror::Error;

/// Errors surfaced by the chart-local kernels.
#[derive(Debug, Error)]
pub enum Error {
    /// A field evaluation produced a non-finite number. The index is the flat
    /// position inside the jet: 0 is the value, `1 + s` the gradient entry `s`,
    /// `1 + m + s*m + r` the Hessian entry `(s, r)`.
    #[error("non-finite field evaluation at jet component {index}")]
    Evaluation { index: usize },

    /// The spectrum condition for the generalized polar decomposition failed:
    /// an eigenvalue sits on (or too close to) the nonpositive real axis or the
    /// imaginary axis, so no unique principal factorization exists.
    #[error("polar decomposition spectrum condition violated near eigenvalue {re} + {im}i")]
    Spectrum { re: f64, im: f64 },

    /// Spectrum failure tagged with the chart point where it happened.
    #[error("polar decomposition failed at chart point {coords:?}: eigenvalue {re} + {im}i")]
    SpectrumAtPoint { coords: Vec<f64>, re: f64, im: f64 },

    /// The symmetry hypotheses of the three-index linear solver do not hold.
    #[error("inconsistent solver data: {what} violates its symmetry hypothesis by {magnitude}")]
    Consistency { what: &'static str, magnitude: f64 },

    /// A matrix handed in as a gauge transformation does not preserve eta.
    #[error("matrix is not in K: max |k^T eta k - eta| = {deviation}")]
    NotInK { deviation: f64 },

    /// Frame components do not form an invertible matrix.
    #[error("singular frame (vielbein not invertible)")]
    SingularFrame,

    /// Metric components do not form an invertible matrix.
    #[error("singular metric")]
    SingularMetric,

    /// An operation needing connection derivatives got a bare connection.
    #[error("connection coefficients carry no derivatives (dgamma missing)")]
    MissingDgamma,

    /// Second derivatives were required but absent from the metric jet.
    #[error("metric jet carries no second derivatives (ddg missing)")]
    MissingDdg,

    /// Domain / validation failures (bad shapes, bad invariants, bad input data).
    #[error("{0}")]
    Domain(String),

    /// Input file or flag parsing failures.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
