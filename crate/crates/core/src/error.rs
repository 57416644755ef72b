use std::fmt;

/// Which endpoint hypothesis a derivator violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Left,
    Right,
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Left => f.write_str("left endpoint a"),
            Endpoint::Right => f.write_str("right endpoint b"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{endpoint} = {at} lies in {set}, which the endpoint hypotheses exclude")]
    NonAdmissibleEndpoint {
        endpoint: Endpoint,
        at: f64,
        set: &'static str,
    },
    #[error("malformed spec, field `{field}`: {reason}")]
    MalformedSpec { field: String, reason: String },
    #[error("t = {t} lies outside the domain [{a}, {b}]")]
    OutOfDomain { t: f64, a: f64, b: f64 },
    #[error("value {y} outside the admissible range [{lo}, {hi}]")]
    OutOfRange { y: f64, lo: f64, hi: f64 },
    #[error("integrand is unbounded near {t}")]
    UnboundedIntegrand { t: f64 },
    #[error("every sample near t* = {t_star} had g(s) = g(t*); the quotient is undefined")]
    DegenerateQuotient { t_star: f64 },
    #[error("phi({t}) = {phi} is not positive; the everywhere FTC hypothesis fails there")]
    PhiHypothesisViolated { t: f64, phi: f64 },
    #[error("f is not g-continuous at {t} (witness s = {witness})")]
    GContinuityViolated { t: f64, witness: f64 },
    #[error("no g-derivative at {t}, a point of positive |mu_g| mass")]
    NotDifferentiableAlmostEverywhere { t: f64 },
    #[error("the derivator must be nondecreasing")]
    NondecreasingRequired,
    #[error("abscissa {x} appears twice with different ordinates")]
    DuplicateAbscissa { x: f64 },
    #[error("boundary hypothesis violated: {0}")]
    BoundaryHypothesisViolated(String),
    #[error("could not certify an L1_g error below {eps} (best {best})")]
    BudgetExceeded { eps: f64, best: f64 },
    #[error("phi({t}) = {phi} is certified positive; no witness exists")]
    PhiNotZero { t: f64, phi: f64 },
    #[error("approach sequence unsuitable: {0}")]
    SequenceUnsuitable(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn malformed(field: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::MalformedSpec {
        field: field.into(),
        reason: reason.into(),
    }
}
