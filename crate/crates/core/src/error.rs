//! Error taxonomy shared by all modules.

use thiserror::Error;

/// Everything that can go wrong when constructing models, stepping the
/// solver, or building wave profiles.
///
/// Runtime termination events (positivity loss, support collapse) are *not*
/// errors at the simulation-driver level; [`crate::dual::run`] records them
/// in the trajectory's termination reason. They only surface as `Err` when a
/// single low-level operation (e.g. one explicit step) is invoked directly.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A constructor argument violates its documented constraint.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// A scalar input is outside the function's domain (non-finite, or
    /// beyond a hard analytic boundary).
    #[error("domain error: {0}")]
    Domain(String),

    /// The flux inverse was asked for a value at or beyond the saturation
    /// speed. Callers that want clamping must clamp explicitly.
    #[error("saturation domain error: |r| >= c (r = {r}, c = {c})")]
    Saturation { r: f64, c: f64 },

    /// Boundary-layer compatibilization failed: the layer-width equation has
    /// no root in the allowed interval.
    #[error(
        "compatibility error: no boundary-layer width in (0, {delta0}] satisfies the \
         regularized boundary relation at eps = {eps}; try a smaller eps or a larger delta0"
    )]
    Compatibility { eps: f64, delta0: f64 },

    /// A stationary jump state was requested away from the critical mass.
    #[error("no steady state: requires a*M = 2c (got a*M = {am}, 2c = {two_c})")]
    NoSteadyState { am: f64, two_c: f64 },

    /// A profile family degenerates at the requested parameters.
    #[error("degenerate profile: {0}")]
    DegenerateProfile(String),

    /// A traveling-wave construction was attempted outside the admissible set.
    #[error("inadmissible wave parameters: {}", .0.join("; "))]
    Inadmissible(Vec<String>),

    /// Quadrature or inversion failed to converge, or the requested object
    /// is not numerically representable (e.g. infinite support).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// An analysis routine needs more data than the trajectory contains.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The profile cannot be expressed as a bounded reciprocal-density state.
    #[error("not representable in mass coordinates: {0}")]
    Unrepresentable(String),

    /// A cell average crossed zero during an explicit update.
    #[error("positivity loss at t = {t}")]
    PositivityLoss { t: f64 },

    /// The fronts crossed: the support length reached zero.
    #[error("support collapse at t = {t}")]
    SupportCollapse { t: f64 },

    /// A configuration value (grid list, config table) is malformed.
    #[error("config error: {0}")]
    Config(String),
}
