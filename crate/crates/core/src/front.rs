//! Physical-space reconstruction and front dynamics.
//!
//! The mass-coordinate state determines the physical solution up to one
//! translation: fixing the left front `sigma_minus` places every cell at
//! `x_i = sigma_minus + int_0^eta_i v`, and the density is `u = 1/v`. The
//! fronts themselves obey first-order ODEs driven by the support-average
//! `mu_bar` of the mass coordinate, and the support length obeys the exact
//! linear law `ell' = 2c - aM` independently of `mu_bar`.

use crate::dual::{DualState, ModelParams, Trajectory};
use crate::{CoreError, Result};

/// Front positions at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontState {
    pub t: f64,
    pub sigma_minus: f64,
    pub sigma_plus: f64,
}

impl FrontState {
    /// Support length `sigma_plus - sigma_minus`.
    pub fn ell(&self) -> f64 {
        self.sigma_plus - self.sigma_minus
    }

    /// Support midpoint.
    pub fn center(&self) -> f64 {
        0.5 * (self.sigma_minus + self.sigma_plus)
    }
}

/// The physical-space picture reconstructed from one dual state: positions,
/// densities, cumulative mass, and the averaged quantities driving the
/// front ODEs. All fields are mutually consistent by construction
/// (`ell = deta * sum(v)`, `sigma_c = sigma_minus + ell/2`).
#[derive(Debug, Clone)]
pub struct PhysicalSnapshot {
    pub t: f64,
    /// cell-center positions, strictly increasing
    pub x: Vec<f64>,
    /// densities `1/v_i`
    pub u: Vec<f64>,
    /// cumulative mass at cell centers (the mass grid itself)
    pub mu: Vec<f64>,
    /// support-average of the mass coordinate
    pub mu_bar: f64,
    /// support midpoint
    pub sigma_c: f64,
    /// center of mass of `u`
    pub mass_center: f64,
    /// support length
    pub ell: f64,
}

/// Qualitative support behavior as decided by the sign of `2c - aM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Spreading,
    Critical,
    Concentrating,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::Spreading => "spreading",
            Regime::Critical => "critical",
            Regime::Concentrating => "concentrating",
        };
        f.write_str(s)
    }
}

/// The closed-form support forecast: length slope, regime, and (in the
/// concentrating case) the finite collapse time.
#[derive(Debug, Clone, Copy)]
pub struct SupportForecast {
    /// `d ell / dt = 2c - aM`
    pub slope: f64,
    /// `ell0 / (aM - 2c)`, present iff concentrating
    pub t_star: Option<f64>,
    pub regime: Regime,
}

/// Center-of-mass diagnostics for one snapshot.
#[derive(Debug, Clone, Copy)]
pub struct CenterDiagnostics {
    pub sigma_c: f64,
    pub mass_center: f64,
    /// `|M*m - M*sigma_plus + ell*mu_bar|`; zero to roundoff for the
    /// midpoint-rule reconstruction
    pub identity_residual: f64,
    /// reported drift rate of the support center, `a*(2*mu_bar - M)`
    pub sigma_c_rate: f64,
}

/// One Rankine-Hugoniot residual sample: how far the numerically observed
/// front speeds are from the speeds dictated by `mu_bar`.
#[derive(Debug, Clone, Copy)]
pub struct RhSample {
    pub t: f64,
    pub r_minus: f64,
    pub r_plus: f64,
}

/// Discrete support length and mass-average in one pass.
pub(crate) fn support_parts(v: &[f64], deta: f64) -> (f64, f64) {
    let mut ell = 0.0;
    let mut weighted = 0.0;
    for (i, &vi) in v.iter().enumerate() {
        let eta = (i as f64 + 0.5) * deta;
        ell += vi;
        weighted += eta * vi;
    }
    (deta * ell, deta * weighted)
}

/// Support-average of the mass coordinate,
/// `mu_bar = int eta*v deta / int v deta`, by the midpoint rule. Strictly
/// inside `(0, M)` for positive states; equals `M/2` on symmetric states.
pub fn mu_bar(state: &DualState) -> f64 {
    let (ell, weighted) = support_parts(&state.v, state.deta());
    weighted / ell
}

/// Forward-Euler update of the front ODEs
/// `sigma_minus' = -c + a*mu_bar`, `sigma_plus' = c - a*(M - mu_bar)`.
///
/// The length change per step is exactly `(2c - aM)*dt` regardless of
/// `mu_bar`; crossing fronts are a support-collapse event.
pub fn advance_fronts(
    fronts: &FrontState,
    mu_bar: f64,
    params: &ModelParams,
    dt: f64,
) -> Result<FrontState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(CoreError::Parameter(format!("dt must be positive, got {dt}")));
    }
    if !(mu_bar > 0.0 && mu_bar < params.mass) {
        return Err(CoreError::Parameter(format!(
            "mu_bar must lie in (0, M) = (0, {}), got {mu_bar}",
            params.mass
        )));
    }
    let c = params.flux.c;
    let next = FrontState {
        t: fronts.t + dt,
        sigma_minus: fronts.sigma_minus + dt * (-c + params.a * mu_bar),
        sigma_plus: fronts.sigma_plus + dt * (c - params.a * (params.mass - mu_bar)),
    };
    if next.sigma_plus <= next.sigma_minus {
        return Err(CoreError::SupportCollapse { t: next.t });
    }
    Ok(next)
}

/// Reconstruct the physical solution from a dual state, anchored at the
/// given left front. Cell positions come from midpoint-rule cumulative sums
/// of `v`, so `x` is strictly increasing whenever the state is positive.
pub fn reconstruct(state: &DualState, sigma_minus: f64) -> PhysicalSnapshot {
    let n = state.v.len();
    let deta = state.deta();
    let mut x = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    let mut mu = Vec::with_capacity(n);
    let mut running = 0.0;
    for (i, &vi) in state.v.iter().enumerate() {
        x.push(sigma_minus + deta * (running + 0.5 * vi));
        running += vi;
        u.push(1.0 / vi);
        mu.push((i as f64 + 0.5) * deta);
    }
    let (ell, weighted) = support_parts(&state.v, deta);
    let mass = state.params.mass;
    let mass_center = deta * x.iter().sum::<f64>() / mass;
    PhysicalSnapshot {
        t: state.t,
        x,
        u,
        mu,
        mu_bar: weighted / ell,
        sigma_c: sigma_minus + 0.5 * ell,
        mass_center,
        ell,
    }
}

/// The closed-form support forecast from the initial length alone.
pub fn predict_support(params: &ModelParams, ell0: f64) -> Result<SupportForecast> {
    if !(ell0 > 0.0) || !ell0.is_finite() {
        return Err(CoreError::Parameter(format!("ell0 must be positive, got {ell0}")));
    }
    let c = params.flux.c;
    let slope = 2.0 * c - params.a * params.mass;
    let (regime, t_star) = if slope.abs() <= 1e-12 * c {
        (Regime::Critical, None)
    } else if slope > 0.0 {
        (Regime::Spreading, None)
    } else {
        (Regime::Concentrating, Some(ell0 / -slope))
    };
    Ok(SupportForecast { slope, t_star, regime })
}

/// Center-of-mass identity and drift rate for one snapshot.
///
/// The identity `M*m = M*sigma_plus - ell*mu_bar` holds exactly (to
/// roundoff) for the midpoint-rule reconstruction; the residual is reported
/// against the snapshot's own `sigma_plus = sigma_c + ell/2`. The drift
/// rate's sign always agrees with `sign(sigma_c - m)`.
pub fn center_diagnostics(snap: &PhysicalSnapshot, params: &ModelParams) -> CenterDiagnostics {
    let mass = params.mass;
    let sigma_plus = snap.sigma_c + 0.5 * snap.ell;
    let identity_residual =
        (mass * snap.mass_center - mass * sigma_plus + snap.ell * snap.mu_bar).abs();
    CenterDiagnostics {
        sigma_c: snap.sigma_c,
        mass_center: snap.mass_center,
        identity_residual,
        sigma_c_rate: params.a * (2.0 * snap.mu_bar - mass),
    }
}

/// Three-point derivative on a non-uniform stencil, exact for quadratics.
pub(crate) fn derivative_3pt(t0: f64, t1: f64, t2: f64, f0: f64, f1: f64, f2: f64) -> f64 {
    let h1 = t1 - t0;
    let h2 = t2 - t1;
    -f0 * h2 / (h1 * (h1 + h2)) + f1 * (h2 - h1) / (h1 * h2) + f2 * h1 / (h2 * (h1 + h2))
}

/// Rankine-Hugoniot residuals along a trajectory: central-difference front
/// speeds compared against the speeds dictated by the recorded `mu_bar`.
/// One sample per interior snapshot; needs at least three snapshots.
pub fn rh_residual(traj: &Trajectory) -> Result<Vec<RhSample>> {
    let rows = &traj.entries;
    if rows.len() < 3 {
        return Err(CoreError::InsufficientData(format!(
            "Rankine-Hugoniot residuals need >= 3 snapshots, trajectory has {}",
            rows.len()
        )));
    }
    let params = &rows[0].state.params;
    let (a, c, mass) = (params.a, params.flux.c, params.mass);
    let mut out = Vec::with_capacity(rows.len() - 2);
    for j in 1..rows.len() - 1 {
        let (p, q, r) = (&rows[j - 1], &rows[j], &rows[j + 1]);
        let (t0, t1, t2) = (p.fronts.t, q.fronts.t, r.fronts.t);
        let dm = derivative_3pt(t0, t1, t2, p.fronts.sigma_minus, q.fronts.sigma_minus, r.fronts.sigma_minus);
        let dp = derivative_3pt(t0, t1, t2, p.fronts.sigma_plus, q.fronts.sigma_plus, r.fronts.sigma_plus);
        let mub = q.diag.mu_bar;
        out.push(RhSample {
            t: t1,
            r_minus: (dm - (-c + a * mub)).abs(),
            r_plus: (dp - (c - a * (mass - mub))).abs(),
        });
    }
    Ok(out)
}
