//! Explicit conservative finite-volume solver for the mass-coordinate form
//! of the saturated-flux model.
//!
//! In mass coordinates the unknown is `v = 1/u` on the fixed interval
//! `(0, M)`; the support endpoints become the boundary points, so front
//! motion never forces remeshing. The scheme is a textbook explicit
//! finite-volume update with an adaptive time step from a diffusivity
//! bound. Interface fluxes use the saturating flux function plus a small
//! regularizing slope term; boundary fluxes are the prescribed constants
//! `-(c - eps^kappa_bc)` on the left and `+(c - eps^kappa_bc)` on the
//! right. Because the boundary fluxes are constants and interior fluxes
//! telescope, the discrete total `deta * sum(v)` changes at exactly
//! `2(c - eps^kappa_bc) - aM` per unit time, up to roundoff.

use crate::flux::FluxModel;
use crate::front::{self, FrontState};
use crate::quad;
use crate::{CoreError, Result};

/// Model parameters: sensitivity `a`, porous-media exponent `m`, total
/// mass, and the saturating flux function.
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub a: f64,
    pub m: f64,
    pub mass: f64,
    pub flux: FluxModel,
}

impl ModelParams {
    pub fn new(a: f64, m: f64, mass: f64, flux: FluxModel) -> Result<Self> {
        let p = Self { a, m, mass, flux };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0) || !self.a.is_finite() {
            return Err(CoreError::Parameter(format!("a must be positive, got {}", self.a)));
        }
        if !(self.m >= 0.0) || !self.m.is_finite() {
            return Err(CoreError::Parameter(format!("m must be >= 0, got {}", self.m)));
        }
        if !(self.mass > 0.0) || !self.mass.is_finite() {
            return Err(CoreError::Parameter(format!("mass must be positive, got {}", self.mass)));
        }
        Ok(())
    }
}

/// Interface value `v~` entering the flux argument `s / v~^{2+m}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InterfaceMean {
    #[default]
    Arithmetic,
    Geometric,
    Harmonic,
}

impl InterfaceMean {
    #[inline]
    pub fn combine(self, a: f64, b: f64) -> f64 {
        match self {
            InterfaceMean::Arithmetic => 0.5 * (a + b),
            InterfaceMean::Geometric => (a * b).sqrt(),
            InterfaceMean::Harmonic => 2.0 * a * b / (a + b),
        }
    }
}

/// Scheme knobs. `eps` is the regularization strength, `kappa_bc` sets the
/// boundary-flux defect `eps^kappa_bc`, `lambda_env` only feeds the
/// envelope monitor, and `ell_floor_rel` is the support-length fraction at
/// which a run is declared past its concentration threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub n: usize,
    pub eps: f64,
    pub kappa_bc: f64,
    pub lambda_env: f64,
    pub cfl: f64,
    pub t_end: f64,
    pub snapshot_dt: f64,
    pub ell_floor_rel: f64,
    pub mean: InterfaceMean,
}

impl SchemeConfig {
    /// Defaults for an `n`-cell grid carrying the given total mass:
    /// `eps` equal to the cell width and a boundary exponent large enough
    /// that the boundary flux sits within `eps` of the saturation value.
    pub fn for_grid(n: usize, mass: f64) -> Self {
        SchemeConfig {
            n,
            eps: mass / n as f64,
            kappa_bc: 1.5,
            lambda_env: 1.0 / 3.0,
            cfl: 0.9,
            t_end: 1.0,
            snapshot_dt: 0.01,
            ell_floor_rel: 0.05,
            mean: InterfaceMean::Arithmetic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 8 {
            return Err(CoreError::Config(format!("n must be >= 8, got {}", self.n)));
        }
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(CoreError::Config(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.kappa_bc > 0.0) || !self.kappa_bc.is_finite() {
            return Err(CoreError::Config(format!(
                "kappa_bc must be positive, got {}",
                self.kappa_bc
            )));
        }
        if !(self.lambda_env > 0.0 && self.lambda_env <= 1.0) {
            return Err(CoreError::Config(format!(
                "lambda_env must lie in (0, 1], got {}",
                self.lambda_env
            )));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(CoreError::Config(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(CoreError::Config(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.snapshot_dt > 0.0) || !self.snapshot_dt.is_finite() {
            return Err(CoreError::Config(format!(
                "snapshot_dt must be positive, got {}",
                self.snapshot_dt
            )));
        }
        if !(self.ell_floor_rel >= 0.0 && self.ell_floor_rel < 1.0) {
            return Err(CoreError::Config(format!(
                "ell_floor_rel must lie in [0, 1), got {}",
                self.ell_floor_rel
            )));
        }
        Ok(())
    }
}

/// Cell averages of `v = 1/u` on the uniform mass grid
/// `eta_i = (i + 1/2) * deta`, `deta = M/N`.
#[derive(Debug, Clone)]
pub struct DualState {
    pub t: f64,
    pub params: ModelParams,
    pub v: Vec<f64>,
}

impl DualState {
    /// Sample a positive function at cell centers.
    pub fn from_sampler(
        params: ModelParams,
        n: usize,
        sample: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        params.validate()?;
        if n < 2 {
            return Err(CoreError::Parameter(format!("need at least 2 cells, got {n}")));
        }
        let deta = params.mass / n as f64;
        let v: Vec<f64> = (0..n).map(|i| sample((i as f64 + 0.5) * deta)).collect();
        for (i, &vi) in v.iter().enumerate() {
            if !(vi > 0.0) || !vi.is_finite() {
                return Err(CoreError::Parameter(format!(
                    "initial data must be positive and finite; cell {i} sampled {vi}"
                )));
            }
        }
        Ok(DualState { t: 0.0, params, v })
    }

    #[inline]
    pub fn deta(&self) -> f64 {
        self.params.mass / self.v.len() as f64
    }

    /// Discrete support length `deta * sum(v)`.
    pub fn support_length(&self) -> f64 {
        self.deta() * self.v.iter().sum::<f64>()
    }
}

/// `v^{2+m}` with the two common exponents special-cased; the general
/// branch costs a `powf` per interface and dominates the step otherwise.
#[derive(Debug, Clone, Copy)]
enum PowKind {
    Square,
    Cube,
    General(f64),
}

#[inline]
fn pow_kind(m: f64) -> PowKind {
    if m == 0.0 {
        PowKind::Square
    } else if m == 1.0 {
        PowKind::Cube
    } else {
        PowKind::General(2.0 + m)
    }
}

#[inline]
fn pow_2pm(v: f64, k: PowKind) -> f64 {
    match k {
        PowKind::Square => v * v,
        PowKind::Cube => v * v * v,
        PowKind::General(p) => v.powf(p),
    }
}

/// Slope of the boundary compatibility ramp, `(c - eps^kappa_bc)/(2 eps)`.
/// Grows without bound as `eps` shrinks.
pub fn boundary_ramp_slope(c: f64, eps: f64, kappa_bc: f64) -> f64 {
    (c - eps.powf(kappa_bc)) / (2.0 * eps)
}

#[inline]
fn interface_flux(
    vl: f64,
    vr: f64,
    inv_deta: f64,
    eps: f64,
    flux: &FluxModel,
    dphi0: f64,
    pk: PowKind,
    mean: InterfaceMean,
) -> f64 {
    let s = (vr - vl) * inv_deta;
    let vt = mean.combine(vl, vr);
    let y = s / pow_2pm(vt, pk);
    // The stabilizer carries the weight phi'(y)/phi'(0) so it switches
    // itself off where the flux saturates; an unweighted eps*s term would
    // push the interface flux past the saturation bound on steep data.
    flux.phi_raw(y) + eps * s * (flux.dphi_raw(y) / dphi0)
}

/// Interface flux at index `i` (0 and N are the boundary interfaces and
/// return the prescribed constants exactly; `1..N` are interior).
pub fn numerical_flux(state: &DualState, i: usize, eps: f64, kappa_bc: f64) -> f64 {
    let n = state.v.len();
    assert!(i <= n, "interface index {i} out of range 0..={n}");
    let bflux = state.params.flux.c - eps.powf(kappa_bc);
    if i == 0 {
        return -bflux;
    }
    if i == n {
        return bflux;
    }
    let pk = pow_kind(state.params.m);
    let dphi0 = state.params.flux.dphi_raw(0.0);
    interface_flux(
        state.v[i - 1],
        state.v[i],
        state.v.len() as f64 / state.params.mass,
        eps,
        &state.params.flux,
        dphi0,
        pk,
        InterfaceMean::Arithmetic,
    )
}

fn explicit_dt(
    v: &[f64],
    deta: f64,
    eps: f64,
    cfl: f64,
    dphi0: f64,
    pk: PowKind,
    mean: InterfaceMean,
) -> f64 {
    let mut dmax = 0.0f64;
    for w in v.windows(2) {
        let vt = mean.combine(w[0], w[1]);
        let d = dphi0 / pow_2pm(vt, pk);
        if d > dmax {
            dmax = d;
        }
    }
    cfl * deta * deta / (2.0 * (dmax + eps))
}

/// One in-place explicit update. Returns false when any cell went
/// non-positive (the caller decides whether that terminates a run).
#[allow(clippy::too_many_arguments)]
fn apply_step(
    v: &mut [f64],
    dt: f64,
    inv_deta: f64,
    a: f64,
    eps: f64,
    bflux: f64,
    flux: &FluxModel,
    dphi0: f64,
    pk: PowKind,
    mean: InterfaceMean,
) -> bool {
    let n = v.len();
    let mut f_left = -bflux;
    let mut positive = true;
    for i in 0..n {
        let vi = v[i];
        let f_right = if i + 1 == n {
            bflux
        } else {
            interface_flux(vi, v[i + 1], inv_deta, eps, flux, dphi0, pk, mean)
        };
        let vn = vi + dt * ((f_right - f_left) * inv_deta - a);
        positive &= vn > 0.0;
        v[i] = vn;
        f_left = f_right;
    }
    positive
}

/// Largest stable time step for the current state under `config`.
pub fn stable_dt(state: &DualState, config: &SchemeConfig) -> Result<f64> {
    config.validate()?;
    let pk = pow_kind(state.params.m);
    let dphi0 = state.params.flux.dphi_raw(0.0);
    Ok(explicit_dt(&state.v, state.deta(), config.eps, config.cfl, dphi0, pk, config.mean))
}

/// One explicit step at the stable time step. Functional: the input state
/// is untouched. Interior cells of uniform data update to `v_i - a*dt`
/// exactly (zero interior fluxes).
pub fn step(state: &DualState, config: &SchemeConfig) -> Result<DualState> {
    config.validate()?;
    state.params.validate()?;
    if state.v.len() != config.n {
        return Err(CoreError::Config(format!(
            "state has {} cells but config expects {}",
            state.v.len(),
            config.n
        )));
    }
    let bflux = state.params.flux.c - config.eps.powf(config.kappa_bc);
    if !(bflux > 0.0) {
        return Err(CoreError::Parameter(format!(
            "eps^kappa_bc = {} must stay below c = {}; decrease eps",
            config.eps.powf(config.kappa_bc),
            state.params.flux.c
        )));
    }
    let pk = pow_kind(state.params.m);
    let dphi0 = state.params.flux.dphi_raw(0.0);
    let deta = state.deta();
    let dt = explicit_dt(&state.v, deta, config.eps, config.cfl, dphi0, pk, config.mean);
    let mut v = state.v.clone();
    let ok = apply_step(
        &mut v,
        dt,
        1.0 / deta,
        state.params.a,
        config.eps,
        bflux,
        &state.params.flux,
        dphi0,
        pk,
        config.mean,
    );
    if !ok {
        return Err(CoreError::PositivityLoss { t: state.t + dt });
    }
    Ok(DualState { t: state.t + dt, params: state.params.clone(), v })
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    /// reached t_end
    Completed,
    /// some cell of v went non-positive; the dual formulation is invalid
    /// past this point, so the offending state is discarded
    PositivityLoss { t: f64 },
    /// support length fell to the configured floor (or the fronts crossed)
    BlowupThreshold { t: f64 },
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Termination::Completed => write!(f, "reached t_end"),
            Termination::PositivityLoss { t } => write!(f, "positivity loss at t = {t}"),
            Termination::BlowupThreshold { t } => write!(f, "blow-up threshold at t = {t}"),
        }
    }
}

/// Per-snapshot scalar diagnostics. Front columns (`sigma_*`, `ell`,
/// `sigma_c`) come from the front ODE clock; `mu_bar`, `mass_center`, and
/// the residual columns come from the state itself. `rh_*` are filled
/// after the run (central differences need both neighbors) and are NaN on
/// the first and last rows.
#[derive(Debug, Clone, Copy)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub sigma_minus: f64,
    pub sigma_plus: f64,
    pub ell: f64,
    pub mu_bar: f64,
    pub sigma_c: f64,
    pub mass_center: f64,
    pub vmin: f64,
    pub vmax: f64,
    pub mass_law_residual: f64,
    pub bv_seminorm: f64,
    pub rh_minus: f64,
    pub rh_plus: f64,
}

/// One recorded snapshot: full state, front positions, scalar diagnostics.
#[derive(Debug, Clone)]
pub struct TrajectoryEntry {
    pub state: DualState,
    pub fronts: FrontState,
    pub diag: DiagnosticsRow,
}

/// A completed run: snapshots at the configured cadence (plus the final
/// state), the config that produced them, and the termination reason.
/// Times are strictly increasing and no state follows a terminal event.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub entries: Vec<TrajectoryEntry>,
    pub config: SchemeConfig,
    pub termination: Termination,
    /// growth-rate sample for the envelope monitor: the largest positive
    /// rate of change of `ln(max v)` over the first few steps
    pub c5_estimate: f64,
    /// discrete support length at the initial time
    pub ell0: f64,
    pub steps_taken: u64,
}

impl Trajectory {
    pub fn final_entry(&self) -> &TrajectoryEntry {
        self.entries.last().expect("a trajectory records at least its initial state")
    }
}

fn record_entry(
    entries: &mut Vec<TrajectoryEntry>,
    params: &ModelParams,
    v: &[f64],
    t: f64,
    fronts: FrontState,
    ell0: f64,
    t0: f64,
    law_slope: f64,
) {
    let state = DualState { t, params: params.clone(), v: v.to_vec() };
    let snap = front::reconstruct(&state, fronts.sigma_minus);
    let mut vmin = f64::INFINITY;
    let mut vmax = f64::NEG_INFINITY;
    for &vi in v {
        vmin = vmin.min(vi);
        vmax = vmax.max(vi);
    }
    let bv: f64 = v.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let diag = DiagnosticsRow {
        t,
        sigma_minus: fronts.sigma_minus,
        sigma_plus: fronts.sigma_plus,
        ell: fronts.ell(),
        mu_bar: snap.mu_bar,
        sigma_c: fronts.center(),
        mass_center: snap.mass_center,
        vmin,
        vmax,
        mass_law_residual: (snap.ell - ell0 - law_slope * (t - t0)).abs(),
        bv_seminorm: bv,
        rh_minus: f64::NAN,
        rh_plus: f64::NAN,
    };
    entries.push(TrajectoryEntry { state, fronts, diag });
}

/// Run from sampled initial data. See [`run_from_state`].
pub fn run(
    params: ModelParams,
    config: &SchemeConfig,
    v0: impl Fn(f64) -> f64,
) -> Result<Trajectory> {
    config.validate()?;
    let state = DualState::from_sampler(params, config.n, v0)?;
    run_from_state(state, config)
}

/// Drive the explicit scheme from `state.t` to `config.t_end`, coupling
/// each step with the forward-Euler front ODEs on the same clock, and
/// recording snapshots at the `snapshot_dt` cadence plus the final state.
///
/// Terminates early (recorded, not an error) on positivity loss or when
/// the front-tracked support length falls to
/// `ell_floor_rel * initial length`. Deterministic: identical config and
/// initial state reproduce the trajectory bit for bit.
pub fn run_from_state(state: DualState, config: &SchemeConfig) -> Result<Trajectory> {
    config.validate()?;
    state.params.validate()?;
    if state.v.len() != config.n {
        return Err(CoreError::Config(format!(
            "state has {} cells but config expects {}",
            state.v.len(),
            config.n
        )));
    }
    for (i, &vi) in state.v.iter().enumerate() {
        if !(vi > 0.0) || !vi.is_finite() {
            return Err(CoreError::Parameter(format!(
                "state must be positive and finite; cell {i} holds {vi}"
            )));
        }
    }
    let params = state.params.clone();
    let (a, c) = (params.a, params.flux.c);
    let bflux = c - config.eps.powf(config.kappa_bc);
    if !(bflux > 0.0) {
        return Err(CoreError::Parameter(format!(
            "eps^kappa_bc = {} must stay below c = {c}; decrease eps",
            config.eps.powf(config.kappa_bc)
        )));
    }
    let t0 = state.t;
    if !(config.t_end > t0) {
        return Err(CoreError::Config(format!(
            "t_end = {} does not lie past the state time {t0}",
            config.t_end
        )));
    }

    let deta = state.deta();
    let inv_deta = 1.0 / deta;
    let pk = pow_kind(params.m);
    let dphi0 = params.flux.dphi_raw(0.0);
    if !(dphi0 > 0.0) || !dphi0.is_finite() {
        return Err(CoreError::Parameter(format!(
            "flux slope at the origin must be positive, got {dphi0}"
        )));
    }
    let law_slope = 2.0 * bflux - a * params.mass;

    let mut v = state.v;
    let mut t = t0;
    let ell0 = deta * v.iter().sum::<f64>();
    let mut fronts = FrontState { t: t0, sigma_minus: -0.5 * ell0, sigma_plus: 0.5 * ell0 };
    let floor = config.ell_floor_rel * ell0;
    let t_tol = 1e-12 * (1.0 + config.t_end.abs());

    let mut entries = Vec::new();
    record_entry(&mut entries, &params, &v, t, fronts, ell0, t0, law_slope);
    let mut next_tick = t0 + config.snapshot_dt;

    let mut termination = Termination::Completed;
    let mut steps: u64 = 0;
    let mut c5 = 0.0f64;
    let mut vmax_prev = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    loop {
        let remaining = config.t_end - t;
        if remaining <= t_tol {
            break;
        }
        let dt = explicit_dt(&v, deta, config.eps, config.cfl, dphi0, pk, config.mean)
            .min(remaining);
        if !(dt > 0.0) || t + dt == t {
            return Err(CoreError::Numeric(format!("time step underflow at t = {t}")));
        }
        let (ell_disc, weighted) = front::support_parts(&v, deta);
        let mub = weighted / ell_disc;

        if !apply_step(&mut v, dt, inv_deta, a, config.eps, bflux, &params.flux, dphi0, pk, config.mean)
        {
            termination = Termination::PositivityLoss { t: t + dt };
            break;
        }
        match front::advance_fronts(&fronts, mub, &params, dt) {
            Ok(f) => fronts = f,
            Err(CoreError::SupportCollapse { t }) => {
                termination = Termination::BlowupThreshold { t };
                break;
            }
            Err(e) => return Err(e),
        }
        t += dt;
        steps += 1;

        if steps <= 10 {
            let vmax = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let rate = (vmax.ln() - vmax_prev.ln()) / dt;
            if rate > c5 {
                c5 = rate;
            }
            vmax_prev = vmax;
        }

        if fronts.ell() <= floor {
            record_entry(&mut entries, &params, &v, t, fronts, ell0, t0, law_slope);
            termination = Termination::BlowupThreshold { t };
            break;
        }
        if t >= next_tick - t_tol {
            record_entry(&mut entries, &params, &v, t, fronts, ell0, t0, law_slope);
            while next_tick <= t + t_tol {
                next_tick += config.snapshot_dt;
            }
        }
    }

    if termination == Termination::Completed && entries.last().map(|e| e.diag.t) != Some(t) {
        record_entry(&mut entries, &params, &v, t, fronts, ell0, t0, law_slope);
    }

    let mut traj = Trajectory {
        entries,
        config: config.clone(),
        termination,
        c5_estimate: c5,
        ell0,
        steps_taken: steps,
    };
    if traj.entries.len() >= 3 {
        let samples = front::rh_residual(&traj)?;
        for (k, s) in samples.into_iter().enumerate() {
            traj.entries[k + 1].diag.rh_minus = s.r_minus;
            traj.entries[k + 1].diag.rh_plus = s.r_plus;
        }
    }
    Ok(traj)
}

/// Replace `v0` near each support end by the linear ramp that makes the
/// ideal interior flux meet the prescribed boundary constant, leaving the
/// interior `[delta0, M - delta0]` untouched.
///
/// The ramp has slope `-B` with `B = (c - eps^kappa_bc)/(2 eps)`; the
/// layer width `delta` solves, per end,
/// `phi(B / (v0(delta) + delta B)^{2+m}) + eps B = c - eps^kappa_bc`
/// by bisection. No root in `(0, delta0]` means the datum cannot carry
/// the boundary flux at this `eps`.
pub fn compatibilize_initial(
    params: &ModelParams,
    n: usize,
    v0: impl Fn(f64) -> f64,
    eps: f64,
    kappa_bc: f64,
    delta0: f64,
) -> Result<DualState> {
    params.validate()?;
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(CoreError::Parameter(format!("eps must be positive, got {eps}")));
    }
    if !(kappa_bc > 0.0) || !kappa_bc.is_finite() {
        return Err(CoreError::Parameter(format!("kappa_bc must be positive, got {kappa_bc}")));
    }
    let mass = params.mass;
    if !(delta0 > 0.0 && delta0 < 0.5 * mass) {
        return Err(CoreError::Parameter(format!(
            "delta0 must lie in (0, M/2) = (0, {}), got {delta0}",
            0.5 * mass
        )));
    }
    let c = params.flux.c;
    let target = c - eps.powf(kappa_bc);
    if !(target > 0.0) {
        return Err(CoreError::Parameter(format!(
            "eps^kappa_bc = {} must stay below c = {c}; decrease eps",
            eps.powf(kappa_bc)
        )));
    }
    let b = boundary_ramp_slope(c, eps, kappa_bc);
    let pk = pow_kind(params.m);
    let psi = |corner: f64, delta: f64| -> f64 {
        let v_bc = corner + delta * b;
        params.flux.phi_raw(b / pow_2pm(v_bc, pk)) + eps * b - target
    };

    let width = |corner_of: &dyn Fn(f64) -> f64| -> Result<f64> {
        let f = |d: f64| psi(corner_of(d), d);
        let lo = 1e-12 * delta0;
        let delta = quad::newton_bisect(&f, None, lo, delta0, 1e-13)
            .ok_or(CoreError::Compatibility { eps, delta0 })?;
        let residual = f(delta).abs();
        if residual > 1e-8 {
            return Err(CoreError::Numeric(format!(
                "boundary-flux residual {residual:.3e} exceeds 1e-8 after bisection"
            )));
        }
        Ok(delta)
    };
    let d_left = width(&|d| v0(d))?;
    let d_right = width(&|d| v0(mass - d))?;

    let corner_left = v0(d_left);
    let corner_right = v0(mass - d_right);
    DualState::from_sampler(params.clone(), n, |eta| {
        if eta < d_left {
            corner_left + b * (d_left - eta)
        } else if eta > mass - d_right {
            corner_right + b * (eta - (mass - d_right))
        } else {
            v0(eta)
        }
    })
}

/// The stationary state with a density jump at both support ends; exists
/// exactly when `aM = 2c`. Integrates the interface relation
/// `v' = v^{2+m} g(a eta - c)` outward from an analytic first-cell value,
/// solving each midpoint interface equation by Newton, so the result is a
/// discrete fixed point of the scheme up to the regularization terms.
pub fn steady_jump_profile(params: &ModelParams, v_edge: f64, n: usize) -> Result<DualState> {
    params.validate()?;
    let c = params.flux.c;
    let am = params.a * params.mass;
    if (am - 2.0 * c).abs() > 1e-12 * c {
        return Err(CoreError::NoSteadyState { am, two_c: 2.0 * c });
    }
    if !(v_edge > 0.0) || !v_edge.is_finite() {
        return Err(CoreError::DegenerateProfile(format!(
            "edge density must be positive, got {v_edge}; the stationary profile is unbounded \
             at the support ends when the edge value vanishes"
        )));
    }
    if n < 2 {
        return Err(CoreError::Parameter(format!("need at least 2 cells, got {n}")));
    }
    let deta = params.mass / n as f64;
    let m1 = params.m + 1.0;
    // u^{m+1}(eta) = v_edge^{m+1} + ((m+1)/a)(G(c) - G(c - a eta)), sampled
    // at the first cell center to anchor the recursion
    let gc = params.flux.g_primitive_raw(c);
    let g_half = params.flux.g_primitive_raw(c - params.a * 0.5 * deta);
    let u0 = (v_edge.powf(m1) + (m1 / params.a) * (gc - g_half)).powf(1.0 / m1);
    let pk = pow_kind(params.m);
    let mut v = vec![0.0; n];
    v[0] = 1.0 / u0;
    for i in 0..n - 1 {
        // interface at eta = (i+1) deta is strictly interior, so the
        // inverse flux argument stays strictly inside (-c, c)
        let r = params.flux.g_raw(params.a * (i + 1) as f64 * deta - c);
        let vi = v[i];
        let mut x = vi;
        for _ in 0..60 {
            let mid = 0.5 * (vi + x);
            let fmid = pow_2pm(mid, pk);
            let f = x - vi - deta * fmid * r;
            let fp = 1.0 - deta * 0.5 * (params.m + 2.0) * (fmid / mid) * r;
            let mut xn = x - f / fp;
            if xn <= 0.0 {
                xn = 0.5 * x;
            }
            let done = (xn - x).abs() <= 1e-15 * x || f.abs() <= 1e-15 * (1.0 + x.abs());
            x = xn;
            if done {
                break;
            }
        }
        if !(x > 0.0) || !x.is_finite() {
            return Err(CoreError::Numeric(format!(
                "stationary profile recursion failed at interface {} (value {x})",
                i + 1
            )));
        }
        v[i + 1] = x;
    }
    Ok(DualState { t: 0.0, params: params.clone(), v })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classical_params(a: f64, m: f64, mass: f64) -> ModelParams {
        ModelParams::new(a, m, mass, FluxModel::classical(1.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn params_validation() {
        let flux = FluxModel::classical(1.0, 1.0).unwrap();
        assert!(ModelParams::new(0.0, 0.0, 1.0, flux.clone()).is_err());
        assert!(ModelParams::new(1.0, -0.5, 1.0, flux.clone()).is_err());
        assert!(ModelParams::new(1.0, 0.0, 0.0, flux.clone()).is_err());
        assert!(ModelParams::new(1.0, 1.5, 2.0, flux).is_ok());
    }

    #[test]
    fn config_validation() {
        let mut cfg = SchemeConfig::for_grid(64, 1.0);
        assert!(cfg.validate().is_ok());
        assert!((cfg.eps - 1.0 / 64.0).abs() < 1e-18);
        cfg.n = 4;
        assert!(cfg.validate().is_err());
        cfg = SchemeConfig::for_grid(64, 1.0);
        cfg.cfl = 1.5;
        assert!(cfg.validate().is_err());
        cfg = SchemeConfig::for_grid(64, 1.0);
        cfg.ell_floor_rel = 1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn flux_zero_slope_and_boundaries() {
        let p = classical_params(1.0, 0.0, 1.0);
        let s = DualState::from_sampler(p, 16, |_| 0.7).unwrap();
        let eps = 1e-3;
        let kappa = 1.5;
        for i in 1..16 {
            assert_eq!(numerical_flux(&s, i, eps, kappa), 0.0);
        }
        let bflux = 1.0 - eps.powf(kappa);
        assert_eq!(numerical_flux(&s, 0, eps, kappa), -bflux);
        assert_eq!(numerical_flux(&s, 16, eps, kappa), bflux);
    }

    #[test]
    fn flux_unit_slope_tends_to_saturating_value() {
        // v_i = 1, v_{i+1} = 1 + deta: s = 1, y = 1/(1 + deta/2)^2 -> 1,
        // so F -> phi(1) = 1/sqrt(2) up to the O(eps) stabilizer.
        let p = classical_params(1.0, 0.0, 1.0);
        let n = 4096;
        let deta = 1.0 / n as f64;
        let mut v = vec![1.0; n];
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = 1.0 + i as f64 * deta;
        }
        let s = DualState { t: 0.0, params: p, v };
        let eps = 1e-3;
        let f = numerical_flux(&s, 1, eps, 1.5);
        let phi1 = 1.0 / 2.0f64.sqrt();
        assert!(f > phi1 - 1e-3 && f < phi1 + eps, "F = {f}");
    }

    #[test]
    fn step_uniform_interior_drains_linearly() {
        let p = classical_params(0.8, 0.0, 1.0);
        let cfg = SchemeConfig::for_grid(32, 1.0);
        let s0 = DualState::from_sampler(p, 32, |_| 2.0).unwrap();
        let dt = stable_dt(&s0, &cfg).unwrap();
        let s1 = step(&s0, &cfg).unwrap();
        assert!((s1.t - dt).abs() < 1e-18);
        for i in 1..31 {
            assert!((s1.v[i] - (2.0 - 0.8 * dt)).abs() < 1e-16, "cell {i}");
        }
        // boundary cells absorb the prescribed influx
        assert!(s1.v[0] > s1.v[1]);
        assert!(s1.v[31] > s1.v[30]);
    }

    #[test]
    fn step_mass_change_is_exact() {
        let p = classical_params(1.3, 0.0, 2.0);
        let cfg = SchemeConfig::for_grid(64, 2.0);
        let mut s = DualState::from_sampler(p, 64, |eta| 1.0 + 0.3 * (eta - 1.0).powi(2)).unwrap();
        let bflux = 1.0 - cfg.eps.powf(cfg.kappa_bc);
        let slope = 2.0 * bflux - 1.3 * 2.0;
        let ell_start = s.support_length();
        for _ in 0..50 {
            s = step(&s, &cfg).unwrap();
        }
        let expected = ell_start + slope * s.t;
        assert!(
            (s.support_length() - expected).abs() <= 1e-12 * (1.0 + s.t),
            "residual {}",
            (s.support_length() - expected).abs()
        );
    }

    #[test]
    fn step_keeps_stationary_profile_stationary() {
        let p = classical_params(1.0, 0.0, 2.0);
        let jump = steady_jump_profile(&p, 1.0, 400).unwrap();
        let mut cfg = SchemeConfig::for_grid(400, 2.0);
        cfg.eps = 1e-3;
        let s1 = step(&jump, &cfg).unwrap();
        let update = jump
            .v
            .iter()
            .zip(&s1.v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(update <= 1e-6, "update norm {update:.3e}");
    }

    #[test]
    fn apply_step_flags_positivity_loss() {
        let p = classical_params(1.0, 0.0, 1.0);
        let mut v = vec![0.5; 16];
        let ok = apply_step(
            &mut v,
            10.0, // far past any stable step
            16.0,
            p.a,
            1e-3,
            1.0 - 1e-3f64.powf(1.5),
            &p.flux,
            p.flux.dphi_raw(0.0),
            pow_kind(0.0),
            InterfaceMean::Arithmetic,
        );
        assert!(!ok);
    }

    #[test]
    fn interface_means() {
        assert_eq!(InterfaceMean::Arithmetic.combine(1.0, 3.0), 2.0);
        assert!((InterfaceMean::Geometric.combine(1.0, 4.0) - 2.0).abs() < 1e-15);
        assert!((InterfaceMean::Harmonic.combine(1.0, 1.0) - 1.0).abs() < 1e-15);
        // harmonic <= geometric <= arithmetic
        let (a, b) = (0.3, 2.1);
        let (h, g, ar) = (
            InterfaceMean::Harmonic.combine(a, b),
            InterfaceMean::Geometric.combine(a, b),
            InterfaceMean::Arithmetic.combine(a, b),
        );
        assert!(h < g && g < ar);
    }

    #[test]
    fn jump_profile_matches_closed_form() {
        // m=0, nu=c=1, a=1, M=2: u(eta) = 1 + sqrt(eta(2-eta)).
        let p = classical_params(1.0, 0.0, 2.0);
        let s = steady_jump_profile(&p, 1.0, 400).unwrap();
        let deta = s.deta();
        let mut worst = 0.0f64;
        for (i, &vi) in s.v.iter().enumerate() {
            let eta = (i as f64 + 0.5) * deta;
            let exact = 1.0 / (1.0 + (eta * (2.0 - eta)).sqrt());
            worst = worst.max((vi - exact).abs());
        }
        assert!(worst <= 2e-3, "max deviation {worst:.3e}");

        // odd cell count puts a cell center exactly at eta = 1, where u = 2
        let s = steady_jump_profile(&p, 1.0, 401).unwrap();
        assert!((s.v[200] - 0.5).abs() <= 1e-3, "center {}", s.v[200]);
    }

    #[test]
    fn jump_profile_matches_closed_form_porous() {
        // m=1: u^2(eta) = 1 + 2 sqrt(eta(2-eta)).
        let p = classical_params(1.0, 1.0, 2.0);
        let s = steady_jump_profile(&p, 1.0, 400).unwrap();
        let deta = s.deta();
        let mut worst = 0.0f64;
        for (i, &vi) in s.v.iter().enumerate() {
            let eta = (i as f64 + 0.5) * deta;
            let exact = 1.0 / (1.0 + 2.0 * (eta * (2.0 - eta)).sqrt()).sqrt();
            worst = worst.max((vi - exact).abs());
        }
        assert!(worst <= 5e-3, "max deviation {worst:.3e}");
    }

    #[test]
    fn jump_profile_is_symmetric() {
        let p = classical_params(1.0, 0.0, 2.0);
        let s = steady_jump_profile(&p, 1.0, 256).unwrap();
        let n = s.v.len();
        let mut worst = 0.0f64;
        for i in 0..n / 2 {
            worst = worst.max((s.v[i] - s.v[n - 1 - i]).abs());
        }
        assert!(worst <= 1e-12, "asymmetry {worst:.3e}");
    }

    #[test]
    fn jump_profile_rejections() {
        let p = classical_params(1.0, 0.0, 3.0);
        assert!(matches!(
            steady_jump_profile(&p, 1.0, 64),
            Err(CoreError::NoSteadyState { .. })
        ));
        let p = classical_params(1.0, 0.0, 2.0);
        assert!(matches!(
            steady_jump_profile(&p, 0.0, 64),
            Err(CoreError::DegenerateProfile(_))
        ));
    }

    #[test]
    fn spreading_run_completes() {
        let p = classical_params(1.0, 0.0, 1.0);
        let mut cfg = SchemeConfig::for_grid(64, 1.0);
        cfg.t_end = 0.25;
        cfg.snapshot_dt = 0.05;
        let traj = run(p, &cfg, |_| 1.0).unwrap();
        assert_eq!(traj.termination, Termination::Completed);
        let last = traj.final_entry();
        assert!((last.diag.t - 0.25).abs() <= 1e-12);
        // support grows at 2c - aM = 1 on the front clock
        assert!((last.diag.ell - (1.0 + 0.25)).abs() < 1e-12);
        let mut prev = f64::NEG_INFINITY;
        for e in &traj.entries {
            assert!(e.diag.t > prev);
            prev = e.diag.t;
            assert!(e.state.v.iter().all(|&x| x > 0.0));
            // discrete mass law at every snapshot
            assert!(e.diag.mass_law_residual <= 1e-10 * (1.0 + e.diag.t));
            // sub-solution floor
            let floor = 1.0 - e.diag.t - 10.0 * e.state.deta();
            assert!(e.diag.vmin >= floor);
        }
        assert!(traj.c5_estimate > 0.0 && traj.c5_estimate.is_finite());
    }

    #[test]
    fn concentrating_run_hits_threshold() {
        let p = classical_params(1.0, 0.0, 4.0);
        let mut cfg = SchemeConfig::for_grid(64, 4.0);
        cfg.t_end = 1.0;
        cfg.snapshot_dt = 0.02;
        cfg.ell_floor_rel = 0.1;
        let traj = run(p, &cfg, |_| 0.25).unwrap();
        match traj.termination {
            Termination::BlowupThreshold { t } => assert!(t < 0.6, "threshold at {t}"),
            other => panic!("expected blow-up threshold, got {other:?}"),
        }
        let last = traj.final_entry();
        assert!(last.diag.ell <= 0.1 + 1e-9);
        assert!(last.diag.vmin > 0.0);
        // front and mass lengths agree up to the recorded boundary defect
        let gap = 2.0 * cfg.eps.powf(cfg.kappa_bc);
        for e in &traj.entries {
            let mass_ell = e.state.support_length();
            let resid = (e.diag.ell - mass_ell - gap * (e.diag.t)).abs();
            assert!(resid <= 1e-9 * (1.0 + e.diag.t), "gap residual {resid:.3e}");
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let p = classical_params(1.0, 0.0, 1.0);
        let mut cfg = SchemeConfig::for_grid(32, 1.0);
        cfg.t_end = 0.05;
        let a = run(p.clone(), &cfg, |eta| 1.0 + eta).unwrap();
        let b = run(p, &cfg, |eta| 1.0 + eta).unwrap();
        assert_eq!(a.entries.len(), b.entries.len());
        for (x, y) in a.entries.iter().zip(&b.entries) {
            assert_eq!(x.state.v, y.state.v);
            assert_eq!(x.diag.t, y.diag.t);
            assert_eq!(x.fronts.sigma_plus, y.fronts.sigma_plus);
        }
        assert_eq!(a.steps_taken, b.steps_taken);
    }

    #[test]
    fn rh_columns_filled_on_interior_rows() {
        let p = classical_params(1.0, 0.0, 1.0);
        let mut cfg = SchemeConfig::for_grid(32, 1.0);
        cfg.t_end = 0.2;
        cfg.snapshot_dt = 0.04;
        let traj = run(p, &cfg, |_| 1.0).unwrap();
        assert!(traj.entries.len() >= 4);
        assert!(traj.entries[0].diag.rh_minus.is_nan());
        assert!(traj.entries.last().unwrap().diag.rh_plus.is_nan());
        for e in &traj.entries[1..traj.entries.len() - 1] {
            // fronts follow exact forward Euler, so the residual is tiny
            assert!(e.diag.rh_minus < 1e-9, "rh_minus {}", e.diag.rh_minus);
            assert!(e.diag.rh_plus < 1e-9);
        }
    }

    #[test]
    fn compatibilization_finds_layer_width() {
        // v0 = 1, eps = 1e-3, kappa = 1/12, M = 2: the matching condition
        // phi(B/(1 + delta B)^2) = (c - eps^kappa)/2 has its root at
        // delta = 0.1381771206, so delta0 = 0.2 admits it and delta0 = 0.1
        // does not.
        let p = classical_params(1.0, 0.0, 2.0);
        let eps = 1e-3;
        let kappa = 1.0 / 12.0;
        let err = compatibilize_initial(&p, 400, |_| 1.0, eps, kappa, 0.1);
        assert!(matches!(err, Err(CoreError::Compatibility { .. })));

        let s = compatibilize_initial(&p, 400, |_| 1.0, eps, kappa, 0.2).unwrap();
        let b = boundary_ramp_slope(1.0, eps, kappa);
        let deta = s.deta();
        // ramp slope -B across interfaces wholly inside the layer
        for i in 0..20 {
            let slope = (s.v[i + 1] - s.v[i]) / deta;
            assert!((slope + b).abs() <= 1e-9 * b, "interface {i} slope {slope}");
        }
        // untouched interior
        for (i, &vi) in s.v.iter().enumerate() {
            let eta = (i as f64 + 0.5) * deta;
            if (0.2..=1.8).contains(&eta) {
                assert_eq!(vi, 1.0, "cell {i}");
            }
        }
        // recover the layer width from the first-cell value:
        // v(0+) = v0(delta) + delta*B at eta -> 0
        let delta = (s.v[0] + b * (0.5 * deta) - 1.0) / b;
        assert!((delta - 0.1381771206233828).abs() <= 1e-8, "delta {delta}");
        // and the matching residual is tiny at that width
        let resid = (p.flux.phi_raw(b / (1.0 + delta * b).powi(2)) + eps * b
            - (1.0 - eps.powf(kappa)))
        .abs();
        assert!(resid <= 1e-8, "residual {resid:.3e}");
    }

    #[test]
    fn ramp_slope_grows_as_eps_shrinks() {
        let b3 = boundary_ramp_slope(1.0, 1e-3, 1.0 / 12.0);
        let b6 = boundary_ramp_slope(1.0, 1e-6, 1.0 / 12.0);
        let b9 = boundary_ramp_slope(1.0, 1e-9, 1.0 / 12.0);
        assert!(b3 > 0.0 && b3 < b6 && b6 < b9);
    }

    #[test]
    fn compatibilization_respects_symmetry() {
        let p = classical_params(1.0, 0.0, 2.0);
        let s = compatibilize_initial(&p, 256, |_| 1.0, 1e-3, 1.0 / 12.0, 0.2).unwrap();
        let n = s.v.len();
        for i in 0..n / 2 {
            assert!((s.v[i] - s.v[n - 1 - i]).abs() <= 1e-9 * s.v[i]);
        }
    }
}
