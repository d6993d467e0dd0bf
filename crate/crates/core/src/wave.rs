//! Traveling-wave construction in mass coordinates.
//!
//! Two families solve the wave reduction of the dual equation. Continuous
//! profiles are parameterized by the reduced speed `tau = sigma - a*kb`
//! (`kb` the mass-coordinate average over the support), under which the
//! profile has the closed form
//!
//! ```text
//! U(k)^{m+1} = ((m+1)/a) * [G(a*M + tau) - G(a*k + tau)],   k in [0, M],
//! ```
//!
//! eliminating any fixed-point iteration in `kb`. Jump profiles carry equal
//! positive edge values and exist only at `a*M = 2c`. Both are built on a
//! node grid in the mass coordinate `k` and mapped to space by integrating
//! `1/U`, with graded quadrature where the profile vanishes.

use std::f64::consts::PI;

use crate::dual::{DualState, ModelParams};
use crate::quad;
use crate::{CoreError, Result};

/// Which of the two constructible families a profile belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveKind {
    /// Vanishes at the right support edge (both edges when entropic).
    Continuous,
    /// Equal positive edge values; requires `a*M = 2c`.
    Jump,
}

impl std::fmt::Display for WaveKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WaveKind::Continuous => write!(f, "continuous"),
            WaveKind::Jump => write!(f, "jump"),
        }
    }
}

/// Admissibility audit for a continuous wave at total mass `M` and reduced
/// speed `tau`. The raw speed bounds translate to `-a*M/2 <= tau <= c - a*M`;
/// the lower bound is equivalent to `kappa_star <= 0`.
#[derive(Debug, Clone)]
pub struct AdmissibilityReport {
    /// `M <= 2c/a`
    pub mass_ok: bool,
    /// `-c <= tau <= c - a*M`
    pub sigma_range_ok: bool,
    /// Left vanishing point `2 kb - M - 2 sigma/a = -(M + 2 tau/a)`; a
    /// positive value would place it inside the support.
    pub kappa_star: f64,
    pub kappa_star_ok: bool,
    /// `tau = -a*M/2` within tolerance: the symmetric wave that vanishes at
    /// both support edges.
    pub entropic: bool,
    /// Profile positivity sampled at 64 interior points.
    pub h_positive_ok: bool,
    pub messages: Vec<String>,
}

impl AdmissibilityReport {
    pub fn is_admissible(&self) -> bool {
        self.mass_ok && self.sigma_range_ok && self.kappa_star_ok && self.h_positive_ok
    }
}

/// A constructed wave: node arrays in the mass coordinate, profile values,
/// space positions, and the speeds recovered a posteriori.
#[derive(Debug, Clone)]
pub struct WaveProfile {
    pub kind: WaveKind,
    /// Model the profile was built for; `mass` equals the profile's `M`.
    pub params: ModelParams,
    /// Reduced speed (continuous family only).
    pub tau: Option<f64>,
    /// Edge value (jump family only).
    pub v_edge: Option<f64>,
    /// Mass nodes, strictly increasing from 0 to `M`.
    pub kappa: Vec<f64>,
    /// Profile values `U(kappa_j)`, positive on the open interior.
    pub u: Vec<f64>,
    /// Space positions, strictly increasing, `xi[0]` the left support edge.
    pub xi: Vec<f64>,
    /// Wave speed: `tau + a*kb` (continuous), `a*kb - c` (jump).
    pub sigma: f64,
    /// Mass-coordinate average over the support, `(1/len) int k dxi`.
    pub kappa_bar: f64,
    /// Integration constant of the first-order reduction; the constructed
    /// families always realize zero.
    pub k_const: f64,
    /// Max over node intervals of the interval-averaged profile-ODE defect.
    pub ode_residual_max: f64,
}

impl WaveProfile {
    /// Support length in space.
    pub fn support_length(&self) -> f64 {
        self.xi[self.xi.len() - 1] - self.xi[0]
    }
}

/// Audit the continuous-wave admissibility conditions at `(mass, tau)`.
/// Pure report; every failure is a flag plus a message, never an error.
/// `params.mass` is ignored in favor of the explicit `mass` probe.
pub fn admissibility(params: &ModelParams, mass: f64, tau: f64) -> AdmissibilityReport {
    let a = params.a;
    let c = params.flux.c;
    let mut messages = Vec::new();

    if !(mass > 0.0) || !mass.is_finite() {
        return AdmissibilityReport {
            mass_ok: false,
            sigma_range_ok: false,
            kappa_star: f64::NAN,
            kappa_star_ok: false,
            entropic: false,
            h_positive_ok: false,
            messages: vec![format!("mass must be positive, got {mass}")],
        };
    }

    let slack = 1e-12 * (1.0 + c + a * mass);
    let mass_ok = a * mass <= 2.0 * c + slack;
    if !mass_ok {
        messages.push(format!(
            "mass bound violated: a*M = {} exceeds 2c = {}",
            a * mass,
            2.0 * c
        ));
    }

    let sigma_range_ok = tau >= -c - slack && tau <= c - a * mass + slack;
    if !sigma_range_ok {
        messages.push(format!(
            "reduced speed {} outside [{}, {}]",
            tau,
            -c,
            c - a * mass
        ));
    }

    let kappa_star = -(mass + 2.0 * tau / a);
    let kappa_star_ok = kappa_star <= slack;
    if !kappa_star_ok {
        messages.push(format!(
            "left vanishing point kappa_star = {kappa_star} lies inside the support"
        ));
    }

    let entropic = (tau + 0.5 * a * mass).abs() <= slack;

    // positivity of the closed-form bracket at 64 interior probes
    let mut h_positive_ok = mass_ok && sigma_range_ok;
    if h_positive_ok {
        let top = params.flux.g_primitive_raw(a * mass + tau);
        for k in 1..=64 {
            let kp = mass * k as f64 / 65.0;
            if top - params.flux.g_primitive_raw(a * kp + tau) <= 0.0 {
                h_positive_ok = false;
                messages.push(format!("profile bracket not positive at kappa = {kp}"));
                break;
            }
        }
    } else {
        messages.push("positivity not sampled: speed or mass bound already failed".into());
    }

    AdmissibilityReport {
        mass_ok,
        sigma_range_ok,
        kappa_star,
        kappa_star_ok,
        entropic,
        h_positive_ok,
        messages,
    }
}

/// Speed of the entropic wave given its mass-coordinate average.
pub fn entropic_speed(kappa_bar: f64, mass: f64, a: f64) -> f64 {
    a * (kappa_bar - 0.5 * mass)
}

/// `b^{1/(m+1)}` with the two common exponents special-cased.
fn root_mp1(b: f64, mp1: f64) -> f64 {
    if mp1 == 1.0 {
        b
    } else if mp1 == 2.0 {
        b.sqrt()
    } else {
        b.powf(1.0 / mp1)
    }
}

/// `b^{m+1}` counterpart of [`root_mp1`].
fn pow_mp1(b: f64, mp1: f64) -> f64 {
    if mp1 == 1.0 {
        b
    } else if mp1 == 2.0 {
        b * b
    } else {
        b.powf(mp1)
    }
}

/// Power-law order of `1/U` at a vanishing support edge: the profile grows
/// like `dist^{1/(m+1)}` off an unsaturated edge and like
/// `dist^{(1-1/alpha)/(m+1)}` off a saturated one. An order of 1 or more
/// means the edge sits at infinite distance in space.
fn edge_exponent(m: f64, saturated: bool, alpha: f64) -> Result<f64> {
    let p = if saturated { (1.0 - 1.0 / alpha) / (m + 1.0) } else { 1.0 / (m + 1.0) };
    if p >= 1.0 {
        return Err(CoreError::Numeric(
            "profile vanishes too slowly at an unsaturated edge (m = 0): \
             the wave has unbounded support in space"
                .into(),
        ));
    }
    Ok(p)
}

/// Construct the continuous wave for `(mass, tau)` on `n` endpoint-clustered
/// nodes, starting at space position `xi_minus`. `params.mass` is ignored in
/// favor of `mass`; the returned profile carries `mass` in its params.
pub fn continuous_profile(
    params: &ModelParams,
    mass: f64,
    tau: f64,
    xi_minus: f64,
    n: usize,
) -> Result<WaveProfile> {
    params.validate()?;
    if n < 9 {
        return Err(CoreError::Parameter(format!("need at least 9 profile nodes, got {n}")));
    }
    let rep = admissibility(params, mass, tau);
    if !rep.is_admissible() {
        return Err(CoreError::Inadmissible(rep.messages));
    }

    let a = params.a;
    let m = params.m;
    let mp1 = m + 1.0;
    let c = params.flux.c;
    let alpha = params.flux.alpha;
    let flux = &params.flux;

    // cosine-clustered nodes resolve the steep profile ends; the half-angle
    // forms give each node and its distance to the right end as plain
    // products, so neither loses digits where the clustering is densest
    let last = (n - 1) as f64;
    let mut kappa = Vec::with_capacity(n);
    let mut dist_r = Vec::with_capacity(n);
    for j in 0..n {
        let (s, co) = (0.5 * PI * j as f64 / last).sin_cos();
        kappa.push(mass * s * s);
        dist_r.push(mass * co * co);
    }
    kappa[0] = 0.0;
    dist_r[0] = mass;
    kappa[n - 1] = mass;
    dist_r[n - 1] = 0.0;

    // U^{m+1}(k) = ((m+1)/a) [G(e) - G(a k + tau)] with e = a M + tau. The
    // argument sits a distance a*min(k - kappa_star, M - k) below e in |.|,
    // so the bracket is the primitive gap at that distance; evaluating it
    // that way keeps full relative accuracy where U vanishes, which a
    // difference of primitives (quantized at eps * G) cannot
    let e = (a * mass + tau).min(c);
    let kappa_star = rep.kappa_star.min(0.0);
    let bracket_at = |dl: f64, dr: f64| (mp1 / a) * flux.g_primitive_gap(e, a * dl.min(dr));
    let u: Vec<f64> = (0..n)
        .map(|j| root_mp1(bracket_at(kappa[j] - kappa_star, dist_r[j]), mp1))
        .collect();

    // edge classification drives the quadrature grading
    let sat = |r: f64| r.abs() >= c * (1.0 - 1e-12);
    let right_sat = sat(a * mass + tau);
    let left_vanishing = rep.entropic;
    let left_sat = left_vanishing && sat(tau);
    let p_right = edge_exponent(m, right_sat, alpha)?;
    let p_left = if left_vanishing { edge_exponent(m, left_sat, alpha)? } else { 0.0 };

    // two integrand charts keep the edge distances exact: near the left edge
    // the mass coordinate is itself the distance (and k - kappa_star never
    // cancels, kappa_star <= 0), while the right chart takes the distance
    // d = M - k as its variable outright. The graded substitution feeds each
    // chart samples built multiplicatively from its own singular end at 0
    let inv_u = |k: f64| 1.0 / root_mp1(bracket_at(k - kappa_star, mass - k), mp1);
    let inv_u_right = |d: f64| 1.0 / root_mp1((mp1 / a) * flux.g_primitive_gap(e, a * d), mp1);

    // space map: cumulative integral of 1/U, graded on the edge intervals
    let mut xi = Vec::with_capacity(n);
    xi.push(xi_minus);
    let tol_xi = 1e-11 * (1.0 + mass);
    for j in 0..n - 1 {
        let seg = if j == n - 2 {
            quad::graded_integral(&inv_u_right, 0.0, dist_r[j], p_right, 0.0, tol_xi)
        } else {
            let pl = if j == 0 { p_left } else { 0.0 };
            quad::graded_integral(&inv_u, kappa[j], kappa[j + 1], pl, 0.0, tol_xi)
        };
        xi.push(xi[j] + seg);
    }

    // kb = int k dxi / int dxi, both pulled back to the mass coordinate and
    // split at M/2 so each half integrates in the chart of its own edge
    let tol_kb = 1e-10 * (1.0 + mass);
    let mid = 0.5 * mass;
    let i_len = quad::graded_integral(&inv_u, 0.0, mid, p_left, 0.0, 0.5 * tol_kb)
        + quad::graded_integral(&inv_u_right, 0.0, mid, p_right, 0.0, 0.5 * tol_kb);
    let i_mom = quad::graded_integral(&|k: f64| k * inv_u(k), 0.0, mid, p_left, 0.0, 0.5 * tol_kb)
        + quad::graded_integral(
            &|d: f64| (mass - d) * inv_u_right(d),
            0.0,
            mid,
            p_right,
            0.0,
            0.5 * tol_kb,
        );
    let kappa_bar = i_mom / i_len;
    let sigma = tau + a * kappa_bar;

    // interval-averaged defect of d(U^{m+1})/dk = -(m+1) g(a k + tau). The
    // right side integrates to differences of the flux primitive, evaluated
    // here through its own quadrature rather than the closed form used to
    // build U; the quadrature's distance-variable tail substitution absorbs
    // the saturation blow-up of g without ever reconstructing its argument
    let gq: Vec<f64> = kappa
        .iter()
        .map(|&k| flux.g_primitive_quadrature_unchecked((a * k + tau).abs()))
        .collect();
    let mut ode_residual_max = 0.0f64;
    for j in 0..n - 1 {
        let dk = kappa[j + 1] - kappa[j];
        let q = (gq[j + 1] - gq[j]) / a;
        let du = pow_mp1(u[j + 1], mp1) - pow_mp1(u[j], mp1);
        ode_residual_max = ode_residual_max.max((du / mp1 + q).abs() / dk);
    }

    let mut out_params = params.clone();
    out_params.mass = mass;
    Ok(WaveProfile {
        kind: WaveKind::Continuous,
        params: out_params,
        tau: Some(tau),
        v_edge: None,
        kappa,
        u,
        xi,
        sigma,
        kappa_bar,
        k_const: 0.0,
        ode_residual_max,
    })
}

/// Construct the jump wave with edge value `v_edge` on `n` uniform nodes.
/// Exists only at `a*M = 2c` (mass from `params`); the profile is symmetric
/// about `M/2` and its speed vanishes.
pub fn jump_profile(
    params: &ModelParams,
    v_edge: f64,
    xi_minus: f64,
    n: usize,
) -> Result<WaveProfile> {
    params.validate()?;
    let a = params.a;
    let mass = params.mass;
    let c = params.flux.c;
    let am = a * mass;
    let two_c = 2.0 * c;
    if (am - two_c).abs() > 1e-12 * c {
        return Err(CoreError::NoSteadyState { am, two_c });
    }
    if !(v_edge > 0.0) || !v_edge.is_finite() {
        return Err(CoreError::DegenerateProfile(format!(
            "edge value must be positive, got {v_edge}"
        )));
    }
    if n < 9 {
        return Err(CoreError::Parameter(format!("need at least 9 profile nodes, got {n}")));
    }

    let m = params.m;
    let mp1 = m + 1.0;
    let flux = &params.flux;

    let last = (n - 1) as f64;
    let mut kappa: Vec<f64> = (0..n).map(|j| mass * j as f64 / last).collect();
    kappa[n - 1] = mass;

    // U^{m+1}(k) = v_edge^{m+1} + ((m+1)/a) [G(c) - G(c - a k)], the gap
    // taken in one piece so its accuracy survives near both support ends
    let edge_pow = pow_mp1(v_edge, mp1);
    let u_of = |k: f64| root_mp1(edge_pow + (mp1 / a) * flux.g_primitive_gap(c, a * k), mp1);
    let u: Vec<f64> = kappa.iter().map(|&k| u_of(k)).collect();

    // 1/U is bounded by 1/v_edge, so the space map needs no grading
    let inv_u = |k: f64| 1.0 / u_of(k);
    let mut xi = Vec::with_capacity(n);
    xi.push(xi_minus);
    let tol_xi = 1e-11 * (1.0 + mass);
    for j in 0..n - 1 {
        let seg = quad::adaptive_simpson(&inv_u, kappa[j], kappa[j + 1], tol_xi);
        xi.push(xi[j] + seg);
    }

    let tol_kb = 1e-9 * (1.0 + mass);
    let i_len = quad::adaptive_simpson(&inv_u, 0.0, mass, tol_kb);
    let i_mom = quad::adaptive_simpson(&|k: f64| k * inv_u(k), 0.0, mass, tol_kb);
    let kappa_bar = i_mom / i_len;
    let sigma = a * kappa_bar - c;

    // d(U^{m+1})/dk = (m+1) g(c - a k); g blows up (integrably) where the
    // argument reaches +-c, i.e. at both domain ends. As in the continuous
    // family the check integrates g through the primitive's own quadrature,
    // whose tail substitution is regular at saturation
    let gq: Vec<f64> = kappa
        .iter()
        .map(|&k| flux.g_primitive_quadrature_unchecked((c - a * k).abs()))
        .collect();
    let mut ode_residual_max = 0.0f64;
    for j in 0..n - 1 {
        let dk = kappa[j + 1] - kappa[j];
        let q = (gq[j] - gq[j + 1]) / a;
        let du = pow_mp1(u[j + 1], mp1) - pow_mp1(u[j], mp1);
        ode_residual_max = ode_residual_max.max((du - mp1 * q).abs() / (mp1 * dk));
    }

    Ok(WaveProfile {
        kind: WaveKind::Jump,
        params: params.clone(),
        tau: None,
        v_edge: Some(v_edge),
        kappa,
        u,
        xi,
        sigma,
        kappa_bar,
        k_const: 0.0,
        ode_residual_max,
    })
}

/// Resample a jump profile as a dual-solver state: `v = 1/U` at uniform
/// cell centers, one cell per profile node, by monotone interpolation in
/// the mass coordinate. Continuous profiles vanish at the support edge, so
/// their reciprocal is unbounded and cannot be represented.
pub fn to_dual_state(profile: &WaveProfile) -> Result<DualState> {
    if profile.kind != WaveKind::Jump {
        return Err(CoreError::Unrepresentable(
            "continuous profiles vanish at the support edge; 1/U is unbounded there".into(),
        ));
    }
    let n = profile.kappa.len();
    let mass = profile.params.mass;
    let deta = mass / n as f64;
    let slopes = pchip_slopes(&profile.kappa, &profile.u);
    let v: Vec<f64> = (0..n)
        .map(|i| {
            let eta = (i as f64 + 0.5) * deta;
            1.0 / pchip_eval(&profile.kappa, &profile.u, &slopes, eta)
        })
        .collect();
    Ok(DualState { t: 0.0, params: profile.params.clone(), v })
}

/// Shape-preserving cubic interpolant slopes (harmonic weighting of the
/// adjacent secants, zero at local extrema, clamped one-sided ends).
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    assert!(n >= 2);
    let h: Vec<f64> = (0..n - 1).map(|i| x[i + 1] - x[i]).collect();
    let s: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        if s[i - 1] * s[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / s[i - 1] + w2 / s[i]);
        }
    }
    d[0] = edge_slope(h[0], h[1.min(n - 2)], s[0], s[1.min(n - 2)]);
    d[n - 1] = edge_slope(
        h[n - 2],
        h[n.saturating_sub(3).min(n - 2)],
        s[n - 2],
        s[n.saturating_sub(3).min(n - 2)],
    );
    d
}

fn edge_slope(h0: f64, h1: f64, s0: f64, s1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if d * s0 <= 0.0 {
        0.0
    } else if s1 * s0 <= 0.0 && d.abs() > 3.0 * s0.abs() {
        3.0 * s0
    } else {
        d
    }
}

fn pchip_eval(x: &[f64], y: &[f64], d: &[f64], xq: f64) -> f64 {
    let n = x.len();
    if xq <= x[0] {
        return y[0] + d[0] * (xq - x[0]);
    }
    if xq >= x[n - 1] {
        return y[n - 1] + d[n - 1] * (xq - x[n - 1]);
    }
    let mut lo = 0;
    let mut hi = n - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if x[mid] <= xq {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let h = x[lo + 1] - x[lo];
    let t = (xq - x[lo]) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * y[lo] + h10 * h * d[lo] + h01 * y[lo + 1] + h11 * h * d[lo + 1]
}
