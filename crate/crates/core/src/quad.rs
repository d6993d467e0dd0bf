//! Scalar quadrature and root-finding helpers.
//!
//! Everything here is deliberately small: adaptive Simpson on smooth
//! integrands, a power-law substitution wrapper for integrable endpoint
//! singularities, and a safeguarded bisection/Newton hybrid. No external
//! state, no allocation in the hot paths.

/// Adaptive Simpson with Richardson correction.
///
/// `tol` is an absolute tolerance for the whole interval; it is split evenly
/// across recursive halves. Depth is capped so a pathological integrand
/// cannot hang the caller; the cap corresponds to interval widths of about
/// `|b-a| * 2^-50`, far below roundoff for the uses in this crate.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol.max(f64::MIN_POSITIVE), 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // the second test stops refinement once delta is pure roundoff;
    // without it an unreachable tolerance expands the full binary tree
    let roundoff = 4.0 * f64::EPSILON * (left.abs() + right.abs());
    if depth == 0 || delta.abs() <= 15.0 * tol || delta.abs() <= roundoff {
        // Richardson extrapolation: one order beyond plain Simpson.
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Integrate `f` over `[a, b]` where `f` may blow up like
/// `(x - a)^(-p_left)` at `a` and `(b - x)^(-p_right)` at `b`, with
/// `0 <= p < 1` on each side (integrable).
///
/// The interval is split at its midpoint and each half is mapped by the
/// power substitution `x = end +/- h * z^(1/(1-p))`, which turns the
/// singular factor into a bounded one; plain adaptive Simpson then applies.
pub fn graded_integral(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    p_left: f64,
    p_right: f64,
    tol: f64,
) -> f64 {
    assert!(
        (0.0..1.0).contains(&p_left) && (0.0..1.0).contains(&p_right),
        "endpoint exponents must lie in [0, 1)"
    );
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    graded_half(f, a, m, p_left, false, 0.5 * tol) + graded_half(f, b, m, p_right, true, 0.5 * tol)
}

/// One half-interval with a possible singularity at `end`; integrates from
/// `end` toward `inner`. `flip` marks the right half (descending x).
fn graded_half(f: &dyn Fn(f64) -> f64, end: f64, inner: f64, p: f64, flip: bool, tol: f64) -> f64 {
    let h = (inner - end).abs();
    if h == 0.0 {
        return 0.0;
    }
    if p == 0.0 {
        let v = adaptive_simpson(f, end.min(inner), end.max(inner), tol);
        return v;
    }
    // x = end + sign*h*z^q, dx = sign*h*q*z^(q-1) dz. With q = 2/(1-p) the
    // transformed integrand scales like z^(q(1-p)-1) = z near the endpoint,
    // so it vanishes there and the z=0 node needs no special limit value.
    let q = 2.0 / (1.0 - p);
    let sign = if flip { -1.0 } else { 1.0 };
    let g = move |z: f64| {
        if z <= 0.0 {
            return 0.0;
        }
        let x = end + sign * h * z.powf(q);
        if x == end {
            // offset rounded away; the true value here is O(z), negligible
            return 0.0;
        }
        let v = f(x);
        if !v.is_finite() {
            // x is distinct from the endpoint, but arithmetic inside f can
            // still round its own argument onto the singular value; the true
            // transformed integrand vanishes at the endpoint, so drop the
            // sample rather than poison the Simpson sums
            return 0.0;
        }
        v * h * q * z.powf(q - 1.0)
    };
    adaptive_simpson(&g, 0.0, 1.0, tol)
}

/// Safeguarded root finder: bisection bracket maintained around Newton steps.
///
/// Requires `f(lo)` and `f(hi)` of opposite sign. Returns the root to
/// absolute tolerance `xtol` (and drives `|f|` as far down as the bracket
/// allows). `df` is optional; without it the method is pure bisection.
pub fn newton_bisect(
    f: &dyn Fn(f64) -> f64,
    df: Option<&dyn Fn(f64) -> f64>,
    mut lo: f64,
    mut hi: f64,
    xtol: f64,
) -> Option<f64> {
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 || (hi - lo).abs() <= xtol {
            return Some(x);
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
        } else {
            hi = x;
        }
        let mut next = f64::NAN;
        if let Some(d) = df {
            let dx = d(x);
            if dx != 0.0 && dx.is_finite() {
                let cand = x - fx / dx;
                if cand > lo && cand < hi {
                    next = cand;
                }
            }
        }
        x = if next.is_finite() { next } else { 0.5 * (lo + hi) };
    }
    Some(x)
}
