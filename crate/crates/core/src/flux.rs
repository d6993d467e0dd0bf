//! The saturated flux nonlinearity and its derived calculus.
//!
//! A flux model packages four scalar maps: the flux `phi` itself (odd,
//! strictly increasing, saturating at a finite speed `c`), its derivative,
//! its inverse `g`, and the primitive `G(u) = int_0^u g`. The built-in
//! classical family
//!
//! ```text
//! phi(y) = nu * y / sqrt(1 + (nu/c)^2 y^2)
//! ```
//!
//! has all four in closed form. User-supplied families provide `phi` (and
//! optionally its derivative); the inverse is computed by safeguarded
//! bisection plus Newton to 1e-12 and the primitive by adaptive quadrature
//! with a power-law substitution at the saturated end, where the integrand
//! behaves like `(c - s)^(-1/alpha)`.

use std::fmt;
use std::sync::Arc;

use crate::quad;
use crate::{CoreError, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Classical,
    Custom { phi: ScalarFn, dphi: Option<ScalarFn> },
}

/// A saturated flux with saturation speed `c`, slope scale `nu`, tail
/// exponent `alpha`, and a tail constant `k_tail` witnessing
/// `phi(y) >= c - k_tail / y` for `y >= 1`.
///
/// Values are immutable after construction and cheap to clone; evaluators
/// are pure, so a model may be shared freely across threads.
#[derive(Clone)]
pub struct FluxModel {
    pub c: f64,
    pub nu: f64,
    pub alpha: f64,
    pub k_tail: f64,
    kind: Kind,
}

impl fmt::Debug for FluxModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let family = match self.kind {
            Kind::Classical => "classical",
            Kind::Custom { .. } => "custom",
        };
        f.debug_struct("FluxModel")
            .field("family", &family)
            .field("c", &self.c)
            .field("nu", &self.nu)
            .field("alpha", &self.alpha)
            .field("k_tail", &self.k_tail)
            .finish()
    }
}

impl FluxModel {
    /// The classical saturated family `phi(y) = nu*y/sqrt(1+(nu/c)^2 y^2)`,
    /// with inverse `g(r) = r/(nu*sqrt(1-r^2/c^2))`, primitive
    /// `G(u) = (c^2/nu)(1 - sqrt(1-u^2/c^2))`, and tail exponent 2.
    ///
    /// `k_tail = c^3/(2 nu)` is verified numerically at construction; any
    /// constant satisfying the tail inequality would do.
    pub fn classical(nu: f64, c: f64) -> Result<Self> {
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(CoreError::Parameter(format!("nu must be positive, got {nu}")));
        }
        if !(c > 0.0) || !c.is_finite() {
            return Err(CoreError::Parameter(format!("c must be positive, got {c}")));
        }
        let model = FluxModel { c, nu, alpha: 2.0, k_tail: c * c * c / (2.0 * nu), kind: Kind::Classical };
        model.verify_tail_constant()?;
        Ok(model)
    }

    /// A user-supplied flux. No hypothesis checking happens here; run
    /// [`FluxModel::validate_hypotheses`] to audit the family. The inverse
    /// and primitive fall back to numeric inversion and quadrature.
    ///
    /// `dphi` may be omitted (central differences are used), and `k_tail`
    /// may be omitted (estimated from samples of `y * (c - phi(y))`).
    pub fn custom(
        c: f64,
        alpha: f64,
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dphi: Option<ScalarFn>,
        k_tail: Option<f64>,
    ) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(CoreError::Parameter(format!("c must be positive, got {c}")));
        }
        if !(alpha >= 1.0) || !alpha.is_finite() {
            return Err(CoreError::Parameter(format!("alpha must be >= 1, got {alpha}")));
        }
        let phi: ScalarFn = Arc::new(phi);
        let mut model = FluxModel { c, nu: 1.0, alpha, k_tail: c, kind: Kind::Custom { phi, dphi } };
        let slope0 = model.dphi_raw(0.0);
        model.nu = if slope0.is_finite() && slope0 > 0.0 { slope0 } else { 1.0 };
        model.k_tail = match k_tail {
            Some(k) if k > 0.0 && k.is_finite() => k,
            Some(k) => return Err(CoreError::Parameter(format!("k_tail must be positive, got {k}"))),
            None => model.estimate_tail_constant(),
        };
        Ok(model)
    }

    fn verify_tail_constant(&self) -> Result<()> {
        for k in 0..=64 {
            let y = 10f64.powf(8.0 * k as f64 / 64.0); // [1, 1e8] log grid
            if self.phi_raw(y) < self.c - self.k_tail / y - 1e-12 * self.c {
                return Err(CoreError::Parameter(format!(
                    "tail constant {} fails the saturation inequality at y = {y}",
                    self.k_tail
                )));
            }
        }
        Ok(())
    }

    fn estimate_tail_constant(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..=64 {
            let y = 10f64.powf(8.0 * k as f64 / 64.0);
            worst = worst.max(y * (self.c - self.phi_raw(y)));
        }
        (1.05 * worst).max(1e-12 * self.c)
    }

    // ---- raw evaluators (no argument validation; solver hot path) ----

    #[inline]
    pub(crate) fn phi_raw(&self, y: f64) -> f64 {
        match &self.kind {
            Kind::Classical => {
                let t = self.nu * y / self.c;
                if t.abs() > 1.0 {
                    // algebraically identical form that cannot overflow
                    self.c * t.signum() / (1.0 + 1.0 / (t * t)).sqrt()
                } else {
                    self.c * t / (1.0 + t * t).sqrt()
                }
            }
            Kind::Custom { phi, .. } => phi(y),
        }
    }

    #[inline]
    pub(crate) fn dphi_raw(&self, y: f64) -> f64 {
        match &self.kind {
            Kind::Classical => {
                // nu/(1+t^2)^{3/2}; t^2 overflow drives the result to 0,
                // which is the correct saturated limit
                let t = self.nu * y / self.c;
                let z = 1.0 + t * t;
                self.nu / (z * z.sqrt())
            }
            Kind::Custom { phi, dphi } => match dphi {
                Some(d) => d(y),
                None => {
                    let h = 6e-6 * y.abs().max(1.0);
                    (phi(y + h) - phi(y - h)) / (2.0 * h)
                }
            },
        }
    }

    #[inline]
    pub(crate) fn g_raw(&self, r: f64) -> f64 {
        debug_assert!(r.abs() < self.c);
        match &self.kind {
            Kind::Classical => {
                let s = r / self.c;
                r / (self.nu * (1.0 - s * s).sqrt())
            }
            Kind::Custom { .. } => self.invert_phi(r),
        }
    }

    #[inline]
    pub(crate) fn g_primitive_raw(&self, u: f64) -> f64 {
        match &self.kind {
            Kind::Classical => {
                // stable form of (c^2/nu)(1 - sqrt(1 - (u/c)^2))
                let s = (u / self.c) * (u / self.c);
                (self.c * self.c / self.nu) * s / (1.0 + (1.0 - s).sqrt())
            }
            Kind::Custom { .. } => self.g_primitive_quadrature_unchecked(u.abs()),
        }
    }

    fn invert_phi(&self, r: f64) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        let target = r.abs();
        // expand a bracket [0, hi] with phi(hi) >= target
        let mut hi = 1.0;
        let mut guard = 0;
        while self.phi_raw(hi) < target {
            hi *= 2.0;
            guard += 1;
            if guard > 1200 {
                break; // phi never reaches target; root finder will do its best
            }
        }
        let f = |y: f64| self.phi_raw(y) - target;
        let d = |y: f64| self.dphi_raw(y);
        let y = quad::newton_bisect(&f, Some(&d), 0.0, hi, 1e-12 * hi.max(1.0)).unwrap_or(hi);
        y * r.signum()
    }

    /// `s * g(c - s^2)`: the tail integrand of `G` in the distance variable
    /// `s = sqrt(c - r)`. The substitution soaks up the inverse-root blow-up
    /// of `g` at saturation; for the built-in family the product is
    /// evaluated in a cancellation-free closed form, bounded on all of
    /// `[0, sqrt(c)]` including `s = 0`.
    ///
    /// `s_floor` freezes the custom branch: below it the inverse of `phi` is
    /// quantization noise, so the integrand continues as a constant. The
    /// frozen-region bias is `O(s_floor^3)`; an unfrozen integrand would feed
    /// the adaptive quadrature a staircase it can never resolve.
    fn g_tail_integrand(&self, s: f64, s_floor: f64) -> f64 {
        match &self.kind {
            Kind::Classical => {
                // s*g(c-s^2) = c(c-s^2)/(nu*sqrt(2c-s^2))
                let r = self.c - s * s;
                self.c * r / (self.nu * (2.0 * self.c - s * s).sqrt())
            }
            Kind::Custom { .. } => {
                let s_eff = s.max(s_floor);
                let r = (self.c - s_eff * s_eff).min(self.c * (1.0 - 1e-15));
                s_eff * self.invert_phi(r)
            }
        }
    }

    /// Distance below which numeric inversion of `phi` drowns in the ulp
    /// quantization of values near `c`. The inverse at `phi(y)` carries
    /// relative error about `eps * c / (y * phi'(y))`, which grows without
    /// bound as `y -> inf`; the floor marks where it reaches ~3e-10.
    fn custom_tail_floor(&self) -> f64 {
        match &self.kind {
            Kind::Classical => 0.0,
            Kind::Custom { .. } => {
                let target = 7.3e-7 * self.c;
                let mut y = 1.0;
                let mut guard = 0;
                while y * self.dphi_raw(y) > target && guard < 200 {
                    y *= 2.0;
                    guard += 1;
                }
                let gap = (self.c - self.phi_raw(y)).max(0.0);
                gap.sqrt().max(self.c.sqrt() * 4e-8)
            }
        }
    }

    pub(crate) fn g_primitive_quadrature_unchecked(&self, u: f64) -> f64 {
        if u == 0.0 {
            return 0.0;
        }
        // the tolerance must sit above the integrand's own noise floor or
        // the adaptive refinement never terminates; numeric inversion in
        // custom families is far noisier than the closed classical form
        let tol = match &self.kind {
            Kind::Classical => 1e-13,
            Kind::Custom { .. } => 2e-10,
        } * (self.c * self.c / self.nu).max(1.0);
        let split = 0.5 * self.c;
        if u <= split {
            return quad::adaptive_simpson(&|r| self.g_raw(r), 0.0, u, tol);
        }
        let head = quad::adaptive_simpson(&|r| self.g_raw(r), 0.0, split, 0.5 * tol);
        // int_split^u g(r) dr with r = c - s^2, dr = -2s ds
        let s_lo = (self.c - split).sqrt();
        let s_hi = (self.c - u).max(0.0).sqrt();
        let s_floor = self.custom_tail_floor();
        let tail = quad::adaptive_simpson(
            &|s| 2.0 * self.g_tail_integrand(s, s_floor),
            s_hi,
            s_lo,
            0.5 * tol,
        );
        head + tail
    }

    /// The primitive gap `G(e) - G(e - delta)` for `0 <= delta <= 2e`,
    /// `0 <= e <= c`, formed directly from `delta` so it keeps full relative
    /// accuracy where the two primitives agree to near machine precision.
    ///
    /// A plain difference of primitives is quantized at `eps * G(e)` absolute;
    /// near a point where the gap vanishes that quantization is a staircase an
    /// adaptive quadrature can neither resolve nor ignore. Callers must build
    /// `delta` itself without subtractive loss (as a product of an exact
    /// distance, never by subtracting two close arguments); everything else is
    /// handled here. Since `G` is even the gap equals `int g` over
    /// `[|e - delta|, e]`, symmetric under `delta <-> 2e - delta`. Out-of-range
    /// `delta` is clamped.
    pub(crate) fn g_primitive_gap(&self, e: f64, delta: f64) -> f64 {
        debug_assert!((0.0..=self.c * (1.0 + 1e-9)).contains(&e));
        let e = e.min(self.c);
        let delta = delta.min(2.0 * e);
        if delta <= 0.0 {
            return 0.0;
        }
        // c - |e - delta| assembled additively: both branches are sums of
        // nonnegative terms, so no digits cancel even at saturation
        let c_minus_e = (self.c - e).max(0.0);
        let (r_abs, c_minus_r) = if delta <= e {
            (e - delta, c_minus_e + delta)
        } else {
            (delta - e, c_minus_e + (2.0 * e - delta))
        };
        match &self.kind {
            Kind::Classical => {
                // G(e) - G(r) = (e^2 - r^2) / (nu (w_e + w_r)) with
                // w_x = sqrt(1 - (x/c)^2); e^2 - r^2 = delta (2e - delta)
                let num = delta * (2.0 * e - delta);
                if num <= 0.0 {
                    return 0.0;
                }
                let w_e = (c_minus_e * (self.c + e)).sqrt() / self.c;
                let w_r = (c_minus_r * (self.c + r_abs)).sqrt() / self.c;
                num / (self.nu * (w_e + w_r))
            }
            Kind::Custom { .. } => {
                if r_abs >= e {
                    return 0.0;
                }
                let tol = 2e-10 * (self.c * self.c / self.nu).max(1.0);
                let split = 0.5 * self.c;
                if e <= split {
                    return quad::adaptive_simpson(&|r| self.g_raw(r), r_abs, e, tol);
                }
                let s_floor = self.custom_tail_floor();
                let s_hi = c_minus_e.sqrt();
                if r_abs >= split {
                    // entirely inside the tail substitution region
                    let s_lo = c_minus_r.max(0.0).sqrt();
                    return quad::adaptive_simpson(
                        &|s| 2.0 * self.g_tail_integrand(s, s_floor),
                        s_hi,
                        s_lo,
                        tol,
                    );
                }
                let head = quad::adaptive_simpson(&|r| self.g_raw(r), r_abs, split, 0.5 * tol);
                let s_lo = (self.c - split).sqrt();
                let tail = quad::adaptive_simpson(
                    &|s| 2.0 * self.g_tail_integrand(s, s_floor),
                    s_hi,
                    s_lo,
                    0.5 * tol,
                );
                head + tail
            }
        }
    }

    // ---- checked evaluators ----

    /// The flux value; odd, strictly increasing, `|phi| < c`.
    pub fn phi(&self, y: f64) -> Result<f64> {
        if !y.is_finite() {
            return Err(CoreError::Domain(format!("phi argument must be finite, got {y}")));
        }
        Ok(self.phi_raw(y))
    }

    /// The flux derivative; strictly positive, decaying like `y^-(alpha+1)`.
    pub fn phi_prime(&self, y: f64) -> Result<f64> {
        if !y.is_finite() {
            return Err(CoreError::Domain(format!("phi_prime argument must be finite, got {y}")));
        }
        Ok(self.dphi_raw(y))
    }

    /// The flux inverse. Refuses `|r| >= c`; clamping is a caller policy so
    /// that every clamp site in the solver is explicit and auditable.
    pub fn g(&self, r: f64) -> Result<f64> {
        if !r.is_finite() || r.abs() >= self.c {
            return Err(CoreError::Saturation { r, c: self.c });
        }
        Ok(self.g_raw(r))
    }

    /// The primitive `G(u) = int_0^u g`; even, nondecreasing on `[0, c]`,
    /// finite at `u = +/-c`.
    pub fn g_primitive(&self, u: f64) -> Result<f64> {
        if !u.is_finite() || u.abs() > self.c {
            return Err(CoreError::Domain(format!(
                "G argument must satisfy |u| <= c = {}, got {u}",
                self.c
            )));
        }
        Ok(self.g_primitive_raw(u))
    }

    /// `G` by adaptive quadrature regardless of family; the cross-check path
    /// for the closed-form primitive.
    pub fn g_primitive_by_quadrature(&self, u: f64) -> Result<f64> {
        if !u.is_finite() || u.abs() > self.c {
            return Err(CoreError::Domain(format!(
                "G argument must satisfy |u| <= c = {}, got {u}",
                self.c
            )));
        }
        Ok(self.g_primitive_quadrature_unchecked(u.abs()))
    }

    /// Numerical audit of the structural hypotheses: oddness, strict
    /// monotonicity, saturation at `c` with the stored tail constant, tail
    /// exponent of the derivative, and the `g(phi(y)) = y` round trip.
    ///
    /// Failures are report entries, never errors. Degenerate arguments are
    /// clamped (`n_samples` to at least 16; `y_max` to 1e3 unless finite and
    /// greater than 1, since the tail fit needs an asymptotic range).
    pub fn validate_hypotheses(&self, n_samples: usize, y_max: f64) -> HypothesisReport {
        let n = n_samples.max(16);
        let y_max = if y_max.is_finite() && y_max > 1.0 { y_max } else { 1e3 };
        let y_min = 1e-6 * y_max.min(1.0);
        let logs = |k: usize, lo: f64, hi: f64| {
            lo * (hi / lo).powf(k as f64 / (n - 1) as f64)
        };

        // oddness and round trip on a symmetric log grid
        let mut odd_res: f64 = 0.0;
        let mut rt_res: f64 = 0.0;
        for k in 0..n {
            let y = logs(k, y_min, y_max);
            let (p, q) = (self.phi_raw(y), self.phi_raw(-y));
            odd_res = odd_res.max((p + q).abs() / p.abs().max(1.0));
            for s in [y, -y] {
                if s.abs() <= 1e3 {
                    let ps = self.phi_raw(s);
                    if ps.abs() < self.c * (1.0 - 1e-6) {
                        rt_res = rt_res.max((self.g_raw(ps) - s).abs() / s.abs().max(1.0));
                    }
                }
            }
        }

        // strict monotonicity over the merged sample set
        let mut samples: Vec<f64> = (0..n).map(|k| logs(k, y_min, y_max)).collect();
        let negs: Vec<f64> = samples.iter().map(|y| -y).collect();
        samples.extend(negs);
        samples.push(0.0);
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let monotone_ok = samples.windows(2).all(|w| self.phi_raw(w[0]) < self.phi_raw(w[1]));

        // saturation: bounded by c and minorized by c - k_tail/y on [1, y_max]
        let mut margin = f64::INFINITY;
        let mut bounded = true;
        for k in 0..n {
            let y = logs(k, 1.0, y_max);
            margin = margin.min(self.phi_raw(y) - (self.c - self.k_tail / y));
            bounded &= self.phi_raw(y).abs() <= self.c * (1.0 + 1e-9);
            bounded &= self.phi_raw(-y).abs() <= self.c * (1.0 + 1e-9);
        }
        let saturation_ok = bounded && margin >= -1e-12 * self.c;

        // tail exponent: least-squares slope of log phi' vs log y
        let fit_lo = (y_max / 100.0).max(10.0).min(y_max / 2.0);
        let mut sx = 0.0;
        let mut sy = 0.0;
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        let mut cnt = 0.0;
        for k in 0..n {
            let y = logs(k, fit_lo, y_max);
            let d = self.dphi_raw(y);
            if d > 0.0 && d.is_finite() {
                let (lx, ly) = (y.ln(), d.ln());
                sx += lx;
                sy += ly;
                sxx += lx * lx;
                sxy += lx * ly;
                cnt += 1.0;
            }
        }
        let slope = if cnt >= 2.0 { (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx) } else { f64::NAN };
        let fitted_alpha = -slope - 1.0;
        let tail_ok = fitted_alpha.is_finite() && (fitted_alpha - self.alpha).abs() <= 0.2;

        HypothesisReport {
            oddness_ok: odd_res <= 1e-12,
            oddness_residual: odd_res,
            monotone_ok,
            saturation_ok,
            saturation_margin: margin,
            tail_ok,
            fitted_alpha,
            roundtrip_ok: rt_res <= 1e-8,
            roundtrip_residual: rt_res,
        }
    }
}

/// Outcome of [`FluxModel::validate_hypotheses`]: one flag per hypothesis,
/// with the measured quantity behind each flag.
#[derive(Debug, Clone)]
pub struct HypothesisReport {
    pub oddness_ok: bool,
    /// max over samples of `|phi(y) + phi(-y)| / max(1, |phi(y)|)`
    pub oddness_residual: f64,
    pub monotone_ok: bool,
    pub saturation_ok: bool,
    /// min over `y in [1, y_max]` of `phi(y) - (c - k_tail/y)`
    pub saturation_margin: f64,
    pub tail_ok: bool,
    /// exponent recovered from the decay of `phi'`
    pub fitted_alpha: f64,
    pub roundtrip_ok: bool,
    pub roundtrip_residual: f64,
}

impl HypothesisReport {
    pub fn pass(&self) -> bool {
        self.oddness_ok && self.monotone_ok && self.saturation_ok && self.tail_ok && self.roundtrip_ok
    }

    /// Human-readable one-line-per-check summary.
    pub fn lines(&self) -> Vec<String> {
        vec![
            format!("oddness: {} (residual {:.3e})", flag(self.oddness_ok), self.oddness_residual),
            format!("monotonicity: {}", flag(self.monotone_ok)),
            format!("saturation: {} (margin {:.3e})", flag(self.saturation_ok), self.saturation_margin),
            format!("tail exponent: {} (fitted {:.3})", flag(self.tail_ok), self.fitted_alpha),
            format!("inverse round trip: {} (residual {:.3e})", flag(self.roundtrip_ok), self.roundtrip_residual),
        ]
    }
}

fn flag(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}
