//! Spectral numerics of the exp-minus-one walk killed outside an interval.
//!
//! For an interval of height `H` the principal eigenvalue `λ` is the largest
//! root of `λ ↦ g_λ(H + 1)`, where `g_λ` is the left eigenfunction. The
//! eigenfunction has a closed form and a series over the roots
//! `s_k = 1 + W_k(−1/(eλ))` of `τ(s) = 1/λ − e^s + s e^s`.

mod dd;
mod eigenfunction;
mod lambert;

use alloc::vec::Vec;
use core::f64::consts::{E, PI};
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::quad::QuadError;

pub use eigenfunction::{
    eigen_residual, g_closed, g_closed_with_error, g_eval, g_series, normalized_pairing, right_eigenfunction,
    series_tail_bound, ClosedValue, RightEigenfunction, SeriesValue, CANCELLATION_ALARM, CLOSED_FORM_MAX_X,
    DEFAULT_SERIES_ORDER,
};
pub use lambert::{branch_of, lambert_w, tree_function};

/// Bracket tolerance of the root finders.
pub const ROOT_TOL: f64 = 1e-13;
/// Largest root residual `|τ(s_k)|` accepted in a [`SpectralSolution`].
pub const TAU_RESIDUAL_MAX: f64 = 1e-10;
/// Below this abscissa `g_λ` must not vanish; checked numerically.
pub const ZERO_FREE_PREFIX: f64 = 3.0;
/// Largest `δ` accepted by [`height_for_delta`].
pub const MAX_DELTA: f64 = 0.05;
/// Round-trip tolerance between [`height_for_delta`] and [`principal_lambda`].
pub const ROUND_TRIP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum SpectralError {
    Domain(&'static str),
    NoConvergence { iterations: usize },
    /// The closed form lost too many digits; use the pole series.
    Cancellation { value: f64, error_bound: f64 },
    NoSignChange { what: &'static str },
    Quadrature(QuadError),
    /// A computed quantity failed one of its own consistency checks.
    Inconsistent { what: &'static str, value: f64 },
}

impl fmt::Display for SpectralError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Domain(msg) => write!(f, "domain error: {msg}"),
            Self::NoConvergence { iterations } => write!(f, "no convergence after {iterations} iterations"),
            Self::Cancellation { value, error_bound } => {
                write!(f, "closed form cancelled: value {value:e} with error bound {error_bound:e}")
            }
            Self::NoSignChange { what } => write!(f, "no sign change found while bracketing {what}"),
            Self::Quadrature(e) => write!(f, "{e}"),
            Self::Inconsistent { what, value } => write!(f, "consistency check failed: {what} ({value:e})"),
        }
    }
}

impl core::error::Error for SpectralError {}

impl From<QuadError> for SpectralError {
    fn from(e: QuadError) -> Self {
        Self::Quadrature(e)
    }
}

/// `τ(s) = 1/λ − e^s + s e^s`.
pub fn tau(lambda: f64, s: Complex64) -> Complex64 {
    (s - 1.0) * s.exp() + 1.0 / lambda
}

/// Roots `s_0, …, s_K` of τ in the upper half plane, `s_k = 1 + W_k(−1/(eλ))`.
/// The remaining roots are their conjugates, `s_{−k−1} = conj(s_k)`.
pub fn tau_roots(lambda: f64, order: usize) -> Result<Vec<Complex64>, SpectralError> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(SpectralError::Domain("tau roots need lambda in (0, 1]"));
    }
    let z = Complex64::new(-1.0 / (E * lambda), 0.0);
    // 1 + e z = 1 − 1/λ, exact enough to resolve the branch point.
    let one_plus_ez = Complex64::new(1.0 - 1.0 / lambda, 0.0);
    let mut roots = Vec::with_capacity(order + 1);
    for k in 0..=order {
        if k == 0 && lambda == 1.0 {
            roots.push(Complex64::new(0.0, 0.0));
            continue;
        }
        let w = lambert::lambert_w_impl(k as i32, z, one_plus_ez)?;
        roots.push(polish_root(lambda, w + 1.0));
    }
    Ok(roots)
}

/// A few Newton steps on τ itself, kept only while they help.
fn polish_root(lambda: f64, mut s: Complex64) -> Complex64 {
    for _ in 0..3 {
        let r = tau(lambda, s);
        let d = s * s.exp();
        if d.norm() == 0.0 {
            break;
        }
        let next = s - r / d;
        if tau(lambda, next).norm() < r.norm() {
            s = next;
        } else {
            break;
        }
    }
    s
}

/// Principal eigenvalue of a height together with the pole set of `g_λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSolution {
    pub lambda: f64,
    /// `−ln λ`.
    pub delta: f64,
    /// `roots[k] = s_k` for `k = 0..=K`.
    pub roots: Vec<Complex64>,
    pub h: Option<f64>,
}

impl SpectralSolution {
    pub fn new(lambda: f64, order: usize, h: Option<f64>) -> Result<Self, SpectralError> {
        let roots = tau_roots(lambda, order)?;
        let sol = Self { lambda, delta: -lambda.ln(), roots, h };
        let worst = sol.max_tau_residual();
        if !(worst <= TAU_RESIDUAL_MAX) {
            return Err(SpectralError::Inconsistent { what: "tau residual at a stored root", value: worst });
        }
        Ok(sol)
    }

    /// Truncation order `K`.
    pub fn order(&self) -> usize {
        self.roots.len() - 1
    }

    /// `s_k` for any `|k| ≤ K` (negative indices by conjugation).
    pub fn root(&self, k: i64) -> Option<Complex64> {
        if k >= 0 {
            self.roots.get(k as usize).copied()
        } else {
            self.roots.get((-k - 1) as usize).map(|s| s.conj())
        }
    }

    pub fn max_tau_residual(&self) -> f64 {
        self.roots.iter().map(|&s| tau(self.lambda, s).norm()).fold(0.0, f64::max)
    }

    /// `g_λ(x)` from the stored roots.
    pub fn g_series(&self, x: f64) -> SeriesValue {
        eigenfunction::series_from_roots(self.lambda, &self.roots, x)
    }
}

/// Brent's method on a bracketing interval `[a, b]`.
pub(crate) fn brent<F>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64, SpectralError>
where
    F: FnMut(f64) -> Result<f64, SpectralError>,
{
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(SpectralError::NoSignChange { what: "brent bracket" });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
    }
    Err(SpectralError::NoConvergence { iterations: 200 })
}

/// Principal eigenvalue for interval height `h`.
///
/// `λ = H/e` for `H ≤ 1`. Otherwise the largest root of `λ ↦ g_λ(H + 1)` in
/// `(0, 1)`, bracketed by a descending scan from 1 and refined by Brent.
pub fn principal_lambda(h: f64) -> Result<SpectralSolution, SpectralError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(SpectralError::Domain("principal eigenvalue needs H > 0"));
    }
    if h <= 1.0 {
        return SpectralSolution::new(h / E, DEFAULT_SERIES_ORDER, Some(h));
    }
    let x = h + 1.0;
    let step = scan_step(h);
    let f = |lambda: f64| g_eval(lambda, x);
    let mut hi = 1.0;
    let mut f_hi = f(hi)?;
    loop {
        let lo = hi - step;
        if lo <= 0.0 {
            return Err(SpectralError::NoSignChange { what: "principal eigenvalue" });
        }
        let f_lo = f(lo)?;
        if f_lo == 0.0 || f_lo.signum() != f_hi.signum() {
            let lambda = brent(f, lo, hi, ROOT_TOL)?;
            return SpectralSolution::new(lambda, DEFAULT_SERIES_ORDER, Some(h));
        }
        hi = lo;
        f_hi = f_lo;
    }
}

/// Scan step for bracketing eigenvalues: `1/(4⌈H⌉)`, shrunk for tall
/// intervals so that the two largest roots, which crowd towards 1 like
/// `π²/(2H²)`, can never share one step.
fn scan_step(h: f64) -> f64 {
    let coarse = 1.0 / (4.0 * h.ceil());
    let gap = PI * PI / (4.0 * (h + 4.0 / 3.0).powi(2));
    coarse.min(gap)
}

/// Interval height whose principal eigenvalue is `e^{−δ}`.
///
/// Finds the smallest zero `x★ > 3` of `g_{e^{−δ}}`, checks `g` has no sign
/// change on `[0, 3]`, returns `x★ − 1`, and verifies the round trip
/// through [`principal_lambda`].
pub fn height_for_delta(delta: f64) -> Result<f64, SpectralError> {
    if !(delta > 0.0 && delta <= MAX_DELTA) {
        return Err(SpectralError::Domain("height_for_delta needs 0 < delta <= 0.05"));
    }
    let lambda = (-delta).exp();
    let g = |x: f64| g_eval(lambda, x);
    let mut x = 0.0;
    while x < ZERO_FREE_PREFIX {
        if g(x)? <= 0.0 {
            return Err(SpectralError::Inconsistent { what: "g vanishes below the zero-free prefix", value: x });
        }
        x += 1.0 / 32.0;
    }
    let step = 0.25;
    let mut lo = ZERO_FREE_PREFIX;
    let mut g_lo = g(lo)?;
    let root = loop {
        let hi = lo + step;
        let g_hi = g(hi)?;
        if g_hi.signum() != g_lo.signum() || g_hi == 0.0 {
            break brent(g, lo, hi, ROOT_TOL)?;
        }
        if hi > 10.0 / delta.sqrt() {
            return Err(SpectralError::NoSignChange { what: "first zero of g" });
        }
        lo = hi;
        g_lo = g_hi;
    };
    let h = root - 1.0;
    let back = principal_lambda(h)?;
    if (back.lambda - lambda).abs() > ROUND_TRIP_TOL {
        return Err(SpectralError::Inconsistent { what: "round trip through principal_lambda", value: back.lambda });
    }
    Ok(h)
}

/// The two critical levels of an `n`-vertex instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalLevels {
    /// `1/(e λ_{ln n})` from the spectral solution.
    pub c_circ: f64,
    /// `(1 + π²/(2 ln² n))/e`, the asymptotic closed form.
    pub c_star: f64,
}

pub fn c_critical(n: u64) -> Result<CriticalLevels, SpectralError> {
    if n < 8 {
        return Err(SpectralError::Domain("critical levels need n >= 8"));
    }
    let a = (n as f64).ln();
    let lambda = principal_lambda(a)?.lambda;
    Ok(CriticalLevels { c_circ: 1.0 / (E * lambda), c_star: (1.0 + PI * PI / (2.0 * a * a)) / E })
}

/// All eigenvalues `λ ∈ (λ_min, 1]` for height `h`, descending.
///
/// Scans the same grid as [`principal_lambda`] all the way down.
pub fn eigenvalues(h: f64, lambda_min: f64) -> Result<Vec<f64>, SpectralError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(SpectralError::Domain("eigenvalues need H > 0"));
    }
    if h <= 1.0 {
        return Ok(alloc::vec![h / E]);
    }
    let x = h + 1.0;
    let f = |lambda: f64| g_eval(lambda, x);
    let step = scan_step(h).min(1.0 / 512.0);
    let mut out = Vec::new();
    let mut hi = 1.0;
    let mut f_hi = f(hi)?;
    while hi - step > lambda_min.max(0.0) {
        let lo = hi - step;
        let f_lo = f(lo)?;
        if f_lo.signum() != f_hi.signum() {
            out.push(brent(f, lo, hi, ROOT_TOL)?);
        }
        hi = lo;
        f_hi = f_lo;
    }
    Ok(out)
}

/// Principal and subleading eigenvalues along a grid of heights.
pub fn eigenvalue_curve(h_min: f64, h_max: f64, step: f64, lambda_min: f64) -> Result<Vec<(f64, Vec<f64>)>, SpectralError> {
    if !(h_min > 0.0 && h_max >= h_min && step > 0.0) {
        return Err(SpectralError::Domain("eigenvalue curve needs 0 < Hmin <= Hmax and step > 0"));
    }
    let count = ((h_max - h_min) / step + 1e-9).floor() as usize;
    (0..=count)
        .map(|i| {
            let h = h_min + i as f64 * step;
            Ok((h, eigenvalues(h, lambda_min)?))
        })
        .collect()
}
