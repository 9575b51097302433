//! The left eigenfunction `g_λ` of the killed walk: closed form, pole series,
//! integral-equation residuals and the reflected right eigenfunction.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::dd::{self, Dd};
use super::{tau_roots, SpectralError};
use crate::quad::{integrate, integrate_split_integers};

/// Default number of conjugate root pairs kept in the pole series.
pub const DEFAULT_SERIES_ORDER: usize = 50;
/// Relative error above which the closed form raises its cancellation alarm.
pub const CANCELLATION_ALARM: f64 = 1e-8;
/// Below this abscissa the closed form is always used.
pub const CLOSED_FORM_MAX_X: f64 = 12.0;

const QUAD_REL_TOL: f64 = 1e-13;

/// Closed form together with a bound on its rounding error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedValue {
    pub value: f64,
    pub error_bound: f64,
}

/// `g_λ(x) = e^x Σ_{k<⌈x⌉} (x−k)^k / ((−λe)^k k!)`, accumulated in
/// double-double arithmetic.
pub fn g_closed_with_error(lambda: f64, x: f64) -> Result<ClosedValue, SpectralError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(SpectralError::Domain("g needs lambda > 0"));
    }
    if !(x >= 0.0 && x.is_finite()) {
        return Err(SpectralError::Domain("g needs x >= 0"));
    }
    let terms = (x.ceil() as u32).max(1);
    let mu = (dd::E * lambda).recip();
    let mut sum = Dd::ZERO;
    let mut abs_sum = 0.0f64;
    let mut inv_fact = Dd::ONE;
    for k in 0..terms {
        if k > 0 {
            inv_fact = inv_fact.div_f64(k as f64);
        }
        // x - k is exact in binary floating point for 0 <= k <= x.
        let base = mu * (x - k as f64);
        let mut t = base.powi(k) * inv_fact;
        if k % 2 == 1 {
            t = -t;
        }
        abs_sum += t.hi.abs();
        sum = sum + t;
    }
    let ex = x.exp();
    let s = sum.to_f64();
    // Each term carries a few units of 2^-104 per multiplication.
    let rounding = abs_sum * (8.0 + 4.0 * terms as f64) * 2f64.powi(-104);
    let value = ex * s;
    Ok(ClosedValue { value, error_bound: ex * rounding + 2.0 * f64::EPSILON * value.abs() })
}

/// Closed form; errors with [`SpectralError::Cancellation`] when the rounding
/// bound exceeds [`CANCELLATION_ALARM`] relative to the result.
pub fn g_closed(lambda: f64, x: f64) -> Result<f64, SpectralError> {
    let c = g_closed_with_error(lambda, x)?;
    if c.error_bound > CANCELLATION_ALARM * c.value.abs() {
        return Err(SpectralError::Cancellation { value: c.value, error_bound: c.error_bound });
    }
    Ok(c.value)
}

/// Truncated pole series with a rigorous bound on the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub tail_bound: f64,
}

/// Leading term plus `2 Σ_{k=1..K} Re(e^{s_k x}/s_k)` over the roots of τ.
pub fn g_series(lambda: f64, x: f64, order: usize) -> Result<SeriesValue, SpectralError> {
    check_series_args(lambda, x, order)?;
    let roots = tau_roots(lambda, order)?;
    Ok(series_from_roots(lambda, &roots, x))
}

fn check_series_args(lambda: f64, x: f64, order: usize) -> Result<(), SpectralError> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(SpectralError::Domain("pole series needs lambda in (0, 1]"));
    }
    if !(x > 0.0 && x.is_finite()) {
        return Err(SpectralError::Domain("pole series needs x > 0"));
    }
    if order < 1 {
        return Err(SpectralError::Domain("pole series needs K >= 1"));
    }
    Ok(())
}

/// `roots[k]` is `s_k` for `k = 0..=K`.
pub(crate) fn series_from_roots(lambda: f64, roots: &[Complex64], x: f64) -> SeriesValue {
    let order = roots.len() - 1;
    let lead = if lambda == 1.0 {
        2.0 * (x + 1.0 / 3.0)
    } else {
        2.0 * ((roots[0] * x).exp() / roots[0]).re
    };
    let mut tail: Vec<f64> = roots[1..].iter().map(|&s| 2.0 * ((s * x).exp() / s).re).collect();
    // Smallest terms first.
    tail.reverse();
    let value = lead + crate::sum::compensated_sum(tail);
    SeriesValue { value, tail_bound: series_tail_bound(lambda, x, order) }
}

/// Bound on `|2 Σ_{k>K} Re(e^{s_k x}/s_k)|`.
///
/// From `w e^w = -1/(eλ)`: `e^{Re s_k} = 1/(λ|w_k|)` with `|w_k|, |s_k| ≥ 2kπ`,
/// so each term is at most `(2πλk)^{-x}/(2πk)`; summing the tail against an
/// integral gives `(2πλ)^{-x} K^{-x} / (π x)`.
pub fn series_tail_bound(lambda: f64, x: f64, order: usize) -> f64 {
    (2.0 * PI * lambda).powf(-x) * (order as f64).powf(-x) / (PI * x)
}

/// `g_λ(x)` by the cheapest accurate route: closed form up to x = 12 or
/// while its cancellation alarm stays silent, pole series beyond.
pub fn g_eval(lambda: f64, x: f64) -> Result<f64, SpectralError> {
    let c = g_closed_with_error(lambda, x)?;
    if x <= CLOSED_FORM_MAX_X || c.error_bound <= CANCELLATION_ALARM * c.value.abs() {
        return Ok(c.value);
    }
    Ok(g_series(lambda, x, DEFAULT_SERIES_ORDER)?.value)
}

/// A dense evaluator of `g_λ` on `[0, H]` for quadrature.
pub(crate) struct GEvaluator {
    lambda: f64,
    roots: Option<Vec<Complex64>>,
}

impl GEvaluator {
    pub(crate) fn new(lambda: f64) -> Result<Self, SpectralError> {
        let roots = if lambda <= 1.0 { Some(tau_roots(lambda, DEFAULT_SERIES_ORDER)?) } else { None };
        Ok(Self { lambda, roots })
    }

    pub(crate) fn eval(&self, x: f64) -> f64 {
        match g_closed_with_error(self.lambda, x) {
            Ok(c) if x <= CLOSED_FORM_MAX_X || c.error_bound <= CANCELLATION_ALARM * c.value.abs() => c.value,
            Ok(c) => match &self.roots {
                Some(r) => series_from_roots(self.lambda, r, x).value,
                None => c.value,
            },
            Err(_) => f64::NAN,
        }
    }
}

/// Normalized residual of the left eigen-equation
/// `λ g(x) = e^{x-1} ∫_0^H 1{u ≥ x-1} g(u) e^{-u} du` on an even grid of
/// `quad_points` abscissae in `[0, H]`.
pub fn eigen_residual(lambda: f64, h: f64, quad_points: usize) -> Result<f64, SpectralError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(SpectralError::Domain("eigen residual needs H > 0"));
    }
    let points = quad_points.max(2);
    let g = GEvaluator::new(lambda)?;
    let grid: Vec<f64> = (0..points).map(|i| h * i as f64 / (points - 1) as f64).collect();
    let gs: Vec<f64> = grid.iter().map(|&x| g.eval(x)).collect();
    let scale = gs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(SpectralError::Domain("eigenfunction vanishes or is not finite on [0, H]"));
    }
    let integrand = |u: f64| g.eval(u) * (-u).exp();

    // Panel integrals over [j, min(j+1, H)], and the cumulative tail sums.
    let panels = h.ceil() as usize;
    let mut panel = Vec::with_capacity(panels);
    for j in 0..panels {
        let (lo, hi) = (j as f64, ((j + 1) as f64).min(h));
        let tol = 1e-15 * scale * (-lo).exp();
        panel.push(integrate(integrand, lo, hi, tol, QUAD_REL_TOL)?);
    }
    let mut tail_from = alloc::vec![0.0; panels + 1];
    for j in (0..panels).rev() {
        tail_from[j] = tail_from[j + 1] + panel[j];
    }

    let mut worst = 0.0f64;
    for (&x, &gx) in grid.iter().zip(&gs) {
        let a = (x - 1.0).max(0.0);
        let next = a.ceil().min(h);
        let head = if next > a {
            integrate(integrand, a, next, 1e-15 * scale * (-a).exp(), QUAD_REL_TOL)?
        } else {
            0.0
        };
        let whole = head + tail_from[(next as usize).min(panels)];
        let rhs = (x - 1.0).exp() * whole;
        worst = worst.max((lambda * gx - rhs).abs());
    }
    Ok(worst / scale)
}

/// The reflection `x ↦ g_λ(H − x)`, a right eigenfunction of the killed
/// one-minus-exp walk for an eigenpair `(λ, H)`.
pub struct RightEigenfunction {
    pub lambda: f64,
    pub h: f64,
    g: GEvaluator,
}

impl core::fmt::Debug for RightEigenfunction {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("RightEigenfunction").field("lambda", &self.lambda).field("h", &self.h).finish()
    }
}

pub fn right_eigenfunction(lambda: f64, h: f64) -> Result<RightEigenfunction, SpectralError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(SpectralError::Domain("right eigenfunction needs H > 0"));
    }
    Ok(RightEigenfunction { lambda, h, g: GEvaluator::new(lambda)? })
}

impl RightEigenfunction {
    pub fn eval(&self, x: f64) -> f64 {
        self.g.eval(self.h - x)
    }

    /// Integrate `f` over `[a, b]`, breaking where `H − y` is an integer.
    fn integrate_reflected(&self, f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64, SpectralError> {
        let mut total = 0.0;
        let mut lo = a;
        while lo < b {
            let hi = (self.h - ((self.h - lo).ceil() - 1.0)).min(b);
            total += integrate(&f, lo, hi, tol, QUAD_REL_TOL)?;
            lo = hi;
        }
        Ok(total)
    }

    /// Normalized residual of `λ f(x) = e^{-x-1} ∫_0^{min(H, x+1)} f(y) e^y dy`
    /// on an even grid of `quad_points` abscissae in `[0, H]`.
    pub fn residual(&self, quad_points: usize) -> Result<f64, SpectralError> {
        let points = quad_points.max(2);
        let h = self.h;
        let grid: Vec<f64> = (0..points).map(|i| h * i as f64 / (points - 1) as f64).collect();
        let fs: Vec<f64> = grid.iter().map(|&x| self.eval(x)).collect();
        let scale = fs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut worst = 0.0f64;
        for (&x, &fx) in grid.iter().zip(&fs) {
            let top = (x + 1.0).min(h);
            let tol = 1e-15 * scale * (x + 1.0).exp();
            let integral = self.integrate_reflected(|y| self.eval(y) * y.exp(), 0.0, top, tol)?;
            let rhs = (-x - 1.0).exp() * integral;
            worst = worst.max((self.lambda * fx - rhs).abs());
        }
        Ok(worst / scale)
    }
}

/// `∫_0^H g_{λ1}(x) g_{λ2}(H − x) dx` divided by the two L² norms.
pub fn normalized_pairing(lambda1: f64, lambda2: f64, h: f64) -> Result<f64, SpectralError> {
    let g1 = GEvaluator::new(lambda1)?;
    let f2 = right_eigenfunction(lambda2, h)?;
    let n1 = integrate_split_integers(|x| g1.eval(x).powi(2), 0.0, h, 0.0, QUAD_REL_TOL)?;
    let n2 = integrate_split_integers(|x| f2.g.eval(x).powi(2), 0.0, h, 0.0, QUAD_REL_TOL)?;
    let norm = (n1 * n2).sqrt();
    let cross =
        integrate_split_integers(|x| g1.eval(x) * f2.eval(x), 0.0, h, 1e-13 * norm, QUAD_REL_TOL)?;
    Ok(cross / norm)
}
