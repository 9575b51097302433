//! Lambert W on all branches, and the tree function.
//!
//! Branch cuts follow the usual convention: each branch is closed in the
//! direction of increasing imaginary part of `w`. A point on the negative real
//! axis with a zero imaginary part (of either sign) is treated as approached
//! from above.

use core::f64::consts::{E, PI};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::SpectralError;

pub const MAX_HALLEY_ITERATIONS: usize = 100;

/// `|2(ez + 1)|` below which the branch-point series is used as a seed.
const BRANCH_SEED_RADIUS: f64 = 0.6;
/// `|z|` below which the Taylor series at 0 seeds the principal branch.
const ORIGIN_SEED_RADIUS: f64 = 0.3;

/// Branch `k` of Lambert W at `z`.
pub fn lambert_w(k: i32, z: Complex64) -> Result<Complex64, SpectralError> {
    let z = upper_side(z);
    lambert_w_impl(k, z, Complex64::new(E, 0.0) * z + 1.0)
}

/// Same as [`lambert_w`] with `1 + e z` supplied by the caller, who may know
/// it to full relative precision when `z` is close to `-1/e`.
pub(crate) fn lambert_w_impl(k: i32, z: Complex64, one_plus_ez: Complex64) -> Result<Complex64, SpectralError> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(SpectralError::Domain("Lambert W argument must be finite"));
    }
    if z == Complex64::new(0.0, 0.0) {
        return if k == 0 {
            Ok(z)
        } else {
            Err(SpectralError::Domain("Lambert W branches k != 0 are singular at 0"))
        };
    }
    if (k == 0 || k == -1) && one_plus_ez.norm() <= 4.0 * f64::EPSILON {
        return Ok(Complex64::new(-1.0, 0.0));
    }
    let w0 = seed(k, z, one_plus_ez);
    if on_real_branch(k, z) {
        // Real iterates stay real, so the result has an exact zero imaginary part.
        return halley(z, Complex64::new(w0.re, 0.0));
    }
    let first = halley(z, w0);
    // On the real axis the result sits on a branch boundary, where rounding
    // decides the side; the seeds there are reliable.
    if z.im == 0.0 || matches!(first, Ok(w) if branch_of(w) == k) {
        return first;
    }
    // Off the axis Halley can settle on a neighbouring branch from a poor seed.
    let l = z.ln() + Complex64::new(0.0, 2.0 * PI * k as f64);
    let p = (one_plus_ez * 2.0).sqrt();
    let alternatives = [asymptotic(l), l, branch_point_series(p), branch_point_series(-p)];
    for w0 in alternatives {
        if let Ok(w) = halley(z, w0) {
            if branch_of(w) == k {
                return Ok(w);
            }
        }
    }
    first
}

/// Index of the branch of Lambert W whose range contains `w`. The boundaries
/// are the curves `ξ = −η cot η` for `w = ξ + iη`; a boundary point belongs to
/// the branch below it in `η`.
pub fn branch_of(w: Complex64) -> i32 {
    let (xi, eta) = (w.re, w.im);
    if eta == 0.0 {
        return if xi >= -1.0 { 0 } else { -1 };
    }
    // Conjugation maps branch `b` to `-b` and flips which side owns a boundary.
    let (eta, sign) = if eta < 0.0 { (-eta, -1) } else { (eta, 1) };
    let m = (eta / (2.0 * PI)).floor();
    let curved = eta - 2.0 * PI * m < PI;
    let m = m as i32;
    let curve = -eta / eta.tan();
    let inside = if sign > 0 { xi >= curve } else { xi > curve };
    sign * if curved && inside { m } else { m + 1 }
}

/// `[2/2]` Padé approximant of `W(z)/z` at the origin, away from its poles.
fn pade_seed(z: Complex64) -> Option<Complex64> {
    let den = 1.0 + z * (2.9 + z * (101.0 / 60.0));
    // A real seed left of the branch point never leaves the real line.
    if z.norm() > 2.0 || den.norm() < 0.5 || (z.im == 0.0 && z.re < -1.0 / E) {
        return None;
    }
    Some(z * (1.0 + z * (1.9 + z * (17.0 / 60.0))) / den)
}

/// Whether branch `k` is real-valued at `z`.
fn on_real_branch(k: i32, z: Complex64) -> bool {
    z.im == 0.0 && z.re >= -1.0 / E && (k == 0 || (k == -1 && z.re < 0.0))
}

fn upper_side(z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        Complex64::new(z.re, 0.0)
    } else {
        z
    }
}

fn seed(k: i32, z: Complex64, one_plus_ez: Complex64) -> Complex64 {
    let p2 = one_plus_ez * 2.0;
    let near_branch_point = p2.norm() < BRANCH_SEED_RADIUS;
    let below_axis = z.im < 0.0;
    if k == 0 {
        if near_branch_point {
            return branch_point_series(p2.sqrt());
        }
        if z.norm() < ORIGIN_SEED_RADIUS {
            return z * (1.0 - z * (1.0 - z * (1.5 - z * (8.0 / 3.0 - z * (125.0 / 24.0)))));
        }
        if let Some(w) = pade_seed(z) {
            return w;
        }
        return asymptotic(z.ln());
    }
    if near_branch_point && ((k == -1 && !below_axis) || (k == 1 && below_axis)) {
        return branch_point_series(-p2.sqrt());
    }
    if k == -1 && z.im == 0.0 && z.re < 0.0 && z.re > -1.0 / E {
        // Real lower branch on (-1/e, 0).
        let l1 = (-z.re).ln();
        let l2 = (-l1).ln();
        return Complex64::new(l1 - l2 + l2 / l1, 0.0);
    }
    asymptotic(z.ln() + Complex64::new(0.0, 2.0 * PI * k as f64))
}

/// Series of W about the branch point in `p = ±sqrt(2(ez + 1))`.
fn branch_point_series(p: Complex64) -> Complex64 {
    const C: [f64; 7] = [
        -1.0,
        1.0,
        -1.0 / 3.0,
        11.0 / 72.0,
        -43.0 / 540.0,
        769.0 / 17280.0,
        -221.0 / 8505.0,
    ];
    let mut acc = Complex64::new(C[6], 0.0);
    for &c in C[..6].iter().rev() {
        acc = acc * p + c;
    }
    acc
}

fn asymptotic(l1: Complex64) -> Complex64 {
    let l2 = l1.ln();
    l1 - l2 + l2 / l1
}

fn halley(z: Complex64, mut w: Complex64) -> Result<Complex64, SpectralError> {
    let mut prev = f64::INFINITY;
    for _ in 0..MAX_HALLEY_ITERATIONS {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (wp1 * 2.0);
        let dw = f / denom;
        if !(dw.re.is_finite() && dw.im.is_finite()) {
            break;
        }
        w -= dw;
        let step = dw.norm();
        let scale = 1.0 + w.norm();
        // Near the branch point rounding noise can keep the step just above
        // machine precision; stop once it no longer shrinks.
        if step <= 4.0 * f64::EPSILON * scale || (step <= 1e-9 * scale && step >= 0.5 * prev) {
            return Ok(w);
        }
        prev = step;
    }
    Err(SpectralError::NoConvergence { iterations: MAX_HALLEY_ITERATIONS })
}

/// Tree function `T(z) = -W_0(-z)`, the solution of `T = z e^T` analytic at 0.
pub fn tree_function(z: Complex64) -> Result<Complex64, SpectralError> {
    if z.norm() > (1.0 / E) * (1.0 + 1e-12) {
        return Err(SpectralError::Domain("tree function needs |z| <= 1/e"));
    }
    let mz = upper_side(-z);
    Ok(-lambert_w_impl(0, mz, Complex64::new(1.0, 0.0) - z * E)?)
}
