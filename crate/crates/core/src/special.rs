//! Log-gamma, the regularized incomplete gamma function and falling factorials.

use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::sum::NeumaierSum;

const MAX_ITER: usize = 100_000;
const EPS: f64 = 1e-16;

/// `ln Γ(x)` for `x > 0`.
///
/// Stirling's series above 15, recurrence below.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 15.0 {
        let shift = (15.0 - x).ceil();
        let mut prod_ln = NeumaierSum::new();
        let mut y = x;
        while y < x + shift {
            prod_ln.add(y.ln());
            y += 1.0;
        }
        return ln_gamma(y) - prod_ln.value();
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            - inv2
                * (1.0 / 360.0
                    - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 * (1.0 / 1188.0 - inv2 * 691.0 / 360_360.0)))));
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + series
}

/// `ln((n)_k) = ln(n (n-1) ... (n-k+1))`, summed term by term.
pub fn ln_falling_factorial(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    let mut acc = NeumaierSum::new();
    for i in 0..k {
        acc.add(((n - i) as f64).ln());
    }
    acc.value()
}

/// `ln P(a, x)` where `P` is the regularized lower incomplete gamma function.
///
/// Power series for `x < a + 1`, Lentz continued fraction for the upper
/// tail otherwise. Returns `-inf` for `x = 0`.
pub fn ln_gamma_p(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return f64::NEG_INFINITY;
    }
    if x < a + 1.0 {
        ln_series(a, x)
    } else {
        (-upper_cf(a, x)).ln_1p()
    }
}

/// Regularized lower incomplete gamma `P(a, x)`; `Gamma(a, 1)` CDF at `x`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        ln_series(a, x).exp()
    } else {
        1.0 - upper_cf(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 - P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x < a + 1.0 {
        -ln_series(a, x).exp_m1()
    } else {
        upper_cf(a, x)
    }
}

fn ln_prefactor(a: f64, x: f64) -> f64 {
    a * x.ln() - x - ln_gamma(a)
}

fn ln_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    ln_prefactor(a, x) + sum.ln()
}

fn upper_cf(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    (ln_prefactor(a, x)).exp() * h
}
