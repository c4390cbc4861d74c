//! Regularized incomplete beta function.

use crate::special::gamma_fn::log_gamma_unchecked;

const BETA_EPS: f64 = 3e-16;
const BETA_MAX_ITER: usize = 600;

pub(crate) fn log_beta(a: f64, b: f64) -> f64 {
    log_gamma_unchecked(a) + log_gamma_unchecked(b) - log_gamma_unchecked(a + b)
}

/// Regularized incomplete beta I_x(a, b).
///
/// Continued fraction (modified Lentz), applied on the side of the
/// a/(a+b) split where it converges fast; the other side goes through the
/// symmetry I_x(a,b) = 1 - I_{1-x}(b,a).
pub(crate) fn reg_inc_beta(a: f64, b: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0);
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_bt = a * x.ln() + b * (1.0 - x).ln() - log_beta(a, b);
    if x < a / (a + b) {
        (ln_bt.exp() * beta_cf(a, b, x) / a).clamp(0.0, 1.0)
    } else {
        (1.0 - ln_bt.exp() * beta_cf(b, a, 1.0 - x) / b).clamp(0.0, 1.0)
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const FPMIN: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=BETA_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() <= BETA_EPS {
            break;
        }
    }
    h
}
