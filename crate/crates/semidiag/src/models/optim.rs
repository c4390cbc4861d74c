//! Shared numerical machinery for the fitting routines: a BFGS
//! quasi-Newton minimizer with backtracking line search, golden-section
//! search for one-dimensional profiles, and the rank gate applied to
//! every design matrix before fitting.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Outcome of a BFGS run. `converged` means the gradient sup-norm
/// dropped below the requested tolerance before the iteration cap.
pub(crate) struct BfgsOutcome {
    pub x: DVector<f64>,
    pub value: f64,
    pub grad_sup: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `f` from `x0`. The objective returns `None` at points where
/// the function or gradient is not finite; the line search treats those
/// as overshoots and backtracks.
pub(crate) fn bfgs_minimize<F>(
    f: F,
    x0: DVector<f64>,
    grad_tol: f64,
    max_iter: usize,
) -> BfgsOutcome
where
    F: Fn(&DVector<f64>) -> Option<(f64, DVector<f64>)>,
{
    let dim = x0.len();
    let mut x = x0;
    let (mut fx, mut grad) = match f(&x) {
        Some(pair) => pair,
        None => {
            return BfgsOutcome {
                value: f64::INFINITY,
                grad_sup: f64::INFINITY,
                iterations: 0,
                converged: false,
                x,
            }
        }
    };
    let mut h = DMatrix::<f64>::identity(dim, dim);
    let mut iterations = 0;

    for _ in 0..max_iter {
        let grad_sup = grad.amax();
        if grad_sup <= grad_tol {
            return BfgsOutcome {
                x,
                value: fx,
                grad_sup,
                iterations,
                converged: true,
            };
        }
        iterations += 1;

        let mut dir = -(&h * &grad);
        if dir.dot(&grad) >= 0.0 {
            h = DMatrix::identity(dim, dim);
            dir = -grad.clone();
        }

        let slope = dir.dot(&grad);
        let mut step = 1.0;
        let mut accepted = None;
        while step > 1e-14 {
            let candidate = &x + &dir * step;
            if let Some((fc, gc)) = f(&candidate) {
                if fc <= fx + 1e-4 * step * slope {
                    accepted = Some((candidate, fc, gc));
                    break;
                }
            }
            step *= 0.5;
        }
        let (x_new, f_new, g_new) = match accepted {
            Some(triple) => triple,
            // A failed line search along a quasi-Newton direction usually
            // means the curvature model went stale; retry once steepest.
            None => {
                h = DMatrix::identity(dim, dim);
                let dir = -grad.clone();
                let slope = dir.dot(&grad);
                let mut step = 1.0;
                let mut found = None;
                while step > 1e-14 {
                    let candidate = &x + &dir * step;
                    if let Some((fc, gc)) = f(&candidate) {
                        if fc <= fx + 1e-4 * step * slope {
                            found = Some((candidate, fc, gc));
                            break;
                        }
                    }
                    step *= 0.5;
                }
                match found {
                    Some(triple) => triple,
                    None => break,
                }
            }
        };

        let s = &x_new - &x;
        let y = &g_new - &grad;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            // H += (sy + y'Hy)/sy^2 ss' - (Hy s' + s (Hy)')/sy
            let ss = &s * s.transpose();
            let hys = &hy * s.transpose();
            h += ss * (rho * rho * (sy + yhy)) - (&hys + hys.transpose()) * rho;
        }
        x = x_new;
        fx = f_new;
        grad = g_new;
    }

    let grad_sup = grad.amax();
    BfgsOutcome {
        converged: grad_sup <= grad_tol,
        x,
        value: fx,
        grad_sup,
        iterations,
    }
}

/// Golden-section maximization of a unimodal function on [lo, hi] until
/// the bracket is narrower than `tol`. Returns the bracket midpoint and
/// the best observed value.
pub(crate) fn golden_max<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let mut a = hi - INVPHI * (hi - lo);
    let mut b = lo + INVPHI * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    while hi - lo > tol {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INVPHI * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INVPHI * (hi - lo);
            fa = f(a);
        }
    }
    let mid = 0.5 * (lo + hi);
    let fmid = f(mid);
    if fmid >= fa && fmid >= fb {
        (mid, fmid)
    } else if fa >= fb {
        (a, fa)
    } else {
        (b, fb)
    }
}

/// Rejects rank-deficient designs: `gram` is X'X and the rank is read off
/// its eigenvalues with a relative cutoff. Pseudo-inverting an
/// unidentified design would silently produce meaningless diagnostics.
pub(crate) fn require_full_rank(gram: &DMatrix<f64>) -> Result<()> {
    let cols = gram.ncols();
    let eigenvalues = gram.clone().symmetric_eigen().eigenvalues;
    let max = eigenvalues.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
    let cutoff = max * 1e-10;
    let rank = eigenvalues.iter().filter(|&&v| v.abs() > cutoff).count();
    if rank < cols {
        return Err(Error::RankDeficient { rank, cols });
    }
    Ok(())
}

/// Numerically differentiates `grad` to form a Hessian estimate, then
/// inverts it for standard errors. Returns `None` when the Hessian is not
/// positive definite to working precision.
pub(crate) fn hessian_standard_errors<F>(grad: F, x: &DVector<f64>) -> Option<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> Option<DVector<f64>>,
{
    let dim = x.len();
    let mut hess = DMatrix::<f64>::zeros(dim, dim);
    for j in 0..dim {
        let h = 1e-5 * (1.0 + x[j].abs());
        let mut fwd = x.clone();
        fwd[j] += h;
        let mut bwd = x.clone();
        bwd[j] -= h;
        let gf = grad(&fwd)?;
        let gb = grad(&bwd)?;
        for i in 0..dim {
            hess[(i, j)] = (gf[i] - gb[i]) / (2.0 * h);
        }
    }
    // Symmetrize before inverting; finite differences are not exactly so.
    let hess = (&hess + hess.transpose()) * 0.5;
    let inv = nalgebra::Cholesky::new(hess)?.inverse();
    let mut se = DVector::zeros(dim);
    for i in 0..dim {
        if inv[(i, i)] <= 0.0 {
            return None;
        }
        se[i] = inv[(i, i)].sqrt();
    }
    Some(se)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bfgs_minimizes_rosenbrock() {
        let f = |x: &DVector<f64>| {
            let (a, b) = (x[0], x[1]);
            let value = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let grad = DVector::from_vec(vec![
                -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
                200.0 * (b - a * a),
            ]);
            Some((value, grad))
        };
        let out = bfgs_minimize(f, DVector::from_vec(vec![-1.2, 1.0]), 1e-8, 500);
        assert!(out.converged, "grad_sup = {}", out.grad_sup);
        assert!((out.x[0] - 1.0).abs() < 1e-6 && (out.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn golden_max_finds_parabola_peak() {
        let (x, fx) = golden_max(|t| -(t - 1.3) * (t - 1.3), -4.0, 6.0, 1e-9);
        assert!((x - 1.3).abs() < 1e-7);
        assert!(fx <= 0.0 && fx > -1e-13);
    }

    #[test]
    fn rank_gate_rejects_duplicate_column() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        let gram = x.tr_mul(&x);
        assert!(matches!(
            require_full_rank(&gram),
            Err(Error::RankDeficient { rank: 1, cols: 2 })
        ));
    }
}
