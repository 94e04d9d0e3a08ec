//! Matrix-free MINRES for symmetric (possibly singular but consistent) systems.

use alloc::vec;
use alloc::vec::Vec;


#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinresOutcome {
    pub iterations: usize,
    /// Recurrence estimate of `‖b - A x‖ / ‖b‖`.
    pub relative_residual: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` starting from `x = 0`. `apply(v, out)` must write `A v`
/// into `out` for a symmetric `A`.
pub fn minres<F>(mut apply: F, b: &[f64], x: &mut [f64], tol: f64, max_iter: usize) -> MinresOutcome
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = b.len();
    assert_eq!(x.len(), n);
    x.iter_mut().for_each(|v| *v = 0.0);
    let beta1 = dot(b, b).sqrt();
    if beta1 == 0.0 {
        return MinresOutcome { iterations: 0, relative_residual: 0.0, converged: true };
    }
    let mut r1: Vec<f64> = b.to_vec();
    let mut r2: Vec<f64> = b.to_vec();
    let mut y: Vec<f64> = b.to_vec();
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut w1 = vec![0.0; n];
    let mut w2 = vec![0.0; n];

    let mut oldb = 0.0;
    let mut beta = beta1;
    let mut dbar = 0.0;
    let mut epsln = 0.0;
    let mut phibar = beta1;
    let mut cs = -1.0;
    let mut sn = 0.0;
    let mut relative_residual = 1.0;

    for itn in 1..=max_iter {
        let s = 1.0 / beta;
        for (vi, yi) in v.iter_mut().zip(&y) {
            *vi = s * yi;
        }
        apply(&v, &mut y);
        if itn >= 2 {
            let f = beta / oldb;
            for (yi, ri) in y.iter_mut().zip(&r1) {
                *yi -= f * ri;
            }
        }
        let alfa = dot(&v, &y);
        let f = alfa / beta;
        for (yi, ri) in y.iter_mut().zip(&r2) {
            *yi -= f * ri;
        }
        core::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&y);
        oldb = beta;
        beta = dot(&r2, &r2).sqrt();

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = (gbar * gbar + beta * beta).sqrt().max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        let denom = 1.0 / gamma;
        core::mem::swap(&mut w1, &mut w2);
        core::mem::swap(&mut w2, &mut w);
        for i in 0..n {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) * denom;
            x[i] += phi * w[i];
        }
        relative_residual = phibar / beta1;
        if !relative_residual.is_finite() {
            return MinresOutcome { iterations: itn, relative_residual, converged: false };
        }
        if relative_residual <= tol || beta == 0.0 {
            return MinresOutcome { iterations: itn, relative_residual, converged: relative_residual <= tol };
        }
    }
    MinresOutcome { iterations: max_iter, relative_residual, converged: false }
}
