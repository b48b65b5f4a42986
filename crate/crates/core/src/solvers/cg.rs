use crate::tensor::vecops::{axpy, dot, norm2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    /// `‖b − G x‖₂ / ‖b‖₂` at exit (0 when `b = 0`).
    pub relative_residual: f64,
    pub converged: bool,
}

/// Conjugate gradient for a symmetric positive definite `G`, given as
/// `apply(v, out)` computing `out = G v`. `x` holds the starting guess on
/// entry and the solution on exit.
pub fn conjugate_gradient(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> CgOutcome {
    let n = b.len();
    assert_eq!(x.len(), n);
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        x.fill(0.0);
        return CgOutcome {
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }
    let target = tol * b_norm;

    let mut gp = vec![0.0; n];
    apply(x, &mut gp);
    let mut r: Vec<f64> = b.iter().zip(&gp).map(|(bi, gi)| bi - gi).collect();
    let mut rr = dot(&r, &r);
    let mut p = r.clone();
    let mut iterations = 0;
    while rr.sqrt() > target && iterations < max_iter {
        apply(&p, &mut gp);
        let pgp = dot(&p, &gp);
        if pgp <= 0.0 {
            break;
        }
        let alpha = rr / pgp;
        axpy(alpha, &p, x);
        axpy(-alpha, &gp, &mut r);
        let rr_next = dot(&r, &r);
        let beta = rr_next / rr;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rr = rr_next;
        iterations += 1;
    }
    let relative_residual = rr.sqrt() / b_norm;
    CgOutcome {
        iterations,
        relative_residual,
        converged: relative_residual <= tol,
    }
}
