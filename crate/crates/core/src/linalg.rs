//! Small matrix-free Krylov kernels and deterministic reductions.
//!
//! Every solver works against an arbitrary inner product so the same code
//! serves the uniform torus quadrature and the lumped-mass mesh inner product;
//! operators only need to be self-adjoint with respect to the inner product
//! they are paired with.

use crate::error::{Error, Result};

const PAIRWISE_BLOCK: usize = 32;

/// Pairwise (tree) summation. Results depend only on the input order, which
/// keeps reductions bit-stable across runs.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        let mut acc = 0.0;
        for &x in xs {
            acc += x;
        }
        acc
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Outcome of a Krylov solve.
#[derive(Debug, Clone, Copy)]
pub struct KrylovReport {
    pub iterations: usize,
    /// Final relative residual ‖b − Ax‖ / ‖b‖ in the solver's inner product.
    pub relative_residual: f64,
    pub converged: bool,
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Preconditioned conjugate gradients for an operator that is self-adjoint
/// and positive (semi)definite in the inner product `dot`.
///
/// `project` is applied to residuals and preconditioned residuals; pass a
/// projection onto the range of the operator for consistent singular systems,
/// or a no-op otherwise.
#[allow(clippy::too_many_arguments)]
pub fn conjugate_gradient<A, P, D, Q>(
    apply: A,
    precondition: P,
    dot: D,
    project: Q,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<KrylovReport>
where
    A: Fn(&[f64], &mut [f64]),
    P: Fn(&[f64], &mut [f64]),
    D: Fn(&[f64], &[f64]) -> f64,
    Q: Fn(&mut [f64]),
{
    let n = b.len();
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(KrylovReport {
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        });
    }

    let mut ap = vec![0.0; n];
    apply(x, &mut ap);
    let mut r: Vec<f64> = b.iter().zip(&ap).map(|(bi, ai)| bi - ai).collect();
    project(&mut r);
    let mut z = vec![0.0; n];
    precondition(&r, &mut z);
    project(&mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut rel = dot(&r, &r).sqrt() / b_norm;

    let mut iterations = 0;
    while rel >= tol && iterations < max_iter {
        apply(&p, &mut ap);
        let curvature = dot(&p, &ap);
        if !(curvature > 0.0) || !curvature.is_finite() {
            return Err(Error::SolverFailure(format!(
                "conjugate gradients broke down (p·Ap = {curvature:e}) at iteration {iterations}"
            )));
        }
        let step = rz / curvature;
        axpy(x, step, &p);
        axpy(&mut r, -step, &ap);
        project(&mut r);
        iterations += 1;
        rel = dot(&r, &r).sqrt() / b_norm;
        if rel < tol {
            break;
        }
        precondition(&r, &mut z);
        project(&mut z);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }

    Ok(KrylovReport {
        iterations,
        relative_residual: rel,
        converged: rel < tol,
    })
}

/// Preconditioned MINRES for self-adjoint, possibly indefinite operators.
/// The preconditioner must be self-adjoint positive definite in `dot`.
///
/// Starts from the incoming `x`. Stops on the preconditioned residual
/// estimate; the report carries the true residual of the returned iterate.
pub fn minres<A, P, D>(
    apply: A,
    precondition: P,
    dot: D,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<KrylovReport>
where
    A: Fn(&[f64], &mut [f64]),
    P: Fn(&[f64], &mut [f64]),
    D: Fn(&[f64], &[f64]) -> f64,
{
    let n = b.len();
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(KrylovReport {
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        });
    }

    let mut tmp = vec![0.0; n];
    apply(x, &mut tmp);
    let mut r1: Vec<f64> = b.iter().zip(&tmp).map(|(bi, ai)| bi - ai).collect();
    let mut y = vec![0.0; n];
    precondition(&r1, &mut y);
    let beta1_sq = dot(&r1, &y);
    if beta1_sq < 0.0 || !beta1_sq.is_finite() {
        return Err(Error::SolverFailure(
            "MINRES preconditioner is not positive definite".into(),
        ));
    }
    if beta1_sq == 0.0 {
        return Ok(KrylovReport {
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        });
    }
    let beta1 = beta1_sq.sqrt();

    let mut r2 = r1.clone();
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

    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let s = 1.0 / beta;
        for (vi, yi) in v.iter_mut().zip(&y) {
            *vi = s * yi;
        }
        apply(&v, &mut y);
        if iterations >= 2 {
            axpy(&mut y, -beta / oldb, &r1);
        }
        let alfa = dot(&v, &y);
        axpy(&mut y, -alfa / beta, &r2);
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&y);
        precondition(&r2, &mut y);
        oldb = beta;
        let beta_sq = dot(&r2, &y);
        if beta_sq < 0.0 || !beta_sq.is_finite() {
            return Err(Error::SolverFailure(
                "MINRES preconditioner is not positive definite".into(),
            ));
        }
        beta = beta_sq.sqrt();

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;

        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        std::mem::swap(&mut w1, &mut w2);
        std::mem::swap(&mut w2, &mut w);
        let inv = 1.0 / gamma;
        for i in 0..n {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) * inv;
        }
        axpy(x, phi, &w);

        if phibar / beta1 < tol || beta == 0.0 {
            break;
        }
    }

    apply(x, &mut tmp);
    let res: Vec<f64> = b.iter().zip(&tmp).map(|(bi, ai)| bi - ai).collect();
    let rel = dot(&res, &res).sqrt() / b_norm;
    if !rel.is_finite() {
        return Err(Error::SolverFailure("MINRES produced non-finite iterate".into()));
    }
    Ok(KrylovReport {
        iterations,
        relative_residual: rel,
        converged: phibar / beta1 < tol || beta == 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euclid(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    // 1-D periodic Laplacian plus diagonal shift, dense reference via Gauss.
    fn tridiag_apply(diag: &[f64]) -> impl Fn(&[f64], &mut [f64]) + '_ {
        move |x: &[f64], out: &mut [f64]| {
            let n = x.len();
            for i in 0..n {
                let l = x[(i + n - 1) % n];
                let r = x[(i + 1) % n];
                out[i] = 2.0 * x[i] - l - r + diag[i] * x[i];
            }
        }
    }

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn cg_solves_spd_system() {
        let n = 40;
        let diag: Vec<f64> = (0..n).map(|i| 0.5 + (i % 3) as f64).collect();
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut x = vec![0.0; n];
        let rep = conjugate_gradient(
            tridiag_apply(&diag),
            |r, z| z.copy_from_slice(r),
            euclid,
            |_| {},
            &b,
            &mut x,
            1e-12,
            500,
        )
        .unwrap();
        assert!(rep.converged);
        let mut ax = vec![0.0; n];
        tridiag_apply(&diag)(&x, &mut ax);
        let err = ax.iter().zip(&b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn minres_solves_indefinite_system() {
        let n = 40;
        // shift of -1.5 makes the lowest modes negative
        let diag = vec![-1.5; n];
        let b: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 * 0.7).cos()).collect();
        let mut x = vec![0.0; n];
        let rep = minres(
            tridiag_apply(&diag),
            |r, z| z.copy_from_slice(r),
            euclid,
            &b,
            &mut x,
            1e-13,
            500,
        )
        .unwrap();
        assert!(rep.converged);
        assert!(rep.relative_residual < 1e-10, "{rep:?}");
    }

    #[test]
    fn cg_rejects_indefinite_operator() {
        let n = 10;
        let diag = vec![-3.0; n];
        let b = vec![1.0; n];
        let mut x = vec![0.0; n];
        let res = conjugate_gradient(
            tridiag_apply(&diag),
            |r, z| z.copy_from_slice(r),
            euclid,
            |_| {},
            &b,
            &mut x,
            1e-12,
            100,
        );
        assert!(matches!(res, Err(Error::SolverFailure(_))));
    }
}
