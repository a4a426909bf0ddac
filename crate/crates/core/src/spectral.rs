//! Principal eigenpair of the linearization `L_u = −Δ − 2K e^{2u}`.

use serde::Serialize;

use crate::domain::ScalarField;
use crate::energy::{exp2u, Semilinear};
use crate::error::{Error, Result};
use crate::problem::ProblemSpec;

pub const DEFAULT_EIGEN_TOL: f64 = 1e-10;
pub const DEFAULT_EIGEN_MAX_ITER: usize = 5000;

#[derive(Debug, Clone, Serialize)]
pub struct EigenResult {
    pub lambda_min: f64,
    /// L²-normalized; positive mean, or positive first extremum when the
    /// mean vanishes.
    #[serde(skip)]
    pub eigenvector: ScalarField,
    pub iterations: usize,
    /// ‖L_u φ − λ φ‖₂ at the returned pair.
    pub residual: f64,
}

/// Shifted inverse power iteration. With `V = −2K e^{2u}` and
/// `σ = min(0, min V) − 1`, the operator `−Δ + V − σ` is positive definite
/// and its largest inverse eigenvalue belongs to the smallest eigenvalue of
/// `L_u`.
pub fn principal_eigen(
    spec: &ProblemSpec,
    u: &ScalarField,
    tol: f64,
    max_iter: usize,
) -> Result<EigenResult> {
    let dom = spec.domain();
    dom.check(u)?;
    if !u.is_finite() {
        return Err(Error::invalid("field is not finite"));
    }
    let v = Semilinear::original(spec).jacobian_potential(u.values())?;
    exp2u(u.values())?;
    let sigma = v.iter().copied().fold(0.0, f64::min) - 1.0;
    let q: Vec<f64> = v.iter().map(|x| x - sigma).collect();

    let apply_l = |phi: &[f64]| -> Vec<f64> {
        let mut out = dom.neg_laplacian_vec(phi);
        for i in 0..phi.len() {
            out[i] += v[i] * phi[i];
        }
        out
    };
    let normalize = |x: &mut Vec<f64>| {
        let n = dom.dot_raw(x, x).sqrt();
        for xi in x.iter_mut() {
            *xi /= n;
        }
    };

    let mut phi = vec![1.0; dom.len()];
    normalize(&mut phi);
    let mut iterations = 0;
    loop {
        let lphi = apply_l(&phi);
        let rho = dom.dot_raw(&lphi, &phi);
        let r: Vec<f64> = lphi.iter().zip(&phi).map(|(a, b)| a - rho * b).collect();
        let res = dom.dot_raw(&r, &r).sqrt();
        if res < tol * (1.0 + rho.abs()) {
            fix_sign(&mut phi);
            return Ok(EigenResult {
                lambda_min: rho,
                eigenvector: dom.wrap(phi),
                iterations,
                residual: res,
            });
        }
        if iterations >= max_iter {
            return Err(Error::NotConverged {
                what: format!("inverse iteration (residual {res:e})"),
                iterations,
            });
        }
        // warm start at the exact answer for an eigenvector
        let mut y: Vec<f64> = phi.iter().map(|p| p / (rho - sigma)).collect();
        dom.solve_spd_potential(&q, &phi, &mut y, 1e-14)?;
        normalize(&mut y);
        phi = y;
        iterations += 1;
    }
}

fn fix_sign(phi: &mut [f64]) {
    let n = phi.len() as f64;
    let mean = phi.iter().sum::<f64>() / n;
    let scale = phi.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let flip = if mean.abs() > 1e-10 * scale {
        mean < 0.0
    } else {
        let first = phi
            .iter()
            .copied()
            .find(|x| x.abs() >= 0.999 * scale)
            .unwrap_or(0.0);
        first < 0.0
    };
    if flip {
        for x in phi.iter_mut() {
            *x = -*x;
        }
    }
}
