//! Energies, gradients and residual diagnostics.
//!
//! `F(u) = ∫ |∇u|² + 2αu − K e^{2u}` has L² gradient `2(−Δu + α − K e^{2u})`,
//! so its critical points are exactly the discrete solutions of
//! `−Δu + α = K e^{2u}`. Around a solution `u₁` the shifted energy
//! `J(u) = ∫ |∇u|² + R(2u + 1 − e^{2u})`, `R = K e^{2u₁}`, has critical
//! points `u` for which `u₁ + u` solves the same equation. The constant `∫R`
//! is folded into `J` so that `J(0) = 0`.

use serde::Serialize;

use crate::domain::{DiscreteDomain, ScalarField};
use crate::error::{Error, Result};
use crate::linalg::pairwise_sum;
use crate::problem::ProblemSpec;

/// Largest exponent argument accepted in `e^{2u}`; larger values are
/// reported as divergence.
pub const EXP_CAP: f64 = 300.0;

/// Residual threshold a field must meet before it is used as `u₁` in the
/// shifted energy.
pub const SHIFT_BASE_TOL: f64 = 1e-6;

pub(crate) fn exp2u(u: &[f64]) -> Result<Vec<f64>> {
    u.iter()
        .map(|&v| {
            if v.is_finite() && v <= EXP_CAP {
                Ok((2.0 * v).exp())
            } else {
                Err(Error::Diverged(format!("field value {v} exceeds the exponential cap {EXP_CAP}")))
            }
        })
        .collect()
}

/// The semilinear operator `u ↦ −Δu + a − b e^{2u}` shared by the original
/// equation (`a = α`, `b = K`) and the shifted one (`a = b = R`).
pub(crate) struct Semilinear<'a> {
    pub domain: &'a DiscreteDomain,
    pub a: Vec<f64>,
    pub b: &'a [f64],
}

impl<'a> Semilinear<'a> {
    pub fn original(spec: &'a ProblemSpec) -> Self {
        Semilinear {
            domain: spec.domain(),
            a: vec![spec.alpha(); spec.domain().len()],
            b: spec.k().values(),
        }
    }

    pub fn shifted(domain: &'a DiscreteDomain, r: &'a ScalarField) -> Self {
        Semilinear {
            domain,
            a: r.values().to_vec(),
            b: r.values(),
        }
    }

    pub fn residual(&self, u: &[f64]) -> Result<Vec<f64>> {
        let e = exp2u(u)?;
        let mut out = self.domain.neg_laplacian_vec(u);
        for i in 0..u.len() {
            out[i] += self.a[i] - self.b[i] * e[i];
        }
        Ok(out)
    }

    /// Potential `q = −2 b e^{2u}` of the linearization `−Δ + q`.
    pub fn jacobian_potential(&self, u: &[f64]) -> Result<Vec<f64>> {
        let e = exp2u(u)?;
        Ok(e.iter().zip(self.b).map(|(ei, bi)| -2.0 * bi * ei).collect())
    }
}

/// Value and gradient norms of `F` at one field.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyReport {
    pub value: f64,
    pub grad_l2_norm: f64,
    pub grad_h1_norm: f64,
}

/// Residual diagnostics of `−Δu + α = K e^{2u}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    /// ‖−Δu + α − K e^{2u}‖∞.
    pub linf: f64,
    /// |∫K e^{2u} − α|M|| / |M|.
    pub identity_gap: f64,
}

/// `R = K e^{2u₁}` together with `d = ∫R`.
#[derive(Debug, Clone)]
pub struct ShiftedWeight {
    pub r: ScalarField,
    pub d: f64,
}

/// F(u) = ∫ (|∇u|² + 2αu − K e^{2u}) dv.
pub fn energy_f(spec: &ProblemSpec, u: &ScalarField) -> Result<f64> {
    let dom = spec.domain();
    dom.check(u)?;
    let e = exp2u(u.values())?;
    let lu = dom.neg_laplacian_vec(u.values());
    let alpha = spec.alpha();
    let integrand: Vec<f64> = (0..u.len())
        .map(|i| {
            let ui = u.values()[i];
            dom.weights()[i] * (lu[i] * ui + 2.0 * alpha * ui - spec.k().values()[i] * e[i])
        })
        .collect();
    Ok(pairwise_sum(&integrand))
}

/// L² gradient of F: 2(−Δu + α − K e^{2u}).
pub fn grad_f(spec: &ProblemSpec, u: &ScalarField) -> Result<ScalarField> {
    spec.domain().check(u)?;
    let r = Semilinear::original(spec).residual(u.values())?;
    Ok(spec.domain().wrap(r.into_iter().map(|v| 2.0 * v).collect()))
}

/// Value of F with L² and H¹ norms of its gradient.
pub fn energy_report(spec: &ProblemSpec, u: &ScalarField) -> Result<EnergyReport> {
    let dom = spec.domain();
    let value = energy_f(spec, u)?;
    let g = grad_f(spec, u)?;
    let p = dom.precondition_gradient(&g)?;
    Ok(EnergyReport {
        value,
        grad_l2_norm: dom.l2_norm(&g)?,
        grad_h1_norm: dom.l2_inner(&g, &p)?.max(0.0).sqrt(),
    })
}

/// Pointwise `−Δu + α − K e^{2u}`: non-negative everywhere for super
/// solutions, non-positive for sub solutions.
pub fn pointwise_residual(spec: &ProblemSpec, u: &ScalarField) -> Result<ScalarField> {
    spec.domain().check(u)?;
    let r = Semilinear::original(spec).residual(u.values())?;
    Ok(spec.domain().wrap(r))
}

pub fn residual(spec: &ProblemSpec, u: &ScalarField) -> Result<Residual> {
    let dom = spec.domain();
    let r = pointwise_residual(spec, u)?;
    let e = exp2u(u.values())?;
    let ke: Vec<f64> = e.iter().zip(spec.k().values()).map(|(a, b)| a * b).collect();
    let gap = (dom.integrate_raw(&ke) - spec.alpha() * dom.volume()).abs() / dom.volume();
    Ok(Residual {
        linf: r.norm_inf(),
        identity_gap: gap,
    })
}

/// Builds R = K e^{2u₁} from a solution u₁.
pub fn shifted_weight(spec: &ProblemSpec, u1: &ScalarField) -> Result<ShiftedWeight> {
    let res = residual(spec, u1)?;
    if !(res.linf < SHIFT_BASE_TOL) {
        return Err(Error::precondition(format!(
            "base field is not a solution (residual {:e} >= {SHIFT_BASE_TOL:e})",
            res.linf
        )));
    }
    let dom = spec.domain();
    let e = exp2u(u1.values())?;
    let r = dom.wrap(e.iter().zip(spec.k().values()).map(|(a, b)| a * b).collect());
    let d = dom.integrate(&r)?;
    debug_assert!((d - spec.alpha() * dom.volume()).abs() < 1e-5 * dom.volume());
    Ok(ShiftedWeight { r, d })
}

/// J(u) = ∫ |∇u|² + R (2u + 1 − e^{2u}) dv, normalized so J(0) = 0.
pub fn energy_j(dom: &DiscreteDomain, r: &ScalarField, u: &ScalarField) -> Result<f64> {
    dom.check(r)?;
    dom.check(u)?;
    energy_j_raw(dom, r.values(), u.values())
}

pub(crate) fn energy_j_raw(dom: &DiscreteDomain, r: &[f64], u: &[f64]) -> Result<f64> {
    let e = exp2u(u)?;
    let lu = dom.neg_laplacian_vec(u);
    let integrand: Vec<f64> = (0..u.len())
        .map(|i| dom.weights()[i] * (lu[i] * u[i] + r[i] * (2.0 * u[i] + 1.0 - e[i])))
        .collect();
    Ok(pairwise_sum(&integrand))
}

/// L² gradient of J: 2(−Δu + R − R e^{2u}).
pub fn grad_j(dom: &DiscreteDomain, r: &ScalarField, u: &ScalarField) -> Result<ScalarField> {
    dom.check(r)?;
    dom.check(u)?;
    let res = Semilinear::shifted(dom, r).residual(u.values())?;
    Ok(dom.wrap(res.into_iter().map(|v| 2.0 * v).collect()))
}

/// ∫ (|∇φ|² − 2K e^{2u} φ²) dv.
pub fn second_variation(spec: &ProblemSpec, u: &ScalarField, phi: &ScalarField) -> Result<f64> {
    let dom = spec.domain();
    dom.check(u)?;
    dom.check(phi)?;
    let e = exp2u(u.values())?;
    let lphi = dom.neg_laplacian_vec(phi.values());
    let k = spec.k().values();
    let p = phi.values();
    let integrand: Vec<f64> = (0..p.len())
        .map(|i| dom.weights()[i] * (lphi[i] * p[i] - 2.0 * k[i] * e[i] * p[i] * p[i]))
        .collect();
    Ok(pairwise_sum(&integrand))
}

/// ∫ R (1 − e^{2u}) dv, the pairing of grad J with the constant 1 (up to
/// the factor 2); it vanishes at every critical point of J.
pub fn constant_mode_pairing(dom: &DiscreteDomain, r: &ScalarField, u: &ScalarField) -> Result<f64> {
    dom.check(r)?;
    dom.check(u)?;
    let e = exp2u(u.values())?;
    let integrand: Vec<f64> = r.values().iter().zip(&e).map(|(ri, ei)| ri * (1.0 - ei)).collect();
    Ok(dom.integrate_raw(&integrand))
}
