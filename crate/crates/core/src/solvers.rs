//! Solvers for the stable solution: monotone super/sub-solution iteration,
//! projected H¹ gradient descent on the convex set {u ≤ u₊}, and a damped
//! Newton method used as finisher and for α-continuation.

use serde::Serialize;

use crate::domain::{DiscreteDomain, ScalarField};
use crate::energy::{self, exp2u, Semilinear};
use crate::error::{Error, Result};
use crate::problem::{self, ProblemSpec};
use crate::spectral;

/// Default tolerance on the periodic grid.
pub const DEFAULT_TOL_TORUS: f64 = 1e-10;
/// Default tolerance on meshes.
pub const DEFAULT_TOL_MESH: f64 = 1e-8;

/// Armijo sufficient-decrease constant.
const ARMIJO_C: f64 = 1e-4;
/// The H¹-preconditioned Hessian of F tends to 2 on high frequencies, so a
/// step of ½ damps them in one iteration.
const INITIAL_STEP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Monotone,
    ConvexMin,
    Newton,
    MountainPass,
}

/// A computed field with its diagnostics. The field itself is not part of
/// the JSON form; it is dumped separately as KWF1.
#[derive(Debug, Clone, Serialize)]
pub struct SolutionRecord {
    #[serde(skip)]
    pub u: ScalarField,
    pub method: Method,
    pub residual_linf: f64,
    pub identity_gap: f64,
    #[serde(rename = "energy_F")]
    pub energy_f: f64,
    /// Principal eigenvalue of the linearization; `None` until computed.
    pub lambda_min: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl SolutionRecord {
    /// Evaluates diagnostics of `u`; `converged` is only kept when the
    /// residual is below `tol`.
    pub fn assemble(
        spec: &ProblemSpec,
        u: ScalarField,
        method: Method,
        iterations: usize,
        converged: bool,
        tol: f64,
    ) -> Result<Self> {
        let res = energy::residual(spec, &u)?;
        let energy_f = energy::energy_f(spec, &u)?;
        Ok(SolutionRecord {
            u,
            method,
            residual_linf: res.linf,
            identity_gap: res.identity_gap,
            energy_f,
            lambda_min: None,
            iterations,
            converged: converged && res.linf < tol,
        })
    }
}

pub fn default_tol(dom: &DiscreteDomain) -> f64 {
    if dom.as_torus().is_some() {
        DEFAULT_TOL_TORUS
    } else {
        DEFAULT_TOL_MESH
    }
}

// ------------------------------------------------------------------ monotone

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// Start at the super solution; converges to the maximal solution.
    #[default]
    Downward,
    /// Start at the sub solution; converges to the minimal solution.
    Upward,
}

#[derive(Debug, Clone, Copy)]
pub struct MonotoneOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub direction: Direction,
}

impl Default for MonotoneOptions {
    fn default() -> Self {
        MonotoneOptions {
            tol: DEFAULT_TOL_TORUS,
            max_iter: 100_000,
            direction: Direction::Downward,
        }
    }
}

/// Per-iterate bounds recorded by [`monotone_solve_traced`].
#[derive(Debug, Clone, Copy)]
pub struct MonotoneStep {
    /// max(u^{n+1} − u^n); non-positive for the downward iteration.
    pub max_increase: f64,
    /// min(u^{n+1} − u^n); non-negative for the upward iteration.
    pub min_increase: f64,
    pub min: f64,
    pub max: f64,
    pub shift: f64,
}

pub fn monotone_solve(
    spec: &ProblemSpec,
    c_sub: f64,
    u_super: &ScalarField,
    opts: &MonotoneOptions,
) -> Result<SolutionRecord> {
    monotone_solve_traced(spec, c_sub, u_super, opts).map(|(rec, _)| rec)
}

/// Monotone iteration `(−Δ + λ) u^{n+1} = λ u^n + K e^{2u^n} − α` inside the
/// order interval `[c_sub, u_super]`.
///
/// Downward runs take `λ_n = 1 + 2·max_x(max(−K, 0) e^{2u^n})`, recomputed
/// from the current iterate; upward runs use the fixed bound evaluated at
/// `u_super`. Either choice dominates the derivative of `K e^{2u}` on the
/// interval the next iterate can reach. Stops once both the update and the
/// residual are below `tol`.
pub fn monotone_solve_traced(
    spec: &ProblemSpec,
    c_sub: f64,
    u_super: &ScalarField,
    opts: &MonotoneOptions,
) -> Result<(SolutionRecord, Vec<MonotoneStep>)> {
    let dom = spec.domain();
    dom.check(u_super)?;
    if !(c_sub <= u_super.min()) {
        return Err(Error::precondition(format!(
            "sub solution {c_sub} is not below min(u_super) = {}",
            u_super.min()
        )));
    }
    let k = spec.k().values();
    let alpha = spec.alpha();
    let sub_defect = k
        .iter()
        .map(|&kv| alpha - kv * (2.0 * c_sub).exp())
        .fold(f64::NEG_INFINITY, f64::max);
    if sub_defect > 0.0 {
        return Err(Error::precondition(format!(
            "constant {c_sub} is not a sub solution (defect {sub_defect:e})"
        )));
    }
    let margin = energy::pointwise_residual(spec, u_super)?;
    let scale = 1.0 + spec.k().norm_inf() * exp2u(&[u_super.max()])?[0];
    if margin.min() < -1e-9 * scale {
        return Err(Error::precondition(format!(
            "u_super is not a super solution (min margin {:e})",
            margin.min()
        )));
    }

    let neg_k: Vec<f64> = k.iter().map(|&kv| (-kv).max(0.0)).collect();
    let shift_at = |u: &[f64]| -> Result<f64> {
        let e = exp2u(u)?;
        let m = neg_k
            .iter()
            .zip(&e)
            .map(|(a, b)| a * b)
            .fold(0.0, f64::max);
        Ok(1.0 + 2.0 * m)
    };
    let fixed_shift = 1.0
        + 2.0 * neg_k.iter().copied().fold(0.0, f64::max) * exp2u(&[u_super.max()])?[0];

    let mut u: Vec<f64> = match opts.direction {
        Direction::Downward => u_super.values().to_vec(),
        Direction::Upward => vec![c_sub; dom.len()],
    };
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let shift = match opts.direction {
            Direction::Downward => shift_at(&u)?,
            Direction::Upward => fixed_shift,
        };
        let e = exp2u(&u)?;
        let rhs: Vec<f64> = (0..u.len())
            .map(|i| shift * u[i] + k[i] * e[i] - alpha)
            .collect();
        let next = dom.solve_shifted(shift, &rhs)?;
        iterations += 1;
        let (mut inc_max, mut inc_min) = (f64::NEG_INFINITY, f64::INFINITY);
        for (a, b) in next.iter().zip(&u) {
            inc_max = inc_max.max(a - b);
            inc_min = inc_min.min(a - b);
        }
        let step = inc_max.abs().max(inc_min.abs());
        u = next;
        trace.push(MonotoneStep {
            max_increase: inc_max,
            min_increase: inc_min,
            min: u.iter().copied().fold(f64::INFINITY, f64::min),
            max: u.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            shift,
        });
        if !step.is_finite() {
            return Err(Error::Diverged("monotone iterate became non-finite".into()));
        }
        if step < opts.tol {
            let res = Semilinear::original(spec).residual(&u)?;
            if res.iter().fold(0.0f64, |m, v| m.max(v.abs())) < opts.tol {
                converged = true;
                break;
            }
        }
    }
    let record = SolutionRecord::assemble(
        spec,
        dom.wrap(u),
        Method::Monotone,
        iterations,
        converged,
        opts.tol,
    )?;
    Ok((record, trace))
}

// -------------------------------------------------------------------- convex

#[derive(Debug, Clone, Copy)]
pub struct ConvexOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ConvexOptions {
    fn default() -> Self {
        ConvexOptions {
            tol: DEFAULT_TOL_TORUS,
            max_iter: 20_000,
        }
    }
}

/// `e^x − 1 − x` without cancellation for small `x`.
fn exp_m1_minus_x(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        x * x * (0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0 + x * (1.0 / 120.0 + x / 720.0))))
    } else {
        x.exp_m1() - x
    }
}

/// F(from + d) − F(from) = ⟨g, d⟩ + ⟨−Δd, d⟩ − ∫ K e^{2from} (e^{2d} − 1 − 2d)
/// with `g` the L² gradient at `from`. Every term is of the size of the step,
/// so the Armijo test keeps resolving decreases near the minimizer.
pub(crate) fn energy_f_difference(spec: &ProblemSpec, from: &[f64], g: &[f64], to: &[f64]) -> Result<f64> {
    let dom = spec.domain();
    let e = exp2u(from)?;
    exp2u(to)?;
    let d: Vec<f64> = to.iter().zip(from).map(|(a, b)| a - b).collect();
    let ld = dom.neg_laplacian_vec(&d);
    let k = spec.k().values();
    let integrand: Vec<f64> = (0..d.len())
        .map(|i| d[i] * (g[i] + ld[i]) - k[i] * e[i] * exp_m1_minus_x(2.0 * d[i]))
        .collect();
    Ok(dom.integrate_raw(&integrand))
}

pub fn convex_minimize(
    spec: &ProblemSpec,
    u_super: &ScalarField,
    opts: &ConvexOptions,
) -> Result<SolutionRecord> {
    convex_minimize_traced(spec, u_super, opts).map(|(rec, _)| rec)
}

/// Projected H¹-preconditioned gradient descent for F on {u ≤ u_super}
/// with Armijo backtracking (initial step ½, factor ½). Requires K ≤ 0, where
/// F is convex on the set. Stops once the projected-gradient H¹ norm is below
/// `tol` and the residual sup norm below `10·tol`. Also returns F at the start and after each accepted step.
pub fn convex_minimize_traced(
    spec: &ProblemSpec,
    u_super: &ScalarField,
    opts: &ConvexOptions,
) -> Result<(SolutionRecord, Vec<f64>)> {
    let dom = spec.domain();
    dom.check(u_super)?;
    if spec.k().max() > 0.0 {
        return Err(Error::precondition("convex minimization needs K <= 0"));
    }
    let cap = u_super.values();
    let project = |v: &mut [f64]| {
        for (x, c) in v.iter_mut().zip(cap) {
            *x = x.min(*c);
        }
    };

    // L² gradient, its H¹ representative and the H¹ norm of the projected step
    let descent = |u: &[f64]| -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let g: Vec<f64> = Semilinear::original(spec)
            .residual(u)?
            .into_iter()
            .map(|v| 2.0 * v)
            .collect();
        let p = dom.solve_shifted(1.0, &g)?;
        let mut trial: Vec<f64> = u.iter().zip(&p).map(|(a, b)| a - b).collect();
        project(&mut trial);
        let pg: Vec<f64> = u.iter().zip(&trial).map(|(a, b)| a - b).collect();
        let norm = dom.h1_inner_raw(&pg, &pg).max(0.0).sqrt();
        Ok((g, p, norm))
    };

    let mut u = u_super.values().to_vec();
    let mut energies = vec![energy::energy_f(spec, u_super)?];
    let mut converged = false;
    let mut iterations = 0;
    let (mut g, mut p, mut pg_norm) = descent(&u)?;
    while iterations < opts.max_iter {
        // the H¹ norm hides high frequencies; the sup residual must agree
        let residual_sup = g.iter().fold(0.0f64, |m, x| m.max(0.5 * x.abs()));
        if pg_norm < opts.tol && residual_sup < 10.0 * opts.tol {
            converged = true;
            break;
        }
        let mut s = INITIAL_STEP;
        let accepted = loop {
            let mut cand: Vec<f64> = u.iter().zip(&p).map(|(a, b)| a - s * b).collect();
            project(&mut cand);
            let moved: Vec<f64> = u.iter().zip(&cand).map(|(a, b)| a - b).collect();
            let predicted = dom.dot_raw(&g, &moved);
            if let Ok(df) = energy_f_difference(spec, &u, &g, &cand) {
                if df <= -ARMIJO_C * predicted {
                    break Some(cand);
                }
            }
            s *= 0.5;
            if s < 1e-30 {
                break None;
            }
        };
        let Some(cand) = accepted else { break };
        u = cand;
        (g, p, pg_norm) = descent(&u)?;
        energies.push(energy::energy_f(spec, &dom.wrap(u.clone()))?);
        iterations += 1;
    }
    let rec = SolutionRecord::assemble(
        spec,
        dom.wrap(u),
        Method::ConvexMin,
        iterations,
        converged,
        10.0 * opts.tol,
    )?;
    Ok((rec, energies))
}

// -------------------------------------------------------------------- newton

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: DEFAULT_TOL_TORUS,
            max_iter: 40,
        }
    }
}

pub(crate) struct NewtonOutcome {
    pub u: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Residual sup norm before each step and after the last one.
    pub history: Vec<f64>,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Damped Newton on `−Δu + a − b e^{2u} = 0` with Jacobian `−Δ − 2b e^{2u}`,
/// backtracking on the L² residual norm.
pub(crate) fn newton_core(op: &Semilinear, u0: &[f64], opts: &NewtonOptions) -> Result<NewtonOutcome> {
    let dom = op.domain;
    let mut u = u0.to_vec();
    let mut history = Vec::new();
    let mut r = match op.residual(&u) {
        Ok(r) => r,
        Err(Error::Diverged(_)) => {
            return Ok(NewtonOutcome {
                u,
                iterations: 0,
                converged: false,
                history,
            })
        }
        Err(e) => return Err(e),
    };
    let mut r_sup = sup(&r);
    history.push(r_sup);
    let inner_max = if dom.as_torus().is_some() { 400 } else { 10 * dom.len() };
    let mut iterations = 0;
    while r_sup >= opts.tol && iterations < opts.max_iter {
        let q = op.jacobian_potential(&u)?;
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let mut delta = vec![0.0; u.len()];
        let eta = (0.1 * r_sup).clamp(1e-14, 1e-3);
        dom.solve_indefinite_potential(&q, &rhs, &mut delta, eta, inner_max)?;
        if delta.iter().any(|d| !d.is_finite()) {
            return Err(Error::SolverFailure("Newton direction is not finite".into()));
        }

        let r_l2 = dom.dot_raw(&r, &r).sqrt();
        let mut s = 1.0;
        let step = loop {
            let trial: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a + s * d).collect();
            if let Ok(rt) = op.residual(&trial) {
                let rt_l2 = dom.dot_raw(&rt, &rt).sqrt();
                if rt_l2 <= (1.0 - ARMIJO_C * s) * r_l2 || sup(&rt) < opts.tol {
                    break Some((trial, rt));
                }
            }
            s *= 0.5;
            if s < 1e-10 {
                break None;
            }
        };
        let Some((next, rn)) = step else { break };
        u = next;
        r = rn;
        r_sup = sup(&r);
        history.push(r_sup);
        iterations += 1;
    }
    Ok(NewtonOutcome {
        u,
        iterations,
        converged: r_sup < opts.tol,
        history,
    })
}

pub fn newton_polish(
    spec: &ProblemSpec,
    u0: &ScalarField,
    opts: &NewtonOptions,
) -> Result<SolutionRecord> {
    newton_polish_traced(spec, u0, opts).map(|(rec, _)| rec)
}

/// Damped Newton on the original equation; also returns the residual
/// history (sup norm before each step, and after the last).
pub fn newton_polish_traced(
    spec: &ProblemSpec,
    u0: &ScalarField,
    opts: &NewtonOptions,
) -> Result<(SolutionRecord, Vec<f64>)> {
    let dom = spec.domain();
    dom.check(u0)?;
    let out = newton_core(&Semilinear::original(spec), u0.values(), opts)?;
    let u = dom.wrap(out.u);
    if !problem::within_cap(&u) {
        // evaluation impossible; report the raw state
        return Ok((
            SolutionRecord {
                u,
                method: Method::Newton,
                residual_linf: f64::INFINITY,
                identity_gap: f64::INFINITY,
                energy_f: f64::NAN,
                lambda_min: None,
                iterations: out.iterations,
                converged: false,
            },
            out.history,
        ));
    }
    let rec = SolutionRecord::assemble(spec, u, Method::Newton, out.iterations, out.converged, opts.tol)?;
    Ok((rec, out.history))
}

// -------------------------------------------------------------- continuation

/// Natural-parameter continuation in α with Newton correction and secant
/// prediction, from a known solution (or from the near-constant branch close
/// to α = 0) down or up to `alpha_target`.
pub fn newton_continuation(
    spec: &ProblemSpec,
    start: Option<(f64, &ScalarField)>,
    newton: &NewtonOptions,
) -> Result<ScalarField> {
    let dom = spec.domain();
    let target = spec.alpha();
    let (mut alpha, mut u) = match start {
        Some((a, u)) => {
            dom.check(u)?;
            (a, u.values().to_vec())
        }
        None => {
            let k_mean = spec.k_mean();
            if !(k_mean < 0.0) {
                return Err(Error::precondition(
                    "continuation from alpha -> 0 needs mean(K) < 0",
                ));
            }
            let a0 = target.max(-1e-2 * k_mean.abs());
            let guess = vec![0.5 * (a0 / k_mean).ln(); dom.len()];
            let out = newton_core(&Semilinear::original(&spec.with_alpha(a0)?), &guess, newton)?;
            if !out.converged {
                return Err(Error::NotConverged {
                    what: format!("Newton start of continuation at alpha {a0}"),
                    iterations: out.iterations,
                });
            }
            (a0, out.u)
        }
    };
    let mut prev: Option<(f64, Vec<f64>)> = None;
    let mut step = (target - alpha) / 8.0;
    let min_step = 1e-7 * target.abs().max(1e-3);
    while alpha != target {
        if (alpha + step - target) * step.signum() > 0.0 {
            step = target - alpha;
        }
        let next_alpha = alpha + step;
        let guess: Vec<f64> = match &prev {
            Some((pa, pu)) if (alpha - pa).abs() > 0.0 => {
                let ratio = step / (alpha - pa);
                u.iter().zip(pu).map(|(a, b)| a + ratio * (a - b)).collect()
            }
            _ => u.clone(),
        };
        let out = newton_core(&Semilinear::original(&spec.with_alpha(next_alpha)?), &guess, newton)?;
        if out.converged {
            prev = Some((alpha, std::mem::replace(&mut u, out.u)));
            alpha = next_alpha;
            step *= 1.5;
        } else {
            step *= 0.5;
            if step.abs() < min_step {
                return Err(Error::NotConverged {
                    what: format!("continuation lost the branch near alpha {alpha}"),
                    iterations: 0,
                });
            }
        }
    }
    Ok(dom.wrap(u))
}

// ------------------------------------------------------------ first solution

#[derive(Debug, Clone, Copy)]
pub struct FirstSolutionOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub newton: NewtonOptions,
    pub eigen_tol: f64,
    pub eigen_max_iter: usize,
    /// Relative offset δ: the super solution for sign-changing K is the
    /// solution at α − δ|α|.
    pub super_offset: f64,
}

impl Default for FirstSolutionOptions {
    fn default() -> Self {
        FirstSolutionOptions {
            tol: DEFAULT_TOL_TORUS,
            max_iter: 100_000,
            newton: NewtonOptions::default(),
            eigen_tol: spectral::DEFAULT_EIGEN_TOL,
            eigen_max_iter: spectral::DEFAULT_EIGEN_MAX_ITER,
            super_offset: 0.05,
        }
    }
}

impl FirstSolutionOptions {
    pub fn for_domain(dom: &DiscreteDomain) -> Self {
        let tol = default_tol(dom);
        FirstSolutionOptions {
            tol,
            newton: NewtonOptions {
                tol,
                ..NewtonOptions::default()
            },
            ..FirstSolutionOptions::default()
        }
    }
}

/// Super solution for the monotone method: the K ≤ 0 construction when it
/// applies, otherwise a solution at a slightly smaller α reached by
/// continuation from α → 0.
pub fn first_super_solution(spec: &ProblemSpec, opts: &FirstSolutionOptions) -> Result<ScalarField> {
    if spec.k().max() <= 0.0 {
        return problem::super_solution_kneg(spec);
    }
    let alpha = spec.alpha();
    let newton = NewtonOptions {
        tol: opts.newton.tol.min(1e-10),
        ..opts.newton
    };
    let mut offset = opts.super_offset;
    let mut last_err = None;
    for _ in 0..6 {
        let lower = spec.with_alpha(alpha - offset * alpha.abs())?;
        match newton_continuation(&lower, None, &newton) {
            Ok(u) => return problem::super_solution_continuation(spec, &u, lower.alpha()),
            Err(e) => last_err = Some(e),
        }
        offset *= 0.25;
    }
    Err(last_err.unwrap().at_stage("super solution by continuation"))
}

/// The stable solution u₁: monotone iteration from a super solution down to
/// the maximal solution above the constant sub solution, Newton polish, and
/// the principal eigenvalue of the linearization.
pub fn solve_min(spec: &ProblemSpec, opts: &FirstSolutionOptions) -> Result<SolutionRecord> {
    let c = problem::sub_solution_constant(spec).map_err(|e| e.at_stage("sub solution"))?;
    let upper = first_super_solution(spec, opts).map_err(|e| e.at_stage("super solution"))?;
    let mono = monotone_solve(
        spec,
        c,
        &upper,
        &MonotoneOptions {
            tol: opts.tol,
            max_iter: opts.max_iter,
            direction: Direction::Downward,
        },
    )
    .map_err(|e| e.at_stage("monotone iteration"))?;
    let polished = newton_polish(spec, &mono.u, &opts.newton).map_err(|e| e.at_stage("newton polish"))?;
    let mut rec = SolutionRecord {
        method: Method::Monotone,
        iterations: mono.iterations + polished.iterations,
        ..polished
    };
    if rec.converged {
        let eig = spectral::principal_eigen(spec, &rec.u, opts.eigen_tol, opts.eigen_max_iter)
            .map_err(|e| e.at_stage("principal eigenvalue"))?;
        rec.lambda_min = Some(eig.lambda_min);
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{sub_solution_constant, super_solution_kneg};

    fn constant_problem() -> ProblemSpec {
        let d = DiscreteDomain::torus(1.0, 32).unwrap();
        let k = d.constant(-2.0);
        ProblemSpec::new(d, k, -1.0).unwrap()
    }

    #[test]
    fn monotone_constant_case() {
        let spec = constant_problem();
        let c = sub_solution_constant(&spec).unwrap();
        let sup = super_solution_kneg(&spec).unwrap();
        let (rec, trace) = monotone_solve_traced(&spec, c, &sup, &MonotoneOptions::default()).unwrap();
        assert!(rec.converged);
        let exact = 0.5 * 0.5f64.ln();
        assert!(rec.u.sup_distance(&spec.domain().constant(exact)).unwrap() < 1e-10);
        for s in &trace {
            assert!(s.max_increase <= 1e-12);
            assert!(s.min >= c - 1e-12 && s.max <= sup.max() + 1e-12);
        }
    }

    #[test]
    fn upward_iteration_reaches_the_same_solution() {
        let spec = constant_problem();
        let c = sub_solution_constant(&spec).unwrap();
        let sup = super_solution_kneg(&spec).unwrap();
        let opts = MonotoneOptions {
            direction: Direction::Upward,
            ..MonotoneOptions::default()
        };
        let (rec, trace) = monotone_solve_traced(&spec, c, &sup, &opts).unwrap();
        assert!(rec.converged);
        assert!(trace.iter().all(|s| s.min_increase >= -1e-12));
        assert!((rec.u.values()[0] - 0.5 * 0.5f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn monotone_rejects_bad_ordering() {
        let spec = constant_problem();
        let sup = super_solution_kneg(&spec).unwrap();
        assert!(matches!(
            monotone_solve(&spec, sup.max() + 1.0, &sup, &MonotoneOptions::default()),
            Err(Error::PreconditionViolated(_))
        ));
        let not_super = spec.domain().constant(-3.0);
        assert!(matches!(
            monotone_solve(&spec, -4.0, &not_super, &MonotoneOptions::default()),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn monotone_reports_iteration_budget() {
        let spec = constant_problem();
        let c = sub_solution_constant(&spec).unwrap();
        let sup = super_solution_kneg(&spec).unwrap();
        let opts = MonotoneOptions {
            max_iter: 2,
            ..MonotoneOptions::default()
        };
        let rec = monotone_solve(&spec, c, &sup, &opts).unwrap();
        assert!(!rec.converged);
        assert_eq!(rec.iterations, 2);
    }

    #[test]
    fn convex_constant_case() {
        let spec = constant_problem();
        let sup = super_solution_kneg(&spec).unwrap();
        let (rec, energies) = convex_minimize_traced(&spec, &sup, &ConvexOptions::default()).unwrap();
        assert!(rec.converged, "{rec:?}");
        assert!((rec.u.values()[0] - 0.5 * 0.5f64.ln()).abs() < 1e-9);
        for w in energies.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0));
        }
        assert!(rec.u.values().iter().zip(sup.values()).all(|(a, b)| a <= b));
    }

    #[test]
    fn newton_from_exact_solution_does_nothing() {
        let spec = constant_problem();
        let u = spec.domain().constant(0.5 * 0.5f64.ln());
        let rec = newton_polish(&spec, &u, &NewtonOptions::default()).unwrap();
        assert_eq!(rec.iterations, 0);
        assert!(rec.converged);
        assert_eq!(rec.u, u);
    }
}
