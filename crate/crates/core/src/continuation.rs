//! α-sweeps and bisection for the solvability threshold α₀.
//!
//! "Unsolvable" is operational: every strategy below fails within budget.
//! For K ≤ 0 the explicit super solution feeds the monotone method. For
//! sign-changing K a solution at a slightly smaller α, reached by Newton
//! continuation from the nearest solved α above, serves as super solution;
//! when that fails, Newton continuation to α itself and Newton from five
//! seeded starts are tried.

use serde::Serialize;

use crate::domain::{DiscreteDomain, ScalarField};
use crate::error::{Error, Result};
use crate::problem::{self, ProblemSpec};
use crate::solvers::{
    self, monotone_solve, newton_continuation, newton_polish, Direction, Method, MonotoneOptions,
    NewtonOptions, SolutionRecord,
};
use crate::spectral;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub newton_max_iter: usize,
    /// Relative offset of the α used to build the continuation super solution.
    pub super_offset: f64,
    pub compute_eigen: bool,
    pub eigen_tol: f64,
    pub eigen_max_iter: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            tol: solvers::DEFAULT_TOL_TORUS,
            max_iter: 100_000,
            newton_max_iter: 40,
            super_offset: 0.02,
            compute_eigen: true,
            eigen_tol: spectral::DEFAULT_EIGEN_TOL,
            eigen_max_iter: spectral::DEFAULT_EIGEN_MAX_ITER,
        }
    }
}

impl SweepConfig {
    pub fn for_domain(dom: &DiscreteDomain) -> Self {
        SweepConfig {
            tol: solvers::default_tol(dom),
            ..SweepConfig::default()
        }
    }

    fn newton(&self) -> NewtonOptions {
        NewtonOptions {
            tol: self.tol,
            max_iter: self.newton_max_iter,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub alpha: f64,
    pub solvable: bool,
    pub record: Option<SolutionRecord>,
    pub lambda_min: Option<f64>,
    /// Unsolvable although a smaller α was solved: a solver false negative.
    pub false_negative: bool,
}

impl SweepRecord {
    fn unsolvable(alpha: f64) -> Self {
        SweepRecord {
            alpha,
            solvable: false,
            record: None,
            lambda_min: None,
            false_negative: false,
        }
    }
}

/// Errors that mean "this strategy failed", as opposed to a broken input.
fn is_strategy_failure(e: &Error) -> bool {
    matches!(
        e.root(),
        Error::NotConverged { .. }
            | Error::Diverged(_)
            | Error::PreconditionViolated(_)
            | Error::ConstructionFailure(_)
    )
}

fn attempt<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e) if is_strategy_failure(&e) => Ok(None),
        Err(e) => Err(e),
    }
}

fn converged(rec: SolutionRecord) -> Option<SolutionRecord> {
    rec.converged.then_some(rec)
}

/// All strategies at one α. `anchor` is a solution at a larger α.
fn solve_at(
    spec: &ProblemSpec,
    anchor: Option<(f64, &ScalarField)>,
    cfg: &SweepConfig,
) -> Result<Option<SolutionRecord>> {
    let alpha = spec.alpha();
    let newton = cfg.newton();
    let mono = MonotoneOptions {
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        direction: Direction::Downward,
    };
    let monotone_from = |upper: &ScalarField| -> Result<Option<SolutionRecord>> {
        let c = problem::sub_solution_constant(spec)?;
        let Some(m) = attempt(monotone_solve(spec, c, upper, &mono))? else {
            return Ok(None);
        };
        let p = newton_polish(spec, &m.u, &newton)?;
        Ok(converged(SolutionRecord {
            method: Method::Monotone,
            iterations: m.iterations + p.iterations,
            ..p
        }))
    };

    if spec.k().max() <= 0.0 {
        if let Some(upper) = attempt(problem::super_solution_kneg(spec))? {
            if let Some(rec) = attempt(monotone_from(&upper))?.flatten() {
                return Ok(Some(rec));
            }
        }
    } else {
        let lower = spec.with_alpha(alpha - cfg.super_offset * alpha.abs())?;
        if let Some(u) = attempt(newton_continuation(&lower, anchor, &newton))? {
            if let Some(upper) = attempt(problem::super_solution_continuation(spec, &u, lower.alpha()))? {
                if let Some(rec) = attempt(monotone_from(&upper))?.flatten() {
                    return Ok(Some(rec));
                }
            }
        }
    }

    if let Some(u) = attempt(newton_continuation(spec, anchor, &newton))? {
        if let Some(rec) = converged(newton_polish(spec, &u, &newton)?) {
            return Ok(Some(rec));
        }
    }

    // seeded Newton starts
    let dom = spec.domain();
    let mut seeds = Vec::new();
    let k_mean = spec.k_mean();
    let base = if k_mean < 0.0 { 0.5 * (alpha / k_mean).ln() } else { 0.0 };
    if let Some((_, u)) = anchor {
        seeds.push(u.clone());
        seeds.push(u.shift(-0.5));
        seeds.push(u.shift(0.5));
    }
    seeds.push(dom.constant(base));
    seeds.push(dom.constant(base - 1.0));
    seeds.push(dom.constant(base + 1.0));
    for seed in seeds.into_iter().take(5) {
        if let Some(rec) = converged(newton_polish(spec, &seed, &newton)?) {
            return Ok(Some(rec));
        }
    }
    Ok(None)
}

fn finish(spec: &ProblemSpec, rec: Option<SolutionRecord>, cfg: &SweepConfig) -> Result<SweepRecord> {
    let Some(mut rec) = rec else {
        return Ok(SweepRecord::unsolvable(spec.alpha()));
    };
    let lambda_min = if cfg.compute_eigen {
        Some(spectral::principal_eigen(spec, &rec.u, cfg.eigen_tol, cfg.eigen_max_iter)?.lambda_min)
    } else {
        None
    };
    rec.lambda_min = lambda_min;
    Ok(SweepRecord {
        alpha: spec.alpha(),
        solvable: true,
        record: Some(rec),
        lambda_min,
        false_negative: false,
    })
}

fn probe(
    dom: &DiscreteDomain,
    k: &ScalarField,
    alpha: f64,
    anchor: Option<(f64, &ScalarField)>,
    cfg: &SweepConfig,
) -> Result<SweepRecord> {
    let run = || -> Result<SweepRecord> {
        let spec = ProblemSpec::new(dom.clone(), k.clone(), alpha)?;
        let rec = solve_at(&spec, anchor, cfg)?;
        finish(&spec, rec, cfg)
    };
    run().map_err(|e| Error::Probe {
        alpha,
        source: Box::new(e),
    })
}

/// Marks unsolvable records that sit above a solvable α.
fn flag_false_negatives(records: &mut [SweepRecord]) {
    let lowest_solved = records
        .iter()
        .filter(|r| r.solvable)
        .map(|r| r.alpha)
        .fold(f64::INFINITY, f64::min);
    for r in records.iter_mut() {
        r.false_negative = !r.solvable && r.alpha > lowest_solved;
    }
}

/// Whether the solvable α form an up-set of the probed α.
pub fn is_up_set(records: &[SweepRecord]) -> bool {
    records.iter().all(|r| !r.false_negative)
}

/// One record per α, in the order given. Solving proceeds from the α
/// nearest 0 downward, each solution anchoring the next.
pub fn alpha_sweep(
    dom: &DiscreteDomain,
    k: &ScalarField,
    alphas: &[f64],
    cfg: &SweepConfig,
) -> Result<Vec<SweepRecord>> {
    if alphas.is_empty() {
        return Err(Error::invalid("alpha list is empty"));
    }
    if alphas.iter().any(|a| !(*a < 0.0) || !a.is_finite()) {
        return Err(Error::invalid("every alpha must be negative and finite"));
    }
    if alphas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("alphas must be strictly increasing"));
    }
    dom.check(k)?;
    let mut out: Vec<SweepRecord> = Vec::with_capacity(alphas.len());
    let mut anchor: Option<(f64, ScalarField)> = None;
    for &alpha in alphas.iter().rev() {
        let rec = probe(dom, k, alpha, anchor.as_ref().map(|(a, u)| (*a, u)), cfg)?;
        if let Some(r) = &rec.record {
            anchor = Some((alpha, r.u.clone()));
        }
        out.push(rec);
    }
    out.reverse();
    flag_false_negatives(&mut out);
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct Alpha0Estimate {
    /// Unsolvable lower end and solvable upper end.
    pub interval: (f64, f64),
    pub probes: usize,
    pub transcript: Vec<SweepRecord>,
}

/// Bisection for α₀ on a bracket whose upper end is solvable and lower end
/// is not; both ends are verified first.
pub fn estimate_alpha0(
    dom: &DiscreteDomain,
    k: &ScalarField,
    bracket: (f64, f64),
    width_tol: f64,
    cfg: &SweepConfig,
) -> Result<Alpha0Estimate> {
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) || !(hi < 0.0) || !lo.is_finite() {
        return Err(Error::InvalidBracket(format!(
            "need alpha_lo < alpha_hi < 0, got ({lo}, {hi})"
        )));
    }
    if !(width_tol > 0.0) {
        return Err(Error::invalid("width_tol must be positive"));
    }
    dom.check(k)?;
    let mut transcript = Vec::new();
    let top = probe(dom, k, hi, None, cfg)?;
    let solvable_hi = top.solvable;
    let mut best: Option<(f64, ScalarField)> = top.record.as_ref().map(|r| (hi, r.u.clone()));
    transcript.push(top);
    if !solvable_hi {
        return Err(Error::InvalidBracket(format!("upper end {hi} is not solvable")));
    }
    let anchor = |b: &Option<(f64, ScalarField)>| b.as_ref().map(|(a, u)| (*a, u.clone()));
    let bottom = {
        let a = anchor(&best);
        probe(dom, k, lo, a.as_ref().map(|(x, u)| (*x, u)), cfg)?
    };
    let solvable_lo = bottom.solvable;
    transcript.push(bottom);
    if solvable_lo {
        return Err(Error::InvalidBracket(format!(
            "lower end {lo} is solvable; no unsolvable endpoint"
        )));
    }
    while hi - lo >= width_tol {
        let mid = 0.5 * (lo + hi);
        let a = anchor(&best);
        let rec = probe(dom, k, mid, a.as_ref().map(|(x, u)| (*x, u)), cfg)?;
        if rec.solvable {
            best = rec.record.as_ref().map(|r| (mid, r.u.clone()));
            hi = mid;
        } else {
            lo = mid;
        }
        transcript.push(rec);
    }
    Ok(Alpha0Estimate {
        interval: (lo, hi),
        probes: transcript.len(),
        transcript,
    })
}
