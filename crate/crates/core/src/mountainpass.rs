//! Second solution by a numerical mountain pass on the shifted energy J.
//!
//! A path of `P` nodes joins `0` to `t₀w₀`. Each sweep moves the highest node
//! downhill along the H¹ gradient of J and re-spaces the interior nodes by
//! H¹ arc length; the max-node level never increases. Once the peak gradient
//! is small, or the peak can no longer move without the path tunneling
//! through the ridge, the pass is located by maximizing J along the path
//! around the peak and polished by Newton on `grad J = 0`.

use serde::Serialize;

use crate::domain::{DiscreteDomain, ScalarField};
use crate::energy::{self, exp2u, Semilinear};
use crate::error::{Error, Result};
use crate::problem::{point_distance, ProblemSpec};
use crate::solvers::{self, newton_core, Method, NewtonOptions, SolutionRecord};
use crate::spectral;

const ARMIJO_C: f64 = 1e-4;

/// Path with pinned endpoints and cached node energies.
#[derive(Debug, Clone)]
pub struct MountainPassPath {
    pub nodes: Vec<ScalarField>,
    pub values: Vec<f64>,
    pub peak: usize,
}

impl MountainPassPath {
    fn locate_peak(&mut self) {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        self.peak = best;
    }

    pub fn peak_value(&self) -> f64 {
        self.values[self.peak]
    }
}

/// One row of the optional path trace: `(sweep, node, J)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceRow {
    pub sweep: usize,
    pub node: usize,
    #[serde(rename = "J_value")]
    pub j_value: f64,
}

#[derive(Debug, Clone)]
pub struct MountainPassOutcome {
    pub u_star: ScalarField,
    pub level: f64,
    pub path: MountainPassPath,
    pub sweeps: usize,
    /// Max-node level after each sweep, starting with the initial path.
    pub peak_history: Vec<f64>,
    pub trace: Vec<TraceRow>,
    /// H¹ norm of grad J at `u_star`.
    pub grad_h1_norm: f64,
    /// Sup norm of `−Δu* + R − R e^{2u*}`.
    pub residual_linf: f64,
    /// `|∫ R (1 − e^{2u*})|`.
    pub ps_identity: f64,
    pub stop: RelaxationStop,
    pub converged: bool,
}

/// Why path relaxation ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelaxationStop {
    /// The H¹ gradient at the peak node fell below `path_tol`.
    GradientTol,
    /// No step of the peak node lowers J without raising the polyline next
    /// to it: the pass is resolved as far as the node spacing allows.
    Stalled,
    MaxIter,
}

#[derive(Debug, Clone, Copy)]
pub struct MountainPassOptions {
    pub nodes: usize,
    pub tol: f64,
    /// H¹ gradient norm at the peak node that ends path relaxation.
    pub path_tol: f64,
    pub max_iter: usize,
    pub newton_max_iter: usize,
    pub trace: bool,
}

impl Default for MountainPassOptions {
    fn default() -> Self {
        MountainPassOptions {
            nodes: 21,
            tol: solvers::DEFAULT_TOL_TORUS,
            path_tol: 1e-3,
            max_iter: 20_000,
            newton_max_iter: 50,
            trace: false,
        }
    }
}

/// `cos²` bump of radius `rho` around `center`.
fn bump(dom: &DiscreteDomain, center: [f64; 3], rho: f64) -> Vec<f64> {
    dom.points()
        .iter()
        .map(|&p| {
            let d = point_distance(dom, center, p);
            if d < rho {
                (std::f64::consts::FRAC_PI_2 * d / rho).cos().powi(2)
            } else {
                0.0
            }
        })
        .collect()
}

/// Largest radius around `center` containing only points of the set.
fn inner_radius(dom: &DiscreteDomain, center: [f64; 3], inside: impl Fn(usize) -> bool) -> f64 {
    dom.points()
        .iter()
        .enumerate()
        .filter(|(i, _)| !inside(*i))
        .map(|(_, &p)| point_distance(dom, center, p))
        .fold(f64::INFINITY, f64::min)
}

/// `w₀ = bump⁺ − B·bump⁻` with bumps centered at the extrema of R and
/// contained in `{R ≥ eps}` and `{R ≤ −eps}`; B makes the mean zero.
pub fn build_w0(dom: &DiscreteDomain, r: &ScalarField, eps: f64) -> Result<ScalarField> {
    dom.check(r)?;
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    let rv = r.values();
    let (imax, imin) = (r.argmax(), r.argmin());
    if rv[imax] < eps {
        return Err(Error::Inadmissible(format!("{{R >= {eps}}} is empty")));
    }
    if rv[imin] > -eps {
        return Err(Error::Inadmissible(format!("{{R <= -{eps}}} is empty")));
    }
    let pts = dom.points();
    let rho_plus = inner_radius(dom, pts[imax], |i| rv[i] >= eps);
    let rho_minus = inner_radius(dom, pts[imin], |i| rv[i] <= -eps);
    let plus = bump(dom, pts[imax], rho_plus);
    let minus = bump(dom, pts[imin], rho_minus);
    let b = dom.integrate_raw(&plus) / dom.integrate_raw(&minus);
    let w: Vec<f64> = plus.iter().zip(&minus).map(|(p, m)| p - b * m).collect();
    Ok(dom.wrap(w))
}

/// Doubles t from 1 until `J(t·w₀) < −1`.
pub fn find_t0(dom: &DiscreteDomain, r: &ScalarField, w0: &ScalarField, t_cap: f64) -> Result<f64> {
    dom.check(r)?;
    dom.check(w0)?;
    let mut t = 1.0;
    while t <= t_cap {
        let tw = w0.scale(t);
        match energy::energy_j(dom, r, &tw) {
            Ok(j) if j < -1.0 => return Ok(t),
            Ok(_) => {}
            Err(Error::Diverged(_)) => break,
            Err(e) => return Err(e),
        }
        t *= 2.0;
    }
    Err(Error::NotFound(format!(
        "no t <= {t_cap} with J(t w0) < -1 before the exponential cap"
    )))
}

/// J(to) − J(from) from pointwise differences.
fn energy_j_difference(dom: &DiscreteDomain, r: &[f64], from: &[f64], to: &[f64]) -> Result<f64> {
    let e = exp2u(from)?;
    exp2u(to)?;
    let d: Vec<f64> = to.iter().zip(from).map(|(a, b)| a - b).collect();
    let ld = dom.neg_laplacian_vec(&d);
    let integrand: Vec<f64> = (0..d.len())
        .map(|i| ld[i] * (to[i] + from[i]) + r[i] * (2.0 * d[i] - e[i] * (2.0 * d[i]).exp_m1()))
        .collect();
    Ok(dom.integrate_raw(&integrand))
}

fn h1_distance(dom: &DiscreteDomain, a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    dom.h1_inner_raw(&d, &d).max(0.0).sqrt()
}

fn lerp(a: &[f64], b: &[f64], theta: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + theta * (y - x)).collect()
}

fn cumulative_lengths(dom: &DiscreteDomain, nodes: &[ScalarField], upto: usize) -> Vec<f64> {
    let mut cum = vec![0.0; upto + 1];
    for i in 1..=upto {
        cum[i] = cum[i - 1] + h1_distance(dom, nodes[i - 1].values(), nodes[i].values());
    }
    cum
}

/// Point at arc length `s` on the polyline with cumulative lengths `cum`.
fn polyline_point(nodes: &[ScalarField], cum: &[f64], s: f64) -> Vec<f64> {
    let last = cum.len() - 1;
    let seg = (0..last).find(|&i| cum[i + 1] >= s).unwrap_or(last - 1);
    let len = cum[seg + 1] - cum[seg];
    let theta = if len > 0.0 { ((s - cum[seg]) / len).clamp(0.0, 1.0) } else { 0.0 };
    lerp(nodes[seg].values(), nodes[seg + 1].values(), theta)
}

/// New interior nodes `1..P−1`, evenly spaced in H¹ arc length along the
/// polyline on either side of the peak, which stays a node. The part after
/// the first negative node past the peak (`cut`) only descends and is
/// replaced by a single segment to the pinned end, so nodes are not spent
/// there.
fn equidistribute(
    dom: &DiscreteDomain,
    nodes: &[ScalarField],
    peak: usize,
    cut: usize,
) -> Vec<Vec<f64>> {
    let p = nodes.len();
    let cum = cumulative_lengths(dom, nodes, cut);
    let (left, total) = (cum[peak], cum[cut]);
    // nodes 1..=p-2 cover (0, total]; the peak takes slot m
    let slots = p - 2;
    let m = ((slots as f64 * left / total).round() as usize).clamp(1, slots - 1);
    (1..=slots)
        .map(|j| {
            if j == m {
                nodes[peak].values().to_vec()
            } else if j < m {
                polyline_point(nodes, &cum, left * j as f64 / m as f64)
            } else {
                let frac = (j - m) as f64 / (slots - m) as f64;
                polyline_point(nodes, &cum, left + (total - left) * frac)
            }
        })
        .collect()
}

/// Largest J sampled inside the segment from `a` to `b`.
fn segment_max(dom: &DiscreteDomain, r: &[f64], a: &[f64], b: &[f64]) -> f64 {
    [0.25, 0.5, 0.75]
        .iter()
        .map(|&t| energy::energy_j_raw(dom, r, &lerp(a, b, t)).unwrap_or(f64::INFINITY))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Point of maximal J on the polyline through the peak and its neighbors.
fn refine_peak(dom: &DiscreteDomain, r: &[f64], path: &MountainPassPath) -> Vec<f64> {
    let k = path.peak;
    let (a, m, b) = (
        path.nodes[k - 1].values(),
        path.nodes[k].values(),
        path.nodes[k + 1].values(),
    );
    let at = |tau: f64| -> Vec<f64> {
        if tau < 0.0 {
            lerp(m, a, -tau)
        } else {
            lerp(m, b, tau)
        }
    };
    let val = |tau: f64| energy::energy_j_raw(dom, r, &at(tau)).unwrap_or(f64::NEG_INFINITY);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (-1.0, 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (val(x1), val(x2));
    for _ in 0..60 {
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = val(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = val(x2);
        }
    }
    let tau = 0.5 * (lo + hi);
    if val(tau) >= path.values[k] {
        at(tau)
    } else {
        m.to_vec()
    }
}

pub fn mountain_pass_solve(
    dom: &DiscreteDomain,
    r: &ScalarField,
    w0: &ScalarField,
    t0: f64,
    opts: &MountainPassOptions,
) -> Result<MountainPassOutcome> {
    dom.check(r)?;
    dom.check(w0)?;
    let p = opts.nodes;
    if p < 9 || p.is_multiple_of(2) {
        return Err(Error::invalid(format!("node count must be odd and >= 9, got {p}")));
    }
    if !(opts.tol > 0.0 && opts.path_tol > 0.0) {
        return Err(Error::invalid("tolerances must be positive"));
    }
    let rv = r.values();
    let end = w0.scale(t0);
    let nodes: Vec<ScalarField> = (0..p)
        .map(|i| {
            if i == 0 {
                dom.zeros()
            } else if i == p - 1 {
                end.clone()
            } else {
                w0.scale(t0 * i as f64 / (p - 1) as f64)
            }
        })
        .collect();
    let values = nodes
        .iter()
        .map(|n| energy::energy_j_raw(dom, rv, n.values()))
        .collect::<Result<Vec<_>>>()?;
    if !(values[p - 1] < 0.0) {
        return Err(Error::precondition(format!(
            "J at the path end is {} (must be negative)",
            values[p - 1]
        )));
    }
    let mut path = MountainPassPath { nodes, values, peak: 0 };
    path.locate_peak();

    let mut trace = Vec::new();
    let push_trace = |trace: &mut Vec<TraceRow>, sweep: usize, path: &MountainPassPath| {
        if opts.trace {
            trace.extend(path.values.iter().enumerate().map(|(node, &j_value)| TraceRow {
                sweep,
                node,
                j_value,
            }));
        }
    };
    push_trace(&mut trace, 0, &path);
    let mut peak_history = vec![path.peak_value()];
    let shifted = Semilinear::shifted(dom, r);

    let mut step = 1.0f64;
    let mut sweeps = 0;
    let mut stop = RelaxationStop::MaxIter;
    while sweeps < opts.max_iter {
        let k = path.peak;
        if k == 0 || k == p - 1 {
            return Err(Error::DegeneratePath(k));
        }
        let x = path.nodes[k].values().to_vec();
        let g: Vec<f64> = shifted.residual(&x)?.into_iter().map(|v| 2.0 * v).collect();
        let pg = dom.solve_shifted(1.0, &g)?;
        let gnorm2 = dom.dot_raw(&g, &pg).max(0.0);
        if gnorm2.sqrt() < opts.path_tol {
            stop = RelaxationStop::GradientTol;
            break;
        }
        // keep the move within half the spacing to the neighbors
        let spacing = h1_distance(dom, path.nodes[k - 1].values(), &x)
            .min(h1_distance(dom, &x, path.nodes[k + 1].values()));
        let s_max = (0.5 * spacing / gnorm2.sqrt()).min(1.0);
        let mut s = (2.0 * step).min(s_max);
        let ridge = path.values[k]
            .max(segment_max(dom, rv, path.nodes[k - 1].values(), &x))
            .max(segment_max(dom, rv, &x, path.nodes[k + 1].values()));
        let moved = loop {
            let cand: Vec<f64> = x.iter().zip(&pg).map(|(a, b)| a - s * b).collect();
            if let Ok(dj) = energy_j_difference(dom, rv, &x, &cand) {
                // the polyline next to the moved node must not rise: no tunneling
                if dj <= -ARMIJO_C * s * gnorm2
                    && segment_max(dom, rv, path.nodes[k - 1].values(), &cand) <= ridge
                    && segment_max(dom, rv, &cand, path.nodes[k + 1].values()) <= ridge
                {
                    break Some(cand);
                }
            }
            s *= 0.5;
            if s < 1e-16 {
                break None;
            }
        };
        let Some(cand) = moved else {
            stop = RelaxationStop::Stalled;
            break;
        };
        step = s;
        path.values[k] = energy::energy_j_raw(dom, rv, &cand)?;
        path.nodes[k] = dom.wrap(cand);
        let old_max = path.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);

        path.locate_peak();
        let cut = (path.peak + 1..p).find(|&i| path.values[i] < 0.0).unwrap_or(p - 1);
        let interior = equidistribute(dom, &path.nodes, path.peak, cut);
        let new_vals: Option<Vec<f64>> = interior
            .iter()
            .map(|n| energy::energy_j_raw(dom, rv, n).ok())
            .collect();
        if let Some(new_vals) = new_vals {
            let new_max = new_vals
                .iter()
                .copied()
                .fold(path.values[0].max(path.values[p - 1]), f64::max);
            if new_max <= old_max {
                for (i, (n, v)) in interior.into_iter().zip(new_vals).enumerate() {
                    path.nodes[i + 1] = dom.wrap(n);
                    path.values[i + 1] = v;
                }
            }
        }
        path.locate_peak();
        sweeps += 1;
        peak_history.push(path.peak_value());
        push_trace(&mut trace, sweeps, &path);
    }
    if path.peak == 0 || path.peak == p - 1 {
        return Err(Error::DegeneratePath(path.peak));
    }

    let newton = NewtonOptions {
        tol: opts.tol,
        max_iter: opts.newton_max_iter,
    };
    let start = refine_peak(dom, rv, &path);
    let mut out = newton_core(&shifted, &start, &newton)?;
    if !out.converged {
        let alt = newton_core(&shifted, path.nodes[path.peak].values(), &newton)?;
        if alt.converged {
            out = alt;
        }
    }
    let u_star = dom.wrap(out.u);
    let level = energy::energy_j(dom, r, &u_star)?;
    let g = energy::grad_j(dom, r, &u_star)?;
    let pg = dom.precondition_gradient(&g)?;
    let grad_h1_norm = dom.l2_inner(&g, &pg)?.max(0.0).sqrt();
    let residual_linf = out.history.last().copied().unwrap_or(f64::INFINITY);
    let ps_identity = energy::constant_mode_pairing(dom, r, &u_star)?.abs();
    Ok(MountainPassOutcome {
        u_star,
        level,
        path,
        sweeps,
        peak_history,
        trace,
        grad_h1_norm,
        residual_linf,
        ps_identity,
        stop,
        converged: stop != RelaxationStop::MaxIter && out.converged,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct SecondSolutionOptions {
    /// eps = eps_fraction · max R.
    pub eps_fraction: f64,
    pub t_cap: f64,
    pub mp: MountainPassOptions,
    pub newton: NewtonOptions,
    /// Required sup-norm distance between u₂ and u₁.
    pub distinct: f64,
    pub eigen_tol: f64,
    pub eigen_max_iter: usize,
}

impl Default for SecondSolutionOptions {
    fn default() -> Self {
        SecondSolutionOptions {
            eps_fraction: 0.1,
            t_cap: 1e4,
            mp: MountainPassOptions::default(),
            newton: NewtonOptions::default(),
            distinct: 0.1,
            eigen_tol: spectral::DEFAULT_EIGEN_TOL,
            eigen_max_iter: spectral::DEFAULT_EIGEN_MAX_ITER,
        }
    }
}

impl SecondSolutionOptions {
    pub fn for_domain(dom: &DiscreteDomain) -> Self {
        let tol = solvers::default_tol(dom);
        SecondSolutionOptions {
            mp: MountainPassOptions {
                tol,
                ..MountainPassOptions::default()
            },
            newton: NewtonOptions {
                tol,
                ..NewtonOptions::default()
            },
            ..SecondSolutionOptions::default()
        }
    }
}

/// Everything produced on the way to u₂.
#[derive(Debug, Clone)]
pub struct SecondSolution {
    pub record: SolutionRecord,
    pub weight: ScalarField,
    pub eps: f64,
    pub w0: ScalarField,
    pub t0: f64,
    pub pass: MountainPassOutcome,
}

/// `u₂ = u₁ + u*` with `u*` a mountain-pass critical point of J.
pub fn second_solution(
    spec: &ProblemSpec,
    u1: &SolutionRecord,
    opts: &SecondSolutionOptions,
) -> Result<SecondSolution> {
    if !u1.converged {
        return Err(Error::precondition("the first solution is not converged"));
    }
    let dom = spec.domain();
    let weight = energy::shifted_weight(spec, &u1.u).map_err(|e| e.at_stage("shifted weight"))?;
    let r = weight.r;
    if !(r.max() > 0.0) {
        return Err(Error::Inadmissible("R = K e^{2u1} has no positive values".into()).at_stage("build_w0"));
    }
    let eps = opts.eps_fraction * r.max();
    let w0 = build_w0(dom, &r, eps).map_err(|e| e.at_stage("build_w0"))?;
    let t0 = find_t0(dom, &r, &w0, opts.t_cap).map_err(|e| e.at_stage("find_t0"))?;
    let pass = mountain_pass_solve(dom, &r, &w0, t0, &opts.mp).map_err(|e| e.at_stage("mountain pass"))?;
    let guess = u1.u.add(&pass.u_star)?;
    let polished = solvers::newton_polish(spec, &guess, &opts.newton).map_err(|e| e.at_stage("newton polish"))?;
    let distance = polished.u.sup_distance(&u1.u)?;
    if distance <= opts.distinct {
        return Err(Error::CollapsedToFirst { distance });
    }
    let mut record = SolutionRecord {
        method: Method::MountainPass,
        iterations: pass.sweeps + polished.iterations,
        converged: polished.converged && pass.converged,
        ..polished
    };
    if record.converged {
        let eig = spectral::principal_eigen(spec, &record.u, opts.eigen_tol, opts.eigen_max_iter)
            .map_err(|e| e.at_stage("principal eigenvalue"))?;
        record.lambda_min = Some(eig.lambda_min);
    }
    Ok(SecondSolution {
        record,
        weight: r,
        eps,
        w0,
        t0,
        pass,
    })
}
