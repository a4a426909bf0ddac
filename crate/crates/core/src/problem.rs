//! Problem instances, curvature-candidate families, manufactured data and
//! the explicit super/sub-solution constructions.

use serde::Serialize;

use crate::domain::{Backend, DiscreteDomain, ScalarField};
use crate::energy::{self, exp2u, EXP_CAP};
use crate::error::{Error, Result};

/// Margin subtracted from the critical constant in the sub-solution.
pub const SUB_SOLUTION_MARGIN: f64 = 1.0;
/// Safety factor on `b` in the K ≤ 0 super-solution.
pub const SUPER_SOLUTION_FACTOR: f64 = 1.1;
/// Residual required of a previous solution reused as a super solution.
pub const CONTINUATION_RESIDUAL_TOL: f64 = 1e-6;

/// One instance of `−Δu + α = K e^{2u}`.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    domain: DiscreteDomain,
    k: ScalarField,
    alpha: f64,
}

/// Sign structure of K relevant to the existence results.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationReport {
    pub k_max: f64,
    pub k_min: f64,
    pub k_mean: f64,
    pub sign_changing: bool,
    /// K > 0 somewhere, mean(K) < 0 and α < 0.
    pub admissible_for_theorem2: bool,
}

impl ProblemSpec {
    pub fn new(domain: DiscreteDomain, k: ScalarField, alpha: f64) -> Result<Self> {
        domain.check(&k)?;
        if !k.is_finite() {
            return Err(Error::invalid("K has non-finite values"));
        }
        if !(alpha < 0.0) || !alpha.is_finite() {
            return Err(Error::invalid(format!("alpha must be negative, got {alpha}")));
        }
        Ok(ProblemSpec { domain, k, alpha })
    }

    pub fn domain(&self) -> &DiscreteDomain {
        &self.domain
    }

    pub fn k(&self) -> &ScalarField {
        &self.k
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Same domain and K at a different α.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        ProblemSpec::new(self.domain.clone(), self.k.clone(), alpha)
    }

    pub fn k_mean(&self) -> f64 {
        self.domain.integrate_raw(self.k.values()) / self.domain.volume()
    }
}

pub fn validate_spec(spec: &ProblemSpec) -> ValidationReport {
    let k_max = spec.k.max();
    let k_min = spec.k.min();
    let k_mean = spec.k_mean();
    ValidationReport {
        k_max,
        k_min,
        k_mean,
        sign_changing: k_max > 0.0 && k_min < 0.0,
        admissible_for_theorem2: k_max > 0.0 && k_mean < 0.0 && spec.alpha < 0.0,
    }
}

/// Named analytic families for K.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum KFamily {
    /// K ≡ value.
    Constant { value: f64 },
    /// K = amp·cos(2πx/period) + offset. The period defaults to the torus
    /// side, or to the x-extent of a mesh.
    Cosine {
        amp: f64,
        offset: f64,
        period: Option<f64>,
    },
    /// K = baseline + A·(g₁ + g₂) with Gaussian bumps of the given width at a
    /// quarter and three quarters of the diagonal; A is solved from the
    /// discrete quadrature so that mean(K) = mean.
    TwoBumps {
        mean: f64,
        width: Option<f64>,
        baseline: f64,
    },
}

impl KFamily {
    /// Parses a family name with its positional parameters:
    /// `constant v`, `cosine amp offset [period]`,
    /// `two-bumps mean [width [baseline]]`.
    pub fn from_name(name: &str, params: &[f64]) -> Result<Self> {
        let arity = |lo: usize, hi: usize| -> Result<()> {
            if params.len() < lo || params.len() > hi {
                Err(Error::invalid(format!(
                    "family `{name}` takes {lo}..={hi} parameters, got {}",
                    params.len()
                )))
            } else {
                Ok(())
            }
        };
        match name {
            "constant" => {
                arity(1, 1)?;
                Ok(KFamily::Constant { value: params[0] })
            }
            "cosine" => {
                arity(2, 3)?;
                Ok(KFamily::Cosine {
                    amp: params[0],
                    offset: params[1],
                    period: params.get(2).copied(),
                })
            }
            "two-bumps" => {
                arity(1, 3)?;
                Ok(KFamily::TwoBumps {
                    mean: params[0],
                    width: params.get(1).copied(),
                    baseline: params.get(2).copied().unwrap_or(-1.0),
                })
            }
            other => Err(Error::invalid(format!("unknown K family `{other}`"))),
        }
    }
}

fn extent(dom: &DiscreteDomain, axis: usize) -> (f64, f64) {
    dom.points().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        (lo.min(p[axis]), hi.max(p[axis]))
    })
}

/// Distance between two points; minimum-image on the torus.
fn distance(dom: &DiscreteDomain, a: [f64; 3], b: [f64; 3]) -> f64 {
    match dom.backend() {
        Backend::Torus(t) => {
            let l = t.length();
            let wrap = |d: f64| {
                let d = d.rem_euclid(l);
                d.min(l - d)
            };
            wrap(a[0] - b[0]).hypot(wrap(a[1] - b[1]))
        }
        Backend::Mesh(_) => {
            let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
            (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
        }
    }
}

pub(crate) fn point_distance(dom: &DiscreteDomain, a: [f64; 3], b: [f64; 3]) -> f64 {
    distance(dom, a, b)
}

/// Evaluates a K family at the points of `dom`.
pub fn sample_k(dom: &DiscreteDomain, family: &KFamily) -> Result<ScalarField> {
    let check = |v: f64, what: &str| -> Result<f64> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::invalid(format!("{what} must be finite")))
        }
    };
    match *family {
        KFamily::Constant { value } => Ok(dom.constant(check(value, "constant")?)),
        KFamily::Cosine { amp, offset, period } => {
            check(amp, "amplitude")?;
            check(offset, "offset")?;
            let period = match (period, dom.backend()) {
                (Some(p), _) => p,
                (None, Backend::Torus(t)) => t.length(),
                (None, Backend::Mesh(_)) => {
                    let (lo, hi) = extent(dom, 0);
                    hi - lo
                }
            };
            if !(period > 0.0) || !period.is_finite() {
                return Err(Error::invalid("cosine period must be positive"));
            }
            let k = 2.0 * std::f64::consts::PI / period;
            Ok(dom.field_from_fn(|p| amp * (k * p[0]).cos() + offset))
        }
        KFamily::TwoBumps { mean, width, baseline } => {
            check(mean, "mean")?;
            check(baseline, "baseline")?;
            if !(mean > baseline) {
                return Err(Error::invalid(format!(
                    "two-bumps target mean {mean} must exceed the baseline {baseline}"
                )));
            }
            let (c1, c2, scale) = match dom.backend() {
                Backend::Torus(t) => {
                    let l = t.length();
                    ([0.25 * l, 0.25 * l, 0.0], [0.75 * l, 0.75 * l, 0.0], l)
                }
                Backend::Mesh(_) => {
                    let ex = [extent(dom, 0), extent(dom, 1), extent(dom, 2)];
                    let at = |s: f64| {
                        [
                            ex[0].0 + s * (ex[0].1 - ex[0].0),
                            ex[1].0 + s * (ex[1].1 - ex[1].0),
                            ex[2].0 + s * (ex[2].1 - ex[2].0),
                        ]
                    };
                    let diag = (ex.iter().map(|(a, b)| (b - a).powi(2)).sum::<f64>()).sqrt();
                    (at(0.25), at(0.75), diag)
                }
            };
            let sigma = width.unwrap_or(0.1 * scale);
            if !(sigma > 0.0) || !sigma.is_finite() {
                return Err(Error::invalid("two-bumps width must be positive"));
            }
            let bumps = dom.field_from_fn(|p| {
                let g = |c: [f64; 3]| {
                    let d = distance(dom, p, c);
                    (-d * d / (2.0 * sigma * sigma)).exp()
                };
                g(c1) + g(c2)
            });
            let bump_mean = dom.mean(&bumps)?;
            if !(bump_mean > 0.0) {
                return Err(Error::invalid("two-bumps width too small for this resolution"));
            }
            let amplitude = (mean - baseline) / bump_mean;
            Ok(bumps.map(|g| baseline + amplitude * g))
        }
    }
}

/// K = (−Δu* + α) e^{−2u*}, so that u* solves the discrete equation exactly.
pub fn manufacture(dom: &DiscreteDomain, u_star: &ScalarField, alpha: f64) -> Result<ScalarField> {
    dom.check(u_star)?;
    if !(alpha < 0.0) || !alpha.is_finite() {
        return Err(Error::invalid(format!("alpha must be negative, got {alpha}")));
    }
    if u_star.norm_inf() > EXP_CAP {
        return Err(Error::Diverged("manufactured field exceeds the exponential cap".into()));
    }
    let lu = dom.neg_laplacian_vec(u_star.values());
    let k = lu
        .iter()
        .zip(u_star.values())
        .map(|(l, u)| (l + alpha) * (-2.0 * u).exp())
        .collect();
    dom.field(k)
}

/// Constant sub solution c = ½ ln(|α| / max(−K)) − 1.
///
/// Satisfies K e^{2c} − α ≥ (1 − e^{−2})|α| > 0 at every point.
pub fn sub_solution_constant(spec: &ProblemSpec) -> Result<f64> {
    let neg_max = -spec.k.min();
    if !(neg_max > 0.0) {
        return Err(Error::precondition("constant sub solution needs min K < 0"));
    }
    let c = 0.5 * (spec.alpha.abs() / neg_max).ln() - SUB_SOLUTION_MARGIN;
    let e = (2.0 * c).exp();
    if let Some(i) = spec.k.values().iter().position(|&k| !(k * e - spec.alpha > 0.0)) {
        return Err(Error::ConstructionFailure(format!(
            "sub-solution inequality fails at point {i}"
        )));
    }
    Ok(c)
}

/// Super solution for K ≤ 0: v = b·w + ½ ln b, where −Δw = K − K̄ shifted to
/// min w = 1 and b = 1.1·max(1, |α|/|K̄|). Verified pointwise.
pub fn super_solution_kneg(spec: &ProblemSpec) -> Result<ScalarField> {
    let dom = &spec.domain;
    if spec.k.max() > 0.0 {
        return Err(Error::precondition(format!(
            "K must be non-positive, max K = {}",
            spec.k.max()
        )));
    }
    let k_mean = spec.k_mean();
    if !(k_mean < 0.0) {
        return Err(Error::precondition("K must be nontrivial"));
    }
    let rhs = spec.k.shift(-k_mean);
    // K constant up to rounding: w is flat
    let w0 = if rhs.norm_inf() <= 1e-12 * spec.k.norm_inf() {
        dom.zeros()
    } else {
        let residual_mean = dom.mean(&rhs)?;
        dom.poisson_solve(&rhs.shift(-residual_mean))?
    };
    let w = w0.shift(1.0 - w0.min());
    let b = SUPER_SOLUTION_FACTOR * (spec.alpha.abs() / k_mean.abs()).max(1.0);
    let r = 0.5 * b.ln();
    let v = w.map(|wi| b * wi + r);
    let margin = energy::pointwise_residual(spec, &v).map_err(|e| {
        Error::ConstructionFailure(format!("super solution cannot be evaluated: {e}"))
    })?;
    if let Some(i) = margin.values().iter().position(|&m| !(m >= 0.0)) {
        return Err(Error::ConstructionFailure(format!(
            "super-solution inequality fails at point {i} (value {:e})",
            margin.values()[i]
        )));
    }
    Ok(v)
}

/// A solution at α_prev < α is a super solution at α; verifies the margin
/// −Δu + α − K e^{2u} ≥ (α − α_prev) − 1e−6 pointwise and returns it.
pub fn super_solution_continuation(
    spec: &ProblemSpec,
    u_prev: &ScalarField,
    alpha_prev: f64,
) -> Result<ScalarField> {
    spec.domain.check(u_prev)?;
    if !(alpha_prev < spec.alpha) {
        return Err(Error::precondition(format!(
            "previous alpha {alpha_prev} must be strictly below {}",
            spec.alpha
        )));
    }
    let prev = spec.with_alpha(alpha_prev)?;
    let res = energy::residual(&prev, u_prev)?;
    if !(res.linf < CONTINUATION_RESIDUAL_TOL) {
        return Err(Error::precondition(format!(
            "previous field has residual {:e} at alpha {alpha_prev}",
            res.linf
        )));
    }
    let margin = energy::pointwise_residual(spec, u_prev)?;
    let required = (spec.alpha - alpha_prev) - CONTINUATION_RESIDUAL_TOL;
    if let Some(i) = margin.values().iter().position(|&m| !(m >= required)) {
        return Err(Error::precondition(format!(
            "continuation margin {:e} below {required:e} at point {i}",
            margin.values()[i]
        )));
    }
    Ok(u_prev.clone())
}

/// True when `exp2u` would accept every value.
pub(crate) fn within_cap(u: &ScalarField) -> bool {
    exp2u(u.values()).is_ok()
}
