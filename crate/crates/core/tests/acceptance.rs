//! Acceptance suite: one test per criterion, each printing a single
//! `PASS`/`FAIL` line before asserting. Run with `--nocapture` to see the
//! lines of passing tests as well.

mod common;

use std::f64::consts::PI;
use std::sync::OnceLock;

use kwlab::cli::{parse_config_file, DomainConfig, KConfig};
use kwlab::continuation::is_up_set;
use kwlab::energy::pointwise_residual;
use kwlab::mountainpass::SecondSolution;
use kwlab::prelude::*;
use kwlab::solvers::{convex_minimize, monotone_solve_traced, newton_continuation, ConvexOptions};

fn verdict(n: u32, name: &str, pass: bool, detail: String) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("{tag} criterion {n} ({name}): {detail}");
}

fn info(n: u32, detail: String) {
    println!("     criterion {n} info: {detail}");
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn fixed(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3}")).collect();
    format!("[{}]", parts.join(", "))
}

fn torus64() -> DiscreteDomain {
    DiscreteDomain::torus(1.0, 64).unwrap()
}

fn cosine(dom: &DiscreteDomain, amp: f64, offset: f64) -> ScalarField {
    sample_k(dom, &KFamily::from_name("cosine", &[amp, offset]).unwrap()).unwrap()
}

/// The shipped reference instance.
fn reference_spec() -> ProblemSpec {
    let cfg = parse_config_file(common::asset("configs/reference.conf")).unwrap();
    let dom = match cfg.domain {
        DomainConfig::Torus { length, n, .. } => {
            DiscreteDomain::torus_with_stencil(length, n, cfg.domain.stencil()).unwrap()
        }
        DomainConfig::Mesh { .. } => panic!("reference instance is on the torus"),
    };
    let k = match &cfg.k {
        KConfig::Family { family, params } => {
            sample_k(&dom, &KFamily::from_name(family, params).unwrap()).unwrap()
        }
        _ => panic!("reference K is a named family"),
    };
    ProblemSpec::new(dom, k, cfg.alpha.unwrap()).unwrap()
}

fn reference_pair() -> &'static (ProblemSpec, SolutionRecord, SecondSolution) {
    static PAIR: OnceLock<(ProblemSpec, SolutionRecord, SecondSolution)> = OnceLock::new();
    PAIR.get_or_init(|| {
        let spec = reference_spec();
        let first = solve_min(&spec, &FirstSolutionOptions::default()).unwrap();
        let second = second_solution(&spec, &first, &SecondSolutionOptions::default()).unwrap();
        (spec, first, second)
    })
}

/// Recovery through the standard pipeline: monotone iteration below the
/// automatic super solution, then Newton.
fn recover(dom: &DiscreteDomain, k: ScalarField, alpha: f64) -> kwlab::Result<SolutionRecord> {
    let spec = ProblemSpec::new(dom.clone(), k, alpha)?;
    solve_min(&spec, &FirstSolutionOptions::default())
}

fn continuum_k(amp: f64, alpha: f64) -> impl Fn([f64; 3]) -> f64 {
    move |p| {
        let c = (2.0 * PI * p[0]).cos();
        (amp * 4.0 * PI * PI * c + alpha) * (-2.0 * amp * c).exp()
    }
}

/// Sup error against `u*` and the successive error ratios on the
/// five-point grids N = 32, 64, 128 with K sampled from its formula.
fn fd_order(amp: f64, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    let errors: Vec<f64> = [32, 64, 128]
        .iter()
        .map(|&n| {
            let dom = DiscreteDomain::torus_with_stencil(1.0, n, Stencil::FivePoint).unwrap();
            let k = dom.field_from_fn(continuum_k(amp, alpha));
            let u_star = dom.field_from_fn(|p| amp * (2.0 * PI * p[0]).cos());
            match recover(&dom, k, alpha) {
                Ok(rec) => rec.u.sup_distance(&u_star).unwrap(),
                Err(_) => f64::INFINITY,
            }
        })
        .collect();
    let ratios = errors.windows(2).map(|w| w[0] / w[1]).collect();
    (errors, ratios)
}

#[test]
fn criterion_1_manufactured_recovery() {
    let alpha = -1.0;
    let dom = torus64();
    let u_star = dom.field_from_fn(|p| 0.3 * (2.0 * PI * p[0]).cos());
    let k = manufacture(&dom, &u_star, alpha).unwrap();
    let spectral_err = match recover(&dom, k.clone(), alpha) {
        Ok(rec) => rec.u.sup_distance(&u_star).unwrap(),
        Err(_) => f64::INFINITY,
    };
    let (errors, ratios) = fd_order(0.3, alpha);
    let order_ok = ratios.iter().all(|r| (r - 4.0).abs() <= 0.3);
    let pass = spectral_err < 1e-9 && order_ok;
    verdict(
        1,
        "manufactured recovery",
        pass,
        format!(
            "spectral |u - u*| = {spectral_err:.3e} (< 1e-9); fd errors {}, ratios {} (4 +- 0.3)",
            sci(&errors),
            fixed(&ratios)
        ),
    );

    let spec = ProblemSpec::new(dom.clone(), k, alpha).unwrap();
    let at_star = principal_eigen(&spec, &u_star, 1e-10, 5000).unwrap();
    info(
        1,
        format!(
            "lambda_min at u* = {:.4}: u* is a linearly unstable solution",
            at_star.lambda_min
        ),
    );
    let u_small = dom.field_from_fn(|p| 0.1 * (2.0 * PI * p[0]).cos());
    let k_small = manufacture(&dom, &u_small, alpha).unwrap();
    let small_err = recover(&dom, k_small, alpha)
        .map(|r| r.u.sup_distance(&u_small).unwrap())
        .unwrap_or(f64::INFINITY);
    let (small_errors, small_ratios) = fd_order(0.1, alpha);
    info(
        1,
        format!(
            "amplitude 0.1: spectral error {small_err:.3e}, fd errors {}, ratios {}",
            sci(&small_errors),
            fixed(&small_ratios)
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_2_constant_solution() {
    let dom = torus64();
    let spec = ProblemSpec::new(dom.clone(), dom.constant(-2.0), -1.0).unwrap();
    let rec = solve_min(&spec, &FirstSolutionOptions::default()).unwrap();
    let exact = 0.5 * 0.5f64.ln();
    let err = rec.u.sup_distance(&dom.constant(exact)).unwrap();
    let lambda = rec.lambda_min.unwrap();
    let pass = err < 1e-10 && (lambda - 2.0).abs() < 1e-6 && rec.identity_gap < 1e-10;
    verdict(
        2,
        "constant exact solution",
        pass,
        format!(
            "|u - ln(0.5)/2| = {err:.3e}, lambda_min = {lambda:.12}, identity_gap = {:.3e}",
            rec.identity_gap
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_3_gradient_consistency() {
    let dom = torus64();
    let k = cosine(&dom, 1.0, -0.2);
    let (f, j) = common::gradient_consistency(&dom, &k, 3, 20);
    let pass = f < 1e-6 && j < 1e-6;
    verdict(
        3,
        "gradient consistency",
        pass,
        format!("20 samples, worst relative error F {f:.3e}, J {j:.3e} (< 1e-6)"),
    );
    assert!(pass);
}

#[test]
fn criterion_4_two_solutions() {
    let (spec, u1, s) = reference_pair();
    let u2 = &s.record;
    let dist = u2.u.sup_distance(&u1.u).unwrap();
    let l1 = u1.lambda_min.unwrap();
    let pass = dist > 0.1
        && u1.residual_linf < 1e-8
        && u2.residual_linf < 1e-8
        && u1.identity_gap < 1e-6
        && u2.identity_gap < 1e-6
        && u1.energy_f < u2.energy_f
        && l1 >= -1e-8
        && u2.lambda_min.is_some();
    verdict(
        4,
        "two solutions",
        pass,
        format!(
            "alpha = {}, |u2 - u1| = {dist:.4}, residuals {:.2e}/{:.2e}, gaps {:.2e}/{:.2e}, F {:.5} < {:.5}, lambda_min {l1:.4} / {:?}",
            spec.alpha(),
            u1.residual_linf,
            u2.residual_linf,
            u1.identity_gap,
            u2.identity_gap,
            u1.energy_f,
            u2.energy_f,
            u2.lambda_min
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_5_mountain_pass_structure() {
    let (spec, _, s) = reference_pair();
    let dom = spec.domain();
    let hist = &s.pass.peak_history;
    let worst_rise = hist.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let monotone = hist.windows(2).all(|w| w[1] <= w[0]);
    let start = energy_j(dom, &s.weight, &s.w0.scale(s.t0)).unwrap();
    let ps_bound = 1e-6 * dom.volume();
    let pass = monotone && s.pass.level >= -1e-8 && start < -1.0 && s.pass.ps_identity < ps_bound;
    verdict(
        5,
        "mountain-pass structure",
        pass,
        format!(
            "{} sweeps, largest peak change {worst_rise:.3e}, level {:.6}, J(t0 w0) = {start:.3e} (t0 = {}), PS identity {:.3e} (< {ps_bound:.0e})",
            s.pass.sweeps, s.pass.level, s.t0, s.pass.ps_identity
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_6_dichotomy() {
    let dom = torus64();
    let k_neg = cosine(&dom, -0.5, -0.5);
    let alphas = [-10.0, -5.0, -1.0, -0.1];
    let sweep = alpha_sweep(&dom, &k_neg, &alphas, &SweepConfig::default()).unwrap();
    let all_solvable = sweep.iter().all(|r| r.solvable);

    let mut agreement = 0.0f64;
    for &alpha in &alphas {
        let spec = ProblemSpec::new(dom.clone(), k_neg.clone(), alpha).unwrap();
        let upper = super_solution_kneg(&spec).unwrap();
        let c = sub_solution_constant(&spec).unwrap();
        let mono = monotone_solve(&spec, c, &upper, &MonotoneOptions::default()).unwrap();
        let convex = convex_minimize(&spec, &upper, &ConvexOptions::default()).unwrap();
        agreement = agreement.max(mono.u.sup_distance(&convex.u).unwrap());
    }

    let k = cosine(&dom, 1.0, -0.2);
    let est = estimate_alpha0(&dom, &k, (-0.6, -0.1), 0.01, &SweepConfig::default()).unwrap();
    let (lo, hi) = est.interval;
    let mut probed = est.transcript.clone();
    probed.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
    let lowest_solvable = probed.iter().find(|r| r.solvable).map(|r| r.alpha).unwrap();
    let probes_up_set = probed.iter().all(|r| r.solvable == (r.alpha >= lowest_solvable));
    let grid: Vec<f64> = (0..12).map(|i| -0.6 + 0.05 * i as f64).collect();
    let grid_sweep = alpha_sweep(&dom, &k, &grid, &SweepConfig::default()).unwrap();
    let straddles = probed.iter().any(|r| r.alpha == lo && !r.solvable)
        && probed.iter().any(|r| r.alpha == hi && r.solvable);

    let pass = all_solvable
        && agreement < 1e-6
        && straddles
        && hi - lo < 0.01
        && est.probes <= 20
        && probes_up_set
        && is_up_set(&grid_sweep);
    verdict(
        6,
        "K <= 0 dichotomy and alpha0",
        pass,
        format!(
            "K <= 0 sweep solvable {all_solvable}, convex vs monotone {agreement:.3e}; alpha0 in ({lo}, {hi}) after {} probes, up-set {} / grid up-set {}",
            est.probes,
            probes_up_set,
            is_up_set(&grid_sweep)
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_7_certificates() {
    let dom = torus64();
    let mut ok = true;
    let mut worst_outside = 0.0f64;
    let mut worst_sub = f64::INFINITY;

    let k_neg = cosine(&dom, -0.5, -0.5);
    let mut cases = Vec::new();
    for alpha in [-10.0, -1.0, -0.1] {
        let spec = ProblemSpec::new(dom.clone(), k_neg.clone(), alpha).unwrap();
        let upper = super_solution_kneg(&spec).unwrap();
        ok &= pointwise_residual(&spec, &upper).unwrap().min() >= 0.0;
        cases.push((spec, upper));
    }

    let k = cosine(&dom, 1.0, -0.2);
    let spec = ProblemSpec::new(dom.clone(), k.clone(), -0.3).unwrap();
    let alpha_prev = -0.3 * 1.05;
    let prev = newton_continuation(&spec.with_alpha(alpha_prev).unwrap(), None, &NewtonOptions::default()).unwrap();
    let upper = super_solution_continuation(&spec, &prev, alpha_prev).unwrap();
    let margin = pointwise_residual(&spec, &upper).unwrap().min();
    ok &= margin >= (spec.alpha() - alpha_prev) - 1e-6;
    cases.push((spec, upper));

    for (spec, upper) in &cases {
        let c = sub_solution_constant(spec).unwrap();
        let e = (2.0 * c).exp();
        let sub_min = spec
            .k()
            .values()
            .iter()
            .map(|kv| kv * e - spec.alpha())
            .fold(f64::INFINITY, f64::min);
        worst_sub = worst_sub.min(sub_min);
        let (_, steps) = monotone_solve_traced(spec, c, upper, &MonotoneOptions::default()).unwrap();
        for s in &steps {
            worst_outside = worst_outside.max(s.max_increase).max(c - s.min);
        }
    }
    let pass = ok && worst_sub > 0.0 && worst_outside <= 1e-12;
    verdict(
        7,
        "super/sub certificates",
        pass,
        format!(
            "super margins hold {ok} (continuation margin {margin:.3e}), min K e^2c - alpha = {worst_sub:.3e}, largest excursion of iterates {worst_outside:.3e}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_8_mesh_backend() {
    let dom = common::genus2();
    let mesh = dom.as_mesh().unwrap();
    let chi = mesh.vertex_count() as i64 - mesh.edge_count() as i64 + mesh.face_count() as i64;

    let spec = ProblemSpec::new(dom.clone(), dom.constant(-2.0), -1.0).unwrap();
    let rec = solve_min(&spec, &FirstSolutionOptions::for_domain(&dom)).unwrap();
    let err = rec.u.sup_distance(&dom.constant(0.5 * 0.5f64.ln())).unwrap();
    let lambda = rec.lambda_min.unwrap();
    let constant_ok = err < 1e-6 && (lambda - 2.0).abs() < 1e-6 && rec.identity_gap < 1e-6;

    let k = cosine(&dom, 1.0, -0.2);
    let (f, j) = common::gradient_consistency(&dom, &k, 8, 20);
    let pass = chi == -2 && constant_ok && f < 1e-4 && j < 1e-4;
    verdict(
        8,
        "mesh backend",
        pass,
        format!(
            "chi = {chi}; constant solution error {err:.3e}, lambda_min {lambda:.9}, gap {:.3e}; gradient errors F {f:.3e}, J {j:.3e}",
            rec.identity_gap
        ),
    );
    assert!(pass);
}
