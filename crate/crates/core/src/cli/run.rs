use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use super::config::{parse_config_file, Command, DomainConfig, KConfig, RunConfig};
use crate::continuation::{alpha_sweep, estimate_alpha0, is_up_set, SweepConfig, SweepRecord};
use crate::domain::{DiscreteDomain, ScalarField};
use crate::error::{Error, Result};
use crate::io;
use crate::mountainpass::{MountainPassOptions, SecondSolutionOptions};
use crate::problem::{self, KFamily, ProblemSpec};
use crate::solvers::{self, FirstSolutionOptions, NewtonOptions, SolutionRecord};
use crate::spectral;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub exit_code: i32,
    /// Contents written to `run.json`.
    pub report: Value,
    /// Every artifact written, `run.json` included.
    pub files: Vec<PathBuf>,
}

struct Artifacts {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Artifacts {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn field(&mut self, name: &str, dom: &DiscreteDomain, u: &ScalarField) -> Result<String> {
        let path = self.dir.join(name);
        io::write_field(&path, dom, u)?;
        self.files.push(path);
        Ok(name.to_string())
    }

    fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path).map_err(csv_error)?;
        for row in rows {
            w.serialize(row).map_err(csv_error)?;
        }
        w.flush()?;
        self.files.push(path);
        Ok(())
    }
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::invalid(format!("CSV output failed: {other:?}")),
    }
}

fn build_domain(cfg: &RunConfig) -> Result<DiscreteDomain> {
    match &cfg.domain {
        DomainConfig::Torus { length, n, .. } => {
            DiscreteDomain::torus_with_stencil(*length, *n, cfg.domain.stencil())
        }
        DomainConfig::Mesh { path } => DiscreteDomain::from_off_file(cfg.resolve_input(path)),
    }
}

fn build_k(cfg: &RunConfig, dom: &DiscreteDomain) -> Result<ScalarField> {
    match &cfg.k {
        KConfig::Family { family, params } => problem::sample_k(dom, &KFamily::from_name(family, params)?),
        KConfig::File { path } => io::read_field(cfg.resolve_input(path), dom),
        KConfig::Manufactured => {
            let u_star = manufactured_target(cfg, dom)?;
            problem::manufacture(dom, &u_star, alpha_of(cfg)?)
        }
    }
}

fn manufactured_target(cfg: &RunConfig, dom: &DiscreteDomain) -> Result<ScalarField> {
    problem::sample_k(dom, &KFamily::from_name(&cfg.manufacture.family, &cfg.manufacture.params)?)
}

fn alpha_of(cfg: &RunConfig) -> Result<f64> {
    cfg.alpha
        .ok_or_else(|| Error::invalid(format!("command {:?} needs problem.alpha", cfg.command)))
}

fn first_options(cfg: &RunConfig) -> FirstSolutionOptions {
    FirstSolutionOptions {
        tol: cfg.solver.tol,
        max_iter: cfg.solver.max_iter,
        newton: newton_options(cfg),
        eigen_tol: cfg.solver.eigen_tol,
        eigen_max_iter: cfg.solver.eigen_max_iter,
        ..FirstSolutionOptions::default()
    }
}

fn newton_options(cfg: &RunConfig) -> NewtonOptions {
    NewtonOptions {
        tol: cfg.solver.tol,
        max_iter: cfg.solver.newton_max_iter,
    }
}

fn sweep_options(cfg: &RunConfig) -> SweepConfig {
    SweepConfig {
        tol: cfg.solver.tol,
        max_iter: cfg.solver.max_iter,
        newton_max_iter: cfg.solver.newton_max_iter,
        eigen_tol: cfg.solver.eigen_tol,
        eigen_max_iter: cfg.solver.eigen_max_iter,
        ..SweepConfig::default()
    }
}

fn record_json(rec: &SolutionRecord, file: &str) -> Result<Value> {
    let mut v = serde_json::to_value(rec)?;
    v["u_file"] = json!(file);
    Ok(v)
}

#[derive(Serialize)]
struct SweepRow {
    alpha: f64,
    solvable: bool,
    residual_linf: Option<f64>,
    #[serde(rename = "energy_F")]
    energy_f: Option<f64>,
    lambda_min: Option<f64>,
    iterations: Option<usize>,
}

impl From<&SweepRecord> for SweepRow {
    fn from(r: &SweepRecord) -> Self {
        let rec = r.record.as_ref();
        SweepRow {
            alpha: r.alpha,
            solvable: r.solvable,
            residual_linf: rec.map(|x| x.residual_linf),
            energy_f: rec.map(|x| x.energy_f),
            lambda_min: r.lambda_min,
            iterations: rec.map(|x| x.iterations),
        }
    }
}

fn status(ok: bool) -> (i32, &'static str) {
    if ok {
        (EXIT_OK, "ok")
    } else {
        (EXIT_NOT_CONVERGED, "not-converged")
    }
}

/// Executes the configured command and writes its artifacts.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    let dom = build_domain(cfg)?;
    let k = build_k(cfg, &dom)?;
    let mut out = Artifacts::new(&cfg.output)?;
    let mut result = serde_json::Map::new();

    let ok = match cfg.command {
        Command::Validate => {
            let spec = ProblemSpec::new(dom.clone(), k, alpha_of(cfg)?)?;
            result.insert("validation".into(), serde_json::to_value(problem::validate_spec(&spec))?);
            result.insert(
                "domain".into(),
                json!({
                    "kind": dom.kind_name(),
                    "points": dom.len(),
                    "volume": dom.volume(),
                    "euler_characteristic": dom.euler_characteristic(),
                }),
            );
            true
        }
        Command::SolveMin => {
            let spec = ProblemSpec::new(dom.clone(), k, alpha_of(cfg)?)?;
            let rec = solvers::solve_min(&spec, &first_options(cfg))?;
            let file = out.field("u1.kwf", &dom, &rec.u)?;
            result.insert("records".into(), json!([record_json(&rec, &file)?]));
            rec.converged
        }
        Command::SolveSecond => {
            let spec = ProblemSpec::new(dom.clone(), k, alpha_of(cfg)?)?;
            let first = solvers::solve_min(&spec, &first_options(cfg))?;
            let f1 = out.field("u1.kwf", &dom, &first.u)?;
            if !first.converged {
                result.insert("records".into(), json!([record_json(&first, &f1)?]));
                false
            } else {
                let opts = SecondSolutionOptions {
                    eps_fraction: cfg.mp.eps_fraction,
                    t_cap: cfg.mp.t_cap,
                    mp: MountainPassOptions {
                        nodes: cfg.mp.nodes,
                        tol: cfg.solver.tol,
                        path_tol: cfg.mp.path_tol,
                        max_iter: cfg.mp.max_iter,
                        trace: cfg.mp.trace,
                        ..MountainPassOptions::default()
                    },
                    newton: newton_options(cfg),
                    distinct: cfg.mp.distinct,
                    eigen_tol: cfg.solver.eigen_tol,
                    eigen_max_iter: cfg.solver.eigen_max_iter,
                };
                let second = crate::mountainpass::second_solution(&spec, &first, &opts)?;
                let f2 = out.field("u2.kwf", &dom, &second.record.u)?;
                if cfg.mp.trace {
                    out.csv("path_trace.csv", &second.pass.trace)?;
                    for (i, node) in second.pass.path.nodes.iter().enumerate() {
                        out.field(&format!("path_node_{i:02}.kwf"), &dom, node)?;
                    }
                }
                let pass = &second.pass;
                result.insert(
                    "records".into(),
                    json!([record_json(&first, &f1)?, record_json(&second.record, &f2)?]),
                );
                result.insert(
                    "mountain_pass".into(),
                    json!({
                        "eps": second.eps,
                        "t0": second.t0,
                        "level": pass.level,
                        "sweeps": pass.sweeps,
                        "stop": pass.stop,
                        "peak_level_initial": pass.peak_history.first(),
                        "peak_level_final": pass.peak_history.last(),
                        "grad_h1_norm": pass.grad_h1_norm,
                        "ps_identity": pass.ps_identity,
                        "u_star_sup": pass.u_star.norm_inf(),
                        "distance_u2_u1": second.record.u.sup_distance(&first.u)?,
                    }),
                );
                second.record.converged
            }
        }
        Command::Sweep => {
            let recs = alpha_sweep(&dom, &k, &cfg.sweep_alphas, &sweep_options(cfg))?;
            let rows: Vec<SweepRow> = recs.iter().map(SweepRow::from).collect();
            out.csv("sweep.csv", &rows)?;
            result.insert("up_set".into(), json!(is_up_set(&recs)));
            result.insert("sweep".into(), serde_json::to_value(&recs)?);
            true
        }
        Command::Alpha0 => {
            let b = cfg
                .alpha0
                .as_ref()
                .ok_or_else(|| Error::invalid("alpha0 needs alpha0.lo and alpha0.hi"))?;
            let est = estimate_alpha0(&dom, &k, (b.lo, b.hi), b.width_tol, &sweep_options(cfg))?;
            let rows: Vec<SweepRow> = est.transcript.iter().map(SweepRow::from).collect();
            out.csv("alpha0_probes.csv", &rows)?;
            result.insert("alpha0".into(), serde_json::to_value(&est)?);
            true
        }
        Command::Spectrum => {
            let spec = ProblemSpec::new(dom.clone(), k, alpha_of(cfg)?)?;
            let rec = solvers::solve_min(&spec, &first_options(cfg))?;
            let f1 = out.field("u1.kwf", &dom, &rec.u)?;
            let eig = spectral::principal_eigen(&spec, &rec.u, cfg.solver.eigen_tol, cfg.solver.eigen_max_iter)?;
            let fe = out.field("eigenvector.kwf", &dom, &eig.eigenvector)?;
            let mut e = serde_json::to_value(&eig)?;
            e["eigenvector_file"] = json!(fe);
            result.insert("records".into(), json!([record_json(&rec, &f1)?]));
            result.insert("eigen".into(), e);
            rec.converged
        }
        Command::Manufacture => {
            let alpha = alpha_of(cfg)?;
            let u_star = manufactured_target(cfg, &dom)?;
            let k = problem::manufacture(&dom, &u_star, alpha)?;
            out.field("u_star.kwf", &dom, &u_star)?;
            out.field("k.kwf", &dom, &k)?;
            let spec = ProblemSpec::new(dom.clone(), k, alpha)?;
            let rec = solvers::solve_min(&spec, &first_options(cfg))?;
            let f = out.field("u.kwf", &dom, &rec.u)?;
            result.insert("records".into(), json!([record_json(&rec, &f)?]));
            result.insert("recovery_error".into(), json!(rec.u.sup_distance(&u_star)?));
            result.insert("u_star_residual".into(), serde_json::to_value(crate::energy::residual(&spec, &u_star)?)?);
            rec.converged
        }
    };

    let (exit_code, status) = status(ok);
    let report = json!({
        "kwlab_version": env!("CARGO_PKG_VERSION"),
        "timestamp": timestamp(),
        "config": cfg,
        "status": status,
        "result": Value::Object(result),
    });
    let path = cfg.output.join("run.json");
    std::fs::write(&path, serde_json::to_string_pretty(&report)? + "\n")?;
    out.files.push(path);
    Ok(RunOutcome {
        exit_code,
        report,
        files: out.files,
    })
}

fn timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Entry point shared by the binary: `kwlab <config-file>`.
pub fn main_with_args(args: &[String]) -> i32 {
    let [path] = args else {
        eprintln!("usage: kwlab <config-file>");
        return EXIT_ERROR;
    };
    let outcome = parse_config_file(path).and_then(|cfg| run(&cfg));
    match outcome {
        Ok(o) => {
            for f in &o.files {
                println!("{}", f.display());
            }
            if o.exit_code == EXIT_NOT_CONVERGED {
                eprintln!("kwlab: not converged; see run.json");
            }
            o.exit_code
        }
        Err(e) => {
            eprintln!("kwlab: {e}");
            EXIT_ERROR
        }
    }
}
