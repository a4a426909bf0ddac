//! Flat `section.key = value` run configuration.
//!
//! ```text
//! # two solutions on the unit torus
//! run.command = solve-second
//! run.output = out/reference
//! domain.kind = torus          # torus | mesh
//! domain.length = 1.0
//! domain.n = 64
//! domain.stencil = spectral    # spectral | fd
//! k.family = cosine            # or k.file = K.kwf
//! k.params = 1.0 -0.2
//! problem.alpha = -0.3
//! ```
//!
//! `alpha` and `command` are accepted as short forms of `problem.alpha` and
//! `run.command`. Unknown or repeated keys are errors. Input paths
//! (`domain.mesh`, `k.file`) are resolved against the directory of the
//! config file; `run.output` against the working directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::domain::Stencil;
use crate::error::{Error, Result};
use crate::solvers;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Validate,
    SolveMin,
    SolveSecond,
    Sweep,
    Alpha0,
    Spectrum,
    Manufacture,
}

impl Command {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "validate" => Command::Validate,
            "solve-min" => Command::SolveMin,
            "solve-second" => Command::SolveSecond,
            "sweep" => Command::Sweep,
            "alpha0" => Command::Alpha0,
            "spectrum" => Command::Spectrum,
            "manufacture" => Command::Manufacture,
            _ => return None,
        })
    }

    pub fn needs_alpha(self) -> bool {
        !matches!(self, Command::Sweep | Command::Alpha0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainConfig {
    Torus {
        length: f64,
        n: usize,
        stencil: &'static str,
    },
    Mesh {
        path: PathBuf,
    },
}

impl DomainConfig {
    pub fn stencil(&self) -> Stencil {
        match self {
            DomainConfig::Torus { stencil: "fd", .. } => Stencil::FivePoint,
            _ => Stencil::Spectral,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum KConfig {
    Family { family: String, params: Vec<f64> },
    File { path: PathBuf },
    /// Built from `manufacture.u_*` by the manufacture command.
    Manufactured,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub newton_max_iter: usize,
    pub eigen_tol: f64,
    pub eigen_max_iter: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MountainPassConfig {
    pub nodes: usize,
    pub eps_fraction: f64,
    pub distinct: f64,
    pub path_tol: f64,
    pub max_iter: usize,
    pub t_cap: f64,
    pub trace: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Alpha0Config {
    pub lo: f64,
    pub hi: f64,
    pub width_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManufactureConfig {
    pub family: String,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub output: PathBuf,
    pub domain: DomainConfig,
    pub k: KConfig,
    pub alpha: Option<f64>,
    pub solver: SolverConfig,
    pub mp: MountainPassConfig,
    pub sweep_alphas: Vec<f64>,
    pub alpha0: Option<Alpha0Config>,
    pub manufacture: ManufactureConfig,
    /// Directory against which input paths are resolved.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn resolve_input(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

const KEYS: &[&str] = &[
    "run.command",
    "run.output",
    "domain.kind",
    "domain.length",
    "domain.n",
    "domain.stencil",
    "domain.mesh",
    "k.family",
    "k.params",
    "k.file",
    "problem.alpha",
    "solver.tol",
    "solver.max_iter",
    "newton.max_iter",
    "eigen.tol",
    "eigen.max_iter",
    "mp.nodes",
    "mp.eps_fraction",
    "mp.distinct",
    "mp.path_tol",
    "mp.max_iter",
    "mp.t_cap",
    "mp.trace",
    "sweep.alphas",
    "alpha0.lo",
    "alpha0.hi",
    "alpha0.width_tol",
    "manufacture.u_family",
    "manufacture.u_params",
];

fn canonical(key: &str) -> &str {
    match key {
        "alpha" => "problem.alpha",
        "command" => "run.command",
        other => other,
    }
}

struct Entries(BTreeMap<&'static str, (String, usize)>);

impl Entries {
    fn raw(&self, key: &str) -> Option<(&str, usize)> {
        self.0.get(key).map(|(v, l)| (v.as_str(), *l))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<(T, usize)>> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, line)) => v.parse::<T>().map(|x| Some((x, line))).map_err(|_| Error::Config {
                line,
                message: format!("`{key}`: cannot parse `{v}`"),
            }),
        }
    }

    fn get<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<(T, usize)> {
        Ok(self.parse(key)?.unwrap_or((default, 0)))
    }

    fn list(&self, key: &str) -> Result<Option<(Vec<f64>, usize)>> {
        let Some((v, line)) = self.raw(key) else { return Ok(None) };
        let vals = v
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>().map_err(|_| Error::Config {
                    line,
                    message: format!("`{key}`: cannot parse number `{s}`"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Some((vals, line)))
    }
}

fn fail(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

fn positive(key: &str, (v, line): (f64, usize)) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(fail(line, format!("`{key}` must be positive, got {v}")))
    }
}

fn at_least(key: &str, (v, line): (usize, usize), min: usize) -> Result<usize> {
    if v >= min {
        Ok(v)
    } else {
        Err(fail(line, format!("`{key}` must be at least {min}, got {v}")))
    }
}

/// Parses and validates config text; input paths are relative to the
/// working directory.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_in(text, Path::new("."))
}

/// Reads a config file; input paths are relative to its directory.
pub fn parse_config_file(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    parse_config_in(&text, dir)
}

fn parse_config_in(text: &str, base_dir: &Path) -> Result<RunConfig> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(fail(line, format!("expected `key = value`, got `{content}`")));
        };
        let key = canonical(key.trim());
        let Some(&known) = KEYS.iter().find(|k| **k == key) else {
            return Err(fail(line, format!("unknown key `{key}`")));
        };
        let value = value.trim().to_string();
        if let Some((_, first)) = map.insert(known, (value, line)) {
            return Err(fail(line, format!("key `{key}` repeated (first on line {first})")));
        }
    }
    let e = Entries(map);

    let command = match e.raw("run.command") {
        Some((v, line)) => Command::parse(v).ok_or_else(|| fail(line, format!("unknown command `{v}`")))?,
        None => return Err(fail(0, "missing `run.command`")),
    };

    let output = PathBuf::from(e.raw("run.output").map(|(v, _)| v).unwrap_or("out"));

    let (kind, kind_line) = e.get("domain.kind", String::from("torus"))?;
    let domain = match kind.as_str() {
        "torus" => {
            let length = positive("domain.length", e.get("domain.length", 1.0)?)?;
            let (n, n_line) = e.get("domain.n", 64usize)?;
            if n < 8 || n % 2 != 0 {
                return Err(fail(n_line, format!("`domain.n` must be even and >= 8, got {n}")));
            }
            let (stencil, s_line) = e.get("domain.stencil", String::from("spectral"))?;
            let stencil = match stencil.as_str() {
                "spectral" => "spectral",
                "fd" => "fd",
                other => return Err(fail(s_line, format!("unknown stencil `{other}`"))),
            };
            if let Some((_, l)) = e.raw("domain.mesh") {
                return Err(fail(l, "`domain.mesh` given for a torus domain"));
            }
            DomainConfig::Torus { length, n, stencil }
        }
        "mesh" => {
            let Some((path, _)) = e.raw("domain.mesh") else {
                return Err(fail(kind_line, "mesh domain needs `domain.mesh`"));
            };
            for key in ["domain.length", "domain.n", "domain.stencil"] {
                if let Some((_, l)) = e.raw(key) {
                    return Err(fail(l, format!("`{key}` does not apply to a mesh domain")));
                }
            }
            DomainConfig::Mesh { path: PathBuf::from(path) }
        }
        other => return Err(fail(kind_line, format!("unknown domain kind `{other}`"))),
    };

    let k = match (e.raw("k.family"), e.raw("k.file")) {
        (Some(_), Some((_, l))) => return Err(fail(l, "give either `k.family` or `k.file`, not both")),
        (Some((family, _)), None) => KConfig::Family {
            family: family.to_string(),
            params: e.list("k.params")?.map(|(v, _)| v).unwrap_or_default(),
        },
        (None, Some((path, _))) => {
            if let Some((_, l)) = e.raw("k.params") {
                return Err(fail(l, "`k.params` needs `k.family`"));
            }
            KConfig::File { path: PathBuf::from(path) }
        }
        (None, None) if command == Command::Manufacture => KConfig::Manufactured,
        (None, None) => return Err(fail(0, "missing `k.family` or `k.file`")),
    };

    let alpha = match e.parse::<f64>("problem.alpha")? {
        Some((a, line)) => {
            if !(a < 0.0) || !a.is_finite() {
                return Err(fail(line, format!("alpha must be negative, got {a}")));
            }
            Some(a)
        }
        None if command.needs_alpha() => return Err(fail(0, "missing `problem.alpha`")),
        None => None,
    };

    let default_tol = match domain {
        DomainConfig::Torus { .. } => solvers::DEFAULT_TOL_TORUS,
        DomainConfig::Mesh { .. } => solvers::DEFAULT_TOL_MESH,
    };
    let solver = SolverConfig {
        tol: positive("solver.tol", e.get("solver.tol", default_tol)?)?,
        max_iter: at_least("solver.max_iter", e.get("solver.max_iter", 100_000usize)?, 1)?,
        newton_max_iter: at_least("newton.max_iter", e.get("newton.max_iter", 40usize)?, 1)?,
        eigen_tol: positive("eigen.tol", e.get("eigen.tol", crate::spectral::DEFAULT_EIGEN_TOL)?)?,
        eigen_max_iter: at_least(
            "eigen.max_iter",
            e.get("eigen.max_iter", crate::spectral::DEFAULT_EIGEN_MAX_ITER)?,
            1,
        )?,
    };

    let (nodes, nodes_line) = e.get("mp.nodes", 21usize)?;
    if nodes < 9 || nodes % 2 == 0 {
        return Err(fail(nodes_line, format!("`mp.nodes` must be odd and >= 9, got {nodes}")));
    }
    let (trace, trace_line) = e.get("mp.trace", String::from("false"))?;
    let mp = MountainPassConfig {
        nodes,
        eps_fraction: positive("mp.eps_fraction", e.get("mp.eps_fraction", 0.1)?)?,
        distinct: positive("mp.distinct", e.get("mp.distinct", 0.1)?)?,
        path_tol: positive("mp.path_tol", e.get("mp.path_tol", 1e-3)?)?,
        max_iter: at_least("mp.max_iter", e.get("mp.max_iter", 20_000usize)?, 1)?,
        t_cap: positive("mp.t_cap", e.get("mp.t_cap", 1e4)?)?,
        trace: match trace.as_str() {
            "true" => true,
            "false" => false,
            other => return Err(fail(trace_line, format!("`mp.trace` must be true or false, got `{other}`"))),
        },
    };

    let sweep_alphas = match e.list("sweep.alphas")? {
        Some((v, line)) => {
            if command == Command::Sweep && v.is_empty() {
                return Err(fail(line, "`sweep.alphas` is empty"));
            }
            if v.iter().any(|a| !(*a < 0.0)) {
                return Err(fail(line, "every entry of `sweep.alphas` must be negative"));
            }
            if v.windows(2).any(|w| w[0] >= w[1]) {
                return Err(fail(line, "`sweep.alphas` must be strictly increasing"));
            }
            v
        }
        None if command == Command::Sweep => return Err(fail(0, "missing `sweep.alphas`")),
        None => Vec::new(),
    };

    let alpha0 = match (e.parse::<f64>("alpha0.lo")?, e.parse::<f64>("alpha0.hi")?) {
        (Some((lo, _)), Some((hi, _))) => Some(Alpha0Config {
            lo,
            hi,
            width_tol: positive("alpha0.width_tol", e.get("alpha0.width_tol", 0.01)?)?,
        }),
        (None, None) if command != Command::Alpha0 => None,
        _ => return Err(fail(0, "alpha0 needs both `alpha0.lo` and `alpha0.hi`")),
    };

    let manufacture = ManufactureConfig {
        family: e.get("manufacture.u_family", String::from("cosine"))?.0,
        params: e
            .list("manufacture.u_params")?
            .map(|(v, _)| v)
            .unwrap_or_else(|| vec![0.3, 0.0]),
    };

    Ok(RunConfig {
        command,
        output,
        domain,
        k,
        alpha,
        solver,
        mp,
        sweep_alphas,
        alpha0,
        manufacture,
        base_dir: base_dir.to_path_buf(),
    })
}
