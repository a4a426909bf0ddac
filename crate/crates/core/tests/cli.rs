mod common;

use std::path::Path;

use kwlab::cli::{main_with_args, parse_config, parse_config_file, run, Command, EXIT_ERROR, EXIT_NOT_CONVERGED, EXIT_OK};
use kwlab::io::read_field;
use kwlab::prelude::*;
use serde_json::Value;

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn run_json(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("run.json")).unwrap()).unwrap()
}

#[test]
fn shipped_configs_parse() {
    let dir = common::asset("configs");
    let mut names: Vec<_> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    names.sort();
    assert!(names.len() >= 5);
    for p in names {
        let cfg = parse_config_file(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        if cfg.command.needs_alpha() {
            assert!(cfg.alpha.unwrap() < 0.0);
        }
    }
    let reference = parse_config_file(dir.join("reference.conf")).unwrap();
    assert_eq!(reference.command, Command::SolveSecond);
    assert_eq!(reference.alpha, Some(-0.3));
}

#[test]
fn validate_positive_constant() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = format!(
        "command = validate\nrun.output = {}\ndomain.n = 16\nk.family = constant\nk.params = 1\nalpha = -0.5\n",
        out.display()
    );
    let path = write_config(tmp.path(), "v.conf", &cfg);
    assert_eq!(main_with_args(&[path]), EXIT_OK);
    let json = run_json(&out);
    assert_eq!(json["status"], "ok");
    assert_eq!(json["result"]["validation"]["admissible_for_theorem2"], false);
    // defaults are echoed
    assert_eq!(json["config"]["solver"]["tol"], 1e-10);
}

#[test]
fn empty_sweep_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = format!(
        "command = sweep\nrun.output = {}\nk.family = cosine\nk.params = 1 -0.2\nsweep.alphas =\n",
        tmp.path().join("out").display()
    );
    let path = write_config(tmp.path(), "s.conf", &cfg);
    assert_eq!(main_with_args(&[path]), EXIT_ERROR);
}

#[test]
fn usage_and_missing_files_are_errors() {
    assert_eq!(main_with_args(&[]), EXIT_ERROR);
    assert_eq!(main_with_args(&["/nonexistent/kwlab.conf".into()]), EXIT_ERROR);
}

#[test]
fn sweep_writes_csv_and_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = format!(
        "command = sweep\nrun.output = {}\ndomain.n = 16\nk.family = cosine\nk.params = -0.5 -0.5\nsweep.alphas = -2 -0.5\n",
        out.display()
    );
    let path = write_config(tmp.path(), "s.conf", &cfg);
    assert_eq!(main_with_args(std::slice::from_ref(&path)), EXIT_OK);
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "alpha,solvable,residual_linf,energy_F,lambda_min,iterations");
    assert_eq!(lines.count(), 2);

    let without_timestamp = || -> Vec<String> {
        std::fs::read_to_string(out.join("run.json"))
            .unwrap()
            .lines()
            .filter(|l| !l.trim_start().starts_with("\"timestamp\""))
            .map(String::from)
            .collect()
    };
    let first = without_timestamp();
    assert_eq!(main_with_args(&[path]), EXIT_OK);
    assert_eq!(first, without_timestamp());
}

#[test]
fn solve_second_writes_both_fields() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = format!(
        "command = solve-second\nrun.output = {}\ndomain.n = 32\nk.family = cosine\nk.params = 1 -0.2\nalpha = -0.3\nmp.trace = true\n",
        out.display()
    );
    let parsed = parse_config(&cfg).unwrap();
    let outcome = run(&parsed).unwrap();
    assert_eq!(outcome.exit_code, EXIT_OK);
    let records = outcome.report["result"]["records"].as_array().unwrap();
    assert_eq!(records.len(), 2);
    assert_ne!(records[0]["u_file"], records[1]["u_file"]);
    assert_eq!(records[1]["method"], "mountain-pass");
    let dom = DiscreteDomain::torus(1.0, 32).unwrap();
    let u1 = read_field(out.join("u1.kwf"), &dom).unwrap();
    let u2 = read_field(out.join("u2.kwf"), &dom).unwrap();
    assert!(u1.sup_distance(&u2).unwrap() > 0.1);
    let trace = std::fs::read_to_string(out.join("path_trace.csv")).unwrap();
    assert_eq!(trace.lines().next().unwrap(), "sweep,node,J_value");
    assert!(out.join("path_node_00.kwf").exists() && out.join("path_node_20.kwf").exists());
}

#[test]
fn budget_exhaustion_is_not_convergence() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = format!(
        "command = solve-min\nrun.output = {}\ndomain.n = 16\nk.family = cosine\nk.params = -0.5 -0.5\nalpha = -1\nsolver.max_iter = 1\nnewton.max_iter = 1\n",
        out.display()
    );
    let path = write_config(tmp.path(), "m.conf", &cfg);
    assert_eq!(main_with_args(&[path]), EXIT_NOT_CONVERGED);
    assert_eq!(run_json(&out)["status"], "not-converged");
}

#[test]
fn mesh_and_k_file_inputs_resolve_against_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::copy(common::asset("data/genus2.off"), tmp.path().join("surface.off")).unwrap();
    let dom = common::genus2();
    let k = dom.constant(-2.0);
    kwlab::io::write_field(tmp.path().join("k.kwf"), &dom, &k).unwrap();
    let out = tmp.path().join("out");
    let cfg = format!(
        "command = spectrum\nrun.output = {}\ndomain.kind = mesh\ndomain.mesh = surface.off\nk.file = k.kwf\nalpha = -1\n",
        out.display()
    );
    let path = write_config(tmp.path(), "mesh.conf", &cfg);
    assert_eq!(main_with_args(&[path]), EXIT_OK);
    let json = run_json(&out);
    let lambda = json["result"]["eigen"]["lambda_min"].as_f64().unwrap();
    assert!((lambda - 2.0).abs() < 1e-6);
    assert_eq!(json["config"]["solver"]["tol"], 1e-8);
}

#[test]
fn manufacture_recovers_a_stable_target() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = format!(
        "command = manufacture\nrun.output = {}\ndomain.n = 32\nalpha = -1\nmanufacture.u_family = cosine\nmanufacture.u_params = 0.1 0\n",
        out.display()
    );
    let outcome = run(&parse_config(&cfg).unwrap()).unwrap();
    assert_eq!(outcome.exit_code, EXIT_OK);
    assert!(outcome.report["result"]["recovery_error"].as_f64().unwrap() < 1e-9);
    for f in ["u_star.kwf", "k.kwf", "u.kwf", "run.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn alpha0_writes_the_probe_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = format!(
        "command = alpha0\nrun.output = {}\ndomain.n = 16\nk.family = cosine\nk.params = 1 -0.2\nalpha0.lo = -0.6\nalpha0.hi = -0.1\nalpha0.width_tol = 0.05\n",
        out.display()
    );
    let outcome = run(&parse_config(&cfg).unwrap()).unwrap();
    assert_eq!(outcome.exit_code, EXIT_OK);
    let est = &outcome.report["result"]["alpha0"];
    let lo = est["interval"][0].as_f64().unwrap();
    let hi = est["interval"][1].as_f64().unwrap();
    assert!(hi - lo < 0.05);
    let rows = std::fs::read_to_string(out.join("alpha0_probes.csv")).unwrap().lines().count() - 1;
    assert_eq!(rows as u64, est["probes"].as_u64().unwrap());
}
