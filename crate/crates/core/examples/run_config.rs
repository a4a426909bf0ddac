//! Drives the command-line front end from code: parses a shipped config,
//! runs it and prints the resulting run.json.
//!
//! ```text
//! cargo run --release --example run_config -- configs/reference.conf
//! ```

use kwlab::cli::{parse_config_file, run};

fn main() -> Result<(), kwlab::Error> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/validate.conf").into());
    let cfg = parse_config_file(&path)?;
    let outcome = run(&cfg)?;
    println!("{}", serde_json::to_string_pretty(&outcome.report)?);
    for f in &outcome.files {
        eprintln!("wrote {}", f.display());
    }
    std::process::exit(outcome.exit_code);
}
