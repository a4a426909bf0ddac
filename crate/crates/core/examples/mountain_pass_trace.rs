//! Writes the relaxed mountain-pass path: `path_trace.csv` with J at every
//! node after every sweep, and the final nodes as KWF1 fields.
//!
//! ```text
//! cargo run --release --example mountain_pass_trace -- out/trace
//! ```

use std::path::PathBuf;

use kwlab::io::write_field;
use kwlab::mountainpass::MountainPassOptions;
use kwlab::prelude::*;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out/trace".into()));
    std::fs::create_dir_all(&dir)?;
    let dom = DiscreteDomain::torus(1.0, 32)?;
    let k = sample_k(&dom, &KFamily::from_name("cosine", &[1.0, -0.2])?)?;
    let spec = ProblemSpec::new(dom.clone(), k, -0.3)?;
    let first = solve_min(&spec, &FirstSolutionOptions::default())?;
    let opts = SecondSolutionOptions {
        mp: MountainPassOptions {
            trace: true,
            ..MountainPassOptions::default()
        },
        ..SecondSolutionOptions::default()
    };
    let second = second_solution(&spec, &first, &opts)?;
    let pass = &second.pass;

    let mut w = csv::Writer::from_path(dir.join("path_trace.csv"))?;
    for row in &pass.trace {
        w.serialize(row)?;
    }
    w.flush()?;
    for (i, node) in pass.path.nodes.iter().enumerate() {
        write_field(dir.join(format!("path_node_{i:02}.kwf")), &dom, node)?;
    }

    let h = &pass.peak_history;
    println!("t0 = {}, eps = {:.4}", second.t0, second.eps);
    println!("peak J: {:.4} initially, {:.6} after {} sweeps", h[0], h[h.len() - 1], pass.sweeps);
    println!("refined level {:.6}, stop {:?}", pass.level, pass.stop);
    println!("final path J:");
    for (i, v) in pass.path.values.iter().enumerate() {
        let mark = if i == pass.path.peak { " <- peak" } else { "" };
        println!("  {i:2} {v:12.6}{mark}");
    }
    println!("wrote {}", dir.display());
    Ok(())
}
