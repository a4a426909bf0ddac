//! The stable solution u₁ and the mountain-pass solution u₂ for a
//! sign-changing K with negative mean.
//!
//! ```text
//! cargo run --release --example two_solutions -- [alpha]
//! ```

use kwlab::prelude::*;

fn main() -> Result<(), Error> {
    let alpha: f64 = match std::env::args().nth(1) {
        Some(s) => s.parse().map_err(|_| Error::InvalidArgument(format!("bad alpha {s}")))?,
        None => -0.3,
    };
    let dom = DiscreteDomain::torus(1.0, 64)?;
    let k = sample_k(&dom, &KFamily::from_name("cosine", &[1.0, -0.2])?)?;
    let spec = ProblemSpec::new(dom, k, alpha)?;
    println!("{:?}", validate_spec(&spec));

    let first = solve_min(&spec, &FirstSolutionOptions::default())?;
    let second = second_solution(&spec, &first, &SecondSolutionOptions::default())?;
    let u2 = &second.record;
    println!("           residual     F          lambda_min  sup|u|");
    for (name, r) in [("u1", &first), ("u2", u2)] {
        println!(
            "{name:10} {:<12.3e} {:<10.6} {:<11.6} {:.4}",
            r.residual_linf,
            r.energy_f,
            r.lambda_min.unwrap_or(f64::NAN),
            r.u.norm_inf()
        );
    }
    let pass = &second.pass;
    println!(
        "|u2 - u1| = {:.4}, level {:.6} = F(u2) - F(u1) = {:.6}, {} sweeps ({:?})",
        u2.u.sup_distance(&first.u)?,
        pass.level,
        u2.energy_f - first.energy_f,
        pass.sweeps,
        pass.stop
    );
    Ok(())
}
