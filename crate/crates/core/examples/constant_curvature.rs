//! K ≡ −2, α = −1 has the constant solution u = ½ ln ½ with λ_min = −2α, on
//! the torus and on any closed mesh.

use kwlab::prelude::*;

fn report(name: &str, dom: DiscreteDomain, opts: FirstSolutionOptions) -> Result<(), Error> {
    let spec = ProblemSpec::new(dom.clone(), dom.constant(-2.0), -1.0)?;
    let rec = solve_min(&spec, &opts)?;
    let exact = dom.constant(0.5 * 0.5f64.ln());
    println!(
        "{name:8} |u - ln(1/2)/2| = {:.2e}, lambda_min = {:.10}, identity gap {:.2e}",
        rec.u.sup_distance(&exact)?,
        rec.lambda_min.unwrap_or(f64::NAN),
        rec.identity_gap
    );
    Ok(())
}

fn main() -> Result<(), Error> {
    report("torus", DiscreteDomain::torus(1.0, 64)?, FirstSolutionOptions::default())?;
    let mesh = DiscreteDomain::from_off_file(concat!(env!("CARGO_MANIFEST_DIR"), "/data/genus2.off"))?;
    let opts = FirstSolutionOptions::for_domain(&mesh);
    report("genus 2", mesh, opts)
}
