//! Principal eigenvalue of the linearization −Δ − 2K e^{2u} at both
//! solutions, across α: u₁ stays stable and u₂ unstable, with the two
//! approaching each other towards the threshold.

use kwlab::prelude::*;

fn main() -> Result<(), Error> {
    let dom = DiscreteDomain::torus(1.0, 32)?;
    let k = sample_k(&dom, &KFamily::from_name("cosine", &[1.0, -0.2])?)?;
    println!("alpha    lambda(u1)  lambda(u2)  |u2 - u1|");
    for alpha in [-0.05, -0.1, -0.2, -0.3, -0.4] {
        let spec = ProblemSpec::new(dom.clone(), k.clone(), alpha)?;
        let first = solve_min(&spec, &FirstSolutionOptions::default())?;
        let second = second_solution(&spec, &first, &SecondSolutionOptions::default())?;
        let eig = principal_eigen(&spec, &second.record.u, 1e-10, 5000)?;
        println!(
            "{alpha:6}   {:9.5}   {:9.5}   {:.4}",
            first.lambda_min.unwrap_or(f64::NAN),
            eig.lambda_min,
            second.record.u.sup_distance(&first.u)?
        );
    }
    Ok(())
}
