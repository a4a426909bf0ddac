//! For K ≤ 0 the energy is convex below the super solution: projected
//! gradient descent and the monotone iteration reach the same solution.

use kwlab::prelude::*;
use kwlab::solvers::{convex_minimize_traced, monotone_solve_traced, ConvexOptions};

fn main() -> Result<(), Error> {
    let dom = DiscreteDomain::torus(1.0, 64)?;
    let k = sample_k(&dom, &KFamily::from_name("cosine", &[-0.5, -0.5])?)?;
    for alpha in [-10.0, -1.0, -0.1] {
        let spec = ProblemSpec::new(dom.clone(), k.clone(), alpha)?;
        let upper = super_solution_kneg(&spec)?;
        let c = sub_solution_constant(&spec)?;
        let (mono, steps) = monotone_solve_traced(&spec, c, &upper, &MonotoneOptions::default())?;
        let (convex, energies) = convex_minimize_traced(&spec, &upper, &ConvexOptions::default())?;
        println!(
            "alpha {alpha:5}: monotone {} its, convex {} its (F {:.3e} -> {:.6}), |difference| = {:.2e}",
            steps.len(),
            convex.iterations,
            energies[0],
            energies[energies.len() - 1],
            mono.u.sup_distance(&convex.u)?
        );
    }
    Ok(())
}
