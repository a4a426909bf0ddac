//! Manufactured solutions: K is built so that u* = a·cos(2πx) solves the
//! discrete equation exactly, then the standard pipeline is asked to find it.
//! It succeeds when u* is the stable solution and lands on the stable branch
//! otherwise; the sign of λ_min at u* tells which case applies.

use std::f64::consts::PI;

use kwlab::prelude::*;

fn main() -> Result<(), Error> {
    let alpha = -1.0;
    let dom = DiscreteDomain::torus(1.0, 64)?;
    for amp in [0.05, 0.1, 0.2, 0.3] {
        let u_star = dom.field_from_fn(|p| amp * (2.0 * PI * p[0]).cos());
        let k = manufacture(&dom, &u_star, alpha)?;
        let spec = ProblemSpec::new(dom.clone(), k, alpha)?;
        let at_star = principal_eigen(&spec, &u_star, 1e-10, 5000)?;
        let rec = solve_min(&spec, &FirstSolutionOptions::default())?;
        println!(
            "a = {amp:4}: lambda_min(u*) = {:8.4}, |u - u*| = {:.3e}",
            at_star.lambda_min,
            rec.u.sup_distance(&u_star)?
        );
    }

    // second-order convergence of the five-point grid against the closed-form K
    let amp = 0.1;
    let mut prev: Option<f64> = None;
    for n in [32, 64, 128] {
        let dom = DiscreteDomain::torus_with_stencil(1.0, n, Stencil::FivePoint)?;
        let k = dom.field_from_fn(|p| {
            let c = (2.0 * PI * p[0]).cos();
            (amp * 4.0 * PI * PI * c + alpha) * (-2.0 * amp * c).exp()
        });
        let rec = solve_min(&ProblemSpec::new(dom.clone(), k, alpha)?, &FirstSolutionOptions::default())?;
        let err = rec.u.sup_distance(&dom.field_from_fn(|p| amp * (2.0 * PI * p[0]).cos()))?;
        match prev {
            Some(e) => println!("fd N = {n:3}: error {err:.3e}, ratio {:.3}", e / err),
            None => println!("fd N = {n:3}: error {err:.3e}"),
        }
        prev = Some(err);
    }
    Ok(())
}
