//! Solvability in α: a sweep for a non-positive K (solvable everywhere) and
//! for a sign-changing K, then bisection for the threshold α₀.

use kwlab::continuation::is_up_set;
use kwlab::prelude::*;

fn main() -> Result<(), Error> {
    let dom = DiscreteDomain::torus(1.0, 64)?;
    let cfg = SweepConfig::default();

    let k_neg = sample_k(&dom, &KFamily::from_name("cosine", &[-0.5, -0.5])?)?;
    println!("K = -(1 + cos 2pi x)/2");
    for r in alpha_sweep(&dom, &k_neg, &[-10.0, -5.0, -1.0, -0.1], &cfg)? {
        println!("  alpha {:6}: solvable {}, lambda_min {:?}", r.alpha, r.solvable, r.lambda_min);
    }

    let k = sample_k(&dom, &KFamily::from_name("cosine", &[1.0, -0.2])?)?;
    let alphas: Vec<f64> = (0..12).map(|i| -0.6 + 0.05 * i as f64).collect();
    let sweep = alpha_sweep(&dom, &k, &alphas, &cfg)?;
    println!("K = cos 2pi x - 0.2");
    for r in &sweep {
        println!("  alpha {:6.2}: solvable {}", r.alpha, r.solvable);
    }
    println!("  up-set: {}", is_up_set(&sweep));

    let est = estimate_alpha0(&dom, &k, (-0.6, -0.1), 0.01, &cfg)?;
    println!("alpha0 in ({}, {}) after {} probes", est.interval.0, est.interval.1, est.probes);
    Ok(())
}
