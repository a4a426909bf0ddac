//! A non-positive K on the genus-2 surface: the sweep in α, and two
//! sign-changing curvatures checked for the two-solution hypotheses.

use kwlab::prelude::*;

fn main() -> Result<(), Error> {
    let dom = DiscreteDomain::from_off_file(concat!(env!("CARGO_MANIFEST_DIR"), "/data/genus2.off"))?;
    println!("V = {}, area = {}, chi = {}", dom.len(), dom.volume(), dom.euler_characteristic());

    let k = sample_k(&dom, &KFamily::from_name("cosine", &[-0.5, -0.5])?)?;
    for r in alpha_sweep(&dom, &k, &[-5.0, -1.0, -0.2], &SweepConfig::for_domain(&dom))? {
        let rec = r.record.as_ref();
        println!(
            "alpha {:5}: solvable {}, residual {:?}, lambda_min {:?}",
            r.alpha,
            r.solvable,
            rec.map(|x| x.residual_linf),
            r.lambda_min
        );
    }

    for family in [("cosine", vec![1.0, -0.2]), ("two-bumps", vec![-0.3])] {
        let k = sample_k(&dom, &KFamily::from_name(family.0, &family.1)?)?;
        let spec = ProblemSpec::new(dom.clone(), k, -0.1)?;
        println!("{}: {:?}", family.0, validate_spec(&spec));
    }
    Ok(())
}
