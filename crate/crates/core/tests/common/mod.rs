#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::PathBuf;

use kwlab::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn asset(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel)
}

pub fn genus2() -> DiscreteDomain {
    DiscreteDomain::from_off_file(asset("data/genus2.off")).unwrap()
}

/// Smooth random field: a few low modes in each coordinate with amplitudes
/// up to `amp`. On a mesh the coordinates are the embedding coordinates.
pub fn smooth_field(dom: &DiscreteDomain, rng: &mut ChaCha8Rng, amp: f64) -> ScalarField {
    let scale = match dom.as_torus() {
        Some(t) => 2.0 * PI / t.length(),
        None => 1.0,
    };
    let modes: Vec<([f64; 3], f64, f64)> = (0..4)
        .map(|_| {
            let k = [
                rng.gen_range(-2i32..=2) as f64,
                rng.gen_range(-2i32..=2) as f64,
                rng.gen_range(-2i32..=2) as f64,
            ];
            (k, rng.gen_range(-amp..amp), rng.gen_range(0.0..2.0 * PI))
        })
        .collect();
    let offset = rng.gen_range(-amp..amp);
    dom.field_from_fn(|p| {
        offset
            + modes
                .iter()
                .map(|(k, a, ph)| a * (scale * (k[0] * p[0] + k[1] * p[1] + k[2] * p[2]) + ph).cos())
                .sum::<f64>()
    })
}

/// Central difference of `f` along `phi` compared with the pairing
/// `∫ g φ`; returns the relative error.
pub fn directional_error(
    dom: &DiscreteDomain,
    f: impl Fn(&ScalarField) -> f64,
    g: &ScalarField,
    u: &ScalarField,
    phi: &ScalarField,
    h: f64,
) -> f64 {
    let plus = u.add(&phi.scale(h)).unwrap();
    let minus = u.sub(&phi.scale(h)).unwrap();
    let fd = (f(&plus) - f(&minus)) / (2.0 * h);
    let pairing = dom.l2_inner(g, phi).unwrap();
    (fd - pairing).abs() / pairing.abs()
}

/// Worst relative error of the F and J gradients over `samples` random
/// directions.
pub fn gradient_consistency(dom: &DiscreteDomain, k: &ScalarField, seed: u64, samples: usize) -> (f64, f64) {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_f = 0.0f64;
    let mut worst_j = 0.0f64;
    for _ in 0..samples {
        let alpha = -rng.gen_range(0.1..2.0);
        let spec = ProblemSpec::new(dom.clone(), k.clone(), alpha).unwrap();
        let u = smooth_field(dom, &mut rng, 0.3);
        let phi = smooth_field(dom, &mut rng, 1.0);
        let w = smooth_field(dom, &mut rng, 0.3);
        let r = k.zip_map(&w, |kv, wv| kv * (2.0 * wv).exp()).unwrap();
        let g = grad_f(&spec, &u).unwrap();
        worst_f = worst_f.max(directional_error(dom, |v| energy_f(&spec, v).unwrap(), &g, &u, &phi, 1e-5));
        let g = grad_j(dom, &r, &u).unwrap();
        worst_j = worst_j.max(directional_error(dom, |v| energy_j(dom, &r, v).unwrap(), &g, &u, &phi, 1e-5));
    }
    (worst_f, worst_j)
}
