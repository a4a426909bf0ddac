//! Writes the closed genus-2 surface used by the mesh tests: the boundary of
//! a 5×3×1 slab of unit cubes with two cells removed, each unit square split
//! into `m×m` quads of two triangles, outward oriented.
//!
//! ```text
//! cargo run --example genus2_mesh -- [output.off] [m]
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;

use kwlab::prelude::*;

const NX: i64 = 5;
const NY: i64 = 3;
const HOLES: [(i64, i64); 2] = [(1, 1), (3, 1)];

fn filled(i: i64, j: i64, k: i64) -> bool {
    (0..NX).contains(&i) && (0..NY).contains(&j) && k == 0 && !HOLES.contains(&(i, j))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let path = args.first().cloned().unwrap_or_else(|| "data/genus2.off".into());
    let m: i64 = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(4);

    // (normal, u axis, v axis) with u × v = normal
    let faces: [([i64; 3], [i64; 3], [i64; 3]); 6] = [
        ([0, 0, 1], [1, 0, 0], [0, 1, 0]),
        ([0, 0, -1], [0, 1, 0], [1, 0, 0]),
        ([1, 0, 0], [0, 1, 0], [0, 0, 1]),
        ([-1, 0, 0], [0, 0, 1], [0, 1, 0]),
        ([0, 1, 0], [0, 0, 1], [1, 0, 0]),
        ([0, -1, 0], [1, 0, 0], [0, 0, 1]),
    ];

    let mut index: HashMap<[i64; 3], usize> = HashMap::new();
    let mut positions: Vec<[f64; 3]> = Vec::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    let mut vertex = |p: [i64; 3]| -> usize {
        *index.entry(p).or_insert_with(|| {
            positions.push(p.map(|c| c as f64 / m as f64));
            positions.len() - 1
        })
    };

    for i in 0..NX {
        for j in 0..NY {
            if !filled(i, j, 0) {
                continue;
            }
            for (n, u, v) in faces {
                if filled(i + n[0], j + n[1], n[2]) {
                    continue;
                }
                // lowest corner of the face, in lattice units
                let mut origin = [i * m, j * m, 0];
                for a in 0..3 {
                    if n[a] > 0 {
                        origin[a] += m;
                    }
                }
                let at = |a: i64, b: i64| -> [i64; 3] {
                    [0, 1, 2].map(|c| origin[c] + a * u[c] + b * v[c])
                };
                for a in 0..m {
                    for b in 0..m {
                        let p00 = vertex(at(a, b));
                        let p10 = vertex(at(a + 1, b));
                        let p11 = vertex(at(a + 1, b + 1));
                        let p01 = vertex(at(a, b + 1));
                        triangles.push([p00, p10, p11]);
                        triangles.push([p00, p11, p01]);
                    }
                }
            }
        }
    }

    let dom = DiscreteDomain::from_triangles(positions.clone(), triangles.clone())?;
    let mut text = String::new();
    writeln!(text, "OFF")?;
    writeln!(text, "# closed genus-2 voxel surface, {m} subdivisions per unit edge")?;
    writeln!(text, "{} {} 0", positions.len(), triangles.len())?;
    for p in &positions {
        writeln!(text, "{} {} {}", p[0], p[1], p[2])?;
    }
    for t in &triangles {
        writeln!(text, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    std::fs::write(&path, text)?;
    println!(
        "{path}: V = {}, F = {}, chi = {}, area = {}",
        positions.len(),
        triangles.len(),
        dom.euler_characteristic(),
        dom.volume()
    );
    Ok(())
}
