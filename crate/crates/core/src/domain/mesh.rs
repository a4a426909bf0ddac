use std::collections::HashMap;
use std::io::BufRead;

use crate::error::{Error, Result};

/// Closed, connected, consistently oriented triangle mesh carrying the
/// cotangent stiffness matrix and lumped (barycentric) vertex areas.
///
/// The discrete Laplace–Beltrami operator is `Δu = −M⁻¹ S u` with `S` the
/// cotangent stiffness and `M = diag(areas)`.
#[derive(Debug)]
pub struct TriMesh {
    positions: Vec<[f64; 3]>,
    triangles: Vec<[usize; 3]>,
    areas: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    diag: Vec<f64>,
    edge_count: usize,
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

struct Tokens<R> {
    reader: R,
    line_no: usize,
    pending: Vec<String>,
}

impl<R> Tokens<R> {
    fn err(&self, msg: impl std::fmt::Display) -> Error {
        Error::MeshInvalid(format!("line {}: {msg}", self.line_no))
    }
}

impl<R: BufRead> Tokens<R> {
    /// Next non-empty line with comments stripped, split into tokens.
    fn next_line(&mut self) -> Result<Option<Vec<String>>> {
        if !self.pending.is_empty() {
            return Ok(Some(std::mem::take(&mut self.pending)));
        }
        let mut line = String::new();
        loop {
            line.clear();
            if self.reader.read_line(&mut line)? == 0 {
                return Ok(None);
            }
            self.line_no += 1;
            let content = line.split('#').next().unwrap_or("");
            let toks: Vec<String> = content.split_whitespace().map(str::to_owned).collect();
            if !toks.is_empty() {
                return Ok(Some(toks));
            }
        }
    }

    fn expect_line(&mut self, what: &str) -> Result<Vec<String>> {
        self.next_line()?.ok_or_else(|| {
            Error::MeshInvalid(format!("unexpected end of OFF input while reading {what}"))
        })
    }
}

fn parse_num<T: std::str::FromStr, R>(toks: &Tokens<R>, s: &str) -> Result<T> {
    s.parse::<T>()
        .map_err(|_| toks.err(format!("cannot parse number `{s}`")))
}

type OffData = (Vec<[f64; 3]>, Vec<[usize; 3]>);

/// Reads vertex positions and triangles from OFF text.
pub(crate) fn parse_off<R: BufRead>(reader: R) -> Result<OffData> {
    let mut toks = Tokens {
        reader,
        line_no: 0,
        pending: Vec::new(),
    };
    let mut header = toks.expect_line("header")?;
    if header[0] != "OFF" {
        return Err(toks.err("missing OFF header"));
    }
    header.remove(0);
    let counts = if header.is_empty() {
        toks.expect_line("counts")?
    } else {
        header
    };
    if counts.len() < 2 {
        return Err(toks.err("counts line needs vertex and face counts"));
    }
    let nv: usize = parse_num(&toks, &counts[0])?;
    let nf: usize = parse_num(&toks, &counts[1])?;

    let mut positions = Vec::with_capacity(nv);
    for _ in 0..nv {
        let line = toks.expect_line("vertices")?;
        if line.len() < 3 {
            return Err(toks.err("vertex line needs three coordinates"));
        }
        let mut p = [0.0f64; 3];
        for (k, slot) in p.iter_mut().enumerate() {
            *slot = parse_num(&toks, &line[k])?;
            if !slot.is_finite() {
                return Err(toks.err("non-finite vertex coordinate"));
            }
        }
        positions.push(p);
    }

    let mut triangles = Vec::with_capacity(nf);
    for _ in 0..nf {
        let line = toks.expect_line("faces")?;
        let k: usize = parse_num(&toks, &line[0])?;
        if k != 3 {
            return Err(toks.err(format!("only triangles are supported, got a {k}-gon")));
        }
        if line.len() < 4 {
            return Err(toks.err("face line is truncated"));
        }
        let mut t = [0usize; 3];
        for (c, slot) in t.iter_mut().enumerate() {
            *slot = parse_num(&toks, &line[1 + c])?;
            if *slot >= nv {
                return Err(toks.err(format!("vertex index {} out of range", *slot)));
            }
        }
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            return Err(toks.err("face repeats a vertex"));
        }
        triangles.push(t);
    }
    if toks.next_line()?.is_some() {
        return Err(toks.err("trailing data after the last face"));
    }
    Ok((positions, triangles))
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

impl TriMesh {
    /// Validates topology and assembles the cotangent operator.
    pub(crate) fn new(positions: Vec<[f64; 3]>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let nv = positions.len();
        if triangles.is_empty() {
            return Err(Error::MeshInvalid("mesh has no faces".into()));
        }

        // directed half-edges per undirected edge
        let mut edges: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
        for t in &triangles {
            for c in 0..3 {
                let (a, b) = (t[c], t[(c + 1) % 3]);
                edges.entry((a.min(b), a.max(b))).or_default().push((a, b));
            }
        }
        let mut edge_keys: Vec<_> = edges.keys().copied().collect();
        edge_keys.sort_unstable();
        for key in &edge_keys {
            let uses = &edges[key];
            match uses.len() {
                1 => {
                    return Err(Error::MeshInvalid(format!(
                        "boundary edge ({}, {})",
                        key.0, key.1
                    )))
                }
                2 => {
                    if uses[0] == uses[1] {
                        return Err(Error::MeshInvalid(format!(
                            "inconsistent orientation across edge ({}, {})",
                            key.0, key.1
                        )));
                    }
                }
                n => {
                    return Err(Error::MeshInvalid(format!(
                        "non-manifold edge ({}, {}) shared by {n} faces",
                        key.0, key.1
                    )))
                }
            }
        }

        let mut used = vec![false; nv];
        let mut parent: Vec<usize> = (0..nv).collect();
        for t in &triangles {
            for &v in t {
                used[v] = true;
            }
            let r0 = find(&mut parent, t[0]);
            for &v in &t[1..] {
                let r = find(&mut parent, v);
                parent[r] = r0;
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::MeshInvalid(format!("vertex {v} is not used by any face")));
        }
        let root = find(&mut parent, 0);
        if (0..nv).any(|v| find(&mut parent, v) != root) {
            return Err(Error::MeshInvalid("mesh is not connected".into()));
        }

        let mut areas = vec![0.0; nv];
        let mut weights: HashMap<(usize, usize), f64> = HashMap::new();
        for (f, t) in triangles.iter().enumerate() {
            let p = [positions[t[0]], positions[t[1]], positions[t[2]]];
            let double_area = norm(cross(sub(p[1], p[0]), sub(p[2], p[0])));
            if !(double_area > 0.0) {
                return Err(Error::MeshInvalid(format!("face {f} is degenerate")));
            }
            for &v in t {
                areas[v] += double_area / 6.0;
            }
            for c in 0..3 {
                // angle at corner c is opposite edge (c+1, c+2)
                let a = sub(p[(c + 1) % 3], p[c]);
                let b = sub(p[(c + 2) % 3], p[c]);
                let cot = dot(a, b) / norm(cross(a, b));
                let (i, j) = (t[(c + 1) % 3], t[(c + 2) % 3]);
                *weights.entry((i.min(j), i.max(j))).or_insert(0.0) += 0.5 * cot;
            }
        }

        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nv];
        let mut diag = vec![0.0; nv];
        for key in &edge_keys {
            let w = weights[key];
            let (i, j) = *key;
            rows[i].push((j, -w));
            rows[j].push((i, -w));
            diag[i] += w;
            diag[j] += w;
        }
        let mut row_ptr = Vec::with_capacity(nv + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for (i, row) in rows.iter_mut().enumerate() {
            row.push((i, diag[i]));
            row.sort_unstable_by_key(|e| e.0);
            for &(c, v) in row.iter() {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }

        Ok(TriMesh {
            positions,
            triangles,
            areas,
            row_ptr,
            cols,
            vals,
            diag,
            edge_count: edge_keys.len(),
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn face_count(&self) -> usize {
        self.triangles.len()
    }

    /// V − E + F.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count as i64 + self.face_count() as i64
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub(crate) fn areas(&self) -> &[f64] {
        &self.areas
    }

    /// Diagonal of the stiffness matrix.
    pub(crate) fn stiffness_diag(&self) -> &[f64] {
        &self.diag
    }

    /// `out = S u`.
    pub(crate) fn stiffness(&self, u: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * u[self.cols[k]];
            }
            *o = acc;
        }
    }

    pub(crate) fn laplacian(&self, u: &[f64], out: &mut [f64]) {
        self.stiffness(u, out);
        for (o, a) in out.iter_mut().zip(&self.areas) {
            *o = -*o / a;
        }
    }
}
