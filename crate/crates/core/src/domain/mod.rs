//! Closed two-dimensional domains: the periodic square grid and closed
//! triangle meshes, behind one interface for fields, quadrature, the
//! Laplacian and the elliptic solves built on it.

mod mesh;
mod torus;

use std::io::BufRead;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

pub use mesh::TriMesh;
pub use torus::{Stencil, TorusGrid};

use crate::error::{Error, Result};
use crate::linalg::{self, pairwise_sum, KrylovReport};

static NEXT_DOMAIN_ID: AtomicU64 = AtomicU64::new(1);

/// Compatibility tolerance for Poisson right-hand sides, relative to max|f|.
pub const POISSON_COMPATIBILITY_TOL: f64 = 1e-10;
/// Relative residual for mesh Poisson solves.
pub const MESH_POISSON_TOL: f64 = 1e-10;
/// Relative residual for the positive-definite shifted solves.
pub const SHIFTED_SOLVE_TOL: f64 = 1e-12;

#[derive(Debug)]
pub enum Backend {
    Torus(TorusGrid),
    Mesh(TriMesh),
}

/// Immutable discrete closed surface. Cloning is cheap and clones share
/// identity, so fields built on one clone are accepted by the others.
#[derive(Debug, Clone)]
pub struct DiscreteDomain {
    id: u64,
    inner: Arc<Inner>,
}

#[derive(Debug)]
struct Inner {
    backend: Backend,
    weights: Vec<f64>,
    points: Vec<[f64; 3]>,
    volume: f64,
}

/// Real values sampled at the points of one domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    domain_id: u64,
    values: Vec<f64>,
}

/// Builds the periodic N×N grid of side `length` with the spectral Laplacian.
pub fn build_torus_grid(length: f64, n: usize) -> Result<DiscreteDomain> {
    DiscreteDomain::torus(length, n)
}

/// Reads a closed triangle mesh in OFF format.
pub fn load_triangle_mesh<R: BufRead>(source: R) -> Result<DiscreteDomain> {
    DiscreteDomain::from_off(source)
}

impl DiscreteDomain {
    fn from_backend(backend: Backend) -> Self {
        let (weights, points) = match &backend {
            Backend::Torus(t) => {
                let h = t.spacing();
                let n = t.resolution();
                (vec![h * h; n * n], t.points())
            }
            Backend::Mesh(m) => (m.areas().to_vec(), m.positions().to_vec()),
        };
        let volume = pairwise_sum(&weights);
        DiscreteDomain {
            id: NEXT_DOMAIN_ID.fetch_add(1, Ordering::Relaxed),
            inner: Arc::new(Inner {
                backend,
                weights,
                points,
                volume,
            }),
        }
    }

    pub fn torus(length: f64, n: usize) -> Result<Self> {
        Self::torus_with_stencil(length, n, Stencil::Spectral)
    }

    pub fn torus_with_stencil(length: f64, n: usize, stencil: Stencil) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::invalid(format!("torus side length must be positive, got {length}")));
        }
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "torus resolution must be an even integer >= 8, got {n}"
            )));
        }
        Ok(Self::from_backend(Backend::Torus(TorusGrid::new(length, n, stencil))))
    }

    pub fn from_off<R: BufRead>(source: R) -> Result<Self> {
        let (positions, triangles) = mesh::parse_off(source)?;
        Self::from_triangles(positions, triangles)
    }

    pub fn from_off_file(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())?;
        Self::from_off(std::io::BufReader::new(file))
    }

    pub fn from_triangles(positions: Vec<[f64; 3]>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        Ok(Self::from_backend(Backend::Mesh(TriMesh::new(positions, triangles)?)))
    }

    pub fn backend(&self) -> &Backend {
        &self.inner.backend
    }

    pub fn as_torus(&self) -> Option<&TorusGrid> {
        match &self.inner.backend {
            Backend::Torus(t) => Some(t),
            Backend::Mesh(_) => None,
        }
    }

    pub fn as_mesh(&self) -> Option<&TriMesh> {
        match &self.inner.backend {
            Backend::Mesh(m) => Some(m),
            Backend::Torus(_) => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.inner.backend {
            Backend::Torus(_) => "torus",
            Backend::Mesh(_) => "mesh",
        }
    }

    /// Number of grid points or mesh vertices.
    pub fn len(&self) -> usize {
        self.inner.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.weights.is_empty()
    }

    /// |M|, the sum of the quadrature weights.
    pub fn volume(&self) -> f64 {
        self.inner.volume
    }

    pub fn weights(&self) -> &[f64] {
        &self.inner.weights
    }

    /// Point coordinates; grid points have z = 0.
    pub fn points(&self) -> &[[f64; 3]] {
        &self.inner.points
    }

    /// V − E + F for meshes; 0 for the torus.
    pub fn euler_characteristic(&self) -> i64 {
        match &self.inner.backend {
            Backend::Torus(_) => 0,
            Backend::Mesh(m) => m.euler_characteristic(),
        }
    }

    /// Shape used when dumping fields: (N, N) on the grid, (V, 1) on meshes.
    pub fn field_shape(&self) -> (usize, usize) {
        match &self.inner.backend {
            Backend::Torus(t) => (t.resolution(), t.resolution()),
            Backend::Mesh(m) => (m.vertex_count(), 1),
        }
    }

    /// Unique identity shared by all clones of this domain.
    pub fn id(&self) -> u64 {
        self.id
    }

    // ---------------------------------------------------------------- fields

    pub fn field(&self, values: Vec<f64>) -> Result<ScalarField> {
        if values.len() != self.len() {
            return Err(Error::invalid(format!(
                "field has {} values but the domain has {} points",
                values.len(),
                self.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("field value at index {i} is not finite")));
        }
        Ok(ScalarField {
            domain_id: self.id,
            values,
        })
    }

    pub(crate) fn wrap(&self, values: Vec<f64>) -> ScalarField {
        debug_assert_eq!(values.len(), self.len());
        ScalarField {
            domain_id: self.id,
            values,
        }
    }

    pub fn zeros(&self) -> ScalarField {
        self.constant(0.0)
    }

    pub fn constant(&self, c: f64) -> ScalarField {
        self.wrap(vec![c; self.len()])
    }

    /// Samples `f` at every point.
    pub fn field_from_fn(&self, f: impl Fn([f64; 3]) -> f64) -> ScalarField {
        self.wrap(self.points().iter().map(|&p| f(p)).collect())
    }

    pub fn check(&self, u: &ScalarField) -> Result<()> {
        if u.domain_id != self.id || u.values.len() != self.len() {
            return Err(Error::invalid("field does not live on this domain"));
        }
        Ok(())
    }

    // ------------------------------------------------------------- operators

    pub(crate) fn laplacian_raw(&self, u: &[f64], out: &mut [f64]) {
        match &self.inner.backend {
            Backend::Torus(t) => t.laplacian(u, out),
            Backend::Mesh(m) => m.laplacian(u, out),
        }
    }

    pub(crate) fn neg_laplacian_vec(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.laplacian_raw(u, &mut out);
        out.iter_mut().for_each(|v| *v = -*v);
        out
    }

    /// Δu under the domain's discretization.
    pub fn apply_laplacian(&self, u: &ScalarField) -> Result<ScalarField> {
        self.check(u)?;
        let mut out = vec![0.0; self.len()];
        self.laplacian_raw(&u.values, &mut out);
        Ok(self.wrap(out))
    }

    pub(crate) fn integrate_raw(&self, f: &[f64]) -> f64 {
        let prod: Vec<f64> = f.iter().zip(self.weights()).map(|(a, w)| a * w).collect();
        pairwise_sum(&prod)
    }

    pub(crate) fn dot_raw(&self, u: &[f64], v: &[f64]) -> f64 {
        let prod: Vec<f64> = u
            .iter()
            .zip(v)
            .zip(self.weights())
            .map(|((a, b), w)| a * b * w)
            .collect();
        pairwise_sum(&prod)
    }

    /// ∫ f dv.
    pub fn integrate(&self, f: &ScalarField) -> Result<f64> {
        self.check(f)?;
        Ok(self.integrate_raw(&f.values))
    }

    pub fn mean(&self, f: &ScalarField) -> Result<f64> {
        Ok(self.integrate(f)? / self.volume())
    }

    /// ∫ u v dv.
    pub fn l2_inner(&self, u: &ScalarField, v: &ScalarField) -> Result<f64> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.dot_raw(&u.values, &v.values))
    }

    /// ∫ (∇u·∇v + u v) dv, evaluated as ⟨u, v⟩ + ⟨−Δu, v⟩.
    pub fn h1_inner(&self, u: &ScalarField, v: &ScalarField) -> Result<f64> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.h1_inner_raw(&u.values, &v.values))
    }

    pub(crate) fn h1_inner_raw(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut lu = self.neg_laplacian_vec(u);
        for (l, ui) in lu.iter_mut().zip(u) {
            *l += ui;
        }
        self.dot_raw(&lu, v)
    }

    pub fn l2_norm(&self, u: &ScalarField) -> Result<f64> {
        Ok(self.l2_inner(u, u)?.max(0.0).sqrt())
    }

    pub fn h1_norm(&self, u: &ScalarField) -> Result<f64> {
        Ok(self.h1_inner(u, u)?.max(0.0).sqrt())
    }

    /// Mean-zero w with −Δw = f.
    pub fn poisson_solve(&self, f: &ScalarField) -> Result<ScalarField> {
        self.check(f)?;
        let max_abs = f.norm_inf();
        if max_abs == 0.0 {
            return Ok(self.zeros());
        }
        let mean = self.integrate_raw(&f.values) / self.volume();
        let tolerance = POISSON_COMPATIBILITY_TOL * max_abs;
        if mean.abs() > tolerance {
            return Err(Error::NotSolvable { mean, tolerance });
        }
        let mut out = vec![0.0; self.len()];
        match &self.inner.backend {
            Backend::Torus(t) => t.poisson(&f.values, &mut out),
            Backend::Mesh(m) => {
                let rhs: Vec<f64> = f.values.iter().map(|v| v - mean).collect();
                let areas = m.areas();
                let diag = m.stiffness_diag();
                let report = linalg::conjugate_gradient(
                    |x, y| {
                        m.stiffness(x, y);
                        for (yi, a) in y.iter_mut().zip(areas) {
                            *yi /= a;
                        }
                    },
                    |r, z| {
                        for i in 0..r.len() {
                            z[i] = r[i] * areas[i] / diag[i];
                        }
                    },
                    |a, b| self.dot_raw(a, b),
                    |v| self.remove_mean(v),
                    &rhs,
                    &mut out,
                    MESH_POISSON_TOL,
                    10 * self.len(),
                )?;
                self.require(report, "mesh Poisson solve")?;
            }
        }
        self.remove_mean(&mut out);
        Ok(self.wrap(out))
    }

    fn remove_mean(&self, v: &mut [f64]) {
        let m = self.integrate_raw(v) / self.volume();
        v.iter_mut().for_each(|x| *x -= m);
    }

    fn require(&self, report: KrylovReport, what: &str) -> Result<()> {
        if report.converged {
            Ok(())
        } else {
            Err(Error::SolverFailure(format!(
                "{what} stalled at relative residual {:e} after {} iterations",
                report.relative_residual, report.iterations
            )))
        }
    }

    /// H¹ Riesz representative of φ ↦ ⟨g, φ⟩: solves (−Δ + 1) p = g.
    pub fn precondition_gradient(&self, g: &ScalarField) -> Result<ScalarField> {
        self.check(g)?;
        Ok(self.wrap(self.solve_shifted(1.0, &g.values)?))
    }

    /// Solves (−Δ + shift) x = rhs for a constant shift > 0.
    pub(crate) fn solve_shifted(&self, shift: f64, rhs: &[f64]) -> Result<Vec<f64>> {
        if !(shift > 0.0) || !shift.is_finite() {
            return Err(Error::invalid(format!("shift must be positive and finite, got {shift}")));
        }
        let mut out = vec![0.0; self.len()];
        match &self.inner.backend {
            Backend::Torus(t) => t.shifted_inverse(shift, rhs, &mut out),
            Backend::Mesh(_) => {
                let q = vec![shift; self.len()];
                self.solve_spd_potential(&q, rhs, &mut out, SHIFTED_SOLVE_TOL)?;
            }
        }
        Ok(out)
    }

    /// Solves (−Δ + q) x = rhs for a pointwise potential q > 0 by
    /// preconditioned CG, starting from the incoming `x`.
    pub(crate) fn solve_spd_potential(
        &self,
        q: &[f64],
        rhs: &[f64],
        x: &mut [f64],
        tol: f64,
    ) -> Result<KrylovReport> {
        let max_iter = 10 * self.len();
        let apply = |v: &[f64], out: &mut [f64]| {
            self.laplacian_raw(v, out);
            for i in 0..v.len() {
                out[i] = q[i] * v[i] - out[i];
            }
        };
        let dot = |a: &[f64], b: &[f64]| self.dot_raw(a, b);
        let report = match &self.inner.backend {
            Backend::Torus(t) => {
                let c = q.iter().sum::<f64>() / q.len() as f64;
                linalg::conjugate_gradient(
                    apply,
                    |r, z| t.shifted_inverse(c, r, z),
                    dot,
                    |_| {},
                    rhs,
                    x,
                    tol,
                    max_iter,
                )?
            }
            Backend::Mesh(m) => {
                let areas = m.areas();
                let diag = m.stiffness_diag();
                linalg::conjugate_gradient(
                    apply,
                    |r, z| {
                        for i in 0..r.len() {
                            z[i] = r[i] / (diag[i] / areas[i] + q[i]);
                        }
                    },
                    dot,
                    |_| {},
                    rhs,
                    x,
                    tol,
                    max_iter,
                )?
            }
        };
        self.require(report, "shifted elliptic solve")?;
        Ok(report)
    }

    /// Solves (−Δ + q) x = rhs for a potential of either sign by
    /// preconditioned MINRES. Non-convergence is reported, not raised.
    pub(crate) fn solve_indefinite_potential(
        &self,
        q: &[f64],
        rhs: &[f64],
        x: &mut [f64],
        tol: f64,
        max_iter: usize,
    ) -> Result<KrylovReport> {
        let apply = |v: &[f64], out: &mut [f64]| {
            self.laplacian_raw(v, out);
            for i in 0..v.len() {
                out[i] = q[i] * v[i] - out[i];
            }
        };
        let dot = |a: &[f64], b: &[f64]| self.dot_raw(a, b);
        match &self.inner.backend {
            Backend::Torus(t) => {
                let mean_abs = q.iter().map(|v| v.abs()).sum::<f64>() / q.len() as f64;
                let floor = 1e-2 * (2.0 * std::f64::consts::PI / t.length()).powi(2);
                let c = mean_abs.max(floor);
                linalg::minres(apply, |r, z| t.shifted_inverse(c, r, z), dot, rhs, x, tol, max_iter)
            }
            Backend::Mesh(m) => {
                let areas = m.areas();
                let diag = m.stiffness_diag();
                linalg::minres(
                    apply,
                    |r, z| {
                        for i in 0..r.len() {
                            z[i] = r[i] / (diag[i] / areas[i] + q[i].abs() + f64::MIN_POSITIVE);
                        }
                    },
                    dot,
                    rhs,
                    x,
                    tol,
                    max_iter,
                )
            }
        }
    }
}

impl ScalarField {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn domain_id(&self) -> u64 {
        self.domain_id
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Index of the largest value (first on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }

    /// Index of the smallest value (first on ties).
    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v < self.values[best] {
                best = i;
            }
        }
        best
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            domain_id: self.domain_id,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        if self.domain_id != other.domain_id || self.len() != other.len() {
            return Err(Error::invalid("fields live on different domains"));
        }
        Ok(ScalarField {
            domain_id: self.domain_id,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, a: f64) -> ScalarField {
        self.map(|v| a * v)
    }

    pub fn shift(&self, c: f64) -> ScalarField {
        self.map(|v| v + c)
    }

    /// sup |self − other|.
    pub fn sup_distance(&self, other: &ScalarField) -> Result<f64> {
        Ok(self.sub(other)?.norm_inf())
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}
