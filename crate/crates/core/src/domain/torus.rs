use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Discretization of the Laplacian on the periodic grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stencil {
    /// Trigonometric-interpolation Laplacian, exact on resolved Fourier modes.
    #[default]
    Spectral,
    /// Second-order 5-point finite differences.
    FivePoint,
}

impl Stencil {
    pub fn name(self) -> &'static str {
        match self {
            Stencil::Spectral => "spectral",
            Stencil::FivePoint => "fd",
        }
    }
}

/// Uniform N×N grid on the square torus of side `length`.
///
/// Point `(i, j)` sits at `x = i·h`, `y = j·h` and is stored at index
/// `j·N + i`. Both stencils are diagonalized by the 2-D DFT, so every linear
/// solve on the grid is a pointwise division in Fourier space.
pub struct TorusGrid {
    length: f64,
    n: usize,
    stencil: Stencil,
    /// Eigenvalue of the discrete Laplacian (≤ 0) for every DFT mode, stored
    /// in the same layout as fields.
    symbol: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid")
            .field("length", &self.length)
            .field("n", &self.n)
            .field("stencil", &self.stencil)
            .finish()
    }
}

impl TorusGrid {
    pub(crate) fn new(length: f64, n: usize, stencil: Stencil) -> Self {
        let h = length / n as f64;
        let wavenumber = |m: usize| -> f64 {
            let k = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
            2.0 * std::f64::consts::PI * k / length
        };
        let fd = |m: usize| -> f64 {
            let s = (std::f64::consts::PI * m as f64 / n as f64).sin();
            4.0 * s * s / (h * h)
        };
        let mut symbol = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..n {
                symbol[j * n + i] = match stencil {
                    Stencil::Spectral => -(wavenumber(i).powi(2) + wavenumber(j).powi(2)),
                    Stencil::FivePoint => -(fd(i) + fd(j)),
                };
            }
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        TorusGrid {
            length,
            n,
            stencil,
            symbol,
            forward,
            inverse,
        }
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn stencil(&self) -> Stencil {
        self.stencil
    }

    pub(crate) fn points(&self) -> Vec<[f64; 3]> {
        let h = self.spacing();
        let n = self.n;
        (0..n * n)
            .map(|idx| [(idx % n) as f64 * h, (idx / n) as f64 * h, 0.0])
            .collect()
    }

    fn transpose(&self, buf: &mut [Complex64]) {
        let n = self.n;
        for j in 0..n {
            for i in (j + 1)..n {
                buf.swap(j * n + i, i * n + j);
            }
        }
    }

    fn fft2(&self, buf: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        // rustfft processes the buffer as consecutive length-n rows
        plan.process(buf);
        self.transpose(buf);
        plan.process(buf);
        self.transpose(buf);
    }

    /// Applies the Fourier multiplier `m(symbol)` to a real field.
    pub(crate) fn apply_multiplier(&self, u: &[f64], out: &mut [f64], m: impl Fn(f64) -> f64) {
        let mut buf: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft2(&mut buf, &self.forward);
        for (c, &s) in buf.iter_mut().zip(&self.symbol) {
            *c *= m(s);
        }
        self.fft2(&mut buf, &self.inverse);
        let scale = 1.0 / (self.n * self.n) as f64;
        for (o, c) in out.iter_mut().zip(&buf) {
            *o = c.re * scale;
        }
    }

    pub(crate) fn laplacian(&self, u: &[f64], out: &mut [f64]) {
        match self.stencil {
            Stencil::Spectral => self.apply_multiplier(u, out, |s| s),
            Stencil::FivePoint => {
                let n = self.n;
                let inv_h2 = 1.0 / (self.spacing() * self.spacing());
                for j in 0..n {
                    let jp = (j + 1) % n;
                    let jm = (j + n - 1) % n;
                    for i in 0..n {
                        let ip = (i + 1) % n;
                        let im = (i + n - 1) % n;
                        let c = u[j * n + i];
                        out[j * n + i] = (u[j * n + ip] + u[j * n + im] + u[jp * n + i]
                            + u[jm * n + i]
                            - 4.0 * c)
                            * inv_h2;
                    }
                }
            }
        }
    }

    /// Mean-zero solution of −Δw = f; the zero mode of `f` is discarded.
    pub(crate) fn poisson(&self, f: &[f64], out: &mut [f64]) {
        self.apply_multiplier(f, out, |s| if s == 0.0 { 0.0 } else { -1.0 / s });
    }

    /// Solves (−Δ + shift) x = rhs for a constant shift > 0.
    pub(crate) fn shifted_inverse(&self, shift: f64, rhs: &[f64], out: &mut [f64]) {
        self.apply_multiplier(rhs, out, |s| 1.0 / (shift - s));
    }
}
