//! Numerical laboratory for the Kazdan–Warner equation
//!
//! ```text
//! −Δu + α = K e^{2u}   on a closed surface, α < 0
//! ```
//!
//! The crate computes two distinct solutions when K changes sign with
//! negative mean: a stable one (monotone super/sub-solution iteration, or
//! convex minimization when K ≤ 0) and a second one as a mountain-pass
//! critical point of the shifted energy around the first. Around those sit
//! the principal eigenvalue of the linearization, α-sweeps and a bisection
//! estimate of the solvability threshold α₀.
//!
//! Domains are either the periodic square grid (spectral or 5-point
//! Laplacian) or a closed triangle mesh with the cotangent Laplacian.
//!
//! ```no_run
//! use kwlab::prelude::*;
//!
//! let dom = DiscreteDomain::torus(1.0, 64)?;
//! let k = sample_k(&dom, &KFamily::from_name("cosine", &[1.0, -0.2])?)?;
//! let spec = ProblemSpec::new(dom, k, -0.3)?;
//! let first = solve_min(&spec, &FirstSolutionOptions::default())?;
//! let second = second_solution(&spec, &first, &SecondSolutionOptions::default())?;
//! println!("{} vs {}", first.energy_f, second.record.energy_f);
//! # Ok::<(), kwlab::Error>(())
//! ```

// `!(x > 0.0)` style guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod continuation;
pub mod domain;
pub mod energy;
mod error;
pub mod io;
pub mod linalg;
pub mod mountainpass;
pub mod problem;
pub mod solvers;
pub mod spectral;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::continuation::{alpha_sweep, estimate_alpha0, SweepConfig, SweepRecord};
    pub use crate::domain::{build_torus_grid, load_triangle_mesh, DiscreteDomain, ScalarField, Stencil};
    pub use crate::energy::{energy_f, energy_j, grad_f, grad_j, residual, second_variation, shifted_weight};
    pub use crate::mountainpass::{second_solution, SecondSolutionOptions};
    pub use crate::problem::{
        manufacture, sample_k, sub_solution_constant, super_solution_continuation,
        super_solution_kneg, validate_spec, KFamily, ProblemSpec,
    };
    pub use crate::solvers::{
        convex_minimize, monotone_solve, newton_polish, solve_min, FirstSolutionOptions, Method,
        MonotoneOptions, NewtonOptions, SolutionRecord,
    };
    pub use crate::spectral::{principal_eigen, EigenResult};
    pub use crate::Error;
}
