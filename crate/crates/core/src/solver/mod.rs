//! Rayleigh–Ritz spectrum of `Δψ + E Σ̄ ψ = 0` in the cube eigenbasis.
//!
//! Expanding `ψ = Σ c_k Ψ_k` over the truncated homogeneous basis turns the
//! problem into `diag(ε) c = E B c` with the mass matrix `B_{nk} = ⟨n|Σ̄|k⟩`.
//! `B` is symmetric positive definite for any admissible density, so the
//! pencil is reduced through the Cholesky factor `B = R Rᵀ` to the standard
//! symmetric problem `X Xᵀ y = E y` with `X = R⁻¹ diag(sqrt ε)`.
//!
//! Because the basis at cutoff `m` is a subspace of the basis at any larger
//! cutoff, every computed eigenvalue is an upper bound that can only
//! decrease as the cutoff grows.

mod diagnostics;

use faer::linalg::matmul::matmul;
use faer::linalg::triangular_solve::solve_lower_triangular_in_place;
use faer::{Accum, Mat, Side};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::basis::{self, BasisError, BasisSpec, BoundaryCondition, MultiIndex};
use crate::geometry::{EffectiveDensity, GeometryError};
use crate::quadrature::GaussLegendre;

pub use diagnostics::{
    PPW_BOUND, PpwReport, XI_FLOOR, delta_diagnostic, delta_prediction_conjecture, delta_prediction_weylsigma,
    ppw_audit, xi_diagnostic,
};

/// Largest basis assembled by default.
pub const DEFAULT_MAX_STATES: usize = 4096;
/// Fraction of the computed eigenvalues treated as converged.
pub const DEFAULT_RELIABLE_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("basis has {states} states, above the cap of {cap}")]
    TooManyStates { states: usize, cap: usize },
    #[error("mass matrix is not positive definite (under-resolved quadrature or invalid density)")]
    NotPositiveDefinite,
    #[error("eigensolver failed: {0}")]
    Eigen(String),
    #[error("requested {what} beyond the reliable range ({reliable} reliable eigenvalues)")]
    BeyondReliableRange { what: String, reliable: usize },
    #[error("need at least {needed} eigenvalues, have {available}")]
    InsufficientEigenvalues { needed: usize, available: usize },
    #[error("expected a {expected} spectrum, got {got}")]
    WrongBoundaryCondition { expected: BoundaryCondition, got: BoundaryCondition },
    #[error("invalid eigenvalue count {count} for a basis of {size} states")]
    InvalidCount { count: usize, size: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Basis(#[from] BasisError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyOptions {
    /// Per-axis Gauss–Legendre order; `None` picks `max(64, 2·cutoff + 16)`.
    pub quadrature_order: Option<usize>,
    pub max_states: usize,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self { quadrature_order: None, max_states: DEFAULT_MAX_STATES }
    }
}

/// Discrete pencil `(diag(ε), B)` over the states of [`basis::enumerate_states`].
#[derive(Debug, Clone)]
pub struct GalerkinProblem {
    spec: BasisSpec,
    density: EffectiveDensity,
    states: Vec<MultiIndex>,
    stiffness: Vec<f64>,
    mass: Mat<f64>,
    quadrature_order: usize,
}

impl GalerkinProblem {
    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn density(&self) -> &EffectiveDensity {
        &self.density
    }

    pub fn states(&self) -> &[MultiIndex] {
        &self.states
    }

    pub fn stiffness(&self) -> &[f64] {
        &self.stiffness
    }

    pub fn mass(&self) -> &Mat<f64> {
        &self.mass
    }

    pub fn quadrature_order(&self) -> usize {
        self.quadrature_order
    }

    pub fn size(&self) -> usize {
        self.states.len()
    }

    /// Position of `n` in [`Self::states`].
    pub fn position(&self, n: &MultiIndex) -> Option<usize> {
        self.states.iter().position(|s| s == n)
    }

    /// Same pencil with the mass matrix multiplied by `factor`.
    pub fn with_scaled_mass(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.mass = Mat::from_fn(self.size(), self.size(), |i, j| factor * self.mass[(i, j)]);
        out
    }
}

/// Assembles the stiffness diagonal and the dense mass matrix.
///
/// The mass matrix is built from tensor-product quadrature: with
/// `P[(a,b), i] = w_i Ψ_a(x_i) Ψ_b(x_i)` and `S_ij = Σ̄(x_i, y_j)`, the product
/// `P S Pᵀ` holds every `⟨(a,c)|Σ̄|(b,e)⟩` at once. Axes beyond the second
/// contribute Kronecker deltas since densities only depend on `x` and `y`.
pub fn assemble(
    spec: &BasisSpec,
    density: &EffectiveDensity,
    options: AssemblyOptions,
) -> Result<GalerkinProblem, SolverError> {
    let size = spec.size();
    if size > options.max_states {
        return Err(SolverError::TooManyStates { states: size, cap: options.max_states });
    }
    let order = options.quadrature_order.unwrap_or_else(|| basis::default_quadrature_order(spec.cutoff));
    let d = spec.domain.dimension();
    let l = spec.domain.half_side();
    let (x, w) = GaussLegendre::new(order).on_interval(-l, l);
    let axis: Vec<u32> = spec.axis_indices().collect();
    let m = axis.len();
    let q = x.len();
    let phi = Mat::from_fn(m, q, |a, i| basis::mode_value_1d(spec.bc, l, axis[a], x[i]));

    let states = basis::enumerate_states(spec);
    let stiffness: Vec<f64> = states.iter().map(|s| basis::energy_unchecked(&spec.domain, s)).collect();
    let slot = |n: u32| (n - axis[0]) as usize;

    let mass = if d == 1 {
        let mut weighted = Mat::<f64>::zeros(m, q);
        for i in 0..q {
            let s = density.at_point(&[x[i]])?;
            for a in 0..m {
                weighted[(a, i)] = w[i] * s * phi[(a, i)];
            }
        }
        let mut one = Mat::<f64>::zeros(m, m);
        matmul(one.as_mut(), Accum::Replace, weighted.as_ref(), phi.transpose(), 1.0, faer::get_global_parallelism());
        Mat::from_fn(size, size, |i, j| one[(slot(states[i].0[0]), slot(states[j].0[0]))])
    } else {
        let mut sigma = Mat::<f64>::zeros(q, q);
        for i in 0..q {
            for j in 0..q {
                sigma[(i, j)] = density.at(x[i], x[j])?;
            }
        }
        let pairs = Mat::from_fn(m * m, q, |r, i| w[i] * phi[(r / m, i)] * phi[(r % m, i)]);
        let par = faer::get_global_parallelism();
        let mut ps = Mat::<f64>::zeros(m * m, q);
        matmul(ps.as_mut(), Accum::Replace, pairs.as_ref(), sigma.as_ref(), 1.0, par);
        let mut plane = Mat::<f64>::zeros(m * m, m * m);
        matmul(plane.as_mut(), Accum::Replace, ps.as_ref(), pairs.transpose(), 1.0, par);
        Mat::from_fn(size, size, |i, j| {
            let (a, b) = (&states[i].0, &states[j].0);
            if a[2..] != b[2..] {
                return 0.0;
            }
            let row = slot(a[0]) * m + slot(b[0]);
            let col = slot(a[1]) * m + slot(b[1]);
            plane[(row, col)]
        })
    };
    let mass = Mat::from_fn(size, size, |i, j| 0.5 * (mass[(i, j)] + mass[(j, i)]));

    Ok(GalerkinProblem {
        spec: *spec,
        density: density.clone(),
        states,
        stiffness,
        mass,
        quadrature_order: order,
    })
}

/// Sorted eigenvalues for one boundary condition.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub bc: BoundaryCondition,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub basis_cutoff: u32,
    pub quadrature_order: usize,
    /// Hex prefix of a SHA-256 over the density description.
    pub density_hash: String,
    /// Number of leading eigenvalues considered converged.
    pub reliable: usize,
}

impl SpectrumResult {
    pub fn reliable_eigenvalues(&self) -> &[f64] {
        &self.eigenvalues[..self.reliable]
    }

    /// `E_N` with `N` counted from 1; refuses indices past the reliable range.
    pub fn eigenvalue(&self, n: usize) -> Result<f64, SolverError> {
        if n == 0 || n > self.reliable {
            return Err(SolverError::BeyondReliableRange { what: format!("N = {n}"), reliable: self.reliable });
        }
        Ok(self.eigenvalues[n - 1])
    }
}

/// Number of eigenvalues marked reliable for a basis of `size` states.
pub fn reliable_count(size: usize) -> usize {
    (DEFAULT_RELIABLE_FRACTION * size as f64).floor() as usize
}

fn density_hash(description: &str) -> String {
    let digest = Sha256::digest(description.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Lowest `count` eigenvalues, with the default reliability fraction.
pub fn solve_spectrum(p: &GalerkinProblem, count: usize) -> Result<SpectrumResult, SolverError> {
    solve_spectrum_with(p, count, DEFAULT_RELIABLE_FRACTION)
}

pub fn solve_spectrum_with(
    p: &GalerkinProblem,
    count: usize,
    reliable_fraction: f64,
) -> Result<SpectrumResult, SolverError> {
    let n = p.size();
    if count == 0 || count > n {
        return Err(SolverError::InvalidCount { count, size: n });
    }
    let par = faer::get_global_parallelism();
    let llt = p.mass.llt(Side::Lower).map_err(|_| SolverError::NotPositiveDefinite)?;
    let mut x = Mat::<f64>::zeros(n, n);
    for (i, e) in p.stiffness.iter().enumerate() {
        x[(i, i)] = e.sqrt();
    }
    solve_lower_triangular_in_place(llt.L(), x.as_mut(), par);
    let mut c = Mat::<f64>::zeros(n, n);
    matmul(c.as_mut(), Accum::Replace, x.as_ref(), x.transpose(), 1.0, par);
    let mut eigenvalues =
        c.self_adjoint_eigenvalues(Side::Lower).map_err(|e| SolverError::Eigen(format!("{e:?}")))?;
    eigenvalues.truncate(count);
    let reliable = ((reliable_fraction * n as f64).floor() as usize).min(count);
    Ok(SpectrumResult {
        bc: p.spec.bc,
        eigenvalues,
        basis_cutoff: p.spec.cutoff,
        quadrature_order: p.quadrature_order,
        density_hash: density_hash(&p.density.describe()),
        reliable,
    })
}

/// `#{k : E_k <= E}`; a relative slack of `1e-10` absorbs rounding in
/// exactly degenerate levels. Energies past the last reliable eigenvalue are
/// refused.
pub fn staircase(r: &SpectrumResult, e: f64) -> Result<usize, SolverError> {
    if r.reliable == 0 || e > r.eigenvalues[r.reliable - 1] {
        return Err(SolverError::BeyondReliableRange { what: format!("E = {e}"), reliable: r.reliable });
    }
    let limit = e + 1e-10 * e.abs().max(1.0);
    Ok(r.eigenvalues.iter().take_while(|&&v| v <= limit).count())
}
