//! Eigenbasis of the homogeneous cube for Dirichlet and Neumann conditions.
//!
//! One-dimensional modes on `[-L, L]`:
//!
//! * Dirichlet, `n >= 1`: `sin(nπ(x+L)/(2L)) / sqrt(L)`
//! * Neumann, `n >= 1`: `cos(nπx/(2L) - (π/4)(1 - (-1)^n)) / sqrt(L)`, and
//!   `1/sqrt(2L)` for `n = 0`
//!
//! A state of the `d`-cube is a product of one-dimensional modes with energy
//! `ε_n = π²/(4L²) Σ n_i²`.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::geometry::{CubeDomain, EffectiveDensity, GeometryError};
use crate::quadrature::GaussLegendre;

/// Relative gap below which two levels count as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

impl BoundaryCondition {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryCondition::Dirichlet => "dirichlet",
            BoundaryCondition::Neumann => "neumann",
        }
    }

    pub fn min_index(self) -> u32 {
        match self {
            BoundaryCondition::Dirichlet => 1,
            BoundaryCondition::Neumann => 0,
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BasisError {
    #[error("state {index} is not a valid {bc} index for d = {dimension}")]
    InvalidIndex { index: MultiIndex, bc: BoundaryCondition, dimension: usize },
    #[error("cutoff must be at least 1")]
    InvalidCutoff,
    #[error("point has {got} coordinates, expected {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("invalid state `{0}`: expected comma-separated non-negative integers")]
    Syntax(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Quantum numbers `(n_1, ..., n_d)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn new(indices: impl Into<Vec<u32>>) -> Self {
        Self(indices.into())
    }

    pub fn indices(&self) -> &[u32] {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn max_index(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    fn norm_sqr(&self) -> u64 {
        self.0.iter().map(|&n| u64::from(n) * u64::from(n)).sum()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for MultiIndex {
    type Err = BasisError;

    /// Parses `1,2` or `(1,2)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        inner
            .split(',')
            .map(|t| t.trim().parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .map(MultiIndex)
            .map_err(|_| BasisError::Syntax(s.to_string()))
    }
}

/// Truncated cube basis: every index component in `min..=cutoff`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisSpec {
    pub domain: CubeDomain,
    pub bc: BoundaryCondition,
    pub cutoff: u32,
}

impl BasisSpec {
    pub fn new(domain: CubeDomain, bc: BoundaryCondition, cutoff: u32) -> Result<Self, BasisError> {
        if cutoff == 0 {
            return Err(BasisError::InvalidCutoff);
        }
        Ok(Self { domain, bc, cutoff })
    }

    /// Number of one-dimensional modes per axis.
    pub fn modes_per_axis(&self) -> usize {
        (self.cutoff - self.bc.min_index() + 1) as usize
    }

    /// `cutoff^d` (Dirichlet) or `(cutoff+1)^d` (Neumann).
    pub fn size(&self) -> usize {
        self.modes_per_axis().pow(self.domain.dimension() as u32)
    }

    /// One-dimensional mode indices in ascending order.
    pub fn axis_indices(&self) -> impl Iterator<Item = u32> {
        self.bc.min_index()..=self.cutoff
    }

    pub fn validate(&self, n: &MultiIndex) -> Result<(), BasisError> {
        let ok = n.dimension() == self.domain.dimension() && n.0.iter().all(|&i| i >= self.bc.min_index());
        if ok {
            Ok(())
        } else {
            Err(BasisError::InvalidIndex { index: n.clone(), bc: self.bc, dimension: self.domain.dimension() })
        }
    }

    /// True if `n` is valid and inside the truncation.
    pub fn contains(&self, n: &MultiIndex) -> bool {
        self.validate(n).is_ok() && n.max_index() <= self.cutoff
    }
}

/// One-dimensional mode `Ψ_n(x)` on `[-L, L]`.
pub fn mode_value_1d(bc: BoundaryCondition, half_side: f64, n: u32, x: f64) -> f64 {
    let l = half_side;
    let k = f64::from(n) * PI / (2.0 * l);
    match bc {
        BoundaryCondition::Dirichlet => (k * (x + l)).sin() / l.sqrt(),
        BoundaryCondition::Neumann if n == 0 => 1.0 / (2.0 * l).sqrt(),
        BoundaryCondition::Neumann => {
            if n % 2 == 0 {
                (k * x).cos() / l.sqrt()
            } else {
                (k * x).sin() / l.sqrt()
            }
        }
    }
}

/// `Ψ_n(point)` as a product of one-dimensional modes.
pub fn mode_value(spec: &BasisSpec, n: &MultiIndex, point: &[f64]) -> Result<f64, BasisError> {
    spec.validate(n)?;
    if point.len() != n.dimension() {
        return Err(BasisError::DimensionMismatch { got: point.len(), expected: n.dimension() });
    }
    let l = spec.domain.half_side();
    Ok(n.0.iter().zip(point).map(|(&ni, &xi)| mode_value_1d(spec.bc, l, ni, xi)).product())
}

/// `ε_n = π²/(4L²) Σ n_i²`.
pub fn mode_energy(spec: &BasisSpec, n: &MultiIndex) -> Result<f64, BasisError> {
    spec.validate(n)?;
    Ok(energy_unchecked(&spec.domain, n))
}

pub(crate) fn energy_unchecked(domain: &CubeDomain, n: &MultiIndex) -> f64 {
    let l = domain.half_side();
    PI * PI / (4.0 * l * l) * n.norm_sqr() as f64
}

/// `ω_{nk} = ε_n - ε_k`.
pub fn energy_gap(spec: &BasisSpec, n: &MultiIndex, k: &MultiIndex) -> Result<f64, BasisError> {
    Ok(mode_energy(spec, n)? - mode_energy(spec, k)?)
}

/// Degeneracy test `|ε_n - ε_k| <= tol · max(1, ε_n)`.
pub fn is_degenerate(en: f64, ek: f64) -> bool {
    (en - ek).abs() <= DEGENERACY_TOLERANCE * en.abs().max(1.0)
}

/// All indices of the truncated basis ordered by `(ε_n, lexicographic)`.
pub fn enumerate_states(spec: &BasisSpec) -> Vec<MultiIndex> {
    let d = spec.domain.dimension();
    let axis: Vec<u32> = spec.axis_indices().collect();
    let mut states = Vec::with_capacity(spec.size());
    let mut cursor = vec![0usize; d];
    loop {
        states.push(MultiIndex(cursor.iter().map(|&c| axis[c]).collect()));
        let mut i = d;
        loop {
            if i == 0 {
                states.sort_by(compare_states);
                return states;
            }
            i -= 1;
            cursor[i] += 1;
            if cursor[i] < axis.len() {
                break;
            }
            cursor[i] = 0;
        }
    }
}

fn compare_states(a: &MultiIndex, b: &MultiIndex) -> Ordering {
    // ε is proportional to the integer Σ n_i², so the order is exact
    a.norm_sqr().cmp(&b.norm_sqr()).then_with(|| a.0.cmp(&b.0))
}

/// Default per-axis quadrature order for matrix elements at a given cutoff.
pub fn default_quadrature_order(cutoff: u32) -> usize {
    64.max(2 * cutoff as usize + 16)
}

/// `⟨n|g|k⟩ = ∫ Ψ_n Ψ_k g` by a tensor Gauss–Legendre rule of `order` points
/// per axis, summed in a fixed node order.
pub fn matrix_element<G>(
    spec: &BasisSpec,
    n: &MultiIndex,
    k: &MultiIndex,
    g: G,
    order: usize,
) -> Result<f64, BasisError>
where
    G: Fn(&[f64]) -> Result<f64, GeometryError>,
{
    spec.validate(n)?;
    spec.validate(k)?;
    let d = spec.domain.dimension();
    let l = spec.domain.half_side();
    let (x, w) = GaussLegendre::new(order).on_interval(-l, l);
    // per-axis products Ψ_{n_i}(x) Ψ_{k_i}(x) w(x)
    let factors: Vec<Vec<f64>> = (0..d)
        .map(|axis| {
            x.iter()
                .zip(&w)
                .map(|(&xi, &wi)| {
                    wi * (mode_value_1d(spec.bc, l, n.0[axis], xi) * mode_value_1d(spec.bc, l, k.0[axis], xi))
                })
                .collect()
        })
        .collect();
    let q = x.len();
    let mut cursor = vec![0usize; d];
    let mut point = vec![0.0; d];
    let mut acc = 0.0;
    loop {
        let mut weight = 1.0;
        for axis in 0..d {
            point[axis] = x[cursor[axis]];
            weight *= factors[axis][cursor[axis]];
        }
        if weight != 0.0 {
            acc += weight * g(&point)?;
        }
        let mut axis = d;
        loop {
            if axis == 0 {
                return Ok(acc);
            }
            axis -= 1;
            cursor[axis] += 1;
            if cursor[axis] < q {
                break;
            }
            cursor[axis] = 0;
        }
    }
}

/// `(2L)^{-d} ∫ Σ̄`, the large-index limit of `⟨n|Σ̄|n⟩`.
pub fn mean_density_approximation(s: &EffectiveDensity, order: usize) -> Result<f64, GeometryError> {
    Ok(crate::geometry::area_integral(s, order)? / s.domain().volume())
}
