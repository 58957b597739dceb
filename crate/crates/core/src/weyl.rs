//! Weyl-type asymptotics for the cube and for conformally mapped membranes.
//!
//! Two-term counting functions for the cube,
//! `N^(D)(E) = a E^{d/2} - b E^{(d-1)/2}` and `N^(N)(E) = a E^{d/2} + b E^{(d-1)/2}`
//! with `a = (2L)^d / ((4π)^{d/2} Γ(d/2+1))` and
//! `b = (2L)^{d-1} d sqrt(π) / ((4π)^{d/2} Γ(d/2+1/2))`, and the energy laws
//! obtained by dividing the homogeneous eigenvalues by the mean density.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;
use thiserror::Error;

use crate::basis::BoundaryCondition;
use crate::geometry::CubeDomain;

const INVERSION_CAP: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeylError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("mode count must be at least 1, got {0}")]
    CountTooSmall(f64),
    #[error("no energy below {cap:e} reaches N = {target}")]
    NoRoot { target: f64, cap: f64 },
}

/// An asymptotic estimate of the `N`-th eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylEstimate {
    pub bc: BoundaryCondition,
    pub n: f64,
    /// Volume term only.
    pub leading: f64,
    /// Volume plus boundary term.
    pub corrected: f64,
    pub terms_used: Vec<&'static str>,
}

fn sign(bc: BoundaryCondition) -> f64 {
    match bc {
        BoundaryCondition::Dirichlet => 1.0,
        BoundaryCondition::Neumann => -1.0,
    }
}

fn positive(name: &'static str, value: f64) -> Result<(), WeylError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(WeylError::NonPositive { name, value })
    }
}

fn at_least_one(n: f64) -> Result<(), WeylError> {
    if n >= 1.0 { Ok(()) } else { Err(WeylError::CountTooSmall(n)) }
}

/// `(a, b)` of the two-term counting function, see the module docs.
pub fn counting_coefficients(domain: &CubeDomain) -> (f64, f64) {
    let d = domain.dimension() as f64;
    let s = domain.side();
    let norm = (4.0 * PI).powf(d / 2.0);
    let a = s.powf(d) / (norm * gamma(d / 2.0 + 1.0));
    let b = s.powf(d - 1.0) * d * PI.sqrt() / (norm * gamma(d / 2.0 + 0.5));
    (a, b)
}

/// Smooth two-term approximation of the Dirichlet staircase.
pub fn counting_dirichlet(domain: &CubeDomain, e: f64) -> f64 {
    let (a, b) = counting_coefficients(domain);
    let d = domain.dimension() as f64;
    if e <= 0.0 {
        return 0.0;
    }
    a * e.powf(d / 2.0) - b * e.powf((d - 1.0) / 2.0)
}

/// Neumann counterpart: the surface term changes sign.
pub fn counting_neumann(domain: &CubeDomain, e: f64) -> f64 {
    let (a, b) = counting_coefficients(domain);
    let d = domain.dimension() as f64;
    if e <= 0.0 {
        return 0.0;
    }
    a * e.powf(d / 2.0) + b * e.powf((d - 1.0) / 2.0)
}

pub fn counting(domain: &CubeDomain, bc: BoundaryCondition, e: f64) -> f64 {
    match bc {
        BoundaryCondition::Dirichlet => counting_dirichlet(domain, e),
        BoundaryCondition::Neumann => counting_neumann(domain, e),
    }
}

/// Generalised Weyl law on the cube filled with density `Σ̄`:
///
/// `E_N ≈ (π/L²)(2L)^d (Γ(d/2+1) N)^{2/d} / ∫Σ̄ · [1 ± Γ(d/2+1)^{(d-1)/d} / Γ((d+1)/2) · N^{-1/d}]`,
///
/// `+` for Dirichlet and `-` for Neumann.
pub fn weyl_energy_general(
    domain: &CubeDomain,
    density_integral: f64,
    bc: BoundaryCondition,
    n: f64,
) -> Result<WeylEstimate, WeylError> {
    positive("density integral", density_integral)?;
    at_least_one(n)?;
    let d = domain.dimension() as f64;
    let l = domain.half_side();
    let g = gamma(d / 2.0 + 1.0);
    let leading = PI / (l * l) * domain.volume() * (g * n).powf(2.0 / d) / density_integral;
    let bracket = g.powf((d - 1.0) / d) / gamma((d + 1.0) / 2.0) * n.powf(-1.0 / d);
    Ok(WeylEstimate {
        bc,
        n,
        leading,
        corrected: leading * (1.0 + sign(bc) * bracket),
        terms_used: vec!["volume", "cube-surface"],
    })
}

/// Two-dimensional form: `4πN/Ā ± 8 sqrt(πN)/Ā`.
pub fn weyl_energy_2d(abar: f64, bc: BoundaryCondition, n: f64) -> Result<WeylEstimate, WeylError> {
    positive("Ā", abar)?;
    at_least_one(n)?;
    let leading = 4.0 * PI * n / abar;
    Ok(WeylEstimate {
        bc,
        n,
        leading,
        corrected: leading + sign(bc) * 8.0 * (PI * n).sqrt() / abar,
        terms_used: vec!["volume", "square-perimeter"],
    })
}

/// Two-term Weyl conjecture with the density-weighted perimeter:
/// `4πN/Ā ± (L̄/Ā) sqrt(4πN/Ā)`.
pub fn weyl_conjecture_2d(lbar: f64, abar: f64, bc: BoundaryCondition, n: f64) -> Result<WeylEstimate, WeylError> {
    positive("L̄", lbar)?;
    positive("Ā", abar)?;
    at_least_one(n)?;
    let leading = 4.0 * PI * n / abar;
    Ok(WeylEstimate {
        bc,
        n,
        leading,
        corrected: leading + sign(bc) * lbar / abar * leading.sqrt(),
        terms_used: vec!["volume", "weighted-perimeter"],
    })
}

/// Solves `N^(bc)(E) = n` for `E` by bisection.
pub fn invert_counting(domain: &CubeDomain, bc: BoundaryCondition, n: f64) -> Result<f64, WeylError> {
    at_least_one(n)?;
    let f = |e: f64| counting(domain, bc, e) - n;
    let mut lo = 0.0;
    let mut hi = 1.0;
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > INVERSION_CAP {
            return Err(WeylError::NoRoot { target: n, cap: INVERSION_CAP });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
