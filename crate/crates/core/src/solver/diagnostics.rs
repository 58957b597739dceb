//! Spectral diagnostics comparing computed eigenvalues with Weyl asymptotics.

use std::f64::consts::PI;

use super::{SolverError, SpectrumResult};
use crate::basis::BoundaryCondition;

/// Value returned by [`xi_diagnostic`] when the deviation is exactly zero.
pub const XI_FLOOR: f64 = -16.0;

const J01: f64 = 2.404825557695773;
const J11: f64 = 3.831705970207512;

/// `(j₁,₁ / j₀,₁)²`, the largest `E₂/E₁` of a homogeneous planar membrane.
pub const PPW_BOUND: f64 = (J11 / J01) * (J11 / J01);

fn pair(rd: &SpectrumResult, rn: &SpectrumResult, n: usize) -> Result<(f64, f64), SolverError> {
    for (r, bc) in [(rd, BoundaryCondition::Dirichlet), (rn, BoundaryCondition::Neumann)] {
        if r.bc != bc {
            return Err(SolverError::WrongBoundaryCondition { expected: bc, got: r.bc });
        }
    }
    Ok((rd.eigenvalue(n)?, rn.eigenvalue(n)?))
}

/// `Ξ_N = log₁₀ |1 − Ā (E_N^D + E_N^N) / (8πN)|`, floored at [`XI_FLOOR`].
pub fn xi_diagnostic(rd: &SpectrumResult, rn: &SpectrumResult, abar: f64, n: usize) -> Result<f64, SolverError> {
    let (ed, en) = pair(rd, rn, n)?;
    let dev = (1.0 - abar * (ed + en) / (8.0 * PI * n as f64)).abs();
    Ok(if dev > 0.0 { dev.log10().max(XI_FLOOR) } else { XI_FLOOR })
}

/// `δ_N = (E_N^D − E_N^N) / 2`.
pub fn delta_diagnostic(rd: &SpectrumResult, rn: &SpectrumResult, n: usize) -> Result<f64, SolverError> {
    let (ed, en) = pair(rd, rn, n)?;
    Ok(0.5 * (ed - en))
}

/// Half the Dirichlet/Neumann splitting of the weighted-perimeter law,
/// `(L̄/Ā) sqrt(4πN/Ā)`.
pub fn delta_prediction_conjecture(lbar: f64, abar: f64, n: usize) -> f64 {
    lbar / abar * (4.0 * PI * n as f64 / abar).sqrt()
}

/// Half the splitting of the square-perimeter law, `8 sqrt(πN) / Ā`.
pub fn delta_prediction_weylsigma(abar: f64, n: usize) -> f64 {
    8.0 * (PI * n as f64).sqrt() / abar
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpwReport {
    pub ratio: f64,
    pub bound: f64,
    pub violates: bool,
}

/// `E₂/E₁` of a Dirichlet spectrum against [`PPW_BOUND`].
pub fn ppw_audit(r: &SpectrumResult) -> Result<PpwReport, SolverError> {
    if r.bc != BoundaryCondition::Dirichlet {
        return Err(SolverError::WrongBoundaryCondition { expected: BoundaryCondition::Dirichlet, got: r.bc });
    }
    if r.eigenvalues.len() < 2 {
        return Err(SolverError::InsufficientEigenvalues { needed: 2, available: r.eigenvalues.len() });
    }
    let ratio = r.eigenvalues[1] / r.eigenvalues[0];
    Ok(PpwReport { ratio, bound: PPW_BOUND, violates: ratio > PPW_BOUND + 1e-6 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisSpec;
    use crate::geometry::{CubeDomain, EffectiveDensity};
    use crate::solver::{AssemblyOptions, assemble, solve_spectrum, staircase};

    fn homogeneous(l: f64, bc: BoundaryCondition, cutoff: u32) -> SpectrumResult {
        let domain = CubeDomain::new(2, l).unwrap();
        let spec = BasisSpec::new(domain, bc, cutoff).unwrap();
        let p = assemble(&spec, &EffectiveDensity::uniform(domain, 1.0), AssemblyOptions::default()).unwrap();
        solve_spectrum(&p, p.size()).unwrap()
    }

    #[test]
    fn bound_value() {
        assert!((PPW_BOUND - 2.5387).abs() < 1e-4);
    }

    #[test]
    fn homogeneous_square_ppw() {
        let r = homogeneous(PI / 2.0, BoundaryCondition::Dirichlet, 6);
        let report = ppw_audit(&r).unwrap();
        assert!((report.ratio - 2.5).abs() < 1e-12);
        assert!(!report.violates);
        assert!(ppw_audit(&homogeneous(1.0, BoundaryCondition::Neumann, 3)).is_err());
    }

    #[test]
    fn staircase_against_lattice_count() {
        let r = homogeneous(PI / 2.0, BoundaryCondition::Dirichlet, 20);
        assert_eq!(staircase(&r, 100.0).unwrap(), 69);
    }

    #[test]
    fn xi_on_the_unit_square() {
        let rd = homogeneous(1.0, BoundaryCondition::Dirichlet, 8);
        let rn = homogeneous(1.0, BoundaryCondition::Neumann, 8);
        let e1d = 2.0 * PI * PI / 4.0;
        let want = (1.0 - 4.0 * (e1d + 0.0) / (8.0 * PI)).abs().log10();
        assert!((xi_diagnostic(&rd, &rn, 4.0, 1).unwrap() - want).abs() < 1e-9);
        assert!(xi_diagnostic(&rd, &rn, 4.0, 100).is_err());
        assert!(xi_diagnostic(&rn, &rd, 4.0, 1).is_err());
    }

    #[test]
    fn xi_floor_on_exact_agreement() {
        let mut rd = homogeneous(1.0, BoundaryCondition::Dirichlet, 4);
        let mut rn = homogeneous(1.0, BoundaryCondition::Neumann, 4);
        rd.eigenvalues[0] = 2.0 * PI;
        rn.eigenvalues[0] = 2.0 * PI;
        assert_eq!(xi_diagnostic(&rd, &rn, 2.0, 1).unwrap(), XI_FLOOR);
    }

    #[test]
    fn dirichlet_dominates_neumann_on_homogeneous_square() {
        let rd = homogeneous(1.0, BoundaryCondition::Dirichlet, 16);
        let rn = homogeneous(1.0, BoundaryCondition::Neumann, 16);
        for n in 1..=rd.reliable.min(rn.reliable) {
            assert!(delta_diagnostic(&rd, &rn, n).unwrap() > 0.0, "N = {n}");
        }
    }

    #[test]
    fn predictions_agree_for_the_square() {
        // L̄ = 8, Ā = 4 for the unit-density square of side 2
        for n in [1, 10, 500] {
            let a = delta_prediction_conjecture(8.0, 4.0, n);
            let b = delta_prediction_weylsigma(4.0, n);
            assert!((a - b).abs() < 1e-12 * b);
        }
    }
}
