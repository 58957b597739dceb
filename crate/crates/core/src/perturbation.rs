//! Perturbation series for `Σ̄ = 1 + σ` through third order, and its
//! geometric resummation `E_n ≈ ε_n / ⟨n|Σ̄|n⟩`.
//!
//! With `ω_nk = ε_n − ε_k` and `s_nk = ⟨n|σ|k⟩`:
//!
//! ```text
//! E⁽¹⁾ = −ε_n s_nn
//! E⁽²⁾ = ε_n s_nn² + ε_n² Σ_k s_nk²/ω_nk
//! E⁽³⁾ = −ε_n s_nn³ + ε_n³ s_nn Σ_k s_nk²/ω_nk² − 3ε_n² s_nn Σ_k s_nk²/ω_nk
//!        − ε_n³ Σ_k Σ_m s_nk s_km s_mn / (ω_nk ω_nm)
//! ```
//!
//! Sums run over the cube states `k, m ≠ n` up to an internal cutoff.

use faer::{Mat, Side};
use thiserror::Error;

use crate::basis::{self, BasisError, BasisSpec, MultiIndex};
use crate::geometry::{EffectiveDensity, GeometryError};
use crate::solver::{self, AssemblyOptions, SolverError};

/// Relative size of tail contributions to `E⁽²⁾` that triggers a warning.
const TAIL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PerturbationError {
    #[error("state {state} lies outside the truncation (cutoff {cutoff})")]
    OutsideTruncation { state: MultiIndex, cutoff: u32 },
    #[error("internal cutoff {k_cutoff} is below the state's largest index {max_index}")]
    CutoffTooSmall { k_cutoff: u32, max_index: u32 },
    #[error("diagonal element ⟨n|Σ|n⟩ = {0} is not positive")]
    NonPositiveDiagonal(f64),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationResult {
    pub state: MultiIndex,
    pub k_cutoff: u32,
    /// `E⁽⁰⁾ ..= E⁽³⁾`; only the first two for degenerate states.
    pub orders: Vec<f64>,
    /// Cumulative sums of `orders`.
    pub partial_sums: Vec<f64>,
    pub resummed: f64,
    pub degenerate: bool,
    /// First-order corrections of the degenerate multiplet, ascending.
    pub degenerate_split: Vec<f64>,
    pub warnings: Vec<String>,
}

impl PerturbationResult {
    pub fn order(&self, k: usize) -> Option<f64> {
        self.orders.get(k).copied()
    }

    /// Highest available partial sum.
    pub fn estimate(&self) -> f64 {
        *self.partial_sums.last().expect("E⁽⁰⁾ is always present")
    }
}

fn cumulative(orders: &[f64]) -> Vec<f64> {
    orders
        .iter()
        .scan(0.0, |acc, e| {
            *acc += e;
            Some(*acc)
        })
        .collect()
}

/// Corrections to the energy of cube state `n` through third order.
///
/// `k_cutoff` bounds every index of the intermediate states; it defaults to
/// three times the largest index of `n`.
pub fn perturb_energy(
    spec: &BasisSpec,
    s: &EffectiveDensity,
    n: &MultiIndex,
    k_cutoff: Option<u32>,
) -> Result<PerturbationResult, PerturbationError> {
    spec.validate(n)?;
    if !spec.contains(n) {
        return Err(PerturbationError::OutsideTruncation { state: n.clone(), cutoff: spec.cutoff });
    }
    let k_cutoff = k_cutoff.unwrap_or_else(|| (3 * n.max_index()).max(1));
    if k_cutoff < n.max_index() || k_cutoff == 0 {
        return Err(PerturbationError::CutoffTooSmall { k_cutoff, max_index: n.max_index() });
    }
    let inner = BasisSpec::new(spec.domain, spec.bc, k_cutoff)?;
    let problem = solver::assemble(&inner, s, AssemblyOptions::default())?;
    let states = problem.states();
    let eps = problem.stiffness();
    let sigma = |i: usize, j: usize| problem.mass()[(i, j)] - if i == j { 1.0 } else { 0.0 };
    let at = problem.position(n).expect("state lies inside its own truncation");
    let en = eps[at];
    let snn = sigma(at, at);
    let resummed = resummed_from(en, problem.mass()[(at, at)])?;

    let others: Vec<usize> = (0..states.len()).filter(|&k| k != at).collect();
    let multiplet: Vec<usize> = others.iter().copied().filter(|&k| basis::is_degenerate(en, eps[k])).collect();
    if !multiplet.is_empty() {
        let mut members = vec![at];
        members.extend(&multiplet);
        let block = Mat::from_fn(members.len(), members.len(), |i, j| sigma(members[i], members[j]));
        let mut split: Vec<f64> = block
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| SolverError::Eigen(format!("{e:?}")))?
            .into_iter()
            .map(|v| -en * v)
            .collect();
        split.sort_by(f64::total_cmp);
        let orders = vec![en, -en * snn];
        return Ok(PerturbationResult {
            state: n.clone(),
            k_cutoff,
            partial_sums: cumulative(&orders),
            orders,
            resummed,
            degenerate: true,
            degenerate_split: split,
            warnings: vec![format!(
                "state {n} is degenerate with {} other state(s); orders above 1 are not computed",
                multiplet.len()
            )],
        });
    }

    let tail_from = 0.9 * f64::from(k_cutoff);
    let mut t1 = 0.0;
    let mut t2 = 0.0;
    let mut tail = 0.0;
    let mut ratio = Vec::with_capacity(others.len());
    for &k in &others {
        let snk = sigma(at, k);
        let omega = en - eps[k];
        let term = snk * snk / omega;
        t1 += term;
        t2 += term / omega;
        if f64::from(states[k].max_index()) > tail_from {
            tail += term;
        }
        ratio.push(snk / omega);
    }
    let mut double = 0.0;
    for (a, &k) in others.iter().enumerate() {
        let mut row = 0.0;
        for (b, &m) in others.iter().enumerate() {
            row += sigma(k, m) * ratio[b];
        }
        double += ratio[a] * row;
    }

    let e2 = en * snn * snn + en * en * t1;
    let e3 = -en * snn.powi(3) + en.powi(3) * snn * t2 - 3.0 * en * en * snn * t1 - en.powi(3) * double;
    let mut warnings = Vec::new();
    let tail = en * en * tail;
    if tail.abs() > TAIL_TOLERANCE * e2.abs() && tail.abs() > 1e3 * f64::EPSILON * en {
        warnings.push(format!(
            "second-order sum not converged: states near the internal cutoff {k_cutoff} contribute {tail:e} of E2 = {e2:e}"
        ));
    }
    let orders = vec![en, -en * snn, e2, e3];
    Ok(PerturbationResult {
        state: n.clone(),
        k_cutoff,
        partial_sums: cumulative(&orders),
        orders,
        resummed,
        degenerate: false,
        degenerate_split: Vec::new(),
        warnings,
    })
}

fn resummed_from(en: f64, diagonal: f64) -> Result<f64, PerturbationError> {
    if diagonal > 0.0 && diagonal.is_finite() {
        Ok(en / diagonal)
    } else {
        Err(PerturbationError::NonPositiveDiagonal(diagonal))
    }
}

/// `ε_n / ⟨n|Σ̄|n⟩`.
pub fn resummed_energy(spec: &BasisSpec, s: &EffectiveDensity, n: &MultiIndex) -> Result<f64, PerturbationError> {
    let en = basis::mode_energy(spec, n)?;
    let order = basis::default_quadrature_order(spec.cutoff.max(n.max_index()));
    let diagonal = basis::matrix_element(spec, n, n, |p| s.at_point(p), order)?;
    resummed_from(en, diagonal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BoundaryCondition::{self, Dirichlet, Neumann};
    use crate::exprdsl::DensityExpr;
    use crate::geometry::{ConformalMap, CubeDomain};
    use crate::solver::solve_spectrum;
    use std::f64::consts::PI;

    fn setup(d: usize, bc: BoundaryCondition, cutoff: u32, rho: &str) -> (BasisSpec, EffectiveDensity) {
        let domain = CubeDomain::new(d, 1.0).unwrap();
        let s = EffectiveDensity::new(domain, ConformalMap::identity(), DensityExpr::parse(rho).unwrap()).unwrap();
        (BasisSpec::new(domain, bc, cutoff).unwrap(), s)
    }

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn constant_sigma_is_a_geometric_series() {
        for c in [0.1, -0.2, 0.35] {
            let (spec, s) = setup(2, Dirichlet, 10, &format!("1+({c})"));
            let n = mi(&[2, 2]);
            let r = perturb_energy(&spec, &s, &n, None).unwrap();
            let en = r.orders[0];
            for (k, want) in [en, -en * c, en * c * c, -en * c * c * c].into_iter().enumerate() {
                assert!((r.orders[k] - want).abs() < 1e-12 * en, "order {k}");
            }
            assert!((r.partial_sums[3] - en * (1.0 - c + c * c - c * c * c)).abs() < 1e-12 * en);
            assert!((r.resummed - en / (1.0 + c)).abs() < 1e-12 * en);
            assert!(!r.degenerate);
        }
    }

    #[test]
    fn zero_sigma() {
        let (spec, s) = setup(2, Neumann, 6, "1");
        let r = perturb_energy(&spec, &s, &mi(&[3, 3]), None).unwrap();
        let en = r.orders[0];
        assert!(r.orders[1..].iter().all(|e| e.abs() < 1e-12 * en));
        assert!((r.resummed - en).abs() < 1e-12 * en);
        assert!(r.warnings.is_empty());
    }

    /// Fourth-order central differences of the exact Galerkin eigenvalue in
    /// the strength `t` of `Σ̄ = 1 + t x²`.
    fn taylor_oracle(index: usize, cutoff: u32) -> [f64; 4] {
        let h = 0.01;
        let e = |t: f64| {
            let (spec, s) = setup(1, Dirichlet, cutoff, &format!("1+({t})*x^2"));
            let p = solver::assemble(&spec, &s, AssemblyOptions::default()).unwrap();
            solve_spectrum(&p, index + 1).unwrap().eigenvalues[index]
        };
        let (m2, m1, z, p1, p2) = (e(-2.0 * h), e(-h), e(0.0), e(h), e(2.0 * h));
        let d1 = (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h);
        let d2 = (-p2 + 16.0 * p1 - 30.0 * z + 16.0 * m1 - m2) / (12.0 * h * h) / 2.0;
        let d3 = (p2 - 2.0 * p1 + 2.0 * m1 - m2) / (2.0 * h.powi(3)) / 6.0;
        [z, d1, d2, d3]
    }

    #[test]
    fn one_dimensional_series_matches_taylor_coefficients() {
        let (spec, s) = setup(1, Dirichlet, 40, "1+0.1*x^2");
        let r = perturb_energy(&spec, &s, &mi(&[2]), Some(40)).unwrap();
        let e2 = PI * PI;
        assert!((r.orders[0] - e2).abs() < 1e-13 * e2);
        let first = -e2 * 0.1 * (1.0 / 3.0 - 1.0 / (2.0 * PI * PI));
        assert!((r.orders[1] - first).abs() < 1e-12 * e2);

        let oracle = taylor_oracle(1, 40);
        for k in 1..4 {
            let want = oracle[k] * 0.1f64.powi(k as i32);
            assert!((r.orders[k] - want).abs() < 1e-4 * want.abs(), "order {k}: {} vs {want}", r.orders[k]);
        }
    }

    #[test]
    fn residual_scales_as_fourth_power() {
        let residual = |eps: f64| {
            let rho = format!("1+{eps}*cos(pi*x/2)*cos(pi*y/2)");
            let (spec, s) = setup(2, Dirichlet, 12, &rho);
            let r = perturb_energy(&spec, &s, &mi(&[1, 1]), Some(12)).unwrap();
            let p = solver::assemble(&spec, &s, AssemblyOptions::default()).unwrap();
            let exact = solve_spectrum(&p, 1).unwrap().eigenvalues[0];
            (exact - r.partial_sums[3]).abs()
        };
        let r = [residual(0.1), residual(0.05), residual(0.025)];
        for w in r.windows(2) {
            let factor = w[0] / w[1];
            assert!((8.0..=32.0).contains(&factor), "{factor}");
        }
    }

    #[test]
    fn ground_state_second_order_sum_is_negative() {
        let (spec, s) = setup(2, Dirichlet, 8, "1+0.3*x*y+0.2*sin(x)");
        let r = perturb_energy(&spec, &s, &mi(&[1, 1]), None).unwrap();
        let en = r.orders[0];
        let diag = r.orders[1] / -en;
        assert!(r.orders[2] - en * diag * diag <= 0.0);
    }

    #[test]
    fn degenerate_states_stop_at_first_order() {
        let (spec, s) = setup(2, Dirichlet, 8, "1+0.2*x+0.1*y^2");
        let r = perturb_energy(&spec, &s, &mi(&[1, 2]), None).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.orders.len(), 2);
        assert_eq!(r.partial_sums.len(), 2);
        assert_eq!(r.degenerate_split.len(), 2);
        assert!(!r.warnings.is_empty());
        // the split corrections average to the diagonal first-order terms
        let other = perturb_energy(&spec, &s, &mi(&[2, 1]), None).unwrap();
        let mean = 0.5 * (r.degenerate_split[0] + r.degenerate_split[1]);
        assert!((mean - 0.5 * (r.orders[1] + other.orders[1])).abs() < 1e-12);
    }

    #[test]
    fn resummed_energy_tracks_the_solver() {
        let (spec, s) = setup(2, Dirichlet, 12, "1+0.05*cos(pi*x/2)*cos(pi*y/2)");
        let n = mi(&[1, 1]);
        let en = basis::mode_energy(&spec, &n).unwrap();
        let resummed = resummed_energy(&spec, &s, &n).unwrap();
        let p = solver::assemble(&spec, &s, AssemblyOptions::default()).unwrap();
        let exact = solve_spectrum(&p, 1).unwrap().eigenvalues[0];
        assert!((resummed - exact).abs() < 5e-3 * en);
        let (spec, s) = setup(2, Dirichlet, 4, "1.3");
        assert!((resummed_energy(&spec, &s, &n).unwrap() - en / 1.3).abs() < 1e-13 * en);
    }

    #[test]
    fn truncated_sums_warn() {
        let (spec, s) = setup(1, Dirichlet, 10, "1+0.5*abs(x)");
        let r = perturb_energy(&spec, &s, &mi(&[2]), Some(4)).unwrap();
        assert!(r.warnings.iter().any(|w| w.contains("not converged")));
    }

    #[test]
    fn errors() {
        let (spec, s) = setup(2, Dirichlet, 4, "1");
        assert!(matches!(
            perturb_energy(&spec, &s, &mi(&[5, 1]), None),
            Err(PerturbationError::OutsideTruncation { .. })
        ));
        assert!(matches!(perturb_energy(&spec, &s, &mi(&[0, 1]), None), Err(PerturbationError::Basis(_))));
        assert!(matches!(
            perturb_energy(&spec, &s, &mi(&[3, 1]), Some(2)),
            Err(PerturbationError::CutoffTooSmall { .. })
        ));
    }
}
