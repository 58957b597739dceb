//! Reference cube, conformal maps and the effective density `Σ̄ = |f'|² ρ`.
//!
//! The reference domain is the cube `[-L, L]^d`. In two dimensions a
//! conformal map `w = f(x + iy)` carries it onto a membrane whose physical
//! density `ρ(u, v)` is given in target coordinates `(u, v) = (Re w, Im w)`;
//! the problem on the membrane then becomes a variable-density problem on the
//! square with density `Σ̄(x, y) = |f'(z)|² ρ(u, v)`.

mod map;

use num_complex::Complex64;
use thiserror::Error;

use crate::exprdsl::{DensityExpr, EvalError, Point};
use crate::quadrature::GaussLegendre;

pub use map::{ConformalMap, Stage};

/// Per-axis Gauss–Legendre order used for geometric integrals.
pub const DEFAULT_QUADRATURE_ORDER: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("point ({re}, {im}) lies outside the reference square")]
    OutOfDomain { re: f64, im: f64 },
    #[error("map derivative is singular at the square corner ({re}, {im})")]
    CornerSingularity { re: f64, im: f64 },
    #[error("map derivative vanishes at interior point ({x}, {y})")]
    ZeroDerivative { x: f64, y: f64 },
    #[error("density is not positive at ({x}, {y}): {value}")]
    NonPositiveDensity { x: f64, y: f64, value: f64 },
    #[error("density evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("invalid map description: {0}")]
    MapSyntax(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("{0}")]
    Unsupported(String),
}

/// The cube `[-L, L]^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubeDomain {
    dimension: usize,
    half_side: f64,
}

impl CubeDomain {
    pub fn new(dimension: usize, half_side: f64) -> Result<Self, GeometryError> {
        if dimension == 0 {
            return Err(GeometryError::InvalidDomain("dimension must be at least 1".into()));
        }
        if !(half_side > 0.0 && half_side.is_finite()) {
            return Err(GeometryError::InvalidDomain(format!("half side must be positive, got {half_side}")));
        }
        Ok(Self { dimension, half_side })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn half_side(&self) -> f64 {
        self.half_side
    }

    pub fn side(&self) -> f64 {
        2.0 * self.half_side
    }

    /// `V_d = (2L)^d`.
    pub fn volume(&self) -> f64 {
        self.side().powi(self.dimension as i32)
    }

    /// Total measure of the `2d` faces, `2d (2L)^{d-1}`.
    pub fn surface(&self) -> f64 {
        2.0 * self.dimension as f64 * self.side().powi(self.dimension as i32 - 1)
    }
}

/// `Σ̄(x, y) = Σ(x, y) ρ(u, v)` on the reference cube.
///
/// For `d != 2` the map must be the identity. Density expressions can only
/// read the first two coordinates, so in `d >= 3` the density is constant
/// along the remaining axes.
#[derive(Debug, Clone)]
pub struct EffectiveDensity {
    domain: CubeDomain,
    map: ConformalMap,
    rho: DensityExpr,
}

impl EffectiveDensity {
    pub fn new(domain: CubeDomain, map: ConformalMap, rho: DensityExpr) -> Result<Self, GeometryError> {
        if !map.is_identity() && domain.dimension() != 2 {
            return Err(GeometryError::Unsupported(format!(
                "conformal maps need d = 2, got d = {}",
                domain.dimension()
            )));
        }
        Ok(Self { domain, map, rho })
    }

    /// Homogeneous density `Σ̄ ≡ value` with the identity map.
    pub fn uniform(domain: CubeDomain, value: f64) -> Self {
        Self { domain, map: ConformalMap::identity(), rho: DensityExpr::constant(value) }
    }

    pub fn domain(&self) -> &CubeDomain {
        &self.domain
    }

    pub fn map(&self) -> &ConformalMap {
        &self.map
    }

    pub fn rho(&self) -> &DensityExpr {
        &self.rho
    }

    /// Stable textual description, used for hashing spectra.
    pub fn describe(&self) -> String {
        format!(
            "d={};L={};map={};rho={}",
            self.domain.dimension(),
            self.domain.half_side(),
            self.map,
            self.rho
        )
    }

    /// Σ̄ at `(x, y)` (2-D and higher; extra coordinates are ignored).
    pub fn at(&self, x: f64, y: f64) -> Result<f64, GeometryError> {
        let (sigma, point) = if self.map.is_identity() {
            (1.0, Point::all(x, y, x, y))
        } else {
            let (w, dw) = self.map.eval_with_derivative(Complex64::new(x, y))?;
            (dw.norm_sqr(), Point::all(w.re, w.im, x, y))
        };
        if sigma == 0.0 {
            return Err(GeometryError::ZeroDerivative { x, y });
        }
        let value = sigma * self.rho.eval(&point)?;
        if value > 0.0 && value.is_finite() {
            Ok(value)
        } else {
            Err(GeometryError::NonPositiveDensity { x, y, value })
        }
    }

    /// Σ̄ at a point of the cube, given as `d` coordinates.
    pub fn at_point(&self, point: &[f64]) -> Result<f64, GeometryError> {
        match point {
            [x] => {
                let value = self.rho.eval(&Point { u: Some(*x), x: Some(*x), ..Point::default() })?;
                if value > 0.0 && value.is_finite() {
                    Ok(value)
                } else {
                    Err(GeometryError::NonPositiveDensity { x: *x, y: 0.0, value })
                }
            }
            [x, y, ..] => self.at(*x, *y),
            [] => Err(GeometryError::InvalidDomain("empty point".into())),
        }
    }
}

/// `Ā = ∫_Ω Σ̄`, by a tensor Gauss–Legendre rule of `order` points per axis.
pub fn area_integral(s: &EffectiveDensity, order: usize) -> Result<f64, GeometryError> {
    if order < 2 {
        return Err(GeometryError::Unsupported("quadrature order must be at least 2".into()));
    }
    let l = s.domain.half_side();
    let (x, w) = GaussLegendre::new(order).on_interval(-l, l);
    let d = s.domain.dimension();
    if d == 1 {
        let mut acc = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            acc += wi * s.at_point(&[*xi])?;
        }
        return Ok(acc);
    }
    let mut acc = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        let mut row = 0.0;
        for (yj, wj) in x.iter().zip(&w) {
            row += wj * s.at(*xi, *yj)?;
        }
        acc += wi * row;
    }
    Ok(acc * s.domain.side().powi(d as i32 - 2))
}

/// `L̄ = ∮_{∂Ω} Σ̄^{1/2} ds` over the four edges of the square. Only
/// interior Gauss nodes are used, so corners are never evaluated.
pub fn boundary_integral(s: &EffectiveDensity, order: usize) -> Result<f64, GeometryError> {
    if s.domain.dimension() != 2 {
        return Err(GeometryError::Unsupported("boundary integral is defined for d = 2".into()));
    }
    if order < 2 {
        return Err(GeometryError::Unsupported("quadrature order must be at least 2".into()));
    }
    let l = s.domain.half_side();
    let (t, w) = GaussLegendre::new(order).on_interval(-l, l);
    let mut acc = 0.0;
    for (ti, wi) in t.iter().zip(&w) {
        for (x, y) in [(l, *ti), (-l, *ti), (*ti, l), (*ti, -l)] {
            acc += wi * s.at(x, y)?.sqrt();
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsoperimetricReport {
    /// `L̄ / Ā`.
    pub ratio: f64,
    /// Perimeter-to-area ratio of the disk with area `Ā`, `2 sqrt(π / Ā)`.
    pub circle_ratio: f64,
    /// False when `L̄ / Ā` falls below the disk value, which no conformal
    /// image of the square can do.
    pub conformal_admissible: bool,
}

/// Compares `L̄/Ā` against the disk of equal "area". Equality counts as
/// admissible (the disk itself is a conformal image of the square).
pub fn isoperimetric_check(lbar: f64, abar: f64) -> Result<IsoperimetricReport, GeometryError> {
    if !(lbar > 0.0 && abar > 0.0) {
        return Err(GeometryError::Unsupported(format!(
            "isoperimetric check needs positive L̄ and Ā, got {lbar} and {abar}"
        )));
    }
    let ratio = lbar / abar;
    let circle_ratio = 2.0 * (std::f64::consts::PI / abar).sqrt();
    // compare L̄² against 4πĀ so the disk itself lands exactly on the tie
    let admissible = lbar * lbar >= 4.0 * std::f64::consts::PI * abar * (1.0 - 4.0 * f64::EPSILON);
    Ok(IsoperimetricReport { ratio, circle_ratio, conformal_admissible: admissible })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> CubeDomain {
        CubeDomain::new(2, 1.0).unwrap()
    }

    fn density(map: &str, rho: &str) -> EffectiveDensity {
        EffectiveDensity::new(square(), ConformalMap::parse(map, 1.0).unwrap(), DensityExpr::parse(rho).unwrap())
            .unwrap()
    }

    #[test]
    fn cube_constants() {
        let c = CubeDomain::new(3, 0.5).unwrap();
        assert_eq!(c.volume(), 1.0);
        assert_eq!(c.surface(), 6.0);
        assert!(CubeDomain::new(0, 1.0).is_err());
        assert!(CubeDomain::new(2, -1.0).is_err());
    }

    #[test]
    fn effective_density_examples() {
        assert_eq!(density("identity", "1").at(0.3, -0.2).unwrap(), 1.0);
        assert_eq!(density("identity", "1/(1+4*(x^2+y^2))").at(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(density("affine(2,0,0,0)", "1").at(0.7, 0.1).unwrap(), 4.0);
    }

    #[test]
    fn nonpositive_density_is_rejected() {
        let s = density("identity", "x");
        assert!(matches!(s.at(-0.5, 0.0), Err(GeometryError::NonPositiveDensity { .. })));
        let s = density("identity", "1/x");
        assert!(matches!(s.at(0.0, 0.0), Err(GeometryError::Eval(EvalError::DivisionByZero))));
    }

    #[test]
    fn zero_map_derivative_is_rejected() {
        // poly(0,0; 1,0) is z^2, whose derivative vanishes at the origin
        let s = density("poly(0,0; 1,0)", "1");
        assert!(matches!(s.at(0.0, 0.0), Err(GeometryError::ZeroDerivative { .. })));
    }

    #[test]
    fn maps_require_two_dimensions() {
        let cube = CubeDomain::new(3, 1.0).unwrap();
        let err = EffectiveDensity::new(cube, ConformalMap::cardioid(1.0), DensityExpr::constant(1.0));
        assert!(err.is_err());
    }

    #[test]
    fn uniform_integrals() {
        let s = density("identity", "1");
        assert!((area_integral(&s, 64).unwrap() - 4.0).abs() < 1e-12);
        assert!((boundary_integral(&s, 64).unwrap() - 8.0).abs() < 1e-12);
        let s = density("identity", "4");
        assert!((boundary_integral(&s, 64).unwrap() - 16.0).abs() < 1e-12);
    }

    #[test]
    fn polynomial_density_area_matches_independent_oracle() {
        // oracle: composite Simpson on a fine grid, independent of Gauss-Legendre
        let n = 2000;
        let h = 2.0 / n as f64;
        let simpson: f64 = (0..=n)
            .map(|i| {
                let x = -1.0 + i as f64 * h;
                let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                w * x * x
            })
            .sum::<f64>()
            * h
            / 3.0
            * 2.0;
        assert!((simpson - 4.0 / 3.0).abs() < 1e-10);
        let s = density("identity", "x^2");
        assert!((area_integral(&s, 64).unwrap() - 4.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn one_and_higher_dimensional_areas() {
        let line = CubeDomain::new(1, 1.0).unwrap();
        let s = EffectiveDensity::new(line, ConformalMap::identity(), DensityExpr::parse("1+x").unwrap()).unwrap();
        assert!((area_integral(&s, 16).unwrap() - 2.0).abs() < 1e-14);
        let cube = CubeDomain::new(3, 1.0).unwrap();
        let s = EffectiveDensity::new(cube, ConformalMap::identity(), DensityExpr::parse("x^2").unwrap()).unwrap();
        assert!((area_integral(&s, 16).unwrap() - 8.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn conformal_images_have_their_geometric_area_and_perimeter() {
        // the area-normalised cardioid has area pi and perimeter 8 sqrt(2/3)
        let s = EffectiveDensity::new(square(), ConformalMap::cardioid(1.0), DensityExpr::constant(1.0)).unwrap();
        let a = area_integral(&s, 64).unwrap();
        let l = boundary_integral(&s, 200).unwrap();
        assert!((a - std::f64::consts::PI).abs() < 1e-10, "{a}");
        assert!((l - 8.0 * (2.0f64 / 3.0).sqrt()).abs() < 1e-4, "{l}");
        assert!(isoperimetric_check(l, a).unwrap().conformal_admissible);
    }

    #[test]
    fn integrals_converge_with_order() {
        let s = EffectiveDensity::new(
            square(),
            ConformalMap::cardioid(1.0),
            DensityExpr::parse("1/(1+4*(u^2+v^2))").unwrap(),
        )
        .unwrap();
        let exact = area_integral(&s, 256).unwrap();
        let errs: Vec<f64> = [8, 16, 32].iter().map(|&q| (area_integral(&s, q).unwrap() - exact).abs()).collect();
        assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
    }

    #[test]
    fn isoperimetric_examples() {
        let r = isoperimetric_check(3.00112, 1.21205).unwrap();
        assert!((r.ratio - 2.476).abs() < 1e-3);
        assert!((r.circle_ratio - 3.22).abs() < 5e-3);
        assert!(!r.conformal_admissible);

        let r = isoperimetric_check(8.0, 4.0).unwrap();
        assert_eq!(r.ratio, 2.0);
        assert!(r.conformal_admissible);

        let abar: f64 = 1.7;
        let r = isoperimetric_check(2.0 * (std::f64::consts::PI * abar).sqrt(), abar).unwrap();
        assert!(r.conformal_admissible);
        assert!(isoperimetric_check(0.0, 1.0).is_err());
    }
}
