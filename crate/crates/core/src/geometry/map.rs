use std::fmt;

use num_complex::Complex64;

use super::GeometryError;
use crate::elliptic;
use crate::exprdsl::{DensityExpr, Point};

const M_LEMNISCATE: f64 = 0.5;

/// One primitive conformal map.
#[derive(Debug, Clone, PartialEq)]
pub enum Stage {
    Identity,
    /// `z -> a z + b`, `a != 0`.
    Affine { a: Complex64, b: Complex64 },
    /// `z -> sum_k c_k z^k` for `k = 1..=m` (no constant term).
    PolySeries(Vec<Complex64>),
    /// Schwarz–Christoffel map of the square `[-L, L]^2` onto the unit disk,
    /// with `0 -> 0`, edge midpoints to `±1, ±i` and corners to `e^{iπ/4} i^k`.
    SquareToDisk { half_side: f64 },
}

impl Stage {
    fn eval_with_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64), GeometryError> {
        match self {
            Stage::Identity => Ok((z, Complex64::new(1.0, 0.0))),
            Stage::Affine { a, b } => Ok((a * z + b, *a)),
            Stage::PolySeries(c) => {
                let mut w = Complex64::new(0.0, 0.0);
                let mut dw = Complex64::new(0.0, 0.0);
                for (k, ck) in c.iter().enumerate().rev() {
                    w = (w + ck) * z;
                    dw = dw * z + ck * (k as f64 + 1.0);
                }
                Ok((w, dw))
            }
            Stage::SquareToDisk { half_side } => square_to_disk(z, *half_side),
        }
    }
}

/// Rotates `z` into the closed first quadrant, where the elliptic-function
/// representation stays away from the poles of `sn` at `±iK'`, and uses the
/// four-fold rotation symmetry `g(iz) = i g(z)`.
fn square_to_disk(z: Complex64, half_side: f64) -> Result<(Complex64, Complex64), GeometryError> {
    let slack = 1e-12 * half_side;
    if z.re.abs() > half_side + slack || z.im.abs() > half_side + slack {
        return Err(GeometryError::OutOfDomain { re: z.re, im: z.im });
    }
    let i = Complex64::new(0.0, 1.0);
    let (zq, turn) = if z.re > 0.0 && z.im >= 0.0 || z == Complex64::new(0.0, 0.0) {
        (z, Complex64::new(1.0, 0.0))
    } else if z.re <= 0.0 && z.im > 0.0 {
        (-i * z, i)
    } else if z.re < 0.0 && z.im <= 0.0 {
        (-z, Complex64::new(-1.0, 0.0))
    } else {
        (i * z, -i)
    };
    let k = elliptic::complete_k(M_LEMNISCATE);
    let scale = k / (2.0 * half_side);
    let u = Complex64::new(1.0, -1.0) * zq * scale;
    let (sd, cd, nd) = elliptic::sd_cd_nd(u, M_LEMNISCATE);
    let w = Complex64::new(0.5, 0.5) * sd;
    let dw = cd * nd * scale;
    Ok((turn * w, dw))
}

/// An analytic map `w = f(z)` built as a left-to-right composition of stages:
/// the first stage is applied to `z` first.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalMap {
    stages: Vec<Stage>,
}

impl ConformalMap {
    pub fn identity() -> Self {
        Self { stages: vec![Stage::Identity] }
    }

    pub fn new(stages: Vec<Stage>) -> Result<Self, GeometryError> {
        for s in &stages {
            match s {
                Stage::Affine { a, .. } if a.norm() == 0.0 => {
                    return Err(GeometryError::InvalidMap("affine map with a = 0".into()));
                }
                Stage::PolySeries(c) if c.is_empty() => {
                    return Err(GeometryError::InvalidMap("polynomial map without coefficients".into()));
                }
                Stage::SquareToDisk { half_side } if !(*half_side > 0.0) => {
                    return Err(GeometryError::InvalidMap("square_to_disk needs a positive half side".into()));
                }
                _ => {}
            }
        }
        if stages.is_empty() {
            return Ok(Self::identity());
        }
        Ok(Self { stages })
    }

    /// The area-normalised cardioid: the square onto the unit disk, followed
    /// by `w -> a (w + w²/2)` with `a = sqrt(2/3)` so the enclosed area is `π`.
    pub fn cardioid(half_side: f64) -> Self {
        let a = (2.0f64 / 3.0).sqrt();
        Self {
            stages: vec![
                Stage::SquareToDisk { half_side },
                Stage::PolySeries(vec![Complex64::new(a, 0.0), Complex64::new(0.5 * a, 0.0)]),
            ],
        }
    }

    /// `self` followed by `next`.
    pub fn then(mut self, next: ConformalMap) -> Self {
        self.stages.extend(next.stages);
        self.stages.retain(|s| *s != Stage::Identity);
        if self.stages.is_empty() {
            self.stages.push(Stage::Identity);
        }
        self
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn is_identity(&self) -> bool {
        self.stages.iter().all(|s| *s == Stage::Identity)
    }

    /// `(f(z), f'(z))`, with the derivative accumulated by the chain rule.
    pub fn eval_with_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64), GeometryError> {
        let mut w = z;
        let mut dw = Complex64::new(1.0, 0.0);
        for s in &self.stages {
            let (next, d) = s.eval_with_derivative(w)?;
            w = next;
            dw *= d;
        }
        Ok((w, dw))
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64, GeometryError> {
        self.eval_with_derivative(z).map(|(w, _)| w)
    }

    /// `f'(z)`. Square corners are rejected for maps containing a
    /// square-to-disk stage, since the derivative degenerates there.
    pub fn derivative(&self, z: Complex64) -> Result<Complex64, GeometryError> {
        if let Some(Stage::SquareToDisk { half_side }) = self.stages.first() {
            let tol = 1e-12 * half_side;
            if (z.re.abs() - half_side).abs() <= tol && (z.im.abs() - half_side).abs() <= tol {
                return Err(GeometryError::CornerSingularity { re: z.re, im: z.im });
            }
        }
        self.eval_with_derivative(z).map(|(_, d)| d)
    }

    /// `Σ = |f'(z)|²`.
    pub fn conformal_density(&self, z: Complex64) -> Result<f64, GeometryError> {
        self.derivative(z).map(|d| d.norm_sqr())
    }

    /// Parses `identity`, `affine(a_re,a_im,b_re,b_im)`,
    /// `poly(c1_re,c1_im; c2_re,c2_im; ...)` and `square_to_disk` joined by
    /// `|` (applied left to right). Coefficients may be constant expressions
    /// such as `sqrt(2/3)`.
    pub fn parse(text: &str, half_side: f64) -> Result<Self, GeometryError> {
        let mut stages = Vec::new();
        for part in text.split('|') {
            let part = part.trim();
            let (name, args) = match part.find('(') {
                Some(open) => {
                    let inner = part[open + 1..]
                        .strip_suffix(')')
                        .ok_or_else(|| GeometryError::MapSyntax(format!("missing `)` in `{part}`")))?;
                    (part[..open].trim(), Some(inner))
                }
                None => (part, None),
            };
            let stage = match (name, args) {
                ("identity", None) => Stage::Identity,
                ("square_to_disk", None) => Stage::SquareToDisk { half_side },
                ("affine", Some(args)) => {
                    let v = parse_numbers(args, ',')?;
                    if v.len() != 4 {
                        return Err(GeometryError::MapSyntax(format!(
                            "affine takes 4 numbers (a_re,a_im,b_re,b_im), got {}",
                            v.len()
                        )));
                    }
                    Stage::Affine { a: Complex64::new(v[0], v[1]), b: Complex64::new(v[2], v[3]) }
                }
                ("poly", Some(args)) => {
                    let mut coeffs = Vec::new();
                    for pair in args.split(';') {
                        let v = parse_numbers(pair, ',')?;
                        match v.as_slice() {
                            [re] => coeffs.push(Complex64::new(*re, 0.0)),
                            [re, im] => coeffs.push(Complex64::new(*re, *im)),
                            _ => {
                                return Err(GeometryError::MapSyntax(format!(
                                    "poly coefficient `{}` must be `re,im`",
                                    pair.trim()
                                )));
                            }
                        }
                    }
                    Stage::PolySeries(coeffs)
                }
                _ => return Err(GeometryError::MapSyntax(format!("unknown map stage `{part}`"))),
            };
            stages.push(stage);
        }
        Self::new(stages)
    }
}

fn parse_numbers(text: &str, sep: char) -> Result<Vec<f64>, GeometryError> {
    text.split(sep)
        .map(|item| {
            let expr = DensityExpr::parse(item.trim())
                .map_err(|e| GeometryError::MapSyntax(format!("coefficient `{}`: {e}", item.trim())))?;
            expr.eval(&Point::default())
                .map_err(|e| GeometryError::MapSyntax(format!("coefficient `{}`: {e}", item.trim())))
        })
        .collect()
}

impl fmt::Display for ConformalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.stages.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            match s {
                Stage::Identity => write!(f, "identity")?,
                Stage::SquareToDisk { .. } => write!(f, "square_to_disk")?,
                Stage::Affine { a, b } => write!(f, "affine({},{},{},{})", a.re, a.im, b.re, b.im)?,
                Stage::PolySeries(c) => {
                    write!(f, "poly(")?;
                    for (k, ck) in c.iter().enumerate() {
                        if k > 0 {
                            write!(f, "; ")?;
                        }
                        write!(f, "{},{}", ck.re, ck.im)?;
                    }
                    write!(f, ")")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussLegendre;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn primitive_values() {
        let id = ConformalMap::identity();
        assert_eq!(id.eval(c(0.3, 0.1)).unwrap(), c(0.3, 0.1));
        assert_eq!(id.derivative(c(0.7, -0.2)).unwrap(), c(1.0, 0.0));

        let affine = ConformalMap::parse("affine(2,0,0,0)", 1.0).unwrap();
        assert_eq!(affine.eval(c(1.0, 0.0)).unwrap(), c(2.0, 0.0));
        assert_eq!(affine.conformal_density(c(0.1, 0.9)).unwrap(), 4.0);
        let shifted = ConformalMap::parse("affine(2,0,1,0)", 1.0).unwrap();
        assert_eq!(shifted.derivative(c(-0.4, 0.3)).unwrap(), c(2.0, 0.0));

        let poly = ConformalMap::parse("poly(1,0; 0.5,0)", 1.0).unwrap();
        assert_eq!(poly.eval(c(1.0, 0.0)).unwrap(), c(1.5, 0.0));
        assert_eq!(poly.derivative(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        assert!((poly.conformal_density(c(0.0, 1.0)).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn square_to_disk_fixes_symmetry_points() {
        let m = ConformalMap::parse("square_to_disk", 1.0).unwrap();
        assert!(m.eval(c(0.0, 0.0)).unwrap().norm() < 1e-16);
        for (z, w) in [(c(1.0, 0.0), c(1.0, 0.0)), (c(0.0, 1.0), c(0.0, 1.0)), (c(-1.0, 0.0), c(-1.0, 0.0))] {
            assert!((m.eval(z).unwrap() - w).norm() < 1e-14, "{z}");
        }
        let corner = m.eval(c(1.0, 1.0)).unwrap();
        assert!((corner - Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)).norm() < 1e-14);
        assert!(matches!(m.derivative(c(-1.0, 1.0)), Err(GeometryError::CornerSingularity { .. })));
        assert!(matches!(m.eval(c(1.5, 0.0)), Err(GeometryError::OutOfDomain { .. })));
    }

    #[test]
    fn square_to_disk_maps_boundary_to_unit_circle() {
        let m = ConformalMap::parse("square_to_disk", 0.7).unwrap();
        for i in 0..=40 {
            let t = -0.7 + 1.4 * i as f64 / 40.0;
            for z in [c(0.7, t), c(-0.7, t), c(t, 0.7), c(t, -0.7)] {
                assert!((m.eval(z).unwrap().norm() - 1.0).abs() < 1e-13, "{z}");
            }
        }
    }

    #[test]
    fn square_to_disk_derivative_matches_finite_differences() {
        let m = ConformalMap::parse("square_to_disk", 1.0).unwrap();
        let h = 1e-6;
        for z in [c(0.3, 0.2), c(-0.8, 0.95), c(0.99, -0.99), c(-0.2, -0.7), c(0.0, 0.5)] {
            let fd = (m.eval(z + h).unwrap() - m.eval(z - h).unwrap()) / (2.0 * h);
            assert!((fd - m.derivative(z).unwrap()).norm() < 1e-8, "{z}");
        }
    }

    #[test]
    fn square_to_disk_area_is_pi() {
        // the disk area is the integral of |g'|^2 over the square
        let m = ConformalMap::parse("square_to_disk", 1.0).unwrap();
        let rule = GaussLegendre::new(64);
        let mut area = 0.0;
        for (x, wx) in rule.nodes().iter().zip(rule.weights()) {
            for (y, wy) in rule.nodes().iter().zip(rule.weights()) {
                area += wx * wy * m.conformal_density(c(*x, *y)).unwrap();
            }
        }
        assert!((area - std::f64::consts::PI).abs() < 1e-12, "{area}");
    }

    #[test]
    fn composition_is_associative() {
        let a = ConformalMap::parse("square_to_disk", 1.0).unwrap();
        let b = ConformalMap::parse("poly(1,0; 0.5,0.1)", 1.0).unwrap();
        let cmap = ConformalMap::parse("affine(0.5,-1,0.2,0.3)", 1.0).unwrap();
        let left = a.clone().then(b.clone()).then(cmap.clone());
        let right = a.then(b.then(cmap));
        for z in [c(0.1, 0.2), c(-0.9, 0.4), c(0.5, -0.5)] {
            let (wl, dl) = left.eval_with_derivative(z).unwrap();
            let (wr, dr) = right.eval_with_derivative(z).unwrap();
            assert!((wl - wr).norm() < 1e-12 && (dl - dr).norm() < 1e-12);
        }
    }

    #[test]
    fn affine_prefix_scales_density_by_modulus_squared() {
        let m = ConformalMap::cardioid(1.0);
        let scaled = m.clone().then(ConformalMap::parse("affine(0.3,1.2,5,5)", 1.0).unwrap());
        let factor = Complex64::new(0.3, 1.2).norm_sqr();
        for z in [c(0.1, 0.2), c(-0.9, 0.4), c(0.5, -0.5)] {
            let s0 = m.conformal_density(z).unwrap();
            let s1 = scaled.conformal_density(z).unwrap();
            assert!((s1 - factor * s0).abs() < 1e-12 * s1.max(1.0));
        }
    }

    #[test]
    fn parse_accepts_constant_expressions_and_rejects_garbage() {
        let m = ConformalMap::parse("square_to_disk | poly(sqrt(2/3),0; sqrt(2/3)/2, 0)", 1.0).unwrap();
        assert_eq!(m, ConformalMap::cardioid(1.0));
        assert_eq!(ConformalMap::parse(" identity ", 2.0).unwrap(), ConformalMap::identity());
        for bad in ["squre_to_disk", "affine(1,0)", "affine(0,0,1,1)", "poly(1,0", "poly(u,0)", "poly(1,2,3)", ""] {
            assert!(ConformalMap::parse(bad, 1.0).is_err(), "{bad}");
        }
    }

    #[test]
    fn display_round_trips() {
        let m = ConformalMap::parse("square_to_disk | poly(1,0; 0.5,0) | affine(2,0,1,-1)", 1.0).unwrap();
        assert_eq!(ConformalMap::parse(&m.to_string(), 1.0).unwrap(), m);
    }
}
