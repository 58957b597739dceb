//! Problem description files.
//!
//! A flat list of `key = value` lines; `#` starts a comment and values may be
//! wrapped in double quotes. Unknown keys are rejected.
//!
//! ```text
//! dimension = 2
//! half_side = 1
//! map = "square_to_disk | poly(sqrt(2/3); sqrt(2/3)/2)"
//! density = "1/(1+4*(u^2+v^2))"
//! bc = both          # dirichlet | neumann | both
//! cutoff = 60
//! quadrature = auto  # or a per-axis order
//! n_min = 1
//! n_max = 200
//! ```

use std::path::Path;

use thiserror::Error;

use crate::basis::{BasisSpec, BoundaryCondition};
use crate::exprdsl::{DensityExpr, ParseError};
use crate::geometry::{ConformalMap, CubeDomain, EffectiveDensity, GeometryError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("line {line}: density `{text}`: {source}")]
    Density {
        line: usize,
        text: String,
        #[source]
        source: ParseError,
    },
    #[error("line {line}: map `{text}`: {source}")]
    Map {
        line: usize,
        text: String,
        #[source]
        source: GeometryError,
    },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    pub dimension: usize,
    pub half_side: f64,
    pub map: String,
    pub density: String,
    pub bcs: Vec<BoundaryCondition>,
    pub cutoff: u32,
    /// `None` means the basis default.
    pub quadrature: Option<usize>,
    pub n_min: usize,
    /// `None` means `min(200, reliable)`.
    pub n_max: Option<usize>,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            dimension: 2,
            half_side: 1.0,
            map: "identity".into(),
            density: "1".into(),
            bcs: vec![BoundaryCondition::Dirichlet, BoundaryCondition::Neumann],
            cutoff: 40,
            quadrature: None,
            n_min: 1,
            n_max: None,
        }
    }
}

fn unquote(value: &str) -> &str {
    value.strip_prefix('"').and_then(|v| v.strip_suffix('"')).unwrap_or(value)
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

impl ProblemConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut density_line = 0;
        let mut map_line = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = strip_comment(raw).trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| ConfigError::Line { line, message: format!("expected `key = value`, got `{content}`") })?;
            let key = key.trim();
            let value = unquote(value.trim());
            let bad = |what: &str| ConfigError::Line { line, message: format!("{key}: {what}, got `{value}`") };
            match key {
                "dimension" => cfg.dimension = value.parse().map_err(|_| bad("expected a positive integer"))?,
                "half_side" => cfg.half_side = value.parse().map_err(|_| bad("expected a number"))?,
                "map" => {
                    cfg.map = value.to_string();
                    map_line = line;
                }
                "density" => {
                    cfg.density = value.to_string();
                    density_line = line;
                }
                "bc" => {
                    cfg.bcs = match value.to_ascii_lowercase().as_str() {
                        "dirichlet" => vec![BoundaryCondition::Dirichlet],
                        "neumann" => vec![BoundaryCondition::Neumann],
                        "both" => vec![BoundaryCondition::Dirichlet, BoundaryCondition::Neumann],
                        _ => return Err(bad("expected dirichlet, neumann or both")),
                    }
                }
                "cutoff" => cfg.cutoff = value.parse().map_err(|_| bad("expected a positive integer"))?,
                "quadrature" => {
                    cfg.quadrature = match value {
                        "auto" => None,
                        _ => Some(value.parse().map_err(|_| bad("expected `auto` or an integer"))?),
                    }
                }
                "n_min" => cfg.n_min = value.parse().map_err(|_| bad("expected a positive integer"))?,
                "n_max" => cfg.n_max = Some(value.parse().map_err(|_| bad("expected a positive integer"))?),
                _ => return Err(ConfigError::Line { line, message: format!("unknown key `{key}`") }),
            }
        }
        cfg.check(density_line, map_line)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::parse(&text)
    }

    fn check(&self, density_line: usize, map_line: usize) -> Result<(), ConfigError> {
        DensityExpr::parse(&self.density).map_err(|source| ConfigError::Density {
            line: density_line,
            text: self.density.clone(),
            source,
        })?;
        if self.dimension == 0 {
            return Err(ConfigError::Invalid("dimension must be at least 1".into()));
        }
        if !(self.half_side > 0.0 && self.half_side.is_finite()) {
            return Err(ConfigError::Invalid(format!("half_side must be positive, got {}", self.half_side)));
        }
        ConformalMap::parse(&self.map, self.half_side).map_err(|source| ConfigError::Map {
            line: map_line,
            text: self.map.clone(),
            source,
        })?;
        if self.cutoff == 0 {
            return Err(ConfigError::Invalid("cutoff must be at least 1".into()));
        }
        if self.quadrature.is_some_and(|q| q < 2) {
            return Err(ConfigError::Invalid("quadrature order must be at least 2".into()));
        }
        if self.n_min == 0 || self.n_max.is_some_and(|m| m < self.n_min) {
            return Err(ConfigError::Invalid(format!(
                "invalid N range {}..{}",
                self.n_min,
                self.n_max.map_or("auto".to_string(), |m| m.to_string())
            )));
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<CubeDomain, ConfigError> {
        CubeDomain::new(self.dimension, self.half_side).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn effective_density(&self) -> Result<EffectiveDensity, ConfigError> {
        let domain = self.domain()?;
        let map = ConformalMap::parse(&self.map, self.half_side)
            .map_err(|source| ConfigError::Map { line: 0, text: self.map.clone(), source })?;
        let rho = DensityExpr::parse(&self.density)
            .map_err(|source| ConfigError::Density { line: 0, text: self.density.clone(), source })?;
        EffectiveDensity::new(domain, map, rho).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn basis(&self, bc: BoundaryCondition) -> Result<BasisSpec, ConfigError> {
        BasisSpec::new(self.domain()?, bc, self.cutoff).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Inclusive `N` range, capped at `reliable` and at 200 unless `n_max` is set.
    pub fn n_range(&self, reliable: usize) -> std::ops::RangeInclusive<usize> {
        let top = self.n_max.unwrap_or(200).min(reliable);
        self.n_min..=top
    }
}
