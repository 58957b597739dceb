//! Spectra of inhomogeneous membranes and cavities.
//!
//! `drumlab` computes eigenvalues of the variable-density Helmholtz problem
//! `Δψ + E Σ̄ ψ = 0` on the cube `[-L, L]^d` (and, through conformal maps,
//! on planar membranes of other shapes), and compares them with Weyl-type
//! asymptotics and with a third-order perturbation series in the density.
//!
//! Module map:
//!
//! * [`exprdsl`] parses and evaluates density expressions.
//! * [`geometry`] holds the reference cube, conformal maps and `Σ̄`.
//! * [`basis`] enumerates the homogeneous cube eigenbasis.
//! * [`solver`] runs Rayleigh–Ritz in that basis and spectral diagnostics.
//! * [`perturbation`] evaluates the perturbation series and its resummation.
//! * [`weyl`] evaluates counting functions and asymptotic eigenvalue laws.
//! * [`config`] and [`cli`] drive the `drumlab` command-line tool.

pub mod basis;
pub mod cli;
pub mod config;
pub mod elliptic;
pub mod exprdsl;
pub mod geometry;
pub mod perturbation;
pub mod quadrature;
pub mod solver;
pub mod weyl;
