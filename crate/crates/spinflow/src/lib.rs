//! Simulator and verification harness for sphere-valued geometric
//! evolution equations (Schrodinger map flow, Landau-Lifshitz dynamics,
//! and their parabolic perturbations) on axis-aligned boxes with
//! homogeneous Neumann boundary conditions.
//!
//! Structure:
//! - [`geometry`]: the unit sphere — distances, tangent planes,
//!   parallel transport.
//! - [`grid`]: vertex-centered boxes, mirror-ghost Neumann stencils,
//!   trapezoidal quadrature, Sobolev norms.
//! - [`dynamics`]: equation right-hand sides, demagnetizing field,
//!   explicit time stepping with renormalization.
//! - [`galerkin`]: Neumann cosine eigenbasis and spectral Galerkin
//!   integration of the perturbed flow.
//! - [`diagnostics`]: analytic identities as runtime residuals
//!   (energy identity, wave-type identities, compatibility conditions,
//!   Gronwall predictor, uniqueness monitor).
//! - [`config`], [`commands`], [`snapshot`]: batch CLI plumbing.

pub mod commands;
pub mod config;
pub mod diagnostics;
pub mod dynamics;
pub mod galerkin;
pub mod geometry;
pub mod grid;
pub mod rng;
pub mod snapshot;
