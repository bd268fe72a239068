//! Numerical toolkit for two-dimensional almost-Riemannian structures.
//!
//! * [`frame`]: normal-form frames, metric, curvature, Laplace–Beltrami
//!   coefficients and sub-Riemannian curve length.
//! * [`geodesics`]: Hamiltonian geodesic flow, Grushin closed forms, fronts
//!   and singular-set crossings.
//! * [`spectral`]: gauge transform to Schrödinger form, Fourier-mode
//!   operators, tridiagonal eigensolver and self-adjointness classification.
//! * [`evolution`]: heat and Schrödinger evolution under the degenerate
//!   weighted form, and the transmission study across the singular set.
//! * [`martinet`]: Popp volume, sub-Riemannian Laplacian and mode solves for
//!   the Martinet structure.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
pub mod evolution;
pub mod frame;
pub mod geodesics;
pub mod martinet;
pub mod quadrature;
pub mod spectral;

pub use error::{EvolutionError, FrameError, GeodesicError, SpectralError};
pub use frame::{CurveLength, CurveSample, Domain, FrameKind, FrameSpec, MetricData, Phi, PhiPreset, Point};
