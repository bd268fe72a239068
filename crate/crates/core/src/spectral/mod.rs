//! Spectral side: the gauge transform to Schrödinger form, Fourier-mode
//! operators and their spectra, and self-adjointness of inverse-square
//! potentials.

pub mod gauge;
pub mod modes;
pub mod self_adjoint;
pub mod tridiag;

pub use gauge::{gauge_transform, GaugePotential};
pub use modes::{
    assemble_mode_operator, assemble_schrodinger, default_x_max, eigen_solve, richardson, singular_coefficient, spectrum_2d,
    Extrapolation, ModeOperator, SpectrumEntry, SpectrumGrid, StaggeredGrid,
};
pub use self_adjoint::{
    classify_alpha, classify_self_adjoint, deficiency_index_numeric, DeficiencyEstimate, SelfAdjointnessReport, Verdict,
};
pub use tridiag::{EigenPair, SymTridiagonal};
