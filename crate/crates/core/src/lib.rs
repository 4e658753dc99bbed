//! Diffusion of a quantum particle coupled to a heat bath.
//!
//! Every observable here is a fluctuation-dissipation integral over the
//! imaginary part of the generalized susceptibility of a [`BathModel`]:
//! mean-square displacement and its rate, position correlation, the
//! position commutator, and the width of a measured wave packet.

pub mod accel;
pub mod bath;
pub mod error;
pub(crate) mod gauss;
pub mod observables;
pub mod quadrature;
pub mod series;
pub mod special;
pub mod thermal;
pub mod wavepacket;

pub use bath::{validate_positive_real, BathModel, SpectralDecomposition, ValidationReport};
pub use error::{Error, Result};
pub use observables::{
    closed_form, commutator_magnitude, equal_time_variance, evaluate, msd, msd_asymptotic, msd_rate,
    msd_rate_asymptotic, msd_rate_closed_zero_t, position_correlation, Estimate, Observable,
};
pub use quadrature::{
    integrate_half_line, integrate_oscillatory, integrate_zero_t_formal, IntegralResult, Kernel, QuadratureSpec,
};
pub use series::{
    evaluate_grid, fit_anomalous_exponent, time_grid, AsymptoteComparison, ObservableSeries, SeriesMeta, Spacing,
};
pub use thermal::ThermalContext;
pub use wavepacket::{
    joint_density, joint_gaussian_params, packet_width_asymptotic, packet_width_sq, DominantTerm, JointGaussianParams,
    MeasurementSetup,
};
