//! Cole–Hopf solutions of the stochastic Burgers equation, built from the
//! mollified multiplicative stochastic heat equation on the torus.
//!
//! The pipeline: sample a space-time white-noise path ([`noise`]), mollify
//! it at scale `1/n`, solve for `Z_n` ([`heat`]), take `U_n = ∂x ln Z_n`
//! ([`colehopf`]), and test it against smooth functions ([`weakform`]).
//! [`experiments`] packages the numerical studies run by `colehopf-lab`.

pub mod colehopf;
pub mod error;
pub mod experiments;
pub mod field;
pub mod grid;
pub mod heat;
pub mod mollifier;
pub mod noise;
pub mod quadrature;
pub mod spectral;
pub mod weakform;

pub use colehopf::{colehopf_transform, log_field, stability_compare, DerivativeKind, DerivativeOperator, StabilityReport};
pub use error::{Error, Result};
pub use field::{Field, Label};
pub use grid::GridSpec;
pub use heat::{solve_heat_ito, solve_heat_strat, solve_kpz_direct, InitialDatum};
pub use mollifier::Mollifier;
pub use noise::{mollify, sample_noise, MollifiedNoise, NoiseOrigin, NoisePath};
pub use weakform::{make_test_battery, weak_residual, Bump, LatticeTest, StrictDeltaNet, TestFunction, WeakResidualReport};
