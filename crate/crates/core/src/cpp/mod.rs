//! Coalescent point processes.
//!
//! A coalescent point process of height `T` is a sequence of i.i.d. node
//! depths killed at the first one exceeding `T`; the kept depths are the
//! teeth of a comb coding the reconstructed tree. The law of one depth is
//! carried by its scale function `W(t) = 1 / P(H > t)`.

mod bottleneck;
mod hospital;
mod likelihood;
mod pd;
mod sample;
mod scale;

pub use bottleneck::{bottleneck_transform, sample_bottlenecked_depth, BottleneckSchedule};
pub use hospital::Hospital;
pub use likelihood::{loglik_cpp, mle_fit, Family, Fit};
pub use pd::{pd_ratio, pd_ratio_inf, pd_ratio_inf_quadrature};
pub use sample::{nu0_tail, nu_alpha_tail, sample_cpp, sample_cpp_poisson, sample_depth};
pub use scale::{
    fk_age_density, scale_bd, scale_from_lifespan, scale_general, scale_inhomogeneous_bd, GeneralScale, GridScale,
    ScaleFunction,
};

use thiserror::Error;

use crate::comb::CombError;
use crate::numerics::NumericError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CppError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid step {step} is coarser than horizon/10 = {limit}")]
    CoarseGrid { step: f64, limit: f64 },
    #[error("scale function decreased at t = {0}")]
    Unstable(f64),
    #[error("depth {depth} is not in [0, {horizon})")]
    DepthOutOfRange { depth: f64, horizon: f64 },
    #[error("invalid bottleneck schedule: {0}")]
    Schedule(String),
    #[error("intensity has no mass above the horizon")]
    NoMassAboveHorizon,
    #[error("divergent integral: {0}")]
    Divergent(String),
    #[error("degenerate model: {0}")]
    Degenerate(String),
    #[error("optimiser did not converge after {evals} evaluations")]
    NotConverged { evals: usize },
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Comb(#[from] CombError),
}

fn check_positive(name: &str, x: f64) -> Result<(), CppError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CppError::InvalidParameter(format!("{name} must be positive and finite, got {x}")))
    }
}

fn check_probability(name: &str, p: f64) -> Result<(), CppError> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(CppError::InvalidParameter(format!("{name} must lie in (0, 1], got {p}")))
    }
}
