//! Stay-duration law for detection in hospital.
//!
//! `K` is a duration with survival function `P(K > y)`. With
//! `ψ(x) = x - (b/m) ∫_0^∞ (1 - e^{-xy}) P(K > y) dy` and `φ` its inverse,
//! the observed stay `J` has density
//! `(b/m) / (φ(δ) - δ) · P(K > y) (1 - e^{-φ(δ) y})`.

use std::sync::Arc;

use super::{check_positive, CppError};
use crate::numerics::exp_sinh;

const TOL: f64 = 1e-14;

#[derive(Clone)]
pub struct Hospital {
    pub b: f64,
    pub m: f64,
    survival: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for Hospital {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Hospital").field("b", &self.b).field("m", &self.m).finish_non_exhaustive()
    }
}

impl Hospital {
    pub fn new(b: f64, m: f64, survival: Arc<dyn Fn(f64) -> f64 + Send + Sync>) -> Result<Self, CppError> {
        if !(b >= 0.0 && b.is_finite()) {
            return Err(CppError::InvalidParameter(format!("b must be nonnegative, got {b}")));
        }
        check_positive("m", m)?;
        Ok(Hospital { b, m, survival })
    }

    /// `K` exponential with mean `m`.
    pub fn exponential(b: f64, m: f64) -> Result<Self, CppError> {
        check_positive("m", m)?;
        Self::new(b, m, Arc::new(move |y: f64| (-y / m).exp()))
    }

    pub fn k_survival(&self, y: f64) -> f64 {
        (self.survival)(y)
    }

    pub fn psi(&self, x: f64) -> Result<f64, CppError> {
        if self.b == 0.0 {
            return Ok(x);
        }
        let integral = exp_sinh(|y| -(-x * y).exp_m1() * self.k_survival(y), 0.0, TOL)?;
        Ok(x - self.b / self.m * integral)
    }

    /// Largest `x ≥ 0` with `ψ(x) = δ`, by bisection.
    pub fn phi(&self, delta: f64) -> Result<f64, CppError> {
        check_positive("delta", delta)?;
        let mut hi = delta.max(1.0);
        let mut doublings = 0;
        while self.psi(hi)? <= delta {
            hi *= 2.0;
            doublings += 1;
            if doublings > 200 {
                return Err(crate::numerics::NumericError::NoBracket { lo: 0.0, hi }.into());
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.psi(mid)? <= delta {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // return whichever end is closer
        let (elo, ehi) = ((self.psi(lo)? - delta).abs(), (self.psi(hi)? - delta).abs());
        Ok(if elo <= ehi { lo } else { hi })
    }

    pub fn stay_density(&self, y: f64, delta: f64) -> Result<f64, CppError> {
        if self.b == 0.0 {
            return Err(CppError::Degenerate("no arrivals when b = 0".into()));
        }
        let phi = self.phi(delta)?;
        if !(phi > delta) {
            return Err(CppError::Degenerate(format!("φ(δ) = {phi} does not exceed δ = {delta}")));
        }
        if y < 0.0 {
            return Ok(0.0);
        }
        Ok(self.b / self.m / (phi - delta) * self.k_survival(y) * -(-phi * y).exp_m1())
    }
}
