//! Likelihood of node depths and maximum-likelihood fitting.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{scale_bd, scale_from_lifespan, CppError, ScaleFunction};
use crate::chronos::Lifetime;
use crate::numerics::{nelder_mead, NelderMeadConfig};

/// `Σ ln f(h_i) - ln W(T)`: the density of the observed depths times the
/// probability that the next depth exceeds the horizon.
pub fn loglik_cpp(depths: &[f64], w: &ScaleFunction, horizon: f64) -> Result<f64, CppError> {
    let mut total = -w.value(horizon).ln();
    for &h in depths {
        if !(h >= 0.0 && h < horizon) {
            return Err(CppError::DepthOutOfRange { depth: h, horizon });
        }
        total += w.depth_density(h).ln();
    }
    Ok(total)
}

/// Model families for [`mle_fit`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// Birth rate `b`, death rate `d`.
    BirthDeath,
    /// Birth rate `b` with Gamma(`shape`, `scale`) lifetimes, solved on a
    /// grid of `step`. A fixed shape removes it from the search.
    GammaLifespan { step: f64, shape: Option<f64> },
}

#[derive(Debug, Clone, Serialize)]
pub struct Fit {
    pub family: Family,
    pub params: BTreeMap<String, f64>,
    pub loglik: Option<f64>,
    pub evals: usize,
    pub converged: bool,
    /// Set when there are no depths to fit; nothing was estimated.
    pub degenerate: bool,
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) }
}

/// Maximises [`loglik_cpp`] over the family by Nelder–Mead on log
/// parameters, restarting once from the first optimum.
pub fn mle_fit(depths: &[f64], horizon: f64, family: &Family, cfg: &NelderMeadConfig) -> Result<Fit, CppError> {
    if let Some(&h) = depths.iter().find(|&&h| !(h >= 0.0 && h < horizon)) {
        return Err(CppError::DepthOutOfRange { depth: h, horizon });
    }
    if depths.is_empty() {
        return Ok(Fit { family: family.clone(), params: BTreeMap::new(), loglik: None, evals: 0, converged: false, degenerate: true });
    }
    let b0 = 1.0 / median(depths).max(horizon * 1e-6);
    let (names, start): (Vec<&str>, Vec<f64>) = match family {
        Family::BirthDeath => (vec!["b", "d"], vec![b0.ln(), (0.5 * b0).ln()]),
        Family::GammaLifespan { shape: None, .. } => (vec!["b", "shape", "scale"], vec![b0.ln(), 0.0, (2.0 / b0).ln()]),
        Family::GammaLifespan { shape: Some(_), .. } => (vec!["b", "scale"], vec![b0.ln(), (2.0 / b0).ln()]),
    };
    let build = |x: &[f64]| -> Result<ScaleFunction, CppError> {
        match family {
            Family::BirthDeath => scale_bd(x[0].exp(), x[1].exp()),
            Family::GammaLifespan { step, shape } => {
                let (k, theta) = match shape {
                    Some(k) => (*k, x[1].exp()),
                    None => (x[1].exp(), x[2].exp()),
                };
                scale_from_lifespan(x[0].exp(), &Lifetime::Gamma { shape: k, scale: theta }, horizon, *step)
            }
        }
    };
    let objective = |x: &[f64]| match build(x).and_then(|w| loglik_cpp(depths, &w, horizon)) {
        Ok(v) if v.is_finite() => -v,
        _ => f64::INFINITY,
    };
    let first = nelder_mead(objective, &start, cfg);
    let second = nelder_mead(objective, &first.x, cfg);
    let evals = first.evals + second.evals;
    if !second.converged {
        return Err(CppError::NotConverged { evals });
    }
    let mut params: BTreeMap<String, f64> = names.iter().zip(&second.x).map(|(n, v)| (n.to_string(), v.exp())).collect();
    if let Family::GammaLifespan { shape: Some(k), .. } = family {
        params.insert("shape".into(), *k);
    }
    Ok(Fit { family: family.clone(), params, loglik: Some(-second.value), evals, converged: true, degenerate: false })
}
