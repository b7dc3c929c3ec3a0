//! Fraction of phylogenetic diversity kept when tips are sampled.

use super::{check_probability, CppError, ScaleFunction};
use crate::numerics::{exp_sinh, tanh_sinh};

const TOL: f64 = 1e-12;

/// Limit of the diversity ratio for a birth–death tree as the horizon
/// grows, when each tip is kept with probability `p`.
pub fn pd_ratio_inf(b: f64, d: f64, p: f64) -> Result<f64, CppError> {
    check_probability("p", p)?;
    if !(b > 0.0 && d >= 0.0) {
        return Err(CppError::InvalidParameter(format!("rates b = {b}, d = {d}")));
    }
    if d >= b {
        return Err(CppError::Divergent(format!("expected node depth is infinite for d = {d} ≥ b = {b}")));
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    let r = b - d;
    if d == 0.0 {
        return Ok(-p * p.ln() / (1.0 - p));
    }
    let bp = b * p;
    if ((r - bp) / r).abs() < 1e-12 {
        return Ok(-(1.0 - p) / p.ln());
    }
    Ok(d * p / (bp - r) * (bp / r).ln() / (b / r).ln())
}

/// Same limit by quadrature: `p ∫ dt / (1 - p + pW) / ∫ dt / W`.
pub fn pd_ratio_inf_quadrature(w: &ScaleFunction, p: f64) -> Result<f64, CppError> {
    check_probability("p", p)?;
    if w.t_max().is_finite() {
        return Err(CppError::InvalidParameter("needs a scale function defined on [0, ∞)".into()));
    }
    let divergent = |e| CppError::Divergent(format!("∫ dt / W: {e}"));
    let full = exp_sinh(|t| 1.0 / w.value(t), 0.0, TOL).map_err(divergent)?;
    let kept = exp_sinh(|t| 1.0 / (1.0 - p + p * w.value(t)), 0.0, TOL).map_err(divergent)?;
    Ok(p * kept / full)
}

/// Diversity ratio at a finite horizon, `p E(B) / E(A)`, where `A` is a
/// node depth conditioned to be below the horizon and `B` the maximum of a
/// geometric(`p`) number of independent copies of `A`.
pub fn pd_ratio(w: &ScaleFunction, horizon: f64, p: f64) -> Result<f64, CppError> {
    check_probability("p", p)?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(CppError::InvalidParameter(format!("horizon must be positive and finite, got {horizon}")));
    }
    let top = w.depth_cdf(horizon);
    if top <= 0.0 {
        return Err(CppError::Degenerate("no node depth below the horizon".into()));
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    let a_cdf = |t: f64| w.depth_cdf(t) / top;
    let ea = tanh_sinh(|t| 1.0 - a_cdf(t), 0.0, horizon, 1e-10)?;
    let eb = tanh_sinh(
        |t| {
            let f = a_cdf(t);
            1.0 - p * f / (1.0 - (1.0 - p) * f)
        },
        0.0,
        horizon,
        1e-10,
    )?;
    Ok(p * eb / ea)
}

#[cfg(test)]
mod tests {
    use super::super::scale_bd;
    use super::*;

    #[test]
    fn pure_birth_half() {
        let closed = pd_ratio_inf(0.1, 0.0, 0.5).unwrap();
        assert!((closed - std::f64::consts::LN_2).abs() < 1e-12);
        let quad = pd_ratio_inf_quadrature(&scale_bd(0.1, 0.0).unwrap(), 0.5).unwrap();
        assert!((quad - std::f64::consts::LN_2).abs() < 1e-6);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        for ratio in [0.0, 0.5, 0.9] {
            for p in [0.1, 0.5, 0.9] {
                let b = 1.0;
                let closed = pd_ratio_inf(b, ratio * b, p).unwrap();
                let quad = pd_ratio_inf_quadrature(&scale_bd(b, ratio * b).unwrap(), p).unwrap();
                assert!((closed - quad).abs() < 1e-6, "{ratio} {p}: {closed} vs {quad}");
            }
        }
        // r = bp branch
        let c = pd_ratio_inf(1.0, 0.5, 0.5).unwrap();
        let q = pd_ratio_inf_quadrature(&scale_bd(1.0, 0.5).unwrap(), 0.5).unwrap();
        assert!((c - q).abs() < 1e-6);
    }

    #[test]
    fn edge_cases() {
        assert_eq!(pd_ratio_inf(1.0, 0.3, 1.0).unwrap(), 1.0);
        assert!(pd_ratio_inf(1.0, 0.3, 0.0).is_err());
        assert!(matches!(pd_ratio_inf(1.0, 1.0, 0.5), Err(CppError::Divergent(_))));
        assert!(pd_ratio_inf_quadrature(&scale_bd(1.0, 1.0).unwrap(), 0.5).is_err());
        let w = scale_bd(1.0, 0.3).unwrap();
        assert_eq!(pd_ratio(&w, 4.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn concave_increasing_in_p() {
        let grid: Vec<f64> = (1..=20).map(|k| k as f64 / 20.0).collect();
        let vals: Vec<f64> = grid.iter().map(|&p| pd_ratio_inf(1.0, 0.6, p).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
        assert!(vals.windows(3).all(|w| w[0] + w[2] - 2.0 * w[1] < 1e-12));
        assert!(pd_ratio_inf(1.0, 0.6, 1e-9).unwrap() < 1e-6);
    }

    #[test]
    fn finite_horizon_approaches_limit() {
        let w = scale_bd(1.0, 0.5).unwrap();
        let limit = pd_ratio_inf(1.0, 0.5, 0.3).unwrap();
        let far = pd_ratio(&w, 60.0, 0.3).unwrap();
        assert!((far - limit).abs() < 1e-4, "{far} {limit}");
        let near = pd_ratio(&w, 2.0, 0.3).unwrap();
        assert!(near > 0.3 && near < 1.0);
    }
}
