//! Numerical building blocks: double-exponential quadrature, bracketed root
//! finding and a Nelder–Mead simplex minimiser.

use std::f64::consts::FRAC_PI_2;

use thiserror::Error;

pub use statrs::function::gamma::ln_gamma;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error("quadrature did not reach tolerance {tol:e} (last estimate {estimate}, change {change:e})")]
    Quadrature { estimate: f64, change: f64, tol: f64 },
    #[error("integrand is not finite at x = {0}")]
    NonFinite(f64),
    #[error("no sign change on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("invalid interval [{0}, {1}]")]
    Interval(f64, f64),
}

const MAX_LEVELS: usize = 12;
const T_MAX: f64 = 4.0;
// Relative tolerances below this are not attainable in double precision.
const FLOOR: f64 = 1e-14;

/// `∫_a^b f` by tanh-sinh quadrature.
///
/// Abscissae cluster near both endpoints, so integrable endpoint
/// singularities are handled. `f` is never evaluated at `a` or `b`.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64, NumericError> {
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(NumericError::Interval(a, b));
    }
    if a == b {
        return Ok(0.0);
    }
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    // abscissa at parameter t, measured from the nearer endpoint
    let node = |t: f64| -> Option<(f64, f64)> {
        let u = FRAC_PI_2 * t.sinh();
        let e = (-2.0 * u.abs()).exp();
        // 1 - tanh|u| without cancellation
        let gap = 2.0 * e / (1.0 + e);
        let w = FRAC_PI_2 * t.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e)) * half;
        let off = half * gap;
        let x = if t < 0.0 { a + off } else if t > 0.0 { b - off } else { mid };
        if x <= a || x >= b {
            return None;
        }
        Some((x, w))
    };
    let eval = |t: f64| -> Result<f64, NumericError> {
        match node(t) {
            Some((x, w)) => {
                let v = f(x);
                if !v.is_finite() {
                    return Err(NumericError::NonFinite(x));
                }
                Ok(v * w)
            }
            None => Ok(0.0),
        }
    };
    let mut h = 1.0_f64;
    let mut sum = eval(0.0)?;
    let mut k = 1;
    while k as f64 * h <= T_MAX {
        let t = k as f64 * h;
        sum += eval(t)? + eval(-t)?;
        k += 1;
    }
    let mut estimate = sum * h;
    let mut change = f64::INFINITY;
    for _ in 0..MAX_LEVELS {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= T_MAX {
            let t = k as f64 * h;
            sum += eval(t)? + eval(-t)?;
            k += 2;
        }
        let next = sum * h;
        change = (next - estimate).abs();
        estimate = next;
        if change <= tol.max(FLOOR) * estimate.abs() || change < 1e-300 {
            return Ok(estimate);
        }
    }
    Err(NumericError::Quadrature { estimate, change, tol })
}

/// `∫_a^∞ f` by exp-sinh quadrature. `f` must decay fast enough for the
/// integral to converge.
pub fn exp_sinh<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64) -> Result<f64, NumericError> {
    if !a.is_finite() {
        return Err(NumericError::Interval(a, f64::INFINITY));
    }
    const UPPER: f64 = 4.5;
    let eval = |t: f64| -> Result<f64, NumericError> {
        let e = (FRAC_PI_2 * t.sinh()).exp();
        let x = a + e;
        if x <= a || !x.is_finite() {
            return Ok(0.0);
        }
        let w = FRAC_PI_2 * t.cosh() * e;
        let v = f(x);
        if !v.is_finite() {
            return Err(NumericError::NonFinite(x));
        }
        let term = v * w;
        Ok(if term.is_finite() { term } else { 0.0 })
    };
    let mut h = 0.5_f64;
    let mut sum = eval(0.0)?;
    let mut k = 1;
    while k as f64 * h <= UPPER {
        let t = k as f64 * h;
        sum += eval(t)? + eval(-t)?;
        k += 1;
    }
    let mut estimate = sum * h;
    let mut change = f64::INFINITY;
    for _ in 0..MAX_LEVELS {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= UPPER {
            let t = k as f64 * h;
            sum += eval(t)? + eval(-t)?;
            k += 2;
        }
        let next = sum * h;
        change = (next - estimate).abs();
        estimate = next;
        if change <= tol.max(FLOOR) * estimate.abs() || change < 1e-300 {
            return Ok(estimate);
        }
    }
    Err(NumericError::Quadrature { estimate, change, tol })
}

/// Composite trapezoid rule on `n` equal panels.
pub fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|k| f(a + k as f64 * h)).sum();
    h * (0.5 * (f(a) + f(b)) + inner)
}

/// Bisection for an increasing predicate: returns the boundary point of
/// `{x : below(x)}` on `[lo, hi]`, assuming `below(lo)` and `!below(hi)`.
pub fn bisect_boundary<P: Fn(f64) -> bool>(below: P, mut lo: f64, mut hi: f64) -> Result<f64, NumericError> {
    if !below(lo) || below(hi) {
        return Err(NumericError::NoBracket { lo, hi });
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Root of `f` on `[lo, hi]` by bisection to machine precision.
pub fn bisect_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Result<f64, NumericError> {
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(NumericError::NoBracket { lo, hi });
    }
    let rising = fhi > 0.0;
    bisect_boundary(|x| (f(x) < 0.0) == rising, lo, hi)
}

/// `ln Σ exp(x_i)`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Settings for [`nelder_mead`].
#[derive(Debug, Clone)]
pub struct NelderMeadConfig {
    pub max_evals: usize,
    /// Stop when the spread of simplex values falls below this.
    pub f_tol: f64,
    /// Initial simplex edge, per coordinate.
    pub step: f64,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        NelderMeadConfig { max_evals: 4000, f_tol: 1e-9, step: 0.2 }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Minimises `f` with the Nelder–Mead simplex method (standard
/// reflection 1, expansion 2, contraction 1/2, shrink 1/2).
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, start: &[f64], cfg: &NelderMeadConfig) -> Minimum {
    let dim = start.len();
    let mut eval = |x: &[f64], count: &mut usize| {
        *count += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut evals = 0;
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let v0 = eval(start, &mut evals);
    simplex.push((start.to_vec(), v0));
    for i in 0..dim {
        let mut x = start.to_vec();
        x[i] += cfg.step;
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }
    let mut converged = false;
    while evals < cfg.max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[dim].1;
        if (worst - best).abs() <= cfg.f_tol * (1.0 + best.abs()) {
            converged = true;
            break;
        }
        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|p| p.0[j]).sum::<f64>() / dim as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            (0..dim).map(|j| centroid[j] + t * (simplex[dim].0[j] - centroid[j])).collect()
        };
        let xr = along(-1.0);
        let vr = eval(&xr, &mut evals);
        if vr < simplex[0].1 {
            let xe = along(-2.0);
            let ve = eval(&xe, &mut evals);
            simplex[dim] = if ve < vr { (xe, ve) } else { (xr, vr) };
        } else if vr < simplex[dim - 1].1 {
            simplex[dim] = (xr, vr);
        } else {
            let (xc, vc) = if vr < worst {
                let xc = along(-0.5);
                let vc = eval(&xc, &mut evals);
                (xc, vc)
            } else {
                let xc = along(0.5);
                let vc = eval(&xc, &mut evals);
                (xc, vc)
            };
            if vc < worst.min(vr) {
                simplex[dim] = (xc, vc);
            } else {
                let x0 = simplex[0].0.clone();
                for p in simplex.iter_mut().skip(1) {
                    for j in 0..dim {
                        p.0[j] = x0[j] + 0.5 * (p.0[j] - x0[j]);
                    }
                    p.1 = eval(&p.0, &mut evals);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Minimum { x, value, evals, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tanh_sinh_polynomial_and_singular() {
        let v = tanh_sinh(|x| x * x, 0.0, 3.0, 1e-12).unwrap();
        assert!((v - 9.0).abs() < 1e-12);
        // ∫_0^1 x^{-1/2} = 2
        let v = tanh_sinh(|x| x.powf(-0.5), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-10, "{v}");
        // half of the Beta(1/2,1/2) normaliser
        let v = tanh_sinh(|x| (x * (1.0 - x)).powf(-0.5), 0.0, 0.5, 1e-12).unwrap();
        assert!((v - std::f64::consts::FRAC_PI_2).abs() < 1e-12, "{v}");
    }

    #[test]
    fn exp_sinh_tails() {
        let v = exp_sinh(|x| (-x).exp(), 0.0, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let v = exp_sinh(|x| 1.0 / ((1.0 + x) * (1.0 + x)), 0.0, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
        let v = exp_sinh(|x| (-x).exp(), 2.0, 1e-12).unwrap();
        assert!((v - (-2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn reversed_interval_is_an_error() {
        assert!(matches!(tanh_sinh(|x| x, 1.0, 0.0, 1e-9), Err(NumericError::Interval(..))));
    }

    #[test]
    fn roots() {
        let r = bisect_root(|x| x * x - 2.0, 0.0, 2.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
        let r = bisect_root(|x| 2.0 - x * x, 0.0, 2.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
        assert!(bisect_root(|x| x * x + 1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let cfg = NelderMeadConfig { f_tol: 1e-14, max_evals: 10_000, ..Default::default() };
        let m = nelder_mead(rosen, &[-1.2, 1.0], &cfg);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-3 && (m.x[1] - 1.0).abs() < 2e-3, "{:?}", m.x);
    }

    #[test]
    fn lse() {
        let v = log_sum_exp(&[1000.0, 1000.0]);
        assert!((v - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }
}
