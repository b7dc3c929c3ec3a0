//! Scale functions: closed forms and grid solvers.

use super::{check_positive, CppError};
use crate::chronos::Lifetime;

/// `W` on a uniform grid `t_i = i * step`, with `W'` at the same nodes.
/// Both are interpolated linearly and extended linearly past the end.
#[derive(Debug, Clone, PartialEq)]
pub struct GridScale {
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl GridScale {
    pub fn new(step: f64, values: Vec<f64>, slopes: Vec<f64>) -> Result<Self, CppError> {
        check_positive("step", step)?;
        if values.is_empty() || values.len() != slopes.len() {
            return Err(CppError::InvalidParameter("grid values and slopes must have equal nonzero length".into()));
        }
        if values[0] != 1.0 {
            return Err(CppError::InvalidParameter(format!("W(0) = {} instead of 1", values[0])));
        }
        for (i, w) in values.windows(2).enumerate() {
            if !(w[1] >= w[0]) {
                return Err(CppError::Unstable((i + 1) as f64 * step));
            }
        }
        Ok(GridScale { step, values, slopes })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn t_max(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.step
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let last = self.values.len() - 1;
        let x = t / self.step;
        let i = (x.floor() as usize).min(last.saturating_sub(1));
        (i, x - i as f64)
    }

    fn value(&self, t: f64) -> f64 {
        if self.values.len() == 1 {
            return 1.0 + self.slopes[0] * t;
        }
        let (i, f) = self.locate(t);
        if f <= 1.0 {
            self.values[i] + f * (self.values[i + 1] - self.values[i])
        } else {
            let last = self.values.len() - 1;
            self.values[last] + (t - self.t_max()) * self.slopes[last]
        }
    }

    fn slope(&self, t: f64) -> f64 {
        if self.values.len() == 1 {
            return self.slopes[0];
        }
        let (i, f) = self.locate(t);
        let f = f.min(1.0);
        self.slopes[i] + f * (self.slopes[i + 1] - self.slopes[i])
    }
}

/// The law of a node depth through `W(t) = 1 / P(H > t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ScaleFunction {
    /// `W ≡ 1`: every depth is infinite.
    Unit,
    /// Linear birth–death process.
    BirthDeath { b: f64, d: f64 },
    Grid(GridScale),
    /// `base` transformed by bottlenecks `(time, survival)` sorted by time.
    Bottleneck { base: Box<ScaleFunction>, levels: Vec<(f64, f64)> },
}

impl ScaleFunction {
    pub fn value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        match self {
            ScaleFunction::Unit => 1.0,
            ScaleFunction::BirthDeath { b, d } => {
                let r = b - d;
                if r == 0.0 {
                    1.0 + b * t
                } else {
                    1.0 + b / r * (r * t).exp_m1()
                }
            }
            ScaleFunction::Grid(g) => g.value(t),
            ScaleFunction::Bottleneck { base, levels } => {
                let (prod, acc) = bottleneck_terms(base, levels, t);
                prod * base.value(t) + acc
            }
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        match self {
            ScaleFunction::Unit => 0.0,
            ScaleFunction::BirthDeath { b, d } => b * ((b - d) * t).exp(),
            ScaleFunction::Grid(g) => g.slope(t),
            ScaleFunction::Bottleneck { base, levels } => bottleneck_terms(base, levels, t).0 * base.derivative(t),
        }
    }

    /// `P(H > t) = 1 / W(t)`.
    pub fn survival(&self, t: f64) -> f64 {
        1.0 / self.value(t)
    }

    /// `P(H ≤ t)`.
    pub fn depth_cdf(&self, t: f64) -> f64 {
        1.0 - self.survival(t)
    }

    /// Node depth density `W' / W²`.
    pub fn depth_density(&self, t: f64) -> f64 {
        let w = self.value(t);
        self.derivative(t) / (w * w)
    }

    /// Right end of the range where `W` is computed rather than extrapolated.
    pub fn t_max(&self) -> f64 {
        match self {
            ScaleFunction::Grid(g) => g.t_max(),
            ScaleFunction::Bottleneck { base, .. } => base.t_max(),
            _ => f64::INFINITY,
        }
    }

    /// Smallest `h` in `[0, hi]` with `W(h) ≥ y`, for `1 < y ≤ W(hi)`.
    pub fn inverse(&self, y: f64, hi: f64) -> Result<f64, CppError> {
        if let ScaleFunction::BirthDeath { b, d } = *self {
            let r = b - d;
            let h = if r == 0.0 { (y - 1.0) / b } else { (r * (y - 1.0) / b).ln_1p() / r };
            if h.is_finite() && h >= 0.0 {
                return Ok(h.min(hi));
            }
        }
        Ok(crate::numerics::bisect_boundary(|h| self.value(h) < y, 0.0, hi)?)
    }
}

// `(ε_1⋯ε_m, Σ_j (1-ε_j) ε_1⋯ε_{j-1} W(s_j))` over the levels with `s_j ≤ t`.
fn bottleneck_terms(base: &ScaleFunction, levels: &[(f64, f64)], t: f64) -> (f64, f64) {
    let mut prod = 1.0;
    let mut acc = 0.0;
    for &(s, eps) in levels {
        if s > t {
            break;
        }
        acc += (1.0 - eps) * prod * base.value(s);
        prod *= eps;
    }
    (prod, acc)
}

/// Birth–death scale function: `1 + (b/r)(e^{rt} - 1)` with `r = b - d`,
/// or `1 + bt` when `r = 0`.
pub fn scale_bd(b: f64, d: f64) -> Result<ScaleFunction, CppError> {
    check_positive("b", b)?;
    if !(d >= 0.0 && d.is_finite()) {
        return Err(CppError::InvalidParameter(format!("d must be nonnegative, got {d}")));
    }
    Ok(ScaleFunction::BirthDeath { b, d })
}

fn grid(horizon: f64, step: f64) -> Result<(usize, f64), CppError> {
    check_positive("horizon", horizon)?;
    check_positive("step", step)?;
    if step > horizon / 10.0 {
        return Err(CppError::CoarseGrid { step, limit: horizon / 10.0 });
    }
    let n = (horizon / step).ceil() as usize;
    Ok((n, horizon / n as f64))
}

/// Scale function of a birth–death process with time-dependent rates
/// observed at `horizon`:
/// `W(t) = 1 + ∫_{T-t}^T b(s) exp(∫_s^T (b - d)(u) du) ds`,
/// by the trapezoid rule on a grid of about `step`.
pub fn scale_inhomogeneous_bd(
    b: &dyn Fn(f64) -> f64,
    d: &dyn Fn(f64) -> f64,
    horizon: f64,
    step: f64,
) -> Result<ScaleFunction, CppError> {
    let (n, h) = grid(horizon, step)?;
    let r = |s: f64| b(s) - d(s);
    let mut integrand = Vec::with_capacity(n + 1);
    let mut growth = 0.0;
    let mut prev_r = r(horizon);
    integrand.push(b(horizon));
    for i in 1..=n {
        let s = horizon - i as f64 * h;
        let rs = r(s);
        growth += 0.5 * h * (prev_r + rs);
        prev_r = rs;
        integrand.push(b(s) * growth.exp());
    }
    let mut values = vec![1.0];
    for i in 1..=n {
        values.push(values[i - 1] + 0.5 * h * (integrand[i - 1] + integrand[i]));
    }
    Ok(ScaleFunction::Grid(GridScale::new(h, values, integrand)?))
}

/// Splitting-tree scale function: solves `W' = b (W - W ⋆ G)` with
/// `(W ⋆ G)(t) = ∫ W(t - s) G(ds)` for the lifetime law `G`.
///
/// Explicit Euler in time; the convolution is a Stieltjes sum over the
/// lifetime CDF increments, so atoms (deterministic lifetimes) are exact.
/// Both parts are first order in the step.
pub fn scale_from_lifespan(b: f64, lifetime: &Lifetime, horizon: f64, step: f64) -> Result<ScaleFunction, CppError> {
    if !(b >= 0.0 && b.is_finite()) {
        return Err(CppError::InvalidParameter(format!("b must be nonnegative, got {b}")));
    }
    lifetime.validate().map_err(|e| CppError::InvalidParameter(e.to_string()))?;
    let (n, h) = grid(horizon, step)?;
    let dg: Vec<f64> = (0..=n)
        .map(|j| if j == 0 { 0.0 } else { lifetime.cdf(j as f64 * h) - lifetime.cdf((j - 1) as f64 * h) })
        .collect();
    let mut values = Vec::with_capacity(n + 1);
    let mut slopes = Vec::with_capacity(n + 1);
    values.push(1.0);
    for i in 0..=n {
        let conv: f64 = (1..=i).map(|j| values[i - j] * dg[j]).sum();
        let slope = b * (values[i] - conv);
        slopes.push(slope);
        if i < n {
            let next = values[i] + h * slope;
            if !(next >= values[i]) {
                return Err(CppError::Unstable((i + 1) as f64 * h));
            }
            values.push(next);
        }
    }
    Ok(ScaleFunction::Grid(GridScale::new(h, values, slopes)?))
}

/// Output of [`scale_general`]: `q[i]` is `q(T - t_i)`, the probability
/// that an individual born at `T - t_i` is dead by `T` given the scale
/// weighting, on the same grid as the scale function.
#[derive(Debug, Clone)]
pub struct GeneralScale {
    pub scale: ScaleFunction,
    pub q: Vec<f64>,
    pub step: f64,
}

/// General splitting-tree scale function with birth rate `b(t)` at time
/// `t` and death-time density `g(t, s)` for an individual born at `t`:
/// `W'(t) = b(T-t) (W(t) - ∫_0^t W(s) g(T-t, T-s) ds)`.
///
/// Euler in time with the inner integral by the trapezoid rule.
pub fn scale_general(
    b: &dyn Fn(f64) -> f64,
    g: &dyn Fn(f64, f64) -> f64,
    horizon: f64,
    step: f64,
) -> Result<GeneralScale, CppError> {
    let (n, h) = grid(horizon, step)?;
    let mut values = Vec::with_capacity(n + 1);
    let mut slopes = Vec::with_capacity(n + 1);
    let mut q = Vec::with_capacity(n + 1);
    values.push(1.0);
    for i in 0..=n {
        let born = horizon - i as f64 * h;
        let inner = if i == 0 {
            0.0
        } else {
            let ends = 0.5 * (values[0] * g(born, horizon) + values[i] * g(born, born));
            let mid: f64 = (1..i).map(|j| values[j] * g(born, horizon - j as f64 * h)).sum();
            h * (ends + mid)
        };
        q.push(inner / values[i]);
        let slope = b(born) * (values[i] - inner);
        slopes.push(slope);
        if i < n {
            let next = values[i] + h * slope;
            if !(next >= values[i]) {
                return Err(CppError::Unstable((i + 1) as f64 * h));
            }
            values.push(next);
        }
    }
    Ok(GeneralScale { scale: ScaleFunction::Grid(GridScale::new(h, values, slopes)?), q, step: h })
}

/// Death-time density from an age- and time-dependent death rate
/// `d(time, age)`: `g(t, s) = d(s, s - t) exp(-∫_t^s d(u, u - t) du)`.
/// The exponent is a 64-panel trapezoid.
pub fn fk_age_density<D>(d: D) -> impl Fn(f64, f64) -> f64
where
    D: Fn(f64, f64) -> f64,
{
    move |t: f64, s: f64| {
        if s < t {
            return 0.0;
        }
        let hazard = crate::numerics::trapezoid(|u| d(u, u - t), t, s, 64);
        d(s, s - t) * (-hazard).exp()
    }
}
