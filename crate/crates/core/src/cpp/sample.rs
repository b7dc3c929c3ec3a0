//! Drawing coalescent point processes.

use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson};

use super::{check_positive, CppError, ScaleFunction};
use crate::comb::Comb;

fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// One node depth with `P(H > t) = 1 / W(t)`, or `None` when it exceeds
/// the horizon.
pub fn sample_depth<R: Rng + ?Sized>(w: &ScaleFunction, horizon: f64, rng: &mut R) -> Result<Option<f64>, CppError> {
    let target = 1.0 / open_unit(rng);
    if target > w.value(horizon) {
        return Ok(None);
    }
    Ok(Some(w.inverse(target, horizon)?))
}

/// Draws depths until one exceeds the horizon. The kept depths are the
/// teeth, at positions `1..=k` on `[0, k + 1]`; the tree has `k + 1` tips.
pub fn sample_cpp<R: Rng + ?Sized>(w: &ScaleFunction, horizon: f64, rng: &mut R) -> Result<Comb, CppError> {
    check_positive("horizon", horizon)?;
    let mut teeth = Vec::new();
    while let Some(h) = sample_depth(w, horizon, rng)? {
        // a zero depth has probability zero but would not be a valid tooth
        if h > 0.0 {
            teeth.push(((teeth.len() + 1) as f64, h));
        }
    }
    Ok(Comb::new((teeth.len() + 1) as f64, teeth)?)
}

/// `ν_0((x, ∞)) = 1 / (2x)`.
pub fn nu0_tail(x: f64) -> f64 {
    0.5 / x
}

/// `ν_α((x, ∞)) = α / (1 - e^{-αx/β})`, and its limit `β / x` at `α = 0`.
pub fn nu_alpha_tail(alpha: f64, beta: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| {
        if alpha == 0.0 {
            beta / x
        } else {
            alpha / -(-alpha * x / beta).exp_m1()
        }
    }
}

/// Poissonian coalescent point process with intensity tail `tail`.
///
/// The domain length is exponential with rate `ν((T, ∞))`. Atoms of height
/// in `(cutoff, T]` are Poisson on the domain; smaller atoms are dropped,
/// since `ν` has infinite mass near 0.
pub fn sample_cpp_poisson<R: Rng + ?Sized>(
    tail: &dyn Fn(f64) -> f64,
    horizon: f64,
    cutoff: f64,
    rng: &mut R,
) -> Result<Comb, CppError> {
    check_positive("horizon", horizon)?;
    check_positive("cutoff", cutoff)?;
    if cutoff >= horizon {
        return Err(CppError::InvalidParameter(format!("cutoff {cutoff} must be below the horizon {horizon}")));
    }
    let (top, bottom) = (tail(horizon), tail(cutoff));
    if !(top > 0.0) {
        return Err(CppError::NoMassAboveHorizon);
    }
    if !(bottom.is_finite() && bottom >= top) {
        return Err(CppError::InvalidParameter(format!("tail must be finite and nonincreasing, got {bottom} at {cutoff}")));
    }
    let length = Exp::new(top).map_err(|e| CppError::InvalidParameter(e.to_string()))?.sample(rng);
    let mass = length * (bottom - top);
    let count = if mass > 0.0 {
        Poisson::new(mass).map_err(|e| CppError::InvalidParameter(e.to_string()))?.sample(rng) as usize
    } else {
        0
    };
    let positions = loop {
        let mut xs: Vec<f64> = (0..count).map(|_| rng.random::<f64>() * length).collect();
        xs.sort_by(f64::total_cmp);
        if xs.first().is_none_or(|&x| x > 0.0) && xs.windows(2).all(|w| w[0] < w[1]) {
            break xs;
        }
    };
    let mut teeth = Vec::with_capacity(count);
    for x in positions {
        let level = top + open_unit(rng) * (bottom - top);
        let h = crate::numerics::bisect_boundary(|y| tail(y) > level, cutoff, horizon)?;
        teeth.push((x, h));
    }
    Ok(Comb::new(length, teeth)?)
}

#[cfg(test)]
mod tests {
    use super::super::scale_bd;
    use super::*;
    use crate::gof::{ks_one_sample, mean_se};
    use crate::rng::{replicate, seeded};

    #[test]
    fn unit_scale_gives_one_tip() {
        let mut r = seeded(1);
        for _ in 0..100 {
            assert_eq!(sample_cpp(&ScaleFunction::Unit, 3.0, &mut r).unwrap().n_tips(), 1);
        }
    }

    #[test]
    fn tip_count_and_depths() {
        let (b, horizon) = (1.0, 2.0);
        let w = scale_bd(b, b).unwrap();
        let combs = replicate(3, 20_000, |r| sample_cpp(&w, horizon, r).unwrap());
        let tips: Vec<f64> = combs.iter().map(|c| c.n_tips() as f64).collect();
        let (m, se) = mean_se(&tips);
        assert!((m - w.value(horizon)).abs() < 3.0 * se, "{m} ± {se}");
        let depths: Vec<f64> = combs.iter().flat_map(|c| c.heights()).take(20_000).collect();
        let fh = w.depth_cdf(horizon);
        assert!(ks_one_sample(&depths, |t| w.depth_cdf(t) / fh).p_value > 0.001);
    }

    #[test]
    fn poisson_teeth_rate() {
        let combs = replicate(5, 20_000, |r| sample_cpp_poisson(&nu0_tail, 1.0, 0.1, r).unwrap());
        let length: f64 = combs.iter().map(|c| c.length).sum();
        let teeth: usize = combs.iter().map(|c| c.teeth.len()).sum();
        // 4.5 teeth per unit length, Poisson given the total length
        let rate = teeth as f64 / length;
        assert!((rate - 4.5).abs() < 3.0 * (4.5 / length).sqrt(), "{rate}");
        let lengths: Vec<f64> = combs.iter().map(|c| c.length).collect();
        let (m, se) = mean_se(&lengths);
        assert!((m - 2.0).abs() < 3.0 * se);
        assert!(combs.iter().all(|c| c.teeth.iter().all(|t| t.1 > 0.1 && t.1 <= 1.0)));
    }

    #[test]
    fn alpha_tail_limit() {
        let small = nu_alpha_tail(1e-9, 0.5);
        for x in [0.1, 1.0, 7.0] {
            assert!((small(x) - nu0_tail(x)).abs() < 1e-6 * nu0_tail(x));
            assert_eq!(nu_alpha_tail(0.0, 0.5)(x), nu0_tail(x));
        }
        assert!(matches!(sample_cpp_poisson(&|_| 0.0, 1.0, 0.1, &mut seeded(1)), Err(CppError::NoMassAboveHorizon)));
    }
}
