//! Bottlenecks and contemporary sampling.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_probability, sample_depth, CppError, ScaleFunction};

/// Bottlenecks at depths `s_j` killing each lineage crossing them with
/// probability `1 - ε_j`, plus optional sampling of the tips with
/// probability `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BottleneckSchedule {
    pub bottlenecks: Vec<(f64, f64)>,
    pub sampling: Option<f64>,
}

impl BottleneckSchedule {
    pub fn new(bottlenecks: Vec<(f64, f64)>, sampling: Option<f64>) -> Result<Self, CppError> {
        let bad = |m: String| Err(CppError::Schedule(m));
        let mut prev = 0.0;
        for &(s, eps) in &bottlenecks {
            if !(s > prev && s.is_finite()) {
                return bad(format!("time {s} must be positive and increasing"));
            }
            if !(eps > 0.0 && eps <= 1.0) {
                return bad(format!("survival {eps} outside (0, 1]"));
            }
            prev = s;
        }
        if let Some(p) = sampling {
            check_probability("p", p).map_err(|e| CppError::Schedule(e.to_string()))?;
        }
        Ok(BottleneckSchedule { bottlenecks, sampling })
    }

    pub fn sampling_only(p: f64) -> Result<Self, CppError> {
        Self::new(Vec::new(), Some(p))
    }

    /// All levels with sampling as `(0, p)` first.
    pub fn levels(&self) -> Vec<(f64, f64)> {
        self.sampling.map(|p| (0.0, p)).into_iter().chain(self.bottlenecks.iter().copied()).collect()
    }
}

/// Scale function of the thinned process:
/// `W_ε(t) = ε_1⋯ε_m W(t) + Σ_{j ≤ m} (1 - ε_j) ε_1⋯ε_{j-1} W(s_j)` for
/// `s_m ≤ t < s_{m+1}`.
pub fn bottleneck_transform(w: &ScaleFunction, schedule: &BottleneckSchedule, horizon: f64) -> Result<ScaleFunction, CppError> {
    if let Some(&(s, _)) = schedule.bottlenecks.iter().find(|b| b.0 >= horizon) {
        return Err(CppError::Schedule(format!("bottleneck at {s} is not before the horizon {horizon}")));
    }
    let levels = schedule.levels();
    if levels.iter().all(|l| l.1 == 1.0) {
        return Ok(w.clone());
    }
    Ok(ScaleFunction::Bottleneck { base: Box::new(w.clone()), levels })
}

/// Simulates the depth between two consecutive surviving tips of a
/// coalescent point process thinned by `schedule`, by killing whole
/// subtrees at each bottleneck. Returns `None` when it exceeds the horizon.
///
/// Starts right after a surviving tip, so every level's current block is
/// alive; a depth above `s_j` opens a fresh block at level `j`.
pub fn sample_bottlenecked_depth<R: Rng + ?Sized>(
    w: &ScaleFunction,
    schedule: &BottleneckSchedule,
    horizon: f64,
    rng: &mut R,
) -> Result<Option<f64>, CppError> {
    let levels = schedule.levels();
    let mut alive = vec![true; levels.len()];
    let mut running = 0.0_f64;
    loop {
        let Some(h) = sample_depth(w, horizon, rng)? else { return Ok(None) };
        running = running.max(h);
        for (j, &(s, eps)) in levels.iter().enumerate() {
            if h > s {
                alive[j] = rng.random::<f64>() < eps;
            }
        }
        if alive.iter().all(|&a| a) {
            return Ok(Some(running));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::scale_bd;
    use super::*;
    use crate::gof::ks_one_sample;
    use crate::rng::replicate;

    #[test]
    fn sampling_only() {
        let w = scale_bd(0.8, 0.3).unwrap();
        let ws = bottleneck_transform(&w, &BottleneckSchedule::sampling_only(0.4).unwrap(), 5.0).unwrap();
        for t in [0.0, 0.5, 2.0, 4.9] {
            assert!((ws.value(t) - (0.6 + 0.4 * w.value(t))).abs() < 1e-12);
        }
        let crit = scale_bd(0.5, 0.5).unwrap();
        let cs = bottleneck_transform(&crit, &BottleneckSchedule::sampling_only(0.3).unwrap(), 5.0).unwrap();
        assert!((cs.value(2.0) - (1.0 + 0.3 * 0.5 * 2.0)).abs() < 1e-12);
        assert_eq!(cs.value(0.0), 1.0);
    }

    #[test]
    fn identity_continuity_monotonicity() {
        let w = scale_bd(1.0, 0.5).unwrap();
        let id = BottleneckSchedule::new(vec![(1.0, 1.0), (2.0, 1.0)], Some(1.0)).unwrap();
        assert_eq!(bottleneck_transform(&w, &id, 3.0).unwrap(), w);
        let sched = |e1: f64, e2: f64| BottleneckSchedule::new(vec![(1.0, e1), (2.0, e2)], Some(0.7)).unwrap();
        let a = bottleneck_transform(&w, &sched(0.3, 0.6), 3.0).unwrap();
        for s in [1.0, 2.0] {
            assert!((a.value(s) - a.value(s - 1e-12)).abs() < 1e-9);
        }
        for t in [0.5, 1.5, 2.5] {
            let lo = bottleneck_transform(&w, &sched(0.3, 0.6), 3.0).unwrap().value(t);
            let hi1 = bottleneck_transform(&w, &sched(0.5, 0.6), 3.0).unwrap().value(t);
            let hi2 = bottleneck_transform(&w, &sched(0.3, 0.9), 3.0).unwrap().value(t);
            assert!(hi1 >= lo && hi2 >= lo);
        }
    }

    #[test]
    fn schedule_validation() {
        assert!(BottleneckSchedule::new(vec![(1.0, 0.5), (0.5, 0.5)], None).is_err());
        assert!(BottleneckSchedule::new(vec![(1.0, 0.0)], None).is_err());
        assert!(BottleneckSchedule::new(vec![], Some(0.0)).is_err());
        let s = BottleneckSchedule::new(vec![(4.0, 0.5)], None).unwrap();
        assert!(bottleneck_transform(&scale_bd(1.0, 0.0).unwrap(), &s, 3.0).is_err());
    }

    #[test]
    fn thinning_oracle() {
        let horizon = 3.0;
        let w = scale_bd(1.0, 0.4).unwrap();
        let sched = BottleneckSchedule::new(vec![(0.8, 0.4), (1.7, 0.25)], Some(0.6)).unwrap();
        let we = bottleneck_transform(&w, &sched, horizon).unwrap();
        let depths: Vec<f64> =
            replicate(21, 20_000, |r| sample_bottlenecked_depth(&w, &sched, horizon, r).unwrap()).into_iter().flatten().collect();
        let top = we.depth_cdf(horizon);
        let ks = ks_one_sample(&depths, |t| we.depth_cdf(t) / top);
        assert!(ks.p_value > 0.001, "{ks:?}");
    }
}
