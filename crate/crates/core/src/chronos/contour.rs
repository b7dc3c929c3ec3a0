//! Jumping contour paths and the reduced comb at a fixed height.

use serde::{Deserialize, Serialize};

use super::{ChronologicalTree, ChronosError, VertexRecord};
use crate::comb::Comb;

/// Piecewise-linear càdlàg path on `[0, L]` with slope `-1` between
/// breakpoints and upward jumps at interior breakpoints.
///
/// `points[k] = (t_k, v_k)` holds the right-continuous value at `t_k`; the
/// left limit at `t_{k+1}` is `v_k - (t_{k+1} - t_k)`. The first point is
/// `(0, v_0)` and the last is `(L, 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourPath {
    points: Vec<(f64, f64)>,
}

/// Relative slack allowed on the terminal value.
const END_TOL: f64 = 1e-9;

impl ContourPath {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, ChronosError> {
        let bad = |m: String| Err(ChronosError::InvalidPath(m));
        if points.len() < 2 {
            return bad("at least a start and an end point are needed".into());
        }
        if points[0].0 != 0.0 {
            return bad(format!("path starts at t = {}", points[0].0));
        }
        let scale = points.iter().map(|p| p.1.abs()).fold(1.0, f64::max);
        for (k, &(t, v)) in points.iter().enumerate() {
            if !(t.is_finite() && v.is_finite()) {
                return bad(format!("non-finite breakpoint {k}"));
            }
            if k == 0 {
                if !(v > 0.0) {
                    return bad("start value must be positive".into());
                }
                continue;
            }
            let (pt, pv) = points[k - 1];
            if !(t > pt) {
                return bad(format!("breakpoint times not increasing at {k}"));
            }
            let left = pv - (t - pt);
            let last = k == points.len() - 1;
            if last {
                if v != 0.0 || left.abs() > END_TOL * scale {
                    return bad(format!("path must end at 0, left limit {left}, value {v}"));
                }
            } else {
                if !(left > 0.0) {
                    return bad(format!("path reaches {left} before breakpoint {k}"));
                }
                if !(v > left) {
                    return bad(format!("breakpoint {k} is not an upward jump ({left} -> {v})"));
                }
            }
        }
        Ok(ContourPath { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Domain length `L`.
    pub fn length(&self) -> f64 {
        self.points.last().unwrap().0
    }

    /// Left limit at breakpoint `k ≥ 1`.
    pub fn left_limit(&self, k: usize) -> f64 {
        let (pt, pv) = self.points[k - 1];
        pv - (self.points[k].0 - pt)
    }

    /// Jump sizes at the interior breakpoints.
    pub fn jumps(&self) -> Vec<f64> {
        (1..self.points.len() - 1).map(|k| self.points[k].1 - self.left_limit(k)).collect()
    }

    /// Value at `t` (right-continuous).
    pub fn value_at(&self, t: f64) -> f64 {
        let k = self.points.partition_point(|p| p.0 <= t).max(1) - 1;
        let (tk, vk) = self.points[k];
        (vk - (t - tk)).max(0.0)
    }
}

/// Depth-first exploration: start at the root's death time, run down each
/// lifespan at unit speed, and on reaching the birth time of a daughter
/// jump to her death time. Daughters are met latest born first.
pub fn contour(tree: &ChronologicalTree) -> Result<ContourPath, ChronosError> {
    let v = tree.vertices();
    let mut points = vec![(0.0, v[0].death)];
    let mut s = 0.0;
    // (vertex, next daughter position, current height)
    let mut stack: Vec<(usize, usize, f64)> = vec![(0, 0, v[0].death)];
    while let Some(top) = stack.last_mut() {
        let (u, j, h) = *top;
        if j < v[u].children.len() {
            let c = v[u].children[j];
            let drop = h - v[c].birth;
            if !(drop > 0.0) {
                return Err(ChronosError::BirthCollision { word: v[c].word.clone(), time: v[c].birth });
            }
            s += drop;
            top.1 += 1;
            top.2 = v[c].birth;
            points.push((s, v[c].death));
            stack.push((c, 0, v[c].death));
        } else {
            s += h - v[u].birth;
            stack.pop();
        }
    }
    points.push((s, 0.0));
    ContourPath::new(points)
}

/// Inverse of [`contour`]: every jump creates an individual born at the
/// left limit and dying at the value after the jump. Her mother is the
/// most recent individual still alive at that height.
pub fn tree_from_contour(path: &ContourPath) -> Result<ChronologicalTree, ChronosError> {
    let pts = path.points();
    let mut records = vec![VertexRecord { word: vec![], alpha: 0.0, omega: pts[0].1 }];
    let mut n_kids = vec![0u32];
    let mut stack = vec![0usize];
    for k in 1..pts.len() - 1 {
        let birth = path.left_limit(k);
        while records[*stack.last().unwrap()].alpha >= birth {
            stack.pop();
            if stack.is_empty() {
                return Err(ChronosError::InvalidPath(format!("jump at breakpoint {k} has no mother")));
            }
        }
        let m = *stack.last().unwrap();
        n_kids[m] += 1;
        let mut word = records[m].word.clone();
        word.push(n_kids[m]);
        records.push(VertexRecord { word, alpha: birth, omega: pts[k].1 });
        n_kids.push(0);
        stack.push(records.len() - 1);
    }
    ChronologicalTree::from_records(&records)
}

/// Comb coding the tree spanned by the individuals alive at height `t`.
///
/// The tips are the times `s_1 < … < s_N` where the path equals `t`; the
/// comb lives on `[0, N]` with a tooth at each integer `i` in `1..N`
/// whose height is `t` minus the minimum of the path on `[s_i, s_{i+1}]`.
pub fn reduced_comb(path: &ContourPath, t: f64) -> Result<Comb, ChronosError> {
    let pts = path.points();
    let visits: Vec<usize> = (0..pts.len()).filter(|&k| pts[k].1 == t).collect();
    if visits.is_empty() {
        return Err(ChronosError::EmptySphere(t));
    }
    let mut teeth = Vec::with_capacity(visits.len() - 1);
    for (i, w) in visits.windows(2).enumerate() {
        let low = (w[0] + 1..=w[1]).map(|k| path.left_limit(k)).fold(f64::INFINITY, f64::min);
        teeth.push(((i + 1) as f64, t - low));
    }
    Comb::new(visits.len() as f64, teeth).map_err(|e| ChronosError::InvalidPath(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::super::{sample_splitting_tree, LifespanModel, Lifetime, SplittingOutcome};
    use super::*;
    use crate::rng::seeded;

    fn rec(word: &[u32], alpha: f64, omega: f64) -> VertexRecord {
        VertexRecord { word: word.to_vec(), alpha, omega }
    }

    #[test]
    fn root_only() {
        let t = ChronologicalTree::single(2.5).unwrap();
        let p = contour(&t).unwrap();
        assert_eq!(p.points(), &[(0.0, 2.5), (2.5, 0.0)]);
        assert_eq!(p.length(), t.total_length());
        assert_eq!(tree_from_contour(&p).unwrap(), t);
    }

    #[test]
    fn two_individuals() {
        // root lives [0, 3], daughter born at 1 dies at 2.5
        let t = ChronologicalTree::from_records(&[rec(&[], 0.0, 3.0), rec(&[1], 1.0, 2.5)]).unwrap();
        let p = contour(&t).unwrap();
        assert_eq!(p.points(), &[(0.0, 3.0), (2.0, 2.5), (4.5, 0.0)]);
        assert_eq!(p.length(), 3.0 + 1.5);
        assert_eq!(p.jumps(), vec![1.5]);
        assert_eq!(tree_from_contour(&p).unwrap(), t);
    }

    #[test]
    fn malformed_paths() {
        assert!(ContourPath::new(vec![(0.0, 1.0)]).is_err());
        assert!(ContourPath::new(vec![(0.0, 1.0), (2.0, 0.0)]).is_err());
        assert!(ContourPath::new(vec![(0.0, 2.0), (1.0, 0.5), (1.5, 0.0)]).is_err());
        assert!(ContourPath::new(vec![(0.0, 1.0), (1.5, 1.0), (2.5, 0.0)]).is_err());
        assert!(ContourPath::new(vec![(0.0, -1.0), (-1.0, 0.0)]).is_err());
    }

    #[test]
    fn hand_built_reduced_comb() {
        // height 2; root reaches 2, two daughters reach 2
        let t = ChronologicalTree::from_records(&[
            rec(&[], 0.0, 2.0),
            rec(&[1], 1.5, 2.0),
            rec(&[2], 0.5, 2.0),
        ])
        .unwrap();
        let p = contour(&t).unwrap();
        let c = reduced_comb(&p, 2.0).unwrap();
        assert_eq!(c.length, 3.0);
        assert_eq!(c.teeth, vec![(1.0, 0.5), (2.0, 1.5)]);
        assert!(matches!(reduced_comb(&p, 5.0), Err(ChronosError::EmptySphere(_))));
        let single = reduced_comb(&contour(&ChronologicalTree::single(1.0).unwrap()).unwrap(), 1.0).unwrap();
        assert!(single.teeth.is_empty());
    }

    #[test]
    fn random_round_trips_and_sphere_sizes() {
        let m = LifespanModel::new(1.2, Lifetime::Exponential { rate: 1.0 }).unwrap();
        let mut r = seeded(12);
        let horizon = 2.5;
        for _ in 0..100 {
            let SplittingOutcome::Tree(t) = sample_splitting_tree(&m, horizon, 100_000, &mut r).unwrap() else { panic!() };
            let p = contour(&t).unwrap();
            assert!((p.length() - t.total_length()).abs() < 1e-12 * t.total_length().max(1.0));
            assert!(p.points().iter().all(|q| q.1 <= horizon));
            let back = tree_from_contour(&p).unwrap();
            assert_eq!(back.len(), t.len());
            for (a, b) in back.vertices().iter().zip(t.vertices()) {
                assert_eq!(a.word, b.word);
                assert!((a.birth - b.birth).abs() < 1e-12 && (a.death - b.death).abs() < 1e-12);
            }
            let alive = t.alive_at(horizon).len();
            match reduced_comb(&p, horizon) {
                Ok(c) => {
                    assert_eq!(c.teeth.len() + 1, alive);
                    let tips: Vec<usize> = t.alive_at(horizon);
                    for i in 0..tips.len() {
                        for j in i + 1..tips.len() {
                            let d = 2.0 * (horizon - t.divergence_time(tips[i], tips[j]));
                            let from_comb = 2.0 * c.teeth[i..j].iter().map(|x| x.1).fold(0.0, f64::max);
                            assert!((d - from_comb).abs() < 1e-9, "{d} vs {from_comb}");
                        }
                    }
                }
                Err(ChronosError::EmptySphere(_)) => assert_eq!(alive, 0),
                Err(e) => panic!("{e}"),
            }
        }
    }
}
