//! Combs and the ultrametric trees they code.
//!
//! A comb is a finite list of teeth (position, height) on `[0, length]`.
//! Two points off the teeth are at distance twice the highest tooth
//! strictly between them. Each maximal gap between teeth is one point of
//! the coded ultrametric space, that is one tip of the coded tree, and
//! tooth heights are the coalescence depths of neighbouring tips.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CombError {
    #[error("invalid comb: {0}")]
    InvalidComb(String),
    #[error("{0} coincides with a tooth")]
    AtTooth(f64),
    #[error("{x} lies outside [0, {length}]")]
    OutOfRange { x: f64, length: f64 },
    #[error("tooth of height {height} is not below the tip height {horizon}")]
    ToothTooHigh { height: f64, horizon: f64 },
    #[error("not ultrametric: {0}")]
    NonUltrametric(String),
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comb {
    pub length: f64,
    /// Strictly increasing positions in `(0, length)`, positive heights.
    pub teeth: Vec<(f64, f64)>,
}

impl Comb {
    pub fn new(length: f64, teeth: Vec<(f64, f64)>) -> Result<Self, CombError> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(CombError::InvalidComb(format!("length {length}")));
        }
        let mut prev = 0.0;
        for &(x, h) in &teeth {
            if !(x > prev && x < length) {
                return Err(CombError::InvalidComb(format!("tooth position {x} out of order or range")));
            }
            if !(h > 0.0 && h.is_finite()) {
                return Err(CombError::InvalidComb(format!("tooth height {h} at {x}")));
            }
            prev = x;
        }
        Ok(Comb { length, teeth })
    }

    /// Number of tips (gaps between teeth).
    pub fn n_tips(&self) -> usize {
        self.teeth.len() + 1
    }

    pub fn heights(&self) -> Vec<f64> {
        self.teeth.iter().map(|t| t.1).collect()
    }

    /// Index of the gap containing `x`.
    fn gap(&self, x: f64) -> Result<usize, CombError> {
        if !(0.0..=self.length).contains(&x) {
            return Err(CombError::OutOfRange { x, length: self.length });
        }
        let k = self.teeth.partition_point(|t| t.0 < x);
        if k < self.teeth.len() && self.teeth[k].0 == x {
            return Err(CombError::AtTooth(x));
        }
        Ok(k)
    }

    /// One point per gap: the midpoints between consecutive teeth (and the
    /// interval ends).
    pub fn gap_points(&self) -> Vec<f64> {
        let mut edges = vec![0.0];
        edges.extend(self.teeth.iter().map(|t| t.0));
        edges.push(self.length);
        edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

/// `2 · max{height of teeth strictly between s and t}`, 0 if none.
pub fn comb_distance(c: &Comb, s: f64, t: f64) -> Result<f64, CombError> {
    let (a, b) = (c.gap(s)?, c.gap(t)?);
    let (lo, hi) = (a.min(b), a.max(b));
    Ok(2.0 * c.teeth[lo..hi].iter().map(|t| t.1).fold(0.0, f64::max))
}

/// Symmetric distance matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UltrametricMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl UltrametricMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Checks symmetry, the zero diagonal and `d(r,t) ≤ max(d(r,s), d(s,t))`
    /// for every triple, with exact comparisons.
    pub fn is_ultrametric(&self) -> bool {
        let n = self.n;
        for i in 0..n {
            if self.get(i, i) != 0.0 {
                return false;
            }
            for j in 0..n {
                if self.get(i, j) != self.get(j, i) || self.get(i, j) < 0.0 {
                    return false;
                }
                for k in 0..n {
                    if self.get(i, k) > self.get(i, j).max(self.get(j, k)) {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for i in 0..self.n {
            w.write_record((0..self.n).map(|j| self.get(i, j).to_string())).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf8")
    }
}

/// Distances between the gap representatives: entry `(i, j)` is twice the
/// highest of teeth `i..j`.
pub fn distance_matrix(c: &Comb) -> UltrametricMatrix {
    let n = c.n_tips();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        let mut run = 0.0_f64;
        for j in i + 1..n {
            run = run.max(c.teeth[j - 1].1);
            data[i * n + j] = 2.0 * run;
            data[j * n + i] = 2.0 * run;
        }
    }
    UltrametricMatrix { n, data }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UNode {
    /// Time from the origin; tips sit at the horizon.
    pub time: f64,
    pub children: Option<(usize, usize)>,
}

/// A planar binary tree with node times, tips at a common horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UltrametricTree {
    pub horizon: f64,
    pub nodes: Vec<UNode>,
    pub root: usize,
}

impl UltrametricTree {
    /// From a ranked tree with split times: the split ranked `k` sits at
    /// `split_times[k - 1]`, leaves at `horizon`, children kept in order.
    pub fn from_timed(t: &crate::generators::TimedRankedTree) -> Result<Self, CombError> {
        let mut nodes = Vec::new();
        fn go(t: &crate::tree::Tree, times: &[f64], horizon: f64, nodes: &mut Vec<UNode>) -> Result<usize, CombError> {
            let node = match t.children() {
                None => UNode { time: horizon, children: None },
                Some((a, b)) => {
                    let r = t.rank().ok_or_else(|| CombError::NonUltrametric("unranked split".into()))?;
                    let time = *times.get(r as usize - 1).ok_or_else(|| CombError::NonUltrametric(format!("no time for rank {r}")))?;
                    let a = go(a, times, horizon, nodes)?;
                    let b = go(b, times, horizon, nodes)?;
                    UNode { time, children: Some((a, b)) }
                }
            };
            nodes.push(node);
            Ok(nodes.len() - 1)
        }
        let root = go(&t.tree, &t.split_times, t.horizon, &mut nodes)?;
        Ok(UltrametricTree { horizon: t.horizon, nodes, root })
    }

    /// Tips in planar (left-to-right) order.
    pub fn tips(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            match self.nodes[v].children {
                None => out.push(v),
                Some((a, b)) => {
                    stack.push(b);
                    stack.push(a);
                }
            }
        }
        out
    }

    pub fn n_tips(&self) -> usize {
        self.nodes.iter().filter(|n| n.children.is_none()).count()
    }

    /// Pairwise tip distances `2 (horizon - time of the most recent common
    /// ancestor)`, tips in planar order.
    pub fn distance_matrix(&self) -> UltrametricMatrix {
        let tips = self.tips();
        let n = tips.len();
        let mut pos = vec![usize::MAX; self.nodes.len()];
        for (i, &t) in tips.iter().enumerate() {
            pos[t] = i;
        }
        let mut data = vec![0.0; n * n];
        // tip-index ranges below each node, computed bottom-up
        let mut range = vec![(usize::MAX, 0usize); self.nodes.len()];
        let mut order = Vec::new();
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            order.push(v);
            if let Some((a, b)) = self.nodes[v].children {
                stack.push(a);
                stack.push(b);
            }
        }
        for &v in order.iter().rev() {
            match self.nodes[v].children {
                None => range[v] = (pos[v], pos[v] + 1),
                Some((a, b)) => {
                    range[v] = (range[a].0.min(range[b].0), range[a].1.max(range[b].1));
                    let d = 2.0 * (self.horizon - self.nodes[v].time);
                    for i in range[a].0..range[a].1 {
                        for j in range[b].0..range[b].1 {
                            data[i * n + j] = d;
                            data[j * n + i] = d;
                        }
                    }
                }
            }
        }
        UltrametricMatrix { n, data }
    }

    /// Forgets times and returns the ranked shape: splits are ranked by
    /// increasing time, ties broken in planar order.
    pub fn ranked_shape(&self) -> crate::tree::Tree {
        let mut internal: Vec<(f64, usize, usize)> = Vec::new();
        let mut stack = vec![self.root];
        let mut seq = 0;
        while let Some(v) = stack.pop() {
            if let Some((a, b)) = self.nodes[v].children {
                internal.push((self.nodes[v].time, seq, v));
                seq += 1;
                stack.push(b);
                stack.push(a);
            }
        }
        internal.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let mut rank = vec![0u32; self.nodes.len()];
        for (r, &(_, _, v)) in internal.iter().enumerate() {
            rank[v] = r as u32 + 1;
        }
        fn build(t: &UltrametricTree, v: usize, rank: &[u32]) -> crate::tree::Tree {
            match t.nodes[v].children {
                None => crate::tree::Tree::leaf(),
                Some((a, b)) => crate::tree::Tree::join_ranked(build(t, a, rank), build(t, b, rank), rank[v]),
            }
        }
        build(self, self.root, &rank).canonical()
    }
}

/// The tree whose tips are the gaps of the comb, each tooth becoming the
/// split joining the tips on either side at depth equal to its height.
/// Among equal teeth the leftmost is the ancestor.
pub fn tree_from_comb(c: &Comb, horizon: f64) -> Result<UltrametricTree, CombError> {
    for &(_, h) in &c.teeth {
        if h >= horizon {
            return Err(CombError::ToothTooHigh { height: h, horizon });
        }
    }
    let k = c.teeth.len();
    let mut nodes: Vec<UNode> = (0..=k).map(|_| UNode { time: horizon, children: None }).collect();
    if k == 0 {
        return Ok(UltrametricTree { horizon, nodes, root: 0 });
    }
    // Cartesian tree on the teeth (max at the root).
    let mut left: Vec<Option<usize>> = vec![None; k];
    let mut right: Vec<Option<usize>> = vec![None; k];
    let mut stack: Vec<usize> = Vec::new();
    for i in 0..k {
        let h = c.teeth[i].1;
        let mut last = None;
        while let Some(&top) = stack.last() {
            if c.teeth[top].1 < h {
                last = stack.pop();
            } else {
                break;
            }
        }
        left[i] = last;
        if let Some(&top) = stack.last() {
            right[top] = Some(i);
        }
        stack.push(i);
    }
    let top = stack[0];
    let id = |i: usize| k + 1 + i;
    for i in 0..k {
        let a = left[i].map(id).unwrap_or(i);
        let b = right[i].map(id).unwrap_or(i + 1);
        nodes.push(UNode { time: horizon - c.teeth[i].1, children: Some((a, b)) });
    }
    Ok(UltrametricTree { horizon, nodes, root: id(top) })
}

/// Reads the comb off a planar ultrametric tree: the teeth are the depths
/// of the splits in in-order, placed at positions `1..=k` on `[0, k+1]`.
pub fn comb_from_ultrametric(t: &UltrametricTree) -> Result<Comb, CombError> {
    const TIP_TOL: f64 = 1e-9;
    let mut teeth = Vec::new();
    // iterative in-order traversal
    let mut stack: Vec<(usize, bool)> = vec![(t.root, false)];
    while let Some((v, expanded)) = stack.pop() {
        let node = &t.nodes[v];
        match node.children {
            None => {
                if (node.time - t.horizon).abs() > TIP_TOL {
                    return Err(CombError::NonUltrametric(format!("tip at {} but horizon {}", node.time, t.horizon)));
                }
            }
            Some((a, b)) => {
                if expanded {
                    teeth.push(t.horizon - node.time);
                } else {
                    for &ch in &[a, b] {
                        if t.nodes[ch].time < node.time {
                            return Err(CombError::NonUltrametric(format!("child at {} above parent at {}", t.nodes[ch].time, node.time)));
                        }
                    }
                    stack.push((b, false));
                    stack.push((v, true));
                    stack.push((a, false));
                }
            }
        }
    }
    let k = teeth.len();
    let teeth: Vec<(f64, f64)> = teeth.into_iter().enumerate().map(|(i, h)| ((i + 1) as f64, h)).collect();
    Comb::new((k + 1) as f64, teeth)
}

/// Reads teeth from CSV with a `position,height` header. The interval
/// length defaults to one past the last tooth.
pub fn comb_from_csv(src: &str, length: Option<f64>) -> Result<Comb, CombError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(src.as_bytes());
    let mut teeth = Vec::new();
    for row in r.deserialize::<(f64, f64)>() {
        teeth.push(row.map_err(|e| CombError::Parse(e.to_string()))?);
    }
    let length = length.unwrap_or_else(|| teeth.last().map(|t| t.0 + 1.0).unwrap_or(1.0));
    Comb::new(length, teeth)
}

pub fn comb_to_csv(c: &Comb) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["position", "height"]).expect("in-memory write");
    for (x, h) in &c.teeth {
        w.write_record([x.to_string(), h.to_string()]).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::sample_kingman;
    use crate::rng::seeded;
    use rand::Rng;

    fn random_comb<R: Rng>(k: usize, horizon: f64, r: &mut R) -> Comb {
        let teeth = (1..=k).map(|i| (i as f64, r.random::<f64>() * horizon * 0.999 + 1e-9)).collect();
        Comb::new((k + 1) as f64, teeth).unwrap()
    }

    #[test]
    fn distances() {
        let c = Comb::new(1.0, vec![(0.25, 1.0), (0.75, 2.0)]).unwrap();
        assert_eq!(comb_distance(&c, 0.3, 0.3).unwrap(), 0.0);
        assert_eq!(comb_distance(&c, 0.1, 0.5).unwrap(), 2.0);
        assert_eq!(comb_distance(&c, 0.1, 0.9).unwrap(), 4.0);
        assert_eq!(comb_distance(&c, 0.25, 0.9), Err(CombError::AtTooth(0.25)));
        assert!(comb_distance(&c, 1.5, 0.9).is_err());
    }

    #[test]
    fn matrices() {
        let empty = Comb::new(1.0, vec![]).unwrap();
        assert_eq!(distance_matrix(&empty).data, vec![0.0]);
        let c = Comb::new(3.0, vec![(1.0, 1.0), (2.0, 2.0)]).unwrap();
        assert_eq!(distance_matrix(&c).data, vec![0.0, 2.0, 4.0, 2.0, 0.0, 4.0, 4.0, 4.0, 0.0]);
        let m = distance_matrix(&random_comb(50, 1.0, &mut seeded(1)));
        assert!(m.is_ultrametric());
        let gaps = c.gap_points();
        let m = distance_matrix(&c);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(comb_distance(&c, gaps[i], gaps[j]).unwrap(), m.get(i, j));
            }
        }
    }

    #[test]
    fn comb_trees() {
        let cherry = tree_from_comb(&Comb::new(2.0, vec![(1.0, 0.7)]).unwrap(), 1.0).unwrap();
        assert_eq!(cherry.distance_matrix().get(0, 1), 1.4);
        let c = Comb::new(3.0, vec![(1.0, 1.0), (2.0, 2.0)]).unwrap();
        let t = tree_from_comb(&c, 3.0).unwrap();
        let root = &t.nodes[t.root];
        assert_eq!(root.time, 1.0);
        assert_eq!(t.ranked_shape(), crate::tree::from_newick("((,)#2,)#1;").unwrap().canonical());
        assert!(matches!(tree_from_comb(&c, 2.0), Err(CombError::ToothTooHigh { .. })));
        assert_eq!(comb_from_ultrametric(&t).unwrap(), c);
    }

    #[test]
    fn random_round_trips() {
        let mut r = seeded(8);
        for _ in 0..100 {
            let k = r.random_range(0..30);
            let c = random_comb(k, 5.0, &mut r);
            let t = tree_from_comb(&c, 5.0).unwrap();
            let (a, b) = (t.distance_matrix(), distance_matrix(&c));
            assert!(a.data.iter().zip(&b.data).all(|(x, y)| (x - y).abs() < 1e-12));
            let back = comb_from_ultrametric(&t).unwrap();
            for (a, b) in back.teeth.iter().zip(&c.teeth) {
                assert!((a.1 - b.1).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kingman_tree_to_comb() {
        let k = sample_kingman(6, 1.0, &mut seeded(5)).unwrap();
        let u = UltrametricTree::from_timed(&k).unwrap();
        let c = comb_from_ultrametric(&u).unwrap();
        let direct = u.distance_matrix();
        let from_comb = distance_matrix(&c);
        for (a, b) in direct.data.iter().zip(&from_comb.data) {
            assert!((a - b).abs() < 1e-12);
        }
        let mut bad = u.clone();
        let tip = bad.tips()[0];
        bad.nodes[tip].time += 1e-6;
        assert!(comb_from_ultrametric(&bad).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let c = Comb::new(3.0, vec![(1.0, 1.0), (2.0, 2.5)]).unwrap();
        assert_eq!(comb_from_csv(&comb_to_csv(&c), None).unwrap(), c);
        assert!(comb_from_csv("position,height\n1,-1\n", None).is_err());
        assert!(comb_from_csv("position,height\n1,x\n", None).is_err());
    }
}
