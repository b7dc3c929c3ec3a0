//! Chronological trees: individuals indexed by words over the positive
//! integers, each with a birth and a death time. A daughter is born during
//! the lifetime of her mother. Daughters of one mother have distinct birth
//! times and are numbered from the latest born (`u1`) to the earliest.

mod contour;
mod io;

use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Gamma as GammaLaw};
use thiserror::Error;

pub use contour::{contour, reduced_comb, tree_from_contour, ContourPath};
pub use io::{contour_from_csv, contour_to_csv, tree_from_json, tree_to_json};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChronosError {
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("daughters of {word:?} share the birth time {time}")]
    BirthCollision { word: Vec<u32>, time: f64 },
    #[error("invalid contour path: {0}")]
    InvalidPath(String),
    #[error("the path never reaches height {0}")]
    EmptySphere(f64),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// One individual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub word: Vec<u32>,
    pub birth: f64,
    pub death: f64,
    #[serde(skip)]
    pub parent: Option<usize>,
    /// Daughters, latest born first.
    #[serde(skip)]
    pub children: Vec<usize>,
}

/// A finite chronological tree. Vertex 0 is the root, and vertices are
/// stored in depth-first order (each vertex before its daughters,
/// daughters latest born first).
#[derive(Debug, Clone, PartialEq)]
pub struct ChronologicalTree {
    vertices: Vec<Vertex>,
}

/// Input record for [`ChronologicalTree::from_records`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub word: Vec<u32>,
    pub alpha: f64,
    pub omega: f64,
}

impl ChronologicalTree {
    /// Root-only tree with the given lifetime.
    pub fn single(lifetime: f64) -> Result<Self, ChronosError> {
        Self::from_records(&[VertexRecord { word: vec![], alpha: 0.0, omega: lifetime }])
    }

    /// Builds and validates a tree from (word, birth, death) records in
    /// any order.
    pub fn from_records(records: &[VertexRecord]) -> Result<Self, ChronosError> {
        let bad = |m: String| Err(ChronosError::InvalidTree(m));
        let mut by_word: HashMap<&[u32], &VertexRecord> = HashMap::new();
        for r in records {
            if r.word.contains(&0) {
                return bad(format!("word {:?} contains 0", r.word));
            }
            if !(r.alpha.is_finite() && r.omega.is_finite()) || r.omega <= r.alpha {
                return bad(format!("vertex {:?} has lifespan [{}, {}]", r.word, r.alpha, r.omega));
            }
            if by_word.insert(&r.word, r).is_some() {
                return bad(format!("word {:?} repeated", r.word));
            }
        }
        let Some(root) = by_word.get(&[][..]) else {
            return bad("no root".into());
        };
        if root.alpha != 0.0 {
            return bad(format!("root born at {}, expected 0", root.alpha));
        }
        let mut kids: HashMap<&[u32], Vec<&VertexRecord>> = HashMap::new();
        for r in records {
            if let Some((_, parent)) = r.word.split_last() {
                if !by_word.contains_key(parent) {
                    return bad(format!("parent of {:?} missing", r.word));
                }
                kids.entry(parent).or_default().push(r);
            }
        }
        let mut tree = ChronologicalTree { vertices: Vec::with_capacity(records.len()) };
        // explicit stack: (record, parent index)
        let mut stack: Vec<(&VertexRecord, Option<usize>)> = vec![(root, None)];
        while let Some((r, parent)) = stack.pop() {
            let idx = tree.vertices.len();
            tree.vertices.push(Vertex { word: r.word.clone(), birth: r.alpha, death: r.omega, parent, children: Vec::new() });
            if let Some(p) = parent {
                tree.vertices[p].children.push(idx);
            }
            let mut ch = kids.remove(&r.word[..]).unwrap_or_default();
            ch.sort_by_key(|c| *c.word.last().unwrap());
            for (j, c) in ch.iter().enumerate() {
                if *c.word.last().unwrap() as usize != j + 1 {
                    return bad(format!("daughters of {:?} are not numbered 1..{}", r.word, ch.len()));
                }
                if !(c.alpha > r.alpha && c.alpha <= r.omega) {
                    return bad(format!("{:?} born at {} outside the mother's life ({}, {}]", c.word, c.alpha, r.alpha, r.omega));
                }
                if j > 0 {
                    let prev = ch[j - 1].alpha;
                    if c.alpha == prev {
                        return Err(ChronosError::BirthCollision { word: r.word.clone(), time: c.alpha });
                    }
                    if c.alpha > prev {
                        return bad(format!("daughters of {:?} are not numbered latest born first", r.word));
                    }
                }
            }
            for c in ch.into_iter().rev() {
                stack.push((c, Some(idx)));
            }
        }
        Ok(tree)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn records(&self) -> Vec<VertexRecord> {
        self.vertices.iter().map(|v| VertexRecord { word: v.word.clone(), alpha: v.birth, omega: v.death }).collect()
    }

    /// Sum of lifetimes.
    pub fn total_length(&self) -> f64 {
        self.vertices.iter().map(|v| v.death - v.birth).sum()
    }

    /// Individuals alive at time `t` (born at or before `t`, dying at or
    /// after it), in depth-first order.
    pub fn alive_at(&self, t: f64) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&i| self.vertices[i].birth <= t && self.vertices[i].death >= t).collect()
    }

    /// Time at which the ancestral lineages of vertices `a` and `b` split.
    pub fn divergence_time(&self, a: usize, b: usize) -> f64 {
        let (wa, wb) = (&self.vertices[a].word, &self.vertices[b].word);
        let common = wa.iter().zip(wb).take_while(|(x, y)| x == y).count();
        let mut prefix_a = wa[..common.min(wa.len())].to_vec();
        let birth_of = |w: &[u32]| self.vertices.iter().find(|v| v.word == w).map(|v| v.birth);
        let next_a = (common < wa.len()).then(|| {
            prefix_a.push(wa[common]);
            birth_of(&prefix_a).expect("prefix-closed")
        });
        let next_b = (common < wb.len()).then(|| {
            let mut w = wb[..common].to_vec();
            w.push(wb[common]);
            birth_of(&w).expect("prefix-closed")
        });
        match (next_a, next_b) {
            (Some(x), Some(y)) => x.min(y),
            (Some(x), None) | (None, Some(x)) => x,
            (None, None) => self.vertices[a].death,
        }
    }
}

/// Lifetime laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum Lifetime {
    Exponential { rate: f64 },
    Deterministic { value: f64 },
    Gamma { shape: f64, scale: f64 },
}

impl Lifetime {
    pub fn validate(&self) -> Result<(), ChronosError> {
        let ok = match *self {
            Lifetime::Exponential { rate } => rate > 0.0 && rate.is_finite(),
            Lifetime::Deterministic { value } => value > 0.0 && value.is_finite(),
            Lifetime::Gamma { shape, scale } => shape > 0.0 && scale > 0.0 && shape.is_finite() && scale.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(ChronosError::InvalidModel(format!("{self:?}")))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Lifetime::Exponential { rate } => Exp::new(rate).expect("validated").sample(rng),
            Lifetime::Deterministic { value } => value,
            Lifetime::Gamma { shape, scale } => Gamma::new(shape, scale).expect("validated").sample(rng),
        }
    }

    /// `P(lifetime ≤ x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match *self {
            Lifetime::Exponential { rate } => -(-rate * x).exp_m1(),
            Lifetime::Deterministic { value } => f64::from(u8::from(x >= value)),
            Lifetime::Gamma { shape, scale } => GammaLaw::new(shape, 1.0 / scale).map(|g| g.cdf(x)).unwrap_or(f64::NAN),
        }
    }

    /// `P(lifetime > x)`.
    pub fn survival(&self, x: f64) -> f64 {
        match *self {
            Lifetime::Exponential { rate } => (-rate * x.max(0.0)).exp(),
            _ => 1.0 - self.cdf(x),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Lifetime::Exponential { rate } => 1.0 / rate,
            Lifetime::Deterministic { value } => value,
            Lifetime::Gamma { shape, scale } => shape * scale,
        }
    }
}

/// Individuals give birth at rate `birth_rate` throughout i.i.d. lifetimes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifespanModel {
    pub birth_rate: f64,
    pub lifetime: Lifetime,
}

impl LifespanModel {
    pub fn new(birth_rate: f64, lifetime: Lifetime) -> Result<Self, ChronosError> {
        if !(birth_rate >= 0.0 && birth_rate.is_finite()) {
            return Err(ChronosError::InvalidModel(format!("birth rate {birth_rate}")));
        }
        lifetime.validate()?;
        Ok(LifespanModel { birth_rate, lifetime })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SplittingOutcome {
    Tree(ChronologicalTree),
    CapExceeded,
}

/// Splitting tree started from one newborn at time 0 and truncated at
/// `horizon`: births after the horizon are never generated and lifetimes
/// are clipped to it. Gives up beyond `cap` individuals.
pub fn sample_splitting_tree<R: Rng + ?Sized>(model: &LifespanModel, horizon: f64, cap: usize, rng: &mut R) -> Result<SplittingOutcome, ChronosError> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(ChronosError::InvalidModel(format!("horizon {horizon}")));
    }
    LifespanModel::new(model.birth_rate, model.lifetime)?;
    // (birth, death, parent) in generation order
    let mut raw: Vec<(f64, f64, Option<usize>)> = vec![(0.0, model.lifetime.sample(rng).min(horizon), None)];
    let mut next = 0;
    while next < raw.len() {
        let (alpha, omega, _) = raw[next];
        if model.birth_rate > 0.0 {
            let gap = Exp::new(model.birth_rate).expect("validated");
            let mut t = alpha + gap.sample(rng);
            while t < omega {
                let death = (t + model.lifetime.sample(rng)).min(horizon);
                raw.push((t, death, Some(next)));
                if raw.len() > cap {
                    return Ok(SplittingOutcome::CapExceeded);
                }
                t += gap.sample(rng);
            }
        }
        next += 1;
    }
    let mut kids: Vec<Vec<usize>> = vec![Vec::new(); raw.len()];
    for (i, r) in raw.iter().enumerate() {
        if let Some(p) = r.2 {
            kids[p].push(i);
        }
    }
    let mut records = Vec::with_capacity(raw.len());
    let mut stack = vec![(0usize, Vec::<u32>::new())];
    while let Some((i, word)) = stack.pop() {
        let mut ch = std::mem::take(&mut kids[i]);
        ch.sort_by(|&a, &b| raw[b].0.total_cmp(&raw[a].0));
        for (j, &c) in ch.iter().enumerate() {
            let mut w = word.clone();
            w.push(j as u32 + 1);
            stack.push((c, w));
        }
        records.push(VertexRecord { word, alpha: raw[i].0, omega: raw[i].1 });
    }
    Ok(SplittingOutcome::Tree(ChronologicalTree::from_records(&records)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn rec(word: &[u32], alpha: f64, omega: f64) -> VertexRecord {
        VertexRecord { word: word.to_vec(), alpha, omega }
    }

    #[test]
    fn validation() {
        assert!(ChronologicalTree::single(1.0).is_ok());
        assert!(ChronologicalTree::single(0.0).is_err());
        let ok = [rec(&[], 0.0, 3.0), rec(&[1], 2.0, 4.0), rec(&[2], 1.0, 1.5)];
        assert!(ChronologicalTree::from_records(&ok).is_ok());
        let wrong_order = [rec(&[], 0.0, 3.0), rec(&[1], 1.0, 4.0), rec(&[2], 2.0, 2.5)];
        assert!(ChronologicalTree::from_records(&wrong_order).is_err());
        let tie = [rec(&[], 0.0, 3.0), rec(&[1], 1.0, 4.0), rec(&[2], 1.0, 2.5)];
        assert!(matches!(ChronologicalTree::from_records(&tie), Err(ChronosError::BirthCollision { .. })));
        let orphan = [rec(&[], 0.0, 3.0), rec(&[1, 1], 1.0, 4.0)];
        assert!(ChronologicalTree::from_records(&orphan).is_err());
        let outside = [rec(&[], 0.0, 3.0), rec(&[1], 3.5, 4.0)];
        assert!(ChronologicalTree::from_records(&outside).is_err());
    }

    #[test]
    fn zero_birth_rate_gives_root_only() {
        let m = LifespanModel::new(0.0, Lifetime::Exponential { rate: 1.0 }).unwrap();
        let SplittingOutcome::Tree(t) = sample_splitting_tree(&m, 2.0, 100, &mut seeded(1)).unwrap() else { panic!() };
        assert_eq!(t.len(), 1);
        assert!(t.vertices()[0].death <= 2.0);
    }

    #[test]
    fn simulated_trees_are_valid_and_clipped() {
        let m = LifespanModel::new(1.0, Lifetime::Gamma { shape: 2.0, scale: 0.6 }).unwrap();
        let mut r = seeded(3);
        for _ in 0..50 {
            if let SplittingOutcome::Tree(t) = sample_splitting_tree(&m, 3.0, 100_000, &mut r).unwrap() {
                assert!(t.vertices().iter().all(|v| v.death <= 3.0));
                let again = ChronologicalTree::from_records(&t.records()).unwrap();
                assert_eq!(again, t);
            }
        }
    }

    #[test]
    fn lifetime_laws() {
        let g = Lifetime::Gamma { shape: 1.0, scale: 2.0 };
        let e = Lifetime::Exponential { rate: 0.5 };
        for x in [0.1, 1.0, 3.0] {
            assert!((g.cdf(x) - e.cdf(x)).abs() < 1e-12);
        }
        assert_eq!(Lifetime::Deterministic { value: 1.0 }.survival(0.5), 1.0);
        assert_eq!(Lifetime::Deterministic { value: 1.0 }.survival(1.0), 0.0);
        assert!(Lifetime::Gamma { shape: -1.0, scale: 1.0 }.validate().is_err());
    }
}
