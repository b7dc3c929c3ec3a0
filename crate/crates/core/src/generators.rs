//! Forward simulators: Yule, Kingman and binary Galton–Watson trees.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::Serialize;
use thiserror::Error;

use crate::tree::Tree;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeneratorError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no tree with the requested size after {0} attempts")]
    BudgetExhausted(u64),
}

/// A ranked tree with split times. `split_times[k - 1]` is the time of
/// the split ranked `k`, measured forward from the basal split's stem
/// origin at time 0; all tips sit at `horizon`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimedRankedTree {
    #[serde(serialize_with = "as_newick")]
    pub tree: Tree,
    pub split_times: Vec<f64>,
    pub horizon: f64,
}

fn as_newick<S: serde::Serializer>(t: &Tree, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&crate::tree::to_newick(t))
}

// Growable binary tree used by the simulators.
struct Arena {
    kids: Vec<Option<(usize, usize)>>,
    rank: Vec<Option<u32>>,
    label: Vec<Option<u32>>,
}

impl Arena {
    fn new() -> Self {
        Arena { kids: Vec::new(), rank: Vec::new(), label: Vec::new() }
    }

    fn push(&mut self, label: Option<u32>) -> usize {
        self.kids.push(None);
        self.rank.push(None);
        self.label.push(label);
        self.kids.len() - 1
    }

    fn to_tree(&self, v: usize) -> Tree {
        match self.kids[v] {
            None => Tree::Leaf(self.label[v]),
            Some((a, b)) => Tree::Split { rank: self.rank[v], children: Box::new((self.to_tree(a), self.to_tree(b))) },
        }
    }
}

fn rate(name: &str, x: f64) -> Result<Exp<f64>, GeneratorError> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(GeneratorError::InvalidParameter(format!("{name} must be positive, got {x}")));
    }
    Exp::new(x).map_err(|e| GeneratorError::InvalidParameter(e.to_string()))
}

/// Pure-birth tree grown from one lineage until it has `n` lineages. The
/// `k`-th split gets rank `k`; tips are cut at the time the next split
/// would have occurred.
pub fn sample_yule<R: Rng + ?Sized>(n: usize, b: f64, rng: &mut R) -> Result<TimedRankedTree, GeneratorError> {
    if n < 2 {
        return Err(GeneratorError::InvalidParameter(format!("n must be at least 2, got {n}")));
    }
    rate("b", b)?;
    let mut arena = Arena::new();
    let mut alive = vec![arena.push(None)];
    let mut t = 0.0;
    let mut split_times = Vec::with_capacity(n - 1);
    for k in 1..n {
        t += rate("b", b * k as f64)?.sample(rng);
        let i = rng.random_range(0..k);
        let v = alive[i];
        let (a, c) = (arena.push(None), arena.push(None));
        arena.kids[v] = Some((a, c));
        arena.rank[v] = Some(k as u32);
        alive[i] = a;
        alive.push(c);
        split_times.push(t);
    }
    let horizon = t + rate("b", b * n as f64)?.sample(rng);
    Ok(TimedRankedTree { tree: arena.to_tree(0).canonical(), split_times, horizon })
}

/// Kingman coalescent on labels `1..n`: each pair merges at rate `c`.
/// With `k` lineages left the merger gets rank `k - 1`.
pub fn sample_kingman<R: Rng + ?Sized>(n: usize, c: f64, rng: &mut R) -> Result<TimedRankedTree, GeneratorError> {
    if n < 2 {
        return Err(GeneratorError::InvalidParameter(format!("n must be at least 2, got {n}")));
    }
    rate("c", c)?;
    let mut arena = Arena::new();
    let mut lineages: Vec<usize> = (1..=n as u32).map(|l| arena.push(Some(l))).collect();
    let mut back = vec![0.0; n - 1];
    let mut t = 0.0;
    for k in (2..=n).rev() {
        t += rate("c", c * (k * (k - 1)) as f64 / 2.0)?.sample(rng);
        let i = rng.random_range(0..k);
        let mut j = rng.random_range(0..k - 1);
        if j >= i {
            j += 1;
        }
        let (lo, hi) = (i.min(j), i.max(j));
        let v = arena.push(None);
        arena.kids[v] = Some((lineages[lo], lineages[hi]));
        arena.rank[v] = Some(k as u32 - 1);
        lineages[lo] = v;
        lineages.swap_remove(hi);
        back[k - 2] = t;
    }
    let horizon = t;
    let split_times = back.iter().map(|s| horizon - s).collect();
    Ok(TimedRankedTree { tree: arena.to_tree(lineages[0]).canonical(), split_times, horizon })
}

#[derive(Debug, Clone, PartialEq)]
pub enum GwOutcome {
    Tree(Tree),
    CapExceeded,
}

/// Binary Galton–Watson tree: each individual has two children with
/// probability `p`, none otherwise. Gives up once the tree is known to
/// have more than `cap` leaves.
pub fn sample_gw_binary<R: Rng + ?Sized>(p: f64, cap: usize, rng: &mut R) -> Result<GwOutcome, GeneratorError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(GeneratorError::InvalidParameter(format!("p must lie in (0, 1), got {p}")));
    }
    let mut arena = Arena::new();
    let mut pending = vec![arena.push(None)];
    let mut splits = 0usize;
    while let Some(v) = pending.pop() {
        if rng.random::<f64>() < p {
            splits += 1;
            if splits + 1 > cap {
                return Ok(GwOutcome::CapExceeded);
            }
            let (a, b) = (arena.push(None), arena.push(None));
            arena.kids[v] = Some((a, b));
            pending.push(a);
            pending.push(b);
        }
    }
    Ok(GwOutcome::Tree(arena.to_tree(0).canonical()))
}

/// Galton–Watson tree conditioned on `n` leaves, by rejection.
pub fn sample_gw_conditioned<R: Rng + ?Sized>(n: usize, p: f64, budget: u64, rng: &mut R) -> Result<Tree, GeneratorError> {
    if n == 0 {
        return Err(GeneratorError::InvalidParameter("n must be positive".into()));
    }
    for _ in 0..budget {
        if let GwOutcome::Tree(t) = sample_gw_binary(p, n, rng)? {
            if t.n_leaves() == n {
                return Ok(t);
            }
        }
    }
    Err(GeneratorError::BudgetExhausted(budget))
}

/// Default splitting probability and attempt budget for
/// [`sample_gw_conditioned`].
pub const GW_DEFAULT_P: f64 = 0.5;
pub const GW_DEFAULT_BUDGET: u64 = 10_000_000;
