//! Markov branching models.
//!
//! A model is given by split laws `q_n` on `{1, …, n-1}`: the root of an
//! `n`-leaf tree sends `K_n ~ q_n` uniformly chosen labels to one side and
//! the rest to the other, and both sides are built independently.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::Serialize;
use thiserror::Error;

use crate::gof::{chi_square, TestResult};
use crate::numerics::{ln_gamma, log_sum_exp, tanh_sinh, NumericError};
use crate::rng;
use crate::tree::{labelled_trees, Tree, TreeError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BranchingError {
    #[error("beta = {0} is outside (-2, ∞)")]
    BetaDomain(f64),
    #[error("split size {i} out of range for n = {n}")]
    IndexRange { n: usize, i: usize },
    #[error("split measure is not symmetric: f({x}) = {left} but f(1-x) = {right}")]
    NonSymmetric { x: f64, left: f64, right: f64 },
    #[error("split measure integral {integral} disagrees with the sum {sum} of split weights")]
    DivergentIntegral { integral: f64, sum: f64 },
    #[error("splitting density is not integrable for beta = {0}")]
    NonIntegrable(f64),
    #[error("invalid split law override: {0}")]
    InvalidOverride(String),
    #[error("quadrature failed: {0}")]
    Quadrature(#[from] NumericError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

type Density = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A symmetric measure on `[0, 1]`: a density on `(0, 1)` plus equal atoms
/// at 0 and 1.
#[derive(Clone, Default)]
pub struct SplitMeasure {
    pub density: Option<Density>,
    /// Mass of the atom at 0, which equals the atom at 1.
    pub atom: f64,
}

impl fmt::Debug for SplitMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SplitMeasure")
            .field("density", &self.density.as_ref().map(|_| "<fn>"))
            .field("atom", &self.atom)
            .finish()
    }
}

impl SplitMeasure {
    pub fn from_density(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        SplitMeasure { density: Some(Arc::new(f)), atom: 0.0 }
    }

    /// The β-splitting density `x^β (1-x)^β`.
    pub fn beta(beta: f64) -> Self {
        SplitMeasure::from_density(move |x| (x * (1.0 - x)).powf(beta))
    }

    /// Atoms only: every split removes a single leaf.
    pub fn erosion() -> Self {
        SplitMeasure { density: None, atom: 1.0 }
    }

    /// Rejects densities that differ from their mirror image on a grid.
    pub fn check_symmetric(&self) -> Result<(), BranchingError> {
        if let Some(f) = &self.density {
            for k in 1..50 {
                let x = k as f64 / 100.0;
                let (left, right) = (f(x), f(1.0 - x));
                if (left - right).abs() > 1e-9 * left.abs().max(right.abs()).max(1.0) {
                    return Err(BranchingError::NonSymmetric { x, left, right });
                }
            }
        }
        Ok(())
    }
}

/// Split law families.
#[derive(Debug, Clone)]
pub enum SplitLaw {
    Pda,
    Erm,
    Beta(f64),
    Measure(SplitMeasure),
    /// A base law with whole distributions replaced for some `n`; entry
    /// `i - 1` of the vector is `q_n(i)`.
    Custom { base: Box<SplitLaw>, overrides: BTreeMap<usize, Vec<f64>> },
}

impl SplitLaw {
    /// The ERM law except that `q_4(2) = 1`.
    pub fn balanced_four() -> SplitLaw {
        SplitLaw::Custom { base: Box::new(SplitLaw::Erm), overrides: BTreeMap::from([(4, vec![0.0, 1.0, 0.0])]) }
    }

    pub fn validate(&self) -> Result<(), BranchingError> {
        match self {
            SplitLaw::Beta(b) if !(*b > -2.0) => Err(BranchingError::BetaDomain(*b)),
            SplitLaw::Measure(m) => m.check_symmetric(),
            SplitLaw::Custom { base, overrides } => {
                base.validate()?;
                for (&n, q) in overrides {
                    if n < 2 || q.len() != n - 1 {
                        return Err(BranchingError::InvalidOverride(format!("q_{n} needs {} entries", n.saturating_sub(1))));
                    }
                    let total: f64 = q.iter().sum();
                    if q.iter().any(|&x| !(x >= 0.0)) || (total - 1.0).abs() > 1e-12 {
                        return Err(BranchingError::InvalidOverride(format!("q_{n} is not a distribution")));
                    }
                    if (0..q.len()).any(|i| q[i] != q[q.len() - 1 - i]) {
                        return Err(BranchingError::InvalidOverride(format!("q_{n} is not symmetric")));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// `ln t_n` with `t_n = (2n-3)!!` and `t_1 = 1`.
fn ln_t(n: usize) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    let n = n as f64;
    ln_gamma(2.0 * n - 2.0) - (n - 2.0) * std::f64::consts::LN_2 - ln_gamma(n - 1.0)
}

fn ln_choose(n: usize, i: usize) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(i as f64 + 1.0) - ln_gamma((n - i) as f64 + 1.0)
}

/// `ln Γ(β+i+1) - ln Γ(i+1)`, exactly 0 when `β = 0`.
fn ln_gamma_shift(beta: f64, i: usize) -> f64 {
    ln_gamma(beta + i as f64 + 1.0) - ln_gamma(i as f64 + 1.0)
}

fn beta_log_weights(n: usize, beta: f64) -> Vec<f64> {
    (1..n).map(|i| ln_gamma_shift(beta, i) + ln_gamma_shift(beta, n - i)).collect()
}

/// Normalising constant `a_n(β) = Σ_i Γ(β+i+1)Γ(β+n-i+1)/(i!(n-i)!)`.
pub fn a_beta(n: usize, beta: f64) -> Result<f64, BranchingError> {
    if !(beta > -2.0) {
        return Err(BranchingError::BetaDomain(beta));
    }
    if n < 2 {
        return Err(BranchingError::IndexRange { n, i: 0 });
    }
    let w = beta_log_weights(n, beta);
    let m = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scaled: f64 = w.iter().map(|x| (x - m).exp()).sum();
    Ok(scaled * m.exp())
}

fn mirror(mut q: Vec<f64>) -> Vec<f64> {
    let len = q.len();
    for i in 0..len / 2 {
        q[len - 1 - i] = q[i];
    }
    q
}

fn normalised_from_logs(logs: Vec<f64>) -> Vec<f64> {
    let z = log_sum_exp(&logs);
    mirror(logs.into_iter().map(|l| (l - z).exp()).collect())
}

/// `1 - x^n - (1-x)^n` without cancellation for small `x`.
fn split_mass(x: f64, n: usize) -> f64 {
    -((n as f64) * (-x).ln_1p()).exp_m1() - x.powi(n as i32)
}

/// Split distribution `q_n` induced by a split measure.
pub fn qn_from_measure(mu: &SplitMeasure, n: usize) -> Result<Vec<f64>, BranchingError> {
    if n < 2 {
        return Err(BranchingError::IndexRange { n, i: 0 });
    }
    mu.check_symmetric()?;
    let tol = 1e-12;
    let mut num = vec![0.0; n - 1];
    let mut integral = 0.0;
    if let Some(f) = &mu.density {
        for i in 1..=n / 2 {
            let (a, b) = (i as i32, (n - i) as i32);
            let v = tanh_sinh(|x| (x.powi(a) * (1.0 - x).powi(b) + x.powi(b) * (1.0 - x).powi(a)) * f(x), 0.0, 0.5, tol)?;
            num[i - 1] = ln_choose(n, i).exp() * v;
        }
        integral = 2.0 * tanh_sinh(|x| split_mass(x, n) * f(x), 0.0, 0.5, tol)?;
    }
    let mut num = mirror(num);
    num[0] += n as f64 * mu.atom;
    num[n - 2] += n as f64 * mu.atom;
    let alpha = integral + 2.0 * n as f64 * mu.atom;
    let sum: f64 = num.iter().sum();
    if !(alpha > 0.0) || (alpha - sum).abs() > 1e-6 * alpha {
        return Err(BranchingError::DivergentIntegral { integral: alpha, sum });
    }
    Ok(mirror(num.into_iter().map(|x| x / alpha).collect()))
}

/// The whole split distribution: entry `i - 1` is `q_n(i)`.
pub fn split_distribution(law: &SplitLaw, n: usize) -> Result<Vec<f64>, BranchingError> {
    if n < 2 {
        return Err(BranchingError::IndexRange { n, i: 0 });
    }
    match law {
        SplitLaw::Erm => Ok(vec![1.0 / (n - 1) as f64; n - 1]),
        SplitLaw::Pda => {
            let lt = ln_t(n);
            let logs = (1..n).map(|i| ln_choose(n, i) + ln_t(i) + ln_t(n - i) - lt - std::f64::consts::LN_2).collect();
            Ok(normalised_from_logs(logs))
        }
        SplitLaw::Beta(b) => {
            if !(*b > -2.0) {
                return Err(BranchingError::BetaDomain(*b));
            }
            Ok(normalised_from_logs(beta_log_weights(n, *b)))
        }
        SplitLaw::Measure(mu) => qn_from_measure(mu, n),
        SplitLaw::Custom { base, overrides } => match overrides.get(&n) {
            Some(q) => Ok(q.clone()),
            None => split_distribution(base, n),
        },
    }
}

/// `q_n(i)`.
pub fn split_prob(law: &SplitLaw, n: usize, i: usize) -> Result<f64, BranchingError> {
    if n < 2 || i == 0 || i >= n {
        return Err(BranchingError::IndexRange { n, i });
    }
    Ok(split_distribution(law, n)?[i - 1])
}

/// Exact probability of a labelled tree under a Markov branching model:
/// the product over split nodes of `2 q_λ(λ₁) / C(λ, λ₁)`.
pub fn mbm_probability(t: &Tree, law: &SplitLaw) -> Result<f64, BranchingError> {
    let mut cache: HashMap<usize, Vec<f64>> = HashMap::new();
    fn go(t: &Tree, law: &SplitLaw, cache: &mut HashMap<usize, Vec<f64>>) -> Result<(usize, f64), BranchingError> {
        match t.children() {
            None => Ok((1, 1.0)),
            Some((a, b)) => {
                let (na, pa) = go(a, law, cache)?;
                let (nb, pb) = go(b, law, cache)?;
                let n = na + nb;
                if let std::collections::hash_map::Entry::Vacant(e) = cache.entry(n) {
                    e.insert(split_distribution(law, n)?);
                }
                let q = cache[&n][na - 1];
                Ok((n, 2.0 * q / ln_choose(n, na).exp() * pa * pb))
            }
        }
    }
    Ok(go(t, law, &mut cache)?.1)
}

/// Log-probability of a labelled tree under the β-splitting model, from
/// the closed-form product over split nodes.
pub fn beta_tree_probability(t: &Tree, beta: f64) -> Result<f64, BranchingError> {
    if !(beta > -2.0) {
        return Err(BranchingError::BetaDomain(beta));
    }
    let n = t.n_leaves();
    let nf = n as f64;
    let mut acc = nf * ln_gamma(beta + 2.0) + (nf - 1.0) * std::f64::consts::LN_2 - ln_gamma(beta + nf + 1.0);
    for lambda in t.leaf_counts() {
        acc += ln_gamma_shift(beta, lambda) - a_beta(lambda, beta)?.ln();
    }
    Ok(acc)
}

/// Draws from a Markov branching model, caching cumulative split laws.
pub struct MbmSampler {
    law: SplitLaw,
    cdfs: HashMap<usize, Vec<f64>>,
}

impl MbmSampler {
    pub fn new(law: SplitLaw) -> Result<Self, BranchingError> {
        law.validate()?;
        Ok(MbmSampler { law, cdfs: HashMap::new() })
    }

    fn cdf(&mut self, n: usize) -> Result<&Vec<f64>, BranchingError> {
        if !self.cdfs.contains_key(&n) {
            let q = split_distribution(&self.law, n)?;
            let mut acc = 0.0;
            let mut cdf: Vec<f64> = q
                .iter()
                .map(|x| {
                    acc += x;
                    acc
                })
                .collect();
            *cdf.last_mut().unwrap() = f64::INFINITY;
            self.cdfs.insert(n, cdf);
        }
        Ok(&self.cdfs[&n])
    }

    /// Draws `K_n`.
    pub fn draw_split<R: Rng + ?Sized>(&mut self, n: usize, rng: &mut R) -> Result<usize, BranchingError> {
        let u: f64 = rng.random();
        let cdf = self.cdf(n)?;
        Ok(cdf.partition_point(|&c| c < u) + 1)
    }

    /// A labelled tree on `{1..n}` in canonical form.
    pub fn sample<R: Rng + ?Sized>(&mut self, n: usize, rng: &mut R) -> Result<Tree, BranchingError> {
        assert!(n >= 1);
        let mut labels: Vec<u32> = (1..=n as u32).collect();
        Ok(self.build(&mut labels, rng)?.canonical())
    }

    fn build<R: Rng + ?Sized>(&mut self, labels: &mut [u32], rng: &mut R) -> Result<Tree, BranchingError> {
        let n = labels.len();
        if n == 1 {
            return Ok(Tree::labelled_leaf(labels[0]));
        }
        let k = self.draw_split(n, rng)?;
        let (left, right) = labels.partial_shuffle(rng, k);
        let a = self.build(left, rng)?;
        let b = self.build(right, rng)?;
        Ok(Tree::join(a, b))
    }
}

pub fn sample_mbm<R: Rng + ?Sized>(n: usize, law: &SplitLaw, rng: &mut R) -> Result<Tree, BranchingError> {
    MbmSampler::new(law.clone())?.sample(n, rng)
}

/// The normalised β-splitting density `Beta(β+1, β+1)`, for `β > -1`.
pub fn beta_split_density(beta: f64) -> Result<Beta<f64>, BranchingError> {
    if !(beta > -1.0) {
        return Err(BranchingError::NonIntegrable(beta));
    }
    Beta::new(beta + 1.0, beta + 1.0).map_err(|_| BranchingError::NonIntegrable(beta))
}

/// Interval splitting: `n` uniform points carry the labels, intervals are
/// cut at positions drawn from `split` and only cuts that separate points
/// create split nodes.
pub fn sample_interval_splitting<R: Rng + ?Sized, D: Distribution<f64>>(n: usize, split: &D, rng: &mut R) -> Tree {
    assert!(n >= 1);
    let mut pts: Vec<(f64, u32)> = (1..=n as u32).map(|l| (rng.random::<f64>(), l)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    fn go<R: Rng + ?Sized, D: Distribution<f64>>(pts: &[(f64, u32)], lo: f64, hi: f64, split: &D, rng: &mut R) -> Tree {
        if pts.len() == 1 {
            return Tree::labelled_leaf(pts[0].1);
        }
        let (mut lo, mut hi) = (lo, hi);
        loop {
            let cut = lo + split.sample(rng) * (hi - lo);
            let k = pts.partition_point(|p| p.0 < cut);
            if k == 0 {
                lo = cut;
            } else if k == pts.len() {
                hi = cut;
            } else {
                let a = go(&pts[..k], lo, cut, split, rng);
                let b = go(&pts[k..], cut, hi, split, rng);
                return Tree::join(a, b);
            }
        }
    }
    go(&pts, 0.0, 1.0, split, rng).canonical()
}

/// Monte Carlo summary of the smaller side `min(K_n, n - K_n)` of the
/// basal split.
#[derive(Debug, Clone, Serialize)]
pub struct CladeStats {
    pub n: usize,
    pub reps: usize,
    pub median: f64,
    pub histogram: BTreeMap<usize, u64>,
}

pub fn smaller_clade_stats<R: Rng + ?Sized>(law: &SplitLaw, n: usize, reps: usize, rng: &mut R) -> Result<CladeStats, BranchingError> {
    let mut sampler = MbmSampler::new(law.clone())?;
    let mut draws = Vec::with_capacity(reps);
    for _ in 0..reps {
        let k = sampler.draw_split(n, rng)?;
        draws.push(k.min(n - k));
    }
    draws.sort_unstable();
    let median = if reps == 0 {
        f64::NAN
    } else if reps % 2 == 1 {
        draws[reps / 2] as f64
    } else {
        0.5 * (draws[reps / 2 - 1] + draws[reps / 2]) as f64
    };
    let mut histogram = BTreeMap::new();
    for d in draws {
        *histogram.entry(d).or_insert(0) += 1;
    }
    Ok(CladeStats { n, reps, median, histogram })
}

/// Samples `n + 1`-leaf trees, removes leaf `n + 1` and compares the
/// result with the exact `n`-leaf law by a χ² test over all labelled
/// trees.
pub fn check_sampling_consistency(law: &SplitLaw, n: usize, reps: usize, seed: u64) -> Result<TestResult, BranchingError> {
    law.validate()?;
    let cells = labelled_trees(n)?;
    let index: HashMap<Tree, usize> = cells.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
    let probs: Vec<f64> = cells.iter().map(|t| mbm_probability(t, law)).collect::<Result<_, _>>()?;
    let draws = rng::replicate(seed, reps, |r| {
        let mut s = MbmSampler::new(law.clone()).expect("validated");
        let t = s.sample(n + 1, r).expect("validated");
        t.drop_leaf(n as u32 + 1).expect("leaf present").canonical()
    });
    let mut counts = vec![0u64; cells.len()];
    for t in draws {
        counts[index[&t]] += 1;
    }
    Ok(chi_square(&counts, &probs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::{shape_probability, to_f64, ModelId};
    use crate::rng::seeded;

    #[test]
    fn erm_and_beta_minus_one_values() {
        assert_eq!(split_prob(&SplitLaw::Erm, 5, 2).unwrap(), 0.25);
        let q = split_distribution(&SplitLaw::Beta(-1.0), 4).unwrap();
        assert!((q[1] - 3.0 / 11.0).abs() < 1e-14);
        assert!((q[0] - 4.0 / 11.0).abs() < 1e-14);
        assert!((q[2] - 4.0 / 11.0).abs() < 1e-14);
        assert!((a_beta(4, -1.0).unwrap() - 11.0 / 12.0).abs() < 1e-14);
    }

    #[test]
    fn beta_minus_three_halves_is_pda() {
        for n in 2..=50 {
            let a = split_distribution(&SplitLaw::Beta(-1.5), n).unwrap();
            let b = split_distribution(&SplitLaw::Pda, n).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12, "n={n}");
            }
        }
    }

    #[test]
    fn a_beta_special_values() {
        for n in 2..200 {
            assert_eq!(a_beta(n, 0.0).unwrap(), (n - 1) as f64);
        }
        for n in [2usize, 5, 30] {
            let nf = n as f64;
            let closed = 4.0 * (ln_gamma(nf - 0.5) + ln_gamma(0.5) - ln_gamma(nf + 1.0)).exp();
            assert!((a_beta(n, -1.5).unwrap() - closed).abs() < 1e-12 * closed);
        }
        assert!(a_beta(5, -2.0).is_err());
    }

    #[test]
    fn pda_large_n_limit() {
        let q = split_distribution(&SplitLaw::Pda, 10_000).unwrap();
        let catalan = [1.0, 1.0, 2.0, 5.0];
        for i in 1..=4 {
            let limit = catalan[i - 1] * 4f64.powi(-(i as i32));
            assert!((q[i - 1] - limit).abs() < 1e-3);
        }
        assert!((q[3] - 5.0 / 256.0).abs() < 1e-4);
    }

    #[test]
    fn measure_laws() {
        let flat = SplitLaw::Measure(SplitMeasure::from_density(|_| 1.0));
        for n in 2..12 {
            for (i, q) in split_distribution(&flat, n).unwrap().iter().enumerate() {
                assert!((q - 1.0 / (n - 1) as f64).abs() < 1e-10, "n={n} i={i}");
            }
        }
        let q = split_distribution(&SplitLaw::Measure(SplitMeasure::erosion()), 7).unwrap();
        assert_eq!(q, vec![0.5, 0.0, 0.0, 0.0, 0.0, 0.5]);
        let pda = SplitLaw::Measure(SplitMeasure::beta(-1.5));
        for n in 2..=20 {
            let a = split_distribution(&pda, n).unwrap();
            let b = split_distribution(&SplitLaw::Pda, n).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-8, "n={n}: {x} vs {y}");
            }
        }
        let skew = SplitMeasure::from_density(|x| x);
        assert!(matches!(qn_from_measure(&skew, 4), Err(BranchingError::NonSymmetric { .. })));
    }

    #[test]
    fn explicit_beta_probability_matches_exact_laws() {
        for n in 2..=6 {
            for t in labelled_trees(n).unwrap() {
                let erm = to_f64(&shape_probability(&t, ModelId::Erm).unwrap());
                let pda = to_f64(&shape_probability(&t, ModelId::Pda).unwrap());
                assert!((beta_tree_probability(&t, 0.0).unwrap().exp() - erm).abs() < 1e-12);
                assert!((beta_tree_probability(&t, -1.5).unwrap().exp() - pda).abs() < 1e-12);
                assert!((mbm_probability(&t, &SplitLaw::Beta(0.7)).unwrap() - beta_tree_probability(&t, 0.7).unwrap().exp()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sampler_edge_cases() {
        let mut r = seeded(1);
        assert_eq!(sample_mbm(1, &SplitLaw::Erm, &mut r).unwrap(), Tree::labelled_leaf(1));
        let d = beta_split_density(0.0).unwrap();
        let t = sample_interval_splitting(2, &d, &mut r);
        assert_eq!(t.n_leaves(), 2);
        assert!(beta_split_density(-1.0).is_err());
        let t = sample_mbm(40, &SplitLaw::Beta(-1.2), &mut r).unwrap();
        assert_eq!(t.kind().unwrap(), crate::tree::TreeKind::Labelled);
        assert_eq!(t.n_leaves(), 40);
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let a = sample_mbm(30, &SplitLaw::Pda, &mut seeded(5)).unwrap();
        let b = sample_mbm(30, &SplitLaw::Pda, &mut seeded(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn erosion_median_is_one() {
        let s = smaller_clade_stats(&SplitLaw::Measure(SplitMeasure::erosion()), 10_000, 101, &mut seeded(3)).unwrap();
        assert_eq!(s.median, 1.0);
    }

    #[test]
    fn invalid_overrides() {
        let law = SplitLaw::Custom { base: Box::new(SplitLaw::Erm), overrides: BTreeMap::from([(4, vec![0.5, 0.5, 0.0])]) };
        assert!(law.validate().is_err());
        assert!(SplitLaw::balanced_four().validate().is_ok());
    }
}
