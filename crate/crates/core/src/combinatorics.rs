//! Exact counts and probabilities for the uniform tree families.
//!
//! Everything here is an exact `BigRational`. Split nodes only are
//! counted as internal vertices, so products over internal vertices run
//! over the `n - 1` values of `λ(v)` returned by [`Tree::leaf_counts`].

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tree::{Tree, TreeError, TreeKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CombinatoricsError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("model {model} is not defined on {kind} trees")]
    IncompatibleKind { model: ModelId, kind: TreeKind },
    #[error("beta = {0} has no exact rational law; use the branching module")]
    IrrationalBeta(f64),
    #[error("probability {0} outside (0, 1)")]
    ProbabilityRange(String),
    #[error("cannot parse {0:?} as a rational number")]
    Parse(String),
}

/// The uniform laws and the β-splitting family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelId {
    Pda,
    Erm,
    Urt,
    Beta(f64),
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelId::Pda => f.write_str("pda"),
            ModelId::Erm => f.write_str("erm"),
            ModelId::Urt => f.write_str("urt"),
            ModelId::Beta(b) => write!(f, "beta:{b}"),
        }
    }
}

impl FromStr for ModelId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pda" => Ok(ModelId::Pda),
            "erm" | "yule" => Ok(ModelId::Erm),
            "urt" => Ok(ModelId::Urt),
            other => match other.strip_prefix("beta:") {
                Some(b) => b.parse::<f64>().map(ModelId::Beta).map_err(|e| format!("bad beta {b:?}: {e}")),
                None => Err(format!("unknown model {s:?} (pda, erm, urt, beta:<x>)")),
            },
        }
    }
}

fn int(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn pow2(e: i64) -> BigRational {
    let p = BigRational::from_integer(BigInt::one() << e.unsigned_abs() as usize);
    if e >= 0 {
        p
    } else {
        p.recip()
    }
}

pub fn factorial(n: u64) -> BigRational {
    (1..=n).fold(BigRational::one(), |acc, k| acc * int(k))
}

/// `(2n-3)!!`, the number of labelled trees with `n` leaves; `t_1 = 1`.
pub fn t_count(n: u64) -> BigRational {
    let mut acc = BigRational::one();
    let mut k = 3;
    while k <= 2 * n.max(2) - 3 {
        acc *= int(k);
        k += 2;
    }
    acc
}

/// `n!(n-1)!/2^(n-1)`, the number of ranked labelled trees; `r_1 = 1`.
pub fn r_count(n: u64) -> BigRational {
    if n <= 1 {
        return BigRational::one();
    }
    factorial(n) * factorial(n - 1) * pow2(-(n as i64 - 1))
}

/// `C(2k, k)/(k+1)`.
pub fn catalan(k: u64) -> BigRational {
    factorial(2 * k) / (factorial(k) * factorial(k + 1))
}

/// `1 + 1/2 + … + 1/n`.
pub fn harmonic(n: u64) -> BigRational {
    (1..=n).fold(BigRational::zero(), |acc, k| acc + int(k).recip())
}

/// Number of distinct labellings of a shape (`n!/2^s`) or of a ranked
/// shape (`n!/2^c`).
pub fn labellings_count(t: &Tree) -> Result<BigRational, CombinatoricsError> {
    let kind = t.kind()?;
    let n = t.n_leaves() as u64;
    let s = match kind {
        TreeKind::Shape => t.symmetric_nodes(),
        TreeKind::Ranked => t.cherries(),
        _ => return Err(CombinatoricsError::IncompatibleKind { model: ModelId::Urt, kind }),
    };
    Ok(factorial(n) * pow2(-(s as i64)))
}

fn prod_lambda_minus_one(t: &Tree) -> BigRational {
    t.leaf_counts().into_iter().fold(BigRational::one(), |acc, l| acc * int(l as u64 - 1))
}

/// Number of distinct rankings of a shape or labelled tree:
/// `2^(c-s) (n-1)! / ∏(λ(v)-1)`, with `s = c` for labelled input.
pub fn rankings_count(t: &Tree) -> Result<BigRational, CombinatoricsError> {
    let kind = t.kind()?;
    let n = t.n_leaves() as u64;
    if n == 1 {
        return Ok(BigRational::one());
    }
    let exponent = match kind {
        TreeKind::Shape => t.cherries() as i64 - t.symmetric_nodes() as i64,
        TreeKind::Labelled => 0,
        _ => return Err(CombinatoricsError::IncompatibleKind { model: ModelId::Urt, kind }),
    };
    Ok(pow2(exponent) * factorial(n - 1) / prod_lambda_minus_one(t))
}

fn normalise(model: ModelId) -> Result<ModelId, CombinatoricsError> {
    match model {
        ModelId::Beta(0.0) => Ok(ModelId::Erm),
        ModelId::Beta(-1.5) => Ok(ModelId::Pda),
        ModelId::Beta(b) => Err(CombinatoricsError::IrrationalBeta(b)),
        m => Ok(m),
    }
}

/// Exact probability of `t` under `model`. The flavour of `t` selects the
/// law: labelled trees get the labelled law, shapes its pushforward,
/// ranked shapes and ranked labelled trees the ranked laws (URT only).
/// URT on labelled trees or shapes is its pushforward, which is ERM.
pub fn shape_probability(t: &Tree, model: ModelId) -> Result<BigRational, CombinatoricsError> {
    let model = normalise(model)?;
    let kind = t.kind()?;
    let n = t.n_leaves() as u64;
    if n == 1 {
        return Ok(BigRational::one());
    }
    let e = n as i64 - 1;
    let p = match (model, kind) {
        (ModelId::Pda, TreeKind::Labelled) => t_count(n).recip(),
        (ModelId::Erm | ModelId::Urt, TreeKind::Labelled) => pow2(e) / (factorial(n) * prod_lambda_minus_one(t)),
        (ModelId::Pda, TreeKind::Shape) => pow2(e - t.symmetric_nodes() as i64) / catalan(n - 1),
        (ModelId::Erm | ModelId::Urt, TreeKind::Shape) => {
            pow2(e - t.symmetric_nodes() as i64) / prod_lambda_minus_one(t)
        }
        (ModelId::Urt, TreeKind::Ranked) => pow2(e - t.cherries() as i64) / factorial(n - 1),
        (ModelId::Urt, TreeKind::RankedLabelled) => r_count(n).recip(),
        (model, kind) => return Err(CombinatoricsError::IncompatibleKind { model, kind }),
    };
    Ok(p)
}

/// Probability `σ_n` that a binary Galton–Watson tree with splitting
/// probability `p` has `n` leaves.
pub fn gw_leaf_probability(n: u64, p: &BigRational) -> Result<BigRational, CombinatoricsError> {
    if !p.is_positive() || *p >= BigRational::one() {
        return Err(CombinatoricsError::ProbabilityRange(p.to_string()));
    }
    if n == 0 {
        return Ok(BigRational::zero());
    }
    let q = BigRational::one() - p;
    let mut pow_p = BigRational::one();
    for _ in 1..n {
        pow_p *= p;
    }
    let mut pow_q = BigRational::one();
    for _ in 0..n {
        pow_q *= &q;
    }
    Ok(pow2(n as i64 - 1) * t_count(n) * pow_p * pow_q / factorial(n))
}

/// Parses `"a/b"`, an integer, or a finite decimal such as `"0.3"`
/// into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational, CombinatoricsError> {
    let err = || CombinatoricsError::Parse(s.to_string());
    let s = s.trim();
    if s.contains('/') {
        return BigRational::from_str(s).map_err(|_| err());
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(err());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let digits = format!("{whole}{frac}");
    let num = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| err())?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(num, den);
    Ok(if neg { -r } else { r })
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
