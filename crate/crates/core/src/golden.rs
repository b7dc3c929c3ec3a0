//! Exact reference values, checked by `phylocomb selftest`.

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::combinatorics::{parse_rational, r_count, shape_probability, t_count, ModelId};
use crate::tree::{enumerate, ranked_shapes, Bounds, Tree, TreeKind};

#[derive(Debug, Clone, Serialize)]
pub struct GoldenCheck {
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

fn check(name: String, expected: String, actual: String) -> GoldenCheck {
    let pass = expected == actual;
    GoldenCheck { name, expected, actual, pass }
}

fn show(mut xs: Vec<BigRational>) -> String {
    xs.sort();
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn expand(spec: &[(&str, usize)]) -> Vec<BigRational> {
    spec.iter().flat_map(|&(q, k)| std::iter::repeat_n(parse_rational(q).expect("literal"), k)).collect()
}

/// URT probabilities of all ranked shapes with 4, 5 and 6 tips.
pub const URT_RANKED: [(usize, &[(&str, usize)]); 3] = [
    (4, &[("2/3", 1), ("1/3", 1)]),
    (5, &[("1/3", 1), ("1/6", 4)]),
    (6, &[("2/15", 1), ("1/15", 11), ("1/30", 4)]),
];

/// Caterpillar probabilities for 3..=7 tips under PDA and ERM.
pub const CATERPILLAR: [(usize, &str, &str); 5] =
    [(3, "1", "1"), (4, "4/5", "2/3"), (5, "4/7", "1/3"), (6, "8/21", "2/15"), (7, "8/33", "2/45")];

/// Runs every exact check.
pub fn run_golden() -> Vec<GoldenCheck> {
    let mut out = Vec::new();
    for (n, spec) in URT_RANKED {
        let (probs, total) = match ranked_shapes(n) {
            Ok(ts) => {
                let ps: Vec<BigRational> = ts.iter().map(|t| shape_probability(t, ModelId::Urt).unwrap_or_else(|_| BigRational::zero())).collect();
                let total: BigRational = ps.iter().sum();
                (ps, total)
            }
            Err(_) => (Vec::new(), BigRational::zero()),
        };
        out.push(check(format!("urt ranked shapes n={n}"), show(expand(spec)), show(probs)));
        out.push(check(format!("urt ranked shapes n={n} sum"), "1".into(), total.to_string()));
    }
    for (n, pda, erm) in CATERPILLAR {
        let cat = Tree::caterpillar(n);
        for (model, want) in [(ModelId::Pda, pda), (ModelId::Erm, erm)] {
            let got = shape_probability(&cat, model).map(|p| p.to_string()).unwrap_or_else(|e| e.to_string());
            out.push(check(format!("caterpillar n={n} {model}"), want.into(), got));
        }
    }
    let bounds = Bounds { labelled: 8, ranked_labelled: 8 };
    for n in 2..=8usize {
        for (kind, want) in [(TreeKind::Labelled, t_count(n as u64)), (TreeKind::RankedLabelled, r_count(n as u64))] {
            let got = enumerate(n, kind, bounds).map(|v| v.len().to_string()).unwrap_or_else(|e| e.to_string());
            out.push(check(format!("count {kind} n={n}"), want.to_string(), got));
        }
    }
    for n in 2..=12usize {
        let got = crate::branching::a_beta(n, 0.0).map(|a| a.to_string()).unwrap_or_else(|e| e.to_string());
        out.push(check(format!("a_n(0) n={n}"), ((n - 1) as f64).to_string(), got));
    }
    let one = BigRational::one();
    let gw: BigRational = (1..=12u64).map(|n| crate::combinatorics::gw_leaf_probability(n, &parse_rational("1/2").expect("literal")).expect("valid p")).sum();
    out.push(check("gw leaf law p=1/2 partial sum below 1".into(), "true".into(), (gw < one).to_string()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_golden_checks_pass() {
        let checks = run_golden();
        assert!(checks.len() > 30);
        for c in &checks {
            assert!(c.pass, "{}: expected {} got {}", c.name, c.expected, c.actual);
        }
    }
}
