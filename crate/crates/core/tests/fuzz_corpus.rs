//! Runs the fuzz harness bodies on the checked-in corpus and on proptest
//! strings, so parser panics surface under a stable toolchain.

use std::path::PathBuf;

use phylocomb::chronos::{contour, contour_from_csv, reduced_comb, tree_from_contour, tree_from_json};
use phylocomb::comb::{comb_from_csv, distance_matrix, tree_from_comb};
use phylocomb::combinatorics::parse_rational;
use phylocomb::tree::{from_hierarchy, from_newick, hierarchy_from_json, to_newick};
use proptest::prelude::*;

fn newick(s: &str) {
    if let Ok(t) = from_newick(s) {
        assert_eq!(from_newick(&to_newick(&t)).ok(), Some(t));
    }
}

fn hierarchy(s: &str) {
    if let Ok(h) = hierarchy_from_json(s) {
        let _ = from_hierarchy(&h);
    }
}

fn contour_csv(s: &str) {
    if let Ok(p) = contour_from_csv(s) {
        let _ = tree_from_contour(&p);
        let _ = reduced_comb(&p, 1.0);
    }
}

fn comb_csv(s: &str) {
    if let Ok(c) = comb_from_csv(s, None) {
        if c.n_tips() <= 512 {
            let _ = distance_matrix(&c);
            let _ = tree_from_comb(&c, 1.0);
        }
    }
}

fn chrono_json(s: &str) {
    if let Ok(t) = tree_from_json(s) {
        let _ = contour(&t);
    }
}

fn rational(s: &str) {
    let _ = parse_rational(s);
}

type Harness = fn(&str);

const TARGETS: [(&str, Harness); 6] = [
    ("newick", newick),
    ("hierarchy", hierarchy),
    ("contour_csv", contour_csv),
    ("comb_csv", comb_csv),
    ("chrono_json", chrono_json),
    ("rational", rational),
];

fn corpus(target: &str) -> Vec<String> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<String> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| std::fs::read_to_string(e.unwrap().path()).unwrap())
        .collect();
    out.sort();
    out
}

#[test]
fn corpus_seeds_do_not_panic() {
    for (name, run) in TARGETS {
        let seeds = corpus(name);
        assert!(seeds.len() >= 3, "{name} corpus is thin");
        for s in &seeds {
            run(s);
        }
    }
}

#[test]
fn valid_seeds_parse() {
    assert!(from_newick(&corpus("newick")[0]).is_ok());
    assert!(corpus("chrono_json").iter().filter(|s| tree_from_json(s).is_ok()).count() >= 2);
    assert!(corpus("contour_csv").iter().filter(|s| contour_from_csv(s).is_ok()).count() >= 2);
    assert!(corpus("comb_csv").iter().filter(|s| comb_from_csv(s, None).is_ok()).count() >= 2);
}

fn mutated() -> impl Strategy<Value = (usize, String)> {
    (0..TARGETS.len()).prop_flat_map(|k| {
        let seeds = corpus(TARGETS[k].0);
        (Just(k), prop::sample::select(seeds), any::<prop::sample::Index>(), "[ -~\n]{0,8}", 0usize..6)
            .prop_map(|(k, seed, at, insert, cut)| {
                let mut s: Vec<char> = seed.chars().collect();
                let i = at.index(s.len() + 1);
                let j = (i + cut).min(s.len());
                s.splice(i..j, insert.chars());
                (k, s.into_iter().collect())
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn arbitrary_text_does_not_panic(s in "\\PC{0,64}") {
        for (_, run) in TARGETS {
            run(&s);
        }
    }

    #[test]
    fn mutated_seeds_do_not_panic((k, s) in mutated()) {
        (TARGETS[k].1)(&s);
    }
}
