//! Labelled trees from laminar families of label sets.

use std::collections::BTreeSet;

use super::{Tree, TreeError};

/// A collection of subsets of a finite label set. The full set is implied
/// when it is not listed.
pub type Hierarchy = Vec<Vec<u32>>;

/// Parses a hierarchy given as a JSON list of integer arrays.
pub fn hierarchy_from_json(src: &str) -> Result<Hierarchy, TreeError> {
    serde_json::from_str(src).map_err(|e| TreeError::Hierarchy(e.to_string()))
}

fn bad<T>(msg: impl Into<String>) -> Result<T, TreeError> {
    Err(TreeError::Hierarchy(msg.into()))
}

/// Builds the labelled tree whose clusters are exactly the given sets.
///
/// The family must contain every singleton, be laminar (two sets are
/// disjoint or nested) and split every non-singleton cluster into exactly
/// two maximal sub-clusters.
pub fn from_hierarchy(h: &[Vec<u32>]) -> Result<Tree, TreeError> {
    let mut sets: BTreeSet<BTreeSet<u32>> = BTreeSet::new();
    for s in h {
        let set: BTreeSet<u32> = s.iter().copied().collect();
        if set.is_empty() {
            return bad("empty set");
        }
        if set.len() != s.len() {
            return bad(format!("repeated label in {s:?}"));
        }
        if set.contains(&0) {
            return bad("labels must be positive");
        }
        sets.insert(set);
    }
    let full: BTreeSet<u32> = sets.iter().flatten().copied().collect();
    if full.is_empty() {
        return bad("no labels");
    }
    for &x in &full {
        if !sets.contains(&BTreeSet::from([x])) {
            return bad(format!("singleton {{{x}}} missing"));
        }
    }
    sets.insert(full.clone());
    let all: Vec<&BTreeSet<u32>> = sets.iter().collect();
    for (i, a) in all.iter().enumerate() {
        for b in &all[i + 1..] {
            if !(a.is_disjoint(b) || a.is_subset(b) || b.is_subset(a)) {
                return bad(format!("{a:?} and {b:?} overlap without nesting"));
            }
        }
    }
    // Sort by size so each set's maximal proper subsets are found among
    // the smaller ones.
    let mut by_size = all.clone();
    by_size.sort_by_key(|s| s.len());
    build(&full, &by_size)
}

fn build(set: &BTreeSet<u32>, by_size: &[&BTreeSet<u32>]) -> Result<Tree, TreeError> {
    if set.len() == 1 {
        return Ok(Tree::labelled_leaf(*set.iter().next().unwrap()));
    }
    let mut maximal: Vec<&BTreeSet<u32>> = Vec::new();
    for s in by_size.iter().rev() {
        if s.len() < set.len() && s.is_subset(set) && !maximal.iter().any(|m| s.is_subset(m)) {
            maximal.push(s);
        }
    }
    if maximal.len() != 2 {
        return bad(format!("cluster {set:?} has {} maximal sub-clusters, expected 2", maximal.len()));
    }
    let a = build(maximal[0], by_size)?;
    let b = build(maximal[1], by_size)?;
    Ok(Tree::join(a, b).canonical())
}

#[cfg(test)]
mod tests {
    use super::super::from_newick;
    use super::*;

    #[test]
    fn exercise_hierarchy() {
        let h = vec![vec![1], vec![1, 4], vec![1, 4, 5], vec![2], vec![2, 3], vec![3], vec![4], vec![5]];
        let t = from_hierarchy(&h).unwrap();
        assert!(t.same_as(&from_newick("(((1,4),5),(2,3));").unwrap()));
        let mut closure: Vec<Vec<u32>> = h.clone();
        closure.push(vec![1, 2, 3, 4, 5]);
        closure.sort();
        assert_eq!(t.clusters(), closure);
    }

    #[test]
    fn singletons_give_cherry() {
        let t = from_hierarchy(&[vec![1], vec![2]]).unwrap();
        assert!(t.same_as(&from_newick("(1,2);").unwrap()));
    }

    #[test]
    fn rejects_bad_families() {
        // overlapping
        assert!(from_hierarchy(&[vec![1], vec![2], vec![3], vec![1, 2], vec![2, 3]]).is_err());
        // non-binary root
        assert!(from_hierarchy(&[vec![1], vec![2], vec![3]]).is_err());
        // missing singleton
        assert!(from_hierarchy(&[vec![1], vec![1, 2]]).is_err());
        assert!(hierarchy_from_json("[[1],[2").is_err());
        assert_eq!(hierarchy_from_json("[[1],[2]]").unwrap(), vec![vec![1], vec![2]]);
    }
}
