//! Exhaustive enumeration of small trees.

use std::collections::BTreeSet;

use super::{Tree, TreeError, TreeKind};

/// Largest sizes accepted by [`enumerate`]. Shapes share the labelled
/// bound and ranked shapes the ranked-labelled bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub labelled: usize,
    pub ranked_labelled: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { labelled: 9, ranked_labelled: 8 }
    }
}

/// All trees of the given flavour with `n` leaves, each once, in canonical
/// form.
pub fn enumerate(n: usize, kind: TreeKind, bounds: Bounds) -> Result<Vec<Tree>, TreeError> {
    let bound = if kind.is_ranked() { bounds.ranked_labelled } else { bounds.labelled };
    if n > bound {
        return Err(TreeError::OverBound { n, bound });
    }
    Ok(match kind {
        TreeKind::Shape => shapes(n)?,
        TreeKind::Labelled => labelled_trees(n)?,
        TreeKind::Ranked => ranked_shapes(n)?,
        TreeKind::RankedLabelled => ranked_labelled_trees(n)?,
    })
}

fn check_positive(n: usize) -> Result<(), TreeError> {
    if n == 0 {
        return Err(TreeError::OverBound { n, bound: 0 });
    }
    Ok(())
}

/// Unlabelled shapes with `n` leaves.
pub fn shapes(n: usize) -> Result<Vec<Tree>, TreeError> {
    check_positive(n)?;
    let mut table: Vec<Vec<Tree>> = vec![Vec::new(), vec![Tree::leaf()]];
    for m in 2..=n {
        let mut level = Vec::new();
        for i in 1..=m / 2 {
            for (ai, a) in table[i].iter().enumerate() {
                for (bi, b) in table[m - i].iter().enumerate() {
                    if 2 * i == m && bi < ai {
                        continue;
                    }
                    level.push(Tree::join(a.clone(), b.clone()).canonical());
                }
            }
        }
        level.sort();
        table.push(level);
    }
    Ok(table.swap_remove(n))
}

/// Trees obtained by grafting a new leaf `label` on each edge of `t`,
/// including the root stem: `2k - 1` trees for a `k`-leaf input.
fn graft(t: &Tree, label: u32) -> Vec<Tree> {
    let mut out = vec![Tree::join(t.clone(), Tree::labelled_leaf(label))];
    if let Tree::Split { rank, children } = t {
        for a in graft(&children.0, label) {
            out.push(Tree::Split { rank: *rank, children: Box::new((a, children.1.clone())) });
        }
        for b in graft(&children.1, label) {
            out.push(Tree::Split { rank: *rank, children: Box::new((children.0.clone(), b)) });
        }
    }
    out
}

/// Visits every labelled tree on `{1..n}` once.
pub fn for_each_labelled(n: usize, f: &mut impl FnMut(Tree)) -> Result<(), TreeError> {
    check_positive(n)?;
    fn go(t: Tree, next: u32, n: u32, f: &mut impl FnMut(Tree)) {
        if next > n {
            f(t.canonical());
            return;
        }
        for g in graft(&t, next) {
            go(g, next + 1, n, f);
        }
    }
    go(Tree::labelled_leaf(1), 2, n as u32, f);
    Ok(())
}

pub fn labelled_trees(n: usize) -> Result<Vec<Tree>, TreeError> {
    let mut out = Vec::new();
    for_each_labelled(n, &mut |t| out.push(t))?;
    Ok(out)
}

/// Visits every ranked labelled tree on `{1..n}` once, by running all
/// merge histories: with `m` lineages left, the merged pair gets rank
/// `m - 1`, so the root gets rank 1.
pub fn for_each_ranked_labelled(n: usize, f: &mut impl FnMut(Tree)) -> Result<(), TreeError> {
    check_positive(n)?;
    fn go(lineages: &mut Vec<Tree>, f: &mut impl FnMut(Tree)) {
        let m = lineages.len();
        if m == 1 {
            f(lineages[0].canonical());
            return;
        }
        for i in 0..m {
            for j in i + 1..m {
                let b = lineages.remove(j);
                let a = std::mem::replace(&mut lineages[i], Tree::leaf());
                lineages[i] = Tree::join_ranked(a, b, m as u32 - 1);
                go(lineages, f);
                let Tree::Split { children, .. } = std::mem::replace(&mut lineages[i], Tree::leaf()) else {
                    unreachable!()
                };
                let (a, b) = *children;
                lineages[i] = a;
                lineages.insert(j, b);
            }
        }
    }
    let mut lineages: Vec<Tree> = (1..=n as u32).map(Tree::labelled_leaf).collect();
    go(&mut lineages, f);
    Ok(())
}

pub fn ranked_labelled_trees(n: usize) -> Result<Vec<Tree>, TreeError> {
    let mut out = Vec::new();
    for_each_ranked_labelled(n, &mut |t| out.push(t))?;
    Ok(out)
}

/// Ranked shapes with `n` leaves, built from merge histories of unlabelled
/// lineages with duplicate forests removed at each step.
pub fn ranked_shapes(n: usize) -> Result<Vec<Tree>, TreeError> {
    check_positive(n)?;
    let mut forests: BTreeSet<Vec<Tree>> = BTreeSet::from([vec![Tree::leaf(); n]]);
    for m in (2..=n).rev() {
        let mut next = BTreeSet::new();
        for forest in &forests {
            for i in 0..m {
                for j in i + 1..m {
                    let mut f = forest.clone();
                    let b = f.remove(j);
                    let a = f.remove(i);
                    f.push(Tree::join_ranked(a, b, m as u32 - 1).canonical());
                    f.sort();
                    next.insert(f);
                }
            }
        }
        forests = next;
    }
    Ok(forests.into_iter().map(|mut f| f.pop().unwrap()).collect())
}
