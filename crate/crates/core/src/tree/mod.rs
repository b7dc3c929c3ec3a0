//! Binary rooted trees without edge lengths.
//!
//! One recursive type covers the four flavours: leaves may carry a label
//! and split nodes may carry a rank. A tree is a *shape* when neither is
//! present, *labelled* when every leaf is labelled, *ranked* when every
//! split is ranked, and *ranked-labelled* when both hold. The root stem is
//! implicit, so the root of a `Tree` is the basal split.

mod enumerate;
mod hierarchy;
mod newick;

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use enumerate::{
    enumerate, for_each_labelled, for_each_ranked_labelled, labelled_trees, ranked_labelled_trees,
    ranked_shapes, shapes, Bounds,
};
pub use hierarchy::{from_hierarchy, hierarchy_from_json, Hierarchy};
pub use newick::{from_newick, to_newick};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("mixed labelled and unlabelled leaves")]
    MixedLabels,
    #[error("mixed ranked and unranked split nodes")]
    MixedRanks,
    #[error("leaf labels are not a permutation of 1..={0}")]
    BadLabels(usize),
    #[error("split ranks are not a permutation of 1..={0}")]
    BadRanks(usize),
    #[error("rank {child} lies below rank {parent} but is not larger")]
    RankOrder { parent: u32, child: u32 },
    #[error("label {0} not present")]
    NoSuchLabel(u32),
    #[error("cannot drop the only leaf")]
    SingleLeaf,
    #[error("expected a {expected} tree, found {found}")]
    WrongKind { expected: TreeKind, found: TreeKind },
    #[error("expected {expected} ranks, got {got}")]
    RankCount { expected: usize, got: usize },
    #[error("enumeration of size {n} exceeds the bound {bound}")]
    OverBound { n: usize, bound: usize },
    #[error("newick syntax error at byte {pos}: {msg}")]
    Newick { pos: usize, msg: String },
    #[error("invalid hierarchy: {0}")]
    Hierarchy(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeKind {
    Shape,
    Labelled,
    Ranked,
    RankedLabelled,
}

impl TreeKind {
    pub fn is_labelled(self) -> bool {
        matches!(self, TreeKind::Labelled | TreeKind::RankedLabelled)
    }

    pub fn is_ranked(self) -> bool {
        matches!(self, TreeKind::Ranked | TreeKind::RankedLabelled)
    }
}

impl fmt::Display for TreeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TreeKind::Shape => "shape",
            TreeKind::Labelled => "labelled",
            TreeKind::Ranked => "ranked",
            TreeKind::RankedLabelled => "ranked-labelled",
        };
        f.write_str(s)
    }
}

/// A binary rooted tree. See the module docs for the flavours.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tree {
    Leaf(Option<u32>),
    Split { rank: Option<u32>, children: Box<(Tree, Tree)> },
}

impl Tree {
    pub fn leaf() -> Tree {
        Tree::Leaf(None)
    }

    pub fn labelled_leaf(label: u32) -> Tree {
        Tree::Leaf(Some(label))
    }

    pub fn join(a: Tree, b: Tree) -> Tree {
        Tree::Split { rank: None, children: Box::new((a, b)) }
    }

    pub fn join_ranked(a: Tree, b: Tree, rank: u32) -> Tree {
        Tree::Split { rank: Some(rank), children: Box::new((a, b)) }
    }

    /// Caterpillar shape with `n` leaves (every split has a leaf child).
    pub fn caterpillar(n: usize) -> Tree {
        assert!(n >= 1);
        let mut t = Tree::leaf();
        for _ in 1..n {
            t = Tree::join(t, Tree::leaf());
        }
        t.canonical()
    }

    /// Labelled caterpillar `((…((1,2),3)…),n)`.
    pub fn labelled_caterpillar(n: u32) -> Tree {
        assert!(n >= 1);
        let mut t = Tree::labelled_leaf(1);
        for k in 2..=n {
            t = Tree::join(t, Tree::labelled_leaf(k));
        }
        t
    }

    /// Perfectly balanced shape with `2^depth` leaves.
    pub fn balanced(depth: u32) -> Tree {
        if depth == 0 {
            Tree::leaf()
        } else {
            let c = Tree::balanced(depth - 1);
            Tree::join(c.clone(), c)
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Tree::Leaf(_))
    }

    pub fn children(&self) -> Option<(&Tree, &Tree)> {
        match self {
            Tree::Leaf(_) => None,
            Tree::Split { children, .. } => Some((&children.0, &children.1)),
        }
    }

    pub fn rank(&self) -> Option<u32> {
        match self {
            Tree::Leaf(_) => None,
            Tree::Split { rank, .. } => *rank,
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            Tree::Leaf(_) => 1,
            Tree::Split { children, .. } => children.0.n_leaves() + children.1.n_leaves(),
        }
    }

    pub fn n_splits(&self) -> usize {
        self.n_leaves() - 1
    }

    /// Leaf labels in left-to-right order (`None` for unlabelled leaves).
    pub fn leaf_labels(&self) -> Vec<Option<u32>> {
        let mut out = Vec::new();
        self.walk_leaves(&mut |l| out.push(l));
        out
    }

    fn walk_leaves(&self, f: &mut impl FnMut(Option<u32>)) {
        match self {
            Tree::Leaf(l) => f(*l),
            Tree::Split { children, .. } => {
                children.0.walk_leaves(f);
                children.1.walk_leaves(f);
            }
        }
    }

    /// Split nodes in preorder, each with its leaf count and rank.
    pub fn splits_preorder(&self) -> Vec<(usize, Option<u32>)> {
        let mut out = Vec::new();
        fn go(t: &Tree, out: &mut Vec<(usize, Option<u32>)>) -> usize {
            match t {
                Tree::Leaf(_) => 1,
                Tree::Split { rank, children } => {
                    let slot = out.len();
                    out.push((0, *rank));
                    let n = go(&children.0, out) + go(&children.1, out);
                    out[slot].0 = n;
                    n
                }
            }
        }
        go(self, &mut out);
        out
    }

    /// Leaf counts `λ(v)` of the split nodes, in preorder.
    pub fn leaf_counts(&self) -> Vec<usize> {
        self.splits_preorder().into_iter().map(|(n, _)| n).collect()
    }

    /// Determines the flavour, checking labels and ranks for consistency.
    pub fn kind(&self) -> Result<TreeKind, TreeError> {
        let labels = self.leaf_labels();
        let labelled = labels.iter().filter(|l| l.is_some()).count();
        if labelled != 0 && labelled != labels.len() {
            return Err(TreeError::MixedLabels);
        }
        let n = labels.len();
        if labelled == n && n > 0 && labels[0].is_some() {
            let mut seen = vec![false; n + 1];
            for l in labels.iter().flatten() {
                let i = *l as usize;
                if i == 0 || i > n || seen[i] {
                    return Err(TreeError::BadLabels(n));
                }
                seen[i] = true;
            }
        }
        let splits = self.splits_preorder();
        let ranked = splits.iter().filter(|s| s.1.is_some()).count();
        if ranked != 0 && ranked != splits.len() {
            return Err(TreeError::MixedRanks);
        }
        let has_ranks = ranked > 0;
        if has_ranks {
            let m = splits.len();
            let mut seen = vec![false; m + 1];
            for (_, r) in &splits {
                let i = r.unwrap() as usize;
                if i == 0 || i > m || seen[i] {
                    return Err(TreeError::BadRanks(m));
                }
                seen[i] = true;
            }
            self.check_rank_order(0)?;
        }
        let has_labels = labelled > 0;
        Ok(match (has_labels, has_ranks) {
            (false, false) => TreeKind::Shape,
            (true, false) => TreeKind::Labelled,
            (false, true) => TreeKind::Ranked,
            (true, true) => TreeKind::RankedLabelled,
        })
    }

    fn check_rank_order(&self, above: u32) -> Result<(), TreeError> {
        if let Tree::Split { rank: Some(r), children } = self {
            if *r <= above {
                return Err(TreeError::RankOrder { parent: above, child: *r });
            }
            children.0.check_rank_order(*r)?;
            children.1.check_rank_order(*r)?;
        }
        Ok(())
    }

    /// Requires a specific flavour.
    pub fn expect_kind(&self, expected: TreeKind) -> Result<(), TreeError> {
        let found = self.kind()?;
        if found != expected {
            return Err(TreeError::WrongKind { expected, found });
        }
        Ok(())
    }

    /// Canonical representative under child swaps: children ordered by
    /// leaf count, ties broken by the derived order of their canonical
    /// forms. Labels and ranks take part in the comparison, so this is a
    /// canonical form for every flavour.
    pub fn canonical(&self) -> Tree {
        match self {
            Tree::Leaf(l) => Tree::Leaf(*l),
            Tree::Split { rank, children } => {
                let a = children.0.canonical();
                let b = children.1.canonical();
                let (a, b) = if canonical_cmp(&a, &b) == Ordering::Greater { (b, a) } else { (a, b) };
                Tree::Split { rank: *rank, children: Box::new((a, b)) }
            }
        }
    }

    /// Equality up to child swaps.
    pub fn same_as(&self, other: &Tree) -> bool {
        self.canonical() == other.canonical()
    }

    /// Number of cherries `c(τ)`.
    pub fn cherries(&self) -> usize {
        match self {
            Tree::Leaf(_) => 0,
            Tree::Split { children, .. } => {
                if children.0.is_leaf() && children.1.is_leaf() {
                    1
                } else {
                    children.0.cherries() + children.1.cherries()
                }
            }
        }
    }

    /// Number of symmetric nodes `s(τ)` of a shape. For labelled or ranked
    /// trees, where no two subtrees can coincide, this returns the cherry
    /// count.
    pub fn symmetric_nodes(&self) -> usize {
        match self.kind() {
            Ok(TreeKind::Shape) => self.canonical().count_symmetric(),
            _ => self.cherries(),
        }
    }

    fn count_symmetric(&self) -> usize {
        match self {
            Tree::Leaf(_) => 0,
            Tree::Split { children, .. } => {
                let own = usize::from(children.0 == children.1);
                own + children.0.count_symmetric() + children.1.count_symmetric()
            }
        }
    }

    /// Removes leaf labels.
    pub fn forget_labels(&self) -> Tree {
        self.map(&|_| None, &|r| r).canonical()
    }

    /// Removes split ranks.
    pub fn forget_ranks(&self) -> Tree {
        self.map(&|l| l, &|_| None).canonical()
    }

    fn map(&self, leaf: &impl Fn(Option<u32>) -> Option<u32>, rank: &impl Fn(Option<u32>) -> Option<u32>) -> Tree {
        match self {
            Tree::Leaf(l) => Tree::Leaf(leaf(*l)),
            Tree::Split { rank: r, children } => Tree::Split {
                rank: rank(*r),
                children: Box::new((children.0.map(leaf, rank), children.1.map(leaf, rank))),
            },
        }
    }

    /// Assigns ranks to the split nodes in preorder.
    pub fn with_ranks_preorder(&self, ranks: &[u32]) -> Result<Tree, TreeError> {
        let m = self.n_splits();
        if ranks.len() != m {
            return Err(TreeError::RankCount { expected: m, got: ranks.len() });
        }
        fn go(t: &Tree, ranks: &[u32], next: &mut usize) -> Tree {
            match t {
                Tree::Leaf(l) => Tree::Leaf(*l),
                Tree::Split { children, .. } => {
                    let r = ranks[*next];
                    *next += 1;
                    let a = go(&children.0, ranks, next);
                    let b = go(&children.1, ranks, next);
                    Tree::join_ranked(a, b, r)
                }
            }
        }
        let t = go(self, ranks, &mut 0);
        t.kind()?;
        Ok(t)
    }

    /// Removes the leaf labelled `label`, suppresses the resulting
    /// degree-two node and, for ranked input, compacts the remaining
    /// ranks to `1..n-2` in their original order.
    pub fn drop_leaf(&self, label: u32) -> Result<Tree, TreeError> {
        if self.is_leaf() {
            return Err(if *self == Tree::Leaf(Some(label)) {
                TreeError::SingleLeaf
            } else {
                TreeError::NoSuchLabel(label)
            });
        }
        let mut removed_rank = None;
        let out = drop_rec(self, label, &mut removed_rank).ok_or(TreeError::NoSuchLabel(label))?;
        let out = match out {
            Dropped::Gone => unreachable!("split nodes have two children"),
            Dropped::Kept(t) => t,
        };
        Ok(match removed_rank {
            Some(r) => out.map(&|l| l, &|k| k.map(|k| if k > r { k - 1 } else { k })),
            None => out,
        })
    }

    /// The clusters (leaf-label sets) of a labelled tree, one per node,
    /// each sorted, the whole list sorted.
    pub fn clusters(&self) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        fn go(t: &Tree, out: &mut Vec<Vec<u32>>) -> Vec<u32> {
            match t {
                Tree::Leaf(l) => {
                    let c = vec![l.unwrap_or(0)];
                    out.push(c.clone());
                    c
                }
                Tree::Split { children, .. } => {
                    let mut c = go(&children.0, out);
                    c.extend(go(&children.1, out));
                    c.sort_unstable();
                    out.push(c.clone());
                    c
                }
            }
        }
        go(self, &mut out);
        out.sort();
        out
    }
}

enum Dropped {
    Gone,
    Kept(Tree),
}

fn drop_rec(t: &Tree, label: u32, removed_rank: &mut Option<u32>) -> Option<Dropped> {
    match t {
        Tree::Leaf(Some(l)) if *l == label => Some(Dropped::Gone),
        Tree::Leaf(_) => None,
        Tree::Split { rank, children } => {
            if let Some(d) = drop_rec(&children.0, label, removed_rank) {
                return Some(Dropped::Kept(match d {
                    Dropped::Gone => {
                        *removed_rank = *rank;
                        children.1.clone()
                    }
                    Dropped::Kept(a) => Tree::Split { rank: *rank, children: Box::new((a, children.1.clone())) },
                }));
            }
            drop_rec(&children.1, label, removed_rank).map(|d| {
                Dropped::Kept(match d {
                    Dropped::Gone => {
                        *removed_rank = *rank;
                        children.0.clone()
                    }
                    Dropped::Kept(b) => Tree::Split { rank: *rank, children: Box::new((children.0.clone(), b)) },
                })
            })
        }
    }
}

fn canonical_cmp(a: &Tree, b: &Tree) -> Ordering {
    a.n_leaves().cmp(&b.n_leaves()).then_with(|| a.cmp(b))
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&to_newick(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nw(s: &str) -> Tree {
        from_newick(s).unwrap()
    }

    #[test]
    fn canonical_handles_swaps() {
        assert_eq!(Tree::leaf().canonical(), Tree::leaf());
        let a = nw("((,),);");
        let b = nw("(,(,));");
        assert_eq!(a.canonical(), b.canonical());
        let c = a.canonical();
        assert_eq!(c.canonical(), c);
        let shapes4 = shapes(4).unwrap();
        assert_eq!(shapes4.len(), 2);
        assert_ne!(shapes4[0], shapes4[1]);
    }

    #[test]
    fn cherries_and_symmetry() {
        for n in 2..8 {
            let cat = Tree::caterpillar(n);
            assert_eq!(cat.cherries(), 1);
            assert_eq!(cat.symmetric_nodes(), 1);
        }
        let bal = Tree::balanced(2);
        assert_eq!(bal.cherries(), 2);
        assert_eq!(bal.symmetric_nodes(), 3);
        let lab = nw("((1,2),(3,4));");
        assert_eq!(lab.symmetric_nodes(), 2);
    }

    #[test]
    fn leaf_count_lists() {
        assert_eq!(nw("(,);").leaf_counts(), vec![2]);
        let mut cat = Tree::caterpillar(4).leaf_counts();
        cat.sort_unstable();
        assert_eq!(cat, vec![2, 3, 4]);
        assert_eq!(Tree::balanced(2).leaf_counts(), vec![4, 2, 2]);
    }

    #[test]
    fn kinds_are_detected() {
        assert_eq!(nw("((,),);").kind().unwrap(), TreeKind::Shape);
        assert_eq!(nw("((1,2),3);").kind().unwrap(), TreeKind::Labelled);
        assert_eq!(nw("((,)#2,)#1;").kind().unwrap(), TreeKind::Ranked);
        assert_eq!(nw("((1,2)#2,3)#1;").kind().unwrap(), TreeKind::RankedLabelled);
        assert_eq!(nw("((1,2),);").kind(), Err(TreeError::MixedLabels));
        assert_eq!(nw("((1,1),3);").kind(), Err(TreeError::BadLabels(3)));
        assert!(matches!(nw("((1,2)#1,3)#2;").kind(), Err(TreeError::RankOrder { .. })));
    }

    #[test]
    fn forgetful_maps_commute() {
        let t = nw("(((1,5)#4,3)#2,(2,4)#3)#1;");
        assert_eq!(t.forget_labels().forget_ranks(), t.forget_ranks().forget_labels());
        assert_eq!(nw("(1,2);").forget_labels(), nw("(,);"));
    }

    #[test]
    fn drop_leaf_cases() {
        assert_eq!(nw("(1,2);").drop_leaf(2).unwrap(), Tree::labelled_leaf(1));
        assert_eq!(nw("((1,2),3);").drop_leaf(3).unwrap(), nw("(1,2);"));
        assert_eq!(nw("((1,2),3);").drop_leaf(7), Err(TreeError::NoSuchLabel(7)));
        assert_eq!(Tree::labelled_leaf(1).drop_leaf(1), Err(TreeError::SingleLeaf));
        let t = nw("((1,3),(2,4));");
        let ab = t.drop_leaf(4).unwrap().drop_leaf(3).unwrap();
        let ba = t.drop_leaf(3).unwrap().drop_leaf(4).unwrap();
        assert!(ab.same_as(&ba));
        // ranks are compacted
        let r = nw("((1,2)#3,(3,4)#2)#1;").drop_leaf(4).unwrap();
        assert_eq!(r, nw("((1,2)#2,3)#1;"));
        assert_eq!(r.kind().unwrap(), TreeKind::RankedLabelled);
    }

    #[test]
    fn preorder_ranks() {
        let t = nw("((1,2),(3,4));").with_ranks_preorder(&[1, 2, 3]).unwrap();
        assert_eq!(t, nw("((1,2)#2,(3,4)#3)#1;"));
        assert!(nw("((1,2),(3,4));").with_ranks_preorder(&[2, 1, 3]).is_err());
        assert!(matches!(
            nw("((1,2),3);").with_ranks_preorder(&[1]),
            Err(TreeError::RankCount { expected: 2, got: 1 })
        ));
    }
}
