use std::collections::{BTreeSet, HashMap};

use super::forest::{level_functions, node_count, validate_selector, Node, Selector, StrongForest};
use crate::error::{Error, Result};

/// Label of a leaf, given its tree index and bitstring.
pub type LeafLabels<'a> = dyn Fn(usize, Node) -> u64 + Sync + 'a;
/// Color of a pair of leaves; the first argument precedes the second in
/// (tree, bitstring) order.
pub type LeafPairs<'a> = dyn Fn((usize, Node), (usize, Node)) -> u8 + Sync + 'a;

/// A height-`l` subforest with leaves at the leaf level on which `g` is
/// constant per tree. `None` if the forest is too short.
pub fn homogenize_leaf_labels(sf: &StrongForest, g: &LeafLabels, l: u32, budget: u64) -> Result<Option<Selector>> {
    check_height(sf, l)?;
    let mut spent = 0u64;
    for lam in level_functions(sf.height(), l, true) {
        let mut trees = Vec::with_capacity(sf.d());
        for i in 0..sf.d() {
            match label_tree(sf, i, &lam, g, &mut spent, budget)? {
                Some(t) => trees.push(t),
                None => break,
            }
        }
        if trees.len() == sf.d() {
            let s = Selector::new(lam, trees);
            if !validate_selector(sf, &s, true) || !labels_constant(sf, &s, g) {
                return Err(Error::Invariant("label-homogeneous candidate failed its recheck".into()));
            }
            return Ok(Some(s));
        }
    }
    Ok(None)
}

/// A height-`l` subforest with leaves at the leaf level on which `f`
/// depends only on the trees of its two arguments.
pub fn homogenize_leaf_pairs(sf: &StrongForest, f: &LeafPairs, l: u32, budget: u64) -> Result<Option<Selector>> {
    homogenize_both(sf, None, Some(f), l, budget)
}

/// Both constraints at once, by backtracking over node choices.
pub(crate) fn homogenize_both(
    sf: &StrongForest,
    g: Option<&LeafLabels>,
    f: Option<&LeafPairs>,
    l: u32,
    budget: u64,
) -> Result<Option<Selector>> {
    check_height(sf, l)?;
    let mut spent = 0u64;
    for lam in level_functions(sf.height(), l, true) {
        let mut e = Engine {
            sf,
            lam: &lam,
            g,
            f,
            ids: node_count(l),
            nodes: vec![vec![Node::ROOT; node_count(l)]; sf.d()],
            leaves: vec![Vec::new(); sf.d()],
            spent: &mut spent,
            budget,
        };
        if e.place(0)? {
            let s = Selector::new(lam.clone(), e.nodes);
            let ok = validate_selector(sf, &s, true)
                && g.is_none_or(|g| labels_constant(sf, &s, g))
                && f.is_none_or(|f| pairs_determined(sf, &s, f));
            if !ok {
                return Err(Error::Invariant("homogeneous candidate failed its recheck".into()));
            }
            return Ok(Some(s));
        }
    }
    Ok(None)
}

fn check_height(sf: &StrongForest, l: u32) -> Result<()> {
    if l > sf.height() {
        return Err(Error::pre(format!("height {l} exceeds forest height {}", sf.height())));
    }
    Ok(())
}

fn tick(spent: &mut u64, budget: u64) -> Result<()> {
    *spent += 1;
    if *spent > budget {
        return Err(Error::limit("homogenization budget exhausted"));
    }
    Ok(())
}

/// Per-tree search: for each label, memoized reachability of a constant
/// leaf set below each candidate node.
fn label_tree(
    sf: &StrongForest,
    i: usize,
    lam: &[u32],
    g: &LeafLabels,
    spent: &mut u64,
    budget: u64,
) -> Result<Option<Vec<Node>>> {
    let h = sf.height();
    let l = lam.len() - 1;
    let colors: BTreeSet<u64> = Node::all(h).map(|x| g(i, sf.embed(i, x))).collect();
    for c in colors {
        let mut memo: HashMap<Node, bool> = HashMap::new();
        if let Some(root) = first_good(Node::all(lam[0]), 0, sf, i, lam, g, c, &mut memo, spent, budget)? {
            let mut t = vec![Node::ROOT; node_count(l as u32)];
            t[0] = root;
            for id in 1..t.len() {
                let s = Node::from_id(id);
                let parent = t[s.prefix(s.len() - 1).id()];
                let j = s.last().expect("non-root");
                let depth = s.len() as usize;
                let ext = parent.child(j).extensions(lam[depth]);
                t[id] = first_good(ext, depth, sf, i, lam, g, c, &mut memo, spent, budget)?.expect("memoized as reachable");
            }
            return Ok(Some(t));
        }
    }
    Ok(None)
}

#[allow(clippy::too_many_arguments)]
fn first_good(
    cands: impl Iterator<Item = Node>,
    depth: usize,
    sf: &StrongForest,
    i: usize,
    lam: &[u32],
    g: &LeafLabels,
    c: u64,
    memo: &mut HashMap<Node, bool>,
    spent: &mut u64,
    budget: u64,
) -> Result<Option<Node>> {
    for x in cands {
        if good(x, depth, sf, i, lam, g, c, memo, spent, budget)? {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

#[allow(clippy::too_many_arguments)]
fn good(
    x: Node,
    depth: usize,
    sf: &StrongForest,
    i: usize,
    lam: &[u32],
    g: &LeafLabels,
    c: u64,
    memo: &mut HashMap<Node, bool>,
    spent: &mut u64,
    budget: u64,
) -> Result<bool> {
    if let Some(&b) = memo.get(&x) {
        return Ok(b);
    }
    tick(spent, budget)?;
    let b = if depth + 1 == lam.len() {
        g(i, sf.embed(i, x)) == c
    } else {
        let mut ok = true;
        for j in 0..2 {
            let ext = x.child(j).extensions(lam[depth + 1]);
            if first_good(ext, depth + 1, sf, i, lam, g, c, memo, spent, budget)?.is_none() {
                ok = false;
                break;
            }
        }
        ok
    };
    memo.insert(x, b);
    Ok(b)
}

struct Engine<'a, 'b> {
    sf: &'a StrongForest,
    lam: &'a [u32],
    g: Option<&'a LeafLabels<'b>>,
    f: Option<&'a LeafPairs<'b>>,
    ids: usize,
    nodes: Vec<Vec<Node>>,
    /// Realized leaves placed so far, per tree.
    leaves: Vec<Vec<Node>>,
    spent: &'a mut u64,
    budget: u64,
}

impl Engine<'_, '_> {
    fn place(&mut self, slot: usize) -> Result<bool> {
        if slot == self.ids * self.sf.d() {
            return Ok(true);
        }
        let (i, id) = (slot / self.ids, slot % self.ids);
        let s = Node::from_id(id);
        let depth = s.len() as usize;
        let is_leaf = depth + 1 == self.lam.len();
        let cands: Box<dyn Iterator<Item = Node>> = match s.last() {
            None => Box::new(Node::all(self.lam[0])),
            Some(j) => Box::new(self.nodes[i][s.prefix(s.len() - 1).id()].child(j).extensions(self.lam[depth])),
        };
        for x in cands {
            tick(self.spent, self.budget)?;
            if is_leaf {
                let real = self.sf.embed(i, x);
                if !self.fits(i, real) {
                    continue;
                }
                self.leaves[i].push(real);
            }
            self.nodes[i][id] = x;
            if self.place(slot + 1)? {
                return Ok(true);
            }
            if is_leaf {
                self.leaves[i].pop();
            }
        }
        Ok(false)
    }

    fn fits(&self, i: usize, x: Node) -> bool {
        let mine = &self.leaves[i];
        if let (Some(g), Some(&y)) = (self.g, mine.first()) {
            if g(i, x) != g(i, y) {
                return false;
            }
        }
        let Some(f) = self.f else { return true };
        if mine.len() >= 2 {
            let base = f((i, mine[0]), (i, mine[1]));
            if mine.iter().any(|&y| f((i, y), (i, x)) != base) {
                return false;
            }
        }
        let head = mine.first().copied().unwrap_or(x);
        (0..i).all(|j| {
            let theirs = &self.leaves[j];
            let base = f((j, theirs[0]), (i, head));
            theirs.iter().all(|&y| f((j, y), (i, x)) == base)
        })
    }
}

/// Scan: `g` constant on the leaves of each selected tree.
pub fn labels_constant(sf: &StrongForest, s: &Selector, g: &LeafLabels) -> bool {
    (0..s.d()).all(|i| {
        let mut it = s.leaves(i).map(|x| g(i, sf.embed(i, x)));
        let first = it.next();
        it.all(|c| Some(c) == first)
    })
}

/// Scan: `f` on two distinct leaves depends only on their trees.
pub fn pairs_determined(sf: &StrongForest, s: &Selector, f: &LeafPairs) -> bool {
    let leaves: Vec<Vec<Node>> = (0..s.d()).map(|i| s.leaves(i).map(|x| sf.embed(i, x)).collect()).collect();
    let mut seen: HashMap<(usize, usize), u8> = HashMap::new();
    for i in 0..leaves.len() {
        for j in i..leaves.len() {
            for (p, &a) in leaves[i].iter().enumerate() {
                let from = if i == j { p + 1 } else { 0 };
                for &b in &leaves[j][from..] {
                    let c = f((i, a), (j, b));
                    if *seen.entry((i, j)).or_insert(c) != c {
                        return false;
                    }
                }
            }
        }
    }
    true
}
