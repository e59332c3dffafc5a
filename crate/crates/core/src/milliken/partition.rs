use std::collections::{BTreeMap, HashMap};
use std::sync::{Mutex, OnceLock};

use super::forest::{Node, StrongForest, Subforests};
use super::lemmas::{homogenize_both, LeafLabels, LeafPairs};
use super::search::{exists_bad_coloring, milliken_number_search, Limits};
use crate::error::{Error, Result};
use crate::par::prelude::*;

/// The tree B^{≤depth}; nodes are digit strings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegularTree {
    pub branching: u64,
    pub depth: u32,
}

impl RegularTree {
    pub fn contains(&self, v: &[u64]) -> bool {
        v.len() <= self.depth as usize && v.iter().all(|&d| d < self.branching)
    }

    pub fn leaf_count(&self) -> u128 {
        (self.branching as u128).saturating_pow(self.depth)
    }

    /// Leaves in lexicographic order.
    pub fn leaves(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        let n = self.leaf_count();
        (0..n).map(move |mut t| {
            let mut v = vec![0; self.depth as usize];
            for slot in v.iter_mut().rev() {
                *slot = (t % self.branching as u128) as u64;
                t /= self.branching as u128;
            }
            v
        })
    }
}

/// Color of a pair of leaves of a regular tree, smaller leaf first.
pub type TreePairs<'a> = dyn Fn(&[u64], &[u64]) -> u8 + Sync + 'a;

/// A finite subtree given by its nodes and their children.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubTree {
    pub node: Vec<u64>,
    pub children: Vec<SubTree>,
}

impl SubTree {
    pub fn leaves(&self) -> Vec<&[u64]> {
        if self.children.is_empty() {
            return vec![&self.node];
        }
        self.children.iter().flat_map(|c| c.leaves()).collect()
    }

    /// (address, node) pairs, preorder.
    pub fn addressed(&self) -> Vec<(Vec<usize>, &[u64])> {
        fn go<'a>(t: &'a SubTree, at: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, &'a [u64])>) {
            out.push((at.clone(), &t.node));
            for (i, c) in t.children.iter().enumerate() {
                at.push(i);
                go(c, at, out);
                at.pop();
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }
}

fn is_prefix<T: PartialEq>(a: &[T], b: &[T]) -> bool {
    a.len() <= b.len() && b[..a.len()] == *a
}

/// Checks (S, ⪯) ≅ (x^{≤n}, ⪯), Leaves(S) ⊆ Leaves(T) and homogeneity.
/// Returns the color of the leaf pairs, `None` for a single leaf.
pub fn verify_partition(t: &RegularTree, s: &SubTree, f: &TreePairs, x: u64, n: u32) -> Result<Option<u8>> {
    let nodes = s.addressed();
    for (addr, v) in &nodes {
        if !t.contains(v) {
            return Err(Error::Invariant(format!("{v:?} is not a node of the tree")));
        }
        let kids = nodes.iter().filter(|(a, _)| a.len() == addr.len() + 1 && is_prefix(addr, a)).count() as u64;
        let want = if addr.len() < n as usize { x } else { 0 };
        if kids != want || addr.iter().any(|&i| i as u64 >= x) {
            return Err(Error::Invariant(format!("node at {addr:?} has {kids} children, expected {want}")));
        }
        if addr.len() == n as usize && v.len() != t.depth as usize {
            return Err(Error::Invariant(format!("leaf {v:?} is not a leaf of the tree")));
        }
    }
    for (a, u) in &nodes {
        for (b, w) in &nodes {
            if is_prefix(u, w) != is_prefix(a, b) {
                return Err(Error::Invariant(format!("order mismatch between {u:?} and {w:?}")));
            }
        }
    }
    let leaves = s.leaves();
    let mut color = None;
    for (i, a) in leaves.iter().enumerate() {
        for b in &leaves[i + 1..] {
            let (p, q) = if a < b { (a, b) } else { (b, a) };
            let c = f(p, q);
            if *color.get_or_insert(c) != c {
                return Err(Error::Invariant("leaf set is not homogeneous".into()));
            }
        }
    }
    Ok(color)
}

/// Supplies the binary level sizes M₀, …, M_{2n−2}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundProvider {
    /// The recursive formulas; numeric values only when every Milliken
    /// number involved is found by search below `threshold`.
    PaperSymbolic { threshold: u32 },
    /// Least sizes for which the one-step statements hold, by search up to
    /// `cap`.
    Searched { cap: u32 },
    /// Caller-supplied sizes.
    Optimistic(Vec<u32>),
}

fn bl(d: &str, l: &str, r: &str) -> String {
    format!("B_labels({d}, {l}, {r})")
}

fn bp(d: &str, l: &str) -> String {
    format!("B_pairs({d}, {l})")
}

impl BoundProvider {
    /// M_i as formulas, with B_labels(d,ℓ,r) = Mil(d,ℓ,0,r^d) and
    /// B_pairs(d,ℓ) = Mil(d, Mil(d,ℓ,0,2^(d(d−1)/2)), 1, 2^d) in height terms.
    pub fn symbolic(n: u32, x: u64) -> Vec<String> {
        let top = 2 * n as usize - 1;
        (0..top)
            .map(|i| {
                let d = if i == 0 { "1".to_string() } else { format!("2^({})", (0..i).map(|j| format!("M{j}")).collect::<Vec<_>>().join("+")) };
                let pairs = bp(&d, &x.to_string());
                if i + 1 < top {
                    bl(&d, &pairs, &format!("2^{}", top - i))
                } else {
                    pairs
                }
            })
            .collect()
    }

    pub fn sizes(&self, n: u32, x: u64, limits: &Limits) -> Result<Vec<u32>> {
        let top = 2 * n as usize - 1;
        match self {
            BoundProvider::Optimistic(v) => {
                if v.len() != top {
                    return Err(Error::pre(format!("expected {top} level sizes, got {}", v.len())));
                }
                Ok(v.clone())
            }
            BoundProvider::PaperSymbolic { threshold } => {
                let mil = |d: u64, l: u64, k: u32, r: u128| -> Result<u32> {
                    let (d, l) = (usize::try_from(d).ok(), u32::try_from(l).ok());
                    let (Some(d), Some(l), Ok(r)) = (d, l, u64::try_from(r)) else {
                        return Err(Error::limit("parameters beyond materialization"));
                    };
                    milliken_number_search(d, l, k, r, *threshold, limits)?
                        .ok_or_else(|| Error::limit(format!("Mil({d},{l},{k},{r}) exceeds threshold {threshold}")))
                };
                let b_labels = |d: u64, l: u64, r: u128| mil(d, l, 0, pow_sat(r, d));
                let b_pairs = |d: u64, l: u64| -> Result<u32> {
                    let inner = mil(d, l, 0, pow_sat(2, d * d.saturating_sub(1) / 2))?;
                    mil(d, inner as u64, 1, pow_sat(2, d))
                };
                recurse_sizes(top, x, b_labels, b_pairs)
            }
            BoundProvider::Searched { cap } => {
                let b_labels = |d: u64, l: u64, r: u128| searched(Kind::Labels, d, l, r, *cap, limits);
                let b_pairs = |d: u64, l: u64| searched(Kind::Pairs, d, l, 2, *cap, limits);
                recurse_sizes(top, x, b_labels, b_pairs)
            }
        }
    }
}

fn pow_sat(b: u128, e: u64) -> u128 {
    u32::try_from(e).map_or(u128::MAX, |e| b.saturating_pow(e))
}

fn recurse_sizes(
    top: usize,
    x: u64,
    b_labels: impl Fn(u64, u64, u128) -> Result<u32>,
    b_pairs: impl Fn(u64, u64) -> Result<u32>,
) -> Result<Vec<u32>> {
    let mut m = Vec::with_capacity(top);
    for i in 0..top {
        let sum: u32 = m.iter().sum();
        if sum >= 63 {
            return Err(Error::limit("level sizes overflow"));
        }
        let d = 1u64 << sum;
        let pairs = b_pairs(d, x)?;
        m.push(if i + 1 < top { b_labels(d, pairs as u64, 1u128 << (top - i))? } else { pairs });
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Kind {
    Labels,
    Pairs,
}

type Memo = Mutex<HashMap<(Kind, u64, u64, u128), Option<u32>>>;

fn memo() -> &'static Memo {
    static M: OnceLock<Memo> = OnceLock::new();
    M.get_or_init(Default::default)
}

/// Least height N ≤ cap for which the one-step statement holds for every
/// coloring, by a search for a counterexample coloring at each height.
fn searched(kind: Kind, d: u64, l: u64, r: u128, cap: u32, limits: &Limits) -> Result<u32> {
    let key = (kind, d, l, r);
    if let Some(v) = memo().lock().expect("memo lock").get(&key).copied() {
        return v.ok_or_else(|| Error::limit(format!("searched bound above cap {cap}")));
    }
    let (Ok(du), Ok(lu), Ok(ru)) = (usize::try_from(d), u32::try_from(l), u64::try_from(r)) else {
        return Err(Error::limit("parameters beyond search range"));
    };
    let mut found = None;
    for n in lu..=cap {
        if one_step_holds(kind, du, lu, ru, n, limits)? {
            found = Some(n);
            break;
        }
    }
    memo().lock().expect("memo lock").insert(key, found);
    found.ok_or_else(|| Error::limit(format!("searched bound above cap {cap}")))
}

fn one_step_holds(kind: Kind, d: usize, l: u32, r: u64, n: u32, limits: &Limits) -> Result<bool> {
    let outer = Subforests::new(d, n, l, true);
    if outer.count_total() > limits.enum_cap || n > 12 || (d << n) > 4096 {
        return Err(Error::limit(format!("height {n} with {d} trees is beyond the searched range")));
    }
    let width = 1usize << n;
    let leaf_var = |i: usize, x: Node| i * width + x.bits() as usize;
    let pair_index: HashMap<(usize, usize), usize> = {
        let total = d * width;
        let mut m = HashMap::new();
        for a in 0..total {
            for b in a + 1..total {
                let k = m.len();
                m.insert((a, b), k);
            }
        }
        m
    };
    let outer: Vec<_> = outer.collect();
    let constraints: Vec<Vec<Vec<usize>>> = outer
        .par_iter()
        .map(|s| {
            let leaves: Vec<Vec<usize>> = (0..d).map(|i| s.leaves(i).map(|x| leaf_var(i, x)).collect()).collect();
            match kind {
                Kind::Labels => leaves,
                Kind::Pairs => {
                    let mut groups = Vec::new();
                    for i in 0..d {
                        for j in i..d {
                            let mut g = Vec::new();
                            for (p, &a) in leaves[i].iter().enumerate() {
                                let from = if i == j { p + 1 } else { 0 };
                                for &b in &leaves[j][from..] {
                                    g.push(pair_index[&(a.min(b), a.max(b))]);
                                }
                            }
                            if !g.is_empty() {
                                groups.push(g);
                            }
                        }
                    }
                    groups
                }
            }
        })
        .collect();
    let vars = match kind {
        Kind::Labels => d * width,
        Kind::Pairs => pair_index.len(),
    };
    Ok(!exists_bad_coloring(vars, r, &constraints, limits.node_budget)?)
}

/// How tree_partition searches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartitionMode {
    /// Backtracking over subtrees of T.
    Direct,
    /// Binarize with the provider's sizes and run the one-step lemmas
    /// bottom-up.
    Provider(BoundProvider),
}

/// Result of a tree partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub tree: SubTree,
    pub color: u8,
    /// Root tuple (c₀, …, c_{2n−2}) in provider mode.
    pub root_colors: Option<Vec<u8>>,
    /// Levels of T kept in provider mode.
    pub kept_levels: Option<Vec<u32>>,
}

/// S ⊆ T with (S, ⪯) ≅ (x^{≤n}, ⪯), Leaves(S) ⊆ Leaves(T) and Leaves(S)
/// f-homogeneous, for T ≅ B^{≤2n−1}. The output is verified.
pub fn tree_partition(
    t: &RegularTree,
    f: &TreePairs,
    x: u64,
    n: u32,
    mode: &PartitionMode,
    limits: &Limits,
) -> Result<Partition> {
    if n == 0 || x == 0 || t.branching == 0 {
        return Err(Error::pre("need n >= 1, x >= 1 and a nonempty tree"));
    }
    if t.depth != 2 * n - 1 {
        return Err(Error::pre(format!("tree depth {} is not 2n-1 = {}", t.depth, 2 * n - 1)));
    }
    let p = match mode {
        PartitionMode::Direct => direct(t, f, x, n, limits)?,
        PartitionMode::Provider(prov) => {
            let sizes = prov.sizes(n, x, limits)?;
            pipeline(t, f, x, n, &sizes, limits)?
        }
    };
    let c = verify_partition(t, &p.tree, f, x, n)?;
    if let Some(c) = c.filter(|&c| c != p.color) {
        return Err(Error::Invariant(format!("claimed color {} but leaves have color {c}", p.color)));
    }
    Ok(p)
}

struct Direct<'a, 'b> {
    t: &'a RegularTree,
    f: &'a TreePairs<'b>,
    x: u64,
    n: u32,
    assign: BTreeMap<Vec<usize>, Vec<u64>>,
    leaves: Vec<Vec<u64>>,
    spent: u64,
    budget: u64,
}

fn direct(t: &RegularTree, f: &TreePairs, x: u64, n: u32, limits: &Limits) -> Result<Partition> {
    let mut d = Direct { t, f, x, n, assign: BTreeMap::new(), leaves: Vec::new(), spent: 0, budget: limits.node_budget };
    d.assign.insert(Vec::new(), Vec::new());
    if !d.go(&mut vec![Vec::new()])? {
        return Err(Error::NotFound { exhaustive: true });
    }
    let tree = build(&d.assign, &mut Vec::new(), x, n);
    let color = leaf_color(&tree, f);
    Ok(Partition { tree, color, root_colors: None, kept_levels: None })
}

fn build(assign: &BTreeMap<Vec<usize>, Vec<u64>>, at: &mut Vec<usize>, x: u64, n: u32) -> SubTree {
    let node = assign[at].clone();
    let mut children = Vec::new();
    if at.len() < n as usize {
        for i in 0..x as usize {
            at.push(i);
            children.push(build(assign, at, x, n));
            at.pop();
        }
    }
    SubTree { node, children }
}

fn leaf_color(s: &SubTree, f: &TreePairs) -> u8 {
    let l = s.leaves();
    if l.len() < 2 {
        0
    } else {
        f(l[0], l[1])
    }
}

impl Direct<'_, '_> {
    fn fits(&self, leaf: &[u64]) -> bool {
        let Some(first) = self.leaves.first() else { return true };
        let base = if self.leaves.len() >= 2 { (self.f)(first, &self.leaves[1]) } else { (self.f)(first, leaf) };
        self.leaves.iter().all(|y| (self.f)(y, leaf) == base)
    }

    /// Nodes strictly below `v` whose level lies in `lo..=hi`, lex order.
    fn below(&self, v: &[u64], lo: u32, hi: u32) -> Vec<Vec<u64>> {
        let mut out = Vec::new();
        let mut stack = vec![v.to_vec()];
        while let Some(u) = stack.pop() {
            if u.len() as u32 >= lo && u.len() > v.len() {
                out.push(u.clone());
            }
            if (u.len() as u32) < hi {
                for b in (0..self.t.branching).rev() {
                    let mut w = u.clone();
                    w.push(b);
                    stack.push(w);
                }
            }
        }
        out.sort();
        out
    }

    fn go(&mut self, queue: &mut Vec<Vec<usize>>) -> Result<bool> {
        let Some(addr) = queue.pop() else { return Ok(true) };
        self.spent += 1;
        if self.spent > self.budget {
            return Err(Error::limit("tree partition budget exhausted"));
        }
        let v = self.assign[&addr].clone();
        let m = self.n - addr.len() as u32;
        let ok = if m == 0 {
            if self.fits(&v) {
                self.leaves.push(v);
                let ok = self.go(queue)?;
                if !ok {
                    self.leaves.pop();
                }
                ok
            } else {
                false
            }
        } else {
            let hi = self.t.depth - (m - 1);
            let lo = if m == 1 { self.t.depth } else { v.len() as u32 + 1 };
            let cands = self.below(&v, lo, hi);
            self.choose(&addr, &cands, 0, &mut Vec::new(), queue)?
        };
        if !ok {
            queue.push(addr);
        }
        Ok(ok)
    }

    /// Picks `x` pairwise incomparable children from `cands[from..]`.
    fn choose(
        &mut self,
        addr: &[usize],
        cands: &[Vec<u64>],
        from: usize,
        picked: &mut Vec<usize>,
        queue: &mut Vec<Vec<usize>>,
    ) -> Result<bool> {
        if picked.len() as u64 == self.x {
            let before = queue.len();
            for (i, &c) in picked.iter().enumerate() {
                let mut a = addr.to_vec();
                a.push(i);
                self.assign.insert(a, cands[c].clone());
            }
            for i in (0..picked.len()).rev() {
                let mut a = addr.to_vec();
                a.push(i);
                queue.push(a);
            }
            if self.go(queue)? {
                return Ok(true);
            }
            queue.truncate(before);
            return Ok(false);
        }
        for c in from..cands.len() {
            let u = &cands[c];
            if picked.iter().any(|&p| is_prefix(&cands[p], u) || is_prefix(u, &cands[p])) {
                continue;
            }
            // picked leaves will join `leaves` in this order, so prune early
            if u.len() == self.t.depth as usize {
                let all: Vec<&[u64]> =
                    self.leaves.iter().map(Vec::as_slice).chain(picked.iter().map(|&p| cands[p].as_slice())).collect();
                if let Some(first) = all.first() {
                    let base = if all.len() >= 2 { (self.f)(first, all[1]) } else { (self.f)(first, u) };
                    if !all.iter().all(|y| (self.f)(y, u) == base) {
                        continue;
                    }
                }
            }
            picked.push(c);
            if self.choose(addr, cands, c + 1, picked, queue)? {
                return Ok(true);
            }
            picked.pop();
        }
        Ok(false)
    }
}

/// Binary re-indexing of the first `k` levels of T: level i of T is
/// `sizes[i]` consecutive binary levels.
struct Binarize<'a> {
    sizes: &'a [u32],
    offs: Vec<u32>,
}

impl<'a> Binarize<'a> {
    fn new(sizes: &'a [u32]) -> Self {
        let mut offs = vec![0];
        for &m in sizes {
            offs.push(offs.last().unwrap() + m);
        }
        Binarize { sizes, offs }
    }

    fn to_binary(&self, v: &[u64]) -> Result<Node> {
        let mut out = Node::ROOT;
        for (i, &d) in v.iter().enumerate() {
            out = out.append(Node::new(self.sizes[i], d)?);
        }
        Ok(out)
    }

    /// Inverse on nodes lying at a block boundary.
    fn to_tree(&self, b: Node) -> Option<Vec<u64>> {
        let k = self.offs.iter().position(|&o| o == b.len())?;
        Some((0..k).map(|i| b.prefix(self.offs[i + 1]).bits() & ((1u64 << self.sizes[i]) - 1)).collect())
    }
}

fn pipeline(t: &RegularTree, f: &TreePairs, x: u64, n: u32, sizes: &[u32], limits: &Limits) -> Result<Partition> {
    let top = (2 * n - 1) as usize;
    if sizes.len() != top {
        return Err(Error::pre(format!("expected {top} level sizes, got {}", sizes.len())));
    }
    for (i, &m) in sizes.iter().enumerate() {
        if m >= 63 || (1u64 << m) > t.branching {
            return Err(Error::InsufficientTree(format!("level {i} needs branching 2^{m}, tree has {}", t.branching)));
        }
        if (m as u64) < x {
            return Err(Error::InsufficientTree(format!("level {i} has {m} binary levels, fewer than x = {x}")));
        }
    }
    let bin = Binarize::new(sizes);
    if bin.offs[top - 1] > 16 || bin.offs[top] > 62 {
        return Err(Error::limit("binarized tree too large to materialize"));
    }
    let xl = x as u32;
    // S^k leaves beneath each node of P_k
    let mut below: Vec<HashMap<Node, Vec<Node>>> = vec![HashMap::new(); top];
    let mut labels: HashMap<Node, u64> = HashMap::new();
    for k in (0..top).rev() {
        let roots: Vec<Node> = Node::all(bin.offs[k]).collect();
        let forest = StrongForest::beneath(&roots, sizes[k])?;
        let down = |mut v: Node, from: usize, below: &[HashMap<Node, Vec<Node>>]| {
            for lvl in below.iter().skip(from) {
                v = lvl[&v][0];
            }
            v
        };
        let fk = |a: Node, b: Node| -> u8 {
            let (a, b) = (down(a, k + 1, &below), down(b, k + 1, &below));
            f(&bin.to_tree(a).expect("leaf"), &bin.to_tree(b).expect("leaf"))
        };
        let pairs = |(_, a): (usize, Node), (_, b): (usize, Node)| fk(a, b);
        let g = |_: usize, v: Node| labels[&v];
        let lab: Option<&LeafLabels> = if k + 1 < top { Some(&g) } else { None };
        let pairs: &LeafPairs = &pairs;
        let s = homogenize_both(&forest, lab, Some(pairs), xl, limits.node_budget)?
            .ok_or_else(|| Error::InsufficientTree(format!("level {k}: no homogeneous subforest of height {x}")))?;
        let real = s.realize(&forest);
        let mut next_labels = HashMap::new();
        let mut map = HashMap::new();
        for (i, &r) in roots.iter().enumerate() {
            let lv: Vec<Node> = real.leaves(i).collect();
            let inherited = if k + 1 < top { labels[&lv[0]] << 1 } else { 0 };
            next_labels.insert(r, fk(lv[0], lv[1]) as u64 | inherited);
            map.insert(r, lv);
        }
        below[k] = map;
        labels = next_labels;
    }
    let tuple = labels[&Node::ROOT];
    let cs: Vec<u8> = (0..top).map(|i| (tuple >> i & 1) as u8).collect();
    let color = (0..2u8).find(|&c| cs.iter().filter(|&&v| v == c).count() >= n as usize).expect("2n-1 values, 2 colors");
    let kept: Vec<u32> = (0..top as u32).filter(|&i| cs[i as usize] == color).take(n as usize).collect();
    // S' children of a P_k node: the first x leaves of its S^k tree
    let kids = |v: Node| -> Vec<Node> {
        let k = bin.offs.iter().position(|&o| o == v.len()).expect("boundary node");
        below[k][&v][..x as usize].to_vec()
    };
    let leftmost = |mut v: Node, level: u32| {
        while v.len() != bin.offs[level as usize] {
            v = kids(v)[0];
        }
        v
    };
    fn grow(v: Node, j: usize, kept: &[u32], top: u32, kids: &dyn Fn(Node) -> Vec<Node>, lm: &dyn Fn(Node, u32) -> Node, bin: &Binarize) -> SubTree {
        let node = bin.to_tree(v).expect("boundary node");
        if j == kept.len() {
            return SubTree { node, children: Vec::new() };
        }
        let next = kept.get(j + 1).copied().unwrap_or(top);
        let children = kids(v).into_iter().map(|u| grow(lm(u, next), j + 1, kept, top, kids, lm, bin)).collect();
        SubTree { node, children }
    }
    let root = leftmost(Node::ROOT, kept[0]);
    let tree = grow(root, 0, &kept, top as u32, &kids, &leftmost, &bin);
    for (_, v) in tree.addressed() {
        let b = bin.to_binary(v)?;
        if bin.to_tree(b).as_deref() != Some(v) {
            return Err(Error::Invariant(format!("re-indexing does not round trip at {v:?}")));
        }
    }
    Ok(Partition { tree, color, root_colors: Some(cs), kept_levels: Some(kept) })
}
