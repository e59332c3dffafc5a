use std::fmt;

use crate::error::{Error, Result};

/// Longest bitstring a [`Node`] can hold.
pub const MAX_LEN: u32 = 63;

/// A binary string; ordered by length, then lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Node {
    len: u32,
    bits: u64,
}

impl Node {
    pub const ROOT: Node = Node { len: 0, bits: 0 };

    pub fn new(len: u32, bits: u64) -> Result<Node> {
        if len > MAX_LEN || bits >> len != 0 {
            return Err(Error::pre(format!("no bitstring of length {len} with value {bits}")));
        }
        Ok(Node { len, bits })
    }

    pub fn parse(s: &str) -> Result<Node> {
        let s = s.trim();
        if s == "ε" || s.is_empty() {
            return Ok(Node::ROOT);
        }
        let mut n = Node::ROOT;
        for ch in s.chars() {
            match ch {
                '0' => n = n.checked_child(0)?,
                '1' => n = n.checked_child(1)?,
                _ => return Err(Error::pre(format!("bad bitstring `{s}`"))),
            }
        }
        Ok(n)
    }

    pub fn len(self) -> u32 {
        self.len
    }

    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    fn checked_child(self, j: u8) -> Result<Node> {
        if self.len >= MAX_LEN {
            return Err(Error::limit(format!("bitstrings are capped at length {MAX_LEN}")));
        }
        Ok(self.child(j))
    }

    pub fn child(self, j: u8) -> Node {
        debug_assert!(self.len < MAX_LEN && j < 2);
        Node { len: self.len + 1, bits: (self.bits << 1) | j as u64 }
    }

    pub fn append(self, suffix: Node) -> Node {
        debug_assert!(self.len + suffix.len <= MAX_LEN);
        Node { len: self.len + suffix.len, bits: (self.bits << suffix.len) | suffix.bits }
    }

    /// Symbol at position `i` (0 is the first).
    pub fn bit(self, i: u32) -> u8 {
        ((self.bits >> (self.len - 1 - i)) & 1) as u8
    }

    pub fn last(self) -> Option<u8> {
        (self.len > 0).then(|| (self.bits & 1) as u8)
    }

    pub fn prefix(self, len: u32) -> Node {
        debug_assert!(len <= self.len);
        Node { len, bits: self.bits >> (self.len - len) }
    }

    pub fn is_prefix_of(self, other: Node) -> bool {
        self.len <= other.len && other.prefix(self.len) == self
    }

    /// Length of the longest common prefix.
    pub fn meet_len(self, other: Node) -> u32 {
        let l = self.len.min(other.len);
        let x = self.prefix(l).bits ^ other.prefix(l).bits;
        if x == 0 {
            l
        } else {
            l - (64 - x.leading_zeros())
        }
    }

    /// Position in the length-then-lex enumeration of all bitstrings.
    pub fn id(self) -> usize {
        (1usize << self.len) - 1 + self.bits as usize
    }

    pub fn from_id(id: usize) -> Node {
        let len = usize::BITS - 1 - (id + 1).leading_zeros();
        Node { len, bits: (id + 1 - (1usize << len)) as u64 }
    }

    /// All strings of length `len`, lexicographically.
    pub fn all(len: u32) -> impl Iterator<Item = Node> {
        Node::ROOT.extensions(len)
    }

    /// All extensions of length `len`, lexicographically.
    pub fn extensions(self, len: u32) -> impl Iterator<Item = Node> {
        let free = len.saturating_sub(self.len);
        let ok = len >= self.len;
        let base = if ok { self.bits << free } else { 0 };
        let count = if ok { 1u64 << free } else { 0 };
        (0..count).map(move |t| Node { len, bits: base | t })
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len == 0 {
            return write!(f, "ε");
        }
        for i in 0..self.len {
            write!(f, "{}", self.bit(i))?;
        }
        Ok(())
    }
}

/// Number of strings in 2^{≤h}.
pub(crate) fn node_count(h: u32) -> usize {
    (1usize << (h + 1)) - 1
}

/// A tuple of trees, each the image of 2^{≤ℓ} under an embedding, with a
/// shared level function.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StrongForest {
    levels: Vec<u32>,
    emb: Vec<Vec<Node>>,
}

/// Height cap for materialized forests.
pub const MAX_FOREST_HEIGHT: u32 = 24;

impl StrongForest {
    /// Raw constructor; see [`validate_strong_forest`].
    pub fn new(levels: Vec<u32>, emb: Vec<Vec<Node>>) -> Self {
        StrongForest { levels, emb }
    }

    /// `d` copies of 2^{≤height} with the identity embedding.
    pub fn full(d: usize, height: u32) -> Result<Self> {
        StrongForest::beneath(&vec![Node::ROOT; d], height)
    }

    /// Full binary trees of the given height hanging from `roots`.
    pub fn beneath(roots: &[Node], height: u32) -> Result<Self> {
        let Some(first) = roots.first() else {
            return Err(Error::pre("a forest needs at least one tree"));
        };
        if roots.iter().any(|r| r.len() != first.len()) {
            return Err(Error::pre("roots must share a length"));
        }
        if height > MAX_FOREST_HEIGHT || first.len() + height > MAX_LEN {
            return Err(Error::limit(format!("forest height {height} beneath length {}", first.len())));
        }
        let ids = node_count(height);
        let emb = roots.iter().map(|r| (0..ids).map(|id| r.append(Node::from_id(id))).collect()).collect();
        Ok(StrongForest { levels: (0..=height).map(|j| first.len() + j).collect(), emb })
    }

    pub fn d(&self) -> usize {
        self.emb.len()
    }

    pub fn height(&self) -> u32 {
        self.levels.len().saturating_sub(1) as u32
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    /// f_i(σ).
    pub fn embed(&self, i: usize, sigma: Node) -> Node {
        self.emb[i][sigma.id()]
    }

    pub fn nodes(&self, i: usize) -> &[Node] {
        &self.emb[i]
    }

    pub fn leaves(&self, i: usize) -> impl Iterator<Item = Node> + '_ {
        Node::all(self.height()).map(move |s| self.embed(i, s))
    }

    pub fn contains(&self, i: usize, x: Node) -> bool {
        self.emb[i].contains(&x)
    }
}

/// Checks level function, lengths, successor directions and injectivity.
pub fn validate_strong_forest(sf: &StrongForest) -> bool {
    let Some(h) = sf.levels.len().checked_sub(1) else { return false };
    if sf.emb.is_empty() || h as u32 > MAX_FOREST_HEIGHT || sf.levels.windows(2).any(|w| w[0] >= w[1]) {
        return false;
    }
    let ids = node_count(h as u32);
    sf.emb.iter().all(|f| {
        f.len() == ids
            && (0..ids).all(|id| {
                let s = Node::from_id(id);
                f[id].len() == sf.levels[s.len() as usize]
                    && (s.len() as usize == h || (0..2).all(|j| f[id].child(j).is_prefix_of(f[s.child(j).id()])))
            })
    })
}

/// A strong subforest written in the parent's index space: a strictly
/// increasing level map λ and, per tree, φ_i: 2^{≤k} → 2^{≤ℓ} with
/// |φ_i(σ)| = λ(|σ|) and φ_i(σj) ⪰ φ_i(σ)·j.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Selector {
    levels: Vec<u32>,
    nodes: Vec<Vec<Node>>,
}

impl Selector {
    pub fn new(levels: Vec<u32>, nodes: Vec<Vec<Node>>) -> Self {
        Selector { levels, nodes }
    }

    pub fn identity(d: usize, height: u32) -> Self {
        let ids = node_count(height);
        Selector { levels: (0..=height).collect(), nodes: vec![(0..ids).map(Node::from_id).collect(); d] }
    }

    pub fn d(&self) -> usize {
        self.nodes.len()
    }

    pub fn height(&self) -> u32 {
        self.levels.len().saturating_sub(1) as u32
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn node(&self, i: usize, sigma: Node) -> Node {
        self.nodes[i][sigma.id()]
    }

    pub fn tree(&self, i: usize) -> &[Node] {
        &self.nodes[i]
    }

    pub fn leaves(&self, i: usize) -> impl Iterator<Item = Node> + '_ {
        Node::all(self.height()).map(move |s| self.node(i, s))
    }

    /// Reads `inner`, a selector over this one's index space, in the
    /// parent's index space.
    pub fn compose(&self, inner: &Selector) -> Selector {
        Selector {
            levels: inner.levels.iter().map(|&l| self.levels[l as usize]).collect(),
            nodes: inner.nodes.iter().zip(&self.nodes).map(|(r, s)| r.iter().map(|x| s[x.id()]).collect()).collect(),
        }
    }

    pub fn realize(&self, parent: &StrongForest) -> StrongForest {
        StrongForest {
            levels: self.levels.iter().map(|&l| parent.levels[l as usize]).collect(),
            emb: self.nodes.iter().enumerate().map(|(i, t)| t.iter().map(|&x| parent.embed(i, x)).collect()).collect(),
        }
    }

    pub fn is_leaves_only(&self, parent_height: u32) -> bool {
        self.levels.last() == Some(&parent_height)
    }
}

/// Index-space check of a selector against a parent, plus a structural
/// check of the realized forest.
pub fn validate_selector(parent: &StrongForest, s: &Selector, leaves_only: bool) -> bool {
    let h = parent.height();
    let Some(k) = s.levels.len().checked_sub(1) else { return false };
    if s.d() != parent.d() || s.levels.windows(2).any(|w| w[0] >= w[1]) || s.levels[k] > h {
        return false;
    }
    if leaves_only && !s.is_leaves_only(h) {
        return false;
    }
    let ids = node_count(k as u32);
    let shape_ok = s.nodes.iter().all(|t| {
        t.len() == ids
            && (0..ids).all(|id| {
                let sg = Node::from_id(id);
                t[id].len() == s.levels[sg.len() as usize]
                    && (sg.len() as usize == k || (0..2).all(|j| t[id].child(j).is_prefix_of(t[sg.child(j).id()])))
            })
    });
    shape_ok && validate_strong_forest(&s.realize(parent))
}

/// Strictly increasing maps {0..k} → {0..height}, lexicographically; with
/// `leaves_only` the last value is `height`.
pub fn level_functions(height: u32, k: u32, leaves_only: bool) -> Vec<Vec<u32>> {
    fn go(from: u32, left: u32, height: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>, leaves_only: bool) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        let last = left == 1;
        for v in from..=height {
            if height - v < left - 1 || (last && leaves_only && v != height) {
                continue;
            }
            cur.push(v);
            go(v + 1, left - 1, height, cur, out, leaves_only);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= height {
        go(0, k + 1, height, &mut Vec::new(), &mut out, leaves_only);
    }
    out
}

/// Free bits per tree for a level map: λ(0) + Σ_j 2^j (λ(j) − λ(j−1) − 1).
fn free_bits(lam: &[u32]) -> u64 {
    let mut e = lam[0] as u64;
    for j in 1..lam.len() {
        e += (1u64 << j) * (lam[j] - lam[j - 1] - 1) as u64;
    }
    e
}

/// |Str_k| (or |Str^l_k|) of a height-`height` forest with `d` trees,
/// saturating.
pub fn count_subforests(d: usize, height: u32, k: u32, leaves_only: bool) -> u128 {
    level_functions(height, k, leaves_only)
        .iter()
        .map(|lam| {
            let e = free_bits(lam).saturating_mul(d as u64);
            if e >= 128 {
                u128::MAX
            } else {
                1u128 << e
            }
        })
        .fold(0u128, u128::saturating_add)
}

/// Streams the strong subforests of height `k` of any height-`height`
/// forest with `d` trees: level maps in lex order, then node choices as an
/// odometer with tree 0's root most significant.
#[derive(Debug, Clone)]
pub struct Subforests {
    d: usize,
    k: u32,
    lams: std::vec::IntoIter<Vec<u32>>,
    lam: Option<Vec<u32>>,
    widths: Vec<u32>,
    digits: Vec<u64>,
    count: u128,
}

impl Subforests {
    pub fn new(d: usize, height: u32, k: u32, leaves_only: bool) -> Self {
        let mut it = Subforests {
            d,
            k,
            lams: level_functions(height, k, leaves_only).into_iter(),
            lam: None,
            widths: Vec::new(),
            digits: Vec::new(),
            count: count_subforests(d, height, k, leaves_only),
        };
        it.advance_lam();
        it
    }

    /// Total number of selectors the stream yields.
    pub fn count_total(&self) -> u128 {
        self.count
    }

    fn advance_lam(&mut self) {
        self.lam = self.lams.next();
        if let Some(lam) = &self.lam {
            let ids = node_count(self.k);
            let per_tree: Vec<u32> = (0..ids)
                .map(|id| {
                    let s = Node::from_id(id);
                    match s.len() {
                        0 => lam[0],
                        l => lam[l as usize] - lam[l as usize - 1] - 1,
                    }
                })
                .collect();
            self.widths = per_tree.iter().copied().cycle().take(ids * self.d).collect();
            self.digits = vec![0; self.widths.len()];
        }
    }

    fn build(&self, lam: &[u32]) -> Selector {
        let ids = node_count(self.k);
        let nodes = (0..self.d)
            .map(|i| {
                let mut t: Vec<Node> = Vec::with_capacity(ids);
                for id in 0..ids {
                    let w = self.widths[i * ids + id];
                    let free = Node { len: w, bits: self.digits[i * ids + id] };
                    let s = Node::from_id(id);
                    t.push(match s.last() {
                        None => free,
                        Some(j) => t[s.prefix(s.len() - 1).id()].child(j).append(free),
                    });
                }
                t
            })
            .collect();
        Selector { levels: lam.to_vec(), nodes }
    }
}

impl Iterator for Subforests {
    type Item = Selector;

    fn next(&mut self) -> Option<Selector> {
        let lam = self.lam.clone()?;
        let out = self.build(&lam);
        let mut pos = self.digits.len();
        loop {
            if pos == 0 {
                self.advance_lam();
                break;
            }
            pos -= 1;
            if self.widths[pos] == 0 {
                continue;
            }
            self.digits[pos] += 1;
            if self.digits[pos] < (1u64 << self.widths[pos]) {
                break;
            }
            self.digits[pos] = 0;
        }
        Some(out)
    }
}

/// Str_k(sf) (or Str^l_k(sf)) as a stream; fails if it would exceed `cap`.
pub fn enum_subforests(sf: &StrongForest, k: u32, leaves_only: bool, cap: u128) -> Result<Subforests> {
    if k > sf.height() {
        return Err(Error::pre(format!("k = {k} exceeds forest height {}", sf.height())));
    }
    let it = Subforests::new(sf.d(), sf.height(), k, leaves_only);
    if it.count_total() > cap {
        return Err(Error::limit(format!("{} subforests exceed the cap {cap}", it.count_total())));
    }
    Ok(it)
}
