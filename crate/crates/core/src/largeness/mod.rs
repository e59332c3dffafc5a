//! Finite sets, ordinal indices ω^n·σ and largeness witnesses.

mod brute;
mod decide;
mod json;
mod sparse;
mod validate;
mod weaken;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::formula::Theta;

pub use brute::{brute_force_large, brute_force_large_with};
pub use decide::{check_ks_large, check_large, check_large_with, Decision, Mode};
pub use json::{witness_from_json, witness_to_json};
pub use sparse::{check_sparse, Growth, SparsityPolicy};
pub use validate::{validate_trace, validate_witness};
pub use weaken::{relax_star, weaken_witness};

/// Search limits shared by the deciders and extractors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    /// Nodes the exact decider may expand.
    pub node_budget: u64,
    /// Largest set the brute-force oracle accepts.
    pub oracle_cap: usize,
    /// Require min F ≥ 3 on decider inputs.
    pub strict_convention: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config { node_budget: 20_000_000, oracle_cap: 24, strict_convention: false }
    }
}

impl Config {
    pub(crate) fn check_convention(&self, f: &FinSet) -> Result<()> {
        if self.strict_convention {
            if let Some(m) = f.min() {
                if m < 3 {
                    return Err(Error::pre(format!("strict convention needs min >= 3, got {m}")));
                }
            }
        }
        Ok(())
    }
}

// =========================================================================
// FinSet
// =========================================================================

/// A finite set of naturals, stored sorted and without duplicates.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct FinSet(Vec<u64>);

impl FinSet {
    pub fn new(mut v: Vec<u64>) -> Self {
        v.sort_unstable();
        v.dedup();
        FinSet(v)
    }

    pub fn range(lo: u64, hi: u64) -> Self {
        FinSet((lo..=hi).collect())
    }

    pub fn singleton(x: u64) -> Self {
        FinSet(vec![x])
    }

    pub fn elems(&self) -> &[u64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<u64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> Option<u64> {
        self.0.first().copied()
    }

    pub fn max(&self) -> Option<u64> {
        self.0.last().copied()
    }

    pub fn contains(&self, x: u64) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn is_subset(&self, other: &FinSet) -> bool {
        self.0.iter().all(|&x| other.contains(x))
    }

    pub fn union(&self, other: &FinSet) -> FinSet {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        FinSet::new(v)
    }

    pub fn without(&self, x: u64) -> FinSet {
        FinSet(self.0.iter().copied().filter(|&y| y != x).collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.iter().copied()
    }

    /// Elements in the closed interval [lo, hi].
    pub fn between(&self, lo: u64, hi: u64) -> FinSet {
        FinSet(self.0.iter().copied().filter(|&x| lo <= x && x <= hi).collect())
    }
}

impl From<Vec<u64>> for FinSet {
    fn from(v: Vec<u64>) -> Self {
        FinSet::new(v)
    }
}

impl FromIterator<u64> for FinSet {
    fn from_iter<I: IntoIterator<Item = u64>>(iter: I) -> Self {
        FinSet::new(iter.into_iter().collect())
    }
}

impl fmt::Display for FinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str("}")
    }
}

fn parse_u64(s: &str, pos: usize) -> Result<u64> {
    s.trim().parse().map_err(|_| Error::Parse { pos, msg: format!("bad number `{}`", s.trim()) })
}

impl FromStr for FinSet {
    type Err = Error;

    /// `{a, b, c}` or with ranges `{a..b, c}`.
    fn from_str(text: &str) -> Result<Self> {
        let t = text.trim();
        let inner = t
            .strip_prefix('{')
            .and_then(|s| s.strip_suffix('}'))
            .ok_or(Error::Parse { pos: 0, msg: "set literal must be enclosed in braces".into() })?;
        let mut out = Vec::new();
        if inner.trim().is_empty() {
            return Ok(FinSet(out));
        }
        let mut pos = 1;
        for part in inner.split(',') {
            if let Some((a, b)) = part.split_once("..") {
                let lo = parse_u64(a, pos)?;
                let hi = parse_u64(b, pos)?;
                if lo > hi {
                    return Err(Error::Parse { pos, msg: format!("empty range {lo}..{hi}") });
                }
                out.extend(lo..=hi);
            } else {
                out.push(parse_u64(part, pos)?);
            }
            pos += part.len() + 1;
        }
        Ok(FinSet::new(out))
    }
}

// =========================================================================
// OrdIndex
// =========================================================================

/// ω^n · (k₁, …, k_s). The last component is the outermost branching.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrdIndex {
    pub n: u32,
    pub sigma: Vec<u64>,
}

impl OrdIndex {
    pub fn new(n: u32, sigma: Vec<u64>) -> Result<Self> {
        if sigma.contains(&0) {
            return Err(Error::IncompatibleIndex("components must be >= 1".into()));
        }
        Ok(OrdIndex { n, sigma })
    }

    pub fn omega(n: u32) -> Self {
        OrdIndex { n, sigma: Vec::new() }
    }

    /// ω^n · (k repeated `times`).
    pub fn repeated(n: u32, k: u64, times: usize) -> Self {
        OrdIndex { n, sigma: vec![k; times] }
    }

    pub fn is_exponent_only(&self) -> bool {
        self.sigma.is_empty()
    }

    /// Index of each child of the outermost product.
    pub fn inner(&self) -> Option<OrdIndex> {
        let (_, rest) = self.sigma.split_last()?;
        Some(OrdIndex { n: self.n, sigma: rest.to_vec() })
    }
}

impl fmt::Display for OrdIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w^{}", self.n)?;
        if !self.sigma.is_empty() {
            let parts: Vec<String> = self.sigma.iter().map(|k| k.to_string()).collect();
            write!(f, "*({})", parts.join(","))?;
        }
        Ok(())
    }
}

impl FromStr for OrdIndex {
    type Err = Error;

    /// `w^N`, `w^N*(k1,...,ks)` or a bare `k` meaning `w^0*(k)`.
    fn from_str(text: &str) -> Result<Self> {
        let t = text.trim();
        let err = |pos: usize, msg: &str| Error::Parse { pos, msg: msg.to_string() };
        if t.chars().all(|c| c.is_ascii_digit()) && !t.is_empty() {
            let k = parse_u64(t, 0)?;
            return OrdIndex::new(0, vec![k]).map_err(|_| err(0, "components must be >= 1"));
        }
        let rest = t
            .strip_prefix("w^")
            .or_else(|| t.strip_prefix("ω^"))
            .ok_or_else(|| err(0, "expected `w^`"))?;
        let off = t.len() - rest.len();
        let (exp, tail) = match rest.find('*') {
            Some(i) => (&rest[..i], Some(&rest[i + 1..])),
            None => (rest, None),
        };
        if exp.is_empty() || !exp.chars().all(|c| c.is_ascii_digit()) {
            return Err(err(off, "expected exponent digits"));
        }
        let n: u32 = exp.parse().map_err(|_| err(off, "exponent too large"))?;
        let sigma = match tail {
            None => Vec::new(),
            Some(tl) => {
                let pos = off + exp.len() + 1;
                let inner = tl
                    .trim()
                    .strip_prefix('(')
                    .and_then(|s| s.strip_suffix(')'))
                    .ok_or_else(|| err(pos, "expected `(k1,...,ks)`"))?;
                let mut v = Vec::new();
                for part in inner.split(',') {
                    v.push(parse_u64(part, pos)?);
                }
                v
            }
        };
        OrdIndex::new(n, sigma).map_err(|_| err(off, "components must be >= 1"))
    }
}

// =========================================================================
// Variant
// =========================================================================

/// Which largeness notion: plain, with apartness at products, or the
/// product-tree notion with apartness at every node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Variant {
    Ks,
    Theta(Arc<Theta>),
    Star(Arc<Theta>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Notion {
    Ks,
    Theta,
    Star,
}

impl Variant {
    pub fn theta(t: Theta) -> Self {
        Variant::Theta(Arc::new(t))
    }

    pub fn star(t: Theta) -> Self {
        Variant::Star(Arc::new(t))
    }

    pub fn formula(&self) -> Option<&Arc<Theta>> {
        match self {
            Variant::Ks => None,
            Variant::Theta(t) | Variant::Star(t) => Some(t),
        }
    }

    pub fn notion(&self) -> Notion {
        match self {
            Variant::Ks => Notion::Ks,
            Variant::Theta(_) => Notion::Theta,
            Variant::Star(_) => Notion::Star,
        }
    }

    /// How many times the pivot is repeated below an Exp node at exponent `n`.
    pub fn exp_repeats(&self, n: u32) -> usize {
        match self {
            Variant::Star(_) => n as usize,
            _ => 1,
        }
    }

    /// Same formula, other notion.
    pub fn with_notion(&self, notion: Notion) -> Variant {
        let t = self.formula().cloned().unwrap_or_else(|| Arc::new(Theta::trivial()));
        match notion {
            Notion::Ks => Variant::Ks,
            Notion::Theta => Variant::Theta(t),
            Notion::Star => Variant::Star(t),
        }
    }

    /// Apartness of blocks with the given bounds; always true for KS.
    pub fn apart(&self, max_e: u64, min_f: u64, max_f: u64) -> Result<bool> {
        match self.formula() {
            None => Ok(true),
            Some(t) => t.apart_bounds(max_e, min_f, max_f),
        }
    }
}

impl fmt::Display for Notion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Notion::Ks => "ks",
            Notion::Theta => "theta",
            Notion::Star => "star",
        })
    }
}

impl FromStr for Notion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ks" => Ok(Notion::Ks),
            "theta" => Ok(Notion::Theta),
            "star" => Ok(Notion::Star),
            other => Err(Error::Parse { pos: 0, msg: format!("unknown notion `{other}`") }),
        }
    }
}

// =========================================================================
// Witness
// =========================================================================

/// Certificate that a set is ω^n·σ-large.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Witness {
    Leaf(FinSet),
    Exp { pivot: u64, sub: Box<Witness> },
    Prod(Vec<Witness>),
}

impl Witness {
    pub fn leaf(x: u64) -> Self {
        Witness::Leaf(FinSet::singleton(x))
    }

    pub fn exp(pivot: u64, sub: Witness) -> Self {
        Witness::Exp { pivot, sub: Box::new(sub) }
    }

    pub fn min(&self) -> Option<u64> {
        match self {
            Witness::Leaf(s) => s.min(),
            Witness::Exp { pivot, .. } => Some(*pivot),
            Witness::Prod(c) => c.iter().filter_map(|w| w.min()).min(),
        }
    }

    pub fn max(&self) -> Option<u64> {
        match self {
            Witness::Leaf(s) => s.max(),
            Witness::Exp { pivot, sub } => sub.max().max(Some(*pivot)),
            Witness::Prod(c) => c.iter().filter_map(|w| w.max()).max(),
        }
    }

    fn collect(&self, out: &mut Vec<u64>) {
        match self {
            Witness::Leaf(s) => out.extend(s.iter()),
            Witness::Exp { pivot, sub } => {
                out.push(*pivot);
                sub.collect(out);
            }
            Witness::Prod(c) => c.iter().for_each(|w| w.collect(out)),
        }
    }

    /// The set this witness certifies.
    pub fn carrier(&self) -> FinSet {
        let mut v = Vec::new();
        self.collect(&mut v);
        FinSet::new(v)
    }

    pub fn children(&self) -> &[Witness] {
        match self {
            Witness::Prod(c) => c,
            _ => &[],
        }
    }

    /// First non-Prod node along the leftmost path.
    pub fn first_block(&self) -> &Witness {
        match self {
            Witness::Prod(c) if !c.is_empty() => c[0].first_block(),
            w => w,
        }
    }

    /// Number of nested products along the leftmost path.
    pub fn prod_depth(&self) -> usize {
        match self {
            Witness::Prod(c) if !c.is_empty() => 1 + c[0].prod_depth(),
            _ => 0,
        }
    }

    /// Non-Prod nodes in left-to-right order.
    pub fn blocks(&self) -> Vec<&Witness> {
        let mut out = Vec::new();
        fn go<'a>(w: &'a Witness, out: &mut Vec<&'a Witness>) {
            match w {
                Witness::Prod(c) => c.iter().for_each(|x| go(x, out)),
                _ => out.push(w),
            }
        }
        go(self, &mut out);
        out
    }

    /// Children of every Prod sorted by their minimum.
    pub fn canonical(mut self) -> Self {
        self.canonicalize();
        self
    }

    fn canonicalize(&mut self) {
        match self {
            Witness::Leaf(_) => {}
            Witness::Exp { sub, .. } => sub.canonicalize(),
            Witness::Prod(c) => {
                c.iter_mut().for_each(|w| w.canonicalize());
                c.sort_by_key(|w| w.min());
            }
        }
    }
}
