use super::tree::strings;
use super::{assemble, ensure, nodes_at, require, Block, BlockFamily};
use crate::error::{Error, Result};
use crate::largeness::{check_sparse, weaken_witness, FinSet, Notion, OrdIndex, SparsityPolicy, Variant, Witness};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Recipe {
    /// Singleton blocks: the transversal is the carrier itself.
    Fixed(Witness),
    Leaf,
    /// First element is the pivot; the rest splits over τ ∈ arity^m.
    Pivot { arity: u64, m: u32, parts: Vec<(usize, Recipe)> },
    /// Product tree of the given shape over independent parts.
    Tree { sigma: Vec<u64>, parts: Vec<(usize, Recipe)> },
}

/// Builds a witness for any set meeting each block interval exactly once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalCertificate {
    intervals: Vec<(u64, u64)>,
    target: OrdIndex,
    variant: Variant,
    recipe: Recipe,
}

fn assemble_shape(mut leaves: Vec<Witness>, sigma: &[u64]) -> Witness {
    for &k in sigma {
        let mut it = leaves.into_iter();
        let mut next = Vec::new();
        loop {
            let g: Vec<Witness> = it.by_ref().take(k as usize).collect();
            if g.is_empty() {
                break;
            }
            next.push(Witness::Prod(g));
        }
        leaves = next;
    }
    leaves.pop().expect("one root")
}

fn split_parts<'a>(h: &'a [u64], parts: &[(usize, Recipe)]) -> Vec<&'a [u64]> {
    let mut out = Vec::with_capacity(parts.len());
    let mut at = 0;
    for (len, _) in parts {
        out.push(&h[at..at + len]);
        at += len;
    }
    out
}

fn apply(r: &Recipe, h: &[u64]) -> Result<Witness> {
    match r {
        Recipe::Fixed(w) => Ok(w.clone()),
        Recipe::Leaf => Ok(Witness::Leaf(FinSet::new(h.to_vec()))),
        Recipe::Tree { sigma, parts } => {
            let leaves = split_parts(h, parts).into_iter().zip(parts).map(|(s, (_, r))| apply(r, s)).collect::<Result<_>>()?;
            Ok(assemble_shape(leaves, sigma))
        }
        Recipe::Pivot { arity, m, parts } => {
            let p = h[0];
            if p == 0 || p > *arity {
                return Err(Error::Invariant(format!("pivot {p} outside 1..={arity}")));
            }
            let slices = split_parts(&h[1..], parts);
            let mut leaves = Vec::new();
            for tau in strings(p, *m as usize) {
                let i = tau.iter().fold(0usize, |acc, &t| acc * *arity as usize + t as usize);
                leaves.push(apply(&parts[i].1, slices[i])?);
            }
            Ok(Witness::exp(p, assemble(leaves, p, *m as usize)))
        }
    }
}

impl IntervalCertificate {
    /// `[min Xᵢ, max Xᵢ]` for each block.
    pub fn intervals(&self) -> &[(u64, u64)] {
        &self.intervals
    }

    /// Index every certified transversal is large for.
    pub fn target(&self) -> &OrdIndex {
        &self.target
    }

    pub fn is_transversal(&self, h: &FinSet) -> bool {
        h.len() == self.intervals.len() && h.iter().zip(&self.intervals).all(|(x, &(lo, hi))| lo <= x && x <= hi)
    }

    /// Number of transversals, saturating.
    pub fn count(&self) -> u128 {
        self.intervals.iter().fold(1u128, |acc, &(lo, hi)| acc.saturating_mul((hi - lo + 1) as u128))
    }

    /// The `i`-th transversal in mixed-radix order (last interval fastest).
    pub fn nth(&self, mut i: u128) -> FinSet {
        let mut v = vec![0; self.intervals.len()];
        for (slot, &(lo, hi)) in v.iter_mut().zip(&self.intervals).rev() {
            let w = (hi - lo + 1) as u128;
            *slot = lo + (i % w) as u64;
            i /= w;
        }
        FinSet::new(v)
    }

    /// Witness that `h` is large; the output is re-validated.
    pub fn certify(&self, h: &FinSet) -> Result<Witness> {
        if !self.is_transversal(h) {
            return Err(Error::pre(format!("{h} is not a transversal of the block intervals")));
        }
        let w = apply(&self.recipe, h.elems())?;
        ensure(&w, h, &self.target, &self.variant, "transversal witness")?;
        Ok(w)
    }
}

/// Splits an ω^(n+m)·2 witness into ω^n blocks.
fn split2(w: &Witness, n: u32, m: u32) -> Result<(Vec<Block>, Recipe)> {
    let c = w.children();
    if c.len() != 2 {
        return Err(Error::Shape("expected a product of two blocks".into()));
    }
    if n == 0 {
        let blocks = w.carrier().iter().map(|x| Block::tight(Witness::leaf(x))).collect();
        return Ok((blocks, Recipe::Fixed(c[0].clone())));
    }
    if m == 0 {
        return Ok((vec![Block::new(w.carrier(), c[0].clone())], Recipe::Leaf));
    }
    let (y0, y1) = (&c[0], &c[1]);
    let Witness::Exp { pivot: p1, sub } = y1 else {
        return Err(Error::Shape("second block has no pivot".into()));
    };
    let e = n + m - 1;
    let max_y0 = y0.max().expect("nonempty");
    let from = OrdIndex { n: e, sigma: vec![*p1; (n + m) as usize] };
    let to = OrdIndex { n: e, sigma: vec![max_y0; (m + 1) as usize] };
    let tree = weaken_witness(sub, &from, &to)?;
    let y0_block = Block::new(y0.carrier(), weaken_witness(y0, &OrdIndex::omega(n + m), &OrdIndex::omega(n))?);
    let mut blocks = vec![y0_block];
    let mut parts = Vec::new();
    for node in nodes_at(&tree, m as usize) {
        let pair = Witness::Prod(node.children()[..2].to_vec());
        let (bs, r) = split2(&pair, n, m - 1)?;
        parts.push((bs.len(), r));
        blocks.extend(bs);
    }
    Ok((blocks, Recipe::Pivot { arity: max_y0, m, parts }))
}

/// Blocks X₀ < … of ω^n-large* sets such that every transversal of their
/// intervals is ω^m·(k₁,…,k_s)-large*; the input is ω^(n+m)·(2,k₁,…,k_s)-large*.
pub fn deconstruct_general(
    w: &Witness,
    sigma: &[u64],
    n: u32,
    m: u32,
    v: &Variant,
) -> Result<(BlockFamily, IntervalCertificate)> {
    if v.notion() != Notion::Star {
        return Err(Error::pre("deconstruction works on the star notion"));
    }
    if sigma.first() != Some(&2) {
        return Err(Error::Shape(format!("index components {sigma:?} must start with 2")));
    }
    let idx = OrdIndex { n: n + m, sigma: sigma.to_vec() };
    require(w, &w.carrier(), &idx, v, "input")?;
    let outer = &sigma[1..];
    let mut blocks = Vec::new();
    let mut parts = Vec::new();
    for leaf in nodes_at(w, outer.len()) {
        let (bs, r) = split2(leaf, n, m)?;
        parts.push((bs.len(), r));
        blocks.extend(bs);
    }
    let recipe = if outer.is_empty() {
        parts.pop().expect("one leaf").1
    } else {
        Recipe::Tree { sigma: outer.to_vec(), parts }
    };
    let fam = BlockFamily::new(blocks, v.clone());
    fam.check_ordered().map_err(|e| Error::Invariant(e.to_string()))?;
    for (i, b) in fam.blocks.iter().enumerate() {
        ensure(&b.witness, &b.set, &OrdIndex::omega(n), v, &format!("block {i}"))?;
    }
    let cert = IntervalCertificate {
        intervals: fam.blocks.iter().map(|b| (b.min(), b.max())).collect(),
        target: OrdIndex { n: m, sigma: outer.to_vec() },
        variant: v.clone(),
        recipe,
    };
    Ok((fam, cert))
}

pub fn deconstruct(w: &Witness, n: u32, m: u32, v: &Variant) -> Result<(BlockFamily, IntervalCertificate)> {
    deconstruct_general(w, &[2], n, m, v)
}

/// An ω^k-sparse ω^n-large* subset of an ω^(n+k)·2-large* set: the maxima
/// of ω^k-large* blocks.
pub fn extract_sparse_subset(w: &Witness, n: u32, k: u32, v: &Variant) -> Result<(FinSet, Witness)> {
    let (fam, cert) = deconstruct(w, k, n, v)?;
    let y = fam.maxima();
    let wy = cert.certify(&y)?;
    if !check_sparse(&y, &SparsityPolicy::Omega(k))? {
        return Err(Error::Invariant(format!("{y} is not ω^{k}-sparse")));
    }
    Ok((y, wy))
}
