//! Structural transformations on witnesses.

mod greedy;
mod split;
mod translate;
mod tree;
mod union;

use crate::error::{Error, Result};
use crate::largeness::{validate_trace, FinSet, OrdIndex, Variant, Witness};

pub use greedy::{greedy_apart_blocks, GreedyBlocks};
pub use split::{deconstruct, deconstruct_general, extract_sparse_subset, IntervalCertificate};
pub use translate::{flatten_large_theta, theta_to_star};
pub use tree::{treemap_to_witness, witness_to_treemap, TreeMap};
pub use union::{construct_union, regroup_blocks};

/// A set together with a witness whose carrier lies inside it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub set: FinSet,
    pub witness: Witness,
}

impl Block {
    pub fn new(set: FinSet, witness: Witness) -> Self {
        Block { set, witness }
    }

    /// The witness's own carrier as the block.
    pub fn tight(witness: Witness) -> Self {
        Block { set: witness.carrier(), witness }
    }

    pub fn min(&self) -> u64 {
        self.set.min().expect("blocks are nonempty")
    }

    pub fn max(&self) -> u64 {
        self.set.max().expect("blocks are nonempty")
    }
}

/// Ordered blocks, pairwise apart under `variant`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockFamily {
    pub blocks: Vec<Block>,
    pub variant: Variant,
}

impl BlockFamily {
    pub fn new(blocks: Vec<Block>, variant: Variant) -> Self {
        BlockFamily { blocks, variant }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn maxima(&self) -> FinSet {
        self.blocks.iter().map(Block::max).collect()
    }

    pub fn union(&self) -> FinSet {
        self.blocks.iter().flat_map(|b| b.set.iter()).collect()
    }

    /// Blocks are nonempty, strictly increasing and consecutively apart.
    /// Apartness gets harder as the left block's maximum grows, so
    /// consecutive pairs cover all pairs.
    pub fn check_ordered(&self) -> Result<()> {
        for (i, b) in self.blocks.iter().enumerate() {
            if b.set.is_empty() {
                return Err(Error::pre(format!("block {i} is empty")));
            }
            if i > 0 {
                let p = &self.blocks[i - 1];
                if p.max() >= b.min() {
                    return Err(Error::pre(format!("blocks {} and {i} are not ordered", i - 1)));
                }
                if !self.variant.apart(p.max(), b.min(), b.max())? {
                    return Err(Error::pre(format!("blocks {} and {i} are not apart", i - 1)));
                }
            }
        }
        Ok(())
    }

    /// `check_ordered` plus every witness validating its block for `idx`.
    pub fn check(&self, idx: &OrdIndex) -> Result<()> {
        self.check_ordered()?;
        for (i, b) in self.blocks.iter().enumerate() {
            require(&b.witness, &b.set, idx, &self.variant, &format!("block {i}"))?;
        }
        Ok(())
    }
}

pub(crate) fn require(w: &Witness, f: &FinSet, idx: &OrdIndex, v: &Variant, what: &str) -> Result<()> {
    validate_trace(w, f, idx, v).map_err(|e| Error::pre(format!("{what} is not {idx}-large: {e}")))
}

/// Output self-check; a failure here means a proof step did not carry over.
pub(crate) fn ensure(w: &Witness, f: &FinSet, idx: &OrdIndex, v: &Variant, what: &str) -> Result<()> {
    validate_trace(w, f, idx, v).map_err(|e| Error::Invariant(format!("{what}: {e}")))
}

/// Nodes at depth `d` of the product tree, left to right.
pub(crate) fn nodes_at(w: &Witness, d: usize) -> Vec<&Witness> {
    let mut out = vec![w];
    for _ in 0..d {
        out = out.into_iter().flat_map(|x| x.children().iter()).collect();
    }
    out
}

/// Keeps the first `k` children at each of the top `d` levels.
pub(crate) fn prune(w: &Witness, k: u64, d: usize) -> Result<Witness> {
    if d == 0 {
        return Ok(w.clone());
    }
    let c = w.children();
    if (c.len() as u64) < k {
        return Err(Error::Shape(format!("need {k} children, found {}", c.len())));
    }
    Ok(Witness::Prod(c[..k as usize].iter().map(|x| prune(x, k, d - 1)).collect::<Result<_>>()?))
}

/// Builds a complete `k`-ary product tree of depth `d` over `leaves` in lex order.
pub(crate) fn assemble(mut leaves: Vec<Witness>, k: u64, d: usize) -> Witness {
    debug_assert_eq!(leaves.len() as u128, (k as u128).pow(d as u32));
    for _ in 0..d {
        let mut next = Vec::with_capacity(leaves.len() / k as usize);
        let mut it = leaves.into_iter();
        loop {
            let group: Vec<Witness> = it.by_ref().take(k as usize).collect();
            if group.is_empty() {
                break;
            }
            next.push(Witness::Prod(group));
        }
        leaves = next;
    }
    leaves.pop().expect("one root")
}
