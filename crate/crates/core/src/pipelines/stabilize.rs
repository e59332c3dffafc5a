use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;

use super::coloring::Coloring;
use crate::error::{Error, Result};
use crate::largeness::{check_large, check_sparse, FinSet, Mode, OrdIndex, SparsityPolicy, Variant, Witness};
use crate::pigeonhole::{rt1_extract, Rt1Form, UnaryColoring};
use crate::structure::{assemble, ensure, nodes_at, require, Block};

/// How each block is made homogeneous for its vector coloring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Homogenize {
    /// The unary Ramsey extraction with colors below the block minimum;
    /// blocks drop two exponents.
    Proof,
    /// The first color class that the exact decider finds large at the
    /// given exponent.
    Search { exponent: u32 },
}

/// Blocks `Y_σ ⊆ X_σ`, σ ∈ d^D in lex order, on which the pair coloring
/// depends only on the block indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stabilized {
    pub d: u64,
    pub depth: usize,
    /// Index each block is large for.
    pub block_index: OrdIndex,
    pub blocks: Vec<Block>,
    /// Cross-block color for block positions `i < j`.
    pub g: BTreeMap<(usize, usize), u64>,
    /// Witness for the union at `block_index·(d, …, d)`.
    pub witness: Witness,
}

impl Stabilized {
    pub fn union(&self) -> FinSet {
        self.blocks.iter().fold(FinSet::default(), |acc, b| acc.union(&b.set))
    }

    pub fn index(&self) -> OrdIndex {
        let mut sigma = self.block_index.sigma.clone();
        sigma.extend(std::iter::repeat(self.d).take(self.depth));
        OrdIndex { n: self.block_index.n, sigma }
    }
}

/// Splits a witness for `ω^e·(d, …, d)` into its `d^D` leaf blocks and
/// homogenizes them in decreasing lex order of their indices.
pub fn stabilize_blocks(
    w: &Witness,
    idx: &OrdIndex,
    f: &Coloring,
    v: &Variant,
    policy: &SparsityPolicy,
    how: Homogenize,
) -> Result<Stabilized> {
    f.require_pairs()?;
    let x = w.carrier();
    require(w, &x, idx, v, "input witness")?;
    if !x.is_subset(f.carrier()) {
        return Err(Error::pre("coloring does not cover the witness carrier"));
    }
    let depth = idx.sigma.len();
    let d = idx.sigma.first().copied().unwrap_or(1);
    if idx.sigma.iter().any(|&c| c != d) {
        return Err(Error::pre(format!("{idx} is not of the form w^e*(d,...,d)")));
    }
    let e = idx.n;
    let target = match how {
        Homogenize::Proof if e < 2 => return Err(Error::pre(format!("blocks at w^{e} cannot drop two exponents"))),
        Homogenize::Proof => e - 2,
        Homogenize::Search { exponent } if exponent > e => {
            return Err(Error::pre(format!("cannot raise blocks from w^{e} to w^{exponent}")))
        }
        Homogenize::Search { exponent } => exponent,
    };
    match policy {
        SparsityPolicy::Strict(_) | SparsityPolicy::Omega(_) => {
            if !check_sparse(&x, policy)? {
                return Err(Error::sparsity("input set is not sparse"));
            }
            let count = (d as u128).checked_pow(depth as u32).filter(|&c| c < 64 * 64);
            let need = count.map(|c| BigUint::from(1u8) << c as usize);
            if need.map_or(true, |n| n > BigUint::from(x.min().expect("nonempty"))) {
                return Err(Error::sparsity(format!("2^(d^n) <= min X with d={d}, n={depth}")));
            }
        }
        SparsityPolicy::Lazy | SparsityPolicy::None => {}
    }

    let leaves = nodes_at(w, depth);
    let sets: Vec<FinSet> = leaves.iter().map(|l| l.carrier()).collect();
    let mut out: Vec<Option<Block>> = vec![None; leaves.len()];
    for s in (0..leaves.len()).rev() {
        let earlier: Vec<u64> = sets[..s].iter().flat_map(|b| b.iter()).collect();
        let later_mins: Vec<u64> = out[s + 1..].iter().map(|b| b.as_ref().expect("done").min()).collect();
        let key = |y: u64| -> Vec<u64> {
            earlier.iter().map(|&z| f.pair(z, y)).chain(later_mins.iter().map(|&z| f.pair(y, z))).collect()
        };
        let keys: BTreeSet<Vec<u64>> = sets[s].iter().map(key).collect();
        let rank: BTreeMap<&Vec<u64>, u64> = keys.iter().zip(0..).collect();
        let col = UnaryColoring::from_fn(&sets[s], |y| rank[&key(y)]);
        let block = match how {
            Homogenize::Proof => {
                let min = sets[s].min().expect("nonempty");
                if matches!(policy, SparsityPolicy::Lazy) && keys.len() as u64 > min {
                    return Err(Error::sparsity(format!("block {s}: {} colors realized but min X = {min}", keys.len())));
                }
                let h = rt1_extract(&sets[s], leaves[s], Rt1Form::Min, target, &col, v, policy.clone())
                    .map_err(|e| e.at_stage(&format!("block {s}")))?;
                Block::new(h.set, h.witness)
            }
            Homogenize::Search { exponent } => search_class(&sets[s], &col, exponent, v)?
                .ok_or_else(|| Error::NotFound { exhaustive: true }.at_stage(&format!("block {s}")))?,
        };
        require_sub(&block, &sets[s])?;
        out[s] = Some(block);
    }
    let blocks: Vec<Block> = out.into_iter().map(|b| b.expect("filled")).collect();
    let block_index = OrdIndex::omega(target);
    for b in &blocks {
        ensure(&b.witness, &b.set, &block_index, v, "stabilized block")?;
    }
    let g = cross_colors(f, &blocks)?;
    let witness = assemble(blocks.iter().map(|b| b.witness.clone()).collect(), d, depth);
    let st = Stabilized { d, depth, block_index, blocks, g, witness };
    ensure(&st.witness, &st.union(), &st.index(), v, "stabilized union")?;
    Ok(st)
}

fn require_sub(b: &Block, x: &FinSet) -> Result<()> {
    if b.set.is_subset(x) && b.witness.carrier() == b.set {
        Ok(())
    } else {
        Err(Error::Invariant("homogenized block left its parent".into()))
    }
}

/// First color class of `x` that is ω^e-large, by color.
pub(crate) fn search_class(x: &FinSet, col: &UnaryColoring, e: u32, v: &Variant) -> Result<Option<Block>> {
    let mut classes: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for (y, c) in col.iter() {
        if x.contains(y) {
            classes.entry(c).or_default().push(y);
        }
    }
    let idx = OrdIndex::omega(e);
    for (_, ys) in classes {
        let set = FinSet::new(ys);
        if let Some(w) = check_large(&set, &idx, v, Mode::Exact)?.into_witness() {
            return Ok(Some(Block::tight(w)));
        }
    }
    Ok(None)
}

/// Scans every cross-block pair and returns the determined colors.
fn cross_colors(f: &Coloring, blocks: &[Block]) -> Result<BTreeMap<(usize, usize), u64>> {
    let mut g = BTreeMap::new();
    for (i, a) in blocks.iter().enumerate() {
        for (j, b) in blocks.iter().enumerate().skip(i + 1) {
            let mut seen = None;
            for x in a.set.iter() {
                for y in b.set.iter() {
                    let c = f.pair(x, y);
                    if *seen.get_or_insert(c) != c {
                        return Err(Error::Invariant(format!("blocks {i} and {j} see two colors")));
                    }
                }
            }
            g.insert((i, j), seen.expect("nonempty blocks"));
        }
    }
    Ok(g)
}
