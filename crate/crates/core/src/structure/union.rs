use super::{assemble, ensure, nodes_at, prune, require, Block, BlockFamily};
use crate::error::{Error, Result};
use crate::largeness::{FinSet, Notion, OrdIndex, Witness};

fn with_max_in<'a>(blocks: &[&'a Block], keep: &FinSet) -> Vec<&'a Block> {
    blocks.iter().copied().filter(|b| keep.contains(b.max())).collect()
}

/// Replaces every node at depth `d` by the body of its pivot node.
fn graft(w: &Witness, d: usize) -> Result<Witness> {
    if d == 0 {
        return match w {
            Witness::Exp { sub, .. } => Ok((**sub).clone()),
            _ => Err(Error::Shape("expected a pivot node".into())),
        };
    }
    Ok(Witness::Prod(w.children().iter().map(|c| graft(c, d - 1)).collect::<Result<_>>()?))
}

/// Union of ω^a-large* blocks whose maxima carry an ω^(⌊a/2⌋+2b)-large*
/// witness, certified ω^(a+b)-large*.
pub fn construct_union(fam: &BlockFamily, max_witness: &Witness, a: u32, b: u32) -> Result<Witness> {
    let v = &fam.variant;
    if v.notion() != Notion::Star {
        return Err(Error::pre("construct_union works on the star notion"));
    }
    fam.check(&OrdIndex::omega(a))?;
    require(max_witness, &fam.maxima(), &OrdIndex::omega(a / 2 + 2 * b), v, "set of block maxima")?;
    let refs: Vec<&Block> = fam.blocks.iter().collect();
    let w = union_rec(&refs, max_witness, a, b)?;
    ensure(&w, &fam.union(), &OrdIndex::omega(a + b), v, "union witness")?;
    Ok(w)
}

fn union_rec(blocks: &[&Block], mw: &Witness, a: u32, b: u32) -> Result<Witness> {
    let seq = with_max_in(blocks, &mw.carrier());
    let first = seq.first().ok_or_else(|| Error::pre("no block has its maximum in the witness"))?;
    if b == 0 {
        return Ok(first.witness.clone());
    }
    let c = (a / 2 + 2 * (b - 1)) as usize;
    let Witness::Exp { sub, .. } = mw else {
        return Err(Error::Shape("maxima witness has no pivot".into()));
    };
    // Two unfoldings give a tree of depth 2c+3 over ω^c-large* leaves.
    let tree = graft(sub, c + 2)?;
    let m0 = first.min();
    if m0 == 0 {
        return Err(Error::pre("first block has minimum 0"));
    }
    let depth = (a + b) as usize;
    let tree = prune(&tree, m0, depth)?;
    let mut parts = Vec::new();
    for node in nodes_at(&tree, depth) {
        let z = node.first_block();
        parts.push(union_rec(&seq, z, a, b - 1)?);
    }
    Ok(Witness::exp(m0, assemble(parts, m0, depth)))
}

/// Groups `E₁ ∪ … ∪ E_{k−1}` into a product of branching `x` and depth `n`
/// on top of `base`, given an ω^(n+1)-large(θ) witness on the block maxima.
pub fn regroup_blocks(fam: &BlockFamily, base: &OrdIndex, max_witness: &Witness, n: u32, x: u64) -> Result<Witness> {
    let v = &fam.variant;
    fam.check(base)?;
    let first = fam.blocks.first().ok_or_else(|| Error::pre("empty family"))?;
    if x == 0 || x >= first.min() {
        return Err(Error::pre(format!("need 1 <= x < min E0 = {}, got {x}", first.min())));
    }
    require(max_witness, &fam.maxima(), &OrdIndex::omega(n + 1), &v.with_notion(Notion::Theta), "set of block maxima")?;
    let refs: Vec<&Block> = fam.blocks.iter().collect();
    let w = regroup_rec(&refs, max_witness, n, x)?;
    let mut sigma = base.sigma.clone();
    sigma.extend(std::iter::repeat(x).take(n as usize));
    let target = OrdIndex { n: base.n, sigma };
    let rest: FinSet = fam.blocks[1..].iter().flat_map(|b| b.set.iter()).collect();
    ensure(&w, &rest, &target, v, "regrouped witness")?;
    Ok(w)
}

fn regroup_rec(blocks: &[&Block], mw: &Witness, n: u32, x: u64) -> Result<Witness> {
    let seq = with_max_in(blocks, &mw.carrier());
    if n == 0 {
        return seq.get(1).map(|b| b.witness.clone()).ok_or_else(|| Error::pre("fewer than two blocks"));
    }
    let Witness::Exp { sub, .. } = mw else {
        return Err(Error::Shape("maxima witness has no pivot".into()));
    };
    let parts = sub.children();
    if (parts.len() as u64) < x {
        return Err(Error::pre(format!("maxima witness splits into {} parts, need {x}", parts.len())));
    }
    let groups = parts[..x as usize].iter().map(|f| regroup_rec(&seq, f, n - 1, x)).collect::<Result<_>>()?;
    Ok(Witness::Prod(groups))
}
