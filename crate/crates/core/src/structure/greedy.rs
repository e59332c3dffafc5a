use super::{Block, BlockFamily};
use crate::error::Result;
use crate::largeness::{check_large, Decision, FinSet, Mode, OrdIndex, Variant};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyBlocks {
    pub family: BlockFamily,
    /// The universe ran out before `count` blocks were found.
    pub exhausted: bool,
}

/// Left to right, each block is the earliest-ending segment of the
/// universe that is `base`-large and apart from every earlier block; among
/// segments with the same end the longest wins.
pub fn greedy_apart_blocks(universe: &FinSet, base: &OrdIndex, v: &Variant, count: usize) -> Result<GreedyBlocks> {
    let a = universe.elems();
    let mut blocks: Vec<Block> = Vec::new();
    let mut next = 0;
    'outer: while blocks.len() < count {
        for end in next..a.len() {
            for start in next..=end {
                let mut ok = true;
                for b in &blocks {
                    if !v.apart(b.max(), a[start], a[end])? {
                        ok = false;
                        break;
                    }
                }
                if !ok {
                    continue;
                }
                let seg = FinSet::new(a[start..=end].to_vec());
                if let Decision::Large(w) = check_large(&seg, base, v, Mode::Exact)? {
                    blocks.push(Block::new(seg, w));
                    next = end + 1;
                    continue 'outer;
                }
            }
        }
        return Ok(GreedyBlocks { family: BlockFamily::new(blocks, v.clone()), exhausted: true });
    }
    Ok(GreedyBlocks { family: BlockFamily::new(blocks, v.clone()), exhausted: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{theta_apart, Theta};

    #[test]
    fn trivial_theta() {
        let v = Variant::theta(Theta::trivial());
        let g = greedy_apart_blocks(&FinSet::range(3, 10), &OrdIndex::omega(0), &v, 3).unwrap();
        let sets: Vec<FinSet> = g.family.blocks.iter().map(|b| b.set.clone()).collect();
        assert_eq!(sets, vec![FinSet::singleton(3), FinSet::singleton(4), FinSet::singleton(5)]);
        assert!(!g.exhausted);
        let g = greedy_apart_blocks(&FinSet::range(3, 10), &OrdIndex::omega(0), &v, 0).unwrap();
        assert!(g.family.is_empty());
    }

    #[test]
    fn gap_theta_skips() {
        let t = Theta::parse("y*y > x*z").unwrap();
        let v = Variant::theta(t.clone());
        let u = FinSet::new(vec![3, 4, 40, 41, 42, 2000]);
        let g = greedy_apart_blocks(&u, &OrdIndex::omega(0), &v, 4).unwrap();
        let b = &g.family.blocks;
        for i in 0..b.len() {
            for j in i + 1..b.len() {
                assert!(theta_apart(&b[i].set, &b[j].set, &t).unwrap());
            }
        }
        assert!(g.family.check(&OrdIndex::omega(0)).is_ok());
    }

    #[test]
    fn exhausts() {
        let g = greedy_apart_blocks(&FinSet::range(3, 8), &OrdIndex::omega(1), &Variant::Ks, 5).unwrap();
        assert!(g.exhausted);
        assert_eq!(g.family.len(), 1);
    }
}
