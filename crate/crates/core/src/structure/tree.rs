use std::collections::BTreeMap;

use super::{assemble, nodes_at, require};
use crate::error::{Error, Result};
use crate::largeness::{FinSet, OrdIndex, Variant, Witness};

/// A `k`-regular tree of depth `d` labelled by sets; node σ's children are σ·0, …, σ·(k−1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeMap {
    pub k: u64,
    pub d: usize,
    /// Index every leaf set is large for.
    pub base: OrdIndex,
    pub g: BTreeMap<Vec<u64>, FinSet>,
    /// Leaf witnesses in lex order of their strings.
    pub leaves: Vec<Witness>,
}

impl TreeMap {
    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    pub fn root(&self) -> &FinSet {
        &self.g[&Vec::new()]
    }
}

/// All strings of length `len` over `k` letters, lex order.
pub(crate) fn strings(k: u64, len: usize) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|s| {
                (0..k).map(move |i| {
                    let mut t = s.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

/// Views the outer `depth` product levels of `w` as a tree. Those levels
/// must share one branching `k`; the rest of the index is the leaf base.
pub fn witness_to_treemap(w: &Witness, idx: &OrdIndex, depth: usize, v: &Variant) -> Result<TreeMap> {
    if depth > idx.sigma.len() {
        return Err(Error::Shape(format!("{idx} has fewer than {depth} product levels")));
    }
    let split = idx.sigma.len() - depth;
    let outer = &idx.sigma[split..];
    let k = outer.first().copied().unwrap_or(1);
    if outer.iter().any(|&c| c != k) {
        return Err(Error::Shape(format!("outer components of {idx} are not constant")));
    }
    require(w, &w.carrier(), idx, v, "witness")?;
    let base = OrdIndex { n: idx.n, sigma: idx.sigma[..split].to_vec() };
    let mut g = BTreeMap::new();
    for level in 0..=depth {
        for (s, node) in strings(k, level).into_iter().zip(nodes_at(w, level)) {
            g.insert(s, node.carrier());
        }
    }
    let leaves = nodes_at(w, depth).into_iter().cloned().collect();
    Ok(TreeMap { k, d: depth, base, g, leaves })
}

fn show(s: &[u64]) -> String {
    if s.is_empty() {
        return "ε".into();
    }
    s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(".")
}

/// Inverse of `witness_to_treemap`; checks both tree conditions first.
pub fn treemap_to_witness(t: &TreeMap, v: &Variant) -> Result<Witness> {
    let node = |s: &Vec<u64>| t.g.get(s).ok_or_else(|| Error::Invariant(format!("missing node {}", show(s))));
    for level in 0..=t.d {
        let row = strings(t.k, level);
        for s in &row {
            let gs = node(s)?;
            if gs.is_empty() {
                return Err(Error::Invariant(format!("node {} is empty", show(s))));
            }
            if level < t.d {
                let mut u = FinSet::default();
                for i in 0..t.k {
                    let mut c = s.clone();
                    c.push(i);
                    u = u.union(node(&c)?);
                }
                if &u != gs {
                    return Err(Error::Invariant(format!("node {} is not the union of its children", show(s))));
                }
            }
        }
        for (i, a) in row.iter().enumerate() {
            for b in &row[i + 1..] {
                let (ga, gb) = (node(a)?, node(b)?);
                let (hi, lo, top) = (ga.max().unwrap_or(0), gb.min().unwrap_or(0), gb.max().unwrap_or(0));
                if hi >= lo || !v.apart(hi, lo, top)? {
                    return Err(Error::Invariant(format!("nodes {} and {} are not ordered and apart", show(a), show(b))));
                }
            }
        }
    }
    let names = strings(t.k, t.d);
    if names.len() != t.leaves.len() {
        return Err(Error::Invariant(format!("expected {} leaf witnesses, got {}", names.len(), t.leaves.len())));
    }
    for (s, w) in names.iter().zip(&t.leaves) {
        let gs = node(s)?;
        if &w.carrier() != gs {
            return Err(Error::Invariant(format!("leaf {} witness does not cover its set", show(s))));
        }
        require(w, gs, &t.base, v, &format!("leaf {}", show(s))).map_err(|e| Error::Invariant(e.to_string()))?;
    }
    Ok(assemble(t.leaves.clone(), t.k, t.d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Theta;

    fn three() -> (Witness, OrdIndex) {
        (Witness::Prod(vec![Witness::leaf(4), Witness::leaf(5), Witness::leaf(6)]), OrdIndex { n: 0, sigma: vec![3] })
    }

    #[test]
    fn depth_zero_and_one() {
        let v = Variant::star(Theta::trivial());
        let (w, idx) = three();
        let t0 = witness_to_treemap(&w, &idx, 0, &v).unwrap();
        assert_eq!(t0.root(), &FinSet::new(vec![4, 5, 6]));
        assert_eq!(t0.leaf_count(), 1);
        let t = witness_to_treemap(&w, &idx, 1, &v).unwrap();
        assert_eq!(t.root(), &FinSet::new(vec![4, 5, 6]));
        for i in 0..3 {
            assert_eq!(t.g[&vec![i]], FinSet::singleton(4 + i));
        }
        assert_eq!(treemap_to_witness(&t, &v).unwrap(), w);
    }

    #[test]
    fn depth_two() {
        let v = Variant::Ks;
        let w = Witness::Prod(vec![
            Witness::Prod(vec![Witness::leaf(1), Witness::leaf(2)]),
            Witness::Prod(vec![Witness::leaf(3), Witness::leaf(4)]),
        ]);
        let idx = OrdIndex { n: 0, sigma: vec![2, 2] };
        let t = witness_to_treemap(&w, &idx, 2, &v).unwrap();
        assert_eq!(t.leaf_count(), 4);
        assert_eq!(t.g[&vec![1]], FinSet::new(vec![3, 4]));
        assert_eq!(treemap_to_witness(&t, &v).unwrap(), w);
    }

    #[test]
    fn errors() {
        let v = Variant::Ks;
        let w = Witness::Prod(vec![Witness::Prod(vec![Witness::leaf(1), Witness::leaf(2)])]);
        let idx = OrdIndex { n: 0, sigma: vec![2, 1] };
        assert!(matches!(witness_to_treemap(&w, &idx, 2, &v), Err(Error::Shape(_))));
        let gap = Variant::theta(Theta::parse("y*y > x*z").unwrap());
        let w = Witness::Prod(vec![Witness::leaf(3), Witness::Leaf(FinSet::new(vec![4, 50]))]);
        let idx = OrdIndex { n: 0, sigma: vec![2] };
        let mut t = witness_to_treemap(&w, &idx, 1, &Variant::Ks).unwrap();
        let e = treemap_to_witness(&t, &gap).unwrap_err();
        assert!(matches!(&e, Error::Invariant(m) if m.contains("nodes 0 and 1")), "{e}");
        t.g.insert(vec![], FinSet::new(vec![3, 4]));
        assert!(treemap_to_witness(&t, &Variant::Ks).is_err());
    }
}
