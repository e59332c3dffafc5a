//! Homogeneous large subsets for colorings of single elements.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::largeness::{check_sparse, validate_trace, weaken_witness, FinSet, Notion, OrdIndex, SparsityPolicy, Variant, Witness};
use crate::par::prelude::*;

/// A coloring of single elements.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UnaryColoring(BTreeMap<u64, u64>);

impl UnaryColoring {
    pub fn new(map: BTreeMap<u64, u64>) -> Self {
        UnaryColoring(map)
    }

    pub fn from_fn(x: &FinSet, f: impl Fn(u64) -> u64) -> Self {
        UnaryColoring(x.iter().map(|e| (e, f(e))).collect())
    }

    pub fn get(&self, x: u64) -> Result<u64> {
        self.0.get(&x).copied().ok_or_else(|| Error::pre(format!("coloring undefined at {x}")))
    }

    pub fn restrict(&self, x: &FinSet) -> Result<UnaryColoring> {
        Ok(UnaryColoring(x.iter().map(|e| self.get(e).map(|c| (e, c))).collect::<Result<_>>()?))
    }

    pub fn colors_of(&self, x: &FinSet) -> Result<BTreeSet<u64>> {
        x.iter().map(|e| self.get(e)).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.0.iter().map(|(&k, &v)| (k, v))
    }
}

#[derive(Debug, Clone)]
pub struct PigeonInstance {
    pub x: FinSet,
    /// Witness for ω^(n+1)·(a, a·k₁, …, a·k_s).
    pub witness: Witness,
    pub n: u32,
    pub a: u64,
    pub ks: Vec<u64>,
    pub coloring: UnaryColoring,
    pub variant: Variant,
    pub policy: SparsityPolicy,
}

impl PigeonInstance {
    pub fn index(&self) -> OrdIndex {
        let mut sigma = vec![self.a];
        sigma.extend(self.ks.iter().map(|k| self.a * k));
        OrdIndex { n: self.n + 1, sigma }
    }

    pub fn target(&self) -> OrdIndex {
        OrdIndex { n: self.n, sigma: self.ks.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Homogeneous {
    pub set: FinSet,
    pub witness: Witness,
    pub color: u64,
}

struct Run<'a> {
    f: &'a UnaryColoring,
    a: u64,
    lazy: bool,
}

impl Run<'_> {
    fn go(&self, w: &Witness, n: u32, ks: &[u64]) -> Result<Homogeneous> {
        if let Some((&k, rest)) = ks.split_last() {
            return self.by_majority(w, n, rest, k);
        }
        if n == 0 {
            let m = w.min().ok_or_else(|| Error::pre("empty witness"))?;
            return Ok(Homogeneous { set: FinSet::singleton(m), witness: Witness::leaf(m), color: self.f.get(m)? });
        }
        self.by_blocks(w, n)
    }

    fn by_majority(&self, w: &Witness, n: u32, rest: &[u64], k: u64) -> Result<Homogeneous> {
        let results: Vec<Result<Homogeneous>> = w.children().par_iter().map(|c| self.go(c, n, rest)).collect();
        let results = results.into_iter().collect::<Result<Vec<_>>>()?;
        let mut count: BTreeMap<u64, u64> = BTreeMap::new();
        for h in &results {
            *count.entry(h.color).or_default() += 1;
        }
        let color = count
            .iter()
            .find(|(_, &c)| c >= k)
            .map(|(&i, _)| i)
            .ok_or_else(|| Error::pre(format!("no color occurs {k} times among {} children", results.len())))?;
        let chosen: Vec<Homogeneous> = results.into_iter().filter(|h| h.color == color).take(k as usize).collect();
        let set = chosen.iter().fold(FinSet::default(), |s, h| s.union(&h.set));
        Ok(Homogeneous { set, witness: Witness::Prod(chosen.into_iter().map(|h| h.witness).collect()), color })
    }

    fn by_blocks(&self, w: &Witness, n: u32) -> Result<Homogeneous> {
        let blocks = w.children();
        let sets: Vec<FinSet> = blocks.iter().map(Witness::carrier).collect();
        let first = self.f.colors_of(&sets[0])?;
        if first.len() == 1 {
            let witness = weaken_witness(&blocks[0], &OrdIndex::omega(n + 1), &OrdIndex::omega(n))?;
            return Ok(Homogeneous { set: sets[0].clone(), witness, color: *first.iter().next().expect("one color") });
        }
        // Largest t whose colors were all seen in earlier blocks.
        let mut seen = first;
        let mut t = None;
        for (j, s) in sets.iter().enumerate().skip(1) {
            let here = self.f.colors_of(s)?;
            if here.is_subset(&seen) {
                t = Some(j);
            }
            seen.extend(here);
        }
        let t = t.ok_or_else(|| Error::pre("every block brings a new color; coloring exceeds the palette"))?;
        let prev_max = sets[t - 1].max().expect("nonempty");
        let Witness::Exp { pivot: p, sub } = &blocks[t] else {
            return Err(Error::Shape("block has no pivot".into()));
        };
        let need = self.a.checked_mul(prev_max).ok_or_else(|| Error::limit("a × max overflows"))?;
        if self.lazy && need >= *p {
            return Err(Error::sparsity(format!(
                "a × max X_{} = {need} is not below min X_{t} = {p}",
                t - 1
            )));
        }
        let mut sigma = vec![self.a];
        sigma.extend(std::iter::repeat(need).take(n as usize));
        let from = OrdIndex::repeated(n, *p, n as usize + 1);
        let to = OrdIndex { n, sigma };
        let inner = weaken_witness(sub, &from, &to).map_err(|e| Error::pre(e.to_string()))?;
        let ks = vec![prev_max; n as usize];
        let y = self.go(&inner, n - 1, &ks)?;
        let c = sets[..t]
            .iter()
            .flat_map(|s| s.iter())
            .find(|&e| self.f.get(e).ok() == Some(y.color))
            .expect("color occurs before t");
        if c == 0 {
            return Err(Error::pre("pivot 0"));
        }
        let body = weaken_witness(&y.witness, &OrdIndex::repeated(n - 1, prev_max, n as usize), &OrdIndex::repeated(n - 1, c, n as usize))?;
        Ok(Homogeneous { set: y.set.union(&FinSet::singleton(c)), witness: Witness::exp(c, body), color: y.color })
    }
}

/// Homogeneous ω^n·(k₁,…,k_s)-large* subset of an ω^(n+1)·(a, a·k₁, …, a·k_s)-large* set.
pub fn pigeonhole_extract(inst: &PigeonInstance) -> Result<Homogeneous> {
    let v = &inst.variant;
    if v.notion() != Notion::Star {
        return Err(Error::pre("pigeonhole extraction works on the star notion"));
    }
    let min = inst.x.min().ok_or_else(|| Error::pre("empty set"))?;
    if inst.a == 0 || inst.a > min {
        return Err(Error::pre(format!("need 1 <= a <= min X, got a = {}, min X = {min}", inst.a)));
    }
    if inst.ks.contains(&0) {
        return Err(Error::pre("components must be >= 1"));
    }
    for e in inst.x.iter() {
        let c = inst.coloring.get(e)?;
        if c >= inst.a {
            return Err(Error::pre(format!("color {c} of {e} is outside 0..{}", inst.a)));
        }
    }
    validate_trace(&inst.witness, &inst.x, &inst.index(), v).map_err(|e| Error::pre(format!("input witness: {e}")))?;
    let lazy = match &inst.policy {
        SparsityPolicy::Lazy => true,
        SparsityPolicy::None => false,
        p => {
            if !check_sparse(&inst.x, p)? {
                return Err(Error::sparsity("input set fails the strict sparsity check"));
            }
            false
        }
    };
    let run = Run { f: &inst.coloring, a: inst.a, lazy };
    let h = run.go(&inst.witness, inst.n, &inst.ks)?;
    if !h.set.is_subset(&inst.x) || inst.coloring.colors_of(&h.set)?.len() != 1 {
        return Err(Error::Invariant("extracted set is not homogeneous inside X".into()));
    }
    validate_trace(&h.witness, &h.set, &inst.target(), v).map_err(|e| Error::Invariant(format!("output witness: {e}")))?;
    Ok(h)
}

/// The two single-color corollaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rt1Form {
    /// Witness for ω^(n+1)·a, colors below `a`.
    Bounded { a: u64 },
    /// Witness for ω^(n+2), colors below min X.
    Min,
}

pub fn rt1_extract(
    x: &FinSet,
    w: &Witness,
    form: Rt1Form,
    n: u32,
    f: &UnaryColoring,
    v: &Variant,
    policy: SparsityPolicy,
) -> Result<Homogeneous> {
    let (x, witness, a) = match form {
        Rt1Form::Bounded { a } => (x.clone(), w.clone(), a),
        Rt1Form::Min => {
            validate_trace(w, x, &OrdIndex::omega(n + 2), v).map_err(|e| Error::pre(format!("input witness: {e}")))?;
            let Witness::Exp { pivot: m, sub } = w else {
                return Err(Error::Shape("expected a pivot node".into()));
            };
            let from = OrdIndex::repeated(n + 1, *m, v.exp_repeats(n + 2));
            let unfolded = weaken_witness(sub, &from, &OrdIndex { n: n + 1, sigma: vec![*m] })?;
            let min = x.min().expect("nonempty");
            (x.without(min), unfolded, min)
        }
    };
    let coloring = f.restrict(&x)?;
    let inst = PigeonInstance { x, witness, n, a, ks: Vec::new(), coloring, variant: v.clone(), policy };
    pigeonhole_extract(&inst)
}
