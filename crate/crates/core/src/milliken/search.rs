use std::collections::HashMap;

use super::forest::{validate_selector, Node, Selector, StrongForest, Subforests};
use crate::error::{Error, Result};
use crate::par::prelude::*;

/// A coloring of subforests, read in the parent's index space.
pub type SubforestColoring<'a> = dyn Fn(&Selector) -> u64 + Sync + 'a;

/// Caps for the exhaustive searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest collection a search may materialize or scan.
    pub enum_cap: u128,
    /// Backtracking nodes a search may expand.
    pub node_budget: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { enum_cap: 2_000_000, node_budget: 20_000_000 }
    }
}

const CHUNK: usize = 256;

/// True if every height-`k` subforest of `s` gets the same color.
pub fn is_monochromatic(s: &Selector, c: &SubforestColoring, k: u32, leaves_only: bool) -> bool {
    let mut first = None;
    Subforests::new(s.d(), s.height(), k, leaves_only).all(|r| {
        let col = c(&s.compose(&r));
        *first.get_or_insert(col) == col
    })
}

/// Least height-`l` subforest (in stream order) whose height-`k`
/// subforests are `c`-monochromatic. `cap` bounds the candidates examined.
pub fn monochromatize(
    sf: &StrongForest,
    c: &SubforestColoring,
    l: u32,
    k: u32,
    leaves_only: bool,
    cap: u128,
) -> Result<Option<Selector>> {
    if k > l || l > sf.height() {
        return Err(Error::pre(format!("need k <= l <= height, got k={k} l={l} height={}", sf.height())));
    }
    let inner: Vec<Selector> = Subforests::new(sf.d(), l, k, leaves_only).collect();
    let mono = |s: &Selector| {
        let mut cols = inner.iter().map(|r| c(&s.compose(r)));
        let first = cols.next();
        cols.all(|x| Some(x) == first)
    };
    let mut seen: u128 = 0;
    let mut it = Subforests::new(sf.d(), sf.height(), l, leaves_only);
    loop {
        let chunk: Vec<Selector> = it.by_ref().take(CHUNK).collect();
        if chunk.is_empty() {
            return Ok(None);
        }
        seen += chunk.len() as u128;
        let hits: Vec<bool> = chunk.par_iter().map(mono).collect();
        if let Some(i) = hits.iter().position(|&h| h) {
            let s = chunk[i].clone();
            if !validate_selector(sf, &s, leaves_only) || !is_monochromatic(&s, c, k, leaves_only) {
                return Err(Error::Invariant("monochromatic candidate failed its recheck".into()));
            }
            return Ok(Some(s));
        }
        if seen >= cap {
            return Err(Error::limit(format!("examined {seen} candidates without a monochromatic one")));
        }
    }
}

/// Extends every leaf of `r` along its leftmost path to the leaf level.
pub fn hat_extend(sf: &StrongForest, r: &Selector) -> Result<Selector> {
    if !validate_selector(sf, r, false) {
        return Err(Error::pre("selector is not a strong subforest of the parent"));
    }
    let h = sf.height();
    let k = r.height();
    let mut levels = r.levels().to_vec();
    let top = levels[k as usize];
    levels[k as usize] = h;
    let pad = Node::new(h - top, 0)?;
    let first_leaf = Node::all(k).next().expect("nonempty level").id();
    let nodes = (0..r.d())
        .map(|i| {
            let t = r.tree(i);
            t.iter().enumerate().map(|(id, &x)| if id >= first_leaf { x.append(pad) } else { x }).collect()
        })
        .collect();
    let out = Selector::new(levels, nodes);
    if !validate_selector(sf, &out, true) {
        return Err(Error::Invariant("extended selector does not validate".into()));
    }
    Ok(out)
}

/// Searches for an `r`-coloring of `vars` variables such that no
/// constraint is satisfied, where a constraint is a list of groups and is
/// satisfied when each group is monochromatic. Colors are assigned in
/// order with the usual value-symmetry break.
pub(crate) fn exists_bad_coloring(vars: usize, r: u64, constraints: &[Vec<Vec<usize>>], budget: u64) -> Result<bool> {
    Ok(find_bad_coloring(vars, r, constraints, budget)?.is_some())
}

/// The first bad coloring in search order, if any.
pub(crate) fn find_bad_coloring(
    vars: usize,
    r: u64,
    constraints: &[Vec<Vec<usize>>],
    budget: u64,
) -> Result<Option<Vec<u64>>> {
    if r == 0 {
        return Ok((vars == 0 && constraints.is_empty()).then(Vec::new));
    }
    let mut due: Vec<Vec<usize>> = vec![Vec::new(); vars];
    for (ci, groups) in constraints.iter().enumerate() {
        match groups.iter().flatten().max() {
            Some(&v) => due[v].push(ci),
            // nothing to color: always satisfied
            None => return Ok(None),
        }
    }
    let satisfied = |col: &[u64], ci: usize| {
        constraints[ci].iter().all(|g| g.iter().all(|&v| col[v] == col[g[0]]))
    };
    let mut col = vec![0u64; vars];
    let mut used = vec![0u64; vars + 1];
    let mut spent = 0u64;
    let mut v = 0usize;
    let mut fresh = true;
    loop {
        if v == vars {
            return Ok(Some(col));
        }
        if fresh {
            col[v] = 0;
        } else {
            col[v] += 1;
        }
        let limit = (used[v] + 1).min(r);
        if col[v] >= limit {
            if v == 0 {
                return Ok(None);
            }
            v -= 1;
            fresh = false;
            continue;
        }
        spent += 1;
        if spent > budget {
            return Err(Error::limit("coloring search budget exhausted"));
        }
        if due[v].iter().any(|&ci| satisfied(&col, ci)) {
            fresh = false;
            continue;
        }
        used[v + 1] = used[v].max(col[v] + 1);
        v += 1;
        fresh = true;
    }
}

/// Least N ≤ `cap` such that every `r`-coloring of Str_k of the full
/// binary strong `d`-forest of height N admits a height-`l` subforest with
/// Str_k monochromatic.
pub fn milliken_number_search(d: usize, l: u32, k: u32, r: u64, cap: u32, limits: &Limits) -> Result<Option<u32>> {
    if k > l || d == 0 || r == 0 {
        return Err(Error::pre(format!("need d >= 1, r >= 1, k <= l; got d={d} l={l} k={k} r={r}")));
    }
    for n in l..=cap {
        if mil_holds(d, l, k, r, n, limits)? {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

fn mil_holds(d: usize, l: u32, k: u32, r: u64, n: u32, limits: &Limits) -> Result<bool> {
    if r == 1 {
        return Ok(true);
    }
    let elems = Subforests::new(d, n, k, false);
    let outer = Subforests::new(d, n, l, false);
    if elems.count_total() > limits.enum_cap || outer.count_total() > limits.enum_cap {
        return Err(Error::limit(format!("height {n}: too many subforests to scan")));
    }
    let index: HashMap<Selector, usize> = elems.enumerate().map(|(i, s)| (s, i)).collect();
    let inner: Vec<Selector> = Subforests::new(d, l, k, false).collect();
    let outer: Vec<Selector> = outer.collect();
    let constraints: Vec<Vec<Vec<usize>>> =
        outer.par_iter().map(|s| vec![inner.iter().map(|q| index[&s.compose(q)]).collect()]).collect();
    Ok(!exists_bad_coloring(index.len(), r, &constraints, limits.node_budget)?)
}
