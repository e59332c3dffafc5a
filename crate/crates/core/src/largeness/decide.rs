//! Exact decider for all three notions.
//!
//! For a start position `i` the table holds the least end position `b` such
//! that some witness has minimum `F[i]` and carrier inside `F[i..=b]`.
//! A block interacts with its neighbours only through its minimum and
//! maximum, and a smaller maximum is never worse (more room to the right,
//! weaker apartness demands on both sides), so the earliest-ending choice at
//! every step of a product chain is optimal.

use std::collections::HashMap;

use super::{Config, FinSet, OrdIndex, Variant, Witness};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Complete search.
    Exact,
    /// Consecutive blocks only; may miss witnesses under apartness.
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    Large(Witness),
    NotLarge,
    /// Greedy search found nothing; the set may still be large.
    Inconclusive,
}

impl Decision {
    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Decision::Large(w) => Some(w),
            _ => None,
        }
    }

    pub fn into_witness(self) -> Option<Witness> {
        match self {
            Decision::Large(w) => Some(w),
            _ => None,
        }
    }

    pub fn is_large(&self) -> bool {
        matches!(self, Decision::Large(_))
    }
}

struct Dp<'a> {
    a: &'a [u64],
    v: &'a Variant,
    exact: bool,
    ids: HashMap<(u32, Vec<u64>), usize>,
    keys: Vec<(u32, Vec<u64>)>,
    starts: Vec<Vec<Option<Option<usize>>>>,
    budget: u64,
}

impl<'a> Dp<'a> {
    fn new(a: &'a [u64], v: &'a Variant, exact: bool, budget: u64) -> Self {
        Dp { a, v, exact, ids: HashMap::new(), keys: Vec::new(), starts: Vec::new(), budget }
    }

    fn id(&mut self, n: u32, sigma: Vec<u64>) -> usize {
        if let Some(&i) = self.ids.get(&(n, sigma.clone())) {
            return i;
        }
        let i = self.keys.len();
        self.ids.insert((n, sigma.clone()), i);
        self.keys.push((n, sigma));
        self.starts.push(Vec::new());
        i
    }

    fn tick(&mut self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::limit("decider node budget exhausted"));
        }
        self.budget -= 1;
        Ok(())
    }

    fn child_id(&mut self, id: usize) -> Option<usize> {
        let (n, sigma) = self.keys[id].clone();
        let (_, rest) = sigma.split_last()?;
        Some(self.id(n, rest.to_vec()))
    }

    fn sub_id(&mut self, id: usize, pivot: u64) -> usize {
        let n = self.keys[id].0;
        let reps = self.v.exp_repeats(n);
        self.id(n - 1, vec![pivot; reps])
    }

    /// Least end for a witness starting exactly at `i`.
    fn start(&mut self, id: usize, i: usize) -> Result<Option<usize>> {
        if i >= self.a.len() {
            return Ok(None);
        }
        if self.starts[id].is_empty() {
            self.starts[id] = vec![None; self.a.len()];
        }
        if let Some(r) = self.starts[id][i] {
            return Ok(r);
        }
        self.tick()?;
        let (n, sigma) = (self.keys[id].0, self.keys[id].1.len());
        let r = if sigma > 0 {
            self.chain(id, i)?.map(|starts| starts.1)
        } else if n == 0 {
            Some(i)
        } else {
            let m = self.a[i];
            if m == 0 {
                None
            } else {
                let sub = self.sub_id(id, m);
                if self.exact {
                    self.earliest_from(sub, i + 1)?
                } else {
                    self.start(sub, i + 1)?
                }
            }
        };
        self.starts[id][i] = Some(r);
        Ok(r)
    }

    /// Least end over all starts ≥ i. A witness starting later can always be
    /// moved to start at `i` without ending later (weaken the pivot, shrink
    /// the first block; apartness only gets easier), so this is `start(i)`.
    /// The exception is a pivot at 0, which only the first element can be.
    fn earliest_from(&mut self, id: usize, i: usize) -> Result<Option<usize>> {
        match self.start(id, i)? {
            None if self.a.get(i) == Some(&0) => self.start(id, i + 1),
            r => Ok(r),
        }
    }

    /// Block starts of the outermost product beginning at `i`, and its end.
    fn chain(&mut self, id: usize, i: usize) -> Result<Option<(Vec<usize>, usize)>> {
        let k = *self.keys[id].1.last().expect("product index");
        let child = self.child_id(id).expect("product index");
        let Some(mut end) = self.start(child, i)? else {
            return Ok(None);
        };
        let mut starts = vec![i];
        for _ in 1..k {
            let mut best: Option<(usize, usize)> = None;
            let mut j = end + 1;
            let limit = if self.exact { self.a.len() } else { (end + 2).min(self.a.len()) };
            while j < limit && best.map_or(true, |(_, b)| j <= b) {
                self.tick()?;
                if let Some(e) = self.start(child, j)? {
                    if best.map_or(true, |(_, b)| e < b) && self.v.apart(self.a[end], self.a[j], self.a[e])? {
                        best = Some((j, e));
                    }
                }
                j += 1;
            }
            match best {
                Some((s, e)) => {
                    starts.push(s);
                    end = e;
                }
                None => return Ok(None),
            }
        }
        Ok(Some((starts, end)))
    }

    fn build(&mut self, id: usize, i: usize) -> Result<Witness> {
        let (n, sigma) = self.keys[id].clone();
        if !sigma.is_empty() {
            let (starts, _) = self.chain(id, i)?.expect("reconstruct a feasible chain");
            let child = self.child_id(id).expect("product index");
            let mut children = Vec::with_capacity(starts.len());
            for s in starts {
                children.push(self.build(child, s)?);
            }
            return Ok(Witness::Prod(children));
        }
        if n == 0 {
            return Ok(Witness::leaf(self.a[i]));
        }
        let m = self.a[i];
        let sub = self.sub_id(id, m);
        let j = if self.exact { self.first_optimal_start(sub, i + 1)? } else { i + 1 };
        Ok(Witness::exp(m, self.build(sub, j)?))
    }

    fn first_optimal_start(&mut self, id: usize, i: usize) -> Result<usize> {
        let target = self.earliest_from(id, i)?;
        let mut j = i;
        while j < self.a.len() {
            if self.start(id, j)? == target {
                return Ok(j);
            }
            j += 1;
        }
        unreachable!("optimal start exists when earliest_from is feasible")
    }
}

/// Decides idx-largeness of `f` and returns a witness when one exists.
pub fn check_large(f: &FinSet, idx: &OrdIndex, v: &Variant, mode: Mode) -> Result<Decision> {
    check_large_with(f, idx, v, mode, &Config::default())
}

pub fn check_large_with(f: &FinSet, idx: &OrdIndex, v: &Variant, mode: Mode, cfg: &Config) -> Result<Decision> {
    cfg.check_convention(f)?;
    if f.is_empty() {
        return Ok(Decision::NotLarge);
    }
    if idx.n == 0 && idx.sigma.is_empty() {
        return Ok(Decision::Large(Witness::Leaf(f.clone())));
    }
    // Greedy is already exact when there is no apartness to satisfy.
    let exact = mode == Mode::Exact || matches!(v, Variant::Ks);
    let mut dp = Dp::new(f.elems(), v, exact, cfg.node_budget);
    let top = dp.id(idx.n, idx.sigma.clone());
    let found = if exact { dp.earliest_from(top, 0)? } else { dp.start(top, 0)? };
    match found {
        Some(_) => {
            let j = if exact { dp.first_optimal_start(top, 0)? } else { 0 };
            Ok(Decision::Large(dp.build(top, j)?))
        }
        None if exact => Ok(Decision::NotLarge),
        None => Ok(Decision::Inconclusive),
    }
}

/// Plain largeness by minimal initial segments.
pub fn check_ks_large(f: &FinSet, idx: &OrdIndex) -> bool {
    let cfg = Config { node_budget: u64::MAX, ..Config::default() };
    matches!(check_large_with(f, idx, &Variant::Ks, Mode::Exact, &cfg), Ok(Decision::Large(_)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Theta;
    use crate::largeness::validate_witness;

    #[test]
    fn ks_examples() {
        assert!(check_ks_large(&FinSet::range(3, 6), &OrdIndex::omega(1)));
        assert!(!check_ks_large(&FinSet::range(3, 5), &OrdIndex::omega(1)));
        assert!(check_ks_large(&FinSet::singleton(5), &OrdIndex::omega(0)));
        let two = OrdIndex { n: 1, sigma: vec![2] };
        assert!(!check_ks_large(&FinSet::range(3, 6), &two));
        assert!(check_ks_large(&FinSet::range(3, 14), &two));
        assert!(!check_ks_large(&FinSet::range(3, 13), &two));
    }

    #[test]
    fn star_examples() {
        let v = Variant::star(Theta::trivial());
        let d = check_large(&FinSet::range(3, 6), &OrdIndex::omega(1), &v, Mode::Exact).unwrap();
        let expect = Witness::exp(3, Witness::Prod(vec![Witness::leaf(4), Witness::leaf(5), Witness::leaf(6)]));
        assert_eq!(d, Decision::Large(expect));
        let d = check_large(&FinSet::range(3, 5), &OrdIndex::omega(1), &v, Mode::Exact).unwrap();
        assert_eq!(d, Decision::NotLarge);
        let f = FinSet::new(vec![4, 9]);
        assert_eq!(check_large(&f, &OrdIndex::omega(0), &v, Mode::Exact).unwrap(), Decision::Large(Witness::Leaf(f)));
    }

    #[test]
    fn star_omega_two_minimal_set() {
        // {2} followed by four ω-large* blocks with minima 3, 7, 15, 31.
        let v = Variant::star(Theta::trivial());
        let f = FinSet::range(2, 62);
        let w = check_large(&f, &OrdIndex::omega(2), &v, Mode::Exact).unwrap().into_witness().unwrap();
        assert!(validate_witness(&w, &f, &OrdIndex::omega(2), &v));
        assert_eq!(w.max(), Some(62));
        assert!(!check_large(&FinSet::range(2, 61), &OrdIndex::omega(2), &v, Mode::Exact).unwrap().is_large());
    }

    #[test]
    fn exact_beats_greedy_under_apartness() {
        let v = Variant::theta(Theta::parse("y*y > x*z").unwrap());
        let f = FinSet::new(vec![3, 4, 10, 30, 40]);
        let idx = OrdIndex { n: 0, sigma: vec![2] };
        let g = check_large(&FinSet::new(vec![3, 4, 5, 9]), &idx, &v, Mode::Greedy).unwrap();
        assert!(g.is_large());
        let e = check_large(&f, &idx, &v, Mode::Exact).unwrap();
        let w = e.into_witness().unwrap();
        assert!(validate_witness(&w, &f, &idx, &v));
    }

    #[test]
    fn budget_is_enforced() {
        let cfg = Config { node_budget: 3, ..Config::default() };
        let r = check_large_with(&FinSet::range(3, 40), &OrdIndex::omega(2), &Variant::Ks, Mode::Exact, &cfg);
        assert!(matches!(r, Err(Error::ResourceLimit(_))));
    }
}
