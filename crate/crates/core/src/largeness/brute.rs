//! Reference oracle: recursion over subsets of F straight from the
//! definitions, with no ordering heuristics. Exponential; small F only.

use std::collections::HashMap;

use super::{Config, FinSet, OrdIndex, Variant, Witness};
use crate::error::{Error, Result};

struct Oracle<'a> {
    a: &'a [u64],
    v: &'a Variant,
    exact: HashMap<(u32, u32, Vec<u64>), bool>,
    chains: HashMap<(u32, u32, Vec<u64>, u64, Option<u64>), bool>,
}

fn lowest(mask: u32) -> usize {
    mask.trailing_zeros() as usize
}

fn highest(mask: u32) -> usize {
    31 - mask.leading_zeros() as usize
}

impl<'a> Oracle<'a> {
    /// Is there a witness whose carrier is exactly `mask`?
    fn exactly(&mut self, mask: u32, n: u32, sigma: &[u64]) -> Result<bool> {
        if mask == 0 {
            return Ok(false);
        }
        let key = (mask, n, sigma.to_vec());
        if let Some(&r) = self.exact.get(&key) {
            return Ok(r);
        }
        let r = if let Some((&k, rest)) = sigma.split_last() {
            self.partition(mask, n, rest, k, None)?
        } else if n == 0 {
            true
        } else {
            let low = lowest(mask);
            let m = self.a[low];
            let rest = mask & !(1 << low);
            m > 0 && self.exactly(rest, n - 1, &vec![m; self.v.exp_repeats(n)])?
        };
        self.exact.insert(key, r);
        Ok(r)
    }

    /// Can `mask` be cut into `k` consecutive runs, each exactly large for
    /// (n, sigma), consecutive runs apart, the first apart from `prev_max`?
    fn partition(&mut self, mask: u32, n: u32, sigma: &[u64], k: u64, prev_max: Option<u64>) -> Result<bool> {
        if k == 0 {
            return Ok(mask == 0);
        }
        if mask == 0 || (mask.count_ones() as u64) < k {
            return Ok(false);
        }
        let key = (mask, n, sigma.to_vec(), k, prev_max);
        if let Some(&r) = self.chains.get(&key) {
            return Ok(r);
        }
        let mut r = false;
        let mut block = 0u32;
        let mut rest = mask;
        while rest != 0 {
            let low = lowest(rest);
            block |= 1 << low;
            rest &= !(1 << low);
            let lo = self.a[lowest(block)];
            let hi = self.a[highest(block)];
            if let Some(p) = prev_max {
                if !self.v.apart(p, lo, hi)? {
                    continue;
                }
            }
            if self.exactly(block, n, sigma)? && self.partition(rest, n, sigma, k - 1, Some(hi))? {
                r = true;
                break;
            }
        }
        self.chains.insert(key, r);
        Ok(r)
    }

    fn build(&mut self, mask: u32, n: u32, sigma: &[u64]) -> Result<Witness> {
        if let Some((&k, rest)) = sigma.split_last() {
            let mut children = Vec::new();
            self.build_partition(mask, n, rest, k, None, &mut children)?;
            return Ok(Witness::Prod(children));
        }
        if n == 0 {
            let elems: Vec<u64> = (0..32).filter(|i| mask & (1 << i) != 0).map(|i| self.a[i]).collect();
            return Ok(Witness::Leaf(FinSet::new(elems)));
        }
        let low = lowest(mask);
        let m = self.a[low];
        let sub = self.build(mask & !(1 << low), n - 1, &vec![m; self.v.exp_repeats(n)])?;
        Ok(Witness::exp(m, sub))
    }

    fn build_partition(
        &mut self,
        mask: u32,
        n: u32,
        sigma: &[u64],
        k: u64,
        prev_max: Option<u64>,
        out: &mut Vec<Witness>,
    ) -> Result<()> {
        if k == 0 {
            return Ok(());
        }
        let mut block = 0u32;
        let mut rest = mask;
        while rest != 0 {
            let low = lowest(rest);
            block |= 1 << low;
            rest &= !(1 << low);
            let lo = self.a[lowest(block)];
            let hi = self.a[highest(block)];
            if let Some(p) = prev_max {
                if !self.v.apart(p, lo, hi)? {
                    continue;
                }
            }
            if self.exactly(block, n, sigma)? && self.partition(rest, n, sigma, k - 1, Some(hi))? {
                out.push(self.build(block, n, sigma)?);
                return self.build_partition(rest, n, sigma, k - 1, Some(hi), out);
            }
        }
        unreachable!("partition reported feasible")
    }
}

/// Exhaustive oracle; `|F|` must not exceed the configured cap.
pub fn brute_force_large(f: &FinSet, idx: &OrdIndex, v: &Variant) -> Result<Option<Witness>> {
    brute_force_large_with(f, idx, v, &Config::default())
}

pub fn brute_force_large_with(f: &FinSet, idx: &OrdIndex, v: &Variant, cfg: &Config) -> Result<Option<Witness>> {
    let cap = cfg.oracle_cap.min(31);
    if f.len() > cap {
        return Err(Error::limit(format!("oracle accepts at most {cap} elements, got {}", f.len())));
    }
    let mut o = Oracle { a: f.elems(), v, exact: HashMap::new(), chains: HashMap::new() };
    let full: u32 = if f.is_empty() { 0 } else { (1u32 << f.len()) - 1 };
    // Enumerate carriers in increasing numeric order of the mask.
    let mut mask = 1u32;
    while mask <= full && full != 0 {
        if o.exactly(mask, idx.n, &idx.sigma)? {
            return Ok(Some(o.build(mask, idx.n, &idx.sigma)?));
        }
        mask += 1;
    }
    Ok(None)
}
