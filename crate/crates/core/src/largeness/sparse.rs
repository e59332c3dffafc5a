use std::collections::BTreeMap;

use num_bigint::BigUint;

use super::{check_ks_large, FinSet, OrdIndex};
use crate::error::{Error, Result};

/// Growth functions for pairwise sparsity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Growth {
    /// x ↦ 4^x
    Exp4,
    /// x ↦ 2·x^(x²)
    Poly,
    /// Explicit values; a missing entry is an error.
    Custom(BTreeMap<u64, BigUint>),
}

impl Growth {
    pub fn eval(&self, x: u64) -> Result<BigUint> {
        match self {
            Growth::Exp4 => Ok(BigUint::from(4u32).pow(u32::try_from(x).map_err(|_| Error::limit("exponent too large"))?)),
            Growth::Poly => {
                let e = x.checked_mul(x).and_then(|e| u32::try_from(e).ok()).ok_or_else(|| Error::limit("exponent too large"))?;
                Ok(BigUint::from(2u32) * BigUint::from(x).pow(e))
            }
            Growth::Custom(t) => t.get(&x).cloned().ok_or_else(|| Error::Policy(format!("custom growth has no value at {x}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SparsityPolicy {
    /// Every consecutive x < y has y > g(x).
    Strict(Growth),
    /// Every gap (x, y] is ω^n-large.
    Omega(u32),
    /// Only the inequalities a procedure consumes are checked, where it consumes them.
    Lazy,
    None,
}

/// Pairwise sparsity test; consecutive pairs suffice for every supported
/// policy because the growth functions are increasing and gaps nest.
pub fn check_sparse(f: &FinSet, policy: &SparsityPolicy) -> Result<bool> {
    let e = f.elems();
    match policy {
        SparsityPolicy::Lazy => Err(Error::Policy("lazy sparsity is not a pairwise predicate".into())),
        SparsityPolicy::None => Ok(true),
        SparsityPolicy::Strict(g) => {
            for w in e.windows(2) {
                if BigUint::from(w[1]) <= g.eval(w[0])? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        SparsityPolicy::Omega(n) => {
            let idx = OrdIndex::omega(*n);
            Ok(e.windows(2).all(|w| check_ks_large(&FinSet::range(w[0] + 1, w[1]), &idx)))
        }
    }
}
