use std::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use super::Statement;
use crate::error::{Error, Result};
use crate::largeness::{Notion, OrdIndex};

/// `ω^exponent·(sigma)` with an exponent of any size.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoundIndex {
    pub exponent: BigUint,
    pub sigma: Vec<u64>,
}

impl BoundIndex {
    fn new(exponent: BigUint, sigma: Vec<u64>) -> Self {
        BoundIndex { exponent, sigma }
    }

    /// The same index as an `OrdIndex`, when the exponent fits.
    pub fn to_index(&self) -> Result<OrdIndex> {
        let n = self.exponent.to_u32().ok_or_else(|| Error::limit(format!("exponent {} does not fit", self.exponent)))?;
        OrdIndex::new(n, self.sigma.clone())
    }
}

impl fmt::Display for BoundIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w^{}", self.exponent)?;
        if !self.sigma.is_empty() {
            let parts: Vec<String> = self.sigma.iter().map(u64::to_string).collect();
            write!(f, "*({})", parts.join(","))?;
        }
        Ok(())
    }
}

// largest n for the rows whose exponent is a power in n
const MAX_POWER_N: u32 = 4096;

/// The first tabulated upper bound for the statement and notion.
pub fn paper_bound(st: &Statement, n: u32, notion: Notion) -> Result<BoundIndex> {
    Ok(paper_bounds(st, n, notion)?.swap_remove(0))
}

/// Every tabulated upper bound, in table order.
pub fn paper_bounds(st: &Statement, n: u32, notion: Notion) -> Result<Vec<BoundIndex>> {
    let big = BigUint::from(n);
    let lin = |a: u32, b: u32| BigUint::from(a) * &big + BigUint::from(b);
    let quad = |a: u32, b: u32, c: u32| BigUint::from(a) * &big * &big + BigUint::from(b) * &big + BigUint::from(c);
    let power = |e: BigUint| -> Result<BigUint> {
        if n > MAX_POWER_N {
            return Err(Error::limit(format!("n = {n} is past {MAX_POWER_N} for a power-type bound")));
        }
        let base = BigUint::from(16u32).pow(6) + 1u32;
        Ok(base.pow(e.to_u32().expect("bounded by MAX_POWER_N")))
    };
    let plain = |e: BigUint| BoundIndex::new(e, Vec::new());
    let times = |e: BigUint, k: u64| BoundIndex::new(e, vec![k]);
    use Notion::*;
    let out = match (st, notion) {
        (Statement::Rt { n: 1, k: 2 }, Ks) => vec![times(lin(1, 0), 2)],
        (Statement::Rt { n: 1, k: 2 }, Theta) => vec![plain(lin(2, 0))],
        (Statement::Rt { n: 1, k: 2 }, Star) => vec![times(lin(1, 1), 2)],
        (Statement::Rt1, Ks) => vec![plain(lin(1, 1))],
        (Statement::Rt1, Theta) => vec![plain(lin(2, 0))],
        (Statement::Rt1, Star) => vec![plain(lin(1, 2))],
        (Statement::Em, Ks) => vec![plain(lin(36, 0)), times(lin(1, 0), 2)],
        (Statement::Em, Theta) => vec![plain(power(big.clone())?)],
        (Statement::Em, Star) => vec![plain(lin(6, 0))],
        (Statement::Ads, Ks) => vec![plain(lin(4, 4)), times(lin(2, 0), 2)],
        (Statement::Ads, Theta) => vec![plain(lin(4, 4))],
        (Statement::Ads, Star) => vec![times(quad(2, 2, 0), 2)],
        (Statement::Rt { n: 2, k: 2 }, Ks) => vec![plain(lin(144, 144)), times(lin(2, 0), 4)],
        (Statement::Rt { n: 2, k: 2 }, Theta) => vec![plain(power(lin(4, 4))?)],
        (Statement::Rt { n: 2, k: 2 }, Star) => vec![plain(quad(12, 12, 6))],
        _ => return Err(Error::NotTabulated(format!("{st} / {notion}"))),
    };
    Ok(out)
}

/// Exponent of the product-tree bound for pair colorings once the sparsity
/// requirement is absorbed: `12n² + 12n + 6 + k0`. The constant `k0` is
/// left to the caller.
pub fn rt22_polynomial_exponent(n: u32, k0: u64) -> BigUint {
    let n = BigUint::from(n);
    BigUint::from(12u32) * &n * &n + BigUint::from(12u32) * &n + BigUint::from(6u32) + BigUint::from(k0)
}
