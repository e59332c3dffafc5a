use super::coloring::{binom, combinations, Coloring};
use super::Statement;
use crate::error::{Error, Result};
use crate::largeness::{check_large, FinSet, Mode, OrdIndex, Variant};
use crate::milliken::find_bad_coloring;
use crate::par::prelude::*;

/// Default bound on the number of colorings `check_p_large` enumerates.
pub const P_LARGE_CAP: u128 = 1 << 28;

const MAX_ORACLE_SET: usize = 16;

pub fn check_p_large(f: &FinSet, st: &Statement, idx: &OrdIndex, v: &Variant) -> Result<bool> {
    check_p_large_with(f, st, idx, v, P_LARGE_CAP)
}

/// Every admissible coloring of `f` has an `idx`-large subset with the
/// statement's property. Only inclusion-minimal large subsets are tried,
/// since the properties are closed under subsets.
pub fn check_p_large_with(f: &FinSet, st: &Statement, idx: &OrdIndex, v: &Variant, cap: u128) -> Result<bool> {
    let m = f.len();
    if m > MAX_ORACLE_SET {
        return Err(Error::limit(format!("{m} elements is too many to enumerate subsets")));
    }
    let e = f.elems();
    let subset = |mask: u32| FinSet::new((0..m).filter(|i| mask >> i & 1 == 1).map(|i| e[i]).collect());
    let large: Vec<bool> = (0u32..1 << m)
        .into_par_iter()
        .map(|mask| Ok(mask != 0 && check_large(&subset(mask), idx, v, Mode::Exact)?.is_large()))
        .collect::<Result<_>>()?;
    let minimal: Vec<u32> = (0u32..1 << m)
        .filter(|&s| large[s as usize] && (0..m).all(|i| s >> i & 1 == 0 || !large[(s & !(1 << i)) as usize]))
        .collect();
    if minimal.is_empty() {
        return Ok(false);
    }
    match *st {
        Statement::Rt { n, k } => all_colorings(m, n as usize, k, cap, |col| minimal.iter().any(|&s| homogeneous(col, s, n as usize, m))),
        Statement::Rt1 => {
            let top = f.min().expect("nonempty");
            for k in 1..=top {
                if !all_colorings(m, 1, k, cap, |col| minimal.iter().any(|&s| homogeneous(col, s, 1, m)))? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Statement::Em => all_colorings(m, 2, 2, cap, |col| minimal.iter().any(|&s| transitive(col, s, m))),
        Statement::Ads => all_colorings(m, 2, 2, cap, |col| {
            !transitive(col, (1 << m) - 1, m) || minimal.iter().any(|&s| homogeneous(col, s, 2, m))
        }),
    }
}

/// Runs `ok` on every `k`-coloring of the `r`-subsets of `0..m`, in parallel.
fn all_colorings(m: usize, r: usize, k: u64, cap: u128, ok: impl Fn(&[u8]) -> bool + Sync) -> Result<bool> {
    if r == 0 || k == 0 || k > 255 {
        return Err(Error::pre("need 1 <= colors <= 255 and positive arity"));
    }
    let slots = binom(m as u64, r as u64);
    let total = u32::try_from(slots).ok().and_then(|s| (k as u128).checked_pow(s)).filter(|&t| t <= cap);
    let Some(total) = total else {
        return Err(Error::limit(format!("{k}^{slots} colorings exceed the cap {cap}")));
    };
    let slots = slots as usize;
    Ok((0..total as u64).into_par_iter().all(|mut code| {
        let mut col = vec![0u8; slots];
        for c in col.iter_mut() {
            *c = (code % k) as u8;
            code /= k;
        }
        ok(&col)
    }))
}

fn positions(mask: u32, m: usize) -> Vec<usize> {
    (0..m).filter(|i| mask >> i & 1 == 1).collect()
}

fn slot(pos: &[usize]) -> usize {
    pos.iter().enumerate().map(|(i, &p)| binom(p as u64, i as u64 + 1) as usize).sum()
}

fn homogeneous(col: &[u8], mask: u32, r: usize, m: usize) -> bool {
    let p = positions(mask, m);
    let mut first = None;
    combinations(p.len(), r).all(|c| {
        let t: Vec<usize> = c.iter().map(|&i| p[i]).collect();
        let x = col[slot(&t)];
        *first.get_or_insert(x) == x
    })
}

fn transitive(col: &[u8], mask: u32, m: usize) -> bool {
    let p = positions(mask, m);
    let c = |a: usize, b: usize| col[a + b * (b - 1) / 2];
    for (i, &a) in p.iter().enumerate() {
        for (j, &b) in p.iter().enumerate().skip(i + 1) {
            for &d in &p[j + 1..] {
                if c(a, b) == c(b, d) && c(a, d) != c(a, b) {
                    return false;
                }
            }
        }
    }
    true
}

/// A `k`-coloring of the pairs of `{0, …, r−1}` with no homogeneous
/// `d`-subset, if one exists.
pub fn ramsey_counterexample(k: u64, d: usize, r: usize, budget: u64) -> Result<Option<Coloring>> {
    if k == 0 {
        return Err(Error::pre("need at least one color"));
    }
    let vars = binom(r as u64, 2) as usize;
    let constraints: Vec<Vec<Vec<usize>>> = if d < 2 {
        // a set of size d ≤ 1 is homogeneous as soon as it fits
        if d <= r {
            vec![Vec::new()]
        } else {
            Vec::new()
        }
    } else {
        combinations(r, d).map(|s| vec![combinations(d, 2).map(|c| slot(&[s[c[0]], s[c[1]]])).collect()]).collect()
    };
    let found = find_bad_coloring(vars, k, &constraints, budget)?;
    found
        .map(|col| Coloring::pairs(k, FinSet::new((0..r as u64).collect()), |a, b| col[slot(&[a as usize, b as usize])]))
        .transpose()
}

/// Least R ≤ `cap` such that every `k`-coloring of pairs of an R-set has a
/// homogeneous `d`-subset.
pub fn ramsey_number(k: u64, d: usize, cap: usize, budget: u64) -> Result<usize> {
    for r in 0..=cap {
        if ramsey_counterexample(k, d, r, budget)?.is_none() {
            return Ok(r);
        }
    }
    Err(Error::limit(format!("R_{k}({d}) exceeds {cap}")))
}
