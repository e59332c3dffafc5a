use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::largeness::FinSet;

/// Largest table a coloring may hold.
pub const MAX_TABLE: u128 = 50_000_000;

pub(crate) fn binom(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Position tuples `p₀ < … < p_{r−1}` over `0..n`, lex order.
pub(crate) fn combinations(n: usize, r: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut cur: Option<Vec<usize>> = if r <= n { Some((0..r).collect()) } else { None };
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let mut next = out.clone();
        let mut i = r;
        loop {
            if i == 0 {
                cur = None;
                break;
            }
            i -= 1;
            if next[i] < n - r + i {
                next[i] += 1;
                for j in i + 1..r {
                    next[j] = next[j - 1] + 1;
                }
                cur = Some(next);
                break;
            }
        }
        Some(out)
    })
}

fn rank(pos: &[usize]) -> usize {
    pos.iter().enumerate().map(|(i, &p)| binom(p as u64, i as u64 + 1) as usize).sum()
}

/// A total coloring of the `arity`-subsets of a finite carrier.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coloring {
    arity: usize,
    colors: u64,
    carrier: FinSet,
    // indexed by the colex rank of the position tuple
    values: Vec<u64>,
}

impl Coloring {
    pub fn from_fn(arity: usize, colors: u64, carrier: FinSet, f: impl Fn(&[u64]) -> u64) -> Result<Self> {
        if arity == 0 || colors == 0 {
            return Err(Error::pre("arity and colors must be positive"));
        }
        let size = binom(carrier.len() as u64, arity as u64);
        if size > MAX_TABLE {
            return Err(Error::limit(format!("{size} subsets to color")));
        }
        let mut values = vec![0; size as usize];
        let e = carrier.elems();
        let mut tuple = vec![0u64; arity];
        for pos in combinations(e.len(), arity) {
            for (t, &p) in tuple.iter_mut().zip(&pos) {
                *t = e[p];
            }
            let c = f(&tuple);
            if c >= colors {
                return Err(Error::pre(format!("color {c} at {tuple:?} is not below {colors}")));
            }
            values[rank(&pos)] = c;
        }
        Ok(Coloring { arity, colors, carrier, values })
    }

    /// Pair coloring from a closure called with `x < y`.
    pub fn pairs(colors: u64, carrier: FinSet, f: impl Fn(u64, u64) -> u64) -> Result<Self> {
        Self::from_fn(2, colors, carrier, |t| f(t[0], t[1]))
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn colors(&self) -> u64 {
        self.colors
    }

    pub fn carrier(&self) -> &FinSet {
        &self.carrier
    }

    fn position(&self, x: u64) -> Option<usize> {
        self.carrier.elems().binary_search(&x).ok()
    }

    /// Color of a strictly increasing tuple of carrier elements.
    pub fn get(&self, tuple: &[u64]) -> Result<u64> {
        if tuple.len() != self.arity || tuple.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::pre(format!("{tuple:?} is not an increasing {}-tuple", self.arity)));
        }
        let pos: Option<Vec<usize>> = tuple.iter().map(|&x| self.position(x)).collect();
        let pos = pos.ok_or_else(|| Error::pre(format!("{tuple:?} leaves the carrier")))?;
        Ok(self.values[rank(&pos)])
    }

    /// Color of `{x, y}` for a pair coloring; the order of the arguments is irrelevant.
    ///
    /// Panics if either element is outside the carrier or they are equal.
    pub fn pair(&self, x: u64, y: u64) -> u64 {
        debug_assert_eq!(self.arity, 2);
        let (a, b) = if x < y { (x, y) } else { (y, x) };
        let pa = self.position(a).expect("element of the carrier");
        let pb = self.position(b).expect("element of the carrier");
        assert!(pa != pb, "pair of equal elements");
        self.values[pa + (pb * (pb - 1)) / 2]
    }

    /// Every colored subset in lex order.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<u64>, u64)> + '_ {
        let e = self.carrier.elems();
        combinations(e.len(), self.arity).map(move |pos| {
            let c = self.values[rank(&pos)];
            (pos.into_iter().map(|p| e[p]).collect(), c)
        })
    }

    pub(crate) fn require_pairs(&self) -> Result<()> {
        if self.arity != 2 {
            return Err(Error::pre(format!("expected a pair coloring, got arity {}", self.arity)));
        }
        Ok(())
    }
}

/// `f_G(i₀, …) = f(x_{i₀}, …)` on `{0, …, |G|−1}`.
pub fn restrict_coloring(f: &Coloring, g: &FinSet) -> Result<Coloring> {
    if !g.is_subset(f.carrier()) {
        return Err(Error::pre("restriction set leaves the carrier"));
    }
    if g.len() < f.arity() {
        return Err(Error::pre(format!("need at least {} elements", f.arity())));
    }
    let e = g.elems();
    let carrier = FinSet::range(0, g.len() as u64 - 1);
    Coloring::from_fn(f.arity(), f.colors(), carrier, |t| {
        let orig: Vec<u64> = t.iter().map(|&i| e[i as usize]).collect();
        f.get(&orig).expect("subset of the carrier")
    })
}

/// Colors taken by pairs inside `h`.
pub fn pair_colors(f: &Coloring, h: &FinSet) -> BTreeSet<u64> {
    let e = h.elems();
    let mut out = BTreeSet::new();
    for (i, &x) in e.iter().enumerate() {
        for &y in &e[i + 1..] {
            out.insert(f.pair(x, y));
        }
    }
    out
}

pub fn is_homogeneous(f: &Coloring, h: &FinSet) -> bool {
    pair_colors(f, h).len() <= 1
}

/// Both color classes transitive on `h`: `f(x,y) = f(y,z)` forces `f(x,z)` to match.
pub fn is_transitive(f: &Coloring, h: &FinSet) -> bool {
    first_intransitive(f, h).is_none()
}

pub(crate) fn first_intransitive(f: &Coloring, h: &FinSet) -> Option<(u64, u64, u64)> {
    let e = h.elems();
    for (i, &x) in e.iter().enumerate() {
        for (j, &y) in e.iter().enumerate().skip(i + 1) {
            let c = f.pair(x, y);
            for &z in &e[j + 1..] {
                if f.pair(y, z) == c && f.pair(x, z) != c {
                    return Some((x, y, z));
                }
            }
        }
    }
    None
}

impl fmt::Display for Coloring {
    /// `arity r colors k`, `domain {…}`, then one line per subset.
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(out, "arity {} colors {}", self.arity, self.colors)?;
        writeln!(out, "domain {}", self.carrier)?;
        for (t, c) in self.entries() {
            for x in t {
                write!(out, "{x} ")?;
            }
            writeln!(out, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for Coloring {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let perr = |line: usize, msg: String| Error::Parse { pos: line, msg };
        let (ln, head) = lines.next().ok_or_else(|| perr(0, "empty coloring file".into()))?;
        let words: Vec<&str> = head.split_whitespace().collect();
        let (arity, colors) = match words.as_slice() {
            ["arity", r, "colors", k] => (
                r.parse::<usize>().map_err(|e| perr(ln, format!("arity: {e}")))?,
                k.parse::<u64>().map_err(|e| perr(ln, format!("colors: {e}")))?,
            ),
            _ => return Err(perr(ln, "expected `arity R colors K`".into())),
        };
        let (ln, dom) = lines.next().ok_or_else(|| perr(ln, "missing domain line".into()))?;
        let set = dom.strip_prefix("domain").ok_or_else(|| perr(ln, "expected `domain {...}`".into()))?;
        let carrier: FinSet = set.parse().map_err(|e: Error| perr(ln, e.to_string()))?;
        let mut table = std::collections::BTreeMap::new();
        for (ln, line) in lines {
            let nums: std::result::Result<Vec<u64>, _> = line.split_whitespace().map(str::parse::<u64>).collect();
            let nums = nums.map_err(|e| perr(ln, e.to_string()))?;
            if nums.len() != arity + 1 {
                return Err(perr(ln, format!("expected {} numbers", arity + 1)));
            }
            let (t, c) = nums.split_at(arity);
            if t.windows(2).any(|w| w[0] >= w[1]) || !t.iter().all(|&x| carrier.contains(x)) {
                return Err(perr(ln, format!("{t:?} is not an increasing tuple of the domain")));
            }
            if table.insert(t.to_vec(), c[0]).is_some() {
                return Err(perr(ln, format!("{t:?} colored twice")));
            }
        }
        let want = binom(carrier.len() as u64, arity as u64);
        if table.len() as u128 != want {
            return Err(perr(0, format!("coloring is not total: {} of {want} subsets", table.len())));
        }
        Coloring::from_fn(arity, colors, carrier, |t| table[t])
    }
}
