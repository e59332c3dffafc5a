use super::{ensure, require};
use crate::error::{Error, Result};
use crate::largeness::{weaken_witness, Notion, OrdIndex, Variant, Witness};

fn theta_of(v: &Variant) -> Result<Variant> {
    match v.notion() {
        Notion::Ks => Err(Error::pre("translation needs a formula")),
        _ => Ok(v.with_notion(Notion::Theta)),
    }
}

/// From ω^(n+k)-large(θ) to ω^n·(min X, …, min X)-large(θ) with `k`
/// components, on X without its minimum.
pub fn flatten_large_theta(w: &Witness, n: u32, k: u32, v: &Variant) -> Result<Witness> {
    if k == 0 {
        return Err(Error::pre("k must be at least 1"));
    }
    let v = theta_of(v)?;
    let f = w.carrier();
    require(w, &f, &OrdIndex::omega(n + k), &v, "input")?;
    let out = flatten(w, n, k)?;
    let m = f.min().expect("nonempty");
    ensure(&out, &f.without(m), &OrdIndex::repeated(n, m, k as usize), &v, "flattened witness")?;
    Ok(out)
}

fn flatten(w: &Witness, n: u32, k: u32) -> Result<Witness> {
    let Witness::Exp { pivot, sub } = w else {
        return Err(Error::Shape("expected a pivot node".into()));
    };
    if k == 1 {
        return Ok((**sub).clone());
    }
    let m = *pivot;
    let mut out = Vec::with_capacity(m as usize);
    for c in sub.children() {
        let Witness::Exp { pivot: p, .. } = c else {
            return Err(Error::Shape("expected a pivot node".into()));
        };
        let y = flatten(c, n, k - 1)?;
        let from = OrdIndex::repeated(n, *p, (k - 1) as usize);
        let to = OrdIndex::repeated(n, m, (k - 1) as usize);
        out.push(weaken_witness(&y, &from, &to)?);
    }
    Ok(Witness::Prod(out))
}

/// From ω^(n(n+1)/2)-large(θ) to ω^n-large*(θ) on a subset.
pub fn theta_to_star(w: &Witness, n: u32, v: &Variant) -> Result<Witness> {
    let tv = theta_of(v)?;
    let f = w.carrier();
    require(w, &f, &OrdIndex::omega(n * (n + 1) / 2), &tv, "input")?;
    let out = to_star(w, n)?;
    ensure(&out, &f, &OrdIndex::omega(n), &tv.with_notion(Notion::Star), "star witness")?;
    Ok(out)
}

fn to_star(w: &Witness, n: u32) -> Result<Witness> {
    if n == 0 {
        return Ok(w.clone());
    }
    let Witness::Exp { pivot, .. } = w else {
        return Err(Error::Shape("expected a pivot node".into()));
    };
    let flat = flatten(w, (n - 1) * n / 2, n)?;
    Ok(Witness::exp(*pivot, map_leaves(&flat, n as usize, &|leaf| to_star(leaf, n - 1))?))
}

fn map_leaves(w: &Witness, depth: usize, f: &dyn Fn(&Witness) -> Result<Witness>) -> Result<Witness> {
    if depth == 0 {
        return f(w);
    }
    Ok(Witness::Prod(w.children().iter().map(|c| map_leaves(c, depth - 1, f)).collect::<Result<_>>()?))
}
