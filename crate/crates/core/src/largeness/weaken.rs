use super::{OrdIndex, Witness};
use crate::error::{Error, Result};

fn incompatible(from: &OrdIndex, to: &OrdIndex, why: &str) -> Error {
    Error::IncompatibleIndex(format!("{from} -> {to}: {why}"))
}

/// Rewrites a witness for `from` into one for `to` using only sub-blocks,
/// so the carrier shrinks and every apartness fact is inherited.
///
/// Components of `to` are matched against `from` from the outside in:
/// outer products keep their first children, surplus inner levels of
/// `from` are collapsed to their first block, exponents are lowered by
/// descending to a first block, and extra inner levels of `to` are
/// obtained by unfolding pivot nodes.
pub fn weaken_witness(w: &Witness, from: &OrdIndex, to: &OrdIndex) -> Result<Witness> {
    go(w, from.n, &from.sigma, to.n, &to.sigma).map_err(|why| incompatible(from, to, &why))
}

fn go(w: &Witness, n: u32, sigma: &[u64], n2: u32, sigma2: &[u64]) -> std::result::Result<Witness, String> {
    match (sigma.split_last(), sigma2.split_last()) {
        (Some((&k, rest)), Some((&k2, rest2))) => {
            let Witness::Prod(children) = w else {
                return Err("expected a product node".into());
            };
            if k2 > k || children.len() as u64 != k {
                return Err(format!("cannot take {k2} of {k} blocks"));
            }
            let mut out = Vec::with_capacity(k2 as usize);
            for c in &children[..k2 as usize] {
                out.push(go(c, n, rest, n2, rest2)?);
            }
            Ok(Witness::Prod(out))
        }
        (Some((_, rest)), None) => match w {
            Witness::Prod(children) if !children.is_empty() => go(&children[0], n, rest, n2, sigma2),
            _ => Err("expected a product node".into()),
        },
        (None, None) => {
            if n2 > n {
                return Err("cannot raise the exponent".into());
            }
            let mut cur = w;
            let mut e = n;
            while e > n2 {
                let Witness::Exp { sub, .. } = cur else {
                    return Err("expected a pivot node".into());
                };
                cur = sub.first_block();
                e -= 1;
            }
            Ok(cur.clone())
        }
        (None, Some(_)) => {
            if n <= n2 {
                return Err("no exponent left to unfold into products".into());
            }
            let Witness::Exp { pivot, sub } = w else {
                return Err("expected a pivot node".into());
            };
            let reps = sub.prod_depth();
            go(sub, n - 1, &vec![*pivot; reps], n2, sigma2)
        }
    }
}

/// Turns a witness of the product-tree notion into one for the notion with
/// apartness at products only: every pivot keeps one block per top-level
/// child. Apply twice in sequence for the plain notion (structure is shared).
pub fn relax_star(w: &Witness) -> Witness {
    match w {
        Witness::Leaf(s) => Witness::Leaf(s.clone()),
        Witness::Prod(c) => Witness::Prod(c.iter().map(relax_star).collect()),
        Witness::Exp { pivot, sub } => {
            let children: Vec<Witness> = match sub.as_ref() {
                Witness::Prod(c) => c.iter().map(|x| relax_star(x.first_block())).collect(),
                other => vec![relax_star(other)],
            };
            Witness::exp(*pivot, Witness::Prod(children))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Theta;
    use crate::largeness::{check_large, validate_witness, FinSet, Mode, Variant};

    #[test]
    fn keeps_first_blocks() {
        let w = Witness::Prod(vec![Witness::leaf(3), Witness::leaf(4), Witness::leaf(5)]);
        let from = OrdIndex { n: 0, sigma: vec![3] };
        let to = OrdIndex { n: 0, sigma: vec![2] };
        let out = weaken_witness(&w, &from, &to).unwrap();
        assert_eq!(out, Witness::Prod(vec![Witness::leaf(3), Witness::leaf(4)]));
        assert_eq!(weaken_witness(&w, &from, &from).unwrap(), w);
        assert!(weaken_witness(&w, &to, &from).is_err());
    }

    #[test]
    fn lowers_exponent_and_unfolds() {
        let v = Variant::star(Theta::trivial());
        let f = FinSet::range(2, 62);
        let w = check_large(&f, &OrdIndex::omega(2), &v, Mode::Exact).unwrap().into_witness().unwrap();
        let w1 = weaken_witness(&w, &OrdIndex::omega(2), &OrdIndex::omega(1)).unwrap();
        assert!(validate_witness(&w1, &f, &OrdIndex::omega(1), &v));
        let to = OrdIndex { n: 1, sigma: vec![2, 2] };
        let w2 = weaken_witness(&w, &OrdIndex::omega(2), &to).unwrap();
        assert!(validate_witness(&w2, &f, &to, &v));
        let to = OrdIndex { n: 0, sigma: vec![3, 2, 2] };
        let w3 = weaken_witness(&w, &OrdIndex::omega(2), &to).unwrap();
        assert!(validate_witness(&w3, &f, &to, &v), "{w3:?}");
    }

    #[test]
    fn relaxes_notions() {
        let star = Variant::star(Theta::trivial());
        let f = FinSet::range(2, 62);
        let w = check_large(&f, &OrdIndex::omega(2), &star, Mode::Exact).unwrap().into_witness().unwrap();
        let r = relax_star(&w);
        assert!(validate_witness(&r, &f, &OrdIndex::omega(2), &Variant::theta(Theta::trivial())));
        assert!(validate_witness(&r, &f, &OrdIndex::omega(2), &Variant::Ks));
    }
}
