use super::{FinSet, OrdIndex, Variant, Witness};

/// Checks `w` against the index recursively; returns (min, max) of the carrier.
fn check(w: &Witness, n: u32, sigma: &[u64], v: &Variant, path: &mut String) -> Result<(u64, u64), String> {
    if let Some((&k, rest)) = sigma.split_last() {
        let Witness::Prod(children) = w else {
            return Err(format!("{path}: expected a product of {k} blocks"));
        };
        if children.len() as u64 != k {
            return Err(format!("{path}: product has {} blocks, index needs {k}", children.len()));
        }
        let mut prev: Option<(u64, u64)> = None;
        let mut first = None;
        for (i, c) in children.iter().enumerate() {
            let len = path.len();
            path.push_str(&format!("/{i}"));
            let (lo, hi) = check(c, n, rest, v, path)?;
            path.truncate(len);
            if let Some((_, pmax)) = prev {
                if pmax >= lo {
                    return Err(format!("{path}: blocks {} and {i} are not ordered", i - 1));
                }
                match v.apart(pmax, lo, hi) {
                    Ok(true) => {}
                    Ok(false) => return Err(format!("{path}: blocks {} and {i} are not apart", i - 1)),
                    Err(e) => return Err(format!("{path}: {e}")),
                }
            }
            first.get_or_insert(lo);
            prev = Some((lo, hi));
        }
        return Ok((first.unwrap_or(0), prev.map(|p| p.1).unwrap_or(0)));
    }
    if n == 0 {
        return match w {
            Witness::Leaf(s) if !s.is_empty() => Ok((s.min().unwrap_or(0), s.max().unwrap_or(0))),
            Witness::Leaf(_) => Err(format!("{path}: empty leaf")),
            _ => Err(format!("{path}: expected a leaf at exponent 0")),
        };
    }
    let Witness::Exp { pivot, sub } = w else {
        return Err(format!("{path}: expected a pivot node at exponent {n}"));
    };
    let m = *pivot;
    if m == 0 {
        return Err(format!("{path}: pivot 0 gives no blocks"));
    }
    let reps = v.exp_repeats(n);
    let inner = vec![m; reps];
    let len = path.len();
    path.push_str("/sub");
    let (lo, hi) = check(sub, n - 1, &inner, v, path)?;
    path.truncate(len);
    if m >= lo {
        return Err(format!("{path}: pivot {m} is not below the rest"));
    }
    Ok((m, hi))
}

/// Ok when `w` certifies that `f` is idx-large under `v`; otherwise a
/// diagnostic naming the failing node.
pub fn validate_trace(w: &Witness, f: &FinSet, idx: &OrdIndex, v: &Variant) -> Result<(), String> {
    let mut path = String::from("root");
    check(w, idx.n, &idx.sigma, v, &mut path)?;
    let carrier = w.carrier();
    if let Some(x) = carrier.iter().find(|&x| !f.contains(x)) {
        return Err(format!("element {x} is outside the ambient set"));
    }
    Ok(())
}

pub fn validate_witness(w: &Witness, f: &FinSet, idx: &OrdIndex, v: &Variant) -> bool {
    validate_trace(w, f, idx, v).is_ok()
}
