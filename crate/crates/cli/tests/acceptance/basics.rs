use largeness_core::formula::theta_apart;
use largeness_core::largeness::{
    brute_force_large, check_large, relax_star, validate_witness, weaken_witness, FinSet, Mode, OrdIndex, Variant,
    Witness,
};
use largeness_core::structure::{treemap_to_witness, witness_to_treemap};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{idx, rng, star, theta, Outcome, Tally};

const THETAS: [&str; 2] = ["0=0", "y*y > x*z"];

fn variants() -> Vec<Variant> {
    let mut v = vec![Variant::Ks];
    for t in THETAS {
        v.push(Variant::theta(theta(t)));
        v.push(Variant::star(theta(t)));
    }
    v
}

pub fn oracle_equivalence() -> Outcome {
    let indices: Vec<OrdIndex> = ["w^0", "w^1", "w^1*(2)", "w^1*(2,2)", "w^2"].map(idx).to_vec();
    let vs = variants();
    let universe: Vec<u64> = (3..=12).collect();
    let mut t = Tally::default();
    for mask in 0u32..1 << universe.len() {
        let f: FinSet = (0..universe.len()).filter(|i| mask >> i & 1 == 1).map(|i| universe[i]).collect();
        for i in &indices {
            for v in &vs {
                let fast = check_large(&f, i, v, Mode::Exact).map_err(|e| e.to_string())?.into_witness();
                let slow = brute_force_large(&f, i, v).map_err(|e| e.to_string())?;
                t.check(fast.is_some() == slow.is_some(), || format!("F={f} idx={i} {v:?}"));
                if let Some(w) = fast {
                    t.check(validate_witness(&w, &f, i, v), || format!("decider witness for F={f} idx={i}"));
                }
            }
        }
    }
    t.finish("comparisons")
}

fn random_set(r: &mut ChaCha8Rng, lo: u64, span: u64, density: f64) -> FinSet {
    (lo..=lo + span).filter(|_| r.gen_bool(density)).collect()
}

pub fn closure_suite() -> Outcome {
    let mut r = rng(2);
    let indices: Vec<OrdIndex> = ["w^0", "w^1", "w^1*(2)", "w^1*(2,2)", "w^2", "w^0*(3)", "w^1*(3)"].map(idx).to_vec();
    let mut t = Tally::default();
    let mut large = 0;
    let mut cases = 0;
    while cases < 1000 {
        let lo = r.gen_range(1..=4);
        let (span, density) = (r.gen_range(0..=70), r.gen_range(0.5..=1.0));
        let f = random_set(&mut r, lo, span, density);
        if f.is_empty() {
            continue;
        }
        cases += 1;
        let top = f.max().unwrap_or(0) + 20;
        let sup = f.union(&random_set(&mut r, 0, top, 0.3));
        let i = indices.choose(&mut r).unwrap().clone();
        let th = theta(THETAS.choose(&mut r).unwrap());
        let vs = [Variant::star(th.clone()), Variant::theta(th), Variant::Ks];
        let ws: Vec<Option<Witness>> = vs
            .iter()
            .map(|v| check_large(&f, &i, v, Mode::Exact).map(|d| d.into_witness()))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        for (v, w) in vs.iter().zip(&ws) {
            let Some(w) = w else { continue };
            t.check(validate_witness(w, &sup, &i, v), || format!("superset F={f} F'={sup} idx={i} {v:?}"));
            let again = check_large(&sup, &i, v, Mode::Exact).map_err(|e| e.to_string())?;
            t.check(again.is_large(), || format!("decider on superset F'={sup} idx={i} {v:?}"));
            if i.n >= 1 {
                let lower = OrdIndex { n: i.n - 1, sigma: i.sigma.clone() };
                let ok = weaken_witness(w, &i, &lower).map(|x| validate_witness(&x, &f, &lower, v));
                t.check(ok == Ok(true), || format!("weaken F={f} {i} -> {lower} {v:?}: {ok:?}"));
            }
        }
        if let Some(ws) = &ws[0] {
            large += 1;
            let wt = relax_star(ws);
            t.check(validate_witness(&wt, &f, &i, &vs[1]), || format!("star->theta F={f} idx={i}"));
            t.check(validate_witness(&relax_star(&wt), &f, &i, &vs[2]), || format!("star->ks F={f} idx={i}"));
        }
        if let Some(wt) = &ws[1] {
            t.check(validate_witness(&relax_star(wt), &f, &i, &vs[2]), || format!("theta->ks F={f} idx={i}"));
        }
        t.check(ws[0].is_none() || ws[1].is_some(), || format!("star large but not theta: F={f} idx={i}"));
        t.check(ws[1].is_none() || ws[2].is_some(), || format!("theta large but not ks: F={f} idx={i}"));
    }
    t.finish(&format!("checks on {cases} instances ({large} star-large)"))
}

const APART_THETAS: [&str; 6] =
    ["0=0", "y*y > x*z", "x < y", "x + y < z", "exists w < y . x < w", "forall w < x . w*w < z + y"];

fn nonempty_subset(r: &mut ChaCha8Rng, s: &FinSet) -> FinSet {
    loop {
        let out: FinSet = s.iter().filter(|_| r.gen_bool(0.6)).collect();
        if !out.is_empty() {
            return out;
        }
    }
}

/// Nonempty random subsets of consecutive intervals cut at `cuts`.
fn ordered(r: &mut ChaCha8Rng, cuts: &[u64]) -> Vec<FinSet> {
    cuts.windows(2)
        .map(|w| loop {
            let s: FinSet = (w[0]..w[1]).filter(|_| r.gen_bool(0.4)).collect();
            if !s.is_empty() {
                break s;
            }
        })
        .collect()
}

pub fn apartness_laws() -> Outcome {
    let mut r = rng(3);
    let thetas: Vec<_> = APART_THETAS.iter().map(|t| theta(t)).collect();
    let mut t = Tally::default();
    let mut held = 0;
    for _ in 0..1000 {
        let th = thetas.choose(&mut r).unwrap();
        let s = r.gen_range(1..40);
        let end = s + r.gen_range(1..30);
        let parts = ordered(&mut r, &[0, s, end]);
        let (e, f) = (&parts[0], &parts[1]);
        let (e2, f2) = (nonempty_subset(&mut r, e), nonempty_subset(&mut r, f));
        let big = theta_apart(e, f, th).map_err(|x| x.to_string())?;
        let small = theta_apart(&e2, &f2, th).map_err(|x| x.to_string())?;
        held += usize::from(big);
        t.check(!big || small, || format!("{e} {f} apart but {e2} {f2} not, θ={}", th.formula()));
    }
    let mut chained = 0;
    for _ in 0..500 {
        let th = thetas.choose(&mut r).unwrap();
        let a = r.gen_range(1..20);
        let b = a + r.gen_range(1..20);
        let end = b + r.gen_range(1..25);
        let parts = ordered(&mut r, &[0, a, b, end]);
        let ab = theta_apart(&parts[0], &parts[1], th).map_err(|x| x.to_string())?;
        let bc = theta_apart(&parts[1], &parts[2], th).map_err(|x| x.to_string())?;
        let ac = theta_apart(&parts[0], &parts[2], th).map_err(|x| x.to_string())?;
        chained += usize::from(ab && bc);
        t.check(!(ab && bc) || ac, || format!("{:?} not transitive, θ={}", parts, th.formula()));
    }
    t.finish(&format!("apartness checks ({held} apart pairs, {chained} chained triples)"))
}

/// An ω¹ witness on `{c, …, c+c+extra}`: singletons, then the rest.
fn omega_one(c: u64, extra: u64) -> Witness {
    let mut kids: Vec<Witness> = (c + 1..c + c).map(Witness::leaf).collect();
    kids.push(Witness::Leaf(FinSet::range(c + c, c + c + extra)));
    Witness::exp(c, Witness::Prod(kids))
}

fn product(r: &mut ChaCha8Rng, k: u64, d: usize, base: u32, cursor: &mut u64) -> Witness {
    if d == 0 {
        let c = *cursor;
        let w = if base == 0 {
            let len = r.gen_range(1..=3);
            Witness::Leaf(FinSet::range(c, c + len - 1))
        } else {
            omega_one(c, r.gen_range(0..=2))
        };
        *cursor = w.max().unwrap() + 1 + r.gen_range(0..=2);
        return w;
    }
    Witness::Prod((0..k).map(|_| product(r, k, d - 1, base, cursor)).collect())
}

pub fn tree_bijection() -> Outcome {
    let mut r = rng(4);
    let mut t = Tally::default();
    for case in 0..200 {
        let k = r.gen_range(1..=3u64);
        let base = r.gen_range(0..=1u32);
        // an ω¹ leaf roughly doubles the cursor, so keep those trees small
        let d = if base == 1 && k == 3 { r.gen_range(0..=2usize) } else { r.gen_range(0..=3usize) };
        let v = [star(), Variant::theta(theta("0=0")), Variant::Ks][case % 3].clone();
        let mut cursor = r.gen_range(1..=5);
        let w = product(&mut r, k, d, base, &mut cursor);
        let i = OrdIndex { n: base, sigma: vec![k; d] };
        let f = w.carrier();
        if !validate_witness(&w, &f, &i, &v) {
            return Err(format!("generated witness does not validate: {w:?} at {i}"));
        }
        let tm = witness_to_treemap(&w, &i, d, &v).map_err(|e| e.to_string())?;
        t.check(tm.leaf_count() as u64 == k.pow(d as u32), || format!("{} leaves for k={k} d={d}", tm.leaf_count()));
        let back = treemap_to_witness(&tm, &v).map_err(|e| e.to_string())?;
        t.check(back.clone().canonical() == w.clone().canonical(), || format!("round trip changed {w:?} into {back:?}"));
    }
    t.finish("tree round trips")
}
