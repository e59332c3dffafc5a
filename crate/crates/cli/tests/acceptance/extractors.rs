use std::collections::{BTreeSet, HashMap};

use largeness_core::largeness::{
    check_sparse, validate_witness, FinSet, OrdIndex, SparsityPolicy, Variant, Witness,
};
use largeness_core::milliken::{BoundProvider, Limits, PartitionMode};
use largeness_core::pigeonhole::{pigeonhole_extract, PigeonInstance, UnaryColoring};
use largeness_core::pipelines::{
    ads_extract, em_extract, is_homogeneous, is_transitive, rt22_extract, stabilize_blocks, Coloring,
    ExtractionReport, Homogenize, PipelineConfig, Property,
};
use largeness_core::structure::{
    construct_union, deconstruct, deconstruct_general, extract_sparse_subset, greedy_apart_blocks, regroup_blocks, Block,
    BlockFamily,
};
use largeness_core::Error;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{idx, least_range, rng, star, theta, witness, Outcome, Tally};

fn e(x: Error) -> String {
    x.to_string()
}

/// Least large range from `lo`, memoized, plus a random tail.
struct Ranges {
    memo: HashMap<(u64, OrdIndex, String), Option<FinSet>>,
}

impl Ranges {
    fn new() -> Self {
        Ranges { memo: HashMap::new() }
    }

    fn get(&mut self, r: &mut ChaCha8Rng, lo: u64, i: &OrdIndex, v: &Variant) -> Option<(FinSet, Witness)> {
        let base = self
            .memo
            .entry((lo, i.clone(), format!("{v:?}")))
            .or_insert_with(|| least_range(lo, i, v, 4000))
            .clone()?;
        let hi = base.max().unwrap() + r.gen_range(0..=20);
        let x = FinSet::range(lo, hi);
        let w = witness(&x, i, v)?;
        Some((x, w))
    }
}

/// A few coloring shapes with `colors` colors.
fn unary(r: &mut ChaCha8Rng, x: &FinSet, colors: u64) -> UnaryColoring {
    let shape = r.gen_range(0..4);
    let cut = r.gen_range(x.min().unwrap()..=x.max().unwrap());
    let salt = r.gen::<u64>();
    UnaryColoring::from_fn(x, |e| match shape {
        0 => e % colors,
        1 => u64::from(e >= cut) % colors,
        2 => (e.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ salt) % colors,
        _ => 0,
    })
}

fn pigeonhole_runs(t: &mut Tally, ranges: &mut Ranges) -> Result<String, String> {
    let mut r = rng(51);
    let v = star();
    let (mut accepted, mut refused, mut tries) = (0, 0, 0);
    while accepted < 200 {
        tries += 1;
        if tries > 5000 {
            return Err(format!("only {accepted} lazy-valid pigeonhole instances in {tries} tries"));
        }
        let n = r.gen_range(0..=1u32);
        let (a, ks, lo) = if n == 1 {
            // larger exponents are only materializable as a single block from 2
            (1, if r.gen_bool(0.5) { vec![1] } else { vec![] }, 2)
        } else {
            let a = r.gen_range(1..=3u64);
            let ks = if r.gen_bool(0.5) { vec![r.gen_range(1..=2u64)] } else { vec![] };
            if a * a * ks.iter().product::<u64>() > 9 {
                continue;
            }
            (a, ks, r.gen_range(a.max(2)..=4))
        };
        let mut sigma = vec![a];
        sigma.extend(ks.iter().map(|k| a * k));
        let Some((x, w)) = ranges.get(&mut r, lo, &OrdIndex { n: n + 1, sigma }, &v) else { continue };
        let coloring = unary(&mut r, &x, a);
        let inst = PigeonInstance { x: x.clone(), witness: w, n, a, ks, coloring, variant: v.clone(), policy: SparsityPolicy::Lazy };
        match pigeonhole_extract(&inst) {
            Ok(h) => {
                accepted += 1;
                let colors = inst.coloring.colors_of(&h.set).map_err(e)?;
                let all = inst.coloring.colors_of(&x).map_err(e)?;
                t.check(h.set.is_subset(&x), || format!("pigeonhole output leaves X={x}"));
                t.check(colors.len() == 1 && all.contains(&h.color), || format!("pigeonhole output {} not homogeneous", h.set));
                t.check(validate_witness(&h.witness, &h.set, &inst.target(), &v), || format!("pigeonhole witness for {}", h.set));
            }
            Err(Error::SparsityViolation { .. }) => refused += 1,
            Err(other) => t.check(false, || format!("pigeonhole on X={x}: {other}")),
        }
    }
    Ok(format!("pigeonhole {accepted} ({refused} not lazy-valid)"))
}

fn transversal_checks(t: &mut Tally, r: &mut ChaCha8Rng, cert: &largeness_core::structure::IntervalCertificate, v: &Variant) -> Result<(), String> {
    let count = cert.count();
    let picks: Vec<u128> = if count <= 1000 { (0..count).collect() } else { (0..300).map(|_| r.gen_range(0..count)).collect() };
    for i in picks {
        let h = cert.nth(i);
        let w = cert.certify(&h).map_err(e)?;
        t.check(validate_witness(&w, &h, cert.target(), v), || format!("transversal {h} does not validate"));
    }
    Ok(())
}

fn structure_runs(t: &mut Tally, ranges: &mut Ranges) -> Result<String, String> {
    let mut r = rng(52);
    let v = star();
    let mut counts = [0usize; 6];

    // deconstruct on ω^(n+m)·2 inputs, plus general shapes
    for _ in 0..60 {
        let (n, m) = *[(0, 0), (0, 1), (1, 0)].choose(&mut r).unwrap();
        let lo = r.gen_range(1..=4);
        let Some((_, w)) = ranges.get(&mut r, lo, &OrdIndex { n: n + m, sigma: vec![2] }, &v) else { continue };
        let (fam, cert) = deconstruct(&w, n, m, &v).map_err(e)?;
        t.check(fam.check(&OrdIndex::omega(n)).is_ok(), || format!("deconstruct blocks n={n} m={m}"));
        transversal_checks(t, &mut r, &cert, &v)?;
        counts[0] += 1;
    }
    for _ in 0..40 {
        let mut sigma = vec![2u64];
        let extra = r.gen_range(0..=1);
        sigma.extend((0..extra).map(|_| r.gen_range(1..=3u64)));
        let need: u64 = sigma.iter().product();
        let x: FinSet = (1..40).filter(|_| r.gen_bool(0.5)).collect();
        if (x.len() as u64) < need {
            continue;
        }
        let i = OrdIndex { n: 0, sigma: sigma.clone() };
        let Some(w) = witness(&x, &i, &v) else { continue };
        let (fam, cert) = deconstruct_general(&w, &sigma, 0, 0, &v).map_err(e)?;
        let ok = fam.len() as u64 >= need && fam.check(&OrdIndex::omega(0)).is_ok();
        t.check(ok, || format!("general deconstruct of {x} at {i}: {} blocks", fam.len()));
        transversal_checks(t, &mut r, &cert, &v)?;
        counts[0] += 1;
    }

    // sparse subsets
    for _ in 0..60 {
        let (n, k) = *[(0, 0), (0, 1), (1, 0)].choose(&mut r).unwrap();
        let lo = r.gen_range(1..=4);
        let Some((x, w)) = ranges.get(&mut r, lo, &OrdIndex { n: n + k, sigma: vec![2] }, &v) else { continue };
        let (y, wy) = extract_sparse_subset(&w, n, k, &v).map_err(e)?;
        t.check(y.is_subset(&x), || format!("sparse subset leaves {x}"));
        t.check(check_sparse(&y, &SparsityPolicy::Omega(k)).map_err(e)?, || format!("{y} is not w^{k}-sparse"));
        t.check(validate_witness(&wy, &y, &OrdIndex::omega(n), &v), || format!("sparse subset witness for {y}"));
        counts[1] += 1;
    }

    // unions: singleton blocks with ω^(2b) maxima, and greedy ω¹ blocks
    for _ in 0..40 {
        let b = r.gen_range(0..=1u32);
        let x = if b == 1 { FinSet::range(2, 62 + r.gen_range(0..=30)) } else { FinSet::range(r.gen_range(1..=6), r.gen_range(6..=30)) };
        let fam = BlockFamily::new(x.iter().map(|p| Block::tight(Witness::leaf(p))).collect(), v.clone());
        let Some(mw) = witness(&x, &OrdIndex::omega(2 * b), &v) else { return Err(format!("{x} not w^{}-large", 2 * b)) };
        let out = construct_union(&fam, &mw, 0, b).map_err(e)?;
        t.check(validate_witness(&out, &fam.union(), &OrdIndex::omega(b), &v), || format!("union over {x}, b={b}"));
        counts[2] += 1;
    }
    for _ in 0..20 {
        let lo = r.gen_range(1..=4);
        let universe = FinSet::range(lo, lo + r.gen_range(20..=200));
        let g = greedy_apart_blocks(&universe, &OrdIndex::omega(1), &v, r.gen_range(1..=4)).map_err(e)?;
        if g.family.is_empty() {
            continue;
        }
        let Some(mw) = witness(&g.family.maxima(), &OrdIndex::omega(0), &v) else { continue };
        let out = construct_union(&g.family, &mw, 1, 0).map_err(e)?;
        t.check(validate_witness(&out, &g.family.union(), &OrdIndex::omega(1), &v), || format!("union of greedy blocks in {universe}"));
        counts[2] += 1;
    }

    // regrouping singletons under ω^(n+1)-large(θ) maxima
    let vt = Variant::theta(theta("0=0"));
    for _ in 0..40 {
        let n = r.gen_range(0..=1u32);
        let lo = r.gen_range(3..=5);
        let Some((x, mw)) = ranges.get(&mut r, lo, &OrdIndex::omega(n + 1), &vt) else { continue };
        let fam = BlockFamily::new(x.iter().map(|p| Block::tight(Witness::leaf(p))).collect(), vt.clone());
        let xb = r.gen_range(1..=2u64);
        let out = regroup_blocks(&fam, &OrdIndex::omega(0), &mw, n, xb).map_err(e)?;
        let target = OrdIndex { n: 0, sigma: vec![xb; n as usize] };
        t.check(validate_witness(&out, &fam.union(), &target, &vt), || format!("regroup {x} n={n} x={xb}"));
        counts[3] += 1;
    }

    // stabilization: one ω² block, and ω^e·(d,…) block trees with random pair colorings
    for _ in 0..30 {
        let x = FinSet::range(2, 62 + r.gen_range(0..=10));
        let w = witness(&x, &idx("w^2"), &v).ok_or("{2..62} must be w^2-large")?;
        let f = pairs(&mut r, &x);
        let st = stabilize_blocks(&w, &idx("w^2"), &f, &v, &SparsityPolicy::Lazy, Homogenize::Proof).map_err(e)?;
        stabilized_ok(t, &st, &f, &v, &[x]);
        counts[4] += 1;
    }
    for _ in 0..60 {
        let (e_, d, depth) = *[(0u32, 2u64, 1usize), (0, 2, 2), (1, 2, 1), (0, 3, 1)].choose(&mut r).unwrap();
        let mut cursor = r.gen_range(2..=5);
        let mut leaves = Vec::new();
        for _ in 0..d.pow(depth as u32) {
            let len = if e_ == 0 { r.gen_range(1..=6) } else { cursor + 1 + r.gen_range(0..=8) };
            let s = FinSet::range(cursor, cursor + len - 1);
            leaves.push(witness(&s, &OrdIndex::omega(e_), &v).ok_or("block must be large")?);
            cursor += len + r.gen_range(0..=3);
        }
        let sets: Vec<FinSet> = leaves.iter().map(Witness::carrier).collect();
        let w = nest(leaves, d as usize, depth);
        let i = OrdIndex { n: e_, sigma: vec![d; depth] };
        let x = w.carrier();
        let f = pairs(&mut r, &x);
        let st = stabilize_blocks(&w, &i, &f, &v, &SparsityPolicy::None, Homogenize::Search { exponent: 0 }).map_err(e)?;
        stabilized_ok(t, &st, &f, &v, &sets);
        counts[5] += 1;
    }
    Ok(format!(
        "deconstruct {}, sparse {}, union {}, regroup {}, stabilize {}",
        counts[0],
        counts[1],
        counts[2],
        counts[3],
        counts[4] + counts[5]
    ))
}

/// Groups `leaves` (lex order) into a `d`-branching product of the given depth.
fn nest(mut leaves: Vec<Witness>, d: usize, depth: usize) -> Witness {
    for _ in 0..depth {
        let mut up = Vec::new();
        while !leaves.is_empty() {
            let rest = leaves.split_off(d);
            up.push(Witness::Prod(std::mem::replace(&mut leaves, rest)));
        }
        leaves = up;
    }
    leaves.pop().expect("one root")
}

/// A random 2-coloring of the pairs of `x` from a few shapes.
fn pairs(r: &mut ChaCha8Rng, x: &FinSet) -> Coloring {
    let (p, q, s) = (r.gen_range(1..50u64), r.gen_range(1..50u64), r.gen_range(0..7u64));
    let cut = r.gen_range(x.min().unwrap()..=x.max().unwrap());
    let shape = r.gen_range(0..3);
    Coloring::pairs(2, x.clone(), move |a, b| match shape {
        0 => u64::from((a * p + b * q + s) % 7 < 3),
        1 => u64::from(b >= cut) ^ (a % 2),
        _ => (a * b + s) % 2,
    })
    .expect("total coloring")
}

fn stabilized_ok(t: &mut Tally, st: &largeness_core::pipelines::Stabilized, f: &Coloring, v: &Variant, parents: &[FinSet]) {
    t.check(validate_witness(&st.witness, &st.union(), &st.index(), v), || format!("stabilized witness at {}", st.index()));
    t.check(st.blocks.len() == parents.len(), || "stabilized block count".into());
    for (b, p) in st.blocks.iter().zip(parents) {
        t.check(b.set.is_subset(p), || format!("block {} left {p}", b.set));
    }
    for (i, a) in st.blocks.iter().enumerate() {
        for (j, b) in st.blocks.iter().enumerate().skip(i + 1) {
            let seen: BTreeSet<u64> = a.set.iter().flat_map(|x| b.set.iter().map(move |y| f.pair(x, y))).collect();
            t.check(seen.len() == 1 && st.g.get(&(i, j)) == seen.iter().next(), || format!("blocks {i},{j} see {seen:?}"));
        }
    }
}

pub fn certification() -> Outcome {
    let mut t = Tally::default();
    let mut ranges = Ranges::new();
    let a = pigeonhole_runs(&mut t, &mut ranges)?;
    let b = structure_runs(&mut t, &mut ranges)?;
    let res = t.finish("checks");
    res.map(|s| format!("{a}; {b}; {s}"))
}

// ------------------------------------------------------------ pipelines

fn report_ok(t: &mut Tally, rep: &ExtractionReport, f: &Coloring, v: &Variant, what: &str) {
    t.check(rep.verify(f, v).is_ok(), || format!("{what}: report does not verify: {:?}", rep.verify(f, v)));
    t.check(validate_witness(&rep.witness, &rep.result, &rep.index, v), || format!("{what}: witness"));
    let prop = match rep.property {
        Property::Transitive => is_transitive(f, &rep.result),
        Property::Homogeneous { .. } => is_homogeneous(f, &rep.result),
    };
    t.check(prop, || format!("{what}: property {:?} fails on {}", rep.property, rep.result));
}

/// ω¹ witness covering all of `s`.
fn spread(s: &FinSet) -> Witness {
    let e = s.elems();
    let m = e[0] as usize;
    let mut kids: Vec<Witness> = e[1..m].iter().map(|&x| Witness::leaf(x)).collect();
    kids.push(Witness::Leaf(FinSet::new(e[m..].to_vec())));
    Witness::exp(e[0], Witness::Prod(kids))
}

/// ω²-large* with pivot 2 and a second block high enough for a
/// 64-branching index tree.
fn crafted() -> (FinSet, Witness) {
    let parts = [FinSet::range(3, 6), FinSet::range(64, 300), FinSet::range(301, 603), FinSet::range(604, 1300)];
    let ws: Vec<Witness> = parts.iter().map(spread).collect();
    let w = Witness::exp(2, Witness::Prod(vec![Witness::Prod(ws[..2].to_vec()), Witness::Prod(ws[2..].to_vec())]));
    (w.carrier(), w)
}

/// Length of the longest chain starting at each position, for one color.
fn has_large_chain(p: &[usize], carrier: &[u64], up: bool) -> bool {
    let m = p.len();
    let mut best = vec![1usize; m];
    for i in (0..m).rev() {
        for j in i + 1..m {
            if (p[i] < p[j]) == up {
                best[i] = best[i].max(1 + best[j]);
            }
        }
    }
    (0..m).any(|i| best[i] as u64 > carrier[i])
}

fn next_perm(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else { return false };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

pub fn pipelines() -> Outcome {
    let mut t = Tally::default();
    let v = star();
    let optimistic = PipelineConfig {
        partition: PartitionMode::Provider(BoundProvider::Optimistic(vec![6])),
        ..PipelineConfig::default()
    };
    let mut r = rng(8);

    // k = 0 and n = 0 return the minimum
    let x = FinSet::range(2, 62);
    let w = witness(&x, &idx("w^2"), &v).ok_or("{2..62} must be w^2-large")?;
    for _ in 0..5 {
        let f = pairs(&mut r, &x);
        let em = em_extract(&x, &w, &f, 0, &v, &PipelineConfig::default()).map_err(e)?;
        t.check(em.result == FinSet::singleton(2), || format!("em k=0 gave {}", em.result));
        report_ok(&mut t, &em, &f, &v, "em k=0");
        let rt = rt22_extract(&x, &w, &f, 0, &v, &PipelineConfig::default()).map_err(e)?;
        t.check(rt.result == FinSet::singleton(2), || format!("rt22 n=0 gave {}", rt.result));
        report_ok(&mut t, &rt, &f, &v, "rt22 n=0");
    }

    // crafted k = 1 / n = 1 with the optimistic provider and θ true
    let (x, w) = crafted();
    let f = Coloring::pairs(2, x.clone(), |a, b| (a + b) % 2).map_err(e)?;
    let em = em_extract(&x, &w, &f, 1, &v, &optimistic).map_err(e)?;
    t.check(em.property == Property::Transitive, || "em k=1 property".into());
    report_ok(&mut t, &em, &f, &v, "em k=1");
    let rt = rt22_extract(&x, &w, &f, 1, &v, &optimistic).map_err(e)?;
    report_ok(&mut t, &rt, &f, &v, "rt22 n=1");
    t.check(rt.index == OrdIndex::omega(1), || format!("rt22 n=1 index {}", rt.index));

    // every transitive coloring of an 8-element carrier at ω¹
    let carrier: Vec<u64> = (3..=10).collect();
    let xs = FinSet::new(carrier.clone());
    let lim = Limits::default();
    let mut p: Vec<usize> = (0..8).collect();
    let (mut found, mut none) = (0, 0);
    loop {
        let f = Coloring::pairs(2, xs.clone(), |a, b| u64::from(p[(a - 3) as usize] < p[(b - 3) as usize])).map_err(e)?;
        let exists = has_large_chain(&p, &carrier, true) || has_large_chain(&p, &carrier, false);
        match ads_extract(&xs, &f, 1, &v, &lim) {
            Ok(rep) => {
                found += 1;
                t.check(exists, || format!("ads found {} where the oracle has none, perm {p:?}", rep.result));
                report_ok(&mut t, &rep, &f, &v, "ads");
            }
            Err(Error::NotFound { exhaustive: true }) => {
                none += 1;
                t.check(!exists, || format!("ads missed a chain, perm {p:?}"));
            }
            Err(other) => t.check(false, || format!("ads on {p:?}: {other}")),
        }
        if !next_perm(&mut p) {
            break;
        }
    }
    t.finish(&format!("checks; ads over {} permutations ({found} found, {none} none)", found + none))
}
