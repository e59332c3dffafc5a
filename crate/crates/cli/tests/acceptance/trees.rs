use std::collections::HashMap;

use largeness_core::milliken::{
    count_subforests, milliken_number_search, monochromatize, tree_partition, validate_selector, Limits, PartitionMode,
    RegularTree, Selector, StrongForest, Subforests,
};
use largeness_core::par::with_jobs;
use rand::Rng;

use super::{rng, Outcome, Tally};

pub fn milliken_micro() -> Outcome {
    let mut t = Tally::default();
    let lim = Limits::default();
    for d in 1..=2usize {
        for l in 0..=3u32 {
            for k in 0..=l {
                let got = milliken_number_search(d, l, k, 1, l + 3, &lim).map_err(|e| e.to_string())?;
                t.check(got == Some(l), || format!("Mil({d},{l},{k},1) = {got:?}"));
            }
        }
    }

    let mut r = rng(6);
    let (mut hits, mut misses, mut runs) = (0, 0, 0);
    while runs < 100 {
        let d = r.gen_range(1..=2usize);
        let h = r.gen_range(1..=4u32);
        let l = r.gen_range(0..=h);
        let k = r.gen_range(0..=l);
        let leaves_only = r.gen_bool(0.5);
        if count_subforests(d, h, k, leaves_only) > 200_000 || count_subforests(d, h, l, leaves_only) > 200_000 {
            continue;
        }
        runs += 1;
        let sf = StrongForest::full(d, h).map_err(|e| e.to_string())?;
        let table: HashMap<Selector, u64> =
            Subforests::new(d, h, k, leaves_only).map(|s| (s, r.gen_range(0..2))).collect();
        let c = |s: &Selector| table[s];
        let got = monochromatize(&sf, &c, l, k, leaves_only, u128::MAX).map_err(|e| e.to_string())?;
        let mono = |s: &Selector| {
            let mut cols = Subforests::new(d, l, k, leaves_only).map(|inner| table[&s.compose(&inner)]);
            let first = cols.next();
            cols.all(|x| Some(x) == first)
        };
        match &got {
            Some(s) => {
                hits += 1;
                t.check(validate_selector(&sf, s, leaves_only), || format!("selector invalid d={d} h={h} l={l}"));
                t.check(s.height() == l && mono(s), || format!("selector not monochromatic d={d} h={h} l={l} k={k}"));
            }
            None => {
                misses += 1;
                let any = Subforests::new(d, h, l, leaves_only).any(|s| mono(&s));
                t.check(!any, || format!("none reported but one exists d={d} h={h} l={l} k={k}"));
            }
        }
        let single = with_jobs(Some(1), || monochromatize(&sf, &c, l, k, leaves_only, u128::MAX)).map_err(|e| e.to_string())?;
        t.check(single == got, || format!("parallel and single-thread selectors differ d={d} h={h}"));
    }
    t.finish(&format!("checks ({hits} monochromatic, {misses} exhaustively none)"))
}

pub fn tree_partition_runs() -> Outcome {
    let mut t = Tally::default();
    let mut r = rng(7);
    let lim = Limits::default();
    let (n, x) = (1u32, 2u64);
    for run in 0..100 {
        let b = 2 + (run % 3) as u64;
        let tree = RegularTree { branching: b, depth: 2 * n - 1 };
        let leaves: Vec<Vec<u64>> = tree.leaves().collect();
        let mut table = HashMap::new();
        for (i, p) in leaves.iter().enumerate() {
            for q in &leaves[i + 1..] {
                table.insert((p.clone(), q.clone()), r.gen_range(0..2u8));
            }
        }
        let f = |p: &[u64], q: &[u64]| table[&(p.to_vec(), q.to_vec())];
        let part = tree_partition(&tree, &f, x, n, &PartitionMode::Direct, &lim).map_err(|e| e.to_string())?;
        let s = &part.tree;
        // S ≅ x^{≤n}: root with x children, each a leaf of T
        t.check(s.children.len() == x as usize, || format!("root has {} children", s.children.len()));
        t.check(tree.contains(&s.node), || format!("root {:?} not in T", s.node));
        let ls = s.leaves();
        t.check(ls.len() == x.pow(n) as usize, || format!("{} leaves", ls.len()));
        for (i, l) in ls.iter().enumerate() {
            t.check(leaves.iter().any(|v| v.as_slice() == *l), || format!("{l:?} is not a leaf of T"));
            t.check(l.starts_with(&s.node) && l.len() > s.node.len(), || format!("{l:?} not below the root"));
            t.check(s.children[i].children.is_empty(), || "leaf with children".into());
        }
        let mut colors = Vec::new();
        for (i, p) in ls.iter().enumerate() {
            for q in &ls[i + 1..] {
                let (a, b2) = if p < q { (p, q) } else { (q, p) };
                colors.push(f(a, b2));
            }
        }
        colors.sort_unstable();
        colors.dedup();
        t.check(colors.len() <= 1 && colors.first().map_or(true, |&c| c == part.color), || format!("leaf colors {colors:?}"));
    }
    t.finish("tree partition checks")
}
