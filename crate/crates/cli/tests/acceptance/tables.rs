use largeness_core::largeness::{FinSet, Notion};
use largeness_core::pipelines::{is_homogeneous, paper_bound, paper_bounds, ramsey_counterexample, ramsey_number, Statement};

use super::{Outcome, Tally};

const TABLE: &str = include_str!("../fixtures/paper_table.txt");
const BUDGET: u64 = 50_000_000;

pub fn bound_table() -> Outcome {
    let mut t = Tally::default();
    for line in TABLE.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        let mut words = line.split_whitespace();
        let (Some(st), Some(no), Some(n)) = (words.next(), words.next(), words.next()) else {
            return Err(format!("bad fixture line `{line}`"));
        };
        let want: Vec<&str> = words.collect();
        let st: Statement = st.parse().map_err(|e| format!("{e}"))?;
        let notion: Notion = no.parse().map_err(|e| format!("{e}"))?;
        let n: u32 = n.parse().map_err(|_| format!("bad n in `{line}`"))?;
        let got: Vec<String> = paper_bounds(&st, n, notion).map_err(|e| e.to_string())?.iter().map(ToString::to_string).collect();
        t.check(got == want, || format!("{st} {notion} n={n}: got {got:?}"));
        let first = paper_bound(&st, n, notion).map_err(|e| e.to_string())?.to_string();
        t.check(first == want[0], || format!("{st} {notion} n={n}: first bound {first}"));
    }
    t.finish("table entries")
}

fn has_mono_triangle(col: &dyn Fn(usize, usize) -> bool, r: usize) -> bool {
    (0..r).any(|a| (a + 1..r).any(|b| (b + 1..r).any(|c| col(a, b) == col(b, c) && col(a, b) == col(a, c))))
}

pub fn ramsey_anchor() -> Outcome {
    let mut t = Tally::default();
    let r = ramsey_number(2, 3, 10, BUDGET).map_err(|e| e.to_string())?;
    t.check(r == 6, || format!("R(3,3) = {r}"));
    let five = ramsey_counterexample(2, 3, 5, BUDGET).map_err(|e| e.to_string())?.ok_or("no counterexample on 5 vertices")?;
    for a in 0..5u64 {
        for b in a + 1..5 {
            for c in b + 1..5 {
                t.check(!is_homogeneous(&five, &FinSet::new(vec![a, b, c])), || format!("triangle {a}{b}{c} is monochromatic"));
            }
        }
    }
    // every 2-coloring of the 15 edges of K6 has a monochromatic triangle
    let edges: Vec<(usize, usize)> = (0..6).flat_map(|a| (a + 1..6).map(move |b| (a, b))).collect();
    let all = (0u32..1 << edges.len()).all(|mask| {
        let col = |a: usize, b: usize| {
            let i = edges.iter().position(|&e| e == (a.min(b), a.max(b))).unwrap();
            mask >> i & 1 == 1
        };
        has_mono_triangle(&col, 6)
    });
    t.check(all, || "a coloring of K6 avoids monochromatic triangles".into());
    let six = ramsey_counterexample(2, 3, 6, BUDGET).map_err(|e| e.to_string())?;
    t.check(six.is_none(), || "library found a counterexample on 6 vertices".into());
    t.finish("checks, R(3,3) = 6")
}
