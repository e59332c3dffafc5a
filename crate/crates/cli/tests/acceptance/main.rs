//! Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers
//! as arguments to run a subset.

mod basics;
mod cli;
mod extractors;
mod tables;
mod trees;

use std::time::{Duration, Instant};

use largeness_core::formula::Theta;
use largeness_core::largeness::{check_large, FinSet, Mode, OrdIndex, Variant, Witness};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Summary on success, a description of the first violations on failure.
pub type Outcome = Result<String, String>;

struct Criterion {
    id: u8,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

const fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

const CRITERIA: &[Criterion] = &[
    Criterion { id: 1, name: "oracle equivalence", limit: secs(300), run: basics::oracle_equivalence },
    Criterion { id: 2, name: "closure suite", limit: secs(120), run: basics::closure_suite },
    Criterion { id: 3, name: "apartness laws", limit: secs(60), run: basics::apartness_laws },
    Criterion { id: 4, name: "tree bijection", limit: secs(60), run: basics::tree_bijection },
    Criterion { id: 5, name: "extractor certification", limit: secs(600), run: extractors::certification },
    Criterion { id: 6, name: "milliken micro", limit: secs(600), run: trees::milliken_micro },
    Criterion { id: 7, name: "tree partition", limit: secs(300), run: trees::tree_partition_runs },
    Criterion { id: 8, name: "pipelines", limit: secs(600), run: extractors::pipelines },
    Criterion { id: 9, name: "bound table", limit: secs(10), run: tables::bound_table },
    Criterion { id: 10, name: "ramsey anchor", limit: secs(10), run: tables::ramsey_anchor },
    Criterion { id: 11, name: "cli contract", limit: secs(60), run: cli::contract },
];

fn main() {
    let wanted: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for c in CRITERIA.iter().filter(|c| wanted.is_empty() || wanted.contains(&c.id)) {
        let start = Instant::now();
        let res = std::panic::catch_unwind(c.run).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let took = start.elapsed();
        let (ok, detail) = match res {
            Ok(s) if took <= c.limit => (true, s),
            Ok(s) => (false, format!("{s}; over the time limit")),
            Err(e) => (false, e),
        };
        failed += usize::from(!ok);
        println!(
            "{} {:>2} {:<24} {:>8.2}s / {:>3}s  {detail}",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            took.as_secs_f64(),
            c.limit.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

// ------------------------------------------------------------ shared helpers

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn star() -> Variant {
    Variant::star(Theta::trivial())
}

pub fn theta(text: &str) -> Theta {
    Theta::parse(text).expect("fixed formula parses")
}

pub fn idx(s: &str) -> OrdIndex {
    s.parse().expect("fixed index parses")
}

pub fn witness(f: &FinSet, i: &OrdIndex, v: &Variant) -> Option<Witness> {
    check_large(f, i, v, Mode::Exact).expect("decider runs").into_witness()
}

/// Least `hi` with `{lo..hi}` large, by doubling then bisection.
pub fn least_range(lo: u64, i: &OrdIndex, v: &Variant, cap: u64) -> Option<FinSet> {
    let large = |hi: u64| witness(&FinSet::range(lo, hi), i, v).is_some();
    let mut hi = lo;
    while !large(hi) {
        if hi - lo > cap {
            return None;
        }
        hi = lo + 2 * (hi - lo) + 1;
    }
    let (mut a, mut b) = (lo, hi);
    while a < b {
        let m = a + (b - a) / 2;
        if large(m) {
            b = m;
        } else {
            a = m + 1;
        }
    }
    Some(FinSet::range(lo, b))
}

/// Collects violation messages, keeping the first few.
#[derive(Default)]
pub struct Tally {
    pub checks: usize,
    pub bad: Vec<String>,
}

impl Tally {
    pub fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.bad.push(msg());
        }
    }

    pub fn finish(self, what: &str) -> Outcome {
        if self.bad.is_empty() {
            Ok(format!("{} {what}, 0 violations", self.checks))
        } else {
            let first: Vec<&str> = self.bad.iter().take(3).map(String::as_str).collect();
            Err(format!("{} violations of {} checks; first: {}", self.bad.len(), self.checks, first.join(" | ")))
        }
    }
}
