use super::coloring::{first_intransitive, Coloring};
use super::stabilize::{search_class, stabilize_blocks, Homogenize, Stabilized};
use super::{ExtractionReport, PipelineConfig, Property, Strategy};
use crate::error::{Error, Result};
use crate::largeness::{check_large, weaken_witness, FinSet, Mode, OrdIndex, SparsityPolicy, Variant, Witness};
use crate::milliken::{tree_partition, Limits, PartitionMode, RegularTree, SubTree};
use crate::pigeonhole::{rt1_extract, Rt1Form, UnaryColoring};
use crate::structure::{require, Block};

/// Exponent of a product-tree witness, read off its shape.
pub fn star_exponent(w: &Witness) -> u32 {
    match w {
        Witness::Exp { sub, .. } => sub.prod_depth() as u32,
        _ => 0,
    }
}

fn check_pairs(f: &Coloring, x: &FinSet) -> Result<()> {
    f.require_pairs()?;
    if f.colors() > 2 {
        return Err(Error::pre("pair colorings here take two colors"));
    }
    if x.is_empty() || !x.is_subset(f.carrier()) {
        return Err(Error::pre("input set is empty or leaves the coloring's carrier"));
    }
    Ok(())
}

/// A transitive ω^k-large* subset, following the block decomposition,
/// stabilization and tree-partition recursion.
pub fn em_extract(
    x: &FinSet,
    w: &Witness,
    f: &Coloring,
    k: u32,
    v: &Variant,
    cfg: &PipelineConfig,
) -> Result<ExtractionReport> {
    if !matches!(v, Variant::Star(_)) {
        return Err(Error::pre("this pipeline works with the product-tree notion"));
    }
    check_pairs(f, x)?;
    if let SparsityPolicy::Strict(_) | SparsityPolicy::Omega(_) = cfg.policy {
        return Err(Error::Policy("the sparsity function here is B(n, n), which cannot be evaluated; use lazy".into()));
    }
    let mut e = star_exponent(w);
    require(w, x, &OrdIndex::omega(e), v, "input witness")?;
    let mut w = w.clone();
    if cfg.strategy == Strategy::Paper {
        let want = 6 * k;
        if e < want {
            return Err(Error::pre(format!("input is w^{e}-large*, the published bound needs w^{want}")));
        }
        w = weaken_witness(&w, &OrdIndex::omega(e), &OrdIndex::omega(want))?;
        e = want;
    }
    let mut run = EmRun { f, v, cfg, trace: Vec::new() };
    let (set, witness) = run.go(&w, e, k)?;
    let rep = ExtractionReport { result: set, witness, index: OrdIndex::omega(k), property: Property::Transitive, trace: run.trace };
    rep.verify(f, v)?;
    Ok(rep)
}

struct EmRun<'a> {
    f: &'a Coloring,
    v: &'a Variant,
    cfg: &'a PipelineConfig,
    trace: Vec<String>,
}

impl EmRun<'_> {
    fn go(&mut self, w: &Witness, e: u32, k: u32) -> Result<(FinSet, Witness)> {
        let (f, v, cfg) = (self.f, self.v, self.cfg);
        if k == 0 {
            let m = w.min().expect("nonempty");
            return Ok((FinSet::singleton(m), Witness::leaf(m)));
        }
        let Witness::Exp { sub, .. } = w else {
            return Err(Error::InsufficientTree("a w^0 set cannot be split".into()));
        };
        let blocks = sub.blocks();
        if blocks.len() < 2 {
            return Err(Error::pre("pivot 1 leaves a single block to split"));
        }
        let x0 = blocks[0].max().expect("nonempty");
        let x1 = blocks[1].carrier();
        let u = UnaryColoring::from_fn(&x1, |y| f.pair(x0, y));

        let (y1, t) = match cfg.strategy {
            Strategy::Paper => {
                if e < 3 {
                    return Err(Error::InsufficientTree(format!("w^{e} leaves no room for the unary step")));
                }
                let h = rt1_extract(&x1, blocks[1], Rt1Form::Min, e - 3, &u, v, cfg.policy.clone())
                    .map_err(|err| err.at_stage("em/rt1"))?;
                (Block::new(h.set, h.witness), e - 3)
            }
            Strategy::BestEffort => {
                let mut found = None;
                for t in (1..e).rev() {
                    if let Some(b) = search_class(&x1, &u, t, v).map_err(|err| err.at_stage("em/rt1"))? {
                        found = Some((b, t));
                        break;
                    }
                }
                found.ok_or_else(|| Error::InsufficientTree(format!("no f({x0}, .)-class of the second block is w^1-large")))?
            }
        };
        let depth = 2 * k - 1;
        if t < depth {
            return Err(Error::InsufficientTree(format!("index tree has depth {t}, need {depth}")));
        }
        let Witness::Exp { pivot: p, sub: ysub } = &y1.witness else {
            return Err(Error::Invariant("homogeneous block lost its pivot".into()));
        };
        let b = match &cfg.partition {
            PartitionMode::Direct => *p,
            PartitionMode::Provider(prov) => {
                let sizes = prov.sizes(k, x0, &cfg.limits).map_err(|err| err.at_stage("em/provider"))?;
                let top = sizes.iter().copied().max().unwrap_or(0);
                if top >= 63 || (1u64 << top) > *p {
                    return Err(Error::sparsity(format!("branching: provider needs 2^{top} but min Y1 = {p}")));
                }
                1u64 << top
            }
        };
        self.trace.push(format!("k={k}: x0={x0}, Y1 is w^{t}-large* with min {p}, branching {b}"));
        let from = OrdIndex { n: t - 1, sigma: vec![*p; t as usize] };
        let to = OrdIndex { n: t - 1, sigma: vec![b; t as usize] };
        let tree_w = weaken_witness(ysub, &from, &to)?;

        let attempts: Vec<Homogenize> = match cfg.strategy {
            Strategy::Paper => vec![Homogenize::Proof],
            Strategy::BestEffort if k == 1 => vec![Homogenize::Search { exponent: 0 }],
            Strategy::BestEffort => (1..t).rev().map(|exponent| Homogenize::Search { exponent }).collect(),
        };
        let mut st: Option<Stabilized> = None;
        for how in attempts {
            match stabilize_blocks(&tree_w, &to, f, v, &cfg.policy, how) {
                Ok(s) => {
                    st = Some(s);
                    break;
                }
                Err(err) if cfg.strategy == Strategy::BestEffort && matches!(err.root(), Error::NotFound { .. }) => {}
                Err(err) => return Err(err.at_stage("em/stabilize")),
            }
        }
        let st = st.ok_or_else(|| Error::InsufficientTree("no block exponent stabilizes".into()))?;
        self.trace.push(format!("k={k}: {} blocks at {}", st.blocks.len(), st.block_index));

        let tree = RegularTree { branching: b, depth };
        let pos = |leaf: &[u64]| leaf.iter().fold(0usize, |acc, &c| acc * b as usize + c as usize);
        let ghat = |a: &[u64], c: &[u64]| {
            let (i, j) = (pos(a), pos(c));
            st.g[&(i.min(j), i.max(j))] as u8
        };
        let part = tree_partition(&tree, &ghat, x0, k, &cfg.partition, &cfg.limits).map_err(|err| err.at_stage("em/partition"))?;
        self.trace.push(format!("k={k}: partition color {}", part.color));

        let sub_w = self.assemble(&part.tree, &st, &pos, k)?;
        let h = Witness::exp(x0, sub_w);
        Ok((h.carrier(), h))
    }

    /// Witness tree shaped like the partition subtree, with the recursive
    /// extractions at its leaves.
    fn assemble(&mut self, s: &SubTree, st: &Stabilized, pos: &dyn Fn(&[u64]) -> usize, k: u32) -> Result<Witness> {
        if s.children.is_empty() {
            let blk = &st.blocks[pos(&s.node)];
            let (_, z) = self.go(&blk.witness, st.block_index.n, k - 1).map_err(|err| err.at_stage("em/recurse"))?;
            return Ok(z);
        }
        let mut kids: Vec<&SubTree> = s.children.iter().collect();
        kids.sort_by(|a, b| a.node.cmp(&b.node));
        let parts: Result<Vec<Witness>> = kids.into_iter().map(|c| self.assemble(c, st, pos, k)).collect();
        Ok(Witness::Prod(parts?))
    }
}

/// A homogeneous ω^n-large subset of a set on which `f` is transitive,
/// by branch and bound over monotone chains.
pub fn ads_extract(x: &FinSet, f: &Coloring, n: u32, v: &Variant, limits: &Limits) -> Result<ExtractionReport> {
    check_pairs(f, x)?;
    if let Some((a, b, c)) = first_intransitive(f, x) {
        return Err(Error::NotTransitive(format!("f({a},{b}) = f({b},{c}) but f({a},{c}) differs")));
    }
    let idx = OrdIndex::omega(n);
    let mut s = Chains { f, v, idx: &idx, color: 0, spent: 0, budget: limits.node_budget };
    for color in 0..f.colors() {
        s.color = color;
        if let Some((chain, w)) = s.dfs(&mut Vec::new(), x.elems())? {
            let rep = ExtractionReport::homogeneous(chain, w, idx, f, vec![format!("chain of color {color}")]);
            rep.verify(f, v)?;
            return Ok(rep);
        }
    }
    Err(Error::NotFound { exhaustive: true })
}

struct Chains<'a> {
    f: &'a Coloring,
    v: &'a Variant,
    idx: &'a OrdIndex,
    color: u64,
    spent: u64,
    budget: u64,
}

impl Chains<'_> {
    /// `cands` are the elements above the chain compatible with all of it.
    fn dfs(&mut self, chain: &mut Vec<u64>, cands: &[u64]) -> Result<Option<(FinSet, Witness)>> {
        self.spent += 1;
        if self.spent > self.budget {
            return Err(Error::NotFound { exhaustive: false });
        }
        let all = FinSet::new(chain.iter().chain(cands).copied().collect());
        let dec = check_large(&all, self.idx, self.v, Mode::Exact)?;
        if cands.is_empty() || !dec.is_large() {
            return Ok(dec.into_witness().map(|w| (all, w)));
        }
        let y = cands[0];
        let next: Vec<u64> = cands[1..].iter().copied().filter(|&z| self.f.pair(y, z) == self.color).collect();
        chain.push(y);
        if let Some(w) = self.dfs(chain, &next)? {
            return Ok(Some(w));
        }
        chain.pop();
        self.dfs(chain, &cands[1..])
    }
}

/// A homogeneous ω^n-large* subset: a transitive subset first, then a chain.
pub fn rt22_extract(
    x: &FinSet,
    w: &Witness,
    f: &Coloring,
    n: u32,
    v: &Variant,
    cfg: &PipelineConfig,
) -> Result<ExtractionReport> {
    check_pairs(f, x)?;
    if n == 0 {
        require(w, x, &OrdIndex::omega(star_exponent(w)), v, "input witness")?;
        let m = x.min().expect("nonempty");
        let rep = ExtractionReport::homogeneous(FinSet::singleton(m), Witness::leaf(m), OrdIndex::omega(0), f, Vec::new());
        rep.verify(f, v)?;
        return Ok(rep);
    }
    let k = match cfg.strategy {
        Strategy::Paper => 2 * n * n + 2 * n + 1,
        Strategy::BestEffort => n,
    };
    let em = em_extract(x, w, f, k, v, cfg).map_err(|e| e.at_stage("em"))?;
    let ads = ads_extract(&em.result, f, n, v, &cfg.limits).map_err(|e| e.at_stage("ads"))?;
    let mut trace = em.trace;
    trace.push(format!("transitive subset {} at w^{k}", em.result));
    trace.extend(ads.trace);
    Ok(ExtractionReport { trace, ..ads })
}
