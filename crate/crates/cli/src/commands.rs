use std::fs;
use std::path::{Path, PathBuf};

use largeness_core::formula::Theta;
use largeness_core::largeness::{
    check_large_with, check_sparse, validate_trace, witness_from_json, witness_to_json, Config, Decision, FinSet, Growth,
    Mode, OrdIndex, SparsityPolicy, Variant, Witness,
};
use largeness_core::milliken::{
    is_monochromatic, milliken_number_search, monochromatize, BoundProvider, Limits, PartitionMode, Selector,
    StrongForest,
};
use largeness_core::pigeonhole::{pigeonhole_extract, rt1_extract, PigeonInstance, Rt1Form, UnaryColoring};
use largeness_core::pipelines::{
    ads_extract, check_p_large_with, em_extract, is_homogeneous, paper_bound, paper_bounds, ramsey_number, rt22_extract,
    stabilize_blocks, Coloring, ExtractionReport, Homogenize, PipelineConfig, Property, Statement, Strategy,
    P_LARGE_CAP,
};
use largeness_core::Error;

use crate::*;

type Res<T> = std::result::Result<T, CliError>;

const SEARCHED_CAP: u32 = 8;

pub fn run(cmd: Command) -> Res<Outcome> {
    match cmd {
        Command::Check(a) => check(a),
        Command::Witness(WitnessCmd::Validate(a)) => validate(a),
        Command::Extract(a) => extract(a),
        Command::Milliken(MillikenCmd::Search(a)) => mil_search(a),
        Command::Milliken(MillikenCmd::Mono(a)) => mono(a),
        Command::Oracle(OracleCmd::PLarge(a)) => p_large(a),
        Command::Bounds(a) => bounds(a),
        Command::Ramsey(a) => ramsey(a),
    }
}

// ---------------------------------------------------------------- inputs

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, text: &str) -> Res<()> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> Res<T> {
    Ok(s.parse::<T>()?)
}

fn node_budget() -> Res<Option<u64>> {
    match std::env::var(NODE_BUDGET_VAR) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("{NODE_BUDGET_VAR} must be a nonnegative integer, got `{s}`"))),
        Err(_) => Ok(None),
    }
}

fn config() -> Res<Config> {
    let mut c = Config::default();
    if let Some(b) = node_budget()? {
        c.node_budget = b;
    }
    Ok(c)
}

fn limits() -> Res<Limits> {
    let mut l = Limits::default();
    if let Some(b) = node_budget()? {
        l.node_budget = b;
    }
    Ok(l)
}

fn variant(a: &NotionArgs, default: NotionArg) -> Res<Variant> {
    let text = match (&a.theta, &a.theta_file) {
        (Some(t), _) => Some(t.clone()),
        (None, Some(p)) => Some(read(p)?),
        (None, None) => None,
    };
    let theta = || -> Res<Theta> { Ok(text.as_deref().map(Theta::parse).transpose()?.unwrap_or_else(Theta::trivial)) };
    Ok(match a.notion.unwrap_or(default) {
        NotionArg::Ks => Variant::Ks,
        NotionArg::Theta => Variant::theta(theta()?),
        NotionArg::Star => Variant::star(theta()?),
    })
}

fn sparse_policy(s: &str) -> Res<SparsityPolicy> {
    let t = s.trim().to_ascii_lowercase();
    Ok(match t.as_str() {
        "exp4" => SparsityPolicy::Strict(Growth::Exp4),
        "poly" => SparsityPolicy::Strict(Growth::Poly),
        "none" => SparsityPolicy::None,
        _ => {
            let n = t
                .strip_prefix("omega:")
                .and_then(|n| n.parse().ok())
                .ok_or_else(|| CliError::Usage(format!("unknown sparsity `{s}`")))?;
            SparsityPolicy::Omega(n)
        }
    })
}

fn load_witness(path: &Path) -> Res<Witness> {
    let text = read(path)?;
    let v: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::Parse { pos: e.line(), msg: format!("{}: {e}", path.display()) })?;
    Ok(witness_from_json(&v)?)
}

fn witness_text(w: &Witness) -> String {
    let mut s = serde_json::to_string_pretty(&witness_to_json(w)).expect("json values serialize");
    s.push('\n');
    s
}

fn provider(s: &str) -> Res<PartitionMode> {
    let bad = || CliError::Usage(format!("unknown provider `{s}`"));
    if s == "direct" {
        return Ok(PartitionMode::Direct);
    }
    if s == "searched" {
        return Ok(PartitionMode::Provider(BoundProvider::Searched { cap: SEARCHED_CAP }));
    }
    if let Some(cap) = s.strip_prefix("searched:") {
        let cap = cap.parse().map_err(|_| bad())?;
        return Ok(PartitionMode::Provider(BoundProvider::Searched { cap }));
    }
    let file = s.strip_prefix("optimistic:").ok_or_else(bad)?;
    let text = read(Path::new(file))?;
    let sizes = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, l)| l.parse::<u32>().map_err(|_| Error::Parse { pos: i + 1, msg: format!("bad size `{l}`") }))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(PartitionMode::Provider(BoundProvider::Optimistic(sizes)))
}

// ---------------------------------------------------------------- check

fn check(a: CheckArgs) -> Res<Outcome> {
    let f: FinSet = parse(&a.set)?;
    let idx: OrdIndex = parse(&a.alpha)?;
    let v = variant(&a.notion, NotionArg::Ks)?;
    let mode = match a.mode {
        ModeArg::Exact => Mode::Exact,
        ModeArg::Greedy => Mode::Greedy,
    };
    if let Some(p) = &a.sparse {
        if !check_sparse(&f, &sparse_policy(p)?)? {
            return Ok(Outcome::fail("not sparse"));
        }
    }
    Ok(match check_large_with(&f, &idx, &v, mode, &config()?)? {
        Decision::Large(w) => {
            if let Some(p) = &a.emit {
                write(p, &witness_text(&w))?;
            }
            Outcome::ok("large")
        }
        Decision::NotLarge => Outcome::fail("not large"),
        Decision::Inconclusive => Outcome::fail("inconclusive"),
    })
}

fn validate(a: ValidateArgs) -> Res<Outcome> {
    let w = load_witness(&a.file)?;
    let f = match &a.set {
        Some(s) => parse(s)?,
        None => w.carrier(),
    };
    let idx: OrdIndex = parse(&a.alpha)?;
    let v = variant(&a.notion, NotionArg::Ks)?;
    Ok(match validate_trace(&w, &f, &idx, &v) {
        Ok(()) => Outcome::ok("valid"),
        Err(msg) => Outcome::fail(format!("invalid: {msg}")),
    })
}

// ---------------------------------------------------------------- extract

/// What an extraction produced, already re-verified.
struct Extracted {
    result: FinSet,
    witness: Witness,
    index: OrdIndex,
    property: String,
    trace: Vec<String>,
}

impl From<ExtractionReport> for Extracted {
    fn from(r: ExtractionReport) -> Self {
        let property = match r.property {
            Property::Transitive => "transitive".to_string(),
            Property::Homogeneous { color: Some(c) } => format!("homogeneous color {c}"),
            Property::Homogeneous { color: None } => "homogeneous".to_string(),
        };
        Extracted { result: r.result, witness: r.witness, index: r.index, property, trace: r.trace }
    }
}

fn unary(col: &Coloring, x: &FinSet) -> Res<UnaryColoring> {
    if col.arity() != 1 {
        return Err(CliError::Usage(format!("this pipeline needs a unary coloring, got arity {}", col.arity())));
    }
    if !x.is_subset(col.carrier()) {
        return Err(Error::pre("coloring does not cover the input set").into());
    }
    Ok(UnaryColoring::from_fn(x, |e| col.get(&[e]).expect("checked domain")))
}

fn pipeline_name(p: PipelineArg) -> &'static str {
    match p {
        PipelineArg::Pigeonhole => "pigeonhole",
        PipelineArg::Rt1 => "rt1",
        PipelineArg::Grouping => "grouping",
        PipelineArg::Em => "em",
        PipelineArg::Ads => "ads",
        PipelineArg::Rt22 => "rt22",
    }
}

fn extract(a: ExtractArgs) -> Res<Outcome> {
    let col_path = a.coloring.as_ref().ok_or_else(|| CliError::Usage("--coloring is required".into()))?;
    let col: Coloring = parse(&read(col_path)?)?;
    let needs_witness = a.pipeline != PipelineArg::Ads;
    let w = match &a.witness {
        Some(p) => Some(load_witness(p)?),
        None if needs_witness => return Err(CliError::Usage("--witness is required".into())),
        None => None,
    };
    let x = match (&a.set, &w) {
        (Some(s), _) => parse(s)?,
        (None, Some(w)) => w.carrier(),
        (None, None) => col.carrier().clone(),
    };
    let v = variant(&a.notion, NotionArg::Star)?;
    let policy = match a.policy {
        PolicyArg::Strict => SparsityPolicy::Strict(Growth::Exp4),
        PolicyArg::Lazy => SparsityPolicy::Lazy,
        PolicyArg::None => SparsityPolicy::None,
    };
    let lim = limits()?;
    let cfg = PipelineConfig {
        strategy: if a.paper { Strategy::Paper } else { Strategy::BestEffort },
        partition: provider(&a.provider)?,
        policy: policy.clone(),
        limits: lim,
    };
    let need_a = || a.a.ok_or_else(|| CliError::Usage("--a is required".into()));
    let w = || w.clone().expect("checked above");

    let out: Extracted = match a.pipeline {
        PipelineArg::Pigeonhole => {
            let inst = PigeonInstance {
                coloring: unary(&col, &x)?,
                x: x.clone(),
                witness: w(),
                n: a.n,
                a: need_a()?,
                ks: a.ks.clone(),
                variant: v.clone(),
                policy,
            };
            let h = pigeonhole_extract(&inst)?;
            Extracted { result: h.set, witness: h.witness, index: inst.target(), property: format!("color {}", h.color), trace: vec![] }
        }
        PipelineArg::Rt1 => {
            let form = a.a.map_or(Rt1Form::Min, |a| Rt1Form::Bounded { a });
            let h = rt1_extract(&x, &w(), form, a.n, &unary(&col, &x)?, &v, policy)?;
            Extracted { result: h.set, witness: h.witness, index: OrdIndex::omega(a.n), property: format!("color {}", h.color), trace: vec![] }
        }
        PipelineArg::Grouping => {
            let alpha = a.alpha.as_ref().ok_or_else(|| CliError::Usage("--alpha is required for grouping".into()))?;
            let idx: OrdIndex = parse(alpha)?;
            let how = a.target.map_or(Homogenize::Proof, |exponent| Homogenize::Search { exponent });
            let st = stabilize_blocks(&w(), &idx, &col, &v, &policy, how)?;
            let trace = st.g.iter().map(|((i, j), c)| format!("g {i} {j} {c}")).collect();
            Extracted {
                result: st.union(),
                witness: st.witness.clone(),
                index: st.index(),
                property: format!("stabilized {} blocks", st.blocks.len()),
                trace,
            }
        }
        PipelineArg::Em => em_extract(&x, &w(), &col, a.k, &v, &cfg)?.into(),
        PipelineArg::Ads => ads_extract(&x, &col, a.n, &v, &lim)?.into(),
        PipelineArg::Rt22 => rt22_extract(&x, &w(), &col, a.n, &v, &cfg)?.into(),
    };
    verify(&out, &col, &v, a.pipeline)?;

    if let Some(dir) = &a.out {
        write_outputs(dir, pipeline_name(a.pipeline), &x, &out)?;
    }
    Ok(Outcome::ok(out.result.to_string()))
}

/// Independent re-check of every output before anything is written.
fn verify(out: &Extracted, col: &Coloring, v: &Variant, p: PipelineArg) -> Res<()> {
    validate_trace(&out.witness, &out.result, &out.index, v)
        .map_err(|e| Error::Invariant(format!("output witness: {e}")))?;
    let ok = match p {
        PipelineArg::Pigeonhole | PipelineArg::Rt1 => {
            let c: std::collections::BTreeSet<u64> = out.result.iter().map(|e| col.get(&[e])).collect::<Result<_, _>>()?;
            c.len() == 1
        }
        PipelineArg::Grouping => true,
        PipelineArg::Em if out.property == "transitive" => largeness_core::pipelines::is_transitive(col, &out.result),
        _ => is_homogeneous(col, &out.result),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Invariant(format!("output is not {}", out.property)).into())
    }
}

fn write_outputs(dir: &PathBuf, name: &str, input: &FinSet, out: &Extracted) -> Res<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
    write(&dir.join("result.txt"), &format!("{}\n", out.result))?;
    write(&dir.join("witness.json"), &witness_text(&out.witness))?;
    let mut report = vec![
        format!("pipeline {name}"),
        format!("input {input}"),
        format!("result {}", out.result),
        format!("index {}", out.index),
        format!("property {}", out.property),
        "verified ok".to_string(),
    ];
    report.extend(out.trace.iter().map(|t| format!("trace {t}")));
    write(&dir.join("report.txt"), &(report.join("\n") + "\n"))
}

// ---------------------------------------------------------------- misc

fn mil_search(a: MilSearchArgs) -> Res<Outcome> {
    Ok(match milliken_number_search(a.d, a.l, a.k, a.r, a.cap, &limits()?)? {
        Some(n) => Outcome::ok(n.to_string()),
        None => Outcome::fail("none"),
    })
}

fn show_selector(s: &Selector) -> String {
    let levels: Vec<String> = s.levels().iter().map(u32::to_string).collect();
    let mut out = format!("levels {}", levels.join(","));
    for i in 0..s.d() {
        let nodes: Vec<String> = s.tree(i).iter().map(|n| n.to_string()).collect();
        out.push_str(&format!(" t{i} {}", nodes.join(",")));
    }
    out
}

fn mono(a: MonoArgs) -> Res<Outcome> {
    if a.r == 0 {
        return Err(CliError::Usage("--r must be positive".into()));
    }
    let sf = StrongForest::full(a.d, a.height)?;
    let r = a.r;
    let c = move |s: &Selector| -> u64 {
        match a.rule {
            RuleArg::LevelSum => s.levels().iter().map(|&l| l as u64).sum::<u64>() % r,
            RuleArg::LeafBits => s.leaves(0).map(|n| n.bits().count_ones() as u64).sum::<u64>() % r,
        }
    };
    Ok(match monochromatize(&sf, &c, a.l, a.k, a.leaves_only, a.cap)? {
        Some(s) if is_monochromatic(&s, &c, a.k, a.leaves_only) => Outcome::ok(show_selector(&s)),
        Some(_) => return Err(Error::Invariant("selector is not monochromatic".into()).into()),
        None => Outcome::fail("none"),
    })
}

fn p_large(a: PLargeArgs) -> Res<Outcome> {
    let f: FinSet = parse(&a.set)?;
    let idx: OrdIndex = parse(&a.alpha)?;
    let st: Statement = parse(&a.statement)?;
    let v = variant(&a.notion, NotionArg::Ks)?;
    Ok(if check_p_large_with(&f, &st, &idx, &v, a.cap.unwrap_or(P_LARGE_CAP))? {
        Outcome::ok("true")
    } else {
        Outcome::fail("false")
    })
}

fn bounds(a: BoundsArgs) -> Res<Outcome> {
    let st: Statement = parse(&a.statement)?;
    let notion = match a.notion {
        NotionArg::Ks => largeness_core::largeness::Notion::Ks,
        NotionArg::Theta => largeness_core::largeness::Notion::Theta,
        NotionArg::Star => largeness_core::largeness::Notion::Star,
    };
    let line = if a.all {
        paper_bounds(&st, a.n, notion)?.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
    } else {
        paper_bound(&st, a.n, notion)?.to_string()
    };
    Ok(Outcome::ok(line))
}

fn ramsey(a: RamseyArgs) -> Res<Outcome> {
    Ok(Outcome::ok(ramsey_number(a.colors, a.size, a.cap, limits()?.node_budget)?.to_string()))
}
