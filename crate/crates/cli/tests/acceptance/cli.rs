use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;

use largeness_core::largeness::{validate_witness, witness_from_json, witness_to_json, FinSet, OrdIndex};
use largeness_core::pipelines::{is_homogeneous, Coloring};

use super::{idx, star, Outcome, Tally};

const BIN: &str = env!("CARGO_BIN_EXE_largeness-lab");

struct Case {
    args: &'static str,
    code: i32,
    stdout: Option<&'static str>,
}

const fn case(args: &'static str, code: i32, stdout: Option<&'static str>) -> Case {
    Case { args, code, stdout }
}

/// `$D` is the scratch directory. Arguments are split on `|`.
const SCRIPT: [Case; 20] = [
    case("check|--set|{3,4,5,6}|--alpha|w^1|--notion|ks", 0, Some("large")),
    case("check|--set|{3,4,5}|--alpha|w^1|--notion|ks", 1, Some("not large")),
    case("check|--set|{3,4}|--alpha|w^^", 3, None),
    case("check|--set|{2..62}|--alpha|w^2|--notion|star|--emit|$D/w2.json", 0, Some("large")),
    case("witness|validate|--file|$D/w2.json|--alpha|w^2|--notion|star", 0, Some("valid")),
    case("witness|validate|--file|$D/w2.json|--alpha|w^3|--notion|star", 1, None),
    case("check|--set|{3..20}|--alpha|w^1*(2)|--notion|star|--emit|$D/w1.json", 0, Some("large")),
    case("extract|--pipeline|pigeonhole|--witness|$D/w1.json|--coloring|$D/u.col|--n|0|--a|2|--out|$D/pig", 0, Some("{3}")),
    case("witness|validate|--file|$D/pig/witness.json|--alpha|w^0|--notion|star", 0, Some("valid")),
    case("extract|--pipeline|pigeonhole|--witness|$D/w1.json|--coloring|$D/u.col|--n|0|--a|2|--policy|strict", 2, None),
    case("extract|--pipeline|em|--k|0|--witness|$D/w2.json|--coloring|$D/p.col|--out|$D/em", 0, Some("{2}")),
    case("extract|--pipeline|em|--k|0|--witness|$D/w2.json", 3, None),
    case("extract|--pipeline|ads|--n|1|--coloring|$D/t.col|--out|$D/ads", 0, None),
    case("extract|--pipeline|ads|--n|1|--coloring|$D/bad.col", 2, None),
    case("bounds|--statement|rt2_2|--n|1|--notion|star", 0, Some("w^30")),
    case("bounds|--statement|rt3_2|--n|1|--notion|ks", 2, None),
    case("ramsey|--colors|2|--size|3|--cap|10", 0, Some("6")),
    case("ramsey|--colors|2|--size|3|--cap|5", 4, None),
    case("milliken|search|--d|1|--l|1|--k|1|--r|1|--cap|4", 0, Some("1")),
    case("oracle|p-large|--set|{3..6}|--alpha|w^0|--statement|rt2_2", 0, Some("true")),
];

fn write(path: &Path, text: String) -> Result<(), String> {
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn inputs(dir: &Path) -> Result<(), String> {
    let err = |e: largeness_core::Error| e.to_string();
    let unary = Coloring::from_fn(1, 2, FinSet::range(3, 20), |t| t[0] % 2).map_err(err)?;
    write(&dir.join("u.col"), unary.to_string())?;
    let p = Coloring::pairs(2, FinSet::range(2, 62), |a, b| (a + b) % 2).map_err(err)?;
    write(&dir.join("p.col"), p.to_string())?;
    let t = Coloring::pairs(2, FinSet::range(3, 8), |a, _| a % 2).map_err(err)?;
    write(&dir.join("t.col"), t.to_string())?;
    let bad = Coloring::pairs(2, FinSet::range(3, 8), |a, b| (a + b) % 2).map_err(err)?;
    write(&dir.join("bad.col"), bad.to_string())
}

/// (exit code, stdout, stderr) per case, with the directory masked.
type Run = Vec<(i32, String, String)>;

fn run_script(dir: &Path, extra: &[&str]) -> Result<Run, String> {
    inputs(dir)?;
    let d = dir.to_str().ok_or("non-utf8 temp dir")?;
    let mut out = Vec::new();
    for c in &SCRIPT {
        let args: Vec<String> = c.args.split('|').map(|a| a.replace("$D", d)).collect();
        let o = Command::new(BIN)
            .args(&args)
            .args(extra)
            .env_remove("LARGENESS_LAB_NODE_BUDGET")
            .output()
            .map_err(|e| format!("spawn: {e}"))?;
        let mask = |b: &[u8]| String::from_utf8_lossy(b).replace(d, "$D");
        out.push((o.status.code().unwrap_or(-1), mask(&o.stdout), mask(&o.stderr)));
    }
    Ok(out)
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(p) = stack.pop() {
        for entry in fs::read_dir(&p).into_iter().flatten().flatten() {
            let path = entry.path();
            if path.is_dir() {
                stack.push(path);
            } else if let Ok(bytes) = fs::read(&path) {
                out.insert(path.strip_prefix(dir).unwrap().display().to_string(), bytes);
            }
        }
    }
    out
}

fn round_trip(t: &mut Tally, dir: &Path, file: &str, set: Option<FinSet>, i: &OrdIndex) -> Result<(), String> {
    let text = fs::read_to_string(dir.join(file)).map_err(|e| format!("{file}: {e}"))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| format!("{file}: {e}"))?;
    let w = witness_from_json(&value).map_err(|e| format!("{file}: {e}"))?;
    let f = set.unwrap_or_else(|| w.carrier());
    t.check(validate_witness(&w, &f, i, &star()), || format!("{file} does not validate at {i}"));
    t.check(witness_to_json(&w) == value, || format!("{file} changes on re-emission"));
    Ok(())
}

pub fn contract() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let first = run_script(a.path(), &[])?;
    let second = run_script(b.path(), &["--jobs", "1"])?;
    let mut t = Tally::default();
    for (i, (c, (code, stdout, stderr))) in SCRIPT.iter().zip(&first).enumerate() {
        t.check(*code == c.code, || format!("case {} `{}`: exit {code}, want {} ({})", i + 1, c.args, c.code, stderr.trim()));
        if let Some(want) = c.stdout {
            t.check(stdout.trim_end() == want, || format!("case {}: stdout `{}`, want `{want}`", i + 1, stdout.trim_end()));
        }
        t.check(c.code == 0 || !stderr.is_empty() || !stdout.is_empty(), || format!("case {}: silent failure", i + 1));
    }
    // the ads result is checked here rather than frozen
    let ads: FinSet = first[12].1.trim().parse().map_err(|e| format!("ads stdout: {e}"))?;
    let tcol: Coloring = fs::read_to_string(a.path().join("t.col")).map_err(|e| e.to_string())?.parse().map_err(|e| format!("{e}"))?;
    t.check(is_homogeneous(&tcol, &ads) && validate_witness_file(a.path(), "ads/witness.json", &ads), || format!("ads result {ads}"));

    round_trip(&mut t, a.path(), "w2.json", Some(FinSet::range(2, 62)), &idx("w^2"))?;
    round_trip(&mut t, a.path(), "w1.json", Some(FinSet::range(3, 20)), &idx("w^1*(2)"))?;
    round_trip(&mut t, a.path(), "pig/witness.json", None, &idx("w^0"))?;
    round_trip(&mut t, a.path(), "em/witness.json", None, &idx("w^0"))?;
    round_trip(&mut t, a.path(), "ads/witness.json", Some(ads.clone()), &idx("w^1"))?;

    t.check(first == second, || {
        let i = first.iter().zip(&second).position(|(x, y)| x != y).unwrap_or(0);
        format!("case {} differs between runs: {:?} vs {:?}", i + 1, first[i], second[i])
    });
    let (fa, fb) = (files(a.path()), files(b.path()));
    t.check(fa == fb, || format!("emitted files differ: {:?}", fa.keys().collect::<Vec<_>>()));
    t.finish(&format!("checks over {} cases, {} files compared", SCRIPT.len(), fa.len()))
}

fn validate_witness_file(dir: &Path, file: &str, set: &FinSet) -> bool {
    let Ok(text) = fs::read_to_string(dir.join(file)) else { return false };
    let Ok(value) = serde_json::from_str::<serde_json::Value>(&text) else { return false };
    witness_from_json(&value).is_ok_and(|w| validate_witness(&w, set, &idx("w^1"), &star()))
}
