use serde_json::{json, Value};

use super::{FinSet, Witness};
use crate::error::{Error, Result};

fn num(x: u64) -> Value {
    Value::String(x.to_string())
}

/// `{"kind":"leaf","set":[…]}`, `{"kind":"exp","pivot":m,"sub":…}` or
/// `{"kind":"prod","children":[…]}`; integers are decimal strings.
pub fn witness_to_json(w: &Witness) -> Value {
    match w {
        Witness::Leaf(s) => json!({"kind": "leaf", "set": s.iter().map(num).collect::<Vec<_>>()}),
        Witness::Exp { pivot, sub } => json!({"kind": "exp", "pivot": num(*pivot), "sub": witness_to_json(sub)}),
        Witness::Prod(c) => json!({"kind": "prod", "children": c.iter().map(witness_to_json).collect::<Vec<_>>()}),
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Parse { pos: 0, msg: msg.into() }
}

fn parse_num(v: &Value) -> Result<u64> {
    match v {
        Value::String(s) => s.parse().map_err(|_| bad(format!("bad integer `{s}`"))),
        Value::Number(n) => n.as_u64().ok_or_else(|| bad("bad integer")),
        _ => Err(bad("expected an integer string")),
    }
}

pub fn witness_from_json(v: &Value) -> Result<Witness> {
    let kind = v.get("kind").and_then(Value::as_str).ok_or_else(|| bad("missing `kind`"))?;
    match kind {
        "leaf" => {
            let items = v.get("set").and_then(Value::as_array).ok_or_else(|| bad("leaf needs `set`"))?;
            let elems = items.iter().map(parse_num).collect::<Result<Vec<_>>>()?;
            Ok(Witness::Leaf(FinSet::new(elems)))
        }
        "exp" => {
            let pivot = parse_num(v.get("pivot").ok_or_else(|| bad("exp needs `pivot`"))?)?;
            let sub = witness_from_json(v.get("sub").ok_or_else(|| bad("exp needs `sub`"))?)?;
            Ok(Witness::exp(pivot, sub))
        }
        "prod" => {
            let items = v.get("children").and_then(Value::as_array).ok_or_else(|| bad("prod needs `children`"))?;
            Ok(Witness::Prod(items.iter().map(witness_from_json).collect::<Result<Vec<_>>>()?))
        }
        other => Err(bad(format!("unknown kind `{other}`"))),
    }
}
