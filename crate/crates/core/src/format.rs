//! Canonical text formats for instances and allocations.
//!
//! Instances are single-line JSON objects with keys in the fixed order
//! `agents`, `items`, `valuations`, `edges`. Allocations are `{"bundles":[...]}`.
//! All indices are 0-based. See `docs/formats.md` for the grammar.

use serde_json::Value;

use crate::model::{validate_instance, Allocation, Instance, ModelError, RawInstance};
use crate::value::{format_rational, parse_rational};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("field {0:?} is missing or has the wrong type")]
    Field(&'static str),
    #[error("invalid value: {0}")]
    Value(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn usize_of(v: &Value, field: &'static str) -> Result<usize, FormatError> {
    v.as_u64().map(|x| x as usize).ok_or(FormatError::Field(field))
}

/// Parses an instance document and validates it.
pub fn parse_instance(text: &str) -> Result<Instance, FormatError> {
    let doc: Value = serde_json::from_str(text)?;
    let agents = usize_of(doc.get("agents").ok_or(FormatError::Field("agents"))?, "agents")?;
    let items = usize_of(doc.get("items").ok_or(FormatError::Field("items"))?, "items")?;
    let rows = doc.get("valuations").and_then(Value::as_array).ok_or(FormatError::Field("valuations"))?;
    let mut valuations = Vec::with_capacity(rows.len());
    for row in rows {
        let row = row.as_array().ok_or(FormatError::Field("valuations"))?;
        let mut parsed = Vec::with_capacity(row.len());
        for entry in row {
            let r = match entry {
                Value::Number(n) if n.is_i64() => crate::value::int(n.as_i64().unwrap()),
                Value::String(s) => parse_rational(s).map_err(|e| FormatError::Value(e.to_string()))?,
                other => return Err(FormatError::Value(format!("valuation entry {other}"))),
            };
            parsed.push(r);
        }
        valuations.push(parsed);
    }
    let edge_list = doc.get("edges").and_then(Value::as_array).ok_or(FormatError::Field("edges"))?;
    let mut edges = Vec::with_capacity(edge_list.len());
    for e in edge_list {
        let pair = e.as_array().filter(|p| p.len() == 2).ok_or(FormatError::Field("edges"))?;
        edges.push((usize_of(&pair[0], "edges")?, usize_of(&pair[1], "edges")?));
    }
    Ok(validate_instance(RawInstance { agents, items, valuations, edges })?)
}

/// Canonical single-line form with a trailing newline.
pub fn write_instance(inst: &Instance) -> String {
    let mut out = format!("{{\"agents\":{},\"items\":{},\"valuations\":[", inst.n_agents(), inst.n_items());
    for (i, row) in inst.valuations().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push('[');
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            if v.is_integer() {
                out.push_str(&format_rational(v));
            } else {
                out.push('"');
                out.push_str(&format_rational(v));
                out.push('"');
            }
        }
        out.push(']');
    }
    out.push_str("],\"edges\":[");
    for (k, (a, b)) in inst.edges().iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        out.push_str(&format!("[{a},{b}]"));
    }
    out.push_str("]}\n");
    out
}

pub fn parse_allocation(text: &str) -> Result<Allocation, FormatError> {
    let doc: Value = serde_json::from_str(text)?;
    let bundles = doc.get("bundles").and_then(Value::as_array).ok_or(FormatError::Field("bundles"))?;
    let mut out = Vec::with_capacity(bundles.len());
    for b in bundles {
        let b = b.as_array().ok_or(FormatError::Field("bundles"))?;
        out.push(b.iter().map(|j| usize_of(j, "bundles")).collect::<Result<Vec<_>, _>>()?);
    }
    Ok(Allocation::new(out)?)
}

pub fn write_allocation(alloc: &Allocation) -> String {
    let bundles: Vec<String> = alloc
        .bundles()
        .iter()
        .map(|b| {
            let items: Vec<String> = b.iter().map(usize::to_string).collect();
            format!("[{}]", items.join(","))
        })
        .collect();
    format!("{{\"bundles\":[{}]}}\n", bundles.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::ratio;

    #[test]
    fn instance_round_trip() {
        let text = "{\"agents\":2,\"items\":3,\"valuations\":[[2,2,3],[6,\"5/2\",6]],\"edges\":[[0,1],[1,2]]}\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.value(1, 1), &ratio(5, 2));
        assert_eq!(write_instance(&inst), text);
    }

    #[test]
    fn edges_are_canonicalized() {
        let text = "{\"edges\":[[2,1],[1,0],[0,1]],\"items\":3,\"agents\":1,\"valuations\":[[1,1,1]]}";
        let inst = parse_instance(text).unwrap();
        assert_eq!(
            write_instance(&inst),
            "{\"agents\":1,\"items\":3,\"valuations\":[[1,1,1]],\"edges\":[[0,1],[1,2]]}\n"
        );
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(parse_instance("{\"agents\":1}").is_err());
        assert!(parse_instance("{\"agents\":1,\"items\":1,\"valuations\":[[1.5]],\"edges\":[]}").is_err());
        assert!(matches!(
            parse_instance("{\"agents\":2,\"items\":1,\"valuations\":[[1]],\"edges\":[]}"),
            Err(FormatError::Model(ModelError::DimensionMismatch { .. }))
        ));
    }

    #[test]
    fn allocation_round_trip() {
        let alloc = Allocation::new(vec![vec![2, 0], vec![], vec![1]]).unwrap();
        let text = write_allocation(&alloc);
        assert_eq!(text, "{\"bundles\":[[0,2],[],[1]]}\n");
        assert_eq!(parse_allocation(&text).unwrap(), alloc);
    }
}
