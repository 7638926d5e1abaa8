//! Human, JSON and CSV renderings of the same JSON document.

use serde_json::Value;

/// Output format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    /// Aligned text.
    #[default]
    Table,
    /// One JSON document.
    Json,
    /// Comma-separated rows.
    Csv,
}

/// Render a document, newline-terminated.
pub fn render(doc: &Value, format: Format) -> String {
    match format {
        Format::Json => format!("{}\n", serde_json::to_string(doc).expect("values serialize")),
        Format::Csv => csv(doc),
        Format::Table => table(doc),
    }
}

fn command(doc: &Value) -> &str {
    doc.get("command").and_then(Value::as_str).unwrap_or("")
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(a) => a.iter().map(scalar).collect::<Vec<_>>().join(" "),
        other => other.to_string(),
    }
}

fn list(v: Option<&Value>) -> String {
    match v.and_then(Value::as_array) {
        Some(a) if !a.is_empty() => a.iter().map(scalar).collect::<Vec<_>>().join(", "),
        _ => "none".into(),
    }
}

fn yes(v: Option<&Value>) -> &'static str {
    if v.and_then(Value::as_bool).unwrap_or(false) {
        "yes"
    } else {
        "no"
    }
}

fn structure(orders: Option<&Value>) -> String {
    match orders.and_then(Value::as_array) {
        Some(a) if !a.is_empty() => a.iter().map(|o| format!("Z/{}", scalar(o))).collect::<Vec<_>>().join(" + "),
        _ => "0".into(),
    }
}

fn missed_lines(out: &mut String, missed: Option<&Value>) {
    match missed.and_then(Value::as_object) {
        Some(m) if !m.is_empty() => {
            for (strip, places) in m {
                out.push_str(&format!("  strip {strip:<3} {}\n", list(Some(places))));
            }
        }
        _ => out.push_str("  none\n"),
    }
}

fn table(doc: &Value) -> String {
    let mut out = String::new();
    let g = |k: &str| doc.get(k);
    match command(doc) {
        "bernoulli" => {
            out.push_str(&format!("p                  {}\n", scalar(&doc["p"])));
            out.push_str(&format!("r(p)               {}\n", scalar(&doc["r"])));
            out.push_str(&format!("irregular indices  {}\n", list(g("indices"))));
        }
        "vplus" => {
            out.push_str(&format!(
                "V_{}^+ for p = {}, {} model, N = {}\n",
                scalar(&doc["n"]),
                scalar(&doc["p"]),
                scalar(&doc["model"]),
                scalar(&doc["N"])
            ));
            out.push_str(&format!("  structure   {}\n", structure(g("cyclic_orders"))));
            out.push_str(&format!("  r           [{}]\n", list(g("r")).replace("none", "")));
            out.push_str(&format!(
                "  saturated   {} ({} of {} generators inserted)\n",
                yes(g("saturated")),
                scalar(&doc["generators_inserted"]),
                scalar(&doc["generators_total"])
            ));
            out.push_str("missed places\n");
            missed_lines(&mut out, g("missed"));
            if let Some(d) = g("derived") {
                out.push_str(&format!("derived, conditional on {}\n", scalar(&d["conditional_on"])));
                out.push_str(&format!("  {} = {}\n", scalar(&d["class_group_of"]), structure(d.get("class_group"))));
                if let Some(pf) = d.get("pic_formula").filter(|v| !v.is_null()) {
                    out.push_str(&format!(
                        "  {} = {} = {}\n",
                        scalar(&pf["group"]),
                        scalar(&pf["formula"]),
                        scalar(&pf["value"])
                    ));
                }
                out.push_str(&format!("  r(p) from Bernoulli numbers: {}\n", scalar(&d["r_p_bernoulli"])));
            }
        }
        "missed" => {
            out.push_str(&format!(
                "missed places for p = {}, level {}\n",
                scalar(&doc["p"]),
                scalar(&doc["level"])
            ));
            missed_lines(&mut out, g("missed"));
            out.push_str(&format!("  r           [{}]\n", list(g("r")).replace("none", "")));
            out.push_str(&format!("  saturated   {}\n", yes(g("saturated"))));
        }
        "verify" => {
            let mut total = 0;
            let mut failed = 0;
            for s in g("suites").and_then(Value::as_array).into_iter().flatten() {
                for c in s["checks"].as_array().into_iter().flatten() {
                    total += 1;
                    let status = if !c["passed"].as_bool().unwrap_or(false) {
                        failed += 1;
                        "FAIL"
                    } else if c["skipped"].as_bool().unwrap_or(false) {
                        "skip"
                    } else {
                        "pass"
                    };
                    out.push_str(&format!(
                        "{status}  {:<10} {:<32} {:>7}  {}\n",
                        scalar(&c["suite"]),
                        scalar(&c["name"]),
                        scalar(&c["trials"]),
                        scalar(&c["anchor"])
                    ));
                    if status == "FAIL" {
                        out.push_str(&format!("      {}\n", scalar(&c["detail"])));
                    }
                }
            }
            out.push_str(&format!("seed {}: {total} checks, {failed} failed\n", scalar(&doc["seed"])));
        }
        _ => {
            if let Some(obj) = doc.as_object() {
                for (k, v) in obj.iter().filter(|(k, _)| *k != "schema" && *k != "command") {
                    out.push_str(&format!("{k:<12} {}\n", serde_json::to_string(v).expect("values serialize")));
                }
            }
        }
    }
    out
}

fn write_rows(rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<Vec<String>>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, rows);
            }
        }
        Value::Array(a) if a.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), x, rows);
            }
        }
        other => rows.push(vec![prefix.to_string(), scalar(other)]),
    }
}

fn csv(doc: &Value) -> String {
    if command(doc) == "verify" {
        let mut rows = vec![["suite", "name", "passed", "skipped", "trials", "anchor", "detail"].map(String::from).to_vec()];
        for s in doc["suites"].as_array().into_iter().flatten() {
            for c in s["checks"].as_array().into_iter().flatten() {
                rows.push(["suite", "name", "passed", "skipped", "trials", "anchor", "detail"].iter().map(|k| scalar(&c[*k])).collect());
            }
        }
        return write_rows(rows);
    }
    let mut rows = vec![vec!["field".to_string(), "value".to_string()]];
    flatten("", doc, &mut rows);
    write_rows(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_flattens_nested_fields() {
        let doc = json!({"schema": "kmv/1", "command": "bernoulli", "p": 37, "indices": [32], "x": {"y": "a,b"}});
        let out = render(&doc, Format::Csv);
        assert!(out.starts_with("field,value\n"));
        assert!(out.contains("indices,32\n"));
        assert!(out.contains("x.y,\"a,b\"\n"));
    }

    #[test]
    fn table_shows_structure() {
        let doc = json!({"schema": "kmv/1", "command": "vplus", "p": 37, "n": 1, "model": "km", "N": 37,
            "cyclic_orders": [37], "r": [1], "missed": {"0": [32]}, "saturated": true,
            "generators_inserted": 16, "generators_total": 16});
        let out = render(&doc, Format::Table);
        assert!(out.contains("structure   Z/37"));
        assert!(out.contains("strip 0   32"));
    }
}
