//! Deterministic JSON and CSV writers.
//!
//! JSON numbers carry 17 significant digits, CSV numbers 9. Object keys keep
//! the field order of the serialized type.

use serde_json::Value;

/// `v` with `digits` significant digits in the style of C's `%.{digits}g`,
/// keeping a trailing `.0` on integral values.
pub fn format_sig(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let mant = trim_zeros(mant);
        return format!("{mant}e{exp}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    let fixed = format!("{v:.decimals$}");
    let t = trim_zeros(&fixed);
    if t.contains('.') {
        t.to_string()
    } else {
        format!("{t}.0")
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn scalar(v: &Value, digits: usize) -> String {
    match v {
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => u.to_string(),
            (None, Some(i)) => i.to_string(),
            _ => format_sig(n.as_f64().expect("finite number"), digits),
        },
        other => other.to_string(),
    }
}

fn is_flat(v: &Value) -> bool {
    match v {
        Value::Array(a) => a.iter().all(|x| !x.is_object() && (!x.is_array() || is_flat(x))),
        Value::Object(m) => m.values().all(|x| !x.is_object() && !x.is_array()),
        _ => true,
    }
}

fn write_inline(v: &Value, out: &mut String) {
    match v {
        Value::Array(a) => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_inline(x, out);
            }
            out.push(']');
        }
        Value::Object(m) => {
            out.push('{');
            for (i, (k, x)) in m.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_inline(x, out);
            }
            out.push('}');
        }
        s => out.push_str(&scalar(s, 17)),
    }
}

fn write_block(v: &Value, indent: usize, out: &mut String) {
    if is_flat(v) {
        return write_inline(v, out);
    }
    let pad = "  ".repeat(indent + 1);
    let (open, close) = if v.is_array() { ('[', ']') } else { ('{', '}') };
    out.push(open);
    out.push('\n');
    let mut first = true;
    let mut item = |key: Option<&String>, x: &Value, out: &mut String| {
        if !first {
            out.push_str(",\n");
        }
        first = false;
        out.push_str(&pad);
        if let Some(k) = key {
            out.push_str(&Value::String(k.clone()).to_string());
            out.push_str(": ");
        }
        write_block(x, indent + 1, out);
    };
    match v {
        Value::Array(a) => a.iter().for_each(|x| item(None, x, out)),
        Value::Object(m) => m.iter().for_each(|(k, x)| item(Some(k), x, out)),
        _ => unreachable!("scalars are flat"),
    }
    out.push('\n');
    out.push_str(&"  ".repeat(indent));
    out.push(close);
}

/// JSON document with a trailing newline.
pub fn to_json(v: &Value) -> String {
    let mut out = String::new();
    write_block(v, 0, &mut out);
    out.push('\n');
    out
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| flatten(&key(k), x, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| flatten(&key(&i.to_string()), x, out)),
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), scalar(other, 9))),
    }
}

/// CSV with a header row. With `rows_field`, each element of that array
/// becomes a row, prefixed by the document's other scalar fields (element
/// keys that clash with those are qualified by `rows_field`); otherwise
/// the flattened document is a single row.
pub fn to_csv(v: &Value, rows_field: Option<&str>) -> Result<String, csv::Error> {
    let mut rows: Vec<Vec<(String, String)>> = Vec::new();
    match (rows_field, v) {
        (Some(field), Value::Object(m)) => {
            let mut common = Vec::new();
            for (k, x) in m {
                if k != field && !x.is_object() && !x.is_array() {
                    flatten(k, x, &mut common);
                }
            }
            for item in m.get(field).and_then(Value::as_array).into_iter().flatten() {
                let mut own = Vec::new();
                flatten("", item, &mut own);
                let mut row = common.clone();
                for (k, v) in own {
                    // an element key equal to a document key gets the array's name
                    let k = if common.iter().any(|(c, _)| *c == k) { format!("{field}.{k}") } else { k };
                    row.push((k, v));
                }
                rows.push(row);
            }
        }
        _ => {
            let mut row = Vec::new();
            flatten("", v, &mut row);
            rows.push(row);
        }
    }
    // union of columns in first-seen order
    let mut header: Vec<String> = Vec::new();
    for row in &rows {
        for (k, _) in row {
            if !header.contains(k) {
                header.push(k.clone());
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    for row in &rows {
        let cells: Vec<&str> =
            header.iter().map(|h| row.iter().find(|(k, _)| k == h).map_or("", |(_, v)| v.as_str())).collect();
        w.write_record(&cells)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("utf-8 input"))
}

/// Rows of a CSV document as `(header, cell)` pairs.
pub fn read_csv(text: &str) -> Result<Vec<Vec<(String, String)>>, csv::Error> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        rows.push(header.iter().cloned().zip(rec.iter().map(str::to_string)).collect());
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(1.0 - 2f64.ln(), 17), "0.30685281944005471");
        assert_eq!(format_sig(1.0 - 2f64.ln(), 9), "0.306852819");
        assert_eq!(format_sig(0.0, 17), "0.0");
        assert_eq!(format_sig(0.25, 17), "0.25");
        assert_eq!(format_sig(2.0, 17), "2.0");
        assert_eq!(format_sig(-1.5e-7, 17), "-1.4999999999999999e-7");
        assert_eq!(format_sig(1.5e-7, 9), "1.5e-7");
        assert_eq!(format_sig(1e20, 17), "1e20");
        assert_eq!(format_sig(123456.789, 9), "123456.789");
    }

    #[test]
    fn seventeen_digits_round_trip() {
        let mut x = 0.1f64;
        for _ in 0..2000 {
            x = (x * 7.31 + 0.113).fract() * 10f64.powi(((x * 1000.0) as i32 % 40) - 20);
            let s = format_sig(x, 17);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn json_layout() {
        assert_eq!(to_json(&json!({"value": 0.0})), "{\"value\": 0.0}\n");
        let doc = json!({"point": [0.25, 0.75], "iterations": 3, "trace": [{"a": 1}]});
        assert_eq!(
            to_json(&doc),
            "{\n  \"point\": [0.25, 0.75],\n  \"iterations\": 3,\n  \"trace\": [\n    {\"a\": 1}\n  ]\n}\n"
        );
    }

    #[test]
    fn csv_layout() {
        let doc = json!({"point": [0.25, 0.75], "side": "left"});
        assert_eq!(to_csv(&doc, None).unwrap(), "point.0,point.1,side\n0.25,0.75,left\n");
        let doc = json!({"seed": 0, "props": [{"p": "a", "w": 1.0, "seed": 4}, {"p": "b,c", "w": null, "seed": 5}]});
        let text = to_csv(&doc, Some("props")).unwrap();
        assert_eq!(text, "seed,p,w,props.seed\n0,a,1.0,4\n0,\"b,c\",,5\n");
        let rows = read_csv(&text).unwrap();
        assert_eq!(rows[1][1], ("p".to_string(), "b,c".to_string()));
    }
}
