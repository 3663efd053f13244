use serde_json::{Map, Value};

use super::CliError;

/// `x` with 6 significant digits: fixed notation for moderate magnitudes,
/// scientific otherwise.
pub(crate) fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exponent = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exponent) {
        format!("{:.*}", (5 - exponent).max(0) as usize, x)
    } else {
        format!("{x:.5e}")
    }
}

fn complex_pair(v: &Value) -> Option<(f64, f64)> {
    match v.as_array()?.as_slice() {
        [re, im] => Some((re.as_f64()?, im.as_f64()?)),
        _ => None,
    }
}

fn format_complex(re: f64, im: f64) -> String {
    let sign = if im.is_sign_negative() { '-' } else { '+' };
    format!("{}{sign}{}i", sig6(re), sig6(im.abs()))
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => "null".into(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if !n.is_u64() && !n.is_i64() => sig6(x),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, child) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, child, out);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), child, out);
            }
        }
        leaf => out.push((prefix.to_owned(), leaf.to_string().trim_matches('"').to_owned())),
    }
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Io { path: "<csv>".into(), message: e.to_string() }
}

/// Fuzz reports become one row per instance; all other reports become
/// `key,value` rows with dotted paths.
pub(crate) fn csv(report: &Value, fuzz_table: bool) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    match report.get("instances").and_then(Value::as_array) {
        Some(instances) if fuzz_table => {
            const COLUMNS: [&str; 8] =
                ["index", "kind", "n", "seed", "dressing_degree", "status", "outcome", "alignment_residual"];
            w.write_record(COLUMNS).map_err(csv_error)?;
            for inst in instances {
                let row: Vec<String> = COLUMNS
                    .iter()
                    .map(|c| match &inst[*c] {
                        Value::String(s) => s.clone(),
                        Value::Null => String::new(),
                        other => other.to_string(),
                    })
                    .collect();
                w.write_record(&row).map_err(csv_error)?;
            }
        }
        _ => {
            let mut rows = Vec::new();
            flatten("", report, &mut rows);
            w.write_record(["key", "value"]).map_err(csv_error)?;
            for (k, v) in rows {
                w.write_record([k, v]).map_err(csv_error)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io { path: "<csv>".into(), message: e.to_string() })?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn matrix_lines(m: &Value) -> Vec<String> {
    m.as_array()
        .into_iter()
        .flatten()
        .map(|row| {
            let cells: Vec<String> = row
                .as_array()
                .into_iter()
                .flatten()
                .map(|c| match complex_pair(c) {
                    Some((re, im)) => format_complex(re, im),
                    None => scalar(c),
                })
                .collect();
            format!("  [ {} ]", cells.join("  "))
        })
        .collect()
}

fn flagged(name: &str, value: &Value, tolerance: Option<f64>) -> String {
    let mut line = format!("{name}: {}", scalar(value));
    if let (Some(x), Some(tol)) = (value.as_f64(), tolerance) {
        if !(x < tol) {
            line.push_str(&format!("  !! exceeds tolerance {}", sig6(tol)));
        }
    }
    line
}

/// Plain-text rendering for terminals.
pub(crate) fn human(report: &Value) -> String {
    let empty = Map::new();
    let obj = report.as_object().unwrap_or(&empty);
    let echo = &report["config_echo"];
    let tolerances = &report["tolerances"];
    let mut lines = vec![format!("wigner {}", scalar(&report["command"]))];

    if let Some(verdict) = obj.get("verdict") {
        lines.push(format!("verdict: {}", scalar(verdict)));
    }
    if let Some(err) = obj.get("error") {
        lines.push(format!("error: {} (exit code {})", scalar(err), scalar(&report["exit_code"])));
        lines.push(format!("  {}", scalar(&report["message"])));
    }
    for key in ["operator", "matrix", "d_z", "d_zbar"] {
        if let Some(m) = obj.get(key) {
            lines.push(format!("{key}:"));
            lines.extend(matrix_lines(m));
        }
    }
    for key in ["unitarity_residual", "reconstruction_residual", "constancy_residual", "orthogonality_residual"] {
        if let Some(v) = obj.get(key) {
            let tol = tolerances[key].as_f64().or_else(|| {
                (report["command"] == "mazur-ulam").then(|| echo["tol_preserve"].as_f64()).flatten()
            });
            lines.push(flagged(key, v, tol));
        }
    }
    for key in ["d_z_max", "d_zbar_max", "gauge_reference_theta", "step", "levels", "analytic"] {
        if let Some(v) = obj.get(key) {
            lines.push(format!("{key}: {}", scalar(v)));
        }
    }
    if let Some(caveats) = obj.get("caveats").and_then(Value::as_array) {
        for c in caveats {
            lines.push(format!("caveat: {}", scalar(c)));
        }
    }
    if let Some(details) = obj.get("details").and_then(Value::as_object) {
        for (k, v) in details {
            lines.push(format!("  {k}: {}", scalar(v)));
        }
    }
    for (key, tol_key) in [("preservation", "tolerance"), ("isometry", "tolerance")] {
        if let Some(p) = obj.get(key) {
            lines.push(format!("{key}: {} pairs", scalar(&p["pairs_tested"])));
            lines.push(format!("  {}", flagged("max_deviation", &p["max_deviation"], p[tol_key].as_f64())));
        }
    }
    if let Some(s) = obj.get("summary") {
        lines.push(format!(
            "instances: {} total, {} correct, {} failed, {} caveat_n1",
            s["total"], s["correct"], s["failed"], s["caveat_n1"]
        ));
        lines.push(format!(
            "  symmetries recovered {}/{}, adversaries rejected {}/{}",
            s["symmetries"]["recovered"], s["symmetries"]["total"], s["adversaries"]["rejected"], s["adversaries"]["total"]
        ));
        for inst in report["instances"].as_array().into_iter().flatten() {
            if inst["status"] == "fail" {
                lines.push(format!(
                    "  FAIL #{} {} n={} seed={}: {}",
                    inst["index"],
                    scalar(&inst["kind"]),
                    inst["n"],
                    inst["seed"],
                    scalar(&inst["outcome"])
                ));
            }
        }
    }
    if let Some(t) = obj.get("timing_ms") {
        lines.push(format!("timing_ms: {}", scalar(t)));
    }
    let mut out = lines.join("\n");
    out.push('\n');
    out
}
