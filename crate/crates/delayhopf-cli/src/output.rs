//! Deterministic report rendering: floats rounded to 12 significant
//! digits, JSON with sorted keys, CSV with fixed formatting.

use delayhopf::{CrossingData, NormalFormResult, RegimeClass, TheoremReport};
use delayhopf::Complex64;
use serde_json::{json, Value};

pub const SCHEMA: &str = "delayhopf/v1";

/// Rounds through a 12-significant-digit decimal representation so that
/// identical configs serialize byte-identically.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        format!("{x:.11e}").parse().unwrap_or(x)
    }
}

/// JSON number at 12 significant digits; null for non-finite values.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        serde_json::Number::from_f64(round12(x)).map_or(Value::Null, Value::Number)
    } else {
        Value::Null
    }
}

pub fn fmt12(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn complex(z: Complex64) -> Value {
    json!({ "re": num(z.re), "im": num(z.im) })
}

pub fn regime_json(r: &RegimeClass) -> Value {
    json!({
        "kind": r.kind.to_string(),
        "c1": r.c1,
        "c2": r.c2,
        "note": r.note,
    })
}

pub fn clause_json(rep: &TheoremReport) -> Value {
    json!({
        "clause": rep.clause,
        "expected": rep.expected.iter().map(|k| k.to_string()).collect::<Vec<_>>(),
        "actual": rep.actual.to_string(),
        "consistent": rep.consistent,
        "hopf_expected": rep.hopf_expected,
    })
}

pub fn crossing_json(d: &CrossingData) -> Value {
    json!({
        "omega_star": num(d.omega_star),
        "sigma_bar": num(d.sigma_bar),
        "r0": num(d.r0),
        "sigma0": num(d.sigma0),
        "k_tau": d.k_tau,
        "mu_prime": num(d.mu_prime),
        "tau_star": num(d.tau_star),
        "tau_star_is_exact": d.tau_star_is_exact,
        "stability_certified": d.stability_certified,
        "skipped_indices": d.skipped_indices,
        "notes": d.notes,
    })
}

pub fn normal_form_json(nf: &NormalFormResult) -> Value {
    json!({
        "psi1": complex(nf.psi1),
        "e1": complex(nf.e1),
        "e2": complex(nf.e2),
        "e3": complex(nf.e3),
        "e4": complex(nf.e4),
        "k1": num(nf.k1),
        "k2": num(nf.k2),
        "direction": nf.direction.to_string(),
        "orbit_stability": nf.orbit_stability.to_string(),
        "period": num(nf.period),
    })
}

/// Flat `key,value` CSV rendering of a JSON object tree.
pub fn value_to_csv(value: &Value) -> String {
    let mut rows = Vec::new();
    flatten("", value, &mut rows);
    let mut out = String::from("key,value\n");
    for (k, v) in rows {
        out.push_str(&format!("{k},{v}\n"));
    }
    out
}

fn flatten(prefix: &str, value: &Value, rows: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, rows);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), v, rows);
            }
        }
        Value::Null => rows.push((prefix.to_string(), String::new())),
        Value::Number(n) => {
            let text = n.as_f64().map_or_else(|| n.to_string(), fmt12);
            rows.push((prefix.to_string(), text));
        }
        Value::Bool(b) => rows.push((prefix.to_string(), b.to_string())),
        Value::String(s) => rows.push((prefix.to_string(), format!("\"{}\"", s.replace('"', "\"\"")))),
    }
}
