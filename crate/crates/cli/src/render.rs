//! Output emitters. The JSON document is the contract; the text form is for reading.

use serde_json::json;

use crate::commands::Outcome;
use crate::config::{Command, JobConfig};
use crate::error::Result;
use crate::VERSION;

/// Canonical JSON output. `graphs` is JSON-lines: a header with the count,
/// then one record per graph; every other command is a single document.
pub fn json_output(c: &JobConfig, out: &Outcome) -> Result<String> {
    if c.command == Command::Graphs {
        let p = &out.payload;
        let header = json!({"version": VERSION, "config": c, "payload": {"g": p["g"], "n": p["n"], "count": p["count"]}});
        let mut s = serde_json::to_string(&header)?;
        s.push('\n');
        for rec in p["graphs"].as_array().into_iter().flatten() {
            s.push_str(&serde_json::to_string(rec)?);
            s.push('\n');
        }
        return Ok(s);
    }
    let doc = json!({"version": VERSION, "config": c, "payload": out.payload});
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

fn indent(text: &str) -> String {
    text.lines().map(|l| format!("  {l}\n")).collect()
}

pub fn text_output(c: &JobConfig, out: &Outcome) -> String {
    let p = &out.payload;
    let mut s = String::new();
    match c.command {
        Command::Graphs => {
            s.push_str(&format!("{} stable graphs of type ({}, {})\n", p["count"], p["g"], p["n"]));
            for rec in p["graphs"].as_array().into_iter().flatten() {
                s.push_str(&format!("{:>4}  |Aut| = {:<4} {}\n", rec["index"], rec["automorphisms"], rec["graph"]));
            }
        }
        Command::Basis => {
            s.push_str(&format!("{} strata ({} with kappa) in R^{}(M({}, {}))\n", p["size"], p["kappa_count"], p["r"], p["g"], p["n"]));
            for rec in p["strata"].as_array().into_iter().flatten() {
                s.push_str(&format!("{:>5}  {}\n", rec["index"], rec["stratum"]));
            }
        }
        Command::Pixton => {
            s.push_str(&format!(
                "R({}, {}, {}; sigma {}, a {}): {} terms, kappa-free: {}\n",
                p["g"], p["n"], p["r"], p["sigma"], p["a"], p["terms"], p["kappa_free"]
            ));
        }
        Command::Rank => {
            for k in ["basis", "kappa_count", "rows", "rank", "corank", "kappa_free"] {
                s.push_str(&format!("{k:<12} {}\n", p[k]));
            }
        }
        Command::Derive => {
            s.push_str(&format!("rank {} of {} strata, {} kappa-free relations\n", p["rank"], p["basis"], p["kappa_free"]));
            match p["solution"].as_object() {
                Some(sol) => {
                    s.push_str(&format!("{} =\n", sol["lhs"].as_str().unwrap_or("")));
                    s.push_str(&indent(sol["text"].as_str().unwrap_or("")));
                    if let Some(u) = sol["unique"].as_bool() {
                        s.push_str(&format!("unique within the given support: {u}\n"));
                    }
                }
                None => s.push_str("target not determined by the relations\n"),
            }
        }
        Command::Translate => {
            s.push_str(&format!("{}\n  = 0\n", p["text"].as_str().unwrap_or("")));
        }
        Command::Verify => {
            s.push_str(&format!("identity holds: {}\n", p["holds"]));
            if !p["normal_form_matches"].is_null() {
                s.push_str(&format!("normal form matches: {}\n", p["normal_form_matches"]));
            }
            s.push_str("normal form:\n");
            s.push_str(&indent(p["lhs_text"].as_str().unwrap_or("")));
            if p["holds"] != true {
                s.push_str("residual:\n");
                s.push_str(&indent(p["residual_text"].as_str().unwrap_or("")));
            }
        }
    }
    s
}
