//! Browser bindings for three verifier operations: evaluate a network,
//! verify a rule file against it, and decide a 3-CNF through the SAT
//! network construction.
//!
//! The `*_report` functions are plain Rust so they can be tested natively;
//! the exported wrappers only convert errors for JavaScript.

use std::fmt::Write;

use rulecheck::cnf::parse_dimacs;
use rulecheck::constructions::{generate_sat_instance, round_to_assignment};
use rulecheck::io::{network_from_json, parse_vector, rules_from_json};
use rulecheck::verify::{verify_boolean, verify_rule_with, Mode, Verdict, VerifyOptions};
use rulecheck::Witness;
use wasm_bindgen::prelude::*;

/// Largest Boolean input width enumerated in the browser.
const BOOL_BOUND: usize = 16;

fn witness_text(w: &Witness) -> String {
    match w {
        Witness::Point(x) => format!(
            "x = ({})",
            x.0.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
        ),
        Witness::Pair(x, y) => format!(
            "x = ({}), y = ({})",
            x.0.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "),
            y.0.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
        ),
    }
}

/// Exact output of the network at a space- or comma-separated input.
pub fn evaluate_report(net_json: &str, input: &str) -> Result<String, String> {
    let net = network_from_json(net_json).map_err(|e| e.to_string())?;
    let x = parse_vector(input).map_err(|e| e.to_string())?;
    let y = net.evaluate(&x).map_err(|e| e.to_string())?;
    Ok(y.0.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "))
}

/// One line per rule, then an overall summary.
pub fn verify_report(net_json: &str, rules_json: &str) -> Result<String, String> {
    let net = network_from_json(net_json).map_err(|e| format!("network: {e}"))?;
    let rules = rules_from_json(rules_json).map_err(|e| format!("rules: {e}"))?;
    let opts = VerifyOptions::new(Mode::Pruned);
    let mut out = String::new();
    let mut failed = 0;
    for (k, rule) in rules.iter().enumerate() {
        let verdict = if net.is_boolean() {
            verify_boolean(&net, rule, BOOL_BOUND)
        } else {
            verify_rule_with(&net, rule, &opts).map(|(v, _)| v)
        }
        .map_err(|e| format!("rule {k}: {e}"))?;
        match verdict {
            Verdict::Holds => writeln!(out, "rule {k} [{}]: holds", rule.kind_name()),
            Verdict::Fails { witness, .. } => {
                failed += 1;
                writeln!(
                    out,
                    "rule {k} [{}]: fails at {}",
                    rule.kind_name(),
                    witness_text(&witness)
                )
            }
        }
        .expect("writing to a string");
    }
    if failed == 0 {
        out.push_str("all rules hold");
    } else {
        let _ = write!(out, "{failed} of {} rules fail", rules.len());
    }
    Ok(out)
}

/// Builds the SAT network for a DIMACS formula and verifies its rule; a
/// counterexample rounds to a satisfying assignment.
pub fn sat_report(dimacs: &str) -> Result<String, String> {
    let formula = parse_dimacs(dimacs).map_err(|e| e.to_string())?;
    let inst = generate_sat_instance(&formula).map_err(|e| e.to_string())?;
    let (verdict, stats) =
        verify_rule_with(&inst.net, &inst.rules[0], &VerifyOptions::new(Mode::Pruned)).map_err(|e| e.to_string())?;
    let mut out = format!(
        "network: {} inputs, {} layers; search: {} branches, {} LP calls\n",
        inst.net.input_dim(),
        inst.net.layers().len(),
        stats.branches,
        stats.lp_calls
    );
    match verdict {
        Verdict::Holds => out.push_str("rule holds: the formula is unsatisfiable"),
        Verdict::Fails { witness, .. } => {
            let Witness::Point(x) = &witness else {
                unreachable!("point rule");
            };
            let model = round_to_assignment(x);
            let bits: Vec<&str> = model.iter().map(|b| if *b { "1" } else { "0" }).collect();
            let _ = write!(
                out,
                "rule fails at {}\nrounded assignment {} satisfies the formula: {}",
                witness_text(&witness),
                bits.join(""),
                formula.eval(&model)
            );
        }
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn evaluate(net_json: &str, input: &str) -> Result<String, JsValue> {
    evaluate_report(net_json, input).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn verify(net_json: &str, rules_json: &str) -> Result<String, JsValue> {
    verify_report(net_json, rules_json).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn decide_sat(dimacs: &str) -> Result<String, JsValue> {
    sat_report(dimacs).map_err(|e| JsValue::from_str(&e))
}
