//! Command-line front end: expression evaluation, series and double-sum
//! verdicts, composition checks, and the scenario runner.
//!
//! Exit codes: 0 on success (all checks pass), 1 when a scenario check
//! fails, 2 on usage or parse errors.

use std::collections::HashMap;

use serde_json::json;

use crate::double_series::{fubini_sum, DoubleArray};
use crate::field::FieldElement;
use crate::parse::{eval_element, parse_expression, Expr, ExprContext};
use crate::power_series::{composite_eval, substitution_criterion, PowerSeries};
use crate::scenario::{builtin_scenario, builtin_scenarios, run_scenario_text, RunOptions};
use crate::series::{sum_with, SampleConfig, TermStream};
use crate::valuation::Valuation;

const USAGE: &str = "usage: epscalc <command> [args]

commands:
  eval <expr> [--precision P] [--json]
      evaluate a field-element expression and print its expansion
  series-sum --term <expr(n)> [--bound <expr(n)>] [--precision P] [--window W] [--json]
      sum the series with the given term formula
  double-sum --entry <expr(i,j)> [--bound <expr(n)>] [--precision P] [--window W] [--json]
      linearized / by-rows / by-columns sums of a double series
  compose --outer <expr(j)> --inner <expr(j)> [--outer-bound <expr(j)>] [--inner-bound <expr(j)>]
          --at <expr> [--precision P] [--window W] [--json]
      composite evaluation and the substitution criterion
  scenario run <name-or-path> [--precision P] [--window W] [--seed S] [--json]
      run a scenario file or a built-in scenario
  scenario list-builtin
      list built-in scenario names

expressions use `e` for the infinitesimal, `w` for e^-1, and the
operators + - * / ^ and postfix !.";

struct Flags {
    positional: Vec<String>,
    named: HashMap<String, String>,
    json: bool,
}

fn parse_flags(args: &[String]) -> Result<Flags, String> {
    let mut flags = Flags {
        positional: Vec::new(),
        named: HashMap::new(),
        json: false,
    };
    let mut idx = 0;
    while idx < args.len() {
        let arg = &args[idx];
        if arg == "--json" {
            flags.json = true;
            idx += 1;
        } else if let Some(name) = arg.strip_prefix("--") {
            let value = args
                .get(idx + 1)
                .ok_or_else(|| format!("flag --{} needs a value", name))?;
            flags.named.insert(name.to_string(), value.clone());
            idx += 2;
        } else {
            flags.positional.push(arg.clone());
            idx += 1;
        }
    }
    Ok(flags)
}

fn precision_flag(flags: &Flags) -> Result<i64, String> {
    match flags.named.get("precision") {
        Some(text) => text
            .parse::<i64>()
            .ok()
            .filter(|p| *p >= 1)
            .ok_or_else(|| "precision must be a positive integer".to_string()),
        None => Ok(32),
    }
}

fn window_flag(flags: &Flags) -> Result<u64, String> {
    match flags.named.get("window") {
        Some(text) => text
            .parse::<u64>()
            .ok()
            .filter(|w| *w >= 4)
            .ok_or_else(|| "window must be an integer of at least 4".to_string()),
        None => Ok(64),
    }
}

/// Affine probe for user-supplied bound expressions in one index.
fn probe_affine(expr: &Expr, var: &str) -> Result<(i64, i64), String> {
    let ctx = ExprContext::new();
    let value_at = |v: i64| -> Result<i64, String> {
        let element = expr
            .eval(&ctx.with_index(var, v))
            .map_err(|e| e.to_string())?;
        crate::parse::constant_integer(&element)
            .and_then(|b| i64::try_from(b).ok())
            .ok_or_else(|| "bound expression must be integer-valued".to_string())
    };
    let offset = value_at(0)?;
    let slope = value_at(1)? - offset;
    for probe in [2i64, 3, 5, 8] {
        if value_at(probe)? != slope * probe + offset {
            return Err("bound expression must be affine in its index".to_string());
        }
    }
    Ok((slope, offset))
}

fn cmd_eval(flags: &Flags) -> Result<i32, String> {
    let expr_text = flags
        .positional
        .first()
        .ok_or_else(|| "eval needs an expression".to_string())?;
    let precision = precision_flag(flags)?;
    let value = eval_element(expr_text, &ExprContext::new()).map_err(|e| e.to_string())?;
    let expansion = value.expand(precision);
    if flags.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "input": expr_text,
                "canonical": value.to_string(),
                "valuation": value.valuation().to_string(),
                "expansion": expansion.to_string(),
                "precision": precision,
            }))
            .unwrap()
        );
    } else {
        println!("{}", expansion);
    }
    Ok(0)
}

fn stream_from_flags(flags: &Flags) -> Result<TermStream, String> {
    let term_text = flags
        .named
        .get("term")
        .ok_or_else(|| "series-sum needs --term".to_string())?;
    let term = parse_expression(term_text).map_err(|e| e.to_string())?;
    let ctx = ExprContext::new();
    // Reject formulas that fail to evaluate.
    for n in 0..4 {
        term.eval(&ctx.with_index("n", n))
            .map_err(|e| format!("term formula at n = {}: {}", n, e))?;
    }
    let term_for_stream = term.clone();
    let ctx_for_stream = ctx.clone();
    let stream = TermStream::from_fn(move |n| {
        term_for_stream
            .eval(&ctx_for_stream.with_index("n", n as i64))
            .unwrap_or_else(|_| FieldElement::zero())
    });
    match flags.named.get("bound") {
        Some(bound_text) => {
            let bound = parse_expression(bound_text).map_err(|e| e.to_string())?;
            let (slope, offset) = probe_affine(&bound, "n")?;
            if slope < 0 {
                return Err("a tail bound must be non-decreasing".to_string());
            }
            // Verify the declared bound on a small window.
            for n in 0..24i64 {
                let v = term
                    .eval(&ctx.with_index("n", n))
                    .map_err(|e| e.to_string())?
                    .valuation();
                if v < Valuation::Finite(slope * n + offset) {
                    return Err(format!("declared bound violated at n = {}", n));
                }
            }
            Ok(stream.with_affine_bound(slope, offset))
        }
        None => Ok(stream),
    }
}

fn cmd_series_sum(flags: &Flags) -> Result<i32, String> {
    let precision = precision_flag(flags)?;
    let cfg = SampleConfig {
        window: window_flag(flags)?,
        ..SampleConfig::default()
    };
    let stream = stream_from_flags(flags)?;
    let verdict = sum_with(&stream, precision, &cfg);
    if flags.json {
        let body = match verdict.converged() {
            Some(a) => json!({
                "verdict": "converges",
                "head": a.head.to_string(),
                "tail_valuation": a.tail_valuation.to_string(),
                "expansion": a.head.expand(precision).to_string(),
            }),
            None => json!({ "verdict": verdict.describe() }),
        };
        println!("{}", serde_json::to_string_pretty(&body).unwrap());
    } else {
        match verdict.converged() {
            Some(a) => println!("converges: {}", a.head.expand(precision)),
            None => println!("{}", verdict.describe()),
        }
    }
    Ok(0)
}

fn cmd_double_sum(flags: &Flags) -> Result<i32, String> {
    let precision = precision_flag(flags)?;
    let cfg = SampleConfig {
        window: window_flag(flags)?,
        ..SampleConfig::default()
    };
    let entry_text = flags
        .named
        .get("entry")
        .ok_or_else(|| "double-sum needs --entry".to_string())?;
    let entry = parse_expression(entry_text).map_err(|e| e.to_string())?;
    let ctx = ExprContext::new();
    entry
        .eval(&ctx.with_index("i", 0).with_index("j", 0))
        .map_err(|e| format!("entry formula: {}", e))?;
    let entry_for_array = entry.clone();
    let ctx_for_array = ctx.clone();
    let mut array = DoubleArray::from_fn(move |i, j| {
        entry_for_array
            .eval(
                &ctx_for_array
                    .with_index("i", i as i64)
                    .with_index("j", j as i64),
            )
            .unwrap_or_else(|_| FieldElement::zero())
    });
    if let Some(bound_text) = flags.named.get("bound") {
        let bound = parse_expression(bound_text).map_err(|e| e.to_string())?;
        let (slope, offset) = probe_affine(&bound, "n")?;
        if slope < 0 {
            return Err("a joint bound must be non-decreasing".to_string());
        }
        for d in 0..10u64 {
            for i in 0..=d {
                let v = entry
                    .eval(
                        &ctx.with_index("i", i as i64)
                            .with_index("j", (d - i) as i64),
                    )
                    .map_err(|e| e.to_string())?
                    .valuation();
                if v < Valuation::Finite(slope * d as i64 + offset) {
                    return Err(format!(
                        "declared joint bound violated at ({}, {})",
                        i,
                        d - i
                    ));
                }
            }
        }
        array = array.with_affine_joint_bound(slope, offset);
    }
    match fubini_sum(&array, precision, &cfg) {
        Ok(triple) => {
            if flags.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "verdict": "converges",
                        "linearized": triple.linearized.head.expand(precision).to_string(),
                        "by_rows": triple.by_rows.head.expand(precision).to_string(),
                        "by_columns": triple.by_columns.head.expand(precision).to_string(),
                    }))
                    .unwrap()
                );
            } else {
                println!("linearized: {}", triple.linearized.head.expand(precision));
                println!("by rows:    {}", triple.by_rows.head.expand(precision));
                println!("by columns: {}", triple.by_columns.head.expand(precision));
            }
            Ok(0)
        }
        Err(e) => {
            if flags.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({ "verdict": e.to_string() })).unwrap()
                );
            } else {
                println!("{}", e);
            }
            Ok(0)
        }
    }
}

fn series_from_formula(text: &str, bound_text: Option<&String>) -> Result<PowerSeries, String> {
    let coeff = parse_expression(text).map_err(|e| e.to_string())?;
    let ctx = ExprContext::new();
    for j in 0..4 {
        coeff
            .eval(&ctx.with_index("j", j))
            .map_err(|e| format!("coefficient formula at j = {}: {}", j, e))?;
    }
    let coeff_for_series = coeff.clone();
    let ctx_for_series = ctx.clone();
    let series = PowerSeries::from_fn(move |j| {
        coeff_for_series
            .eval(&ctx_for_series.with_index("j", j as i64))
            .unwrap_or_else(|_| FieldElement::zero())
    });
    match bound_text {
        Some(bt) => {
            let bound = parse_expression(bt).map_err(|e| e.to_string())?;
            let (slope, offset) = probe_affine(&bound, "j")?;
            for j in 0..24i64 {
                let v = coeff
                    .eval(&ctx.with_index("j", j))
                    .map_err(|e| e.to_string())?
                    .valuation();
                if v < Valuation::Finite(slope * j + offset) {
                    return Err(format!("declared bound violated at j = {}", j));
                }
            }
            Ok(series.with_bound(slope, offset))
        }
        None => Ok(series),
    }
}

fn cmd_compose(flags: &Flags) -> Result<i32, String> {
    let precision = precision_flag(flags)?;
    let cfg = SampleConfig {
        window: window_flag(flags)?,
        ..SampleConfig::default()
    };
    let outer_text = flags
        .named
        .get("outer")
        .ok_or_else(|| "compose needs --outer".to_string())?;
    let inner_text = flags
        .named
        .get("inner")
        .ok_or_else(|| "compose needs --inner".to_string())?;
    let at_text = flags
        .named
        .get("at")
        .ok_or_else(|| "compose needs --at".to_string())?;
    let outer = series_from_formula(outer_text, flags.named.get("outer-bound"))?;
    let inner = series_from_formula(inner_text, flags.named.get("inner-bound"))?;
    let x = eval_element(at_text, &ExprContext::new()).map_err(|e| e.to_string())?;
    let composite = composite_eval(&outer, &inner, &x, precision, &cfg);
    let criterion = substitution_criterion(&outer, &inner, &x, precision, &cfg);
    if flags.json {
        let composite_json = match composite.converged() {
            Some(a) => json!({
                "verdict": "converges",
                "head": a.head.to_string(),
                "expansion": a.head.expand(precision).to_string(),
            }),
            None => json!({ "verdict": composite.describe() }),
        };
        let criterion_json = match &criterion {
            Ok(cert) => json!({
                "verdict": "certified",
                "via_composite": cert.via_composite.head.to_string(),
                "via_expected": cert.via_expected.head.to_string(),
            }),
            Err(e) => json!({ "verdict": e.to_string() }),
        };
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "composite": composite_json,
                "substitution_criterion": criterion_json,
            }))
            .unwrap()
        );
    } else {
        println!("composite: {}", composite.describe());
        match &criterion {
            Ok(cert) => println!(
                "substitution criterion: certified; both routes agree ({})",
                cert.via_composite
            ),
            Err(e) => println!("substitution criterion: {}", e),
        }
    }
    Ok(0)
}

fn cmd_scenario(args: &[String]) -> Result<i32, String> {
    let sub = args.first().ok_or_else(|| USAGE.to_string())?;
    match sub.as_str() {
        "list-builtin" => {
            for (name, _) in builtin_scenarios() {
                println!("{}", name);
            }
            Ok(0)
        }
        "run" => {
            let flags = parse_flags(&args[1..])?;
            let target = flags
                .positional
                .first()
                .ok_or_else(|| "scenario run needs a name or path".to_string())?;
            let body = match builtin_scenario(target) {
                Some(text) => text.to_string(),
                None => std::fs::read_to_string(target)
                    .map_err(|e| format!("cannot read scenario `{}`: {}", target, e))?,
            };
            let options = RunOptions {
                precision: flags
                    .named
                    .get("precision")
                    .map(|t| t.parse().map_err(|_| "bad precision".to_string()))
                    .transpose()?,
                window: flags
                    .named
                    .get("window")
                    .map(|t| t.parse().map_err(|_| "bad window".to_string()))
                    .transpose()?,
                seed: flags
                    .named
                    .get("seed")
                    .map(|t| t.parse().map_err(|_| "bad seed".to_string()))
                    .transpose()?,
            };
            let report = run_scenario_text(&body, &options).map_err(|e| e.to_string())?;
            if flags.json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.render_text());
            }
            Ok(if report.all_passed() { 0 } else { 1 })
        }
        other => Err(format!("unknown scenario subcommand `{}`", other)),
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn run(args: Vec<String>) -> i32 {
    let Some(command) = args.first() else {
        eprintln!("{}", USAGE);
        return 2;
    };
    let result = match command.as_str() {
        "eval" => parse_flags(&args[1..]).and_then(|f| cmd_eval(&f)),
        "series-sum" => parse_flags(&args[1..]).and_then(|f| cmd_series_sum(&f)),
        "double-sum" => parse_flags(&args[1..]).and_then(|f| cmd_double_sum(&f)),
        "compose" => parse_flags(&args[1..]).and_then(|f| cmd_compose(&f)),
        "scenario" => cmd_scenario(&args[1..]),
        "help" | "--help" | "-h" => {
            println!("{}", USAGE);
            return 0;
        }
        other => Err(format!("unknown command `{}`\n{}", other, USAGE)),
    };
    match result {
        Ok(code) => code,
        Err(message) => {
            eprintln!("{}", message);
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_scenarios_are_listed() {
        let names: Vec<&str> = builtin_scenarios().iter().map(|(n, _)| *n).collect();
        assert!(names.contains(&"example-nonsubstitution"));
        assert!(names.contains(&"fubini-counterexample"));
        assert!(names.contains(&"faadibruno-blowup"));
        assert!(names.contains(&"product-geometric"));
    }

    #[test]
    fn unknown_command_is_usage_error() {
        assert_eq!(run(vec!["frobnicate".to_string()]), 2);
        assert_eq!(run(vec![]), 2);
    }

    #[test]
    fn exit_codes_follow_outcomes() {
        let args = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        // parse errors are usage errors
        assert_eq!(run(args(&["eval", "1/(1-e"])), 2);
        // successful evaluation
        assert_eq!(run(args(&["eval", "(1)/(1-e)", "--precision", "4"])), 0);
        // built-in scenarios pass
        assert_eq!(run(args(&["scenario", "run", "product-geometric"])), 0);
        // a failing check exits 1
        let path = std::env::temp_dir().join("epscalc-exit-code-test.scn");
        std::fs::write(&path, "name failing\nprecision 4\ncheck eq 1 == 2\n").unwrap();
        assert_eq!(run(args(&["scenario", "run", path.to_str().unwrap()])), 1);
        let _ = std::fs::remove_file(&path);
    }
}
