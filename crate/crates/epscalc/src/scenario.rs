//! Line-oriented scenario files: named definitions (`let`, `series`,
//! `array`) followed by `check` assertions, executed against the library
//! with a structured pass/fail report.
//!
//! Series are defined by coefficient formulas in `j` (with optional
//! leading overrides and a declared valuation bound), arrays by entry
//! formulas in `i`, `j`. Declared bounds are verified on a sampled window
//! before any check runs.

use std::collections::HashMap;
use std::fmt;
use std::time::Instant;

use num_traits::ToPrimitive;
use serde::Serialize;

use crate::double_series::{
    build_counterexample, column_sum, converse_criterion, fubini_sum, partition_sum,
    product_series, row_sum, ConverseFailure, DoubleArray, PartitionOfGrid,
};
use crate::faa_di_bruno::blowup_example;
use crate::field::FieldElement;
use crate::parse::{parse_expression, Expr, ExprContext};
use crate::power_series::{
    composite_eval, expected_coefficients, substitution_criterion, CompositeOutcome, PowerSeries,
    SubstitutionFailure,
};
use crate::series::{sum_with, ConvergenceVerdict, SampleConfig, TermStream};
use crate::valuation::Valuation;

/// Error in a scenario file itself (syntax, unknown names at parse time).
#[derive(Clone, Debug)]
pub struct ScenarioError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "scenario error on line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ScenarioError {}

#[derive(Clone, Debug)]
enum ExpectedOutcome {
    Converges(Expr),
    Diverges,
}

#[derive(Clone, Debug)]
enum ConverseExpect {
    Converges(Expr),
    FailsRows,
    FailsAbs,
}

#[derive(Clone, Debug)]
enum SubstExpect {
    Certified,
    FailsInner,
    FailsOuter,
}

#[derive(Clone, Debug)]
enum CheckStmt {
    Eq {
        lhs: Expr,
        rhs: Expr,
    },
    ValuationIs {
        expr: Expr,
        expected: Option<i64>,
    },
    Sum {
        series: String,
        expect: ExpectedOutcome,
    },
    EvalAt {
        series: String,
        at: Expr,
        expect: ExpectedOutcome,
    },
    RowSum {
        array: String,
        index: u64,
        expect: ExpectedOutcome,
    },
    ColSum {
        array: String,
        index: u64,
        expect: ExpectedOutcome,
    },
    RowSumsPartial {
        array: String,
        upto: u64,
        rhs: Expr,
    },
    Fubini {
        array: String,
        rhs: Expr,
    },
    Converse {
        array: String,
        expect: ConverseExpect,
    },
    Partition {
        array: String,
        kind: String,
        rhs: Expr,
    },
    Product {
        a: String,
        b: String,
        rhs: Expr,
    },
    Composite {
        t: String,
        s: String,
        at: Expr,
        rhs: Expr,
    },
    Expected {
        t: String,
        s: String,
        j: u64,
        expect: ExpectedOutcome,
    },
    Substitution {
        t: String,
        s: String,
        at: Expr,
        expect: SubstExpect,
    },
    Blowup {
        nmax: usize,
    },
}

#[derive(Clone, Debug)]
enum Stmt {
    Let {
        name: String,
        expr: Expr,
    },
    SeriesFormula {
        name: String,
        heads: Vec<Expr>,
        tail: Expr,
        bound: Option<Expr>,
    },
    SeriesAbs {
        name: String,
        of: String,
    },
    SeriesBuiltin {
        name: String,
        which: String,
    },
    ArrayFormula {
        name: String,
        entry: Expr,
        bound: Option<Expr>,
    },
    ArrayBuiltin {
        name: String,
        which: String,
    },
    Check(CheckStmt, String),
}

/// A parsed scenario: metadata plus the statement list.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub precision: i64,
    pub window: u64,
    pub seed: u64,
    statements: Vec<(usize, Stmt)>,
}

/// Command-line overrides for a run.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub precision: Option<i64>,
    pub window: Option<u64>,
    pub seed: Option<u64>,
}

/// Outcome of one check.
#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub description: String,
    pub passed: bool,
    pub detail: String,
}

/// Structured report of a scenario run.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub name: String,
    pub precision: i64,
    pub window: u64,
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
    pub passed: usize,
    pub failed: usize,
    pub wall_ms: u64,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    /// Copy with the timing field cleared, for determinism comparisons.
    pub fn normalized(&self) -> Report {
        let mut r = self.clone();
        r.wall_ms = 0;
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "scenario {} (precision {})\n",
            self.name, self.precision
        ));
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("  {} {}", status, c.description));
            if !c.detail.is_empty() {
                out.push_str(&format!(" :: {}", c.detail));
            }
            out.push('\n');
        }
        out.push_str(&format!(
            "{}: {} passed, {} failed ({} ms)\n",
            if self.all_passed() { "ok" } else { "FAILED" },
            self.passed,
            self.failed,
            self.wall_ms
        ));
        out
    }
}

fn err(line: usize, message: impl Into<String>) -> ScenarioError {
    ScenarioError {
        line,
        message: message.into(),
    }
}

fn parse_expr_in(line: usize, text: &str) -> Result<Expr, ScenarioError> {
    parse_expression(text.trim()).map_err(|e| err(line, e.to_string()))
}

fn split_once_keyword<'a>(text: &'a str, keyword: &str) -> Option<(&'a str, &'a str)> {
    let padded = format!(" {} ", keyword);
    text.find(&padded)
        .map(|at| (&text[..at], &text[at + padded.len()..]))
}

/// Parse scenario text into its statement list.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let mut scenario = Scenario {
        name: "unnamed".to_string(),
        precision: 32,
        window: 64,
        seed: 0,
        statements: Vec::new(),
    };
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(at) => &raw[..at],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (head, rest) = match line.split_once(char::is_whitespace) {
            Some((h, r)) => (h, r.trim()),
            None => (line, ""),
        };
        match head {
            "name" => scenario.name = rest.to_string(),
            "precision" => {
                scenario.precision = rest
                    .parse()
                    .map_err(|_| err(line_no, "precision must be an integer"))?;
                if scenario.precision < 1 {
                    return Err(err(line_no, "precision must be at least 1"));
                }
            }
            "window" => {
                scenario.window = rest
                    .parse()
                    .map_err(|_| err(line_no, "window must be an integer"))?
            }
            "seed" => {
                scenario.seed = rest
                    .parse()
                    .map_err(|_| err(line_no, "seed must be an integer"))?
            }
            "let" => {
                let (name, expr) = rest
                    .split_once('=')
                    .ok_or_else(|| err(line_no, "expected `let <name> = <expr>`"))?;
                scenario.statements.push((
                    line_no,
                    Stmt::Let {
                        name: name.trim().to_string(),
                        expr: parse_expr_in(line_no, expr)?,
                    },
                ));
            }
            "series" => scenario
                .statements
                .push((line_no, parse_series(line_no, rest)?)),
            "array" => scenario
                .statements
                .push((line_no, parse_array(line_no, rest)?)),
            "check" => {
                let stmt = parse_check(line_no, rest)?;
                scenario
                    .statements
                    .push((line_no, Stmt::Check(stmt, rest.to_string())));
            }
            other => return Err(err(line_no, format!("unknown statement `{}`", other))),
        }
    }
    Ok(scenario)
}

fn parse_series(line: usize, rest: &str) -> Result<Stmt, ScenarioError> {
    let (name, body) = rest
        .split_once(char::is_whitespace)
        .ok_or_else(|| err(line, "expected `series <name> ...`"))?;
    let name = name.to_string();
    let body = body.trim();
    if let Some(of) = body.strip_prefix("abs ") {
        return Ok(Stmt::SeriesAbs {
            name,
            of: of.trim().to_string(),
        });
    }
    if let Some(which) = body.strip_prefix("builtin ") {
        return Ok(Stmt::SeriesBuiltin {
            name,
            which: which.trim().to_string(),
        });
    }
    // [coeffs [a, b, ...]] tail <expr> [bound <expr>]
    let (before_bound, bound) = match split_once_keyword(&format!(" {}", body), "bound") {
        Some((before, after)) => (
            before.trim_start().to_string(),
            Some(parse_expr_in(line, after)?),
        ),
        None => (body.to_string(), None),
    };
    let before_bound = before_bound.trim();
    let (heads_text, tail_text) = if let Some(stripped) = before_bound.strip_prefix("coeffs") {
        let stripped = stripped.trim();
        let close = stripped
            .find(']')
            .ok_or_else(|| err(line, "expected `coeffs [ ... ]`"))?;
        let inner = stripped
            .strip_prefix('[')
            .ok_or_else(|| err(line, "expected `coeffs [ ... ]`"))?;
        let inner = &inner[..close - 1];
        let rest_after = stripped[close + 1..].trim();
        let tail = rest_after
            .strip_prefix("tail")
            .ok_or_else(|| err(line, "expected `tail <expr>` after coefficient overrides"))?;
        (Some(inner.to_string()), tail.trim().to_string())
    } else if let Some(tail) = before_bound.strip_prefix("tail") {
        (None, tail.trim().to_string())
    } else {
        return Err(err(line, "expected `tail <expr>` in series definition"));
    };
    let mut heads = Vec::new();
    if let Some(text) = heads_text {
        for piece in text.split(',') {
            let piece = piece.trim();
            if !piece.is_empty() {
                heads.push(parse_expr_in(line, piece)?);
            }
        }
    }
    Ok(Stmt::SeriesFormula {
        name,
        heads,
        tail: parse_expr_in(line, &tail_text)?,
        bound,
    })
}

fn parse_array(line: usize, rest: &str) -> Result<Stmt, ScenarioError> {
    let (name, body) = rest
        .split_once(char::is_whitespace)
        .ok_or_else(|| err(line, "expected `array <name> ...`"))?;
    let name = name.to_string();
    let body = body.trim();
    if let Some(which) = body.strip_prefix("builtin ") {
        return Ok(Stmt::ArrayBuiltin {
            name,
            which: which.trim().to_string(),
        });
    }
    let entry_body = body
        .strip_prefix("entry")
        .ok_or_else(|| err(line, "expected `entry <expr>` in array definition"))?;
    let (entry_text, bound) = match split_once_keyword(entry_body, "bound") {
        Some((before, after)) => (before.to_string(), Some(parse_expr_in(line, after)?)),
        None => (entry_body.to_string(), None),
    };
    Ok(Stmt::ArrayFormula {
        name,
        entry: parse_expr_in(line, &entry_text)?,
        bound,
    })
}

fn parse_check(line: usize, rest: &str) -> Result<CheckStmt, ScenarioError> {
    let (kind, args) = rest
        .split_once(char::is_whitespace)
        .ok_or_else(|| err(line, "expected `check <kind> ...`"))?;
    let args = args.trim();
    let split_eq = |text: &str| -> Option<(String, String)> {
        text.split_once("==")
            .map(|(a, b)| (a.trim().to_string(), b.trim().to_string()))
    };
    let outcome = |text: &str| -> Result<(String, ExpectedOutcome), ScenarioError> {
        if let Some(stripped) = text.strip_suffix("diverges") {
            Ok((stripped.trim().to_string(), ExpectedOutcome::Diverges))
        } else if let Some((lhs, rhs)) = split_eq(text) {
            Ok((lhs, ExpectedOutcome::Converges(parse_expr_in(line, &rhs)?)))
        } else {
            Err(err(line, "expected `== <expr>` or `diverges`"))
        }
    };
    match kind {
        "eq" => {
            let (lhs, rhs) =
                split_eq(args).ok_or_else(|| err(line, "expected `check eq <expr> == <expr>`"))?;
            Ok(CheckStmt::Eq {
                lhs: parse_expr_in(line, &lhs)?,
                rhs: parse_expr_in(line, &rhs)?,
            })
        }
        "valuation" => {
            let (lhs, rhs) = split_eq(args)
                .ok_or_else(|| err(line, "expected `check valuation <expr> == <int|inf>`"))?;
            let expected = if rhs == "inf" {
                None
            } else {
                Some(
                    rhs.parse()
                        .map_err(|_| err(line, "valuation must be an integer or `inf`"))?,
                )
            };
            Ok(CheckStmt::ValuationIs {
                expr: parse_expr_in(line, &lhs)?,
                expected,
            })
        }
        "sum" => {
            let (series, expect) = outcome(args)?;
            Ok(CheckStmt::Sum { series, expect })
        }
        "eval" => {
            let padded = format!(" {}", args);
            let (before, after) = split_once_keyword(&padded, "at")
                .ok_or_else(|| err(line, "expected `check eval <series> at <expr> ...`"))?;
            let series = before.trim().to_string();
            let (at_text, expect) = outcome(after)?;
            Ok(CheckStmt::EvalAt {
                series,
                at: parse_expr_in(line, &at_text)?,
                expect,
            })
        }
        "rowsum" | "colsum" => {
            let (array, rest2) = args
                .split_once(char::is_whitespace)
                .ok_or_else(|| err(line, "expected `<array> <index> ...`"))?;
            let (index_text, expect_text) = match rest2.trim().split_once(char::is_whitespace) {
                Some((i, r)) => (i.to_string(), r.trim().to_string()),
                None => (rest2.trim().to_string(), String::new()),
            };
            let index: u64 = index_text
                .parse()
                .map_err(|_| err(line, "row/column index must be an integer"))?;
            let expect = if expect_text == "diverges" {
                ExpectedOutcome::Diverges
            } else if let Some(stripped) = expect_text.strip_prefix("==") {
                ExpectedOutcome::Converges(parse_expr_in(line, stripped)?)
            } else {
                return Err(err(line, "expected `== <expr>` or `diverges`"));
            };
            if kind == "rowsum" {
                Ok(CheckStmt::RowSum {
                    array: array.to_string(),
                    index,
                    expect,
                })
            } else {
                Ok(CheckStmt::ColSum {
                    array: array.to_string(),
                    index,
                    expect,
                })
            }
        }
        "rowsums-partial" => {
            let (array, rest2) = args
                .split_once(char::is_whitespace)
                .ok_or_else(|| err(line, "expected `<array> <upto> == <expr>`"))?;
            let (upto_text, rhs) =
                split_eq(rest2).ok_or_else(|| err(line, "expected `== <expr>`"))?;
            Ok(CheckStmt::RowSumsPartial {
                array: array.to_string(),
                upto: upto_text
                    .trim()
                    .parse()
                    .map_err(|_| err(line, "bound must be an integer"))?,
                rhs: parse_expr_in(line, &rhs)?,
            })
        }
        "fubini" => {
            let (array, rhs) = split_eq(args)
                .ok_or_else(|| err(line, "expected `check fubini <array> == <expr>`"))?;
            Ok(CheckStmt::Fubini {
                array,
                rhs: parse_expr_in(line, &rhs)?,
            })
        }
        "converse" => {
            if let Some(array) = args.strip_suffix("fails-rows") {
                Ok(CheckStmt::Converse {
                    array: array.trim().to_string(),
                    expect: ConverseExpect::FailsRows,
                })
            } else if let Some(array) = args.strip_suffix("fails-abs") {
                Ok(CheckStmt::Converse {
                    array: array.trim().to_string(),
                    expect: ConverseExpect::FailsAbs,
                })
            } else if let Some((array, rhs)) = split_eq(args) {
                Ok(CheckStmt::Converse {
                    array,
                    expect: ConverseExpect::Converges(parse_expr_in(line, &rhs)?),
                })
            } else {
                Err(err(
                    line,
                    "expected `== <expr>`, `fails-rows`, or `fails-abs`",
                ))
            }
        }
        "partition" => {
            let (array, rest2) = args
                .split_once(char::is_whitespace)
                .ok_or_else(|| err(line, "expected `<array> <kind> == <expr>`"))?;
            let (kind_text, rhs) =
                split_eq(rest2).ok_or_else(|| err(line, "expected `== <expr>`"))?;
            Ok(CheckStmt::Partition {
                array: array.to_string(),
                kind: kind_text.trim().to_string(),
                rhs: parse_expr_in(line, &rhs)?,
            })
        }
        "product" => {
            let (a, rest2) = args
                .split_once(char::is_whitespace)
                .ok_or_else(|| err(line, "expected `<series> <series> == <expr>`"))?;
            let (b, rhs) = split_eq(rest2).ok_or_else(|| err(line, "expected `== <expr>`"))?;
            Ok(CheckStmt::Product {
                a: a.to_string(),
                b,
                rhs: parse_expr_in(line, &rhs)?,
            })
        }
        "composite" => {
            let (t, rest2) = args
                .split_once(char::is_whitespace)
                .ok_or_else(|| err(line, "expected `<outer> <inner> at <expr> == <expr>`"))?;
            let (s, rest3) = rest2
                .trim()
                .split_once(char::is_whitespace)
                .ok_or_else(|| err(line, "expected inner series name"))?;
            let after_at = rest3
                .trim()
                .strip_prefix("at ")
                .ok_or_else(|| err(line, "expected `at <expr>`"))?;
            let (at_text, rhs) =
                split_eq(after_at).ok_or_else(|| err(line, "expected `== <expr>`"))?;
            Ok(CheckStmt::Composite {
                t: t.to_string(),
                s: s.to_string(),
                at: parse_expr_in(line, &at_text)?,
                rhs: parse_expr_in(line, &rhs)?,
            })
        }
        "expected" => {
            let (t, rest2) = args
                .split_once(char::is_whitespace)
                .ok_or_else(|| err(line, "expected `<outer> <inner> <j> ...`"))?;
            let (s, rest3) = rest2
                .trim()
                .split_once(char::is_whitespace)
                .ok_or_else(|| err(line, "expected inner series name"))?;
            let (j_text, expect_text) = match rest3.trim().split_once(char::is_whitespace) {
                Some((a, b)) => (a.to_string(), b.trim().to_string()),
                None => (rest3.trim().to_string(), String::new()),
            };
            let j: u64 = j_text
                .parse()
                .map_err(|_| err(line, "coefficient index must be an integer"))?;
            let expect = if expect_text == "diverges" {
                ExpectedOutcome::Diverges
            } else if let Some(stripped) = expect_text.strip_prefix("==") {
                ExpectedOutcome::Converges(parse_expr_in(line, stripped)?)
            } else {
                return Err(err(line, "expected `== <expr>` or `diverges`"));
            };
            Ok(CheckStmt::Expected {
                t: t.to_string(),
                s: s.to_string(),
                j,
                expect,
            })
        }
        "substitution" => {
            let (t, rest2) = args
                .split_once(char::is_whitespace)
                .ok_or_else(|| err(line, "expected `<outer> <inner> at <expr> <outcome>`"))?;
            let (s, rest3) = rest2
                .trim()
                .split_once(char::is_whitespace)
                .ok_or_else(|| err(line, "expected inner series name"))?;
            let after_at = rest3
                .trim()
                .strip_prefix("at ")
                .ok_or_else(|| err(line, "expected `at <expr>`"))?;
            let (at_text, expect) = if let Some(stripped) = after_at.strip_suffix("certified") {
                (stripped.trim(), SubstExpect::Certified)
            } else if let Some(stripped) = after_at.strip_suffix("fails-inner") {
                (stripped.trim(), SubstExpect::FailsInner)
            } else if let Some(stripped) = after_at.strip_suffix("fails-outer") {
                (stripped.trim(), SubstExpect::FailsOuter)
            } else {
                return Err(err(
                    line,
                    "expected `certified`, `fails-inner`, or `fails-outer`",
                ));
            };
            Ok(CheckStmt::Substitution {
                t: t.to_string(),
                s: s.to_string(),
                at: parse_expr_in(line, at_text)?,
                expect,
            })
        }
        "blowup" => {
            let (nmax_text, rest2) = args
                .split_once(char::is_whitespace)
                .ok_or_else(|| err(line, "expected `check blowup <nmax> valuations`"))?;
            if rest2.trim() != "valuations" {
                return Err(err(line, "expected `valuations`"));
            }
            Ok(CheckStmt::Blowup {
                nmax: nmax_text
                    .parse()
                    .map_err(|_| err(line, "blow-up order must be an integer"))?,
            })
        }
        other => Err(err(line, format!("unknown check kind `{}`", other))),
    }
}

/// A named series inside a scenario, usable both as a power series and as
/// a plain term stream.
#[derive(Clone)]
struct SeriesDef {
    power: PowerSeries,
    stream: TermStream,
}

struct Runtime {
    precision: i64,
    cfg: SampleConfig,
    ctx: ExprContext,
    series: HashMap<String, SeriesDef>,
    arrays: HashMap<String, DoubleArray>,
}

fn integer_value(v: &FieldElement) -> Option<i64> {
    crate::parse::constant_integer(v).and_then(|b| b.to_i64())
}

impl Runtime {
    fn eval(&self, expr: &Expr, line: usize) -> Result<FieldElement, ScenarioError> {
        expr.eval(&self.ctx).map_err(|e| err(line, e.to_string()))
    }

    fn series(&self, name: &str, line: usize) -> Result<&SeriesDef, ScenarioError> {
        self.series
            .get(name)
            .ok_or_else(|| err(line, format!("unknown series `{}`", name)))
    }

    fn array(&self, name: &str, line: usize) -> Result<&DoubleArray, ScenarioError> {
        self.arrays
            .get(name)
            .ok_or_else(|| err(line, format!("unknown array `{}`", name)))
    }

    /// Probe an expression in one index variable for affine shape and
    /// return (slope, offset).
    fn probe_affine(
        &self,
        expr: &Expr,
        var: &str,
        line: usize,
    ) -> Result<(i64, i64), ScenarioError> {
        let value_at = |v: i64| -> Result<i64, ScenarioError> {
            let ctx = self.ctx.with_index(var, v);
            let val = expr
                .eval(&ctx)
                .map_err(|e| err(line, format!("bound expression: {}", e)))?;
            integer_value(&val).ok_or_else(|| err(line, "bound expression must be integer-valued"))
        };
        let offset = value_at(0)?;
        let slope = value_at(1)? - offset;
        for probe in [2i64, 3, 5, 8, 13] {
            if value_at(probe)? != slope * probe + offset {
                return Err(err(line, "bound expression must be affine in its index"));
            }
        }
        Ok((slope, offset))
    }

    fn define_series_formula(
        &mut self,
        name: &str,
        heads: &[Expr],
        tail: &Expr,
        bound: &Option<Expr>,
        line: usize,
    ) -> Result<(), ScenarioError> {
        let mut head_values = Vec::new();
        for h in heads {
            head_values.push(self.eval(h, line)?);
        }
        // The coefficient closure cannot surface evaluation errors, so
        // reject a broken tail formula up front on a sampled window.
        for j in head_values.len() as i64..head_values.len() as i64 + 8 {
            tail.eval(&self.ctx.with_index("j", j))
                .map_err(|e| err(line, format!("tail formula at j = {}: {}", j, e)))?;
        }
        let tail = tail.clone();
        let ctx = self.ctx.clone();
        let head_count = head_values.len() as u64;
        let coeff = move |j: u64| -> FieldElement {
            if j < head_count {
                head_values[j as usize].clone()
            } else {
                tail.eval(&ctx.with_index("j", j as i64))
                    .unwrap_or_else(|_| FieldElement::zero())
            }
        };
        let power = PowerSeries::from_fn(coeff);
        let power = match bound {
            Some(bexpr) => {
                let (slope, offset) = self.probe_affine(bexpr, "j", line)?;
                let with = power.with_bound(slope, offset);
                for j in 0..self.cfg.window.min(24) {
                    let v = with.coeff(j).valuation();
                    let claim = Valuation::Finite(slope * j as i64 + offset);
                    if v < claim {
                        return Err(err(
                            line,
                            format!(
                                "declared bound violated at j = {}: valuation {} < {}",
                                j, v, claim
                            ),
                        ));
                    }
                }
                with
            }
            None => power,
        };
        self.series.insert(name.to_string(), make_def(power));
        Ok(())
    }

    fn define_array_formula(
        &mut self,
        name: &str,
        entry: &Expr,
        bound: &Option<Expr>,
        line: usize,
    ) -> Result<(), ScenarioError> {
        let entry = entry.clone();
        let ctx = self.ctx.clone();
        let entry_fn = move |i: u64, j: u64| -> FieldElement {
            entry
                .eval(&ctx.with_index("i", i as i64).with_index("j", j as i64))
                .unwrap_or_else(|_| FieldElement::zero())
        };
        let array = DoubleArray::from_fn(entry_fn);
        let array = match bound {
            Some(bexpr) => {
                let (slope, offset) = self.probe_affine(bexpr, "n", line)?;
                if slope < 0 {
                    return Err(err(line, "joint bound must be non-decreasing"));
                }
                let with = array.with_affine_joint_bound(slope, offset);
                for d in 0..10u64 {
                    for i in 0..=d {
                        let v = with.entry(i, d - i).valuation();
                        let claim = Valuation::Finite(slope * d as i64 + offset);
                        if v < claim {
                            return Err(err(
                                line,
                                format!(
                                    "declared joint bound violated at ({}, {}): valuation {} < {}",
                                    i,
                                    d - i,
                                    v,
                                    claim
                                ),
                            ));
                        }
                    }
                }
                with
            }
            None => array,
        };
        self.arrays.insert(name.to_string(), array);
        Ok(())
    }
}

fn make_def(power: PowerSeries) -> SeriesDef {
    let stream_power = power.clone();
    let stream = TermStream::from_fn(move |n| stream_power.coeff(n));
    let stream = match power.bound() {
        Some(b) if b.slope >= 0 => stream.with_affine_bound(b.slope, b.offset),
        _ => stream,
    };
    SeriesDef { power, stream }
}

/// Run a parsed scenario.
pub fn run_scenario(scenario: &Scenario, options: &RunOptions) -> Report {
    let start = Instant::now();
    let precision = options.precision.unwrap_or(scenario.precision);
    let window = options.window.unwrap_or(scenario.window);
    let seed = options.seed.unwrap_or(scenario.seed);
    let cfg = SampleConfig {
        window,
        ..SampleConfig::default()
    };
    let mut rt = Runtime {
        precision,
        cfg,
        ctx: ExprContext::new(),
        series: HashMap::new(),
        arrays: HashMap::new(),
    };
    let mut checks: Vec<CheckOutcome> = Vec::new();
    for (line, stmt) in &scenario.statements {
        let setup_result: Result<Option<CheckOutcome>, ScenarioError> = match stmt {
            Stmt::Let { name, expr } => rt.eval(expr, *line).map(|v| {
                rt.ctx.bind(name, v);
                None
            }),
            Stmt::SeriesFormula {
                name,
                heads,
                tail,
                bound,
            } => rt
                .define_series_formula(name, heads, tail, bound, *line)
                .map(|_| None),
            Stmt::SeriesAbs { name, of } => match rt.series(of, *line) {
                Ok(def) => {
                    let abs = def.power.abs_series();
                    rt.series.insert(name.clone(), make_def(abs));
                    Ok(None)
                }
                Err(e) => Err(e),
            },
            Stmt::SeriesBuiltin { name, which } => match which.as_str() {
                "counterexample-k" => {
                    let ce = build_counterexample();
                    let stream = ce.k_terms.clone();
                    let power_stream = ce.k_terms;
                    let power = PowerSeries::from_fn(move |n| power_stream.term(n));
                    rt.series.insert(name.clone(), SeriesDef { power, stream });
                    Ok(None)
                }
                other => Err(err(*line, format!("unknown builtin series `{}`", other))),
            },
            Stmt::ArrayFormula { name, entry, bound } => rt
                .define_array_formula(name, entry, bound, *line)
                .map(|_| None),
            Stmt::ArrayBuiltin { name, which } => match which.as_str() {
                "counterexample" => {
                    rt.arrays.insert(name.clone(), build_counterexample().array);
                    Ok(None)
                }
                other => Err(err(*line, format!("unknown builtin array `{}`", other))),
            },
            Stmt::Check(check, text) => run_check(&rt, check, text, *line).map(Some),
        };
        match setup_result {
            Ok(Some(outcome)) => checks.push(outcome),
            Ok(None) => {}
            Err(e) => {
                checks.push(CheckOutcome {
                    description: format!("line {}", e.line),
                    passed: false,
                    detail: e.message,
                });
                break;
            }
        }
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    let failed = checks.len() - passed;
    Report {
        name: scenario.name.clone(),
        precision,
        window,
        seed,
        checks,
        passed,
        failed,
        wall_ms: start.elapsed().as_millis() as u64,
    }
}

fn outcome(description: String, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome {
        description,
        passed,
        detail,
    }
}

fn check_verdict_against(
    rt: &Runtime,
    verdict: &ConvergenceVerdict,
    expect: &ExpectedOutcome,
    line: usize,
) -> Result<(bool, String), ScenarioError> {
    match expect {
        ExpectedOutcome::Converges(rhs) => {
            let expected = rt.eval(rhs, line)?;
            match verdict.converged() {
                Some(a) => Ok((
                    a.agrees_with_element(&expected, rt.precision),
                    format!("computed {}", a),
                )),
                None => Ok((false, verdict.describe())),
            }
        }
        ExpectedOutcome::Diverges => Ok((verdict.is_diverges(), verdict.describe())),
    }
}

fn run_check(
    rt: &Runtime,
    check: &CheckStmt,
    text: &str,
    line: usize,
) -> Result<CheckOutcome, ScenarioError> {
    let description = text.to_string();
    let p = rt.precision;
    let cfg = &rt.cfg;
    match check {
        CheckStmt::Eq { lhs, rhs } => {
            let a = rt.eval(lhs, line)?;
            let b = rt.eval(rhs, line)?;
            Ok(outcome(
                description,
                a == b,
                format!("lhs = {}, rhs = {}", a, b),
            ))
        }
        CheckStmt::ValuationIs { expr, expected } => {
            let v = rt.eval(expr, line)?.valuation();
            let want = match expected {
                Some(k) => Valuation::Finite(*k),
                None => Valuation::Infinite,
            };
            Ok(outcome(
                description,
                v == want,
                format!("valuation = {}", v),
            ))
        }
        CheckStmt::Sum { series, expect } => {
            let def = rt.series(series, line)?;
            let verdict = sum_with(&def.stream, p, cfg);
            let (passed, detail) = check_verdict_against(rt, &verdict, expect, line)?;
            Ok(outcome(description, passed, detail))
        }
        CheckStmt::EvalAt { series, at, expect } => {
            let def = rt.series(series, line)?;
            let x = rt.eval(at, line)?;
            let verdict = def.power.eval(&x, p, cfg);
            let (passed, detail) = check_verdict_against(rt, &verdict, expect, line)?;
            Ok(outcome(description, passed, detail))
        }
        CheckStmt::RowSum {
            array,
            index,
            expect,
        } => {
            let a = rt.array(array, line)?;
            let verdict = row_sum(a, *index, p, cfg);
            let (passed, detail) = check_verdict_against(rt, &verdict, expect, line)?;
            Ok(outcome(description, passed, detail))
        }
        CheckStmt::ColSum {
            array,
            index,
            expect,
        } => {
            let a = rt.array(array, line)?;
            let verdict = column_sum(a, *index, p, cfg);
            let (passed, detail) = check_verdict_against(rt, &verdict, expect, line)?;
            Ok(outcome(description, passed, detail))
        }
        CheckStmt::RowSumsPartial { array, upto, rhs } => {
            let a = rt.array(array, line)?;
            let expected = rt.eval(rhs, line)?;
            let inner_precision = p + 4;
            let mut total = FieldElement::zero();
            for i in 0..=*upto {
                match row_sum(a, i, inner_precision, cfg).converged() {
                    Some(v) => total = total + &v.head,
                    None => {
                        return Ok(outcome(
                            description,
                            false,
                            format!("row {} did not converge", i),
                        ))
                    }
                }
            }
            let passed = (&total - &expected).valuation().at_least(p);
            Ok(outcome(
                description,
                passed,
                format!("partial total = {}", total),
            ))
        }
        CheckStmt::Fubini { array, rhs } => {
            let a = rt.array(array, line)?;
            let expected = rt.eval(rhs, line)?;
            match fubini_sum(a, p, cfg) {
                Ok(triple) => {
                    let ok = triple.linearized.agrees_with_element(&expected, p)
                        && triple.by_rows.agrees_with_element(&expected, p)
                        && triple.by_columns.agrees_with_element(&expected, p)
                        && triple.linearized.agrees_with(&triple.by_rows, p)
                        && triple.linearized.agrees_with(&triple.by_columns, p);
                    Ok(outcome(
                        description,
                        ok,
                        format!(
                            "linearized {}, rows {}, columns {}",
                            triple.linearized, triple.by_rows, triple.by_columns
                        ),
                    ))
                }
                Err(e) => Ok(outcome(description, false, e.to_string())),
            }
        }
        CheckStmt::Converse { array, expect } => {
            let a = rt.array(array, line)?;
            let result = converse_criterion(a, p, cfg);
            let (passed, detail) = match (&result, expect) {
                (Ok(v), ConverseExpect::Converges(rhs)) => {
                    let expected = rt.eval(rhs, line)?;
                    (v.agrees_with_element(&expected, p), format!("sum {}", v))
                }
                (Err(ConverseFailure::Row { index, verdict }), ConverseExpect::FailsRows) => {
                    (true, format!("row {}: {}", index, verdict.describe()))
                }
                (Err(ConverseFailure::IteratedAbs { verdict }), ConverseExpect::FailsAbs) => {
                    (true, format!("iterated abs: {}", verdict.describe()))
                }
                (Ok(v), _) => (false, format!("criterion succeeded with {}", v)),
                (Err(e), _) => (false, e.to_string()),
            };
            Ok(outcome(description, passed, detail))
        }
        CheckStmt::Partition { array, kind, rhs } => {
            let a = rt.array(array, line)?;
            let expected = rt.eval(rhs, line)?;
            let parts = match kind.as_str() {
                "rows" => PartitionOfGrid::by_rows(),
                "columns" => PartitionOfGrid::by_columns(),
                "antidiagonals" => PartitionOfGrid::by_antidiagonals(),
                "parity" => PartitionOfGrid::by_diagonal_parity(),
                other => return Err(err(line, format!("unknown partition kind `{}`", other))),
            };
            match partition_sum(a, &parts, p, cfg) {
                Ok(v) => Ok(outcome(
                    description,
                    v.agrees_with_element(&expected, p),
                    format!("sum {}", v),
                )),
                Err(e) => Ok(outcome(description, false, e.to_string())),
            }
        }
        CheckStmt::Product { a, b, rhs } => {
            let sa = rt.series(a, line)?;
            let sb = rt.series(b, line)?;
            let expected = rt.eval(rhs, line)?;
            match product_series(&sa.stream, &sb.stream, p, cfg) {
                Ok(v) => Ok(outcome(
                    description,
                    v.agrees_with_element(&expected, p),
                    format!("product {}", v),
                )),
                Err(e) => Ok(outcome(description, false, e.to_string())),
            }
        }
        CheckStmt::Composite { t, s, at, rhs } => {
            let st = rt.series(t, line)?;
            let ss = rt.series(s, line)?;
            let x = rt.eval(at, line)?;
            let expected = rt.eval(rhs, line)?;
            match composite_eval(&st.power, &ss.power, &x, p, cfg) {
                CompositeOutcome::Converges(v) => Ok(outcome(
                    description,
                    v.agrees_with_element(&expected, p),
                    format!("value {}", v),
                )),
                other => Ok(outcome(description, false, other.describe())),
            }
        }
        CheckStmt::Expected { t, s, j, expect } => {
            let st = rt.series(t, line)?;
            let ss = rt.series(s, line)?;
            let d = expected_coefficients(&st.power, &ss.power, *j, p, cfg);
            let (passed, detail) = check_verdict_against(rt, &d.at(*j).verdict, expect, line)?;
            Ok(outcome(description, passed, detail))
        }
        CheckStmt::Substitution { t, s, at, expect } => {
            let st = rt.series(t, line)?;
            let ss = rt.series(s, line)?;
            let x = rt.eval(at, line)?;
            let result = substitution_criterion(&st.power, &ss.power, &x, p, cfg);
            let (passed, detail) = match (&result, expect) {
                (Ok(cert), SubstExpect::Certified) => (
                    cert.via_composite.agrees_with(&cert.via_expected, p),
                    format!(
                        "composite {}, expected-route {}",
                        cert.via_composite, cert.via_expected
                    ),
                ),
                (Err(e), SubstExpect::FailsInner) => (
                    matches!(
                        **e,
                        SubstitutionFailure::InnerNotConvergent { .. }
                            | SubstitutionFailure::AbsNotConvergent { .. }
                    ),
                    e.to_string(),
                ),
                (Err(e), SubstExpect::FailsOuter) => (
                    matches!(**e, SubstitutionFailure::OuterAtAbsArgument { .. }),
                    e.to_string(),
                ),
                (Ok(cert), _) => (false, format!("criterion certified {}", cert.via_composite)),
                (Err(e), _) => (false, e.to_string()),
            };
            Ok(outcome(description, passed, detail))
        }
        CheckStmt::Blowup { nmax } => match blowup_example(*nmax, p.max(24)) {
            Ok(records) => {
                let mut passed = true;
                let mut details = Vec::new();
                for r in &records {
                    let ok = r.valuation == Valuation::Finite(-(r.n as i64));
                    passed &= ok;
                    details.push(format!("D^{} valuation {}", r.n, r.valuation));
                }
                Ok(outcome(description, passed, details.join(", ")))
            }
            Err(e) => Ok(outcome(description, false, e.to_string())),
        },
    }
}

/// Built-in scenarios shipped with the crate.
pub fn builtin_scenarios() -> Vec<(&'static str, &'static str)> {
    vec![
        (
            "example-nonsubstitution",
            include_str!("../scenarios/example-nonsubstitution.scn"),
        ),
        (
            "fubini-counterexample",
            include_str!("../scenarios/fubini-counterexample.scn"),
        ),
        (
            "faadibruno-blowup",
            include_str!("../scenarios/faadibruno-blowup.scn"),
        ),
        (
            "product-geometric",
            include_str!("../scenarios/product-geometric.scn"),
        ),
    ]
}

/// Look up a built-in scenario body by name.
pub fn builtin_scenario(name: &str) -> Option<&'static str> {
    builtin_scenarios()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, body)| body)
}

/// Parse and run scenario text in one step.
pub fn run_scenario_text(text: &str, options: &RunOptions) -> Result<Report, ScenarioError> {
    let scenario = parse_scenario(text)?;
    Ok(run_scenario(&scenario, options))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_ok(text: &str) -> Report {
        run_scenario_text(text, &RunOptions::default()).expect("scenario parses")
    }

    #[test]
    fn formula_arrays_feed_the_double_series_checks() {
        let report = run_ok(
            "name arrays\n\
             precision 8\n\
             array A entry e^(i+j) bound n\n\
             array B entry (-1)^(i+j) * e^(i+j) bound n\n\
             check fubini A == 1/((1-e)^2)\n\
             check partition A antidiagonals == 1/((1-e)^2)\n\
             check partition A parity == 1/((1-e)^2)\n\
             check rowsum A 2 == (e^2)/(1-e)\n\
             check fubini B == 1/((1+e)^2)\n",
        );
        assert!(report.all_passed(), "{}", report.render_text());
    }

    #[test]
    fn coefficient_overrides_and_abs_series() {
        let report = run_ok(
            "name overrides\n\
             precision 12\n\
             let a0 = e/(1 - e)\n\
             series S coeffs [a0, 2] tail (-1)^j * e^j bound 0\n\
             series Sbar abs S\n\
             check eq a0 - a0 == 0\n\
             check valuation a0 == 1\n\
             check eval Sbar at e == a0 + 2*e + (e^4)/(1 - e^2)\n",
        );
        assert!(report.all_passed(), "{}", report.render_text());
    }

    #[test]
    fn violated_bound_is_rejected_at_setup() {
        // coefficients have valuation 0 but the declared bound claims j
        let report = run_ok(
            "name bad-bound\n\
             precision 8\n\
             series S tail 1 + 0*e^j bound j\n\
             check sum S diverges\n",
        );
        assert!(!report.all_passed());
        assert!(report.checks[0].detail.contains("bound violated"));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_scenario("name x\nprecision 8\nfrobnicate 1\n").unwrap_err();
        assert_eq!(err.line, 3);
        let err = parse_scenario("check eq 1 ==\n").unwrap_err();
        assert_eq!(err.line, 1);
        let err = parse_scenario("precision zero\n").unwrap_err();
        assert_eq!(err.line, 1);
    }

    #[test]
    fn precision_override_applies() {
        let scenario = parse_scenario(
            "name p\nprecision 4\nseries G tail e^j bound j\ncheck sum G == 1/(1 - e)\n",
        )
        .unwrap();
        let report = run_scenario(
            &scenario,
            &RunOptions {
                precision: Some(9),
                ..RunOptions::default()
            },
        );
        assert_eq!(report.precision, 9);
        assert!(report.all_passed());
        assert!(report.checks[0].detail.contains("e^8"));
    }

    #[test]
    fn undefined_names_fail_the_run() {
        let report = run_ok("name u\nprecision 4\ncheck sum MISSING == 1\n");
        assert!(!report.all_passed());
        assert!(report.checks[0].detail.contains("unknown series"));
    }
}
