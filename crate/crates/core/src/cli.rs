//! Command-line front end.
//!
//! Input is one JSON object `{"char_poly": [...], "init": [...], "name": ...}`
//! with rationals written as strings (`"3"`, `"-7/2"`), coefficients in
//! ascending degree. Every subcommand renders a table, JSON or CSV.
//!
//! Exit codes: 0 success, 2 parse error, 3 failed precondition, 4 scientific
//! finding or mismatch, 5 precision exhausted.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::divisibility::{cramer_certificate, verify_theorem_with, DefViolation};
use crate::error::Error;
use crate::exact::{format_rat, parse_rat, yun_squarefree, BigRat, Poly};
use crate::interval::{ComplexInterval, RatInterval};
use crate::recurrence::{impulse_basis, nondegeneracy_check, LinearRecurrence, NondegeneracyVerdict};
use crate::roots::{isolate_roots, set_max_working_bits};
use crate::vandermonde::{exponent_structure, Agreement, Certified, GvEvaluator};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_FINDING: i32 = 4;
pub const EXIT_PRECISION: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "divseq", version, about = "Impulse determinants and divisibility sequences of linear recurrences")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Recurrence JSON file; stdin when absent.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,

    /// Width bound for certified intervals, as a decimal (`1e-30`) or `p/q`.
    #[arg(long, global = true, default_value = "1e-30")]
    pub precision: String,

    /// Exit with code 3 when the recurrence is degenerate.
    #[arg(long, global = true)]
    pub require_nondegenerate: bool,

    /// Cap on the working precision of root refinement, in bits.
    #[arg(long, global = true, env = "DIVSEQ_MAX_PRECISION_BITS")]
    pub max_precision_bits: Option<u64>,

    /// Include wall-clock timing in the output (breaks byte-identical reruns).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Order, squarefree structure, non-degeneracy and root boxes.
    Analyze,
    /// Impulse sequences X^(k)_n for n = 0 ..= n-max.
    Impulse {
        #[arg(long, default_value_t = 10)]
        n_max: u64,
    },
    /// D(n) next to its closed form for n = 0 ..= n-max.
    Gvdet {
        #[arg(long, default_value_t = 10)]
        n_max: u64,
    },
    /// Divisibility prefix check and S_n | D(n) for n = 0 ..= n-max.
    Verify {
        #[arg(long, default_value_t = 50)]
        n_max: u64,
    },
    /// Cramer-rule certificate at a single n.
    Certify {
        #[arg(long)]
        n: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

/// Parsed input file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecurrenceSpec {
    pub char_poly: Vec<String>,
    #[serde(default)]
    pub init: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

/// Failure carrying its exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn parse(message: impl Into<String>) -> Self {
        CliError { code: EXIT_PARSE, message: message.into() }
    }

    fn precondition(message: impl Into<String>) -> Self {
        CliError { code: EXIT_PRECONDITION, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidRational(_) | Error::InvalidPrecision => EXIT_PARSE,
            Error::PrecisionExhausted { .. } => EXIT_PRECISION,
            Error::Mismatch { .. } | Error::CertificateFailure { .. } => EXIT_FINDING,
            _ => EXIT_PRECONDITION,
        };
        CliError { code, message: e.to_string() }
    }
}

impl RecurrenceSpec {
    /// Parses JSON text; errors report line and column.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| {
            CliError::parse(format!("invalid input at line {}, column {}: {e}", e.line(), e.column()))
        })
    }

    pub fn char_poly(&self) -> Result<Poly, CliError> {
        let coeffs = parse_list("char_poly", &self.char_poly)?;
        Ok(Poly::new(coeffs))
    }

    pub fn init(&self) -> Result<Vec<BigRat>, CliError> {
        parse_list("init", &self.init)
    }

    pub fn recurrence(&self) -> Result<LinearRecurrence, CliError> {
        Ok(LinearRecurrence::new(self.char_poly()?, self.init()?)?)
    }
}

fn parse_list(field: &str, items: &[String]) -> Result<Vec<BigRat>, CliError> {
    items
        .iter()
        .enumerate()
        .map(|(i, s)| parse_rat(s).map_err(|_| CliError::parse(format!("{field}[{i}]: invalid rational {s:?}"))))
        .collect()
}

/// Accepts `p`, `p/q`, or a decimal with optional exponent such as `1e-30`
/// or `2.5E-8`, converted exactly.
pub fn parse_precision(s: &str) -> Result<BigRat, CliError> {
    let bad = || CliError::parse(format!("invalid precision {s:?}"));
    let t = s.trim();
    let q = if t.contains('/') {
        parse_rat(t).map_err(|_| bad())?
    } else {
        let (mantissa, exp) = match t.find(['e', 'E']) {
            Some(i) => (&t[..i], t[i + 1..].parse::<i64>().map_err(|_| bad())?),
            None => (t, 0),
        };
        let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        let digits = format!("{int_part}{frac_part}");
        let m: BigInt = digits.parse().map_err(|_| bad())?;
        let e = exp - frac_part.len() as i64;
        let ten = BigInt::from(10u32);
        if e >= 0 {
            BigRat::from_integer(m * ten.pow(e as u32))
        } else {
            BigRat::new(m, ten.pow((-e) as u32))
        }
    };
    if !q.is_positive() {
        return Err(bad());
    }
    Ok(q)
}

/// Smallest `k` with `10^-k <= precision`.
fn decimal_digits(precision: &BigRat) -> usize {
    let mut k = 0;
    let mut scale = BigRat::one();
    while &scale > precision && k < 10_000 {
        scale /= BigRat::from_integer(10.into());
        k += 1;
    }
    k
}

/// `q` rounded to `digits` decimal places, downward or upward, written in
/// full positional notation.
pub fn decimal(q: &BigRat, digits: usize, up: bool) -> String {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = q.numer() * &scale;
    let (fl, rem) = scaled.div_mod_floor(q.denom());
    let k = if up && !rem.is_zero() { fl + 1 } else { fl };
    let neg = k.is_negative();
    let s = k.abs().to_string();
    let s = format!("{s:0>width$}", width = digits + 1);
    let (int_part, frac_part) = s.split_at(s.len() - digits);
    let frac_part = frac_part.trim_end_matches('0');
    let sign = if neg { "-" } else { "" };
    if frac_part.is_empty() {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

fn interval_json(iv: &RatInterval, digits: usize) -> Value {
    json!([decimal(&iv.lo, digits, false), decimal(&iv.hi, digits, true)])
}

fn complex_json(z: &ComplexInterval, digits: usize) -> Value {
    json!({ "re": interval_json(&z.re, digits), "im": interval_json(&z.im, digits) })
}

fn certified_json(c: &Certified, digits: usize) -> Value {
    match c {
        Certified::Exact(v) => json!({ "exact": format_rat(v) }),
        Certified::Interval(iv) => json!({ "interval": complex_json(iv, digits) }),
    }
}

fn certified_text(c: &Certified, digits: usize) -> String {
    match c {
        Certified::Exact(v) => format_rat(v),
        Certified::Interval(iv) => {
            let re = format!("[{}, {}]", decimal(&iv.re.lo, digits, false), decimal(&iv.re.hi, digits, true));
            if iv.im.is_point() && iv.im.lo.is_zero() {
                re
            } else {
                format!("{re} + i[{}, {}]", decimal(&iv.im.lo, digits, false), decimal(&iv.im.hi, digits, true))
            }
        }
    }
}

/// Echo of what was run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputEcho {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub char_poly: Vec<String>,
    pub init: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    pub precision: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: u64,
}

/// Machine-readable result of one invocation. Keys serialize in sorted order
/// and rationals as canonical `p/q` strings, so identical runs give identical
/// bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub command: String,
    pub inputs: InputEcho,
    pub summary: Map<String, Value>,
    pub results: Vec<Map<String, Value>>,
    pub violations: Vec<Map<String, Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

/// Rendered output plus the exit code it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub record: OutputRecord,
    /// Column order for tables and CSV.
    pub columns: Vec<String>,
    pub code: i32,
    pub notes: Vec<String>,
}

fn obj(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("object literal"),
    }
}

fn echo(rspec: &RecurrenceSpec, precision: &BigRat) -> Result<InputEcho, CliError> {
    Ok(InputEcho {
        name: rspec.name.clone(),
        char_poly: rspec.char_poly()?.coeffs().iter().map(format_rat).collect(),
        init: rspec.init()?.iter().map(format_rat).collect(),
        n_max: None,
        n: None,
        precision: format_rat(precision),
    })
}

fn require_nondegenerate_flag(f: &Poly, enabled: bool) -> Result<(), CliError> {
    if enabled {
        let verdict = nondegeneracy_check(f);
        if !verdict.is_nondegenerate() {
            return Err(CliError::precondition(format!("recurrence is degenerate: {verdict}")));
        }
    }
    Ok(())
}

pub fn cmd_analyze(rspec: &RecurrenceSpec, precision: &BigRat, require_nondegenerate: bool) -> Result<Outcome, CliError> {
    let f = rspec.char_poly()?;
    let r = f.degree().ok_or_else(|| CliError::precondition("characteristic polynomial is zero"))?;
    if r == 0 {
        return Err(Error::DegreeTooSmall { min: 1, got: 0 }.into());
    }
    if !f.is_monic() {
        return Err(Error::NotMonic.into());
    }
    let digits = decimal_digits(precision) + 2;
    let dec = yun_squarefree(&f);
    let verdict = nondegeneracy_check(&f);
    let mut summary = obj(json!({
        "order": r,
        "distinct_roots": dec.distinct_roots(),
        "multiplicities": dec.multiplicity_profile(),
        "squarefree_factors": dec.factors.iter().map(|(g, e)| json!({
            "factor": g.to_string(),
            "multiplicity": e,
        })).collect::<Vec<_>>(),
        "nondegeneracy": verdict.to_string(),
    }));
    if verdict != NondegeneracyVerdict::ZeroRoot {
        let es = exponent_structure(&f)?;
        summary.insert("n_exponent".into(), json!(es.n_exponent));
        let rs = isolate_roots(&f, precision)?;
        let boxes: Vec<Value> = rs
            .boxes
            .iter()
            .map(|b| {
                json!({
                    "center": {
                        "re": decimal(&b.center.re, digits, false),
                        "im": decimal(&b.center.im, digits, false),
                    },
                    "radius": decimal(&b.radius, digits, true),
                    "multiplicity": b.multiplicity,
                    "is_exact": b.is_exact(),
                })
            })
            .collect();
        summary.insert("root_boxes".into(), json!(boxes));
    }
    let code = if require_nondegenerate && !verdict.is_nondegenerate() { EXIT_PRECONDITION } else { EXIT_OK };
    let mut notes = Vec::new();
    if code != EXIT_OK {
        notes.push(format!("recurrence is degenerate: {verdict}"));
    }
    Ok(Outcome {
        record: OutputRecord {
            command: "analyze".into(),
            inputs: echo(rspec, precision)?,
            summary,
            results: Vec::new(),
            violations: Vec::new(),
            timing: None,
        },
        columns: Vec::new(),
        code,
        notes,
    })
}

pub fn cmd_impulse(rspec: &RecurrenceSpec, n_max: u64, precision: &BigRat, require_nondegenerate: bool) -> Result<Outcome, CliError> {
    let f = rspec.char_poly()?;
    require_nondegenerate_flag(&f, require_nondegenerate)?;
    let basis = impulse_basis(&f)?;
    let table = basis.table(n_max as usize);
    let r = basis.order();
    let results = (0..=n_max as usize)
        .map(|n| {
            let mut row = obj(json!({ "n": n }));
            for (k, seq) in table.iter().enumerate() {
                row.insert(format!("X{k}"), json!(format_rat(&seq[n])));
            }
            row
        })
        .collect();
    let mut columns = vec!["n".to_string()];
    columns.extend((0..r).map(|k| format!("X{k}")));
    let mut inputs = echo(rspec, precision)?;
    inputs.n_max = Some(n_max);
    Ok(Outcome {
        record: OutputRecord {
            command: "impulse".into(),
            inputs,
            summary: obj(json!({ "order": r })),
            results,
            violations: Vec::new(),
            timing: None,
        },
        columns,
        code: EXIT_OK,
        notes: Vec::new(),
    })
}

pub fn cmd_gvdet(rspec: &RecurrenceSpec, n_max: u64, precision: &BigRat) -> Result<Outcome, CliError> {
    let f = rspec.char_poly()?;
    let eval = GvEvaluator::new(&f)?;
    let digits = decimal_digits(precision) + 2;
    let mut results = Vec::new();
    let mut violations = Vec::new();
    for n in 0..=n_max {
        let res = eval.evaluate(n, precision)?;
        if res.agreement == Agreement::Mismatch {
            violations.push(obj(json!({
                "n": n,
                "kind": "mismatch",
                "D_n": format_rat(&res.d_exact),
                "closed_form": certified_text(&res.closed_form, digits),
            })));
        }
        results.push(obj(json!({
            "n": n,
            "D_n": format_rat(&res.d_exact),
            "closed_form": certified_json(&res.closed_form, digits),
            "agreement": res.agreement.as_str(),
        })));
    }
    let es = eval.exponent_structure();
    let code = if violations.is_empty() { EXIT_OK } else { EXIT_FINDING };
    let mut inputs = echo(rspec, precision)?;
    inputs.n_max = Some(n_max);
    Ok(Outcome {
        record: OutputRecord {
            command: "gvdet".into(),
            inputs,
            summary: obj(json!({
                "order": eval.order(),
                "n_exponent": es.n_exponent,
                "exact_path": eval.is_rational(),
                "mismatches": violations.len(),
            })),
            results,
            violations,
            timing: None,
        },
        columns: ["n", "D_n", "closed_form", "agreement"].map(String::from).to_vec(),
        code,
        notes: Vec::new(),
    })
}

fn def_violation_json(v: &DefViolation) -> Map<String, Value> {
    match v {
        DefViolation::InitialTerm { index, expected, got } => obj(json!({
            "kind": "initial_term",
            "index": index,
            "expected": format_rat(expected),
            "got": format_rat(got),
        })),
        DefViolation::Divides { n, m } => obj(json!({
            "kind": "prefix_divisibility",
            "n": n,
            "m": m,
        })),
    }
}

pub fn cmd_verify(rspec: &RecurrenceSpec, n_max: u64, precision: &BigRat) -> Result<Outcome, CliError> {
    let rec = rspec.recurrence()?;
    let report = verify_theorem_with(&rec, n_max, precision)?;
    let results = report
        .theorem_results
        .iter()
        .map(|row| {
            obj(json!({
                "n": row.n,
                "S_n": format_rat(&row.s_n),
                "D_n": format_rat(&row.d),
                "divides": row.divides,
                "agreement": row.agreement.as_str(),
            }))
        })
        .collect();
    let mut violations: Vec<_> = report.def_violations.iter().map(def_violation_json).collect();
    violations.extend(report.theorem_violations.iter().map(|n| obj(json!({ "kind": "theorem", "n": n }))));
    let mut notes = Vec::new();
    if !report.is_divisibility_prefix {
        notes.push(format!(
            "not a divisibility sequence on 0..={n_max}: {} definition violation(s)",
            report.def_violations.len()
        ));
    }
    if report.is_finding() {
        notes.push(format!("S_n does not divide D(n) for n in {:?}", report.theorem_violations));
    }
    let mut inputs = echo(rspec, precision)?;
    inputs.n_max = Some(n_max);
    Ok(Outcome {
        record: OutputRecord {
            command: "verify".into(),
            inputs,
            summary: obj(json!({
                "checked_up_to": report.checked_up_to,
                "is_divisibility_prefix": report.is_divisibility_prefix,
                "theorem_holds": report.theorem_violations.is_empty(),
                "finding": report.is_finding(),
            })),
            results,
            violations,
            timing: None,
        },
        columns: ["n", "S_n", "D_n", "divides"].map(String::from).to_vec(),
        code: if report.is_finding() { EXIT_FINDING } else { EXIT_OK },
        notes,
    })
}

pub fn cmd_certify(rspec: &RecurrenceSpec, n: u64, precision: &BigRat) -> Result<Outcome, CliError> {
    let rec = rspec.recurrence()?;
    let cert = cramer_certificate(&rec, n)?;
    let mut inputs = echo(rspec, precision)?;
    inputs.n = Some(n);
    Ok(Outcome {
        record: OutputRecord {
            command: "certify".into(),
            inputs,
            summary: obj(json!({
                "n": cert.n,
                "S_n": format_rat(&cert.s_n),
                "column": cert.column.iter().map(format_rat).collect::<Vec<_>>(),
                "numerator_det": format_rat(&cert.numerator_det),
                "D_n": format_rat(&cert.d_value),
                "divides": true,
                "column_divisibility": cert.column_divisibility,
            })),
            results: Vec::new(),
            violations: Vec::new(),
            timing: None,
        },
        columns: Vec::new(),
        code: EXIT_OK,
        notes: Vec::new(),
    })
}

/// Decimal places shown for interval endpoints in tables.
const TABLE_DIGITS: usize = 6;

fn coarse(v: &Value, up: bool) -> String {
    let q = v.as_str().and_then(|s| parse_precision_signed(s)).expect("decimal endpoint");
    decimal(&q, TABLE_DIGITS, up)
}

fn parse_precision_signed(s: &str) -> Option<BigRat> {
    let (neg, body) = s.strip_prefix('-').map_or((false, s), |b| (true, b));
    if body == "0" {
        return Some(BigRat::zero());
    }
    let q = parse_precision(body).ok()?;
    Some(if neg { -q } else { q })
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Object(m) if m.contains_key("exact") => cell(&m["exact"]),
        Value::Object(m) if m.contains_key("interval") => {
            let iv = &m["interval"];
            let re = format!("[{}, {}]", coarse(&iv["re"][0], false), coarse(&iv["re"][1], true));
            let im_lo = parse_precision_signed(iv["im"][0].as_str().unwrap_or("0")).unwrap_or_default();
            let im_hi = parse_precision_signed(iv["im"][1].as_str().unwrap_or("0")).unwrap_or_default();
            if !im_lo.is_positive() && !im_hi.is_negative() {
                re
            } else {
                format!("{re} + i[{}, {}]", coarse(&iv["im"][0], false), coarse(&iv["im"][1], true))
            }
        }
        other => other.to_string(),
    }
}

fn render_table(out: &Outcome) -> String {
    let rec = &out.record;
    let mut s = String::new();
    if let Some(name) = &rec.inputs.name {
        s.push_str(&format!("{name}\n"));
    }
    s.push_str(&format!("char_poly: {}\n", Poly::new(
        rec.inputs.char_poly.iter().map(|c| parse_rat(c).expect("canonical")).collect()
    )));
    if !rec.inputs.init.is_empty() {
        s.push_str(&format!("init: {}\n", rec.inputs.init.join(", ")));
    }
    for (k, v) in &rec.summary {
        let text = match v {
            Value::Array(items) if items.iter().all(|i| !i.is_object()) => {
                items.iter().map(cell).collect::<Vec<_>>().join(", ")
            }
            Value::Array(items) => {
                let lines: Vec<String> = items.iter().map(|i| format!("  {}", compact(i))).collect();
                format!("\n{}", lines.join("\n"))
            }
            other => cell(other),
        };
        s.push_str(&format!("{k}: {text}\n"));
    }
    if !out.columns.is_empty() {
        let rows: Vec<Vec<String>> = rec
            .results
            .iter()
            .map(|r| out.columns.iter().map(|c| r.get(c).map(cell).unwrap_or_default()).collect())
            .collect();
        let widths: Vec<usize> = out
            .columns
            .iter()
            .enumerate()
            .map(|(j, c)| rows.iter().map(|r| r[j].len()).chain([c.len()]).max().unwrap_or(0))
            .collect();
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        s.push_str(&line(&out.columns));
        s.push('\n');
        for r in &rows {
            s.push_str(&line(r));
            s.push('\n');
        }
    }
    for v in &rec.violations {
        s.push_str(&format!("violation: {}\n", compact(&Value::Object(v.clone()))));
    }
    if let Some(t) = &rec.timing {
        s.push_str(&format!("elapsed: {} ms\n", t.elapsed_ms));
    }
    s
}

fn compact(v: &Value) -> String {
    match v {
        Value::Object(m) if !m.contains_key("exact") && !m.contains_key("interval") => {
            let inner = m.iter().map(|(k, v)| format!("{k}={}", compact_nested(v))).collect::<Vec<_>>();
            inner.join(" ")
        }
        Value::Array(items) => format!("[{}]", items.iter().map(compact).collect::<Vec<_>>().join(", ")),
        other => cell(other),
    }
}

fn compact_nested(v: &Value) -> String {
    match v {
        Value::Object(_) if v.get("exact").is_none() && v.get("interval").is_none() => format!("{{{}}}", compact(v)),
        other => compact(other),
    }
}

fn render_csv(out: &Outcome) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError { code: 1, message: e.to_string() };
    if out.columns.is_empty() {
        w.write_record(["key", "value"]).map_err(io)?;
        for (k, v) in &out.record.summary {
            w.write_record([k.as_str(), &compact(v)]).map_err(io)?;
        }
    } else {
        w.write_record(&out.columns).map_err(io)?;
        for r in &out.record.results {
            w.write_record(out.columns.iter().map(|c| r.get(c).map(cell).unwrap_or_default()))
                .map_err(io)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError { code: 1, message: e.to_string() })?;
    Ok(String::from_utf8(bytes).expect("utf-8 csv"))
}

pub fn render(out: &Outcome, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&out.record).expect("serializable record");
            s.push('\n');
            Ok(s)
        }
        Format::Csv => render_csv(out),
        Format::Table => Ok(render_table(out)),
    }
}

/// Runs one command against already-read input text.
pub fn execute(cli: &Cli, input: &str) -> Result<Outcome, CliError> {
    let precision = parse_precision(&cli.precision)?;
    let rspec = RecurrenceSpec::from_json(input)?;
    let start = Instant::now();
    let mut out = match cli.command {
        Command::Analyze => cmd_analyze(&rspec, &precision, cli.require_nondegenerate)?,
        Command::Impulse { n_max } => cmd_impulse(&rspec, n_max, &precision, cli.require_nondegenerate)?,
        Command::Gvdet { n_max } => cmd_gvdet(&rspec, n_max, &precision)?,
        Command::Verify { n_max } => {
            require_nondegenerate_flag(&rspec.char_poly()?, cli.require_nondegenerate)?;
            cmd_verify(&rspec, n_max, &precision)?
        }
        Command::Certify { n } => {
            require_nondegenerate_flag(&rspec.char_poly()?, cli.require_nondegenerate)?;
            cmd_certify(&rspec, n, &precision)?
        }
    };
    if cli.timing {
        out.record.timing = Some(Timing { elapsed_ms: start.elapsed().as_millis() as u64 });
    }
    Ok(out)
}

/// Full entry point; returns the process exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    if let Some(bits) = cli.max_precision_bits {
        set_max_working_bits(bits);
    }
    let input = match &cli.input {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display()))),
        None => {
            let mut s = String::new();
            stdin.read_to_string(&mut s).map(|_| s).map_err(|e| CliError::parse(format!("cannot read stdin: {e}")))
        }
    };
    let result = input.and_then(|text| execute(&cli, &text)).and_then(|out| {
        let text = render(&out, cli.format)?;
        Ok((out, text))
    });
    match result {
        Ok((out, text)) => {
            let _ = stdout.write_all(text.as_bytes());
            for note in &out.notes {
                let _ = writeln!(stderr, "divseq: {note}");
            }
            out.code
        }
        Err(e) => {
            let _ = writeln!(stderr, "divseq: {}", e.message);
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIB: &str = r#"{"char_poly": ["-1", "-1", "1"], "init": ["0", "1"], "name": "Fibonacci"}"#;

    fn run_str(args: &[&str], input: &str) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut argv = vec!["divseq"];
        argv.extend_from_slice(args);
        let code = run(argv, &mut input.as_bytes(), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn precision_parsing() {
        assert_eq!(parse_precision("1e-30").unwrap(), BigRat::new(1.into(), BigInt::from(10).pow(30)));
        assert_eq!(parse_precision("2.5E-2").unwrap(), BigRat::new(1.into(), 40.into()));
        assert_eq!(parse_precision("1/7").unwrap(), BigRat::new(1.into(), 7.into()));
        assert_eq!(parse_precision("3").unwrap(), BigRat::from_integer(3.into()));
        for bad in ["0", "-1e-3", "abc", "1e", ".", "1/0"] {
            assert!(parse_precision(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn decimal_rendering() {
        let q = BigRat::new((-7).into(), 3.into());
        assert_eq!(decimal(&q, 3, false), "-2.334");
        assert_eq!(decimal(&q, 3, true), "-2.333");
        assert_eq!(decimal(&BigRat::new(1.into(), 2.into()), 4, true), "0.5");
        assert_eq!(decimal(&BigRat::from_integer(BigInt::from(10).pow(40)), 2, false), format!("1{}", "0".repeat(40)));
        assert_eq!(decimal(&BigRat::new(1.into(), 1000.into()), 2, false), "0");
        assert_eq!(decimal(&BigRat::new((-1).into(), 1000.into()), 2, false), "-0.01");
        assert_eq!(decimal_digits(&BigRat::new(1.into(), BigInt::from(10).pow(30))), 30);
    }

    #[test]
    fn input_parse_errors_have_position() {
        let e = RecurrenceSpec::from_json("{\"char_poly\": [1,").unwrap_err();
        assert_eq!(e.code, EXIT_PARSE);
        assert!(e.message.contains("line 1, column"), "{}", e.message);
        let s = RecurrenceSpec::from_json(r#"{"char_poly": ["1", "x"]}"#).unwrap();
        assert_eq!(s.char_poly().unwrap_err().message, "char_poly[1]: invalid rational \"x\"");
    }

    #[test]
    fn gvdet_fibonacci_column() {
        let (code, out, _) = run_str(&["gvdet", "--n-max", "10", "--format", "json"], FIB);
        assert_eq!(code, 0);
        let rec: OutputRecord = serde_json::from_str(&out).unwrap();
        let d: Vec<&str> = rec.results.iter().map(|r| r["D_n"].as_str().unwrap()).collect();
        assert_eq!(d, ["0", "1", "1", "2", "3", "5", "8", "13", "21", "34", "55"]);
        assert!(rec.results.iter().all(|r| r["agreement"] != "Mismatch"));
    }

    #[test]
    fn gvdet_rational_paths() {
        let (_, out, _) = run_str(&["gvdet", "--n-max", "4", "--format", "csv"], r#"{"char_poly": ["4", "-4", "1"]}"#);
        let d: Vec<&str> = out.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
        assert_eq!(d, ["0", "1", "4", "12", "32"]);
        let (_, out, _) = run_str(&["gvdet", "--n-max", "4", "--format", "csv"], r#"{"char_poly": ["2", "-3", "1"]}"#);
        let d: Vec<&str> = out.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
        assert_eq!(d, ["0", "1", "3", "7", "15"]);
    }

    #[test]
    fn analyze_outputs() {
        let (code, out, _) = run_str(&["analyze", "--format", "json"], FIB);
        assert_eq!(code, 0);
        let rec: OutputRecord = serde_json::from_str(&out).unwrap();
        assert_eq!(rec.summary["order"], 2);
        assert_eq!(rec.summary["distinct_roots"], 2);
        assert_eq!(rec.summary["multiplicities"], json!([1, 1]));
        assert_eq!(rec.summary["n_exponent"], 0);
        assert_eq!(rec.summary["nondegeneracy"], "NonDegenerate");
        let x2m1 = r#"{"char_poly": ["-1", "0", "1"]}"#;
        let (code, out, _) = run_str(&["analyze", "--format", "json"], x2m1);
        assert_eq!(code, 0);
        assert!(out.contains("UnityRatio(2)"));
        let (code, _, err) = run_str(&["analyze", "--require-nondegenerate"], x2m1);
        assert_eq!(code, EXIT_PRECONDITION);
        assert!(err.contains("UnityRatio(2)"));
        let (code, _, err) = run_str(&["analyze"], "{\"char_poly\": [");
        assert_eq!(code, EXIT_PARSE);
        assert!(err.contains("line 1, column"));
    }

    #[test]
    fn verify_and_certify() {
        let (code, out, _) = run_str(&["verify", "--n-max", "50", "--format", "json"], FIB);
        assert_eq!(code, 0);
        let rec: OutputRecord = serde_json::from_str(&out).unwrap();
        assert_eq!(rec.summary["theorem_holds"], true);
        assert!(rec.violations.is_empty());

        let lucas = r#"{"char_poly": ["-1", "-1", "1"], "init": ["2", "1"]}"#;
        let (code, out, err) = run_str(&["verify", "--n-max", "10", "--format", "json"], lucas);
        assert_eq!(code, 0);
        let rec: OutputRecord = serde_json::from_str(&out).unwrap();
        assert_eq!(rec.summary["is_divisibility_prefix"], false);
        assert_eq!(rec.summary["finding"], false);
        assert_eq!(rec.violations[0]["kind"], "initial_term");
        assert_eq!(rec.violations[0]["got"], "2");
        assert!(err.contains("not a divisibility sequence"));

        let (code, out, _) = run_str(&["certify", "--n", "7", "--format", "json"], FIB);
        assert_eq!(code, 0);
        let rec: OutputRecord = serde_json::from_str(&out).unwrap();
        assert_eq!(rec.summary["numerator_det"], "13");
        assert_eq!(rec.summary["divides"], true);
    }

    #[test]
    fn error_exit_codes() {
        let (code, _, _) = run_str(&["gvdet"], r#"{"char_poly": ["-1", "0", "1"]}"#);
        assert_eq!(code, EXIT_PRECONDITION);
        let (code, _, _) = run_str(&["gvdet"], r#"{"char_poly": ["0", "-1", "1"]}"#);
        assert_eq!(code, EXIT_PRECONDITION);
        let (code, _, _) = run_str(&["certify", "--n", "3"], r#"{"char_poly": ["-1", "-1", "1"], "init": ["2", "1"]}"#);
        assert_eq!(code, EXIT_FINDING);
        let (code, _, _) = run_str(&["gvdet", "--precision", "nope"], FIB);
        assert_eq!(code, EXIT_PARSE);
        let (code, _, _) = run_str(&["frobnicate"], FIB);
        assert_eq!(code, EXIT_PARSE);
        let (code, _, _) = run_str(&["verify"], r#"{"char_poly": ["-1", "-1", "1"], "init": ["0"]}"#);
        assert_eq!(code, EXIT_PRECONDITION);
    }

    #[test]
    fn impulse_table_and_csv() {
        let (code, out, _) = run_str(&["impulse", "--n-max", "4", "--format", "csv"], FIB);
        assert_eq!(code, 0);
        assert_eq!(out, "n,X0,X1\n0,1,0\n1,0,1\n2,1,1\n3,1,2\n4,2,3\n");
        let (_, table, _) = run_str(&["impulse", "--n-max", "2"], FIB);
        assert!(table.starts_with("Fibonacci\nchar_poly: x^2 - x - 1\n"), "{table}");
    }

    #[test]
    fn output_record_round_trip() {
        let (_, out, _) = run_str(&["gvdet", "--n-max", "6", "--format", "json", "--precision", "1e-12"], FIB);
        let rec: OutputRecord = serde_json::from_str(&out).unwrap();
        let again = serde_json::to_string_pretty(&rec).unwrap() + "\n";
        assert_eq!(again, out);
        assert_eq!(serde_json::from_str::<OutputRecord>(&again).unwrap(), rec);
    }

    #[test]
    fn timing_only_on_request() {
        let (_, out, _) = run_str(&["impulse", "--format", "json"], FIB);
        assert!(!out.contains("timing"));
        let (_, out, _) = run_str(&["impulse", "--format", "json", "--timing"], FIB);
        assert!(out.contains("elapsed_ms"));
    }
}
