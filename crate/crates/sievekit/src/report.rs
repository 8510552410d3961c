//! Typed run reports and their renderings.
//!
//! Every command of the toolkit produces one [`Report`]: a small, fully
//! typed envelope holding the inputs that were run, a ledger of re-derived
//! constants checked against their published reference values, the result
//! quantities, and any counterexamples. The same envelope renders to JSON
//! (the schema'd machine artifact), CSV (the ledger and results flattened
//! to rows), and plain text — all three carry identical logical content.
//!
//! Numbers serialize losslessly: `f64` values print in shortest round-trip
//! form, so parsing an emitted JSON report reproduces every numeric field
//! bit for bit. Quantities wider than 64 bits (`N`, `X`) are carried as
//! decimal strings. The process exit status is a pure function of report
//! content ([`exit_code`]): the wall-clock field is the only thing two runs
//! of the same command may disagree on.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::linear_sieve::{BoundBreakdown, LedgerEntry};
use crate::verifier::{Counterexample, ScanReport};
use crate::{Error, Result};

/// Version stamp of the report schema.
pub const SCHEMA_VERSION: u32 = 1;

/// Results key gating the exit status for bound-producing commands.
pub const BOUND_POSITIVE_KEY: &str = "bound_positive";

/// Witness entries retained in an emitted report; the full witness list
/// stays in memory for callers, the envelope records the count and a
/// truncation marker.
pub const REPORT_WITNESS_CAP: usize = 10_000;

/// Output rendering of a [`Report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

impl OutputFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
            OutputFormat::Text => "text",
        }
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "text" => Ok(OutputFormat::Text),
            other => Err(Error::Usage(format!(
                "unknown output format {other:?} (expected json, csv, or text)"
            ))),
        }
    }
}

/// One re-derived constant compared against its published reference value.
///
/// The reference field serializes as `paper_value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportLedgerEntry {
    pub name: String,
    pub computed: f64,
    #[serde(rename = "paper_value")]
    pub reference: f64,
    /// `"<="` or `">="`: the direction `computed` must satisfy.
    pub direction: String,
    pub ok: bool,
}

impl From<&LedgerEntry> for ReportLedgerEntry {
    fn from(e: &LedgerEntry) -> Self {
        ReportLedgerEntry {
            name: e.name.clone(),
            computed: e.computed,
            reference: e.reference,
            direction: e.direction.as_str().to_string(),
            ok: e.ok,
        }
    }
}

/// One failed check, with scan-specific coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCounterexample {
    pub location: Vec<u64>,
    pub detail: String,
}

impl From<&Counterexample> for ReportCounterexample {
    fn from(c: &Counterexample) -> Self {
        ReportCounterexample {
            location: c.location.clone(),
            detail: c.detail.clone(),
        }
    }
}

/// The report envelope all commands emit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub inputs: BTreeMap<String, Value>,
    pub constants_ledger: Vec<ReportLedgerEntry>,
    pub results: BTreeMap<String, Value>,
    pub counterexamples: Vec<ReportCounterexample>,
    pub runtime_seconds: f64,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            inputs: BTreeMap::new(),
            constants_ledger: Vec::new(),
            results: BTreeMap::new(),
            counterexamples: Vec::new(),
            runtime_seconds: 0.0,
        }
    }

    pub fn set_input(&mut self, key: &str, value: Value) {
        self.inputs.insert(key.to_string(), value);
    }

    pub fn set_result(&mut self, key: &str, value: Value) {
        self.results.insert(key.to_string(), value);
    }

    /// Decimal-string representation for quantities wider than 64 bits.
    pub fn wide(x: u128) -> Value {
        Value::String(x.to_string())
    }

    pub fn set_ledger(&mut self, entries: &[LedgerEntry]) {
        self.constants_ledger = entries.iter().map(ReportLedgerEntry::from).collect();
    }

    /// Appends counterexamples, optionally tagging each detail with the
    /// producing scan.
    pub fn add_counterexamples(&mut self, scan: Option<&str>, items: &[Counterexample]) {
        for c in items {
            let mut rc = ReportCounterexample::from(c);
            if let Some(tag) = scan {
                rc.detail = format!("{tag}: {}", rc.detail);
            }
            self.counterexamples.push(rc);
        }
    }

    /// Folds the shared scan fields (everything except counterexamples,
    /// which land in the envelope) into one results value.
    pub fn scan_value(scan: &ScanReport) -> Value {
        serde_json::json!({
            "scan_id": scan.scan_id,
            "range": [scan.range.0, scan.range.1],
            "max_value": scan.max_value,
            "argmax": scan.argmax,
            "checked_count": scan.checked_count,
            "near_boundary": scan.near_boundary.iter().map(|n| {
                serde_json::json!({ "location": n.location, "margin": n.margin })
            }).collect::<Vec<_>>(),
        })
    }

    /// Witness list capped for emission: pairs `[key, value]`, plus count
    /// and truncation marker entries the caller stores alongside.
    pub fn witness_array(pairs: impl Iterator<Item = (u64, u64)>) -> (Value, usize, bool) {
        let all: Vec<(u64, u64)> = pairs.collect();
        let truncated = all.len() > REPORT_WITNESS_CAP;
        let shown: Vec<Value> = all
            .iter()
            .take(REPORT_WITNESS_CAP)
            .map(|&(a, b)| serde_json::json!([a, b]))
            .collect();
        (Value::Array(shown), all.len(), truncated)
    }

    /// Standard results block for the theorem pipeline.
    pub fn fill_breakdown(&mut self, b: &BoundBreakdown) {
        self.set_ledger(&b.constant_ledger);
        self.set_result("x", Report::wide(b.x));
        self.set_result("z", b.z.into());
        self.set_result("y", b.y.into());
        self.set_result("d", b.d.into());
        self.set_result("s_lower", b.s_lower.into());
        self.set_result("m1", b.m1.into());
        self.set_result("m2", b.m2.into());
        self.set_result("e_remainder", b.e_remainder.into());
        self.set_result("sum_upper", b.sum_upper.into());
        self.set_result("kuhn_remainder", b.kuhn_remainder.into());
        self.set_result("r4_lower", b.r4_lower.into());
        self.set_result("remainder_kind", b.remainder_kind.as_str().into());
        self.set_result(
            "notes",
            Value::Array(b.notes.iter().map(|n| Value::String(n.clone())).collect()),
        );
        self.set_result(BOUND_POSITIVE_KEY, (b.r4_lower > 0.0).into());
    }
}

/// Exit status as a pure function of report content: `0` when every checked
/// inequality held (no counterexamples, every ledger row ok, and — for
/// bound-producing commands — a positive bound), `1` otherwise. Usage
/// errors exit `2` before a report exists.
pub fn exit_code(report: &Report) -> i32 {
    let bound_ok = match report.results.get(BOUND_POSITIVE_KEY) {
        Some(Value::Bool(b)) => *b,
        _ => true,
    };
    let ledger_ok = report.constants_ledger.iter().all(|e| e.ok);
    if report.counterexamples.is_empty() && ledger_ok && bound_ok {
        0
    } else {
        1
    }
}

/// Renders a report in the requested format.
pub fn emit(report: &Report, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            Ok(s)
        }
        OutputFormat::Csv => Ok(emit_csv(report)),
        OutputFormat::Text => Ok(emit_text(report)),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Scalar rendering shared by the CSV and text forms; compound values fall
/// back to compact JSON. Numbers print exactly as in the JSON form.
fn value_str(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Null => String::new(),
        other => serde_json::to_string(other).expect("JSON value renders"),
    }
}

fn emit_csv(report: &Report) -> String {
    let mut rows: Vec<[String; 4]> = Vec::new();
    let mut push = |a: &str, b: &str, c: &str, d: String| {
        rows.push([a.to_string(), b.to_string(), c.to_string(), d]);
    };
    push("meta", "schema_version", "", report.schema_version.to_string());
    push("meta", "command", "", report.command.clone());
    for (k, v) in &report.inputs {
        push("input", k, "", value_str(v));
    }
    for e in &report.constants_ledger {
        push("ledger", &e.name, "computed", value_str(&e.computed.into()));
        push("ledger", &e.name, "paper_value", value_str(&e.reference.into()));
        push("ledger", &e.name, "direction", e.direction.clone());
        push("ledger", &e.name, "ok", e.ok.to_string());
    }
    for (k, v) in &report.results {
        push("result", k, "", value_str(v));
    }
    for (i, c) in report.counterexamples.iter().enumerate() {
        let loc = c
            .location
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(" ");
        push("counterexample", &i.to_string(), "location", loc);
        push("counterexample", &i.to_string(), "detail", c.detail.clone());
    }
    push(
        "meta",
        "runtime_seconds",
        "",
        value_str(&report.runtime_seconds.into()),
    );

    let mut out = String::from("section,key,field,value\n");
    for row in rows {
        let line: Vec<String> = row.iter().map(|f| csv_field(f)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

fn emit_text(report: &Report) -> String {
    let mut out = format!(
        "sievekit report (schema {})\ncommand: {}\n",
        report.schema_version, report.command
    );
    if !report.inputs.is_empty() {
        out.push_str("inputs:\n");
        for (k, v) in &report.inputs {
            out.push_str(&format!("  {k} = {}\n", value_str(v)));
        }
    }
    if !report.constants_ledger.is_empty() {
        out.push_str("constants ledger:\n");
        for e in &report.constants_ledger {
            out.push_str(&format!(
                "  {}: computed {} {} {}  [{}]\n",
                e.name,
                value_str(&e.computed.into()),
                e.direction,
                value_str(&e.reference.into()),
                if e.ok { "ok" } else { "VIOLATED" }
            ));
        }
    }
    if !report.results.is_empty() {
        out.push_str("results:\n");
        for (k, v) in &report.results {
            out.push_str(&format!("  {k} = {}\n", value_str(v)));
        }
    }
    if report.counterexamples.is_empty() {
        out.push_str("counterexamples: none\n");
    } else {
        out.push_str(&format!(
            "counterexamples ({}):\n",
            report.counterexamples.len()
        ));
        for c in &report.counterexamples {
            let loc = c
                .location
                .iter()
                .map(u64::to_string)
                .collect::<Vec<_>>()
                .join(", ");
            out.push_str(&format!("  at ({loc}): {}\n", c.detail));
        }
    }
    out.push_str(&format!(
        "runtime: {} s\n",
        value_str(&report.runtime_seconds.into())
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear_sieve::Direction;

    fn sample() -> Report {
        let mut r = Report::new("theorem");
        r.set_input("N", Report::wide(19_800_000_000_000_000_000_000_000_001));
        r.set_input("s", 3.3.into());
        r.set_input("alpha", 0.07.into());
        r.set_ledger(&[
            LedgerEntry::new("leading_factor", 4.525533494069299, 4.526, Direction::AtMost),
            LedgerEntry::new("sieve_margin", 0.8395278962680386, 0.839, Direction::AtLeast),
        ]);
        r.set_result("r4_lower", 2.387451979278744e11.into());
        r.set_result("tricky", (0.1f64 + 0.2f64).into());
        r.set_result(BOUND_POSITIVE_KEY, true.into());
        r.runtime_seconds = 0.734;
        r
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let report = sample();
        let rendered = emit(&report, OutputFormat::Json).unwrap();
        let back: Report = serde_json::from_str(&rendered).unwrap();
        assert_eq!(back, report);
        // Equality on Value is numeric-type aware, but double-check the
        // delicate float survived to the bit.
        assert_eq!(
            back.results["tricky"].as_f64().unwrap().to_bits(),
            (0.1f64 + 0.2f64).to_bits()
        );
    }

    #[test]
    fn reference_field_serializes_as_paper_value() {
        let rendered = emit(&sample(), OutputFormat::Json).unwrap();
        assert!(rendered.contains("\"paper_value\": 4.526"), "{rendered}");
        assert!(!rendered.contains("reference"), "{rendered}");
    }

    #[test]
    fn all_formats_carry_the_same_content() {
        let mut report = sample();
        report.add_counterexamples(
            Some("demo"),
            &[Counterexample {
                location: vec![17, 4],
                detail: "value, with comma and \"quotes\"".into(),
            }],
        );
        let json = emit(&report, OutputFormat::Json).unwrap();
        let csv = emit(&report, OutputFormat::Csv).unwrap();
        let text = emit(&report, OutputFormat::Text).unwrap();
        for needle in [
            "theorem",
            "leading_factor",
            "sieve_margin",
            "4.525533494069299",
            "r4_lower",
            "238745197927.8744",
            "demo: value, with comma",
        ] {
            assert!(json.contains(needle), "JSON missing {needle}: {json}");
            assert!(csv.contains(needle), "CSV missing {needle}: {csv}");
            assert!(text.contains(needle), "text missing {needle}: {text}");
        }
        // CSV escapes the embedded comma and quotes.
        assert!(
            csv.contains("\"demo: value, with comma and \"\"quotes\"\"\""),
            "{csv}"
        );
        // The numeric CSV cells match the JSON rendering exactly.
        assert!(csv.contains("ledger,leading_factor,computed,4.525533494069299"));
        assert!(csv.contains("ledger,leading_factor,paper_value,4.526"));
    }

    #[test]
    fn exit_status_is_a_pure_function_of_content() {
        let mut clean = sample();
        assert_eq!(exit_code(&clean), 0);
        // Runtime does not affect the status.
        clean.runtime_seconds = 1e9;
        assert_eq!(exit_code(&clean), 0);

        let mut with_cx = sample();
        with_cx.add_counterexamples(
            None,
            &[Counterexample {
                location: vec![1],
                detail: "failed".into(),
            }],
        );
        assert_eq!(exit_code(&with_cx), 1);

        let mut bad_ledger = sample();
        bad_ledger.set_ledger(&[LedgerEntry::new(
            "leading_factor",
            4.6,
            4.526,
            Direction::AtMost,
        )]);
        assert_eq!(exit_code(&bad_ledger), 1);

        let mut nonpositive = sample();
        nonpositive.set_result(BOUND_POSITIVE_KEY, false.into());
        assert_eq!(exit_code(&nonpositive), 1);

        // Commands without a bound key are judged on the other two criteria.
        let mut scan_only = sample();
        scan_only.results.remove(BOUND_POSITIVE_KEY);
        assert_eq!(exit_code(&scan_only), 0);
    }

    #[test]
    fn witness_arrays_are_capped_for_emission() {
        let (value, count, truncated) =
            Report::witness_array((0..20_000u64).map(|n| (n, n * n)));
        assert_eq!(count, 20_000);
        assert!(truncated);
        assert_eq!(value.as_array().unwrap().len(), REPORT_WITNESS_CAP);

        let (value, count, truncated) = Report::witness_array([(1u64, 2u64)].into_iter());
        assert_eq!(count, 1);
        assert!(!truncated);
        assert_eq!(value, serde_json::json!([[1, 2]]));
    }
}
