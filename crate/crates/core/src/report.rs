//! Plain-table, CSV and JSON rendering of command results.
//!
//! Every report is a list of key/value facts followed by named tables.
//! Rendering depends only on the report contents, so equal inputs give
//! byte-identical output.

use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::{json, Map, Value};

use crate::lepage::{LepageSuite, Statistic};
use crate::permutation::PermutationNull;
use crate::simulation::{NullQuantileCheck, SimResult, VarCValidation};
use crate::{Error, Result, TwoSample};

pub const DEFAULT_PRECISION: usize = 4;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ReportFormat {
    #[default]
    Table,
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "table" | "text" => Ok(ReportFormat::Table),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidInput(format!(
                "unknown format `{other}`, expected table, csv or json"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Text(String),
    Int(u64),
    Num(f64),
    /// A probability; values below the display resolution print as `<1e-k`.
    PValue(f64),
    Bool(bool),
    Empty,
}

impl Cell {
    fn render(&self, precision: usize) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Num(v) => fmt_num(*v, precision),
            Cell::PValue(p) => {
                if p.is_finite() && *p > 0.0 && *p < 0.5 * 10f64.powi(-(precision as i32)) {
                    format!("<1e-{precision}")
                } else {
                    fmt_num(*p, precision)
                }
            }
            Cell::Bool(b) => if *b { "yes" } else { "no" }.to_string(),
            Cell::Empty => "-".to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Text(s) => json!(s),
            Cell::Int(i) => json!(i),
            Cell::Num(v) | Cell::PValue(v) => {
                if v.is_finite() {
                    json!(v)
                } else {
                    json!(fmt_num(*v, 0))
                }
            }
            Cell::Bool(b) => json!(b),
            Cell::Empty => Value::Null,
        }
    }
}

fn fmt_num(v: f64, precision: usize) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        let s = format!("{v:.precision$}");
        // Avoid "-0.0000".
        if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
            s.trim_start_matches('-').to_string()
        } else {
            s
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, headers: &[&str]) -> Self {
        Self {
            name: name.into(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub title: String,
    pub facts: Vec<(String, Cell)>,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new(title: &str) -> Self {
        Self {
            title: title.into(),
            ..Self::default()
        }
    }

    pub fn fact(&mut self, key: &str, value: impl Into<Cell>) -> &mut Self {
        self.facts.push((key.into(), value.into()));
        self
    }

    pub fn render(&self, format: ReportFormat, precision: usize) -> String {
        match format {
            ReportFormat::Table => self.render_table(precision),
            ReportFormat::Csv => self.render_csv(precision),
            ReportFormat::Json => self.render_json(),
        }
    }

    fn render_table(&self, precision: usize) -> String {
        let mut out = String::new();
        writeln!(out, "{}", self.title).unwrap();
        let key_width = self.facts.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &self.facts {
            writeln!(out, "  {k:<key_width$}  {}", v.render(precision)).unwrap();
        }
        for table in &self.tables {
            let cells: Vec<Vec<String>> = table
                .rows
                .iter()
                .map(|r| r.iter().map(|c| c.render(precision)).collect())
                .collect();
            let widths: Vec<usize> = table
                .headers
                .iter()
                .enumerate()
                .map(|(i, h)| cells.iter().map(|r| r[i].len()).chain([h.len()]).max().unwrap())
                .collect();
            writeln!(out).unwrap();
            writeln!(out, "{}", table.name).unwrap();
            let line = |items: &[String]| {
                let padded: Vec<String> = items
                    .iter()
                    .zip(&widths)
                    .enumerate()
                    .map(|(i, (s, w))| if i == 0 { format!("{s:<w$}") } else { format!("{s:>w$}") })
                    .collect();
                format!("  {}", padded.join("  ")).trim_end().to_string()
            };
            writeln!(out, "{}", line(&table.headers)).unwrap();
            let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            writeln!(out, "{}", line(&rule)).unwrap();
            for row in &cells {
                writeln!(out, "{}", line(row)).unwrap();
            }
        }
        out
    }

    fn render_csv(&self, precision: usize) -> String {
        let mut out = String::new();
        writeln!(out, "# {}", self.title).unwrap();
        for (k, v) in &self.facts {
            writeln!(out, "# {k}: {}", v.render(precision)).unwrap();
        }
        for table in &self.tables {
            writeln!(out, "# {}", table.name).unwrap();
            writeln!(out, "{}", table.headers.iter().map(|h| csv_field(h)).collect::<Vec<_>>().join(",")).unwrap();
            for row in &table.rows {
                let fields: Vec<String> = row.iter().map(|c| csv_field(&c.render(precision))).collect();
                writeln!(out, "{}", fields.join(",")).unwrap();
            }
        }
        out
    }

    fn render_json(&self) -> String {
        let facts: Map<String, Value> = self.facts.iter().map(|(k, v)| (k.clone(), v.json())).collect();
        let tables: Map<String, Value> = self
            .tables
            .iter()
            .map(|t| {
                let rows: Vec<Value> = t
                    .rows
                    .iter()
                    .map(|r| {
                        Value::Object(t.headers.iter().cloned().zip(r.iter().map(Cell::json)).collect())
                    })
                    .collect();
                (t.name.clone(), Value::Array(rows))
            })
            .collect();
        let doc = json!({ "report": self.title, "facts": facts, "tables": tables });
        let mut s = serde_json::to_string_pretty(&doc).expect("report is serializable");
        s.push('\n');
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Permutation,
    Asymptotic,
    Both,
}

impl Method {
    pub fn permutation(self) -> bool {
        matches!(self, Method::Permutation | Method::Both)
    }

    pub fn asymptotic(self) -> bool {
        matches!(self, Method::Asymptotic | Method::Both)
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "perm" | "permutation" => Ok(Method::Permutation),
            "asymptotic" | "asym" => Ok(Method::Asymptotic),
            "both" => Ok(Method::Both),
            other => Err(Error::InvalidInput(format!(
                "unknown method `{other}`, expected perm, asymptotic or both"
            ))),
        }
    }
}

fn summary_row(label: &str, values: &[f64]) -> Vec<Cell> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let len = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / len;
    let sd = (sorted.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (len - 1.0)).sqrt();
    vec![
        label.into(),
        sorted.len().into(),
        mean.into(),
        crate::permutation::linear_quantile(&sorted, 0.5).into(),
        sd.into(),
        sorted[0].into(),
        sorted[sorted.len() - 1].into(),
    ]
}

pub struct TestInput<'a> {
    pub source: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub sample: &'a TwoSample,
    pub suite: &'a LepageSuite,
    pub stats: &'a [Statistic],
    pub method: Method,
    /// Permutation nulls in the order of `stats`, present for permutation methods.
    pub nulls: Option<&'a [PermutationNull]>,
}

pub fn test_report(input: &TestInput<'_>) -> Report {
    let mut r = Report::new("Lepage-type location-scale tests");
    r.fact("source", input.source);
    r.fact("x", format!("{} (m = {})", input.x_label, input.sample.m()));
    r.fact("y", format!("{} (n = {})", input.y_label, input.sample.n()));
    if let Some(null) = input.nulls.and_then(|n| n.first()) {
        r.fact("permutation", describe_mode(null));
    }
    let mut summary = Table::new("samples", &["group", "size", "mean", "median", "sd", "min", "max"]);
    summary.push(summary_row(input.x_label, input.sample.x()));
    summary.push(summary_row(input.y_label, input.sample.y()));

    let mut headers = vec!["statistic", "value"];
    if input.method.asymptotic() {
        headers.push("p_asymptotic");
    }
    if input.method.permutation() {
        headers.push("p_permutation");
    }
    headers.push("degenerate");
    let mut stats = Table::new("statistics", &headers);
    for (i, &s) in input.stats.iter().enumerate() {
        let value = input.suite.get(s);
        let mut row: Vec<Cell> = vec![s.name().into(), value.into()];
        if input.method.asymptotic() {
            row.push(Cell::PValue(input.suite.p_value(s)));
        }
        if input.method.permutation() {
            row.push(match input.nulls {
                Some(nulls) => Cell::PValue(nulls[i].p_value(value)),
                None => Cell::Empty,
            });
        }
        row.push(input.suite.degenerate[s.index()].into());
        stats.push(row);
    }
    let mut comps = Table::new("components", &["quantity", "value", "null_mean", "variance"]);
    let (u, c) = (&input.suite.u, &input.suite.c);
    comps.push(vec!["U".into(), u.u.into(), u.e0.into(), u.var0.into()]);
    comps.push(vec!["U (FP variance)".into(), Cell::Empty, Cell::Empty, u.var_fp.into()]);
    comps.push(vec!["U (FH variance)".into(), Cell::Empty, Cell::Empty, u.var_fh.into()]);
    comps.push(vec!["C".into(), c.c.into(), c.e0.into(), c.var0.into()]);
    comps.push(vec!["C (empirical variance)".into(), Cell::Empty, Cell::Empty, c.var_hat.into()]);
    r.tables = vec![summary, stats, comps];
    r
}

fn describe_mode(null: &PermutationNull) -> String {
    match null.mode {
        crate::permutation::Mode::Exact { .. } => format!("exact ({} assignments)", null.len()),
        crate::permutation::Mode::MonteCarlo { replications, seed } => {
            format!("Monte Carlo ({replications} draws, seed {seed})")
        }
    }
}

pub fn critvals_report(m: usize, n: usize, alpha: f64, nulls: &[PermutationNull]) -> Result<Report> {
    let mut r = Report::new("Permutation critical values");
    r.fact("m", m).fact("n", n).fact("alpha", alpha);
    if let Some(null) = nulls.first() {
        r.fact("permutation", describe_mode(null));
    }
    let mut t = Table::new("critical_values", &["statistic", "critical", "attained_size", "quantile"]);
    for null in nulls {
        let crit = null.critical_value(alpha)?;
        let attained = if crit.is_finite() { null.p_value(crit) } else { 0.0 };
        t.push(vec![
            null.statistic.name().into(),
            crit.into(),
            attained.into(),
            null.quantile(1.0 - alpha).into(),
        ]);
    }
    r.tables.push(t);
    Ok(r)
}

pub fn simulate_report(res: &SimResult) -> Report {
    let c = &res.config;
    let mut r = Report::new("Size/power study");
    r.fact("f", c.f_spec.to_string())
        .fact("g", c.g_spec.to_string())
        .fact("m", c.m)
        .fact("n", c.n)
        .fact("replications", c.replications)
        .fact("alpha", c.alpha)
        .fact("seed", c.seed)
        .fact("critical", res.cutoff_source.to_string());
    let mut t = Table::new("rejection_rates", &["statistic", "cutoff", "rejections", "rate", "std_error"]);
    for s in Statistic::ALL {
        let i = s.index();
        t.push(vec![
            s.name().into(),
            res.cutoffs[i].into(),
            res.rejections[i].into(),
            res.rates[i].into(),
            res.std_errors[i].into(),
        ]);
    }
    r.tables.push(t);
    r
}

pub fn varc_report(v: &VarCValidation, seed: u64) -> Report {
    let mut r = Report::new("Empirical variance of C under the null");
    r.fact("distribution", v.spec.to_string())
        .fact("m", v.m)
        .fact("n", v.n)
        .fact("replications", v.replications)
        .fact("seed", seed);
    let mut t = Table::new("variance", &["mean_var_hat", "std_error", "var0", "relative_error"]);
    t.push(vec![v.mean_var_hat.into(), v.std_error.into(), v.var0.into(), v.relative_error.into()]);
    r.tables.push(t);
    r
}

pub fn quantile_check_report(q: &NullQuantileCheck, seed: u64) -> Report {
    let mut r = Report::new("Null quantiles");
    r.fact("statistic", q.statistic.name())
        .fact("distribution", q.spec.to_string())
        .fact("m", q.m)
        .fact("n", q.n)
        .fact("replications", q.replications)
        .fact("seed", seed);
    let mut t = Table::new("quantiles", &["prob", "empirical", "lower", "upper", "reference"]);
    for row in &q.rows {
        t.push(vec![
            row.prob.into(),
            row.empirical.into(),
            row.lower.into(),
            row.upper.into(),
            row.reference.into(),
        ]);
    }
    r.tables.push(t);
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> Report {
        let mut r = Report::new("demo");
        r.fact("m", 5usize).fact("label", "a,b");
        let mut t = Table::new("rows", &["name", "value", "p"]);
        t.push(vec!["L0".into(), 5.33451.into(), Cell::PValue(0.00001)]);
        t.push(vec!["L3".into(), f64::INFINITY.into(), Cell::PValue(0.1257)]);
        t.push(vec!["L4".into(), (-0.00001).into(), Cell::PValue(0.0)]);
        r.tables.push(t);
        r
    }

    #[test]
    fn table_format() {
        let s = sample_report().render(ReportFormat::Table, 4);
        assert!(s.contains("<1e-4"));
        assert!(s.contains("5.3345"));
        assert!(s.contains("inf"));
        assert!(s.contains("0.1257"));
        assert!(!s.contains("-0.0000"));
        assert!(s.contains("0.0000"));
    }

    #[test]
    fn csv_and_json() {
        let r = sample_report();
        let csv = r.render(ReportFormat::Csv, 2);
        assert!(csv.contains("name,value,p\nL0,5.33,<1e-2\n"));
        assert!(csv.contains("# label: a,b"));
        let js: Value = serde_json::from_str(&r.render(ReportFormat::Json, 4)).unwrap();
        assert_eq!(js["facts"]["m"], json!(5));
        assert_eq!(js["tables"]["rows"][1]["value"], json!("inf"));
        assert_eq!(js["tables"]["rows"][0]["p"], json!(0.00001));
    }

    #[test]
    fn parse_options() {
        assert_eq!("CSV".parse::<ReportFormat>().unwrap(), ReportFormat::Csv);
        assert!("xml".parse::<ReportFormat>().is_err());
        assert_eq!("perm".parse::<Method>().unwrap(), Method::Permutation);
        assert!("bootstrap".parse::<Method>().is_err());
    }
}
