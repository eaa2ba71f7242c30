//! File formats: observation and count-table CSV, joint pmf TOML, and report
//! rendering.

use std::fmt::Write as _;
use std::path::Path;

use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::checkerboard::JointPmf;
use crate::empirical::RankedSample;
use crate::error::{Error, Result};
use crate::margin::{DiscreteMargin, MarginSpec};
use crate::statistics::ContingencyTable;

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

type NumberedRecord = (usize, Vec<String>);

/// Numeric rows of a comma-separated text. Blank lines and lines starting
/// with `#` are skipped; a first record that does not parse as numbers is
/// taken as a header. Returns `(header, rows)`.
fn numeric_records(text: &str, source_name: &str) -> Result<(Option<Vec<String>>, Vec<NumberedRecord>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut header = None;
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(source_name, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let fields: Vec<String> = rec.iter().map(str::to_owned).collect();
        if fields.iter().all(String::is_empty) {
            continue;
        }
        if rows.is_empty() && header.is_none() && fields.iter().any(|f| f.parse::<f64>().is_err()) {
            header = Some(fields);
            continue;
        }
        rows.push((line, fields));
    }
    Ok((header, rows))
}

/// Observations, one row per line.
pub fn parse_observations(text: &str, source_name: &str) -> Result<RankedSample> {
    let (header, records) = numeric_records(text, source_name)?;
    let width = header.as_ref().map(Vec::len).or_else(|| records.first().map(|r| r.1.len()));
    let Some(width) = width else {
        return Err(Error::parse(source_name, 0, "no observations"));
    };
    if records.is_empty() {
        return Err(Error::parse(source_name, 0, "no observations"));
    }
    let mut rows = Vec::with_capacity(records.len());
    for (line, fields) in records {
        if fields.len() != width {
            return Err(Error::parse(source_name, line, format!("expected {width} fields, found {}", fields.len())));
        }
        let row = fields
            .iter()
            .map(|f| match f.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(Error::parse(source_name, line, format!("{f:?} is not a finite number"))),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    RankedSample::rank(&rows)
}

pub fn read_observations(path: &Path) -> Result<RankedSample> {
    parse_observations(&read_to_string(path)?, &path.display().to_string())
}

/// A contingency table of non-negative integer counts, one table row per line.
pub fn parse_count_table(text: &str, source_name: &str) -> Result<ContingencyTable> {
    let (_, records) = numeric_records(text, source_name)?;
    let mut rows = Vec::with_capacity(records.len());
    for (line, fields) in records {
        let row = fields
            .iter()
            .map(|f| {
                f.parse::<u64>()
                    .map_err(|_| Error::parse(source_name, line, format!("{f:?} is not a non-negative integer count")))
            })
            .collect::<Result<Vec<u64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::parse(source_name, 0, "empty count table"));
    }
    ContingencyTable::from_rows(&rows)
}

pub fn read_count_table(path: &Path) -> Result<ContingencyTable> {
    parse_count_table(&read_to_string(path)?, &path.display().to_string())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MarginEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    spec: Option<MarginSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    support: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pmf: Option<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PmfFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shape: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cells: Option<Vec<f64>>,
    #[serde(default)]
    margins: Vec<MarginEntry>,
}

/// A joint pmf in TOML:
///
/// ```toml
/// cells = [0.5, 0.0, 0.0, 0.5]   # row-major; omitted means independent margins
///
/// [[margins]]
/// pmf = [0.5, 0.5]
/// support = [0, 1]               # optional, defaults to 0, 1, ...
///
/// [[margins]]
/// spec = "binomial(1, 0.5)"
/// ```
///
/// Without `[[margins]]`, `shape` and `cells` are required and the margins
/// are the sums of the cells over the other axes.
pub fn parse_pmf(text: &str, source_name: &str) -> Result<JointPmf> {
    let file: PmfFile = toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(0, |s| text[..s.start].matches('\n').count() + 1);
        Error::parse(source_name, line, e.message().to_owned())
    })?;
    if file.margins.is_empty() {
        return match (file.shape, file.cells) {
            (Some(shape), Some(cells)) => JointPmf::from_cells(shape, cells),
            _ => Err(Error::validation("a pmf without [[margins]] needs both `shape` and `cells`")),
        };
    }
    let margins = file
        .margins
        .into_iter()
        .enumerate()
        .map(|(j, m)| match (m.spec, m.pmf, m.support) {
            (Some(spec), None, None) => spec.build(),
            (None, Some(pmf), None) => DiscreteMargin::from_pmf(pmf),
            (None, Some(pmf), Some(support)) => DiscreteMargin::new(support, pmf),
            _ => Err(Error::validation(format!(
                "margin {j}: give either `spec` or `pmf` (with optional `support`)"
            ))),
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(shape) = &file.shape {
        let expected: Vec<usize> = margins.iter().map(DiscreteMargin::len).collect();
        if *shape != expected {
            return Err(Error::validation(format!("shape {shape:?} disagrees with margins {expected:?}")));
        }
    }
    match file.cells {
        Some(cells) => JointPmf::new(margins, cells),
        None => JointPmf::product(margins),
    }
}

pub fn read_pmf(path: &Path) -> Result<JointPmf> {
    parse_pmf(&read_to_string(path)?, &path.display().to_string())
}

/// TOML text that [`parse_pmf`] reads back to the same pmf.
pub fn pmf_to_toml(pmf: &JointPmf) -> String {
    let file = PmfFile {
        shape: Some(pmf.shape().to_vec()),
        cells: Some(pmf.cells().to_vec()),
        margins: pmf
            .margins()
            .iter()
            .map(|m| MarginEntry {
                spec: None,
                support: Some(m.support().to_vec()),
                pmf: Some(m.pmf().to_vec()),
            })
            .collect(),
    };
    toml::to_string(&file).expect("pmf serializes")
}

/// A value in a report.
#[derive(Clone, Debug, PartialEq)]
pub enum Field {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Field {
    fn from(x: f64) -> Self {
        Field::Num(x)
    }
}

impl From<u64> for Field {
    fn from(x: u64) -> Self {
        Field::Int(x)
    }
}

impl From<usize> for Field {
    fn from(x: usize) -> Self {
        Field::Int(x as u64)
    }
}

impl From<bool> for Field {
    fn from(x: bool) -> Self {
        Field::Bool(x)
    }
}

impl From<&str> for Field {
    fn from(x: &str) -> Self {
        Field::Text(x.to_owned())
    }
}

impl From<String> for Field {
    fn from(x: String) -> Self {
        Field::Text(x)
    }
}

/// Ordered key/value report.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Record(pub Vec<(String, Field)>);

impl Record {
    pub fn new() -> Self {
        Record(Vec::new())
    }

    pub fn push(&mut self, key: &str, value: impl Into<Field>) -> &mut Self {
        self.0.push((key.to_owned(), value.into()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Field> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    /// `key = value` lines, numbers to six significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.0 {
            let v = match v {
                Field::Num(x) => format_sig(*x, 6),
                Field::Int(i) => i.to_string(),
                Field::Text(s) => s.clone(),
                Field::Bool(b) => b.to_string(),
            };
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// One-line JSON object with full-precision numbers.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

impl Serialize for Record {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            match v {
                Field::Num(x) => map.serialize_entry(k, x)?,
                Field::Int(i) => map.serialize_entry(k, i)?,
                Field::Text(s) => map.serialize_entry(k, s)?,
                Field::Bool(b) => map.serialize_entry(k, b)?,
            }
        }
        map.end()
    }
}

/// `x` rounded to `digits` significant digits, without trailing zeros.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_owned()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s
    }
}
