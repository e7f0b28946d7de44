//! Record serialization. Exact integers are always decimal strings.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::args::Format;

pub fn int(v: impl ToString) -> String {
    v.to_string()
}

/// One output row: a JSON object and the matching CSV fields.
pub trait Record {
    fn json(&self) -> String;
    fn csv(&self) -> Vec<String>;

    /// Bare-value rendering; `None` prints nothing.
    fn plain(&self) -> Option<String> {
        Some(self.json())
    }
}

#[derive(Debug, Serialize)]
pub struct VerifyRecord {
    pub n: String,
    pub r: u32,
    pub lhs: String,
    pub rhs: String,
    pub group_size: String,
    pub matched: bool,
    pub elapsed_s: f64,
    pub shards: usize,
}

pub const VERIFY_HEADER: &[&str] = &[
    "n",
    "r",
    "lhs",
    "rhs",
    "group_size",
    "matched",
    "elapsed_s",
    "shards",
];

impl Record for VerifyRecord {
    fn json(&self) -> String {
        serde_json::to_string(self).expect("plain struct serializes")
    }

    fn csv(&self) -> Vec<String> {
        vec![
            self.n.clone(),
            self.r.to_string(),
            self.lhs.clone(),
            self.rhs.clone(),
            self.group_size.clone(),
            self.matched.to_string(),
            format!("{:?}", self.elapsed_s),
            self.shards.to_string(),
        ]
    }
}

/// Emitted in place of a result when an (n, r) is refused or overflows.
/// No partial values are reported.
#[derive(Debug, Serialize)]
pub struct FailureRecord {
    pub n: String,
    pub r: u32,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub refused: bool,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub overflow: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group_size: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimated_cost: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<String>,
    pub message: String,
    /// Width of the command's CSV header.
    #[serde(skip)]
    pub csv_width: usize,
    /// Position of `group_size` in the command's CSV header, if any.
    #[serde(skip)]
    pub csv_group_size_col: Option<usize>,
}

impl Record for FailureRecord {
    fn json(&self) -> String {
        serde_json::to_string(self).expect("plain struct serializes")
    }

    fn plain(&self) -> Option<String> {
        None
    }

    fn csv(&self) -> Vec<String> {
        let mut row = vec![String::new(); self.csv_width];
        row[0] = self.n.clone();
        row[1] = self.r.to_string();
        if let (Some(col), Some(size)) = (self.csv_group_size_col, &self.group_size) {
            row[col] = size.clone();
        }
        row
    }
}

#[derive(Debug, Serialize)]
pub struct BurnsideRecord {
    pub n: String,
    pub r: u32,
    pub burnside_count: String,
    pub unionfind_count: String,
    pub chain_count: String,
    pub tau_r: String,
    pub agree: bool,
}

pub const BURNSIDE_HEADER: &[&str] = &[
    "n",
    "r",
    "burnside_count",
    "unionfind_count",
    "chain_count",
    "tau_r",
    "agree",
];

impl Record for BurnsideRecord {
    fn json(&self) -> String {
        serde_json::to_string(self).expect("plain struct serializes")
    }

    fn csv(&self) -> Vec<String> {
        vec![
            self.n.clone(),
            self.r.to_string(),
            self.burnside_count.clone(),
            self.unionfind_count.clone(),
            self.chain_count.clone(),
            self.tau_r.clone(),
            self.agree.to_string(),
        ]
    }
}

#[derive(Debug, Serialize)]
pub struct TauRecord {
    pub n: String,
    pub r: u32,
    pub tau_r: String,
    pub agree: bool,
}

pub const TAU_HEADER: &[&str] = &["n", "r", "tau_r", "agree"];

impl Record for TauRecord {
    fn json(&self) -> String {
        serde_json::to_string(self).expect("plain struct serializes")
    }

    fn plain(&self) -> Option<String> {
        Some(self.tau_r.clone())
    }

    fn csv(&self) -> Vec<String> {
        vec![
            self.n.clone(),
            self.r.to_string(),
            self.tau_r.clone(),
            self.agree.to_string(),
        ]
    }
}

#[derive(Debug, Serialize)]
pub struct ChainCountRecord {
    pub n: String,
    pub r: u32,
    pub chain_count: String,
    pub tau_r: String,
    pub matched: bool,
}

pub const CHAIN_COUNT_HEADER: &[&str] = &["n", "r", "chain_count", "tau_r", "matched"];

impl Record for ChainCountRecord {
    fn json(&self) -> String {
        serde_json::to_string(self).expect("plain struct serializes")
    }

    fn csv(&self) -> Vec<String> {
        vec![
            self.n.clone(),
            self.r.to_string(),
            self.chain_count.clone(),
            self.tau_r.clone(),
            self.matched.to_string(),
        ]
    }
}

#[derive(Debug, Serialize)]
pub struct ChainRecord {
    pub n: String,
    pub r: u32,
    pub chain: Vec<String>,
}

pub const CHAIN_HEADER: &[&str] = &["n", "r", "chain"];

impl Record for ChainRecord {
    fn json(&self) -> String {
        serde_json::to_string(self).expect("plain struct serializes")
    }

    fn csv(&self) -> Vec<String> {
        vec![self.n.clone(), self.r.to_string(), self.chain.join(" ")]
    }
}

#[derive(Debug, Serialize)]
pub struct BenchRecord {
    pub n: String,
    pub r: u32,
    pub group_size: String,
    pub lhs: String,
    pub elapsed_s: f64,
    pub elements_per_s: f64,
    pub shards: usize,
}

pub const BENCH_HEADER: &[&str] = &[
    "n",
    "r",
    "group_size",
    "lhs",
    "elapsed_s",
    "elements_per_s",
    "shards",
];

impl Record for BenchRecord {
    fn json(&self) -> String {
        serde_json::to_string(self).expect("plain struct serializes")
    }

    fn csv(&self) -> Vec<String> {
        vec![
            self.n.clone(),
            self.r.to_string(),
            self.group_size.clone(),
            self.lhs.clone(),
            format!("{:?}", self.elapsed_s),
            format!("{:?}", self.elements_per_s),
            self.shards.to_string(),
        ]
    }
}

/// How rows are rendered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    /// One JSON object per line.
    JsonLines,
    /// RFC 4180 CSV with a header row.
    Csv,
    /// A single bare value per line (the `tau` default).
    Plain,
}

impl From<Format> for Style {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => Style::JsonLines,
            Format::Csv => Style::Csv,
        }
    }
}

/// Writes buffered records in one go, so nothing reaches the destination
/// until the whole run has finished.
pub fn write_records(
    out: Option<&Path>,
    style: Style,
    header: &[&str],
    records: &[Box<dyn Record>],
) -> io::Result<()> {
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = BufWriter::new(sink);
    match style {
        Style::JsonLines => {
            for rec in records {
                writeln!(sink, "{}", rec.json())?;
            }
        }
        Style::Plain => {
            for line in records.iter().filter_map(|rec| rec.plain()) {
                writeln!(sink, "{line}")?;
            }
        }
        Style::Csv => {
            let mut w = csv::Writer::from_writer(&mut sink);
            w.write_record(header)?;
            for rec in records {
                w.write_record(rec.csv())?;
            }
            w.flush()?;
        }
    }
    sink.flush()
}
