//! Text formats read and written by the pipeline.
//!
//! | file          | format                                                   |
//! |---------------|----------------------------------------------------------|
//! | mentions      | CSV, header `entity,class,timestamp`                      |
//! | ontology      | TSV `entity<TAB>relation<TAB>target`                      |
//! | property graph| TSV `entity<TAB>property<TAB>target`                      |
//! | edit history  | TSV `subject<TAB>property<TAB>object<TAB>timestamp<TAB>user` |
//! | ground truth  | CSV, header `class,N`                                     |
//!
//! Timestamps are integer epoch seconds or ISO-8601. Blank lines and lines
//! starting with `#` in TSV files are ignored; other malformed lines are
//! counted and skipped.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observations::{Mention, MentionAccumulator};
use crate::ontology::{OntologyBuilder, OntologyIndex, PropertyGraph};

pub const MENTION_HEADER: [&str; 3] = ["entity", "class", "timestamp"];

/// Parse epoch seconds or an ISO-8601 date/time (UTC unless an offset is
/// given). Negative instants are rejected.
pub fn parse_timestamp(s: &str) -> Option<i64> {
    let s = s.trim();
    let t = if !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) {
        s.parse().ok()?
    } else if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        dt.timestamp()
    } else if let Ok(dt) = NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S") {
        dt.and_utc().timestamp()
    } else if let Ok(dt) = NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S") {
        dt.and_utc().timestamp()
    } else if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        d.and_hms_opt(0, 0, 0)?.and_utc().timestamp()
    } else {
        return None;
    };
    (t >= 0).then_some(t)
}

/// Record counts of one input file.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineStats {
    pub records: u64,
    pub malformed: u64,
}

impl LineStats {
    pub fn add(&mut self, other: LineStats) {
        self.records += other.records;
        self.malformed += other.malformed;
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(|f| BufReader::with_capacity(1 << 20, f))
        .map_err(|e| Error::io(path, e))
}

fn for_each_tsv_line(path: &Path, mut f: impl FnMut(&[&str]) -> bool) -> Result<LineStats> {
    let mut reader = open(path)?;
    let mut line = String::new();
    let mut stats = LineStats::default();
    loop {
        line.clear();
        match reader.read_line(&mut line) {
            Ok(0) => break,
            Ok(_) => {}
            Err(e) if e.kind() == std::io::ErrorKind::InvalidData => {
                stats.malformed += 1;
                continue;
            }
            Err(e) => return Err(Error::io(path, e)),
        }
        let trimmed = line.trim_end_matches(['\n', '\r']);
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        // Every format has at most five columns; extra ones only need to be
        // detected, not kept.
        let mut fields = [""; 8];
        let mut count = 0;
        for part in trimmed.split('\t') {
            if count == fields.len() {
                break;
            }
            fields[count] = part;
            count += 1;
        }
        if f(&fields[..count]) {
            stats.records += 1;
        } else {
            stats.malformed += 1;
        }
    }
    Ok(stats)
}

pub fn read_ontology(path: &Path) -> Result<(OntologyIndex, LineStats)> {
    let mut builder = OntologyBuilder::new();
    let stats = for_each_tsv_line(path, |f| {
        f.len() == 3 && builder.add_statement(f[0].trim(), f[1].trim(), f[2].trim())
    })?;
    Ok((builder.build(), stats))
}

pub fn read_property_graph(path: &Path) -> Result<(PropertyGraph, LineStats)> {
    let mut graph = PropertyGraph::new();
    let stats = for_each_tsv_line(path, |f| {
        if f.len() != 3 || f.iter().any(|x| x.trim().is_empty()) {
            return false;
        }
        graph.insert(f[0].trim(), f[1].trim(), f[2].trim());
        true
    })?;
    Ok((graph, stats))
}

/// Borrowed view of one edit-history line.
#[derive(Clone, Copy, Debug)]
pub struct EditLine<'a> {
    pub subject: &'a str,
    pub property: &'a str,
    pub object: &'a str,
    pub timestamp: i64,
    pub user: &'a str,
}

/// Stream the edit history; malformed lines are counted, not passed on.
pub fn for_each_edit(path: &Path, mut f: impl FnMut(EditLine<'_>)) -> Result<LineStats> {
    for_each_tsv_line(path, |fields| {
        if fields.len() != 5 {
            return false;
        }
        let (subject, property) = (fields[0].trim(), fields[1].trim());
        if subject.is_empty() || property.is_empty() {
            return false;
        }
        let Some(timestamp) = parse_timestamp(fields[3]) else {
            return false;
        };
        f(EditLine {
            subject,
            property,
            object: fields[2].trim(),
            timestamp,
            user: fields[4].trim(),
        });
        true
    })
}

/// Stream a mention CSV into `sink`.
pub fn for_each_mention(path: &Path, mut sink: impl FnMut(&str, &str, i64)) -> Result<LineStats> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(open(path)?);
    let headers = reader.byte_headers().map_err(|e| Error::parse(path, e.to_string()))?;
    let names: Vec<&[u8]> = headers.iter().map(<[u8]>::trim_ascii).collect();
    if names != MENTION_HEADER.map(str::as_bytes) {
        return Err(Error::parse(
            path,
            format!("expected header `{}`", MENTION_HEADER.join(",")),
        ));
    }
    let mut record = csv::ByteRecord::new();
    let mut stats = LineStats::default();
    loop {
        match reader.read_byte_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) if e.is_io_error() => return Err(e.into()),
            Err(_) => {
                stats.malformed += 1;
                continue;
            }
        }
        let parsed = (record.len() == 3)
            .then(|| {
                let entity = std::str::from_utf8(&record[0]).ok()?.trim();
                let class = std::str::from_utf8(&record[1]).ok()?.trim();
                let ts = parse_timestamp(std::str::from_utf8(&record[2]).ok()?)?;
                (!entity.is_empty() && !class.is_empty()).then_some((entity, class, ts))
            })
            .flatten();
        match parsed {
            Some((e, c, t)) => {
                sink(e, c, t);
                stats.records += 1;
            }
            None => stats.malformed += 1,
        }
    }
    Ok(stats)
}

pub fn read_mentions_into(path: &Path, acc: &mut MentionAccumulator) -> Result<LineStats> {
    for_each_mention(path, |e, c, t| acc.push(e, c, t))
}

pub fn read_mentions(path: &Path) -> Result<(Vec<Mention>, LineStats)> {
    let mut out = Vec::new();
    let stats = for_each_mention(path, |e, c, t| {
        out.push(Mention {
            entity: e.to_owned(),
            class: c.to_owned(),
            timestamp: t,
        })
    })?;
    Ok((out, stats))
}

/// Buffered mention CSV writer. Timestamps are written as epoch seconds.
pub struct MentionWriter<W: Write> {
    inner: csv::Writer<W>,
    itoa: String,
}

impl MentionWriter<BufWriter<File>> {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        MentionWriter::new(BufWriter::with_capacity(1 << 20, file))
    }
}

impl<W: Write> MentionWriter<W> {
    pub fn new(out: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(out);
        inner.write_record(MENTION_HEADER)?;
        Ok(MentionWriter {
            inner,
            itoa: String::new(),
        })
    }

    pub fn write(&mut self, entity: &str, class: &str, timestamp: i64) -> Result<()> {
        use std::fmt::Write as _;
        self.itoa.clear();
        write!(self.itoa, "{timestamp}").expect("write to String");
        self.inner.write_record([entity, class, &self.itoa])?;
        Ok(())
    }

    pub fn write_mention(&mut self, m: &Mention) -> Result<()> {
        self.write(&m.entity, &m.class, m.timestamp)
    }

    pub fn finish(self) -> Result<W> {
        self.inner
            .into_inner()
            .map_err(|e| Error::Csv(csv::Error::from(e.into_error())))
    }
}

#[derive(Debug, Deserialize)]
struct TruthRow {
    class: String,
    #[serde(rename = "N")]
    n: f64,
}

/// Ground-truth class sizes from a `class,N` CSV.
pub fn read_ground_truth(path: &Path) -> Result<BTreeMap<String, f64>> {
    let mut reader = csv::Reader::from_reader(open(path)?);
    let mut out = BTreeMap::new();
    for (line, row) in reader.deserialize::<TruthRow>().enumerate() {
        let row = row.map_err(|e| Error::parse(path, e.to_string()))?;
        if !(row.n > 0.0 && row.n.is_finite()) {
            return Err(Error::parse(
                path,
                format!("record {}: class size must be positive", line + 1),
            ));
        }
        out.insert(row.class, row.n);
    }
    Ok(out)
}
