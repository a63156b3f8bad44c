//! Line-delimited JSON stream files.
//!
//! The first line is a header carrying the schema tag and the stream
//! dimensions; each following line is one round:
//!
//! ```text
//! {"schema":"cams-stream/1","c":3,"k":2,"n":1,"T":2,"regime":"stochastic"}
//! {"t":1,"predictions":[0,2],"label":0,"advice":[[0.7,0.3]]}
//! {"t":2,"predictions":[1,1],"label":2,"advice":[[0.5,0.5]]}
//! ```
//!
//! A header may also list `label_names`, in which case records can spell
//! labels as strings; they are mapped to indices on load.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::StreamFile;
use crate::domain::{AdviceMatrix, Label, RoundRecord, StreamMeta};
use crate::error::{Error, Result};

pub const STREAM_SCHEMA: &str = "cams-stream/1";

#[derive(Serialize, Deserialize)]
struct Header {
    schema: String,
    #[serde(flatten)]
    meta: StreamMeta,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label_names: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum LabelValue {
    Index(Label),
    Name(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordLine {
    t: usize,
    predictions: Vec<LabelValue>,
    label: LabelValue,
    advice: Vec<Vec<f64>>,
}

pub fn write_stream<W: Write>(stream: &StreamFile, mut out: W) -> std::io::Result<()> {
    let header = Header {
        schema: STREAM_SCHEMA.to_string(),
        meta: stream.meta.clone(),
        label_names: None,
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for rec in &stream.records {
        let line = RecordLine {
            t: rec.round_index,
            predictions: rec.predictions.iter().map(|&p| LabelValue::Index(p)).collect(),
            label: LabelValue::Index(rec.true_label),
            advice: rec.advice.to_rows(),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn save_stream(stream: &StreamFile, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_stream(stream, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

pub fn load_stream(path: &Path) -> Result<StreamFile> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_stream(BufReader::new(file), path)
}

/// Parses a stream; `path` only labels diagnostics.
pub fn read_stream<R: Read>(reader: BufReader<R>, path: &Path) -> Result<StreamFile> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = reader.lines().enumerate();

    let (_, first) = lines.next().ok_or_else(|| parse_err(1, "empty file, expected a header".into()))?;
    let first = first.map_err(|e| Error::io(path, e))?;
    let raw: serde_json::Value = serde_json::from_str(&first).map_err(|e| parse_err(1, format!("header: {e}")))?;
    let schema = raw.get("schema").and_then(|s| s.as_str()).unwrap_or("<missing>");
    if schema != STREAM_SCHEMA {
        return Err(Error::Schema {
            path: path.to_path_buf(),
            expected: STREAM_SCHEMA.to_string(),
            found: schema.to_string(),
        });
    }
    let header: Header = serde_json::from_value(raw).map_err(|e| parse_err(1, format!("header: {e}")))?;
    let meta = header.meta;
    meta.validate().map_err(|e| parse_err(1, format!("header: {e}")))?;
    let names = header.label_names.unwrap_or_default();
    if !names.is_empty() && names.len() != meta.c {
        return Err(parse_err(1, format!("label_names has {} entries, expected c = {}", names.len(), meta.c)));
    }
    let resolve = |v: LabelValue, line: usize, t: usize| -> Result<Label> {
        match v {
            LabelValue::Index(i) => Ok(i),
            LabelValue::Name(s) => names
                .iter()
                .position(|n| *n == s)
                .ok_or_else(|| parse_err(line, format!("record {t}: unknown label `{s}`"))),
        }
    };

    let mut records = Vec::with_capacity(meta.horizon);
    let mut last_line = 1;
    for (idx, text) in lines {
        let line = idx + 1;
        let text = text.map_err(|e| Error::io(path, e))?;
        if text.trim().is_empty() {
            continue;
        }
        last_line = line;
        let t = records.len() + 1;
        if t > meta.horizon {
            return Err(parse_err(line, format!("more records than T = {}", meta.horizon)));
        }
        let raw: RecordLine = serde_json::from_str(&text).map_err(|e| parse_err(line, format!("record {t}: {e}")))?;
        if raw.t != t {
            return Err(parse_err(line, format!("record {t}: round index {} out of order", raw.t)));
        }
        let predictions = raw
            .predictions
            .into_iter()
            .map(|p| resolve(p, line, t))
            .collect::<Result<Vec<_>>>()?;
        let true_label = resolve(raw.label, line, t)?;
        let advice = AdviceMatrix::from_rows(meta.k, &raw.advice)
            .map_err(|e| parse_err(line, format!("record {t}: advice {e}")))?;
        let rec = RoundRecord {
            round_index: t,
            predictions,
            true_label,
            advice,
        };
        rec.validate(meta.c, meta.k, meta.n)
            .map_err(|e| parse_err(line, format!("record {t}: {e}")))?;
        records.push(rec);
    }
    if records.len() < meta.horizon {
        return Err(parse_err(
            last_line + 1,
            format!("truncated: record {} of {} missing", records.len() + 1, meta.horizon),
        ));
    }
    Ok(StreamFile { meta, records })
}
