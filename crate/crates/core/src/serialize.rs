//! Frame matrix serialization.
//!
//! * `jsonl`: a header object `{"config", "text", "columns", "frames"}`
//!   followed by one object per frame keyed by column name.
//! * `tsv`: `#config` and `#text` comment lines, a header row of column
//!   names, then one row per frame.
//! * `bin`: magic `CSFE1`, u32 frame count, u32 column count, each column
//!   name as u32 length plus UTF-8 bytes, then row-major u16 indices. All
//!   integers little-endian. The source text is not stored.
//!
//! Any number of matrices can be concatenated in one stream.

use std::fmt;
use std::str::FromStr;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::encoder::FrameMatrix;
use crate::schema::{Column, SystemConfig};

pub const BIN_MAGIC: &[u8; 5] = b"CSFE1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Format {
    Jsonl,
    Tsv,
    Bin,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jsonl" => Ok(Format::Jsonl),
            "tsv" => Ok(Format::Tsv),
            "bin" => Ok(Format::Bin),
            _ => Err(format!("unknown format {s:?}; expected jsonl, tsv or bin")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Jsonl => "jsonl",
            Format::Tsv => "tsv",
            Format::Bin => "bin",
        })
    }
}

#[derive(Debug, Error)]
pub enum DeserializeError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("input is not valid UTF-8")]
    Utf8,
    #[error("unexpected end of input")]
    Truncated,
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unknown configuration {0:?}")]
    UnknownConfig(String),
    #[error("columns {0:?} match no configuration")]
    UnknownColumns(Vec<String>),
    #[error("{0}")]
    Malformed(String),
}

pub fn serialize(matrix: &FrameMatrix, format: Format) -> Vec<u8> {
    match format {
        Format::Jsonl => to_jsonl(matrix),
        Format::Tsv => to_tsv(matrix),
        Format::Bin => to_bin(matrix),
    }
}

/// Reads exactly one matrix.
pub fn deserialize(bytes: &[u8], format: Format) -> Result<FrameMatrix, DeserializeError> {
    let mut all = deserialize_stream(bytes, format)?;
    match all.len() {
        1 => Ok(all.pop().expect("one element")),
        n => Err(DeserializeError::Malformed(format!(
            "expected one matrix, found {n}"
        ))),
    }
}

/// Reads a concatenation of matrices.
pub fn deserialize_stream(
    bytes: &[u8],
    format: Format,
) -> Result<Vec<FrameMatrix>, DeserializeError> {
    match format {
        Format::Jsonl => {
            from_jsonl(std::str::from_utf8(bytes).map_err(|_| DeserializeError::Utf8)?)
        }
        Format::Tsv => from_tsv(std::str::from_utf8(bytes).map_err(|_| DeserializeError::Utf8)?),
        Format::Bin => from_bin(bytes),
    }
}

fn config_by_name(name: &str) -> Result<SystemConfig, DeserializeError> {
    SystemConfig::by_name(name).ok_or_else(|| DeserializeError::UnknownConfig(name.to_string()))
}

fn check_columns(config: &SystemConfig, names: &[String]) -> Result<(), DeserializeError> {
    let expected: Vec<&str> = config.columns().into_iter().map(Column::name).collect();
    if expected != names {
        return Err(DeserializeError::UnknownColumns(names.to_vec()));
    }
    Ok(())
}

fn to_jsonl(matrix: &FrameMatrix) -> Vec<u8> {
    let manifest = matrix.manifest();
    let header = json!({
        "config": matrix.config.name,
        "text": matrix.source,
        "columns": manifest,
        "frames": matrix.len(),
    });
    let mut out = header.to_string();
    out.push('\n');
    for row in matrix.rows() {
        let object: Map<String, Value> = manifest
            .iter()
            .zip(row)
            .map(|(name, v)| (name.to_string(), Value::from(v)))
            .collect();
        out.push_str(&Value::Object(object).to_string());
        out.push('\n');
    }
    out.into_bytes()
}

fn from_jsonl(text: &str) -> Result<Vec<FrameMatrix>, DeserializeError> {
    let malformed = |m: &str| DeserializeError::Malformed(m.to_string());
    let mut lines = text.lines().filter(|l| !l.is_empty());
    let mut out = Vec::new();
    while let Some(line) = lines.next() {
        let header: Value = serde_json::from_str(line)?;
        let name = header["config"]
            .as_str()
            .ok_or_else(|| malformed("header lacks config"))?;
        let source = header["text"]
            .as_str()
            .ok_or_else(|| malformed("header lacks text"))?;
        let n = header["frames"]
            .as_u64()
            .ok_or_else(|| malformed("header lacks frames"))? as usize;
        let names: Vec<String> = header["columns"]
            .as_array()
            .ok_or_else(|| malformed("header lacks columns"))?
            .iter()
            .map(|v| {
                v.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| malformed("column name"))
            })
            .collect::<Result<_, _>>()?;
        let config = config_by_name(name)?;
        check_columns(&config, &names)?;
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let line = lines.next().ok_or(DeserializeError::Truncated)?;
            let object: Map<String, Value> = serde_json::from_str(line)?;
            let row = names
                .iter()
                .map(|c| {
                    object
                        .get(c)
                        .and_then(Value::as_u64)
                        .and_then(|v| u16::try_from(v).ok())
                        .ok_or_else(|| malformed("frame field missing or not a u16"))
                })
                .collect::<Result<Vec<u16>, _>>()?;
            rows.push(row);
        }
        out.push(FrameMatrix::from_rows(config, source.to_string(), &rows));
    }
    Ok(out)
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(text: &str) -> Result<String, DeserializeError> {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        out.push(match chars.next() {
            Some('\\') => '\\',
            Some('t') => '\t',
            Some('n') => '\n',
            Some('r') => '\r',
            _ => return Err(DeserializeError::Malformed("bad escape in #text".into())),
        });
    }
    Ok(out)
}

fn to_tsv(matrix: &FrameMatrix) -> Vec<u8> {
    let mut out = format!(
        "#config\t{}\n#text\t{}\n{}\n",
        matrix.config.name,
        escape(&matrix.source),
        matrix.manifest().join("\t")
    );
    for row in matrix.rows() {
        let cells: Vec<String> = row.iter().map(u16::to_string).collect();
        out.push_str(&cells.join("\t"));
        out.push('\n');
    }
    out.into_bytes()
}

fn from_tsv(text: &str) -> Result<Vec<FrameMatrix>, DeserializeError> {
    let malformed = |m: &str| DeserializeError::Malformed(m.to_string());
    let mut lines = text.lines().peekable();
    let mut out = Vec::new();
    while let Some(line) = lines.next() {
        let name = line
            .strip_prefix("#config\t")
            .ok_or_else(|| malformed("expected #config"))?;
        let source = lines
            .next()
            .and_then(|l| l.strip_prefix("#text\t"))
            .ok_or_else(|| malformed("expected #text"))?;
        let header = lines.next().ok_or(DeserializeError::Truncated)?;
        let names: Vec<String> = header.split('\t').map(str::to_string).collect();
        let config = config_by_name(name)?;
        check_columns(&config, &names)?;
        let mut rows = Vec::new();
        while let Some(line) = lines.next_if(|l| !l.starts_with("#config\t")) {
            let row = line
                .split('\t')
                .map(|v| v.parse::<u16>().map_err(|_| malformed("cell is not a u16")))
                .collect::<Result<Vec<_>, _>>()?;
            if row.len() != names.len() {
                return Err(malformed("row width differs from header"));
            }
            rows.push(row);
        }
        out.push(FrameMatrix::from_rows(config, unescape(source)?, &rows));
    }
    Ok(out)
}

fn to_bin(matrix: &FrameMatrix) -> Vec<u8> {
    let manifest = matrix.manifest();
    let mut out = Vec::with_capacity(16 + matrix.len() * manifest.len() * 2);
    out.extend_from_slice(BIN_MAGIC);
    out.extend_from_slice(&(matrix.len() as u32).to_le_bytes());
    out.extend_from_slice(&(manifest.len() as u32).to_le_bytes());
    for name in &manifest {
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
    }
    for row in matrix.rows() {
        for v in row {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], DeserializeError> {
        if self.bytes.len() < n {
            return Err(DeserializeError::Truncated);
        }
        let (head, rest) = self.bytes.split_at(n);
        self.bytes = rest;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32, DeserializeError> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn u16(&mut self) -> Result<u16, DeserializeError> {
        Ok(u16::from_le_bytes(
            self.take(2)?.try_into().expect("2 bytes"),
        ))
    }
}

fn from_bin(bytes: &[u8]) -> Result<Vec<FrameMatrix>, DeserializeError> {
    let mut r = Reader { bytes };
    let mut out = Vec::new();
    while !r.bytes.is_empty() {
        if r.take(BIN_MAGIC.len())? != BIN_MAGIC {
            return Err(DeserializeError::BadMagic);
        }
        let n_frames = r.u32()? as usize;
        let n_columns = r.u32()? as usize;
        let names = (0..n_columns)
            .map(|_| {
                let len = r.u32()? as usize;
                String::from_utf8(r.take(len)?.to_vec()).map_err(|_| DeserializeError::Utf8)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let columns = names
            .iter()
            .map(|n| Column::parse(n))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| DeserializeError::UnknownColumns(names.clone()))?;
        let config = SystemConfig::from_columns(&columns)
            .ok_or_else(|| DeserializeError::UnknownColumns(names.clone()))?;
        let rows = (0..n_frames)
            .map(|_| (0..n_columns).map(|_| r.u16()).collect())
            .collect::<Result<Vec<Vec<u16>>, _>>()?;
        out.push(FrameMatrix::from_rows(config, String::new(), &rows));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::Frame;

    fn sample() -> FrameMatrix {
        let frames = (0..4u16)
            .map(|i| Frame {
                segmental: 100 + i,
                tone: i,
                boundary: i % 4,
                word_len: 1,
                pos: 3,
                char_pos_in_word: 0,
                char_pos_in_sentence: i,
                word_pos_in_sentence: i / 2,
                ..Frame::default()
            })
            .collect();
        FrameMatrix {
            config: SystemConfig::ITE_BWS,
            source: "a\tb\\c\nd".into(),
            frames,
        }
    }

    #[test]
    fn text_formats_round_trip() {
        let m = sample();
        for format in [Format::Jsonl, Format::Tsv] {
            let bytes = serialize(&m, format);
            assert_eq!(deserialize(&bytes, format).unwrap(), m, "{format}");
        }
    }

    #[test]
    fn bin_round_trip_drops_text() {
        let m = sample();
        let back = deserialize(&serialize(&m, Format::Bin), Format::Bin).unwrap();
        assert_eq!(back.frames, m.frames);
        assert_eq!(back.config, m.config);
        assert_eq!(back.source, "");
    }

    #[test]
    fn empty_bin_is_header_only() {
        let m = FrameMatrix {
            config: SystemConfig::ITE,
            source: String::new(),
            frames: vec![],
        };
        let bytes = serialize(&m, Format::Bin);
        // magic, frames, columns, then "ipa" and "tone"
        assert_eq!(bytes.len(), 5 + 4 + 4 + (4 + 3) + (4 + 4));
        assert_eq!(&bytes[5..9], &0u32.to_le_bytes());
        assert_eq!(deserialize(&bytes, Format::Bin).unwrap(), m);
    }

    #[test]
    fn tsv_header_is_manifest() {
        let m = sample();
        let text = String::from_utf8(serialize(&m, Format::Tsv)).unwrap();
        assert_eq!(text.lines().nth(2).unwrap(), m.manifest().join("\t"));
    }

    #[test]
    fn jsonl_fields_in_manifest_order() {
        let m = sample();
        let text = String::from_utf8(serialize(&m, Format::Jsonl)).unwrap();
        let first = text.lines().nth(1).unwrap();
        assert!(first.starts_with("{\"ipa\":100,\"tone\":0,\"boundary\":0,\"word_len\":1"));
    }

    #[test]
    fn streams_concatenate() {
        let m = sample();
        for format in [Format::Jsonl, Format::Tsv, Format::Bin] {
            let mut bytes = serialize(&m, format);
            bytes.extend(serialize(&m, format));
            let all = deserialize_stream(&bytes, format).unwrap();
            assert_eq!(all.len(), 2);
            assert_eq!(all[0].frames, all[1].frames);
            assert!(deserialize(&bytes, format).is_err());
        }
    }

    #[test]
    fn corrupt_input_is_rejected() {
        let bytes = serialize(&sample(), Format::Bin);
        assert!(matches!(
            deserialize(&bytes[..bytes.len() - 1], Format::Bin),
            Err(DeserializeError::Truncated)
        ));
        assert!(matches!(
            deserialize(b"XXXXX", Format::Bin),
            Err(DeserializeError::BadMagic)
        ));
    }
}
