use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::simulate::{MixtureSpec, SCHEMA_VERSION};

/// Streams specs from JSONL, one per non-blank line.
pub struct ManifestReader<R> {
    lines: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> ManifestReader<R> {
    pub fn new(reader: R) -> Self {
        ManifestReader {
            lines: reader.lines(),
            line: 0,
        }
    }
}

/// Parses one manifest line. `line` is 1-based and only used in errors.
pub fn parse_line(text: &str, line: usize) -> Result<MixtureSpec> {
    let malformed = |message: String| Error::MalformedLine { line, message };
    let value: Value = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
    match value.get("schema_version") {
        Some(Value::String(v)) if v == SCHEMA_VERSION => {}
        Some(Value::String(v)) => {
            return Err(Error::SchemaVersionMismatch {
                found: v.clone(),
                expected: SCHEMA_VERSION.into(),
            })
        }
        Some(_) => return Err(malformed("schema_version must be a string".into())),
        None => return Err(malformed("missing field `schema_version`".into())),
    }
    serde_json::from_value(value).map_err(|e| malformed(e.to_string()))
}

impl<R: BufRead> Iterator for ManifestReader<R> {
    type Item = Result<MixtureSpec>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let text = match self.lines.next()? {
                Ok(t) => t,
                Err(e) => {
                    return Some(Err(Error::MalformedLine {
                        line: self.line + 1,
                        message: e.to_string(),
                    }))
                }
            };
            self.line += 1;
            if !text.trim().is_empty() {
                return Some(parse_line(&text, self.line));
            }
        }
    }
}

pub fn open_manifest(path: &Path) -> Result<ManifestReader<BufReader<File>>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(ManifestReader::new(BufReader::new(f)))
}

pub fn load_manifest(path: &Path) -> Result<Vec<MixtureSpec>> {
    open_manifest(path)?.collect()
}

pub fn write_manifest<'a, W: Write>(
    specs: impl IntoIterator<Item = &'a MixtureSpec>,
    mut out: W,
) -> std::io::Result<()> {
    for spec in specs {
        serde_json::to_writer(&mut out, spec)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Writes JSONL to a sibling temporary file, then renames it into place.
pub fn save_manifest(specs: &[MixtureSpec], path: &Path) -> Result<()> {
    let tmp = path.with_extension("jsonl.tmp");
    let f = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    write_manifest(specs, BufWriter::new(f)).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
