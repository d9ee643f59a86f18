//! CSV tables, content digests and the run manifest.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // `{:?}` is the shortest representation that parses back to the
            // same double.
            Cell::Float(x) => format!("{x:?}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
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

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// A rectangular table written as one CSV file.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub comment: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, comment: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            comment: comment.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match header of {}", self.name);
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for line in self.comment.lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `table` to `path` and returns the SHA-256 of the bytes written.
pub fn emit_csv(table: &Table, path: &Path) -> io::Result<String> {
    let text = table.render();
    fs::write(path, text.as_bytes())?;
    Ok(sha256_hex(text.as_bytes()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub file: String,
    pub sha256: String,
    pub rows: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub describes: String,
    pub config_digest: String,
    pub seed: u64,
    pub tool_version: String,
    pub workers: usize,
    pub outputs: Vec<OutputDigest>,
    pub wall_time_secs: f64,
}

pub const MANIFEST_NAME: &str = "manifest.json";

impl RunManifest {
    pub fn write(&self, dir: &Path) -> io::Result<PathBuf> {
        let path = dir.join(MANIFEST_NAME);
        let mut json = serde_json::to_string_pretty(self).map_err(io::Error::other)?;
        json.push('\n');
        fs::write(&path, json)?;
        Ok(path)
    }

    pub fn read(path: &Path) -> io::Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FileCheck {
    Ok,
    Mismatch { expected: String, found: String },
    Missing,
}

/// Recomputes every output digest listed in the manifest. Files are looked
/// up next to the manifest.
pub fn verify(manifest_path: &Path) -> io::Result<Vec<(String, FileCheck)>> {
    let manifest = RunManifest::read(manifest_path)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    Ok(manifest
        .outputs
        .iter()
        .map(|o| {
            let check = match fs::read(dir.join(&o.file)) {
                Ok(bytes) => {
                    let found = sha256_hex(&bytes);
                    if found == o.sha256 {
                        FileCheck::Ok
                    } else {
                        FileCheck::Mismatch { expected: o.sha256.clone(), found }
                    }
                }
                Err(_) => FileCheck::Missing,
            };
            (o.file.clone(), check)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new("t", "demo table", &["x", "label", "ok"]);
        t.push(vec![0.1.into(), "a,b".into(), true.into()]);
        t.push(vec![1e-7.into(), Cell::Empty, false.into()]);
        t
    }

    #[test]
    fn render_format() {
        assert_eq!(sample().render(), "# demo table\nx,label,ok\n0.1,\"a,b\",true\n1e-7,,false\n");
        let empty = Table::new("e", "", &["a", "b"]);
        assert_eq!(empty.render(), "a,b\n");
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt(), 1e-300, 6.02214076e23, -0.0] {
            let s = Cell::Float(x).render();
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn digest_is_stable_and_verifiable() {
        let dir = tempfile::tempdir().unwrap();
        let a = emit_csv(&sample(), &dir.path().join("t.csv")).unwrap();
        let b = emit_csv(&sample(), &dir.path().join("t2.csv")).unwrap();
        assert_eq!(a, b);
        let manifest = RunManifest {
            experiment: "demo".into(),
            describes: String::new(),
            config_digest: String::new(),
            seed: 1,
            tool_version: "0".into(),
            workers: 1,
            outputs: vec![OutputDigest { file: "t.csv".into(), sha256: a, rows: 2 }],
            wall_time_secs: 0.0,
        };
        let path = manifest.write(dir.path()).unwrap();
        assert_eq!(verify(&path).unwrap(), vec![("t.csv".to_string(), FileCheck::Ok)]);
        fs::write(dir.path().join("t.csv"), "tampered").unwrap();
        assert!(matches!(verify(&path).unwrap()[0].1, FileCheck::Mismatch { .. }));
    }
}
