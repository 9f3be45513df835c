//! CSV and JSON writers plus the run manifest.
//!
//! Floats are printed with Rust's shortest round-trip formatting and JSON
//! objects use sorted keys, so identical results give identical bytes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use super::engine::BerRecord;
use super::search::RequiredEbn0;
use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Plain table: header names and rows of already formatted cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub comment: Option<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table { comment: None, header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn with_comment(mut self, comment: impl Into<String>) -> Self {
        self.comment = Some(comment.into());
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if let Some(c) = &self.comment {
            for line in c.lines() {
                out.push_str("# ");
                out.push_str(line);
                out.push('\n');
            }
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    /// Array of objects; cells that parse as numbers or booleans are typed.
    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj = self
                    .header
                    .iter()
                    .zip(r)
                    .map(|(h, c)| (h.clone(), cell_value(c)))
                    .collect::<serde_json::Map<_, _>>();
                Value::Object(obj)
            })
            .collect();
        let mut doc = serde_json::Map::new();
        if let Some(c) = &self.comment {
            doc.insert("comment".into(), Value::String(c.clone()));
        }
        doc.insert("rows".into(), Value::Array(rows));
        let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

fn cell_value(c: &str) -> Value {
    if let Ok(i) = c.parse::<i64>() {
        return json!(i);
    }
    if let Ok(f) = c.parse::<f64>() {
        if f.is_finite() {
            return json!(f);
        }
    }
    match c {
        "true" => Value::Bool(true),
        "false" => Value::Bool(false),
        _ => Value::String(c.to_string()),
    }
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn ber_table(records: &[BerRecord]) -> Table {
    let mut t = Table::new(["ebn0_db", "ber", "std_err", "bit_errors", "bits", "scenario_digest", "upper_bound"]);
    for r in records {
        t.push(vec![
            num(r.ebn0_db),
            num(r.ber),
            num(r.std_err),
            r.bit_errors.to_string(),
            r.bits.to_string(),
            r.scenario_digest.clone(),
            r.upper_bound.to_string(),
        ]);
    }
    t
}

pub fn required_table(rows: &[(f64, RequiredEbn0)]) -> Table {
    let mut t = Table::new(["offset_value", "required_ebn0_db", "saturated_flag"]);
    for (offset, r) in rows {
        t.push(vec![num(*offset), num(r.ebn0_db), u8::from(r.saturated).to_string()]);
    }
    t
}

/// Square matrix of magnitudes: header `l\k,0,1,...`, one row per output.
pub fn matrix_table(comment: String, size: usize, magnitude: impl Fn(usize, usize) -> f64) -> Table {
    let mut header = vec!["l\\k".to_string()];
    header.extend((0..size).map(|k| k.to_string()));
    let mut t = Table { comment: Some(comment), header, rows: Vec::new() };
    for l in 0..size {
        let mut row = vec![l.to_string()];
        row.extend((0..size).map(|k| num(magnitude(l, k))));
        t.rows.push(row);
    }
    t
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestEntry {
    pub file: String,
    pub config: Value,
}

/// Everything needed to re-create a run's outputs.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub files: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn new(command: &str, seed: u64) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            files: Vec::new(),
        }
    }
}

/// Writes tables into `dir` and records them in a manifest.
pub struct OutputDir {
    dir: PathBuf,
    format: Format,
    manifest: Manifest,
}

impl OutputDir {
    pub fn create(dir: &Path, format: Format, command: &str, seed: u64) -> Result<Self, HarnessError> {
        fs::create_dir_all(dir)?;
        Ok(OutputDir { dir: dir.to_path_buf(), format, manifest: Manifest::new(command, seed) })
    }

    /// Writes `<stem>.<ext>` and returns its path.
    pub fn write(&mut self, stem: &str, table: &Table, config: impl Serialize) -> Result<PathBuf, HarnessError> {
        let name = format!("{stem}.{}", self.format.extension());
        let path = self.dir.join(&name);
        fs::File::create(&path)?.write_all(table.render(self.format).as_bytes())?;
        let config = serde_json::to_value(config).map_err(|e| HarnessError::Invalid(e.to_string()))?;
        self.manifest.files.push(ManifestEntry { file: name, config });
        Ok(path)
    }

    pub fn finish(self) -> Result<PathBuf, HarnessError> {
        let path = self.dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&self.manifest).map_err(|e| HarnessError::Invalid(e.to_string()))?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use mcwave_core::link::ErrorCount;

    #[test]
    fn ber_csv_layout() {
        let r = BerRecord::new(4.0, ErrorCount { bit_errors: 250, bits: 10_000 }, "abcd");
        let csv = ber_table(&[r]).to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "ebn0_db,ber,std_err,bit_errors,bits,scenario_digest,upper_bound");
        let cells: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(cells[0], "4");
        assert_eq!(cells[1], "0.025");
        assert_eq!(cells[3], "250");
        assert_eq!(cells[5], "abcd");
        assert_eq!(cells[6], "false");
    }

    #[test]
    fn required_csv_layout() {
        let r = RequiredEbn0 { ebn0_db: 40.0, saturated: true, evaluations: 1 };
        let csv = required_table(&[(0.05, r)]).to_csv();
        assert_eq!(csv, "offset_value,required_ebn0_db,saturated_flag\n0.05,40,1\n");
    }

    #[test]
    fn matrix_has_comment_and_header() {
        let csv = matrix_table("identity".into(), 3, |l, k| f64::from(u8::from(l == k))).to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# identity");
        assert_eq!(lines[1], "l\\k,0,1,2");
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[3], "1,0,1,0");
    }

    #[test]
    fn json_cells_are_typed() {
        let mut t = Table::new(["a", "b", "c"]);
        t.push(vec!["1".into(), "0.5".into(), "x".into()]);
        let v: Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v["rows"][0]["a"], json!(1));
        assert_eq!(v["rows"][0]["b"], json!(0.5));
        assert_eq!(v["rows"][0]["c"], json!("x"));
    }

    #[test]
    fn output_dir_writes_manifest() {
        let tmp = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(tmp.path(), Format::Csv, "test", 9).unwrap();
        out.write("t", &Table::new(["x"]), json!({"k": 1})).unwrap();
        out.finish().unwrap();
        let m: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(m["seed"], json!(9));
        assert_eq!(m["files"][0]["file"], json!("t.csv"));
        assert_eq!(m["files"][0]["config"]["k"], json!(1));
        assert!(tmp.path().join("t.csv").exists());
    }
}
