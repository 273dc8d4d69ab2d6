use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use serde_json::{Number, Value};
use sha2::{Digest, Sha256};

use super::CliError;

/// Which files a command writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Both,
}

impl Format {
    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }

    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }
}

/// 17 significant digits, so every value round-trips.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn canonical(value: Value) -> Value {
    match value {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
            let x = n.as_f64().expect("JSON number is finite");
            Value::Number(Number::from_str(&fmt_f64(x)).expect("formatted float is a JSON number"))
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonical).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, canonical(v))).collect()),
        other => other,
    }
}

/// Pretty JSON with sorted keys, floats in `{:.16e}` and a trailing newline.
/// Non-finite floats become `null`.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let v = canonical(serde_json::to_value(value).map_err(CliError::io)?);
    let mut text = serde_json::to_string_pretty(&v).map_err(CliError::io)?;
    text.push('\n');
    Ok(text)
}

/// Hex SHA-256 of the compact canonical JSON of `value`.
pub fn config_hash<T: Serialize>(value: &T) -> Result<String, CliError> {
    let v = canonical(serde_json::to_value(value).map_err(CliError::io)?);
    let text = serde_json::to_string(&v).map_err(CliError::io)?;
    Ok(hex::encode(Sha256::digest(text.as_bytes())))
}

/// CSV text with a header row and LF line endings.
pub fn to_csv(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(CliError::io)?;
    for row in rows {
        w.write_record(row).map_err(CliError::io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub tool_version: String,
    pub outputs: Vec<String>,
}

/// Collects output files and writes them together with `manifest.json`.
pub struct OutputSet {
    dir: PathBuf,
    files: Vec<(String, String)>,
}

impl OutputSet {
    pub fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf(), files: Vec::new() }
    }

    pub fn add(&mut self, name: &str, content: String) {
        self.files.push((name.to_string(), content));
    }

    pub fn write<C: Serialize>(self, command: &str, config: &C, seed: u64) -> Result<(), CliError> {
        std::fs::create_dir_all(&self.dir).map_err(CliError::io)?;
        let manifest = RunManifest {
            command: command.to_string(),
            config_hash: config_hash(config)?,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: self.files.iter().map(|(n, _)| n.clone()).collect(),
        };
        for (name, content) in &self.files {
            std::fs::write(self.dir.join(name), content).map_err(CliError::io)?;
        }
        std::fs::write(self.dir.join("manifest.json"), to_json(&manifest)?).map_err(CliError::io)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 2.0, -7.25e10, f64::MIN_POSITIVE] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
    }

    #[test]
    fn json_is_sorted_and_formatted() {
        #[derive(Serialize)]
        struct S {
            zeta: f64,
            alpha: usize,
            mid: Vec<f64>,
            gone: f64,
        }
        let text = to_json(&S { zeta: 0.5, alpha: 3, mid: vec![2.0], gone: f64::NAN }).unwrap();
        assert_eq!(
            text,
            "{\n  \"alpha\": 3,\n  \"gone\": null,\n  \"mid\": [\n    2.0000000000000000e+0\n  ],\n  \"zeta\": 5.0000000000000000e-1\n}\n"
        );
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["zeta"].as_f64(), Some(0.5));
    }

    #[test]
    fn csv_uses_lf_and_quotes() {
        let text = to_csv(&["a", "b"], &[vec!["1".into(), "x,y".into()]]).unwrap();
        assert_eq!(text, "a,b\n1,\"x,y\"\n");
    }

    #[test]
    fn hash_is_stable() {
        let a = config_hash(&serde_json::json!({"b": 1, "a": 0.25})).unwrap();
        let b = config_hash(&serde_json::json!({"a": 0.25, "b": 1})).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 64);
    }
}
