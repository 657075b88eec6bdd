use std::fs;
use std::path::{Path, PathBuf};

use mvnn_core::Bundle;
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Reads a `bundle_bits,value` dataset. A header row is optional; blank lines and lines
/// starting with `#` are skipped. Every bundle must have the same number of items.
pub fn read_dataset(path: &Path) -> CliResult<Vec<(Bundle, f64)>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_dataset(&text, path)
}

pub fn parse_dataset(text: &str, path: &Path) -> CliResult<Vec<(Bundle, f64)>> {
    let err = |line: usize, message: String| CliError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut rows = Vec::new();
    let mut items = None;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = s.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(err(line, format!("expected 2 fields `bundle_bits,value`, found {}", fields.len())));
        }
        if rows.is_empty() && items.is_none() && fields[0] == "bundle_bits" {
            continue;
        }
        let bundle: Bundle = fields[0]
            .parse()
            .map_err(|e| err(line, format!("bad bundle `{}`: {e}", fields[0])))?;
        let value: f64 = fields[1]
            .parse()
            .map_err(|_| err(line, format!("bad value `{}`", fields[1])))?;
        if !value.is_finite() {
            return Err(err(line, format!("value must be finite, got {value}")));
        }
        match items {
            None => items = Some(bundle.len()),
            Some(m) if m != bundle.len() => {
                return Err(err(line, format!("bundle has {} items, earlier rows have {m}", bundle.len())));
            }
            _ => {}
        }
        rows.push((bundle, value));
    }
    if rows.is_empty() {
        return Err(err(0, "dataset has no rows".into()));
    }
    Ok(rows)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

/// The output directory of one command invocation.
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(OutDir {
            root: root.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write_text(&self, name: &str, text: &str) -> CliResult<PathBuf> {
        let p = self.path(name);
        if let Some(dir) = p.parent() {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        fs::write(&p, text).map_err(|e| CliError::io(&p, e))?;
        Ok(p)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<PathBuf> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
        text.push('\n');
        self.write_text(name, &text)
    }

    pub fn write_csv<T: Serialize>(&self, name: &str, rows: &[T]) -> CliResult<PathBuf> {
        let p = self.path(name);
        let mut w = csv::Writer::from_path(&p).map_err(|e| csv_error(&p, e))?;
        for r in rows {
            w.serialize(r).map_err(|e| csv_error(&p, e))?;
        }
        w.flush().map_err(|e| CliError::io(&p, e))?;
        Ok(p)
    }

    /// Writes rows with an explicit header, for tables whose width is only known at run time.
    pub fn write_records(&self, name: &str, header: &[String], rows: &[Vec<String>]) -> CliResult<PathBuf> {
        let p = self.path(name);
        let mut w = csv::Writer::from_path(&p).map_err(|e| csv_error(&p, e))?;
        w.write_record(header).map_err(|e| csv_error(&p, e))?;
        for r in rows {
            w.write_record(r).map_err(|e| csv_error(&p, e))?;
        }
        w.flush().map_err(|e| CliError::io(&p, e))?;
        Ok(p)
    }
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::io(path, source),
        other => CliError::Internal(format!("{}: {other:?}", path.display())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_and_without_header() {
        let p = Path::new("d.csv");
        let a = parse_dataset("bundle_bits,value\n101,2.5\n\n# note\n000,0\n", p).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a[0].0, "101".parse().unwrap());
        let b = parse_dataset("11,1\n01,0.5", p).unwrap();
        assert_eq!(b[1].1, 0.5);
    }

    #[test]
    fn reports_line_numbers() {
        let p = Path::new("d.csv");
        let cases = [
            ("bundle_bits,value\n101,2\n10x,1\n", 3),
            ("101,2\n101\n", 2),
            ("101,2\n11,1\n", 2),
            ("101,abc\n", 1),
        ];
        for (text, line) in cases {
            match parse_dataset(text, p) {
                Err(CliError::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
    }
}
