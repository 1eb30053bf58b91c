//! Stable artifact serialization: every number is rounded to 9 significant
//! digits before formatting, so identical runs produce byte-identical
//! files and cross-platform diffs stay clean.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// Rounds to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let mag = x.abs().log10().floor() as i32;
    let scale = 10f64.powi(digits - 1 - mag);
    (x * scale).round() / scale
}

/// Formats a float at 9 significant digits, shortest form.
pub fn fmt_f64(x: f64) -> String {
    format!("{}", round_sig(x, 9))
}

/// A JSON number at 9 significant digits (`null` if non-finite).
pub fn json_f64(x: f64) -> serde_json::Value {
    serde_json::Number::from_f64(round_sig(x, 9))
        .map(serde_json::Value::Number)
        .unwrap_or(serde_json::Value::Null)
}

/// Quotes a CSV field only when it needs it.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Builds delimited text line by line.
#[derive(Default)]
pub struct Csv {
    buf: String,
}

impl Csv {
    /// Empty document.
    pub fn new() -> Self {
        Csv::default()
    }

    /// Appends one row.
    pub fn row<I, S>(&mut self, fields: I) -> &mut Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut first = true;
        for f in fields {
            if !first {
                self.buf.push(',');
            }
            let _ = write!(self.buf, "{}", csv_field(f.as_ref()));
            first = false;
        }
        self.buf.push('\n');
        self
    }

    /// The finished document.
    pub fn finish(self) -> String {
        self.buf
    }
}

/// `base` with its extension replaced.
pub fn with_ext(base: &Path, ext: &str) -> PathBuf {
    base.with_extension(ext)
}

/// `base` with a suffix appended to the stem and the given extension.
pub fn with_suffix(base: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = base.file_stem().unwrap_or_default().to_string_lossy();
    base.with_file_name(format!("{stem}{suffix}.{ext}"))
}

/// Writes `content` to `path`, creating parent directories.
pub fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)
                .with_context(|| format!("cannot create {}", dir.display()))?;
        }
    }
    std::fs::write(path, content).with_context(|| format!("cannot write {}", path.display()))
}

/// Writes to the output base (with the given extension) or to stdout.
pub fn emit(out: Option<&Path>, ext: &str, content: &str) -> Result<()> {
    match out {
        Some(base) => write_file(&with_ext(base, ext), content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Serializes a JSON value with a trailing newline.
pub fn json_doc(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("static structure");
    s.push('\n');
    s
}
