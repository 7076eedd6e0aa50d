//! Output plumbing: 9-significant-digit formatting, provenance headers and
//! file-or-stdout writing.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde_json::{json, Map, Value};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Formats with 9 significant digits; NaN becomes the empty string so
/// unstable sweep cells render as empty CSV columns.
pub fn fmt9(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:.8e}")
    }
}

/// Rounds to 9 significant digits for JSON output.
pub fn sig9(x: f64) -> f64 {
    if x.is_finite() {
        format!("{x:.8e}").parse().unwrap()
    } else {
        x
    }
}

/// Resolved-run metadata echoed into every output.
pub struct Provenance {
    pub command: String,
    pub config: Value,
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn new(command: &str, config: Value, seed: Option<u64>) -> Self {
        Provenance {
            command: command.to_string(),
            config,
            seed,
        }
    }

    /// `#`-prefixed comment lines for the top of a CSV file.
    pub fn csv_header(&self) -> String {
        let mut s = format!("# momentum-lab {VERSION}\n# command: {}\n", self.command);
        s.push_str(&format!("# config: {}\n", self.config));
        if let Some(seed) = self.seed {
            s.push_str(&format!("# seed: {seed}\n"));
        }
        s
    }

    pub fn json(&self) -> Value {
        let mut m = Map::new();
        m.insert("version".into(), json!(VERSION));
        m.insert("command".into(), json!(self.command));
        m.insert("config".into(), self.config.clone());
        if let Some(seed) = self.seed {
            m.insert("seed".into(), json!(seed));
        }
        Value::Object(m)
    }
}

/// Wraps a payload with its provenance and pretty-prints to stdout.
pub fn print_json(provenance: &Provenance, payload: Value) {
    let doc = json!({ "provenance": provenance.json(), "result": payload });
    println!("{}", serde_json::to_string_pretty(&doc).unwrap());
}

/// Writes to the given path, or stdout when no path is given.
pub fn write_text(path: Option<&Path>, content: &str) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, content),
        None => io::stdout().write_all(content.as_bytes()),
    }
}
