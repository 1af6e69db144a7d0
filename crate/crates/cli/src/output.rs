use std::io::Write;
use std::path::Path;

use cia_core::rng::RNG_ALGORITHM;
use serde::Serialize;
use serde_json::Value;

use crate::CliError;

pub const TOOL: &str = "cia-sim";

/// Reproducibility header embedded in every output.
#[derive(Clone, Debug, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub rng: &'static str,
    pub seed: Option<u64>,
    pub config: Value,
}

impl Meta {
    pub fn new(seed: Option<u64>, config: Value) -> Self {
        Self {
            tool: TOOL,
            version: env!("CARGO_PKG_VERSION"),
            rng: RNG_ALGORITHM,
            seed,
            config,
        }
    }

    /// `#`-prefixed lines for a CSV header.
    pub fn comment_lines(&self) -> String {
        let seed = self
            .seed
            .map_or_else(|| "none".to_string(), |s| s.to_string());
        format!(
            "# tool={} version={}\n# rng={}\n# seed={}\n# config={}\n",
            self.tool, self.version, self.rng, seed, self.config
        )
    }
}

/// `{"meta": ..., <fields of body>}`; non-object bodies go under `"result"`.
pub fn with_meta<T: Serialize>(meta: &Meta, body: &T) -> Result<Value, CliError> {
    let mut out = serde_json::Map::new();
    out.insert(
        "meta".into(),
        serde_json::to_value(meta).map_err(CliError::internal)?,
    );
    match serde_json::to_value(body).map_err(CliError::internal)? {
        Value::Object(map) => out.extend(map),
        other => {
            out.insert("result".into(), other);
        }
    }
    Ok(Value::Object(out))
}

pub fn json_bytes(value: &Value) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(CliError::internal)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Renders a CSV document: the meta comment lines, any extra comments,
/// then the header and rows with LF line endings.
pub fn csv_bytes(
    meta: &Meta,
    comments: &[String],
    header: &[String],
    rows: &[Vec<String>],
) -> Result<Vec<u8>, CliError> {
    let mut buf = meta.comment_lines().into_bytes();
    for c in comments {
        buf.extend_from_slice(format!("# {c}\n").as_bytes());
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(buf);
    w.write_record(header).map_err(CliError::internal)?;
    for row in rows {
        w.write_record(row).map_err(CliError::internal)?;
    }
    w.into_inner()
        .map_err(|e| CliError::internal(e.into_error()))
}

/// Writes to `path` through a temporary file in the same directory and an
/// atomic rename, or to standard output when `path` is absent.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes).map_err(CliError::io)?;
            out.flush().map_err(CliError::io)
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(CliError::io)?;
            tmp.write_all(bytes).map_err(CliError::io)?;
            tmp.as_file().sync_all().map_err(CliError::io)?;
            tmp.persist(path).map_err(|e| CliError::io(e.error))?;
            Ok(())
        }
    }
}

/// Shortest round-tripping decimal; `NaN`, `inf` and empty for missing.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map_or_else(String::new, num)
}
