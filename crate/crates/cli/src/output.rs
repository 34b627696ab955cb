//! Artifact writers. Files are written to a temporary sibling and renamed
//! into place, so a failed run never leaves a truncated output behind.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;

/// Writes `bytes` to `path` atomically, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| CliError::io("<stdout>", e))
        }
        Some(p) => write_atomic(p, bytes),
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let shown = path.display().to_string();
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(&shown, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(&shown, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(&shown, e))?;
    tmp.persist(path).map_err(|e| CliError::io(&shown, e.error))?;
    Ok(())
}

/// CSV with a header row and LF line endings.
pub fn csv_bytes<R: AsRef<[u8]>>(header: &[&str], rows: impl IntoIterator<Item = Vec<R>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| CliError::io("<csv buffer>", e.into_error()))
}

#[derive(Serialize)]
struct Versioned<'a, T> {
    schema: u32,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON wrapped with a schema version, newline terminated.
pub fn json_bytes<T: Serialize>(body: &T) -> Result<Vec<u8>, CliError> {
    let mut v = serde_json::to_vec_pretty(&Versioned { schema: 1, body })?;
    v.push(b'\n');
    Ok(v)
}

/// Reads a `T,N` table as written by `pack-count`.
pub fn read_count_csv(path: &Path) -> Result<Vec<(f64, u64)>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path.display().to_string(), io),
        other => CliError::Config(format!("{}: {other:?}", path.display())),
    })?;
    let headers = r.headers()?.clone();
    if headers.len() < 2 || &headers[0] != "T" || &headers[1] != "N" {
        return Err(CliError::Config(format!("{}: expected header T,N", path.display())));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let parse_err = |f: &str| CliError::Config(format!("{}: bad value {f:?}", path.display()));
        let t: f64 = rec[0].trim().parse().map_err(|_| parse_err(&rec[0]))?;
        let n: u64 = rec[1].trim().parse().map_err(|_| parse_err(&rec[1]))?;
        out.push((t, n));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_lf_and_header() {
        let b = csv_bytes(&["T", "N"], vec![vec!["1".to_string(), "2".to_string()]]).unwrap();
        assert_eq!(b, b"T,N\n1,2\n");
    }

    #[test]
    fn json_carries_schema() {
        #[derive(Serialize)]
        struct X {
            a: i32,
        }
        let v: serde_json::Value = serde_json::from_slice(&json_bytes(&X { a: 3 }).unwrap()).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["a"], 3);
    }

    #[test]
    fn atomic_write_replaces_whole_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        write_atomic(&p, b"old contents that are long\n").unwrap();
        write_atomic(&p, b"new\n").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"new\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
