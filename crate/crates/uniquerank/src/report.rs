//! Report header rendering and atomic file output shared by all exporters.

use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Ordered `key = value` metadata echoed at the top of every output file as
/// `#`-prefixed comment lines, so any report is self-describing.
#[derive(Debug, Clone, Default)]
pub struct MetaHeader {
    entries: Vec<(String, String)>,
}

impl MetaHeader {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str("# ");
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }
}

/// Writes `content` to `path` through a temp file in the same directory plus
/// a rename, so readers never observe a partial file.
pub fn write_atomic(path: impl AsRef<Path>, content: &str) -> Result<()> {
    let path = path.as_ref();
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or_else(|| Path::new(".")))
        .map_err(|source| Error::Write {
            path: path.to_path_buf(),
            source,
        })?;
    tmp.write_all(content.as_bytes()).map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })?;
    tmp.persist(path).map_err(|e| Error::Write {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_renders_in_insertion_order() {
        let mut h = MetaHeader::new();
        h.push("alpha", 0.5);
        h.push("mode", "min_max");
        assert_eq!(h.render(), "# alpha = 0.5\n# mode = min_max\n");
    }

    #[test]
    fn atomic_write_replaces_existing_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, "first\n").unwrap();
        write_atomic(&path, "second\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "second\n");
    }
}
