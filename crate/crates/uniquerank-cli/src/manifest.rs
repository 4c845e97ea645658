//! Run manifests. Every output file opens with `# key = value` lines naming
//! the tool version, full configuration, and SHA-256 digests of the inputs,
//! plus a `reproduce` line holding the arguments (outputs excluded) that
//! regenerate the file byte for byte.

use std::fmt::Display;
use std::path::Path;

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};
use uniquerank::MetaHeader;

pub struct Manifest {
    header: MetaHeader,
    reproduce: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        let mut header = MetaHeader::new();
        header.push("tool", format!("uniquerank {}", env!("CARGO_PKG_VERSION")));
        header.push("command", command);
        Manifest {
            header,
            reproduce: vec![command.to_string()],
        }
    }

    pub fn set(&mut self, key: &str, value: impl Display) {
        self.header.push(key, value.to_string());
    }

    /// Records the SHA-256 of an input file under `key`.
    pub fn digest(&mut self, key: &str, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path)
            .with_context(|| format!("reading {} for its digest", path.display()))?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        self.header.push(key, format!("{:x}", hasher.finalize()));
        Ok(())
    }

    /// Appends arguments to the reproduce line. Output paths must not be
    /// added: replaying into a fresh location has to give identical bytes.
    pub fn args<I, S>(&mut self, args: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.reproduce.extend(args.into_iter().map(Into::into));
    }

    pub fn finish(mut self) -> MetaHeader {
        let line = self
            .reproduce
            .iter()
            .map(|a| quote(a))
            .collect::<Vec<_>>()
            .join(" ");
        self.header.push("reproduce", line);
        self.header
    }
}

/// Shell-style quoting for arguments that contain whitespace or quotes.
fn quote(arg: &str) -> String {
    if !arg.is_empty() && !arg.chars().any(|c| c.is_whitespace() || c == '"') {
        return arg.to_string();
    }
    let escaped = arg.replace('\\', "\\\\").replace('"', "\\\"");
    format!("\"{escaped}\"")
}
