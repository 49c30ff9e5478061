use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// SHA-256 over the input file contents and the effective parameters.
/// Each file is framed by its byte length so that concatenations cannot
/// collide; paths are not hashed, only contents.
#[derive(Debug, Default)]
pub struct InputsDigest {
    hasher: Sha256,
}

impl InputsDigest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn file(&mut self, bytes: &[u8]) -> &mut Self {
        self.hasher.update(b"file\0");
        self.hasher.update((bytes.len() as u64).to_le_bytes());
        self.hasher.update(bytes);
        self
    }

    pub fn read_file(&mut self, path: &Path) -> CliResult<&mut Self> {
        let bytes = std::fs::read(path).map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
        Ok(self.file(&bytes))
    }

    pub fn params(&mut self, params: &impl Serialize) -> CliResult<&mut Self> {
        let json = serde_json::to_vec(params)?;
        self.hasher.update(b"params\0");
        self.hasher.update((json.len() as u64).to_le_bytes());
        self.hasher.update(&json);
        Ok(self)
    }

    pub fn finish(&self) -> String {
        hex::encode(self.hasher.clone().finalize())
    }
}

/// `{"version", "command", "inputs_digest", ...body}`.
#[derive(Debug, Serialize)]
pub struct Report<'a, B: Serialize> {
    pub version: &'static str,
    pub command: &'a str,
    pub inputs_digest: String,
    #[serde(flatten)]
    pub body: B,
}

impl<'a, B: Serialize> Report<'a, B> {
    pub fn new(command: &'a str, digest: &InputsDigest, body: B) -> Self {
        Self { version: VERSION, command, inputs_digest: digest.finish(), body }
    }

    pub fn to_json(&self) -> CliResult<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// The output directory, created on first write.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn new(root: PathBuf) -> Self {
        Self { root, written: Vec::new() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> CliResult<PathBuf> {
        std::fs::create_dir_all(&self.root)
            .map_err(|e| CliError::data(format!("cannot create output directory {}: {e}", self.root.display())))?;
        let path = self.root.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}
