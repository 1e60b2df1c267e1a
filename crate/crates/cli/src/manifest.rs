//! Run manifests: every command records what it read, with content hashes,
//! what it was asked to do, and what it wrote. No timestamps, so a rerun
//! with identical inputs produces an identical manifest.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use nvtrack::error::Result;
use nvtrack::io::write_atomic;

pub struct Manifest {
    command: &'static str,
    params: Vec<(String, String)>,
    inputs: Vec<(String, String)>,
    outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &'static str) -> Manifest {
        Manifest { command, params: Vec::new(), inputs: Vec::new(), outputs: Vec::new() }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    pub fn param_opt(&mut self, key: &str, value: Option<impl ToString>) -> &mut Self {
        if let Some(v) = value {
            self.param(key, v);
        }
        self
    }

    /// Records an input path with the SHA-256 of its current contents.
    pub fn input(&mut self, path: &Path) -> Result<&mut Self> {
        let bytes = std::fs::read(path)?;
        let digest = Sha256::digest(&bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.inputs.push((path.display().to_string(), hex));
        Ok(self)
    }

    pub fn inputs(&mut self, paths: &[PathBuf]) -> Result<&mut Self> {
        for p in paths {
            self.input(p)?;
        }
        Ok(self)
    }

    pub fn output(&mut self, name: &str) -> &mut Self {
        self.outputs.push(name.to_string());
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("command = {}\n", self.command));
        out.push_str(&format!("version = {}\n", env!("CARGO_PKG_VERSION")));
        let mut params = self.params.clone();
        params.sort();
        for (k, v) in &params {
            out.push_str(&format!("param.{k} = {v}\n"));
        }
        for (path, hash) in &self.inputs {
            out.push_str(&format!("input.sha256.{path} = {hash}\n"));
        }
        for name in &self.outputs {
            out.push_str(&format!("output.{name} =\n"));
        }
        out
    }

    /// Writes `manifest_<command>.txt` into the output directory.
    pub fn write(&self, out_dir: &Path) -> Result<()> {
        let path = out_dir.join(format!("manifest_{}.txt", self.command));
        write_atomic(&path, &self.render())
    }
}
