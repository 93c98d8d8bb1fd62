// Copyright 2026 The discsteer Authors
// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::Failure;

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    config: &'a RunConfig,
    inputs: &'a BTreeMap<String, String>,
    input_hash: String,
    outputs: &'a BTreeMap<String, String>,
}

/// Output directory that records the hash of every file it writes.
pub struct OutDir {
    root: PathBuf,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, Failure> {
        std::fs::create_dir_all(root)
            .map_err(|e| Failure::usage(format!("cannot create {}: {e}", root.display())))?;
        Ok(Self {
            root: root.to_path_buf(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        })
    }

    /// Read an input file and record its hash.
    pub fn read_input(&mut self, path: &Path) -> Result<String, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
        self.inputs
            .insert(path.display().to_string(), sha256_hex(text.as_bytes()));
        Ok(text)
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), Failure> {
        let path = self.root.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| Failure::numeric(format!("cannot write {}: {e}", path.display())))?;
        self.outputs
            .insert(name.to_string(), sha256_hex(contents.as_bytes()));
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(value)
            .map_err(|e| Failure::numeric(format!("cannot serialize {name}: {e}")))?;
        self.write(name, &(text + "\n"))
    }

    /// Write `manifest.json` echoing the effective config and all hashes.
    pub fn finish(self, command: &str, config: &RunConfig) -> Result<(), Failure> {
        let config_json = serde_json::to_string(config).expect("config serializes");
        let mut h = Sha256::new();
        h.update(config_json.as_bytes());
        for (name, hash) in &self.inputs {
            h.update(name.as_bytes());
            h.update(hash.as_bytes());
        }
        let manifest = Manifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            config,
            inputs: &self.inputs,
            input_hash: format!("{:x}", h.finalize()),
            outputs: &self.outputs,
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        std::fs::write(self.root.join("manifest.json"), text + "\n")
            .map_err(|e| Failure::numeric(format!("cannot write manifest: {e}")))
    }
}
