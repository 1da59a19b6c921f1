//! Run manifests: every artifact embeds the command, its resolved
//! parameters, the global seed, and digests of its input files, so a rerun
//! from the same manifest reproduces the artifact byte for byte.

use std::path::Path;

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

pub struct Manifest {
    map: Map<String, Value>,
    parameters: Map<String, Value>,
    inputs: Vec<Value>,
}

impl Manifest {
    /// Thread count is deliberately not recorded: results never depend on
    /// it, and artifacts must compare equal across thread settings.
    pub fn new(command: &str, seed: u64, format: &str, timing: &str) -> Self {
        let mut map = Map::new();
        map.insert("tool".into(), Value::from("relik"));
        map.insert("version".into(), Value::from(env!("CARGO_PKG_VERSION")));
        map.insert("command".into(), Value::from(command));
        map.insert("seed".into(), Value::from(seed));
        map.insert("format".into(), Value::from(format));
        map.insert("timing".into(), Value::from(timing));
        Manifest { map, parameters: Map::new(), inputs: Vec::new() }
    }

    pub fn parameter(&mut self, key: &str, value: impl Into<Value>) {
        self.parameters.insert(key.to_owned(), value.into());
    }

    pub fn input(&mut self, role: &str, path: &Path, contents: &[u8]) {
        let mut entry = Map::new();
        entry.insert("role".into(), Value::from(role));
        entry.insert("path".into(), Value::from(path.display().to_string()));
        let digest = Sha256::digest(contents);
        entry.insert("sha256".into(), Value::from(format!("{digest:x}")));
        self.inputs.push(Value::Object(entry));
    }

    pub fn finish(mut self) -> Value {
        self.map.insert("parameters".into(), Value::Object(self.parameters));
        self.map.insert("inputs".into(), Value::Array(self.inputs));
        Value::Object(self.map)
    }
}
