use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::failure::Failure;

/// Artifact directory. JSON is written pretty-printed with sorted keys.
pub struct Output {
    dir: PathBuf,
    written: Vec<String>,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self, Failure> {
        fs::create_dir_all(dir)?;
        Ok(Output { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn csv(&mut self, name: &str, body: &str) -> Result<(), Failure> {
        debug_assert!(!body.contains('\r'));
        fs::write(self.dir.join(name), body)?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        let text = to_sorted_json(value)?;
        fs::write(self.dir.join(name), text + "\n")?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }
}

pub fn to_sorted_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    // serde_json's default map is ordered, so routing through Value sorts keys
    let v: Value = serde_json::to_value(value).map_err(|e| Failure::Io(e.to_string()))?;
    serde_json::to_string_pretty(&v).map_err(|e| Failure::Io(e.to_string()))
}
