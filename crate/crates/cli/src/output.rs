use std::io::Write;
use std::path::Path;

use zenokit::formats::{json_array, JsonObject};
use zenokit::{Error, Result, FORMAT_VERSION};

/// Files produced by one run, held in memory until everything has been
/// computed.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, String)>,
}

impl Outputs {
    pub fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    /// Write every file plus `manifest.json` into `dir`. Each file goes to a
    /// temporary in the same directory first and is renamed into place, so
    /// no reader ever sees a partial file.
    pub fn write(mut self, dir: &Path, command: &str, seed: Option<u64>) -> Result<()> {
        let io = |e: std::io::Error, p: &Path| Error::Io {
            path: p.to_path_buf(),
            message: e.to_string(),
        };
        let names: Vec<String> = self
            .names()
            .map(|n| serde_json::Value::from(n).to_string())
            .collect();
        let mut manifest = JsonObject::new();
        manifest
            .str("version", FORMAT_VERSION)
            .str("command", command);
        if let Some(s) = seed {
            manifest.raw("seed", s.to_string());
        }
        manifest.raw("files", json_array(&names, 1));
        self.add("manifest.json", manifest.finish(0) + "\n");

        std::fs::create_dir_all(dir).map_err(|e| io(e, dir))?;
        for (name, contents) in &self.files {
            let dest = dir.join(name);
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io(e, dir))?;
            tmp.write_all(contents.as_bytes()).map_err(|e| io(e, &dest))?;
            tmp.as_file().sync_all().map_err(|e| io(e, &dest))?;
            tmp.persist(&dest).map_err(|e| io(e.error, &dest))?;
        }
        Ok(())
    }
}
