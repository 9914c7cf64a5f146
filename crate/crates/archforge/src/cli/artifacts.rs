//! Run artifact handling: results land in an output directory as
//! manifest.json + results.csv + curves/*.csv, and a failed run removes
//! whatever it had already written.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::network::{save_network, AnyNetwork};

pub struct ArtifactWriter {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl ArtifactWriter {
    pub fn new(dir: &Path) -> Result<ArtifactWriter> {
        fs::create_dir_all(dir)?;
        Ok(ArtifactWriter {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    /// Writes a file under the run directory, creating subdirectories.
    pub fn write(&mut self, relative: &str, contents: String) -> Result<()> {
        let path = self.dir.join(relative);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, contents)?;
        self.written.push(path);
        Ok(())
    }

    /// Saves the trained network as `model.bin` with its seed lineage.
    pub fn save_network(&mut self, net: &AnyNetwork, seed: u64) -> Result<()> {
        let path = self.dir.join("model.bin");
        save_network(net, Some(vec![seed]), &path)?;
        self.written.push(path);
        Ok(())
    }

    /// Writes `manifest.json` (pretty-printed).
    pub fn manifest(&mut self, value: serde_json::Value) -> Result<()> {
        let mut text = serde_json::to_string_pretty(&value)?;
        text.push('\n');
        self.write("manifest.json", text)
    }

    /// On error, removes every file written so far and propagates the error.
    pub fn finish(self, outcome: Result<()>) -> Result<()> {
        if outcome.is_err() {
            for path in &self.written {
                let _ = fs::remove_file(path);
            }
            let _ = fs::remove_dir(self.dir.join("curves"));
            let _ = fs::remove_dir(&self.dir);
        }
        outcome
    }
}
