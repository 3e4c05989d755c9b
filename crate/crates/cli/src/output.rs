use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

/// Output directory plus the manifest accumulated during one run.
pub struct Run {
    dir: PathBuf,
    subcommand: &'static str,
    params: Value,
    backend: &'static str,
    extra: serde_json::Map<String, Value>,
    files: Vec<String>,
    start: Instant,
}

impl Run {
    pub fn new(dir: &Path, subcommand: &'static str, params: Value, backend: &'static str) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Run {
            dir: dir.to_path_buf(),
            subcommand,
            params,
            backend,
            extra: serde_json::Map::new(),
            files: Vec::new(),
            start: Instant::now(),
        })
    }

    /// Record an extra manifest field (system name, snapped direction, ...).
    pub fn note(&mut self, key: &str, value: impl Serialize) {
        self.extra
            .insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn csv<F>(&mut self, name: &str, header: &str, body: F) -> io::Result<()>
    where
        F: FnOnce(&mut dyn Write) -> io::Result<()>,
    {
        let mut out = BufWriter::new(File::create(self.dir.join(name))?);
        writeln!(out, "{header}")?;
        body(&mut out)?;
        out.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> io::Result<()> {
        let mut out = BufWriter::new(File::create(self.dir.join(name))?);
        serde_json::to_writer_pretty(&mut out, value)?;
        writeln!(out)?;
        out.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn finish(self) -> io::Result<()> {
        let mut manifest = json!({
            "subcommand": self.subcommand,
            "params": self.params,
            "backend": self.backend,
            "version": env!("CARGO_PKG_VERSION"),
            "wall_time_s": self.start.elapsed().as_secs_f64(),
            "files": self.files,
        });
        if let Value::Object(m) = &mut manifest {
            m.extend(self.extra);
        }
        let mut out = BufWriter::new(File::create(self.dir.join("manifest.json"))?);
        serde_json::to_writer_pretty(&mut out, &manifest)?;
        writeln!(out)?;
        out.flush()
    }
}
