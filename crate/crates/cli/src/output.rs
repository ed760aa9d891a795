//! Output directory bookkeeping: CSV series, JSON reports, checkpoints and
//! run metadata.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use bardina::checkpoint::write_checkpoint;
use bardina::{PhysParams, VectorField64};
use serde::Serialize;

/// Shortest round-trip representation, so reruns are byte-identical.
pub fn fmt_float(x: f64) -> String {
    format!("{x:e}")
}

/// Outcome of one check. `max_slack` is the worst (smallest) margin by
/// which the checked inequality held; negative means violated.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub check_name: String,
    pub params: PhysParams<f64>,
    pub pass: bool,
    pub max_slack: f64,
    pub series_file: Option<String>,
    pub details: serde_json::Value,
}

pub struct Artifacts {
    dir: PathBuf,
    files: Vec<String>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    fn claim(&mut self, name: &str) -> PathBuf {
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        self.dir.join(name)
    }

    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> std::io::Result<()>
    where
        I: IntoIterator<Item = Vec<f64>>,
    {
        let path = self.claim(name);
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.into_iter().map(fmt_float))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn json<S: Serialize>(&mut self, name: &str, value: &S) -> std::io::Result<()> {
        let path = self.claim(name);
        let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
        text.push('\n');
        fs::write(path, text)
    }

    pub fn text(&mut self, name: &str, body: &str) -> std::io::Result<()> {
        let path = self.claim(name);
        fs::write(path, body)
    }

    pub fn checkpoint(
        &mut self,
        name: &str,
        u: &VectorField64,
        params: &PhysParams<f64>,
        time: f64,
    ) -> Result<(), bardina::Error> {
        let path = self.claim(name);
        write_checkpoint(BufWriter::new(File::create(path)?), u, params, time)
    }
}

#[derive(Serialize)]
pub struct Metadata<'a> {
    pub version: &'a str,
    pub subcommand: &'a str,
    pub config_sha256: String,
    pub threads: usize,
    pub timestamp_unix: u64,
    pub outputs: Vec<String>,
}
