//! Artifact writers. Every file starts with the same header block so that
//! any output can be traced back to its configuration and seed.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use crate::config::Config;

pub struct Artifacts {
    dir: PathBuf,
    header: String,
}

impl Artifacts {
    pub fn new(config: &Config) -> std::io::Result<Artifacts> {
        let dir = PathBuf::from(config.out_dir());
        fs::create_dir_all(&dir)?;
        let header = format!(
            "# experiment = {}\n# config_hash = {}\n# seed = {}\n# version = riccati {}\n",
            config.experiment,
            config.hash(),
            config.seed().unwrap_or(1),
            env!("CARGO_PKG_VERSION"),
        );
        Ok(Artifacts { dir, header })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Write a file with the standard header followed by `body`.
    pub fn write(&self, name: &str, body: &str) -> std::io::Result<PathBuf> {
        let path = self.path(name);
        let mut f = fs::File::create(&path)?;
        f.write_all(self.header.as_bytes())?;
        f.write_all(body.as_bytes())?;
        Ok(path)
    }
}

/// Render a CSV body: header row plus rows of already-formatted fields.
pub fn csv(header: &str, rows: &[Vec<String>]) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_histogram(
    artifacts: &Artifacts,
    name: &str,
    measure: &riccati::srb::EmpiricalMeasure,
) -> std::io::Result<PathBuf> {
    let rows: Vec<Vec<String>> = measure
        .rows()
        .into_iter()
        .map(|(x, y, a, b, w)| {
            vec![
                x.to_string(),
                y.to_string(),
                a.to_string(),
                b.to_string(),
                w.to_string(),
            ]
        })
        .collect();
    artifacts.write(name, &csv("x_cell,y_cell,angle_cell,band,weight", &rows))
}

