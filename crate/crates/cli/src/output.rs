//! Output files. Every file carries the toolkit version and the config hash.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::Failure;

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    toolkit: &'static str,
    version: &'static str,
    config_hash: &'a str,
    #[serde(flatten)]
    payload: &'a T,
}

pub struct Writer {
    pub dir: PathBuf,
    pub hash: String,
    pub verbose: bool,
    pub written: Vec<PathBuf>,
}

impl Writer {
    pub fn new(dir: impl AsRef<Path>, hash: String, verbose: bool) -> Self {
        Self { dir: dir.as_ref().to_path_buf(), hash, verbose, written: Vec::new() }
    }

    fn path(&mut self, name: &str) -> Result<PathBuf, Failure> {
        std::fs::create_dir_all(&self.dir).map_err(|e| Failure::Config(format!("cannot create {}: {e}", self.dir.display())))?;
        let p = self.dir.join(name);
        self.written.push(p.clone());
        Ok(p)
    }

    fn save(&mut self, name: &str, text: &str) -> Result<(), Failure> {
        let p = self.path(name)?;
        std::fs::write(&p, text).map_err(|e| Failure::Config(format!("cannot write {}: {e}", p.display())))?;
        self.log(&format!("wrote {}", p.display()));
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, payload: &T) -> Result<(), Failure> {
        let env = Envelope { toolkit: "mkdv-nzbc", version: mkdv_nzbc::VERSION, config_hash: &self.hash, payload };
        let mut text = serde_json::to_string_pretty(&env).map_err(|e| Failure::Numerical(e.to_string()))?;
        text.push('\n');
        self.save(name, &text)
    }

    /// Comment lines for the text formats.
    pub fn header(&self) -> Vec<String> {
        vec![format!("mkdv-nzbc {}", mkdv_nzbc::VERSION), format!("config_hash {}", self.hash)]
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<(), Failure> {
        self.save(name, body)
    }

    pub fn log(&self, msg: &str) {
        if self.verbose {
            eprintln!("{msg}");
        }
    }
}

/// File-name tag for a time value, e.g. 0.1 -> "t0.1".
pub fn t_tag(t: f64) -> String {
    format!("t{t}")
}
