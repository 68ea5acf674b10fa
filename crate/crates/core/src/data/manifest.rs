//! Domain manifests.
//!
//! One directive per line, `#` starts a comment:
//!
//! ```text
//! dim = 2
//! source = books.sv sparse_sv labeled
//! source = dvd.sv sparse_sv labeled
//! target = kitchen.sv sparse_sv labeled
//! ```
//!
//! Entries are `<role> = <path> <format> <labeled|unlabeled>`; relative paths
//! resolve against the manifest's directory. Target labels, when present, are
//! kept only for oracle evaluation.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::domain::{LabeledDomain, MultiDomain, UnlabeledDomain};
use super::io::{load_dense_csv, load_sparse_sv, RawDomain};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Source,
    Target,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    DenseCsv,
    SparseSv,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::DenseCsv => "dense_csv",
            Format::SparseSv => "sparse_sv",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub role: Role,
    pub format: Format,
    pub labeled: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainManifest {
    pub dim: usize,
    pub entries: Vec<ManifestEntry>,
}

impl DomainManifest {
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut dim = None;
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected `key = value`, found `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "dim" => {
                    dim = Some(value.parse::<usize>().map_err(|_| Error::Parse {
                        line,
                        message: format!("dim `{value}` is not a positive integer"),
                    })?)
                }
                "source" | "target" => {
                    let fields: Vec<&str> = value.split_whitespace().collect();
                    if fields.len() != 3 {
                        return Err(Error::Parse {
                            line,
                            message: "entries need `<path> <format> <labeled|unlabeled>`".into(),
                        });
                    }
                    let format = match fields[1] {
                        "dense_csv" => Format::DenseCsv,
                        "sparse_sv" => Format::SparseSv,
                        other => {
                            return Err(Error::Parse {
                                line,
                                message: format!("unknown format `{other}`"),
                            })
                        }
                    };
                    let labeled = match fields[2] {
                        "labeled" => true,
                        "unlabeled" => false,
                        other => {
                            return Err(Error::Parse {
                                line,
                                message: format!("expected labeled|unlabeled, found `{other}`"),
                            })
                        }
                    };
                    let path = Path::new(fields[0]);
                    entries.push(ManifestEntry {
                        path: if path.is_absolute() {
                            path.to_path_buf()
                        } else {
                            base.join(path)
                        },
                        role: if key == "source" { Role::Source } else { Role::Target },
                        format,
                        labeled,
                    });
                }
                other => {
                    return Err(Error::Parse {
                        line,
                        message: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        let dim = dim.filter(|d| *d > 0).ok_or_else(|| Error::Config("manifest needs `dim > 0`".into()))?;
        let manifest = Self { dim, entries };
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<()> {
        let targets = self.entries.iter().filter(|e| e.role == Role::Target).count();
        if targets != 1 {
            return Err(Error::Config(format!("manifest needs exactly one target, found {targets}")));
        }
        let sources: Vec<_> = self.entries.iter().filter(|e| e.role == Role::Source).collect();
        if sources.is_empty() {
            return Err(Error::Config("manifest needs at least one source".into()));
        }
        if let Some(s) = sources.iter().find(|s| !s.labeled) {
            return Err(Error::Config(format!("source {} must be labeled", s.path.display())));
        }
        Ok(())
    }

    /// Checks that every referenced file exists, without reading it.
    pub fn check_files(&self) -> Result<()> {
        for e in &self.entries {
            if !e.path.is_file() {
                return Err(Error::Config(format!("missing data file {}", e.path.display())));
            }
        }
        Ok(())
    }

    /// Manifest text with paths written relative to `base` where possible.
    pub fn to_text(&self, base: &Path) -> String {
        let mut out = String::new();
        writeln!(out, "dim = {}", self.dim).unwrap();
        for e in &self.entries {
            let role = match e.role {
                Role::Source => "source",
                Role::Target => "target",
            };
            let path = e.path.strip_prefix(base).unwrap_or(&e.path);
            let labeled = if e.labeled { "labeled" } else { "unlabeled" };
            writeln!(out, "{role} = {} {} {labeled}", path.display(), e.format.name()).unwrap();
        }
        out
    }

    pub fn load_domains(&self) -> Result<MultiDomain> {
        self.check_files()?;
        let mut sources = Vec::new();
        let mut target = None;
        for e in &self.entries {
            let raw = match e.format {
                Format::DenseCsv => load_dense_csv(&e.path)?,
                Format::SparseSv => load_sparse_sv(&e.path, self.dim)?,
            };
            let RawDomain { features, labels } = raw;
            if features.cols() != self.dim {
                return Err(Error::Input(format!(
                    "{} has {} features, manifest declares {}",
                    e.path.display(),
                    features.cols(),
                    self.dim
                )));
            }
            if e.labeled != labels.is_some() {
                return Err(Error::Input(format!(
                    "{} labeled flag does not match file contents",
                    e.path.display()
                )));
            }
            match e.role {
                Role::Source => {
                    let id = sources.len();
                    sources.push(LabeledDomain::new(id, features, labels.unwrap())?);
                }
                Role::Target => target = Some((features, labels)),
            }
        }
        let (features, labels) = target.expect("validated");
        let id = sources.len();
        let target = match labels {
            Some(l) => UnlabeledDomain::with_oracle(LabeledDomain::new(id, features, l)?),
            None => UnlabeledDomain::new(id, features)?,
        };
        MultiDomain::new(sources, target)
    }
}
