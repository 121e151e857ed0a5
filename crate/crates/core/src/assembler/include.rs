use std::collections::BTreeMap;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::word::WordSpec;

/// Environment variable naming one extra include directory, searched after
/// the explicit search paths.
pub const INCLUDE_ENV: &str = "BBJ_INCLUDE";

/// Name that resolves to the generated standard library.
pub const BUILTIN_LIB: &str = "lib";

/// Finds `.include` targets: the including file's directory, then the
/// search paths in order, then the built-in library.
#[derive(Debug, Clone, Default)]
pub struct IncludeResolver {
    search_paths: Vec<PathBuf>,
    virtual_files: BTreeMap<String, Arc<str>>,
    builtin_lib: Option<WordSpec>,
}

#[derive(Debug, Clone)]
pub struct Found {
    /// Identity used to include each file once.
    pub key: String,
    pub display: String,
    pub dir: Option<PathBuf>,
    source: Source,
}

#[derive(Debug, Clone)]
enum Source {
    File(PathBuf),
    Text(Arc<str>),
}

impl Found {
    pub fn load(&self) -> io::Result<String> {
        match &self.source {
            Source::File(p) => std::fs::read_to_string(p),
            Source::Text(t) => Ok(t.to_string()),
        }
    }
}

impl IncludeResolver {
    pub fn new(builtin_lib: Option<WordSpec>) -> Self {
        IncludeResolver {
            builtin_lib,
            ..Default::default()
        }
    }

    pub fn with_search_path(mut self, path: impl Into<PathBuf>) -> Self {
        self.search_paths.push(path.into());
        self
    }

    /// Appends the directory named by [`INCLUDE_ENV`], if set.
    pub fn with_env_path(self) -> Self {
        match std::env::var_os(INCLUDE_ENV) {
            Some(p) if !p.is_empty() => self.with_search_path(p),
            _ => self,
        }
    }

    /// Registers in-memory source text under `name`; it shadows files.
    pub fn with_virtual_file(mut self, name: &str, text: &str) -> Self {
        self.virtual_files.insert(name.to_string(), Arc::from(text));
        self
    }

    pub fn search_paths(&self) -> &[PathBuf] {
        &self.search_paths
    }

    /// On failure returns every path that was tried.
    pub fn resolve(&self, name: &str, from_dir: Option<&Path>) -> Result<Found, Vec<PathBuf>> {
        if let Some(text) = self.virtual_files.get(name) {
            return Ok(Found {
                key: format!("virtual:{name}"),
                display: name.to_string(),
                dir: None,
                source: Source::Text(text.clone()),
            });
        }
        let mut searched = Vec::new();
        for dir in from_dir.into_iter().chain(self.search_paths.iter().map(PathBuf::as_path)) {
            let candidate = dir.join(name);
            if candidate.is_file() {
                let canonical = candidate.canonicalize().unwrap_or_else(|_| candidate.clone());
                return Ok(Found {
                    key: canonical.display().to_string(),
                    display: candidate.display().to_string(),
                    dir: candidate.parent().map(Path::to_path_buf),
                    source: Source::File(candidate),
                });
            }
            searched.push(candidate);
        }
        match self.builtin_lib {
            Some(spec) if name == BUILTIN_LIB => Ok(Found {
                key: format!("<{BUILTIN_LIB}>"),
                display: format!("<{BUILTIN_LIB}{}>", spec.word_size()),
                dir: None,
                source: Source::Text(crate::stdlib::library_text(spec)),
            }),
            _ => Err(searched),
        }
    }
}
