//! JSON code files: `{"n": 4, "A": ["0000", "1111"], "B": ["0011", ...]}`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combinatorics::{BitStringSet, CodeError, CodePair};

#[derive(Debug, Error)]
pub enum CodeFileError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed code file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid code: {0}")]
    Invalid(#[from] CodeError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeFile {
    pub n: usize,
    #[serde(rename = "A")]
    pub a: Vec<String>,
    #[serde(rename = "B")]
    pub b: Vec<String>,
}

impl CodeFile {
    pub fn from_pair(pair: &CodePair) -> Self {
        Self { n: pair.n(), a: pair.a().to_strings(), b: pair.b().to_strings() }
    }

    pub fn to_pair(&self) -> Result<CodePair, CodeFileError> {
        let a = BitStringSet::parse_strs(self.n, &self.a, "A")?;
        let b = BitStringSet::parse_strs(self.n, &self.b, "B")?;
        Ok(CodePair::new(a, b)?)
    }

    pub fn parse(text: &str) -> Result<Self, CodeFileError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self, CodeFileError> {
        let text = fs::read_to_string(path)
            .map_err(|source| CodeFileError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data")
    }
}

/// Parse and validate in one step.
pub fn load_pair(path: &Path) -> Result<CodePair, CodeFileError> {
    CodeFile::read(path)?.to_pair()
}
