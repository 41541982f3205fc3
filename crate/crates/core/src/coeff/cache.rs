//! Coefficient memo persistence and table export.
//!
//! The cache is a JSON document:
//!
//! ```json
//! { "format": "lattice-strings/coefficient-cache", "version": 1, "dim": 2,
//!   "rule": "LexMin", "zero_order": "Recursive",
//!   "entries": [ { "recursion": "Unsymmetrized", "key": [2, 1, 4, 0, 0, 2, 1, -2, -1],
//!                  "i": 1, "k": 0, "value": "1/1" } ] }
//! ```
//!
//! `key` is the raw encoding of a canonical key: dimension, number of loops,
//! then for each loop its length, its start relative to loop 1, and its steps
//! as signed axes. A file written for another dimension, first-edge rule or
//! zero-order convention is ignored on load.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CoefficientEngine, Recursion, ZeroOrder};
use crate::error::CoeffError;
use crate::loops::{FirstEdgeRule, SeqKey};
use crate::rational::{self, Rational};

pub const CACHE_FORMAT: &str = "lattice-strings/coefficient-cache";
pub const CACHE_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub recursion: Recursion,
    pub key: Vec<i32>,
    pub i: u32,
    pub k: u32,
    #[serde(with = "rational::serde_str")]
    pub value: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CacheFile {
    pub format: String,
    pub version: u32,
    pub dim: usize,
    pub rule: FirstEdgeRule,
    pub zero_order: ZeroOrder,
    pub entries: Vec<CacheEntry>,
}

/// One row of an exported coefficient table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub loops: String,
    pub i: u32,
    pub k: u32,
    pub a: Option<String>,
    pub b: Option<String>,
}

impl CoefficientEngine {
    /// Snapshot of the memo, sorted so that output is reproducible.
    pub fn to_cache(&self) -> CacheFile {
        let mut entries: Vec<CacheEntry> = self
            .memo_entries()
            .map(|(recursion, key, i, k, v)| CacheEntry {
                recursion,
                key: key.as_slice().to_vec(),
                i,
                k,
                value: v.clone(),
            })
            .collect();
        entries.sort_by(|a, b| (a.recursion, &a.key, a.i, a.k).cmp(&(b.recursion, &b.key, b.i, b.k)));
        CacheFile {
            format: CACHE_FORMAT.to_string(),
            version: CACHE_VERSION,
            dim: self.dim(),
            rule: self.rule(),
            zero_order: self.zero_order(),
            entries,
        }
    }

    /// Merges a cache into the memo. Returns `false` when the file belongs to
    /// another configuration and was skipped.
    pub fn load_cache(&mut self, file: &CacheFile) -> Result<bool, CoeffError> {
        if file.format != CACHE_FORMAT
            || file.version != CACHE_VERSION
            || file.dim != self.dim()
            || file.rule != self.rule()
            || file.zero_order != self.zero_order()
        {
            return Ok(false);
        }
        for e in &file.entries {
            let key = SeqKey::from_raw(e.key.clone()).map_err(|err| CoeffError::Format(err.to_string()))?;
            self.insert_memo(e.recursion, key, e.i, e.k, e.value.clone());
        }
        Ok(true)
    }

    pub fn save_cache_file(&self, path: &Path) -> Result<(), CoeffError> {
        let text = serde_json::to_string(&self.to_cache()).map_err(|e| CoeffError::Format(e.to_string()))?;
        fs::write(path, text)?;
        Ok(())
    }

    /// Loads `path` if it exists. Returns whether entries were taken from it.
    pub fn load_cache_file(&mut self, path: &Path) -> Result<bool, CoeffError> {
        if !path.exists() {
            return Ok(false);
        }
        let text = fs::read_to_string(path)?;
        let file: CacheFile = serde_json::from_str(&text).map_err(|e| CoeffError::Format(e.to_string()))?;
        self.load_cache(&file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_loop_dsl;

    #[test]
    fn cache_roundtrip_and_dimension_guard() {
        let mut e = CoefficientEngine::new(2).unwrap();
        let p = parse_loop_dsl("+1 +2 -1 -2", 2).unwrap();
        e.a_coeff(&p, 2, 1).unwrap();
        let file = e.to_cache();
        let text = serde_json::to_string(&file).unwrap();
        let back: CacheFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, file);

        let mut fresh = CoefficientEngine::new(2).unwrap();
        assert!(fresh.load_cache(&back).unwrap());
        assert_eq!(fresh.memo_len(), e.memo_len());

        let mut other = CoefficientEngine::new(3).unwrap();
        assert!(!other.load_cache(&back).unwrap());
        assert_eq!(other.memo_len(), 0);
    }
}
