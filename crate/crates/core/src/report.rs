//! Taint reports: what each result depends on, and how much of linear memory
//! ended up tainted.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::runtime::{Instance, Value};
use crate::taint::{SourceId, TaintLabel, TaintLevel};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaintReport {
    pub sources: Vec<SourceId>,
    pub results: Vec<ResultEntry>,
    pub memory: MemorySummary,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultEntry {
    #[serde(rename = "type")]
    pub ty: String,
    /// Signed decimal.
    pub value: String,
    pub taint: TaintLabel,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemorySummary {
    pub tainted_bytes: u64,
    pub by_source: BTreeMap<SourceId, LevelCounts>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCounts {
    pub direct: u64,
    pub indirect: u64,
}

impl ResultEntry {
    pub fn from_value(v: &Value) -> Self {
        ResultEntry {
            ty: v.ty().name().to_string(),
            value: v.display_value(),
            taint: v.taint(),
        }
    }
}

/// Summarizes `results` and the instance's shadow memory.
pub fn make_report(instance: &Instance, results: &[Value]) -> TaintReport {
    let sources = instance.sources().to_vec();
    let mut by_source: BTreeMap<SourceId, LevelCounts> =
        sources.iter().map(|&s| (s, LevelCounts::default())).collect();
    let shadow = instance.memory().shadow();
    let mut tainted_bytes = 0u64;
    if shadow.tainted_bytes() > 0 {
        for label in shadow.labels().iter().filter(|l| !l.is_empty()) {
            tainted_bytes += 1;
            for (id, level) in label.iter() {
                let counts = by_source.entry(id).or_default();
                match level {
                    TaintLevel::Direct => counts.direct += 1,
                    TaintLevel::Indirect => counts.indirect += 1,
                    TaintLevel::None => {}
                }
            }
        }
    }
    TaintReport {
        sources,
        results: results.iter().map(ResultEntry::from_value).collect(),
        memory: MemorySummary {
            tainted_bytes,
            by_source,
        },
    }
}

impl TaintReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

/// Human-readable form:
///
/// ```text
/// sources: 0
/// result0: i32:120 {0:D}
/// memory: 0 tainted bytes
/// ```
impl fmt::Display for TaintReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sources: Vec<String> = self.sources.iter().map(|s| s.to_string()).collect();
        writeln!(f, "sources: {}", if sources.is_empty() { "-".into() } else { sources.join(",") })?;
        for (i, r) in self.results.iter().enumerate() {
            writeln!(f, "result{i}: {}:{} {}", r.ty, r.value, r.taint)?;
        }
        writeln!(f, "memory: {} tainted bytes", self.memory.tainted_bytes)?;
        for (id, c) in &self.memory.by_source {
            writeln!(f, "  src{id}: direct={} indirect={}", c.direct, c.indirect)?;
        }
        Ok(())
    }
}
