//! Fixture corpus driver: runs manifest-described invocations and compares
//! results, traps, result taint and memory probes against expectations.

mod bench;

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decoder::decode_module;
use crate::runtime::{Config, Instance, InvokeError, LiteralError, Value};
use crate::taint::{SourceId, TaintLabel, MAX_SOURCES};

pub use bench::{
    check_scaling, read_csv, run_bench, write_csv, BenchCase, BenchManifest, BenchMode, BenchRow,
    CaseScaling, Fit, ScalingReport, ScalingThresholds, CSV_HEADER,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid manifest {path}: {source}")]
    Manifest {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("fixture `{fixture}`: {reason}")]
    Fixture { fixture: String, reason: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("bench case `{case}`: {reason}")]
    Bench { case: String, reason: String },
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>, HarnessError> {
    std::fs::read(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, HarnessError> {
    let text = read_file(path)?;
    serde_json::from_slice(&text).map_err(|source| HarnessError::Manifest {
        path: path.to_path_buf(),
        source,
    })
}

/// Expected bytes at `addr..addr + width` after the run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryProbe {
    pub addr: u32,
    pub width: u32,
    pub taint: TaintLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fixture {
    pub name: String,
    /// Relative to the manifest's directory.
    pub module: PathBuf,
    pub invoke: String,
    #[serde(default)]
    pub args: Vec<String>,
    /// Argument positions that act as taint sources.
    #[serde(default)]
    pub taint: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub results: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trap: Option<String>,
    #[serde(default)]
    pub result_taint: Vec<TaintLabel>,
    #[serde(default)]
    pub memory: Vec<MemoryProbe>,
    /// The run exhibits the accepted untaken-loop escape: a value that
    /// depends on a tainted guard comes out clean.
    #[serde(default)]
    pub expected_unsound: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureManifest {
    pub fixtures: Vec<Fixture>,
}

impl FixtureManifest {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        read_json(path)
    }
}

impl Fixture {
    /// Parses the argument literals and applies `taint`.
    pub fn arguments(&self) -> Result<Vec<Value>, HarnessError> {
        let err = |reason: String| HarnessError::Fixture {
            fixture: self.name.clone(),
            reason,
        };
        let mut args: Vec<Value> = self
            .args
            .iter()
            .map(|a| a.parse::<Value>())
            .collect::<Result<_, LiteralError>>()
            .map_err(|e| err(e.to_string()))?;
        for &i in &self.taint {
            if i >= args.len() || i >= MAX_SOURCES {
                return Err(err(format!("taint index {i} out of range")));
            }
            args[i] = args[i].tainted_by(SourceId::new(i).expect("checked above"));
        }
        Ok(args)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail(String),
}

impl Outcome {
    pub fn passed(&self) -> bool {
        *self == Outcome::Pass
    }
}

/// Runs one fixture; `base` is the directory its module path is relative to.
pub fn run_fixture(fixture: &Fixture, base: &Path) -> Outcome {
    match check_fixture(fixture, base) {
        Ok(()) => Outcome::Pass,
        Err(diag) => Outcome::Fail(diag),
    }
}

fn check_fixture(fx: &Fixture, base: &Path) -> Result<(), String> {
    let path = base.join(&fx.module);
    let bytes = std::fs::read(&path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let module = decode_module(&bytes).map_err(|e| format!("decode: {e}"))?;
    let mut config = Config::default();
    if let Some(d) = fx.max_depth {
        config.max_call_depth = d;
    }
    let mut instance = Instance::with_config(module, config).map_err(|t| format!("instantiate: {t}"))?;
    let args = fx.arguments().map_err(|e| e.to_string())?;

    let mut problems = Vec::new();
    match (instance.invoke(&fx.invoke, &args), &fx.trap) {
        (Ok(out), None) => {
            if let Some(expected) = &fx.results {
                let want: Vec<Value> = expected
                    .iter()
                    .map(|s| s.parse::<Value>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| e.to_string())?;
                let got: Vec<(_, _)> = out.results.iter().map(|v| (v.ty(), v.bits())).collect();
                let want: Vec<(_, _)> = want.iter().map(|v| (v.ty(), v.bits())).collect();
                if got != want {
                    let shown: Vec<String> = out.results.iter().map(|v| v.to_string()).collect();
                    problems.push(format!("results {shown:?}, expected {expected:?}"));
                }
            }
            let labels: Vec<TaintLabel> = out.results.iter().map(|v| v.taint()).collect();
            // An omitted map list means every result must come out clean.
            let want: Vec<TaintLabel> = if fx.result_taint.is_empty() {
                vec![TaintLabel::EMPTY; labels.len()]
            } else {
                fx.result_taint.clone()
            };
            if labels != want {
                let got: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
                let want: Vec<String> = want.iter().map(|l| l.to_string()).collect();
                problems.push(format!("result taint {got:?}, expected {want:?}"));
            }
        }
        (Ok(out), Some(reason)) => {
            let shown: Vec<String> = out.results.iter().map(|v| v.to_string()).collect();
            problems.push(format!("finished with {shown:?}, expected trap {reason}"));
        }
        (Err(InvokeError::Trap(t)), Some(reason)) => {
            if t.reason() != reason {
                problems.push(format!("trap {}, expected trap {reason}", t.reason()));
            }
        }
        (Err(e), _) => problems.push(format!("invoke: {e}")),
    }

    let shadow = instance.memory().shadow();
    for p in &fx.memory {
        let end = p.addr as usize + p.width as usize;
        if end > shadow.len() {
            problems.push(format!("probe {}+{} outside memory", p.addr, p.width));
            continue;
        }
        let got = shadow.load(p.addr as usize, p.width as usize);
        if got != p.taint {
            problems.push(format!("memory {}+{} taint {got}, expected {}", p.addr, p.width, p.taint));
        }
    }

    if problems.is_empty() {
        Ok(())
    } else {
        Err(problems.join("; "))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusSummary {
    pub total: usize,
    pub passed: usize,
    /// Passing fixtures that assert the escape case.
    pub expected_unsound: Vec<String>,
    /// Fixture name and diagnostic, in manifest order.
    pub failures: Vec<(String, String)>,
}

impl CorpusSummary {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for CorpusSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}/{} fixtures passed", self.passed, self.total)?;
        if !self.expected_unsound.is_empty() {
            writeln!(f, "expected unsound: {}", self.expected_unsound.join(", "))?;
        }
        for (name, diag) in &self.failures {
            writeln!(f, "FAIL {name}: {diag}")?;
        }
        Ok(())
    }
}

/// Runs every fixture in the manifest at `path`.
pub fn run_corpus(path: &Path) -> Result<CorpusSummary, HarnessError> {
    let manifest = FixtureManifest::load(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    Ok(run_manifest(&manifest, base))
}

pub fn run_manifest(manifest: &FixtureManifest, base: &Path) -> CorpusSummary {
    let mut summary = CorpusSummary {
        total: manifest.fixtures.len(),
        ..Default::default()
    };
    for fx in &manifest.fixtures {
        match run_fixture(fx, base) {
            Outcome::Pass => {
                summary.passed += 1;
                if fx.expected_unsound {
                    summary.expected_unsound.push(fx.name.clone());
                }
            }
            Outcome::Fail(diag) => summary.failures.push((fx.name.clone(), diag)),
        }
    }
    summary
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taint::TaintLevel;

    fn fixtures_dir() -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
    }

    fn fact(n: &str, taint: TaintLabel) -> Fixture {
        Fixture {
            name: "fact".into(),
            module: "fact_O0.wasm".into(),
            invoke: "fact".into(),
            args: vec![n.into()],
            taint: vec![0],
            results: Some(vec!["i32:120".into()]),
            trap: None,
            result_taint: vec![taint],
            memory: vec![],
            expected_unsound: false,
            max_depth: None,
        }
    }

    #[test]
    fn passing_and_failing_fixture() {
        let d = TaintLabel::source(SourceId::new(0).unwrap());
        assert_eq!(run_fixture(&fact("i32:5", d), &fixtures_dir()), Outcome::Pass);
        let Outcome::Fail(diag) = run_fixture(&fact("i32:4", d), &fixtures_dir()) else {
            panic!("4! is not 120")
        };
        assert!(diag.contains("results"), "{diag}");
        let i = TaintLabel::EMPTY.with(SourceId::new(0).unwrap(), TaintLevel::Indirect);
        let Outcome::Fail(diag) = run_fixture(&fact("i32:5", i), &fixtures_dir()) else {
            panic!("taint differs")
        };
        assert!(diag.contains("result taint"), "{diag}");
    }

    #[test]
    fn expected_trap() {
        let mut fx = fact("i32:50", TaintLabel::EMPTY);
        fx.results = None;
        fx.result_taint = vec![];
        fx.module = "recurse_O0.wasm".into();
        fx.invoke = "depth".into();
        fx.max_depth = Some(10);
        fx.trap = Some("call-stack-exhausted".into());
        assert_eq!(run_fixture(&fx, &fixtures_dir()), Outcome::Pass);
        fx.trap = Some("unreachable".into());
        assert!(!run_fixture(&fx, &fixtures_dir()).passed());
    }

    #[test]
    fn empty_manifest() {
        let s = run_manifest(&FixtureManifest::default(), Path::new("."));
        assert_eq!((s.total, s.passed), (0, 0));
        assert!(s.ok());
        assert_eq!(s.to_string(), "0/0 fixtures passed\n");
    }

    #[test]
    fn bad_taint_index_is_reported() {
        let mut fx = fact("i32:5", TaintLabel::EMPTY);
        fx.taint = vec![3];
        assert!(matches!(run_fixture(&fx, &fixtures_dir()), Outcome::Fail(d) if d.contains("taint index")));
    }
}
