//! Overhead benchmarks and the linear-scaling check over their output.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::decoder::{decode_module, ModuleDef};
use crate::runtime::{Config, Instance, Value};
use crate::taint::SourceId;

use super::{read_json, read_file, HarnessError};

pub const CSV_HEADER: &str = "case,n,mode,median_ms,shadow_labels";

fn default_reps() -> usize {
    5
}

fn default_sizes() -> Vec<u64> {
    vec![1_000, 10_000, 100_000]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchCase {
    pub name: String,
    /// Relative to the manifest's directory.
    pub module: PathBuf,
    pub invoke: String,
    /// Typed literals; `{n}` is replaced by the input size.
    pub args: Vec<String>,
    #[serde(default)]
    pub taint: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchManifest {
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_sizes")]
    pub sizes: Vec<u64>,
    pub cases: Vec<BenchCase>,
}

impl BenchManifest {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        read_json(path)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchMode {
    Tainted,
    Untainted,
}

impl BenchMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BenchMode::Tainted => "tainted",
            BenchMode::Untainted => "untainted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub case: String,
    pub n: u64,
    pub mode: BenchMode,
    pub median_ms: f64,
    /// Peak number of shadow bytes holding a non-empty label.
    pub shadow_labels: u64,
    /// Instructions executed by one run. Not written to CSV.
    #[serde(skip)]
    pub steps: u64,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2.0
    }
}

struct Sample {
    ms: f64,
    steps: u64,
    shadow: u64,
}

fn run_once(module: &Arc<ModuleDef>, case: &BenchCase, args: &[Value], mode: BenchMode) -> Result<Sample, HarnessError> {
    let config = Config {
        tracking: mode == BenchMode::Tainted,
        ..Config::default()
    };
    let err = |reason: String| HarnessError::Bench {
        case: case.name.clone(),
        reason,
    };
    let mut inst = Instance::with_config(module.clone(), config).map_err(|t| err(t.to_string()))?;
    inst.begin(&case.invoke, args).map_err(|e| err(e.to_string()))?;
    let start = Instant::now();
    inst.run().map_err(|t| err(t.to_string()))?;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(Sample {
        ms,
        steps: inst.steps(),
        shadow: inst.memory().shadow().peak_tainted_bytes() as u64,
    })
}

fn case_args(case: &BenchCase, n: u64, mode: BenchMode) -> Result<Vec<Value>, HarnessError> {
    let err = |reason: String| HarnessError::Bench {
        case: case.name.clone(),
        reason,
    };
    let mut args = Vec::with_capacity(case.args.len());
    for (i, lit) in case.args.iter().enumerate() {
        let v: Value = lit
            .replace("{n}", &n.to_string())
            .parse()
            .map_err(|e: crate::runtime::LiteralError| err(e.to_string()))?;
        let tainted = mode == BenchMode::Tainted && case.taint.contains(&i);
        args.push(match SourceId::new(i) {
            Some(id) if tainted => v.tainted_by(id),
            _ => v,
        });
    }
    Ok(args)
}

/// Runs every case at every size in both modes, sequentially, alternating
/// modes between repetitions. Each timed run uses a fresh instance;
/// instantiation is not timed. One untimed warm-up run per mode precedes
/// each size.
pub fn run_bench(manifest: &BenchManifest, base: &Path) -> Result<Vec<BenchRow>, HarnessError> {
    let reps = manifest.reps.max(1);
    let mut rows = Vec::new();
    for case in &manifest.cases {
        let bytes = read_file(&base.join(&case.module))?;
        let module = Arc::new(decode_module(&bytes).map_err(|e| HarnessError::Bench {
            case: case.name.clone(),
            reason: e.to_string(),
        })?);
        let sizes = case.sizes.as_ref().unwrap_or(&manifest.sizes);
        for &n in sizes {
            let modes = [BenchMode::Tainted, BenchMode::Untainted];
            let args = [case_args(case, n, modes[0])?, case_args(case, n, modes[1])?];
            for (mode, args) in modes.iter().zip(&args) {
                run_once(&module, case, args, *mode)?;
            }
            let mut samples: [Vec<Sample>; 2] = [Vec::with_capacity(reps), Vec::with_capacity(reps)];
            for _ in 0..reps {
                for (k, mode) in modes.iter().enumerate() {
                    samples[k].push(run_once(&module, case, &args[k], *mode)?);
                }
            }
            for (mode, series) in modes.iter().zip(samples) {
                let last = series.last().expect("reps >= 1");
                let (steps, shadow) = (last.steps, last.shadow);
                rows.push(BenchRow {
                    case: case.name.clone(),
                    n,
                    mode: *mode,
                    median_ms: median(series.iter().map(|s| s.ms).collect()),
                    shadow_labels: shadow,
                    steps,
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_csv<W: std::io::Write>(rows: &[BenchRow], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<BenchRow>, HarnessError> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(HarnessError::Bench {
            case: "-".into(),
            reason: format!("unexpected CSV header `{}`", header.join(",")),
        });
    }
    let mut rows = Vec::new();
    for row in r.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

/// Ordinary least squares of `y` on `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; 1 when `y` is constant and fitted exactly.
    pub r2: f64,
}

impl Fit {
    pub fn new(points: &[(f64, f64)]) -> Fit {
        let k = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
        let my = points.iter().map(|p| p.1).sum::<f64>() / k;
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
        let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
        let intercept = my - slope * mx;
        let sse: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
        let r2 = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
        Fit { slope, intercept, r2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingThresholds {
    pub timing_r2: f64,
    pub memory_r2: f64,
    /// Upper bound on the log-log slope of time against n. A linear fit over
    /// sizes a decade apart still scores R² > 0.99 on a quadratic, so the
    /// exponent is what actually separates the two.
    pub max_exponent: f64,
}

impl Default for ScalingThresholds {
    fn default() -> Self {
        ScalingThresholds {
            timing_r2: 0.95,
            memory_r2: 0.99,
            max_exponent: 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseScaling {
    pub case: String,
    pub tainted: Fit,
    pub untainted: Fit,
    pub tainted_exponent: f64,
    pub untainted_exponent: f64,
    /// Shadow-label fit, for cases whose label count varies with n.
    pub memory: Option<Fit>,
    pub failures: Vec<String>,
}

impl CaseScaling {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub cases: Vec<CaseScaling>,
}

impl ScalingReport {
    pub fn passed(&self) -> bool {
        !self.cases.is_empty() && self.cases.iter().all(CaseScaling::passed)
    }

    pub fn case(&self, name: &str) -> Option<&CaseScaling> {
        self.cases.iter().find(|c| c.case == name)
    }
}

impl fmt::Display for ScalingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.cases {
            write!(
                f,
                "{} {}: r2 tainted={:.4} untainted={:.4} slope ratio={:.3} exponent tainted={:.3} untainted={:.3}",
                if c.passed() { "PASS" } else { "FAIL" },
                c.case,
                c.tainted.r2,
                c.untainted.r2,
                c.tainted.slope / c.untainted.slope,
                c.tainted_exponent,
                c.untainted_exponent,
            )?;
            if let Some(m) = &c.memory {
                write!(f, " memory r2={:.6}", m.r2)?;
            }
            writeln!(f)?;
            for reason in &c.failures {
                writeln!(f, "  {reason}")?;
            }
        }
        Ok(())
    }
}

fn exponent(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .map(|&(n, ms)| (n.ln(), ms.max(1e-9).ln()))
        .collect();
    Fit::new(&logs).slope
}

/// `x >= min`, false when either is NaN.
fn at_least(x: f64, min: f64) -> bool {
    x >= min
}

/// Checks that time grows linearly in n in both modes, that tracking never
/// makes the per-n cost smaller, and that shadow-label counts grow linearly.
pub fn check_scaling(rows: &[BenchRow], t: ScalingThresholds) -> ScalingReport {
    let mut names: Vec<&str> = Vec::new();
    for r in rows {
        if !names.contains(&r.case.as_str()) {
            names.push(&r.case);
        }
    }
    let mut cases = Vec::new();
    for name in names {
        let series = |mode: BenchMode| -> Vec<&BenchRow> {
            let mut v: Vec<&BenchRow> = rows.iter().filter(|r| r.case == name && r.mode == mode).collect();
            v.sort_by_key(|r| r.n);
            v
        };
        let tainted = series(BenchMode::Tainted);
        let untainted = series(BenchMode::Untainted);
        let time = |s: &[&BenchRow]| -> Vec<(f64, f64)> { s.iter().map(|r| (r.n as f64, r.median_ms)).collect() };
        let (tp, up) = (time(&tainted), time(&untainted));
        let mut failures = Vec::new();
        for (mode, s) in [("tainted", &tp), ("untainted", &up)] {
            let distinct = {
                let mut ns: Vec<u64> = s.iter().map(|p| p.0 as u64).collect();
                ns.dedup();
                ns.len()
            };
            if distinct < 3 {
                failures.push(format!("{mode}: need at least 3 sizes, have {distinct}"));
            }
        }
        let tf = Fit::new(&tp);
        let uf = Fit::new(&up);
        let te = exponent(&tp);
        let ue = exponent(&up);
        for (mode, fit, e) in [("tainted", tf, te), ("untainted", uf, ue)] {
            if !at_least(fit.r2, t.timing_r2) {
                failures.push(format!("{mode}: timing r2 {:.4} < {}", fit.r2, t.timing_r2));
            }
            if !at_least(t.max_exponent, e) {
                failures.push(format!("{mode}: growth exponent {e:.3} > {}", t.max_exponent));
            }
        }
        if !at_least(tf.slope, uf.slope) {
            failures.push(format!("tainted slope {:.3e} < untainted slope {:.3e}", tf.slope, uf.slope));
        }
        let mem: Vec<(f64, f64)> = tainted.iter().map(|r| (r.n as f64, r.shadow_labels as f64)).collect();
        let varies = mem.windows(2).any(|w| w[0].1 != w[1].1);
        let memory = varies.then(|| Fit::new(&mem));
        if let Some(m) = memory {
            if !at_least(m.r2, t.memory_r2) {
                failures.push(format!("shadow labels r2 {:.6} < {}", m.r2, t.memory_r2));
            }
        }
        cases.push(CaseScaling {
            case: name.to_string(),
            tainted: tf,
            untainted: uf,
            tainted_exponent: te,
            untainted_exponent: ue,
            memory,
            failures,
        });
    }
    ScalingReport { cases }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(f: impl Fn(f64) -> f64, overhead: f64) -> Vec<BenchRow> {
        let mut rows = Vec::new();
        for n in [1_000u64, 10_000, 100_000] {
            for (mode, k) in [(BenchMode::Tainted, overhead), (BenchMode::Untainted, 1.0)] {
                rows.push(BenchRow {
                    case: "synthetic".into(),
                    n,
                    mode,
                    median_ms: k * f(n as f64),
                    shadow_labels: if mode == BenchMode::Tainted { 4 * n + 12 } else { 0 },
                    steps: 0,
                });
            }
        }
        rows
    }

    #[test]
    fn fit_exact_line() {
        let f = Fit::new(&[(1.0, 3.0), (2.0, 5.0), (3.0, 7.0)]);
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn linear_passes() {
        let report = check_scaling(&synthetic(|n| 0.002 * n + 0.1, 1.3), ScalingThresholds::default());
        assert!(report.passed(), "{report}");
        let c = report.case("synthetic").unwrap();
        assert!(c.tainted.slope / c.untainted.slope > 1.0);
        assert!(c.memory.unwrap().r2 > 0.999);
    }

    #[test]
    fn quadratic_fails() {
        let rows = synthetic(|n| 1e-6 * n * n, 1.3);
        let report = check_scaling(&rows, ScalingThresholds::default());
        assert!(!report.passed());
        // The linear fit alone would not have caught it.
        assert!(report.cases[0].tainted.r2 > 0.95);
        assert!(report.cases[0].failures.iter().any(|f| f.contains("exponent")));
    }

    #[test]
    fn cheaper_tainted_mode_fails() {
        let report = check_scaling(&synthetic(|n| 0.002 * n, 0.8), ScalingThresholds::default());
        assert!(report.cases[0].failures.iter().any(|f| f.contains("slope")), "{report}");
    }

    #[test]
    fn too_few_sizes_fails() {
        let rows: Vec<BenchRow> = synthetic(|n| n, 1.1).into_iter().filter(|r| r.n != 10_000).collect();
        assert!(!check_scaling(&rows, ScalingThresholds::default()).passed());
    }

    #[test]
    fn csv_round_trip() {
        let rows = synthetic(|n| 0.5 * n, 1.2);
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(text.lines().nth(1).unwrap(), "synthetic,1000,tainted,600.0,4012");
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), rows.len());
        assert_eq!(back[0].median_ms, rows[0].median_ms);
        assert!(read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn median_of_odd_and_even() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
