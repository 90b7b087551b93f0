//! Scoring externally generated patches against a benchmark directory.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::benchmark::{BenchmarkError, Manifest};
use crate::harness::{list_patches, Harness, HarnessError, SourceFile, TestStatus};
use crate::metrics::{codebleu_subset, CodeBleuWeights};
use crate::transforms::TransformKind;

pub const RESULTS_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum EvaluationError {
    #[error(transparent)]
    Benchmark(#[from] BenchmarkError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid results file {}: {message}", path.display())]
    Results { path: PathBuf, message: String },
}

/// Which programs of a benchmark directory are being repaired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalSet {
    Original,
    Transformed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchRecord {
    pub ordinal: usize,
    pub status: TestStatus,
}

/// Outcome of every patch for one bug.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BugResult {
    pub instance_id: String,
    pub base_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<TransformKind>,
    pub n: usize,
    pub c: usize,
    /// 1-based position of the first passing patch in ordinal order.
    pub first_pass: Option<usize>,
    /// Mean CodeBLEU of the patches against the fixed program.
    pub codebleu: Option<f64>,
    pub patches: Vec<PatchRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsFile {
    pub version: u32,
    pub model: String,
    pub set: EvalSet,
    pub base_dataset_digest: String,
    /// Kinds the benchmark was built with, so empty kinds still get a section.
    pub kinds: Vec<TransformKind>,
    pub bugs: Vec<BugResult>,
}

impl ResultsFile {
    pub fn load(path: &Path) -> Result<Self, EvaluationError> {
        let text = fs::read_to_string(path).map_err(|source| EvaluationError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let results: ResultsFile = serde_json::from_str(&text).map_err(|e| EvaluationError::Results {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if results.version != RESULTS_VERSION {
            return Err(EvaluationError::Results {
                path: path.to_path_buf(),
                message: format!("unsupported version {}", results.version),
            });
        }
        Ok(results)
    }

    pub fn save(&self, path: &Path) -> Result<(), EvaluationError> {
        let mut text = serde_json::to_string_pretty(self).expect("results serialize");
        text.push('\n');
        fs::write(path, text).map_err(|source| EvaluationError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Bugs that had no patch at all.
    pub fn missing(&self) -> impl Iterator<Item = &BugResult> + '_ {
        self.bugs.iter().filter(|b| b.n == 0)
    }
}

struct Target {
    instance_id: String,
    base_id: String,
    kind: Option<TransformKind>,
    fixed: PathBuf,
    test: PathBuf,
    program_file: String,
}

fn targets(manifest: &Manifest, dir: &Path, set: EvalSet) -> Vec<Target> {
    let file_name = |p: &str| p.rsplit('/').next().unwrap_or(p).to_string();
    match set {
        EvalSet::Original => manifest
            .bases
            .iter()
            .map(|b| Target {
                instance_id: b.id.clone(),
                base_id: b.id.clone(),
                kind: None,
                fixed: dir.join(&b.fixed.path),
                test: dir.join(&b.test.path),
                program_file: file_name(&b.buggy.path),
            })
            .collect(),
        EvalSet::Transformed => manifest
            .instances
            .iter()
            .map(|i| Target {
                instance_id: i.id.clone(),
                base_id: i.base_id.clone(),
                kind: Some(i.kind),
                fixed: dir.join(&i.fixed.path),
                test: dir.join(&i.test.path),
                program_file: file_name(&i.buggy.path),
            })
            .collect(),
    }
}

fn read(path: &Path) -> Result<String, EvaluationError> {
    fs::read_to_string(path).map_err(|source| EvaluationError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn evaluate_target(t: &Target, patches_root: &Path, harness: &Harness) -> Result<BugResult, EvaluationError> {
    let patches = list_patches(patches_root, &t.instance_id)?;
    if patches.is_empty() {
        log::warn!("{}: no patches under {}", t.instance_id, patches_root.display());
    }
    let fixed = read(&t.fixed)?;
    let tests = SourceFile::new(
        t.test.file_name().and_then(|n| n.to_str()).unwrap_or("Test.java"),
        read(&t.test)?,
    );
    let mut records = Vec::with_capacity(patches.len());
    let mut scores = Vec::new();
    for (ordinal, path) in &patches {
        let content = read(path)?;
        let verdict = harness.evaluate_patch(&t.instance_id, *ordinal, &SourceFile::new(&t.program_file, &content), &tests)?;
        match codebleu_subset(&fixed, &content, CodeBleuWeights::default()) {
            Ok(s) => scores.push(s.total),
            Err(e) => log::warn!("{} patch {ordinal}: codebleu skipped: {e}", t.instance_id),
        }
        records.push(PatchRecord {
            ordinal: *ordinal,
            status: verdict.verdict.status,
        });
    }
    let first_pass = records.iter().position(|r| r.status == TestStatus::Pass).map(|i| i + 1);
    Ok(BugResult {
        instance_id: t.instance_id.clone(),
        base_id: t.base_id.clone(),
        kind: t.kind,
        n: records.len(),
        c: records.iter().filter(|r| r.status == TestStatus::Pass).count(),
        first_pass,
        codebleu: (!scores.is_empty()).then(|| scores.iter().sum::<f64>() / scores.len() as f64),
        patches: records,
    })
}

/// Runs every patch of every bug in `set` against the bug's tests.
pub fn evaluate_benchmark(
    bench_dir: &Path,
    set: EvalSet,
    patches_root: &Path,
    model: &str,
    harness: &Harness,
) -> Result<ResultsFile, EvaluationError> {
    let manifest = Manifest::load(bench_dir)?;
    let targets = targets(&manifest, bench_dir, set);
    let bugs = targets
        .par_iter()
        .map(|t| evaluate_target(t, patches_root, harness))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ResultsFile {
        version: RESULTS_VERSION,
        model: model.to_string(),
        set,
        base_dataset_digest: manifest.base_dataset_digest,
        kinds: manifest.kinds,
        bugs,
    })
}
