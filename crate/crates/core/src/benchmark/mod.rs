//! Base dataset ingest, benchmark construction and the on-disk layout.

mod build;
mod output;

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::harness::HarnessError;
use crate::syntax::{LineMap, Program, SourceText};
use crate::transforms::{Provenance, TransformKind};

pub use build::{build_benchmark, BuildOptions, BuildOutput};
pub use output::{
    count_summary, write_benchmark, BaseRecord, CountSummary, FileRecord, InstanceRecord, Manifest, MANIFEST_FILE,
    MANIFEST_VERSION,
};

#[derive(Debug, Error)]
pub enum BenchmarkError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    ManifestRecord { path: PathBuf, line: usize, message: String },
    #[error("invalid manifest {}: {message}", path.display())]
    Manifest { path: PathBuf, message: String },
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("refusing to replace {}: not a benchmark directory", .0.display())]
    OutputExists(PathBuf),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub(crate) fn io_at(path: &Path) -> impl FnOnce(io::Error) -> BenchmarkError + '_ {
    move |source| BenchmarkError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Inclusive 1-based line range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineRange {
    pub start: usize,
    pub end: usize,
}

impl LineRange {
    pub fn contains(&self, line: usize) -> bool {
        self.start <= line && line <= self.end
    }
}

/// One record of the input manifest (JSON Lines).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputRecord {
    pub id: String,
    pub buggy_path: PathBuf,
    pub fixed_path: PathBuf,
    pub test_path: PathBuf,
    pub buggy_start_line: usize,
    pub buggy_end_line: usize,
}

#[derive(Debug, Clone)]
pub struct BugInstance {
    pub id: String,
    /// File name of the program under repair (`Foo.java`), shared by the buggy
    /// and fixed versions.
    pub program_file: String,
    pub test_file: String,
    pub buggy: SourceText,
    pub fixed: SourceText,
    pub test: SourceText,
    pub buggy_lines: LineRange,
}

impl BugInstance {
    pub fn class_name(&self) -> &str {
        self.program_file.strip_suffix(".java").unwrap_or(&self.program_file)
    }
}

/// An input entry that could not be used, and why.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct BaseDataset {
    pub instances: Vec<BugInstance>,
    pub rejected: Vec<Rejection>,
}

impl BaseDataset {
    /// SHA-256 over every loaded instance's id, line range and sources.
    pub fn digest(&self) -> String {
        let mut sorted: Vec<&BugInstance> = self.instances.iter().collect();
        sorted.sort_by(|a, b| a.id.cmp(&b.id));
        let mut h = Sha256::new();
        for inst in sorted {
            h.update(inst.id.as_bytes());
            h.update([0]);
            h.update(format!("{}-{}", inst.buggy_lines.start, inst.buggy_lines.end));
            for text in [&inst.buggy, &inst.fixed, &inst.test] {
                h.update([0]);
                h.update(sha256_hex(text.as_str().as_bytes()));
            }
            h.update([b'\n']);
        }
        hex::encode(h.finalize())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn read_source(root: &Path, rel: &Path) -> Result<SourceText, String> {
    let path = root.join(rel);
    let bytes = fs::read(&path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    SourceText::from_bytes(&bytes).map_err(|e| format!("{}: {e}", path.display()))
}

fn parses_cleanly(text: &SourceText, what: &str) -> Result<(), String> {
    let program = Program::parse(text.clone()).map_err(|e| format!("{what}: {e}"))?;
    if program.tree.has_error() {
        return Err(format!("{what} does not parse"));
    }
    Ok(())
}

fn load_entry(root: &Path, rec: &InputRecord) -> Result<BugInstance, String> {
    let buggy = read_source(root, &rec.buggy_path)?;
    let fixed = read_source(root, &rec.fixed_path)?;
    let test = read_source(root, &rec.test_path)?;
    if rec.buggy_start_line == 0 || rec.buggy_start_line > rec.buggy_end_line || rec.buggy_end_line > buggy.line_count() {
        return Err(format!(
            "bad buggy line range {}-{} for a {}-line file",
            rec.buggy_start_line,
            rec.buggy_end_line,
            buggy.line_count()
        ));
    }
    parses_cleanly(&buggy, "buggy source")?;
    parses_cleanly(&fixed, "fixed source")?;
    parses_cleanly(&test, "test source")?;
    let file_name = |p: &Path| {
        p.file_name()
            .and_then(|n| n.to_str())
            .map(str::to_string)
            .ok_or_else(|| format!("{} has no file name", p.display()))
    };
    Ok(BugInstance {
        id: rec.id.clone(),
        program_file: file_name(&rec.buggy_path)?,
        test_file: file_name(&rec.test_path)?,
        buggy,
        fixed,
        test,
        buggy_lines: LineRange {
            start: rec.buggy_start_line,
            end: rec.buggy_end_line,
        },
    })
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.')) && !id.starts_with('.')
}

/// Reads a JSON Lines manifest whose paths are relative to `root`.
///
/// Entries with unreadable files, bad line ranges or parse errors are
/// rejected individually; a malformed manifest line is an error.
pub fn load_base_dataset(root: &Path, manifest: &Path) -> Result<BaseDataset, BenchmarkError> {
    let content = fs::read_to_string(manifest).map_err(io_at(manifest))?;
    let mut instances = Vec::new();
    let mut rejected = Vec::new();
    let mut seen = BTreeMap::new();
    for (i, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: InputRecord = serde_json::from_str(line).map_err(|e| BenchmarkError::ManifestRecord {
            path: manifest.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        if !valid_id(&rec.id) {
            return Err(BenchmarkError::ManifestRecord {
                path: manifest.to_path_buf(),
                line: i + 1,
                message: format!("id `{}` must be non-empty and use only [A-Za-z0-9._-]", rec.id),
            });
        }
        if let Some(prev) = seen.insert(rec.id.clone(), i + 1) {
            return Err(BenchmarkError::ManifestRecord {
                path: manifest.to_path_buf(),
                line: i + 1,
                message: format!("duplicate id `{}` (first on line {prev})", rec.id),
            });
        }
        match load_entry(root, &rec) {
            Ok(inst) => instances.push(inst),
            Err(reason) => {
                log::warn!("rejecting {}: {reason}", rec.id);
                rejected.push(Rejection { id: rec.id, reason });
            }
        }
    }
    Ok(BaseDataset { instances, rejected })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RemapOutcome {
    Mapped(LineRange),
    Excluded,
}

/// Follows the buggy lines through a transformation. Any edit that touches
/// one of them excludes the instance.
pub fn remap_buggy_line(line_map: &LineMap, buggy: LineRange) -> RemapOutcome {
    if line_map.touches(buggy.start, buggy.end) {
        return RemapOutcome::Excluded;
    }
    match line_map.map_range(buggy.start, buggy.end) {
        Some((start, end)) => RemapOutcome::Mapped(LineRange { start, end }),
        None => RemapOutcome::Excluded,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExclusionReason {
    BuggyLineTouched,
    PreservationFailed,
    InapplicableCollision,
    /// The site in the buggy program has no counterpart in the fixed one.
    FixedSiteUnmatched,
}

impl ExclusionReason {
    pub fn as_str(self) -> &'static str {
        match self {
            ExclusionReason::BuggyLineTouched => "buggy-line-touched",
            ExclusionReason::PreservationFailed => "preservation-failed",
            ExclusionReason::InapplicableCollision => "inapplicable-collision",
            ExclusionReason::FixedSiteUnmatched => "fixed-site-unmatched",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub instance: String,
    pub base_id: String,
    pub kind: TransformKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub site_id: Option<usize>,
    pub reason: ExclusionReason,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Validation {
    Pass,
    Skipped,
}

#[derive(Debug, Clone)]
pub struct TransformedInstance {
    pub id: String,
    pub base_id: String,
    pub kind: TransformKind,
    pub site_id: usize,
    pub program_file: String,
    pub test_file: String,
    pub buggy: SourceText,
    pub fixed: SourceText,
    pub test: SourceText,
    pub buggy_lines: LineRange,
    pub original_buggy_lines: LineRange,
    pub provenance: Provenance,
    pub validation: Validation,
}

/// Published per-kind instance counts for the 164-program base dataset,
/// shown beside emitted counts as a reference point.
pub const REFERENCE_COUNTS: [(TransformKind, usize); 8] = [
    (TransformKind::LocalVarRename, 100),
    (TransformKind::MethodRename, 149),
    (TransformKind::ParamRename, 162),
    (TransformKind::InsertLog, 173),
    (TransformKind::InsertTryCatch, 114),
    (TransformKind::BooleanExchange, 7),
    (TransformKind::LoopExchange, 142),
    (TransformKind::ReorderCondition, 603),
];

pub fn instance_id(base_id: &str, kind: TransformKind, site_id: usize) -> String {
    format!("{base_id}-{kind}-{site_id}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{apply_edits, Edit};

    fn write(dir: &Path, name: &str, content: &str) {
        fs::write(dir.join(name), content).unwrap();
    }

    #[test]
    fn loads_entries_and_rejects_bad_ones() {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path();
        write(d, "A.java", "class A {\n  int f() { return 1; }\n}\n");
        write(d, "AFixed.java", "class A {\n  int f() { return 2; }\n}\n");
        write(d, "T.java", "class T { public static void main(String[] a) {} }\n");
        write(d, "Bad.java", "class Bad { int x = ; }\n");
        let rec = |id: &str, buggy: &str, s: usize, e: usize| {
            serde_json::to_string(&InputRecord {
                id: id.into(),
                buggy_path: buggy.into(),
                fixed_path: "AFixed.java".into(),
                test_path: "T.java".into(),
                buggy_start_line: s,
                buggy_end_line: e,
            })
            .unwrap()
        };
        let manifest = [rec("ok", "A.java", 2, 2), rec("corrupt", "Bad.java", 1, 1), rec("range", "A.java", 3, 9), rec("missing", "Nope.java", 1, 1)]
            .join("\n");
        write(d, "base.jsonl", &manifest);
        let ds = load_base_dataset(d, &d.join("base.jsonl")).unwrap();
        assert_eq!(ds.instances.len(), 1);
        assert_eq!(ds.instances[0].program_file, "A.java");
        let ids: Vec<_> = ds.rejected.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, vec!["corrupt", "range", "missing"]);
    }

    #[test]
    fn empty_manifest_gives_empty_dataset() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "m.jsonl", "");
        let ds = load_base_dataset(dir.path(), &dir.path().join("m.jsonl")).unwrap();
        assert!(ds.instances.is_empty() && ds.rejected.is_empty());
    }

    #[test]
    fn malformed_record_and_duplicate_ids_are_errors() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "m.jsonl", "{\"id\": 3}\n");
        assert!(matches!(
            load_base_dataset(dir.path(), &dir.path().join("m.jsonl")),
            Err(BenchmarkError::ManifestRecord { line: 1, .. })
        ));
        let line = r#"{"id":"a","buggy_path":"x","fixed_path":"x","test_path":"x","buggy_start_line":1,"buggy_end_line":1}"#;
        write(dir.path(), "d.jsonl", &format!("{line}\n{line}\n"));
        assert!(matches!(
            load_base_dataset(dir.path(), &dir.path().join("d.jsonl")),
            Err(BenchmarkError::ManifestRecord { line: 2, .. })
        ));
    }

    #[test]
    fn remap_examples() {
        let text = SourceText::new("a\nb\nc\nd\n");
        let buggy = LineRange { start: 2, end: 2 };
        let (_, after) = apply_edits(&text, &[Edit::replace(&text, 4, 5, "C")]).unwrap();
        assert_eq!(remap_buggy_line(&after, buggy), RemapOutcome::Mapped(buggy));
        let (_, before) = apply_edits(&text, &[Edit::insert(&text, 0, "x\ny\nz\n")]).unwrap();
        assert_eq!(remap_buggy_line(&before, buggy), RemapOutcome::Mapped(LineRange { start: 5, end: 5 }));
        let (_, on) = apply_edits(&text, &[Edit::replace(&text, 2, 3, "B")]).unwrap();
        assert_eq!(remap_buggy_line(&on, buggy), RemapOutcome::Excluded);
    }
}
