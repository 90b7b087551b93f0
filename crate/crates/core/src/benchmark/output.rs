use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{io_at, sha256_hex, BenchmarkError, BuildOutput, Exclusion, LineRange, Rejection, Validation};
use crate::transforms::{Provenance, TransformKind};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_VERSION: u32 = 1;

/// A file inside the benchmark directory and its SHA-256.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
}

/// An untransformed base instance, kept so originals can be evaluated
/// against the same directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseRecord {
    pub id: String,
    pub buggy: FileRecord,
    pub fixed: FileRecord,
    pub test: FileRecord,
    pub buggy_lines: LineRange,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub id: String,
    pub base_id: String,
    pub kind: TransformKind,
    pub site_id: usize,
    pub buggy: FileRecord,
    pub fixed: FileRecord,
    pub test: FileRecord,
    pub buggy_lines: LineRange,
    pub original_buggy_lines: LineRange,
    pub provenance: Provenance,
    pub validation: Validation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountSummary {
    pub per_kind: BTreeMap<TransformKind, usize>,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub base_dataset_digest: String,
    pub seed: u64,
    pub kinds: Vec<TransformKind>,
    pub naming_provider: String,
    pub validated: bool,
    pub bases: Vec<BaseRecord>,
    pub instances: Vec<InstanceRecord>,
    pub counts: CountSummary,
    pub exclusions: Vec<Exclusion>,
    pub rejected: Vec<Rejection>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self, BenchmarkError> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(io_at(&path))?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|e| BenchmarkError::Manifest {
            path: path.clone(),
            message: e.to_string(),
        })?;
        if manifest.version != MANIFEST_VERSION {
            return Err(BenchmarkError::Manifest {
                path,
                message: format!("unsupported version {}", manifest.version),
            });
        }
        Ok(manifest)
    }

    /// Every referenced file, with the problem found (missing or digest mismatch).
    pub fn verify_files(&self, dir: &Path) -> Vec<(String, String)> {
        let records = self
            .bases
            .iter()
            .flat_map(|b| [&b.buggy, &b.fixed, &b.test])
            .chain(self.instances.iter().flat_map(|i| [&i.buggy, &i.fixed, &i.test]));
        let mut problems = Vec::new();
        for rec in records {
            match fs::read(dir.join(&rec.path)) {
                Ok(bytes) if sha256_hex(&bytes) == rec.sha256 => {}
                Ok(_) => problems.push((rec.path.clone(), "digest mismatch".to_string())),
                Err(e) => problems.push((rec.path.clone(), e.to_string())),
            }
        }
        problems
    }

    pub fn instance(&self, id: &str) -> Option<&InstanceRecord> {
        self.instances.iter().find(|i| i.id == id)
    }
}

/// Per-kind instance counts over `kinds` (zero-filled) plus the total.
pub fn count_summary(instances: &[InstanceRecord], kinds: &[TransformKind]) -> CountSummary {
    let mut per_kind: BTreeMap<TransformKind, usize> = kinds.iter().map(|&k| (k, 0)).collect();
    for inst in instances {
        *per_kind.entry(inst.kind).or_default() += 1;
    }
    CountSummary {
        total: per_kind.values().sum(),
        per_kind,
    }
}

struct Stager {
    root: PathBuf,
}

impl Stager {
    fn put(&self, rel: &str, content: &[u8]) -> Result<FileRecord, BenchmarkError> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io_at(parent))?;
        }
        fs::write(&path, content).map_err(io_at(&path))?;
        Ok(FileRecord {
            path: rel.to_string(),
            sha256: sha256_hex(content),
        })
    }
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("manifest types serialize");
    s.push('\n');
    s.into_bytes()
}

/// Writes the benchmark directory atomically: everything is staged next to
/// `out` and renamed into place. An existing `out` is replaced only if it
/// holds a previous benchmark (or is empty).
pub fn write_benchmark(
    out: &Path,
    build: &BuildOutput,
    base_dataset_digest: &str,
    seed: u64,
    kinds: &[TransformKind],
    naming_provider: &str,
) -> Result<Manifest, BenchmarkError> {
    if out.exists() {
        let empty = out.is_dir() && fs::read_dir(out).map_err(io_at(out))?.next().is_none();
        if !empty && !out.join(MANIFEST_FILE).is_file() {
            return Err(BenchmarkError::OutputExists(out.to_path_buf()));
        }
    }
    let parent = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent).map_err(io_at(&parent))?;
    let staging = tempfile::Builder::new()
        .prefix(".repairbench-staging-")
        .tempdir_in(&parent)
        .map_err(io_at(&parent))?;
    let stager = Stager {
        root: staging.path().to_path_buf(),
    };

    let mut bases = Vec::with_capacity(build.bases.len());
    for b in &build.bases {
        let dir = format!("bases/{}", b.id);
        bases.push(BaseRecord {
            id: b.id.clone(),
            buggy: stager.put(&format!("{dir}/buggy/{}", b.program_file), b.buggy.as_str().as_bytes())?,
            fixed: stager.put(&format!("{dir}/fixed/{}", b.program_file), b.fixed.as_str().as_bytes())?,
            test: stager.put(&format!("{dir}/test/{}", b.test_file), b.test.as_str().as_bytes())?,
            buggy_lines: b.buggy_lines,
        });
    }

    let mut instances = Vec::with_capacity(build.instances.len());
    for inst in &build.instances {
        let dir = format!("instances/{}", inst.id);
        let record = InstanceRecord {
            id: inst.id.clone(),
            base_id: inst.base_id.clone(),
            kind: inst.kind,
            site_id: inst.site_id,
            buggy: stager.put(&format!("{dir}/buggy/{}", inst.program_file), inst.buggy.as_str().as_bytes())?,
            fixed: stager.put(&format!("{dir}/fixed/{}", inst.program_file), inst.fixed.as_str().as_bytes())?,
            test: stager.put(&format!("{dir}/test/{}", inst.test_file), inst.test.as_str().as_bytes())?,
            buggy_lines: inst.buggy_lines,
            original_buggy_lines: inst.original_buggy_lines,
            provenance: inst.provenance.clone(),
            validation: inst.validation,
        };
        stager.put(&format!("{dir}/instance.json"), &to_json(&record))?;
        instances.push(record);
    }

    let manifest = Manifest {
        version: MANIFEST_VERSION,
        base_dataset_digest: base_dataset_digest.to_string(),
        seed,
        kinds: kinds.to_vec(),
        naming_provider: naming_provider.to_string(),
        validated: build.validated,
        counts: count_summary(&instances, kinds),
        bases,
        instances,
        exclusions: build.exclusions.clone(),
        rejected: build.rejected.clone(),
    };
    stager.put(MANIFEST_FILE, &to_json(&manifest))?;

    let staged = staging.keep();
    if out.exists() {
        let old = parent.join(format!(
            ".repairbench-old-{}",
            out.file_name().and_then(|n| n.to_str()).unwrap_or("out")
        ));
        if old.exists() {
            fs::remove_dir_all(&old).map_err(io_at(&old))?;
        }
        fs::rename(out, &old).map_err(io_at(out))?;
        fs::rename(&staged, out).map_err(io_at(out))?;
        fs::remove_dir_all(&old).map_err(io_at(&old))?;
    } else {
        fs::rename(&staged, out).map_err(io_at(out))?;
    }
    Ok(manifest)
}
