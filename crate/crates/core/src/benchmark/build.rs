use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::{
    instance_id, remap_buggy_line, BenchmarkError, BugInstance, Exclusion, ExclusionReason, LineRange, Rejection,
    RemapOutcome, TransformedInstance, Validation,
};
use crate::harness::{Harness, SourceFile, TestStatus};
use crate::naming::{choose_replacement, BuiltinProvider, NameProvider};
use crate::syntax::{find_identifier_occurrences, Program, SourceText, Span};
use crate::transforms::{
    apply, choose_site, enumerate_sites, rename_qualified_calls, validate_preservation, ApplyOptions, SiteDetail,
    TransformError, TransformKind, TransformResult, TransformSite, DEFAULT_SEED,
};

#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub kinds: BTreeSet<TransformKind>,
    pub seed: u64,
    /// Worker threads; `None` uses rayon's default.
    pub jobs: Option<usize>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            kinds: TransformKind::ALL.into_iter().collect(),
            seed: DEFAULT_SEED,
            jobs: None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct BuildOutput {
    pub instances: Vec<TransformedInstance>,
    pub exclusions: Vec<Exclusion>,
    /// Base entries dropped before transformation.
    pub rejected: Vec<Rejection>,
    /// Base entries that went through transformation.
    pub bases: Vec<BugInstance>,
    pub validated: bool,
}

/// Per-(instance, kind) seed derived from the global seed.
pub(crate) fn derive_seed(global: u64, base_id: &str, kind: TransformKind) -> u64 {
    let digest = Sha256::digest(format!("{global}\0{base_id}\0{kind}").as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// Maps byte offsets of the buggy source into the fixed one through their
/// common prefix and suffix. Offsets inside the differing region have no
/// counterpart.
struct OffsetMap {
    prefix: usize,
    suffix: usize,
    buggy_len: usize,
    fixed_len: usize,
}

impl OffsetMap {
    fn new(buggy: &str, fixed: &str) -> Self {
        let (b, f) = (buggy.as_bytes(), fixed.as_bytes());
        let prefix = b.iter().zip(f).take_while(|(x, y)| x == y).count();
        let max_suffix = b.len().min(f.len()) - prefix;
        let suffix = b
            .iter()
            .rev()
            .zip(f.iter().rev())
            .take(max_suffix)
            .take_while(|(x, y)| x == y)
            .count();
        OffsetMap {
            prefix,
            suffix,
            buggy_len: b.len(),
            fixed_len: f.len(),
        }
    }

    fn in_suffix(&self, p: usize) -> bool {
        p >= self.buggy_len - self.suffix
    }

    fn start(&self, p: usize) -> Option<usize> {
        if self.in_suffix(p) {
            Some(p + self.fixed_len - self.buggy_len)
        } else if p <= self.prefix {
            Some(p)
        } else {
            None
        }
    }

    fn end(&self, p: usize) -> Option<usize> {
        if p <= self.prefix {
            Some(p)
        } else if self.in_suffix(p) {
            Some(p + self.fixed_len - self.buggy_len)
        } else {
            None
        }
    }
}

struct Prepared<'a> {
    base: &'a BugInstance,
    buggy: Program,
    fixed: Program,
    test: Program,
    offsets: OffsetMap,
}

impl Prepared<'_> {
    fn fixed_counterpart(&self, site: &TransformSite) -> Option<TransformSite> {
        let start = self.offsets.start(site.anchor.start_byte)?;
        let end = self.offsets.end(site.anchor.end_byte)?;
        enumerate_sites(&self.fixed, site.kind)
            .into_iter()
            .find(|s| s.anchor.start_byte == start && s.anchor.end_byte == end)
    }

    fn buggy_lines_touched_by(&self, spans: &[Span]) -> bool {
        let r = self.base.buggy_lines;
        spans.iter().any(|s| s.lines_overlap(r.start, r.end))
    }

    fn exclusion(&self, kind: TransformKind, site_id: Option<usize>, reason: ExclusionReason, detail: impl Into<String>) -> Exclusion {
        Exclusion {
            instance: match site_id {
                Some(id) => instance_id(&self.base.id, kind, id),
                None => format!("{}-{kind}", self.base.id),
            },
            base_id: self.base.id.clone(),
            kind,
            site_id,
            reason,
            detail: detail.into(),
        }
    }
}

/// One transformation to realize on both versions of a base instance.
struct Job {
    base: usize,
    buggy_site: TransformSite,
    fixed_site: TransformSite,
    options: ApplyOptions,
}

enum Planned {
    Job(Job),
    Excluded(Exclusion),
}

fn prepare(base: &BugInstance) -> Result<Prepared<'_>, String> {
    let parse = |t: &SourceText, what: &str| Program::parse(t.clone()).map_err(|e| format!("{what}: {e}"));
    Ok(Prepared {
        base,
        buggy: parse(&base.buggy, "buggy source")?,
        fixed: parse(&base.fixed, "fixed source")?,
        test: parse(&base.test, "test source")?,
        offsets: OffsetMap::new(base.buggy.as_str(), base.fixed.as_str()),
    })
}

fn check_base(base: &BugInstance, harness: &Harness) -> Result<Option<String>, BenchmarkError> {
    let program = SourceFile::new(&base.program_file, base.fixed.as_str());
    let tests = SourceFile::new(&base.test_file, base.test.as_str());
    let verdict = harness.run_suite(&program, &tests)?;
    Ok((verdict.status != TestStatus::Pass)
        .then(|| format!("fixed program does not pass its tests ({})", verdict.status.as_str())))
}

/// Occurrences of the method name in the test that a qualified-call rename
/// would not reach.
fn unreachable_test_references(p: &Prepared, name: &str) -> usize {
    let text = &p.test.text;
    let total = p
        .test
        .tree
        .root()
        .leaves()
        .filter(|l| l.kind() == "identifier" && l.text(text) == name)
        .count();
    let qualified = p
        .test
        .tree
        .root()
        .descendants()
        .filter(|n| n.kind() == "method_invocation")
        .filter(|n| n.child_by_field("object").map(|o| o.text(text)) == Some(p.base.class_name()))
        .filter(|n| n.child_by_field("name").map(|o| o.text(text)) == Some(name))
        .count();
    total - qualified.min(total)
}

/// First declaration in document order whose occurrences avoid the buggy
/// lines and which has a counterpart in the fixed program.
fn plan_rename(
    p: &Prepared,
    base_index: usize,
    kind: TransformKind,
    provider: &dyn NameProvider,
    fallback: &dyn NameProvider,
) -> Option<Planned> {
    let sites = enumerate_sites(&p.buggy, kind);
    let mut first_skip: Option<Exclusion> = None;
    for site in sites {
        let SiteDetail::Rename { declaration } = &site.detail else {
            continue;
        };
        let occurrences = match find_identifier_occurrences(&p.buggy.scopes, declaration) {
            Ok(o) => o,
            Err(e) => {
                first_skip.get_or_insert_with(|| {
                    p.exclusion(kind, Some(site.site_id), ExclusionReason::InapplicableCollision, e.to_string())
                });
                continue;
            }
        };
        if p.buggy_lines_touched_by(&occurrences) {
            first_skip.get_or_insert_with(|| {
                p.exclusion(
                    kind,
                    Some(site.site_id),
                    ExclusionReason::BuggyLineTouched,
                    format!("`{}` occurs on the buggy lines", declaration.name),
                )
            });
            continue;
        }
        let Some(fixed_site) = p.fixed_counterpart(&site) else {
            first_skip.get_or_insert_with(|| {
                p.exclusion(
                    kind,
                    Some(site.site_id),
                    ExclusionReason::FixedSiteUnmatched,
                    format!("no renamable `{}` at the same place in the fixed program", declaration.name),
                )
            });
            continue;
        };
        if kind == TransformKind::MethodRename && unreachable_test_references(p, &declaration.name) > 0 {
            first_skip.get_or_insert_with(|| {
                p.exclusion(
                    kind,
                    Some(site.site_id),
                    ExclusionReason::InapplicableCollision,
                    format!("tests reference `{}` other than through the class name", declaration.name),
                )
            });
            continue;
        }
        let mut extra: BTreeSet<String> = p.fixed.scopes.names_in_use().clone();
        if kind == TransformKind::MethodRename {
            extra.extend(p.test.scopes.names_in_use().iter().cloned());
        }
        return Some(match choose_replacement(&p.buggy, declaration, provider, fallback, &extra) {
            Ok((name, provider_id)) => Planned::Job(Job {
                base: base_index,
                buggy_site: site,
                fixed_site,
                options: ApplyOptions {
                    new_name: Some(name),
                    naming_provider: Some(provider_id),
                    seed: None,
                },
            }),
            Err(e) => Planned::Excluded(p.exclusion(
                kind,
                Some(site.site_id),
                ExclusionReason::InapplicableCollision,
                format!("no replacement name: {e}"),
            )),
        });
    }
    first_skip.map(Planned::Excluded)
}

fn touches_buggy_lines(p: &Prepared, site: &TransformSite, options: &ApplyOptions) -> Result<bool, TransformError> {
    let result = apply(&p.buggy, site, options)?;
    Ok(remap_buggy_line(&result.line_map, p.base.buggy_lines) == RemapOutcome::Excluded)
}

fn plan_structural(p: &Prepared, base_index: usize, kind: TransformKind, seed: u64) -> Vec<Planned> {
    let sites = enumerate_sites(&p.buggy, kind);
    let options = ApplyOptions {
        seed: (kind == TransformKind::InsertTryCatch).then(|| derive_seed(seed, &p.base.id, kind)),
        ..ApplyOptions::default()
    };
    let mut planned = Vec::new();
    for site in sites {
        let id = site.site_id;
        match touches_buggy_lines(p, &site, &options) {
            Ok(true) => {
                planned.push(Planned::Excluded(p.exclusion(
                    kind,
                    Some(id),
                    ExclusionReason::BuggyLineTouched,
                    "edit script touches the buggy lines",
                )));
                continue;
            }
            Ok(false) => {}
            Err(e) => {
                planned.push(Planned::Excluded(p.exclusion(kind, Some(id), ExclusionReason::InapplicableCollision, e.to_string())));
                continue;
            }
        }
        match p.fixed_counterpart(&site) {
            Some(fixed_site) => planned.push(Planned::Job(Job {
                base: base_index,
                buggy_site: site,
                fixed_site,
                options: options.clone(),
            })),
            None => planned.push(Planned::Excluded(p.exclusion(
                kind,
                Some(id),
                ExclusionReason::FixedSiteUnmatched,
                "site overlaps the lines changed by the fix",
            ))),
        }
    }
    if kind != TransformKind::InsertTryCatch {
        return planned;
    }
    // One wrapped statement per program, chosen among the eligible ones.
    let (jobs, mut rest): (Vec<Planned>, Vec<Planned>) = planned.into_iter().partition(|x| matches!(x, Planned::Job(_)));
    let jobs: Vec<Job> = jobs
        .into_iter()
        .filter_map(|x| match x {
            Planned::Job(j) => Some(j),
            Planned::Excluded(_) => None,
        })
        .collect();
    let eligible: Vec<TransformSite> = jobs.iter().map(|j| j.buggy_site.clone()).collect();
    let chosen = options.seed.and_then(|s| choose_site(&eligible, s)).map(|s| s.site_id);
    if let Some(chosen) = chosen {
        let job = jobs.into_iter().find(|j| j.buggy_site.site_id == chosen).expect("chosen among jobs");
        rest.push(Planned::Job(job));
    }
    rest
}

fn trimmed_lines_preserved(before: &SourceText, from: LineRange, after: &SourceText, to: LineRange) -> bool {
    from.end - from.start == to.end - to.start
        && (0..=from.end - from.start).all(|i| {
            let a = before.line(from.start + i).map(str::trim);
            let b = after.line(to.start + i).map(str::trim);
            a.is_some() && a == b
        })
}

fn realize(
    p: &Prepared,
    job: &Job,
    harness: Option<&Harness>,
) -> Result<Result<TransformedInstance, Exclusion>, BenchmarkError> {
    let kind = job.buggy_site.kind;
    let site_id = job.buggy_site.site_id;
    let excluded = |reason, detail: String| Ok(Err(p.exclusion(kind, Some(site_id), reason, detail)));
    let applied: Result<(TransformResult, TransformResult), TransformError> = apply(&p.buggy, &job.buggy_site, &job.options)
        .and_then(|b| Ok((b, apply(&p.fixed, &job.fixed_site, &job.options)?)));
    let (mut buggy, fixed) = match applied {
        Ok(pair) => pair,
        Err(e) => return excluded(ExclusionReason::InapplicableCollision, e.to_string()),
    };
    let original = p.base.buggy_lines;
    let span = p
        .buggy
        .text
        .line_span(original.start, original.end)
        .ok_or_else(|| BenchmarkError::Internal(format!("{}: buggy lines out of range", p.base.id)))?;
    buggy.mark_buggy_span(&span);
    let remapped = match remap_buggy_line(&buggy.line_map, original) {
        RemapOutcome::Mapped(r) if !buggy.touched_buggy_line => r,
        _ => return excluded(ExclusionReason::BuggyLineTouched, "edit script touches the buggy lines".into()),
    };
    if !trimmed_lines_preserved(&p.buggy.text, original, &buggy.output, remapped) {
        return Err(BenchmarkError::Internal(format!(
            "{}: buggy line content changed under {kind} at site {site_id}",
            p.base.id
        )));
    }

    let mut test = p.base.test.clone();
    if kind == TransformKind::MethodRename {
        let naming = buggy.provenance.naming.as_ref().expect("rename provenance");
        match rename_qualified_calls(&p.test, p.base.class_name(), &naming.original, &naming.replacement) {
            Ok((renamed, _)) => test = renamed,
            Err(e) => return excluded(ExclusionReason::InapplicableCollision, e.to_string()),
        }
    }

    let validation = match harness {
        Some(h) => {
            let tests = SourceFile::new(&p.base.test_file, test.as_str());
            if !validate_preservation(&p.base.program_file, &fixed, &tests, h)? {
                return excluded(
                    ExclusionReason::PreservationFailed,
                    "transformed fixed program does not pass the tests".into(),
                );
            }
            Validation::Pass
        }
        None => Validation::Skipped,
    };

    Ok(Ok(TransformedInstance {
        id: instance_id(&p.base.id, kind, site_id),
        base_id: p.base.id.clone(),
        kind,
        site_id,
        program_file: p.base.program_file.clone(),
        test_file: p.base.test_file.clone(),
        buggy: buggy.output,
        fixed: fixed.output,
        test,
        buggy_lines: remapped,
        original_buggy_lines: original,
        provenance: buggy.provenance,
        validation,
    }))
}

/// Applies every selected kind to every base instance.
///
/// Renames use the first eligible declaration, InsertTryCatch one seeded
/// choice among eligible statements, and the remaining kinds every eligible
/// site. With a harness, base programs are checked first and every emitted
/// instance's fixed version must pass the tests.
pub fn build_benchmark(
    bases: &[BugInstance],
    options: &BuildOptions,
    provider: &dyn NameProvider,
    harness: Option<&Harness>,
) -> Result<BuildOutput, BenchmarkError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = options.jobs {
        builder = builder.num_threads(jobs.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| BenchmarkError::Internal(format!("thread pool: {e}")))?;
    pool.install(|| build_in_pool(bases, options, provider, harness))
}

fn build_in_pool(
    bases: &[BugInstance],
    options: &BuildOptions,
    provider: &dyn NameProvider,
    harness: Option<&Harness>,
) -> Result<BuildOutput, BenchmarkError> {
    let checked: Vec<Result<Result<Prepared, String>, BenchmarkError>> = bases
        .par_iter()
        .map(|b| {
            let prepared = match prepare(b) {
                Ok(p) => p,
                Err(reason) => return Ok(Err(reason)),
            };
            if let Some(h) = harness {
                if let Some(reason) = check_base(b, h)? {
                    return Ok(Err(reason));
                }
            }
            Ok(Ok(prepared))
        })
        .collect();

    let mut out = BuildOutput {
        validated: harness.is_some(),
        ..BuildOutput::default()
    };
    let mut prepared = Vec::new();
    for (base, result) in bases.iter().zip(checked) {
        match result? {
            Ok(p) => prepared.push(p),
            Err(reason) => {
                log::warn!("skipping {}: {reason}", base.id);
                out.rejected.push(Rejection {
                    id: base.id.clone(),
                    reason,
                });
            }
        }
    }
    out.bases = prepared.iter().map(|p| p.base.clone()).collect();

    let fallback = BuiltinProvider;
    let mut planned = Vec::new();
    for (i, p) in prepared.iter().enumerate() {
        for &kind in &options.kinds {
            if kind.is_rename() {
                planned.extend(plan_rename(p, i, kind, provider, &fallback));
            }
        }
    }
    let structural: Vec<Vec<Planned>> = prepared
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            options
                .kinds
                .iter()
                .filter(|k| !k.is_rename())
                .flat_map(|&k| plan_structural(p, i, k, options.seed))
                .collect()
        })
        .collect();
    planned.extend(structural.into_iter().flatten());

    let (jobs, exclusions): (Vec<Planned>, Vec<Planned>) = planned.into_iter().partition(|x| matches!(x, Planned::Job(_)));
    out.exclusions = exclusions
        .into_iter()
        .filter_map(|x| match x {
            Planned::Excluded(e) => Some(e),
            Planned::Job(_) => None,
        })
        .collect();
    let jobs: Vec<Job> = jobs
        .into_iter()
        .filter_map(|x| match x {
            Planned::Job(j) => Some(j),
            Planned::Excluded(_) => None,
        })
        .collect();
    let realized: Vec<Result<Result<TransformedInstance, Exclusion>, BenchmarkError>> =
        jobs.par_iter().map(|j| realize(&prepared[j.base], j, harness)).collect();
    for r in realized {
        match r? {
            Ok(inst) => out.instances.push(inst),
            Err(ex) => out.exclusions.push(ex),
        }
    }

    let order: BTreeMap<&str, usize> = bases.iter().enumerate().map(|(i, b)| (b.id.as_str(), i)).collect();
    let key = |base: &str, kind: TransformKind, site: Option<usize>| (order[base], kind, site);
    out.instances.sort_by_key(|i| key(&i.base_id, i.kind, Some(i.site_id)));
    out.exclusions.sort_by_key(|e| key(&e.base_id, e.kind, e.site_id));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(buggy: &str, fixed: &str, line: usize) -> BugInstance {
        BugInstance {
            id: "b1".into(),
            program_file: "A.java".into(),
            test_file: "ATest.java".into(),
            buggy: SourceText::new(buggy),
            fixed: SourceText::new(fixed),
            test: SourceText::new("class ATest { public static void main(String[] a) { A.twice(2); } }\n"),
            buggy_lines: LineRange { start: line, end: line },
        }
    }

    const BUGGY: &str = "class A {\n    static int twice(int x) {\n        int temp = x;\n        int y = temp + x;\n        return y + 1;\n    }\n}\n";
    const FIXED: &str = "class A {\n    static int twice(int x) {\n        int temp = x;\n        int y = temp + x;\n        return y;\n    }\n}\n";

    fn build(kinds: &[TransformKind]) -> BuildOutput {
        let opts = BuildOptions {
            kinds: kinds.iter().copied().collect(),
            ..BuildOptions::default()
        };
        build_benchmark(&[base(BUGGY, FIXED, 5)], &opts, &BuiltinProvider, None).unwrap()
    }

    #[test]
    fn offset_map_skips_the_changed_region() {
        let m = OffsetMap::new("ab", "aXb");
        assert_eq!(m.end(1), Some(1));
        assert_eq!(m.start(1), Some(2));
        let m = OffsetMap::new("return y + 1;", "return y;");
        assert_eq!(m.start(0), Some(0));
        assert_eq!(m.end(8), Some(8));
        assert_eq!(m.end(12), Some(8));
        assert_eq!(m.end(10), None);
        assert_eq!(m.start(10), None);
    }

    #[test]
    fn local_rename_skips_declarations_on_buggy_line() {
        let out = build(&[TransformKind::LocalVarRename]);
        assert_eq!(out.instances.len(), 1);
        let inst = &out.instances[0];
        // `temp` is the first declaration not used on the buggy line; `y` is.
        assert_eq!(inst.provenance.naming.as_ref().unwrap().original, "temp");
        assert_eq!(inst.buggy_lines, LineRange { start: 5, end: 5 });
        assert_eq!(inst.buggy.line(5).unwrap().trim(), "return y + 1;");
        assert!(!inst.fixed.as_str().contains("temp"));
    }

    #[test]
    fn method_rename_updates_qualified_test_calls() {
        let out = build(&[TransformKind::MethodRename]);
        let inst = &out.instances[0];
        let new = &inst.provenance.naming.as_ref().unwrap().replacement;
        assert!(inst.test.as_str().contains(&format!("A.{new}(2)")));
        assert!(inst.fixed.as_str().contains(&format!("static int {new}(")));
    }

    #[test]
    fn insert_log_site_touching_nothing_is_kept() {
        let out = build(&[TransformKind::InsertLog]);
        assert_eq!(out.instances.len(), 1);
        assert_eq!(out.instances[0].buggy_lines, LineRange { start: 6, end: 6 });
    }

    #[test]
    fn structural_site_on_buggy_line_is_excluded() {
        let buggy = "class A {\n    static int f(int a, int b) {\n        if (a == b) return 1;\n        return 0;\n    }\n}\n";
        let fixed = "class A {\n    static int f(int a, int b) {\n        if (a == b) return 1;\n        return 2;\n    }\n}\n";
        let opts = BuildOptions {
            kinds: [TransformKind::ReorderCondition].into_iter().collect(),
            ..BuildOptions::default()
        };
        let out = build_benchmark(&[base(buggy, fixed, 3)], &opts, &BuiltinProvider, None).unwrap();
        assert!(out.instances.is_empty());
        assert_eq!(out.exclusions.len(), 1);
        assert_eq!(out.exclusions[0].reason, ExclusionReason::BuggyLineTouched);
    }

    #[test]
    fn try_catch_emits_at_most_one_instance_per_program() {
        let buggy = "class A {\n    static int f(int a) {\n        g();\n        g();\n        g();\n        return a;\n    }\n    static void g() {}\n}\n";
        let fixed = buggy.replace("return a;", "return a + 1;");
        let opts = BuildOptions {
            kinds: [TransformKind::InsertTryCatch].into_iter().collect(),
            ..BuildOptions::default()
        };
        let out = build_benchmark(&[base(buggy, &fixed, 6)], &opts, &BuiltinProvider, None).unwrap();
        assert_eq!(out.instances.len(), 1);
        let again = build_benchmark(&[base(buggy, &fixed, 6)], &opts, &BuiltinProvider, None).unwrap();
        assert_eq!(again.instances[0].id, out.instances[0].id);
    }

    #[test]
    fn trimmed_line_check() {
        let a = SourceText::new("x\n  foo();\n");
        let b = SourceText::new("y\nz\n    foo();\n");
        assert!(trimmed_lines_preserved(&a, LineRange { start: 2, end: 2 }, &b, LineRange { start: 3, end: 3 }));
        assert!(!trimmed_lines_preserved(&a, LineRange { start: 2, end: 2 }, &b, LineRange { start: 2, end: 2 }));
    }
}
