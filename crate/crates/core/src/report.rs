//! Robustness report: original vs transformed scores per kind and model.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::evaluation::{BugResult, EvalSet, ResultsFile};
use crate::metrics::{pass_at_k_term, relative_change, round2, EvalRow, MetricsError, PassReading, SampleStats};
use crate::transforms::TransformKind;

/// Kinds with fewer emitted instances than this get the underpowered marker.
pub const UNDERPOWERED_THRESHOLD: usize = 30;

pub const DEFAULT_K: usize = 10;

pub const UNDERPOWERED_NOTE: &str = "\u{2020} fewer than 30 instances: statistically underpowered, read the change as indicative only. \
The cutoff is a conventional minimum sample size for a stable proportion estimate.";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("model sets differ: only in original results: [{}]; only in transformed results: [{}]", only_orig.join(", "), only_trans.join(", "))]
    ModelMismatch { only_orig: Vec<String>, only_trans: Vec<String> },
    #[error("model `{0}` appears in more than one {1} results file")]
    DuplicateModel(String, &'static str),
    #[error("results for `{model}` are marked {found:?}, expected {expected:?}")]
    WrongSet { model: String, expected: EvalSet, found: EvalSet },
    #[error("model `{model}`: no original result for base `{base_id}` (needed by {instance_id})")]
    MissingOriginal { model: String, base_id: String, instance_id: String },
    #[error("results were produced from different base datasets")]
    DatasetMismatch,
    #[error("model `{model}`, bug {instance_id}: {source}")]
    Metrics {
        model: String,
        instance_id: String,
        #[source]
        source: MetricsError,
    },
    #[error("k must be at least 1")]
    BadK,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportSection {
    pub kind: TransformKind,
    pub instances: usize,
    pub underpowered: bool,
    pub rows: Vec<EvalRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportTable {
    pub k: usize,
    pub sections: Vec<ReportSection>,
    pub footer: Vec<String>,
}

/// Per-bug score for one reading. Bugs with fewer than `k` patches are
/// scored over the patches present; a bug with none counts as unfixed.
fn bug_score(bug: &BugResult, reading: PassReading, k: usize) -> Result<f64, MetricsError> {
    if bug.n == 0 {
        return Ok(0.0);
    }
    let stats = SampleStats::new(bug.n, bug.c, bug.first_pass)?;
    Ok(match reading {
        PassReading::Any => {
            if stats.first_pass.is_some_and(|f| f <= k) {
                1.0
            } else {
                0.0
            }
        }
        PassReading::Unbiased => pass_at_k_term(&stats, k.min(stats.n))?,
    })
}

fn mean_score(model: &str, bugs: &[&BugResult], reading: PassReading, k: usize) -> Result<f64, ReportError> {
    let mut total = 0.0;
    for b in bugs {
        total += bug_score(b, reading, k).map_err(|source| ReportError::Metrics {
            model: model.to_string(),
            instance_id: b.instance_id.clone(),
            source,
        })?;
    }
    Ok(round2(100.0 * total / bugs.len() as f64))
}

fn mean_codebleu(bugs: &[&BugResult]) -> Option<f64> {
    let scores: Vec<f64> = bugs.iter().filter_map(|b| b.codebleu).collect();
    (!scores.is_empty()).then(|| round2(100.0 * scores.iter().sum::<f64>() / scores.len() as f64))
}

fn index_models<'a>(
    files: &'a [ResultsFile],
    expected: EvalSet,
    label: &'static str,
) -> Result<BTreeMap<&'a str, &'a ResultsFile>, ReportError> {
    let mut out = BTreeMap::new();
    for f in files {
        if f.set != expected {
            return Err(ReportError::WrongSet {
                model: f.model.clone(),
                expected,
                found: f.set,
            });
        }
        if out.insert(f.model.as_str(), f).is_some() {
            return Err(ReportError::DuplicateModel(f.model.clone(), label));
        }
    }
    Ok(out)
}

/// Joins original and transformed results per model on the base id.
///
/// Each transformed instance is paired with its base bug's original result,
/// so both columns of a row are computed over the same bugs.
pub fn build_report(orig: &[ResultsFile], trans: &[ResultsFile], k: usize) -> Result<ReportTable, ReportError> {
    if k == 0 {
        return Err(ReportError::BadK);
    }
    let orig_by_model = index_models(orig, EvalSet::Original, "original")?;
    let trans_by_model = index_models(trans, EvalSet::Transformed, "transformed")?;
    let orig_models: BTreeSet<&str> = orig_by_model.keys().copied().collect();
    let trans_models: BTreeSet<&str> = trans_by_model.keys().copied().collect();
    if orig_models != trans_models {
        return Err(ReportError::ModelMismatch {
            only_orig: orig_models.difference(&trans_models).map(|s| s.to_string()).collect(),
            only_trans: trans_models.difference(&orig_models).map(|s| s.to_string()).collect(),
        });
    }
    let digests: BTreeSet<&str> = orig.iter().chain(trans).map(|f| f.base_dataset_digest.as_str()).collect();
    if digests.len() > 1 {
        return Err(ReportError::DatasetMismatch);
    }

    let kinds: BTreeSet<TransformKind> = trans
        .iter()
        .flat_map(|f| f.kinds.iter().copied().chain(f.bugs.iter().filter_map(|b| b.kind)))
        .collect();
    // Sections follow the canonical kind order.
    let kinds: Vec<TransformKind> = TransformKind::ALL.into_iter().filter(|k| kinds.contains(k)).collect();

    let mut sections = Vec::new();
    for kind in kinds {
        let mut rows = Vec::new();
        let mut instances = 0;
        for (model, trans_file) in &trans_by_model {
            let base: BTreeMap<&str, &BugResult> =
                orig_by_model[model].bugs.iter().map(|b| (b.base_id.as_str(), b)).collect();
            let trans_bugs: Vec<&BugResult> = trans_file.bugs.iter().filter(|b| b.kind == Some(kind)).collect();
            instances = instances.max(trans_bugs.len());
            if trans_bugs.is_empty() {
                continue;
            }
            let orig_bugs = trans_bugs
                .iter()
                .map(|t| {
                    base.get(t.base_id.as_str()).copied().ok_or_else(|| ReportError::MissingOriginal {
                        model: model.to_string(),
                        base_id: t.base_id.clone(),
                        instance_id: t.instance_id.clone(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            for reading in [PassReading::Any, PassReading::Unbiased] {
                let pass_orig = mean_score(model, &orig_bugs, reading, k)?;
                let pass_trans = mean_score(model, &trans_bugs, reading, k)?;
                rows.push(EvalRow {
                    model: model.to_string(),
                    kind,
                    reading,
                    k,
                    bugs: trans_bugs.len(),
                    pass_orig,
                    pass_trans,
                    codebleu_orig: mean_codebleu(&orig_bugs),
                    codebleu_trans: mean_codebleu(&trans_bugs),
                    change: relative_change(pass_orig, pass_trans),
                });
            }
        }
        sections.push(ReportSection {
            kind,
            instances,
            underpowered: instances < UNDERPOWERED_THRESHOLD,
            rows,
        });
    }

    let mut footer = Vec::new();
    if sections.iter().any(|s| s.underpowered) {
        footer.push(UNDERPOWERED_NOTE.to_string());
    }
    footer.push(format!(
        "pass@{k} readings: {} counts a bug as fixed if one of its first {k} patches passes; {} is the unbiased estimator over all patches.",
        PassReading::Any.label(),
        PassReading::Unbiased.label()
    ));
    let missing: usize = orig.iter().chain(trans).map(|f| f.missing().count()).sum();
    if missing > 0 {
        footer.push(format!("{missing} bug result(s) had no patches and count as unfixed."));
    }
    Ok(ReportTable { k, sections, footer })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"))
}

impl ReportTable {
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        for s in &self.sections {
            let mark = if s.underpowered { "\u{2020}" } else { "" };
            let _ = writeln!(out, "{} ({} instances){mark}", s.kind.title(), s.instances);
            if s.rows.is_empty() {
                let _ = writeln!(out, "  (no instances)\n");
                continue;
            }
            let header = [
                "model".to_string(),
                "reading".to_string(),
                format!("pass@{} orig", self.k),
                "trans".to_string(),
                "change".to_string(),
                "CodeBLEU orig".to_string(),
                "trans".to_string(),
            ];
            let body: Vec<[String; 7]> = s
                .rows
                .iter()
                .map(|r| {
                    [
                        r.model.clone(),
                        r.reading.label().to_string(),
                        format!("{:.2}", r.pass_orig),
                        format!("{:.2}", r.pass_trans),
                        r.change.to_string(),
                        opt(r.codebleu_orig),
                        opt(r.codebleu_trans),
                    ]
                })
                .collect();
            let mut widths = header.clone().map(|h| h.chars().count());
            for row in &body {
                for (w, cell) in widths.iter_mut().zip(row) {
                    *w = (*w).max(cell.chars().count());
                }
            }
            for row in std::iter::once(&header).chain(&body) {
                let cells: Vec<String> = row
                    .iter()
                    .zip(widths)
                    .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
                    .collect();
                let _ = writeln!(out, "  {}", cells.join("  ").trim_end());
            }
            out.push('\n');
        }
        for line in &self.footer {
            let _ = writeln!(out, "{line}");
        }
        out
    }

    pub fn render_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header = [
            "kind", "instances", "underpowered", "model", "reading", "k", "bugs", "pass_orig", "pass_trans", "change",
            "direction", "codebleu_orig", "codebleu_trans",
        ];
        w.write_record(header).expect("in-memory csv");
        for s in &self.sections {
            for r in &s.rows {
                w.write_record([
                    s.kind.name().to_string(),
                    s.instances.to_string(),
                    s.underpowered.to_string(),
                    r.model.clone(),
                    r.reading.label().to_string(),
                    r.k.to_string(),
                    r.bugs.to_string(),
                    format!("{:.2}", r.pass_orig),
                    format!("{:.2}", r.pass_trans),
                    r.change.change.map_or_else(|| "undefined".into(), |c| format!("{c:.2}")),
                    format!("{:?}", r.change.direction).to_lowercase(),
                    opt(r.codebleu_orig),
                    opt(r.codebleu_trans),
                ])
                .expect("in-memory csv");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 fields")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::RESULTS_VERSION;

    fn bug(id: &str, base: &str, kind: Option<TransformKind>, passes: &[bool]) -> BugResult {
        let first_pass = passes.iter().position(|&p| p).map(|i| i + 1);
        BugResult {
            instance_id: id.into(),
            base_id: base.into(),
            kind,
            n: passes.len(),
            c: passes.iter().filter(|&&p| p).count(),
            first_pass,
            codebleu: Some(0.5),
            patches: Vec::new(),
        }
    }

    fn file(model: &str, set: EvalSet, bugs: Vec<BugResult>) -> ResultsFile {
        ResultsFile {
            version: RESULTS_VERSION,
            model: model.into(),
            set,
            base_dataset_digest: "d".into(),
            kinds: vec![TransformKind::LoopExchange, TransformKind::BooleanExchange],
            bugs,
        }
    }

    fn fixture() -> (Vec<ResultsFile>, Vec<ResultsFile>) {
        let loop_k = Some(TransformKind::LoopExchange);
        let orig = file(
            "m",
            EvalSet::Original,
            vec![bug("a", "a", None, &[true, false]), bug("b", "b", None, &[false, true])],
        );
        let trans = file(
            "m",
            EvalSet::Transformed,
            vec![bug("a-L-0", "a", loop_k, &[false, false]), bug("b-L-0", "b", loop_k, &[false, true])],
        );
        (vec![orig], vec![trans])
    }

    #[test]
    fn joins_on_base_and_computes_both_readings() {
        let (o, t) = fixture();
        let table = build_report(&o, &t, 1).unwrap();
        let loops = &table.sections[1];
        assert_eq!(loops.kind, TransformKind::LoopExchange);
        let any = &loops.rows[0];
        assert_eq!((any.pass_orig, any.pass_trans), (50.0, 0.0));
        assert_eq!(any.change.to_string(), "100.00\u{2193}");
        let unbiased = &loops.rows[1];
        assert_eq!((unbiased.pass_orig, unbiased.pass_trans), (50.0, 25.0));
        assert_eq!(unbiased.change.to_string(), "50.00\u{2193}");
    }

    #[test]
    fn empty_and_small_kinds_are_marked() {
        let (o, t) = fixture();
        let table = build_report(&o, &t, 2).unwrap();
        let boolean = &table.sections[0];
        assert_eq!(boolean.kind, TransformKind::BooleanExchange);
        assert!(boolean.underpowered && boolean.rows.is_empty());
        let text = table.render_table();
        assert!(text.contains("Loop Exchange (2 instances)\u{2020}"));
        assert!(text.contains(UNDERPOWERED_NOTE));
    }

    #[test]
    fn model_mismatch_lists_both_sides() {
        let (o, mut t) = fixture();
        t[0].model = "other".into();
        match build_report(&o, &t, 1) {
            Err(ReportError::ModelMismatch { only_orig, only_trans }) => {
                assert_eq!(only_orig, vec!["m"]);
                assert_eq!(only_trans, vec!["other"]);
            }
            other => panic!("expected mismatch, got {other:?}"),
        }
    }

    #[test]
    fn csv_has_one_record_per_row() {
        let (o, t) = fixture();
        let csv = build_report(&o, &t, 1).unwrap().render_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("LoopExchange,2,true,m,any-of-first-k,1,2,50.00,0.00,100.00,down,"));
    }

    #[test]
    fn rendering_is_stable() {
        let (o, t) = fixture();
        assert_eq!(build_report(&o, &t, 1).unwrap().render_table(), build_report(&o, &t, 1).unwrap().render_table());
    }
}
