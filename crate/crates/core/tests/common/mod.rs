//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use repairbench_core::syntax::{apply_edits, Edit, LineTarget, SourceText};

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus")
}

pub fn corpus_manifest() -> PathBuf {
    corpus_dir().join("corpus.jsonl")
}

/// Every `.java` file under the corpus, sorted.
pub fn corpus_files() -> Vec<PathBuf> {
    fn walk(dir: &Path, out: &mut Vec<PathBuf>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(&path, out);
            } else if path.extension().is_some_and(|e| e == "java") {
                out.push(path);
            }
        }
    }
    let mut out = Vec::new();
    walk(&corpus_dir(), &mut out);
    out.sort();
    out
}

/// Fraction of k-subsets of n samples (c of them passing) that contain a
/// passing sample, by listing every subset.
pub fn enumerate_pass_at_k(n: usize, c: usize, k: usize) -> Ratio<u128> {
    let (mut hit, mut total) = (0u128, 0u128);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        total += 1;
        // Samples 0..c pass.
        if (0..c).any(|i| mask & (1 << i) != 0) {
            hit += 1;
        }
    }
    Ratio::new(hit, total)
}

/// Clipped n-gram overlap by comparing every hypothesis window with every
/// reference window.
pub fn brute_force_ngram_matches(reference: &[String], hypothesis: &[String], n: usize) -> (usize, usize) {
    if hypothesis.len() < n {
        return (0, 0);
    }
    let windows = |t: &[String]| -> Vec<Vec<String>> {
        if t.len() < n {
            Vec::new()
        } else {
            (0..=t.len() - n).map(|i| t[i..i + n].to_vec()).collect()
        }
    };
    let hyp = windows(hypothesis);
    let reference = windows(reference);
    let mut used = vec![false; reference.len()];
    let mut matched = 0;
    for g in &hyp {
        if let Some(j) = (0..reference.len()).find(|&j| !used[j] && &reference[j] == g) {
            used[j] = true;
            matched += 1;
        }
    }
    (matched, hyp.len())
}

/// Random non-overlapping edit script over `text`, built from sorted cut
/// points so edits never intersect.
pub fn random_edit_script(text: &SourceText, rng: &mut ChaCha8Rng) -> Vec<Edit> {
    let len = text.len();
    let count = rng.gen_range(1..=6);
    let mut points: Vec<usize> = (0..count * 2)
        .map(|_| rng.gen_range(0..=len))
        .filter(|&p| text.as_str().is_char_boundary(p))
        .collect();
    points.sort_unstable();
    let pieces = ["", "x", "\n", "foo();\n", "  ", "a\nb", "\n\n", "// c\n"];
    let mut edits: Vec<Edit> = Vec::new();
    for pair in points.chunks(2) {
        let (start, end) = match *pair {
            [a, b] => (a, if rng.gen_bool(0.4) { a } else { b }),
            [a] => (a, a),
            _ => unreachable!(),
        };
        let replacement = pieces[rng.gen_range(0..pieces.len())].to_string();
        if start == end && replacement.is_empty() {
            continue;
        }
        if let Some(prev) = edits.last() {
            let same_point_inserts = prev.target.is_empty() && start == end && prev.target.start_byte == start;
            if prev.target.end_byte > start || same_point_inserts {
                continue;
            }
        }
        edits.push(Edit::replace(text, start, end, replacement));
    }
    edits
}

/// Checks a line map against the text it came from. Returns a description
/// of the first violation.
///
/// Soundness: every line mapped as untouched has identical content at its
/// new position. Completeness: a line with no edit within one byte of it is
/// mapped as untouched. Order: untouched lines keep their relative order.
pub fn check_line_map(text: &SourceText, edits: &[Edit]) -> Result<(), String> {
    let (out, map) = apply_edits(text, edits).map_err(|e| e.to_string())?;
    let mut previous = 0;
    for line in 1..=text.line_count() {
        let range = text.line_range(line).unwrap();
        match map.map_line(line) {
            Some(LineTarget::Line(m)) => {
                if out.line(m) != text.line(line) {
                    return Err(format!("line {line} -> {m}: {:?} != {:?}", text.line(line), out.line(m)));
                }
                if m <= previous {
                    return Err(format!("line {line} -> {m} breaks order"));
                }
                previous = m;
            }
            Some(_) => {
                let near = edits.iter().any(|e| {
                    e.target.start_byte <= range.end && e.target.end_byte + 1 >= range.start
                });
                if !near {
                    return Err(format!("line {line} marked edited with no edit nearby"));
                }
            }
            None => return Err(format!("line {line} unmapped")),
        }
    }
    Ok(())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Published (orig, trans, change, arrow) Pass@10 rows, five models per kind.
pub fn published_change_rows() -> Vec<(&'static str, f64, f64, f64, &'static str)> {
    vec![
        ("LocalVarRename", 14.53, 6.54, 54.99, "↓"),
        ("LocalVarRename", 21.88, 9.91, 54.71, "↓"),
        ("LocalVarRename", 19.35, 8.26, 57.31, "↓"),
        ("LocalVarRename", 24.81, 12.28, 50.5, "↓"),
        ("LocalVarRename", 23.66, 11.5, 51.39, "↓"),
        ("MethodRename", 19.46, 18.13, 6.83, "↓"),
        ("MethodRename", 23.98, 22.8, 4.92, "↓"),
        ("MethodRename", 21.16, 19.46, 8.03, "↓"),
        ("MethodRename", 25.87, 24.37, 5.8, "↓"),
        ("MethodRename", 24.75, 23.98, 3.11, "↓"),
        ("ParamRename", 17.86, 18.69, 4.65, "↑"),
        ("ParamRename", 22.6, 23.33, 3.23, "↑"),
        ("ParamRename", 20.3, 19.1, 5.91, "↓"),
        ("ParamRename", 24.77, 24.41, 1.45, "↓"),
        ("ParamRename", 24.41, 23.7, 2.91, "↓"),
        ("BooleanExchange", 12.5, 22.22, 77.76, "↑"),
        ("BooleanExchange", 22.22, 30.0, 35.01, "↑"),
        ("BooleanExchange", 22.22, 22.22, 0.0, ""),
        ("BooleanExchange", 22.22, 12.5, 43.74, "↓"),
        ("BooleanExchange", 12.5, 12.5, 0.0, ""),
        ("LoopExchange", 19.32, 18.39, 4.81, "↓"),
        ("LoopExchange", 25.26, 23.66, 6.33, "↓"),
        ("LoopExchange", 21.55, 17.92, 16.84, "↓"),
        ("LoopExchange", 26.04, 23.66, 9.14, "↓"),
        ("LoopExchange", 28.28, 26.8, 5.23, "↓"),
        ("ReorderCondition", 16.88, 15.69, 7.05, "↓"),
        ("ReorderCondition", 21.41, 18.48, 13.69, "↓"),
        ("ReorderCondition", 19.7, 17.92, 9.04, "↓"),
        ("ReorderCondition", 23.25, 20.99, 9.72, "↓"),
        ("ReorderCondition", 23.45, 21.62, 7.8, "↓"),
        ("InsertLog", 17.22, 16.43, 4.59, "↓"),
        ("InsertLog", 22.07, 22.42, 1.59, "↑"),
        ("InsertLog", 19.53, 18.4, 5.79, "↓"),
        ("InsertLog", 24.45, 22.07, 9.73, "↓"),
        ("InsertLog", 24.78, 24.45, 1.33, "↓"),
        ("InsertTryCatch", 16.91, 13.74, 18.75, "↓"),
        ("InsertTryCatch", 21.53, 19.29, 10.4, "↓"),
        ("InsertTryCatch", 19.29, 11.02, 42.87, "↓"),
        ("InsertTryCatch", 25.17, 18.12, 28.01, "↓"),
        ("InsertTryCatch", 26.14, 18.12, 30.68, "↓"),
    ]
}

/// Pairs of compilation units that share no token.
pub fn token_disjoint_pairs() -> Vec<(String, String)> {
    (0..20)
        .map(|i| {
            (
                format!("import p{i}.q{i}.R{i};\nimport p{i}.s{i}.T{i};\n"),
                format!("enum E{i} {{ A{i}, B{i}, C{i} }}\n"),
            )
        })
        .collect()
}
