//! Execution-based and similarity-based scores.

use std::collections::HashMap;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{parse_source, SourceText, SyntaxNode};
use crate::transforms::TransformKind;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("no bugs to score")]
    EmptyBugList,
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("cannot tokenize: {0}")]
    Tokenize(String),
}

/// Outcome counts for one bug.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleStats {
    /// Generated patches.
    pub n: usize,
    /// Passing patches.
    pub c: usize,
    /// 1-based ordinal of the first passing patch, if any.
    pub first_pass: Option<usize>,
}

impl SampleStats {
    pub fn new(n: usize, c: usize, first_pass: Option<usize>) -> Result<Self, MetricsError> {
        let s = SampleStats { n, c, first_pass };
        s.check()?;
        Ok(s)
    }

    /// Stats from per-patch pass flags in ordinal order.
    pub fn from_outcomes(outcomes: &[bool]) -> Result<Self, MetricsError> {
        SampleStats::new(
            outcomes.len(),
            outcomes.iter().filter(|&&p| p).count(),
            outcomes.iter().position(|&p| p).map(|i| i + 1),
        )
    }

    fn check(&self) -> Result<(), MetricsError> {
        if self.n == 0 {
            return Err(MetricsError::Contract("n must be at least 1".into()));
        }
        if self.c > self.n {
            return Err(MetricsError::Contract(format!("c = {} exceeds n = {}", self.c, self.n)));
        }
        let consistent = match self.first_pass {
            None => self.c == 0,
            Some(f) => self.c > 0 && f >= 1 && f <= self.n,
        };
        if !consistent {
            return Err(MetricsError::Contract(format!("first_pass {:?} inconsistent with c = {}", self.first_pass, self.c)));
        }
        Ok(())
    }
}

/// Percentage of bugs with a passing patch among the first `k` samples.
/// Bugs with fewer than `k` samples use all of them.
pub fn pass_at_k_any(per_bug: &[SampleStats], k: usize) -> Result<f64, MetricsError> {
    if per_bug.is_empty() {
        return Err(MetricsError::EmptyBugList);
    }
    if k == 0 {
        return Err(MetricsError::Contract("k must be at least 1".into()));
    }
    let mut fixed = 0usize;
    for s in per_bug {
        s.check()?;
        if s.first_pass.is_some_and(|f| f <= k) {
            fixed += 1;
        }
    }
    Ok(100.0 * fixed as f64 / per_bug.len() as f64)
}

/// Per-bug `1 - C(n-c, k) / C(n, k)` via the product form
/// `1 - prod_{i=n-c+1}^{n} (1 - k/i)`.
pub fn pass_at_k_term(stats: &SampleStats, k: usize) -> Result<f64, MetricsError> {
    stats.check()?;
    if k == 0 || k > stats.n {
        return Err(MetricsError::Contract(format!("k = {k} must be in 1..={}", stats.n)));
    }
    let (n, c) = (stats.n, stats.c);
    if n - c < k {
        return Ok(1.0);
    }
    let prod: f64 = ((n - c + 1)..=n).map(|i| 1.0 - k as f64 / i as f64).product();
    Ok(1.0 - prod)
}

/// Exact per-bug term `1 - C(n-c, k) / C(n, k)` as a reduced fraction.
pub fn pass_at_k_term_exact(stats: &SampleStats, k: usize) -> Result<Ratio<u128>, MetricsError> {
    stats.check()?;
    if k == 0 || k > stats.n {
        return Err(MetricsError::Contract(format!("k = {k} must be in 1..={}", stats.n)));
    }
    let (n, c) = (stats.n as u128, stats.c as u128);
    let k = k as u128;
    if n - c < k {
        return Ok(Ratio::from_integer(1));
    }
    let miss = ((n - c + 1)..=n).fold(Ratio::from_integer(1u128), |acc, i| acc * Ratio::new(i - k, i));
    Ok(Ratio::from_integer(1) - miss)
}

/// Mean unbiased pass@k estimate over bugs, as a percentage.
pub fn pass_at_k_unbiased(per_bug: &[SampleStats], k: usize) -> Result<f64, MetricsError> {
    if per_bug.is_empty() {
        return Err(MetricsError::EmptyBugList);
    }
    let mut total = 0.0;
    for s in per_bug {
        total += pass_at_k_term(s, k)?;
    }
    Ok(100.0 * total / per_bug.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
    None,
}

impl Direction {
    pub fn arrow(self) -> &'static str {
        match self {
            Direction::Up => "↑",
            Direction::Down => "↓",
            Direction::None => "",
        }
    }
}

/// Relative change between an original and a transformed score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeChange {
    /// Percent, rounded to 2 decimals; `None` when the original is zero and
    /// the transformed score is not.
    pub change: Option<f64>,
    pub direction: Direction,
}

pub const UNDEFINED_FROM_ZERO: &str = "undefined (from zero)";

impl fmt::Display for RelativeChange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.change, self.direction) {
            (None, d) => write!(f, "{UNDEFINED_FROM_ZERO}{}", d.arrow()),
            (Some(_), Direction::None) => f.write_str("0%"),
            (Some(c), d) => write!(f, "{c:.2}{}", d.arrow()),
        }
    }
}

pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// `100 * |trans - orig| / orig`, rounded to 2 decimals, with direction.
pub fn relative_change(orig: f64, trans: f64) -> RelativeChange {
    let direction = if trans > orig {
        Direction::Up
    } else if trans < orig {
        Direction::Down
    } else {
        Direction::None
    };
    if orig == 0.0 {
        return RelativeChange {
            change: (direction == Direction::None).then_some(0.0),
            direction,
        };
    }
    RelativeChange {
        change: Some(round2(100.0 * (trans - orig).abs() / orig.abs())),
        direction,
    }
}

/// Which pass@k estimator a row reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PassReading {
    /// Any of the first k patches passes.
    Any,
    /// Unbiased estimator over all n patches.
    Unbiased,
}

impl PassReading {
    pub fn label(self) -> &'static str {
        match self {
            PassReading::Any => "any-of-first-k",
            PassReading::Unbiased => "unbiased",
        }
    }
}

/// One (model, kind) comparison row. Scores are percentages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub model: String,
    pub kind: TransformKind,
    pub reading: PassReading,
    pub k: usize,
    pub bugs: usize,
    pub pass_orig: f64,
    pub pass_trans: f64,
    pub codebleu_orig: Option<f64>,
    pub codebleu_trans: Option<f64>,
    pub change: RelativeChange,
}

// CodeBLEU subset

pub const JAVA_KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "final", "finally", "float",
    "for", "goto", "if", "implements", "import", "instanceof", "int", "interface", "long", "native",
    "new", "package", "private", "protected", "public", "return", "short", "static", "strictfp",
    "super", "switch", "synchronized", "this", "throw", "throws", "transient", "try", "void",
    "volatile", "while", "true", "false", "null", "var", "record", "yield",
];

pub const KEYWORD_WEIGHT: f64 = 5.0;

pub const MAX_ORDER: usize = 4;

pub const MAX_SUBTREE_HEIGHT: usize = 3;

const ATOMIC_KINDS: &[&str] = &["string_literal", "character_literal", "text_block"];

fn is_comment(node: &SyntaxNode) -> bool {
    matches!(node.kind(), "line_comment" | "block_comment")
}

fn parse_for_metrics(source: &str) -> Result<(SourceText, SyntaxNode), MetricsError> {
    let text = SourceText::new(source);
    let tree = parse_source(&text).map_err(|e| MetricsError::Tokenize(e.to_string()))?;
    let root = tree.root().clone();
    if let Some(bad) = root
        .descendants()
        .find(|n| n.is_error() && n.is_leaf() && !n.span().is_empty())
    {
        return Err(MetricsError::Tokenize(format!(
            "unrecognized text {:?} at line {}",
            text.slice(&bad.span()),
            bad.span().start_line
        )));
    }
    Ok((text, root))
}

fn collect_tokens(node: &SyntaxNode, text: &SourceText, out: &mut Vec<String>) {
    if is_comment(node) || (node.is_leaf() && node.span().is_empty()) {
        return;
    }
    if node.is_leaf() || ATOMIC_KINDS.contains(&node.kind()) {
        out.push(node.text(text).to_string());
        return;
    }
    for c in node.children() {
        collect_tokens(c, text, out);
    }
}

/// Code tokens in document order; comments dropped, string literals whole.
pub fn tokenize(source: &str) -> Result<Vec<String>, MetricsError> {
    let (text, root) = parse_for_metrics(source)?;
    let mut out = Vec::new();
    collect_tokens(&root, &text, &mut out);
    Ok(out)
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for g in tokens.windows(n) {
            *counts.entry(g).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped n-gram matches and total hypothesis n-grams.
pub fn ngram_matches(reference: &[String], hypothesis: &[String], n: usize) -> (usize, usize) {
    let r = ngram_counts(reference, n);
    let h = ngram_counts(hypothesis, n);
    let matched = h.iter().map(|(g, &c)| c.min(r.get(g).copied().unwrap_or(0))).sum();
    (matched, hypothesis.len().saturating_sub(n - 1))
}

fn brevity_penalty(ref_len: usize, hyp_len: usize) -> f64 {
    if hyp_len == 0 {
        0.0
    } else if hyp_len > ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    }
}

/// Precision with add-one smoothing when nothing matched.
fn smoothed(matched: f64, total: f64) -> f64 {
    if matched == 0.0 {
        1.0 / (total + 1.0)
    } else {
        matched / total
    }
}

fn geometric_mean(precisions: &[f64]) -> f64 {
    (precisions.iter().map(|p| p.ln()).sum::<f64>() / precisions.len() as f64).exp()
}

/// BLEU-4 of one hypothesis against one reference.
pub fn bleu(reference: &[String], hypothesis: &[String]) -> f64 {
    let bp = brevity_penalty(reference.len(), hypothesis.len());
    if bp == 0.0 {
        return 0.0;
    }
    let precisions: Vec<f64> = (1..=MAX_ORDER)
        .map(|n| {
            let (m, t) = ngram_matches(reference, hypothesis, n);
            smoothed(m as f64, t as f64)
        })
        .collect();
    (bp * geometric_mean(&precisions)).clamp(0.0, 1.0)
}

fn token_weight(token: &str) -> f64 {
    if JAVA_KEYWORDS.contains(&token) {
        KEYWORD_WEIGHT
    } else {
        1.0
    }
}

/// BLEU-4 whose unigram precision weights keyword tokens by [`KEYWORD_WEIGHT`].
pub fn weighted_bleu(reference: &[String], hypothesis: &[String]) -> f64 {
    let bp = brevity_penalty(reference.len(), hypothesis.len());
    if bp == 0.0 {
        return 0.0;
    }
    let r = ngram_counts(reference, 1);
    let h = ngram_counts(hypothesis, 1);
    let (mut matched, mut total) = (0.0, 0.0);
    for (g, &c) in &h {
        let w = token_weight(&g[0]);
        matched += w * c.min(r.get(g).copied().unwrap_or(0)) as f64;
        total += w * c as f64;
    }
    let mut precisions = vec![smoothed(matched, total)];
    for n in 2..=MAX_ORDER {
        let (m, t) = ngram_matches(reference, hypothesis, n);
        precisions.push(smoothed(m as f64, t as f64));
    }
    (bp * geometric_mean(&precisions)).clamp(0.0, 1.0)
}

fn subtree_key(node: &SyntaxNode, text: &SourceText) -> String {
    if node.is_leaf() {
        return format!("{}:{}", node.kind(), node.text(text));
    }
    let inner: Vec<String> = node
        .children()
        .iter()
        .filter(|c| !is_comment(c) && !(c.is_leaf() && c.span().is_empty()))
        .map(|c| subtree_key(c, text))
        .collect();
    format!("({} {})", node.kind(), inner.join(" "))
}

/// Multiset of complete subtrees of height at most [`MAX_SUBTREE_HEIGHT`].
fn subtrees(root: &SyntaxNode, text: &SourceText) -> HashMap<String, usize> {
    let mut out = HashMap::new();
    for node in root.descendants() {
        if is_comment(node) || (node.is_leaf() && node.span().is_empty()) {
            continue;
        }
        if node.height() <= MAX_SUBTREE_HEIGHT {
            *out.entry(subtree_key(node, text)).or_insert(0) += 1;
        }
    }
    out
}

/// Fraction of reference subtrees also present in the hypothesis.
pub fn ast_match(reference: &str, hypothesis: &str) -> Result<f64, MetricsError> {
    let (rt, rroot) = parse_for_metrics(reference)?;
    let (ht, hroot) = parse_for_metrics(hypothesis)?;
    let r = subtrees(&rroot, &rt);
    let h = subtrees(&hroot, &ht);
    let total: usize = r.values().sum();
    if total == 0 {
        return Ok(if h.is_empty() { 1.0 } else { 0.0 });
    }
    let matched: usize = r.iter().map(|(k, &c)| c.min(h.get(k).copied().unwrap_or(0))).sum();
    Ok(matched as f64 / total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeBleuWeights {
    pub ngram: f64,
    pub weighted_ngram: f64,
    pub ast: f64,
}

impl Default for CodeBleuWeights {
    fn default() -> Self {
        CodeBleuWeights {
            ngram: 1.0 / 3.0,
            weighted_ngram: 1.0 / 3.0,
            ast: 1.0 / 3.0,
        }
    }
}

impl CodeBleuWeights {
    pub fn validate(&self) -> Result<(), MetricsError> {
        let w = [self.ngram, self.weighted_ngram, self.ast];
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(MetricsError::Contract(format!("weights {w:?} must be nonnegative and sum to 1")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeBleuScore {
    pub ngram: f64,
    pub weighted_ngram: f64,
    pub ast: f64,
    pub total: f64,
}

/// N-gram, keyword-weighted n-gram and syntax-subtree match, combined.
pub fn codebleu_subset(reference: &str, hypothesis: &str, weights: CodeBleuWeights) -> Result<CodeBleuScore, MetricsError> {
    weights.validate()?;
    let r = tokenize(reference)?;
    let h = tokenize(hypothesis)?;
    let (ngram, weighted_ngram) = if r == h {
        (1.0, 1.0)
    } else {
        (bleu(&r, &h), weighted_bleu(&r, &h))
    };
    let ast = ast_match(reference, hypothesis)?;
    let total = if ngram == 1.0 && weighted_ngram == 1.0 && ast == 1.0 {
        1.0
    } else {
        (weights.ngram * ngram + weights.weighted_ngram * weighted_ngram + weights.ast * ast).clamp(0.0, 1.0)
    };
    Ok(CodeBleuScore {
        ngram,
        weighted_ngram,
        ast,
        total,
    })
}

/// Mean total score over pairs; pairs that fail to tokenize are logged and
/// left out. `None` when no pair could be scored.
pub fn mean_codebleu<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>, weights: CodeBleuWeights) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for (reference, hypothesis) in pairs {
        match codebleu_subset(reference, hypothesis, weights) {
            Ok(s) => {
                sum += s.total;
                n += 1;
            }
            Err(e) => log::warn!("codebleu pair skipped: {e}"),
        }
    }
    (n > 0).then(|| sum / n as f64)
}
