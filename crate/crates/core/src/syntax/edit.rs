//! Span-tracked text edits and the line map they induce.

use serde::{Deserialize, Serialize};

use super::{SourceText, Span, SyntaxError};

/// Replace `target` (a span of the original text) with `replacement`.
/// An empty target is a pure insertion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edit {
    pub target: Span,
    pub replacement: String,
}

impl Edit {
    pub fn replace(text: &SourceText, start: usize, end: usize, replacement: impl Into<String>) -> Self {
        Edit {
            target: text.span(start, end),
            replacement: replacement.into(),
        }
    }

    pub fn insert(text: &SourceText, at: usize, replacement: impl Into<String>) -> Self {
        Edit::replace(text, at, at, replacement)
    }

    fn start(&self) -> usize {
        self.target.start_byte
    }

    fn end(&self) -> usize {
        self.target.end_byte
    }

    fn delta(&self) -> isize {
        self.replacement.len() as isize - self.target.len() as isize
    }
}

/// Where an original line ended up after an edit script.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LineTarget {
    /// Untouched line, now at this 1-based line of the output.
    Line(usize),
    /// Line touched by an edit; its rewritten text spans these output lines.
    Rewritten { start: usize, end: usize },
    /// Line removed outright.
    Deleted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
enum SegmentTarget {
    Shift(isize),
    Rewritten { start: usize, end: usize },
    Deleted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Segment {
    first: usize,
    last: usize,
    target: SegmentTarget,
}

/// Total map from original line numbers to output lines.
///
/// Maximal runs of untouched lines are stored as shifts; runs of touched
/// lines map as a block onto the output lines their rewritten text occupies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineMap {
    original_lines: usize,
    segments: Vec<Segment>,
}

impl LineMap {
    pub fn identity(lines: usize) -> Self {
        LineMap {
            original_lines: lines,
            segments: vec![Segment {
                first: 1,
                last: lines,
                target: SegmentTarget::Shift(0),
            }],
        }
    }

    pub fn original_lines(&self) -> usize {
        self.original_lines
    }

    pub fn is_identity(&self) -> bool {
        self.segments
            .iter()
            .all(|s| s.target == SegmentTarget::Shift(0))
    }

    pub fn map_line(&self, line: usize) -> Option<LineTarget> {
        let segment = self
            .segments
            .iter()
            .find(|s| s.first <= line && line <= s.last)?;
        Some(match segment.target {
            SegmentTarget::Shift(d) => LineTarget::Line((line as isize + d) as usize),
            SegmentTarget::Rewritten { start, end } => LineTarget::Rewritten { start, end },
            SegmentTarget::Deleted => LineTarget::Deleted,
        })
    }

    /// True if any edit touched a line in `first..=last`.
    pub fn touches(&self, first: usize, last: usize) -> bool {
        (first..=last).any(|l| !matches!(self.map_line(l), Some(LineTarget::Line(_))))
    }

    /// Maps an untouched inclusive line range; `None` if any line in it was edited.
    pub fn map_range(&self, first: usize, last: usize) -> Option<(usize, usize)> {
        let mut mapped = Vec::with_capacity(last + 1 - first);
        for line in first..=last {
            match self.map_line(line)? {
                LineTarget::Line(l) => mapped.push(l),
                _ => return None,
            }
        }
        Some((*mapped.first()?, *mapped.last()?))
    }
}

/// Applies a non-overlapping edit script in position order.
///
/// Two edits overlap when their byte ranges intersect, or when both are
/// insertions at the same offset (their relative order would be ambiguous).
pub fn apply_edits(text: &SourceText, edits: &[Edit]) -> Result<(SourceText, LineMap), SyntaxError> {
    let mut sorted: Vec<&Edit> = edits.iter().collect();
    sorted.sort_by_key(|e| (e.start(), e.end()));
    for edit in &sorted {
        if edit.start() > edit.end() || edit.end() > text.len() {
            return Err(SyntaxError::EditOutOfRange {
                start: edit.start(),
                end: edit.end(),
                len: text.len(),
            });
        }
        if !text.as_str().is_char_boundary(edit.start()) || !text.as_str().is_char_boundary(edit.end()) {
            return Err(SyntaxError::EditOutOfRange {
                start: edit.start(),
                end: edit.end(),
                len: text.len(),
            });
        }
    }
    for pair in sorted.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let both_insert_same_point = a.target.is_empty() && b.target.is_empty() && a.start() == b.start();
        if a.end() > b.start() || both_insert_same_point {
            return Err(SyntaxError::OverlappingEdits {
                first: a.target,
                second: b.target,
            });
        }
    }

    let src = text.as_str();
    let mut out = String::with_capacity(src.len());
    let mut cursor = 0;
    for edit in &sorted {
        out.push_str(&src[cursor..edit.start()]);
        out.push_str(&edit.replacement);
        cursor = edit.end();
    }
    out.push_str(&src[cursor..]);
    let output = SourceText::new(out);
    let line_map = build_line_map(text, &output, &sorted);
    Ok((output, line_map))
}

/// Output offset of an original offset that is not strictly inside an edit.
/// Insertions at `offset` land before it.
fn mapped_offset(edits: &[&Edit], offset: usize) -> usize {
    let delta: isize = edits
        .iter()
        .filter(|e| e.end() <= offset)
        .map(|e| e.delta())
        .sum();
    (offset as isize + delta) as usize
}

fn line_is_intact(text: &SourceText, output: &SourceText, edits: &[&Edit], line: usize) -> bool {
    let range = text.line_range(line).expect("line in range");
    let (start, end) = (range.start, range.end);
    let is_last = line == text.line_count();
    for edit in edits {
        if !edit.target.is_empty() {
            if edit.start() < end && edit.end() > start {
                return false;
            }
        } else {
            let p = edit.start();
            if start < p && p < end {
                return false;
            }
            // Appending at EOF extends the final line.
            if is_last && p == end && end > start {
                return false;
            }
        }
    }
    let out_start = mapped_offset(edits, start);
    out_start == 0 || output.as_str().as_bytes()[out_start - 1] == b'\n'
}

fn build_line_map(text: &SourceText, output: &SourceText, edits: &[&Edit]) -> LineMap {
    let lines = text.line_count();
    if edits.is_empty() {
        return LineMap::identity(lines);
    }
    let intact: Vec<bool> = (1..=lines)
        .map(|l| line_is_intact(text, output, edits, l))
        .collect();

    let mut segments: Vec<Segment> = Vec::new();
    let mut line = 1;
    while line <= lines {
        let run_intact = intact[line - 1];
        let mut last = line;
        while last < lines && intact[last] == run_intact {
            last += 1;
        }
        if run_intact {
            // Each intact line gets its own shift; merge equal neighbours.
            for l in line..=last {
                let start = text.line_range(l).unwrap().start;
                let new_line = output.line_of(mapped_offset(edits, start));
                let shift = new_line as isize - l as isize;
                match segments.last_mut() {
                    Some(seg) if seg.last + 1 == l && seg.target == SegmentTarget::Shift(shift) => {
                        seg.last = l;
                    }
                    _ => segments.push(Segment {
                        first: l,
                        last: l,
                        target: SegmentTarget::Shift(shift),
                    }),
                }
            }
        } else {
            let out_start = if line == 1 {
                0
            } else {
                // previous line is intact, so its bytes were copied verbatim
                let prev = text.line_range(line - 1).unwrap();
                mapped_offset(edits, prev.start) + prev.len()
            };
            let out_end = if last == lines {
                output.len()
            } else {
                mapped_offset(edits, text.line_range(last + 1).unwrap().start)
            };
            let target = if out_end > out_start {
                let span = output.span(out_start, out_end);
                SegmentTarget::Rewritten {
                    start: span.start_line,
                    end: span.end_line,
                }
            } else {
                SegmentTarget::Deleted
            };
            segments.push(Segment {
                first: line,
                last,
                target,
            });
        }
        line = last + 1;
    }
    LineMap {
        original_lines: lines,
        segments,
    }
}
