//! Source text with a line index, and byte/line spans into it.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::SyntaxError;

/// UTF-8 program text plus the byte offsets at which each line starts.
///
/// Line `k` (1-based) covers `line_starts[k-1]..line_starts[k]`, including its
/// terminating newline. A text ending in `\n` has a final empty line, so the
/// empty string has exactly one (empty) line.
#[derive(Clone, PartialEq, Eq)]
pub struct SourceText {
    content: String,
    line_starts: Vec<usize>,
}

impl SourceText {
    pub fn new(content: impl Into<String>) -> Self {
        let content = content.into();
        let mut line_starts = vec![0];
        line_starts.extend(
            content
                .bytes()
                .enumerate()
                .filter(|&(_, b)| b == b'\n')
                .map(|(i, _)| i + 1),
        );
        SourceText {
            content,
            line_starts,
        }
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SyntaxError> {
        let content = std::str::from_utf8(bytes).map_err(|e| SyntaxError::Encoding {
            offset: e.valid_up_to(),
        })?;
        Ok(SourceText::new(content))
    }

    pub fn as_str(&self) -> &str {
        &self.content
    }

    pub fn len(&self) -> usize {
        self.content.len()
    }

    pub fn is_empty(&self) -> bool {
        self.content.is_empty()
    }

    pub fn line_starts(&self) -> &[usize] {
        &self.line_starts
    }

    pub fn line_count(&self) -> usize {
        self.line_starts.len()
    }

    /// Byte range of a 1-based line, including its newline if it has one.
    pub fn line_range(&self, line: usize) -> Option<Range<usize>> {
        if line == 0 || line > self.line_starts.len() {
            return None;
        }
        let start = self.line_starts[line - 1];
        let end = self
            .line_starts
            .get(line)
            .copied()
            .unwrap_or(self.content.len());
        Some(start..end)
    }

    /// Line text without its trailing newline (and without a `\r` before it).
    pub fn line(&self, line: usize) -> Option<&str> {
        let range = self.line_range(line)?;
        let text = &self.content[range];
        let text = text.strip_suffix('\n').unwrap_or(text);
        Some(text.strip_suffix('\r').unwrap_or(text))
    }

    pub fn lines(&self) -> impl Iterator<Item = &str> + '_ {
        (1..=self.line_count()).map(move |l| self.line(l).unwrap_or_default())
    }

    /// 1-based line containing `offset`. Offsets at `len()` belong to the last line.
    pub fn line_of(&self, offset: usize) -> usize {
        match self.line_starts.binary_search(&offset) {
            Ok(idx) => idx + 1,
            Err(idx) => idx,
        }
    }

    pub fn slice(&self, span: &Span) -> &str {
        &self.content[span.start_byte..span.end_byte]
    }

    /// Builds a span over `start..end`. The end line is the line holding the
    /// last byte of the span, so a span that ends right after a newline does
    /// not reach into the following line.
    pub fn span(&self, start: usize, end: usize) -> Span {
        debug_assert!(start <= end && end <= self.content.len());
        let start_line = self.line_of(start);
        let end_line = if end > start {
            self.line_of(end - 1)
        } else {
            start_line
        };
        Span {
            start_byte: start,
            end_byte: end,
            start_line,
            end_line,
        }
    }

    /// Span covering whole lines `first..=last`, newline of `last` included.
    pub fn line_span(&self, first: usize, last: usize) -> Option<Span> {
        if first > last {
            return None;
        }
        let start = self.line_range(first)?.start;
        let end = self.line_range(last)?.end;
        Some(Span {
            start_byte: start,
            end_byte: end,
            start_line: first,
            end_line: last,
        })
    }

    /// Leading whitespace of the line containing `offset`.
    pub fn indentation_at(&self, offset: usize) -> &str {
        let line = self.line_of(offset);
        let text = self.line(line).unwrap_or_default();
        let trimmed = text.trim_start_matches([' ', '\t']);
        &text[..text.len() - trimmed.len()]
    }
}

impl fmt::Debug for SourceText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SourceText")
            .field("len", &self.content.len())
            .field("lines", &self.line_starts.len())
            .finish()
    }
}

impl fmt::Display for SourceText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.content)
    }
}

impl From<&str> for SourceText {
    fn from(s: &str) -> Self {
        SourceText::new(s)
    }
}

impl From<String> for SourceText {
    fn from(s: String) -> Self {
        SourceText::new(s)
    }
}

/// Half-open byte range with the inclusive 1-based lines it touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start_byte: usize,
    pub end_byte: usize,
    pub start_line: usize,
    pub end_line: usize,
}

impl Span {
    pub fn len(&self) -> usize {
        self.end_byte - self.start_byte
    }

    pub fn is_empty(&self) -> bool {
        self.start_byte == self.end_byte
    }

    pub fn byte_range(&self) -> Range<usize> {
        self.start_byte..self.end_byte
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start_byte <= other.start_byte && other.end_byte <= self.end_byte
    }

    pub fn contains_offset(&self, offset: usize) -> bool {
        self.start_byte <= offset && offset < self.end_byte
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start_byte < other.end_byte && other.start_byte < self.end_byte
    }

    pub fn lines_overlap(&self, first: usize, last: usize) -> bool {
        self.start_line <= last && first <= self.end_line
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}..{} (lines {}-{})",
            self.start_byte, self.end_byte, self.start_line, self.end_line
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_index_starts_at_zero_and_rejoins() {
        let text = SourceText::new("a\nbc\n\nd");
        assert_eq!(text.line_starts(), &[0, 2, 5, 6]);
        let rejoined: String = (1..=text.line_count())
            .map(|l| &text.as_str()[text.line_range(l).unwrap()])
            .collect();
        assert_eq!(rejoined, text.as_str());
        assert_eq!(text.line(2), Some("bc"));
        assert_eq!(text.line(3), Some(""));
        assert_eq!(text.line(5), None);
    }

    #[test]
    fn empty_text_has_one_line() {
        let text = SourceText::new("");
        assert_eq!(text.line_count(), 1);
        assert_eq!(text.line(1), Some(""));
        assert_eq!(text.line_of(0), 1);
    }

    #[test]
    fn span_end_line_excludes_trailing_newline() {
        let text = SourceText::new("ab\ncd\n");
        let span = text.span(0, 3);
        assert_eq!((span.start_line, span.end_line), (1, 1));
        let span = text.span(3, 6);
        assert_eq!((span.start_line, span.end_line), (2, 2));
        let empty = text.span(6, 6);
        assert_eq!((empty.start_line, empty.end_line), (3, 3));
    }

    #[test]
    fn invalid_utf8_is_an_input_error() {
        let err = SourceText::from_bytes(&[b'a', 0xff, b'b']).unwrap_err();
        assert!(matches!(err, SyntaxError::Encoding { offset: 1 }));
    }

    #[test]
    fn indentation_of_line() {
        let text = SourceText::new("class A {\n    int x;\n\tint y;\n}");
        assert_eq!(text.indentation_at(12), "    ");
        assert_eq!(text.indentation_at(22), "\t");
    }
}
