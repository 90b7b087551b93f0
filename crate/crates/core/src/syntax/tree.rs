//! Owned concrete syntax tree built from the tree-sitter Java grammar.

use std::sync::LazyLock;

use tree_sitter::{Language, Parser, TreeCursor};

use super::{SourceText, Span, SyntaxError};

/// One node of the concrete syntax tree. Anonymous tokens (punctuation,
/// keywords, operators) are kept so that the leaves cover every token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxNode {
    kind: &'static str,
    field: Option<&'static str>,
    named: bool,
    error: bool,
    span: Span,
    children: Vec<SyntaxNode>,
}

impl SyntaxNode {
    pub fn kind(&self) -> &'static str {
        self.kind
    }

    /// Grammar field under which this node hangs off its parent (`body`, `condition`, ...).
    pub fn field(&self) -> Option<&'static str> {
        self.field
    }

    pub fn is_named(&self) -> bool {
        self.named
    }

    /// True for ERROR and MISSING nodes.
    pub fn is_error(&self) -> bool {
        self.error
    }

    pub fn span(&self) -> Span {
        self.span
    }

    pub fn children(&self) -> &[SyntaxNode] {
        &self.children
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn named_children(&self) -> impl Iterator<Item = &SyntaxNode> + '_ {
        self.children.iter().filter(|c| c.named)
    }

    pub fn child_by_field(&self, field: &str) -> Option<&SyntaxNode> {
        self.children.iter().find(|c| c.field == Some(field))
    }

    pub fn children_by_field<'a>(
        &'a self,
        field: &'a str,
    ) -> impl Iterator<Item = &'a SyntaxNode> + 'a {
        self.children.iter().filter(move |c| c.field == Some(field))
    }

    /// First direct child of the given kind.
    pub fn child_of_kind(&self, kind: &str) -> Option<&SyntaxNode> {
        self.children.iter().find(|c| c.kind == kind)
    }

    pub fn text<'s>(&self, source: &'s SourceText) -> &'s str {
        source.slice(&self.span)
    }

    /// Pre-order traversal of this node and all descendants.
    pub fn descendants(&self) -> Descendants<'_> {
        Descendants { stack: vec![self] }
    }

    /// Leaves in document order.
    pub fn leaves(&self) -> impl Iterator<Item = &SyntaxNode> + '_ {
        self.descendants().filter(|n| n.is_leaf())
    }

    pub fn height(&self) -> usize {
        1 + self.children.iter().map(|c| c.height()).max().unwrap_or(0)
    }

    pub fn has_error(&self) -> bool {
        self.descendants().any(|n| n.error)
    }
}

pub struct Descendants<'a> {
    stack: Vec<&'a SyntaxNode>,
}

impl<'a> Iterator for Descendants<'a> {
    type Item = &'a SyntaxNode;

    fn next(&mut self) -> Option<Self::Item> {
        let node = self.stack.pop()?;
        self.stack.extend(node.children.iter().rev());
        Some(node)
    }
}

/// Parsed program. `has_error` is set iff the grammar reported a parse error
/// anywhere in the text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxTree {
    root: SyntaxNode,
    has_error: bool,
}

impl SyntaxTree {
    pub fn root(&self) -> &SyntaxNode {
        &self.root
    }

    pub fn has_error(&self) -> bool {
        self.has_error
    }

    /// Chain of nodes from the root down to the deepest node whose span
    /// contains `span`.
    pub fn ancestors_of(&self, span: &Span) -> Vec<&SyntaxNode> {
        let mut chain = vec![&self.root];
        let mut current = &self.root;
        while let Some(child) = current
            .children
            .iter()
            .find(|c| c.span.contains(span) && !(c.span.is_empty() && !span.is_empty()))
        {
            chain.push(child);
            current = child;
        }
        chain
    }

    /// The node with exactly this span and kind, if any.
    pub fn find(&self, span: &Span, kind: &str) -> Option<&SyntaxNode> {
        self.root
            .descendants()
            .find(|n| n.span.start_byte == span.start_byte && n.span.end_byte == span.end_byte && n.kind == kind)
    }
}

static JAVA: LazyLock<Language> = LazyLock::new(|| tree_sitter_java::LANGUAGE.into());

/// Parses Java source into a [`SyntaxTree`] covering the full text.
pub fn parse_source(text: &SourceText) -> Result<SyntaxTree, SyntaxError> {
    let language: &'static Language = &JAVA;
    let mut parser = Parser::new();
    parser
        .set_language(language)
        .map_err(|e| SyntaxError::Grammar(e.to_string()))?;
    let tree = parser
        .parse(text.as_str(), None)
        .ok_or_else(|| SyntaxError::Grammar("parser returned no tree".into()))?;
    let has_error = tree.root_node().has_error();
    let mut cursor = tree.walk();
    let mut root = convert(&mut cursor, language, text);
    // tree-sitter trims leading/trailing whitespace from the root.
    root.span = text.span(0, text.len());
    Ok(SyntaxTree { root, has_error })
}

fn convert(cursor: &mut TreeCursor<'_>, language: &'static Language, text: &SourceText) -> SyntaxNode {
    let node = cursor.node();
    let range = node.byte_range();
    let mut out = SyntaxNode {
        kind: language.node_kind_for_id(node.kind_id()).unwrap_or("ERROR"),
        field: cursor.field_id().and_then(|id| language.field_name_for_id(id.get())),
        named: node.is_named(),
        error: node.is_error() || node.is_missing(),
        span: text.span(range.start, range.end),
        children: Vec::with_capacity(node.child_count() as usize),
    };
    if cursor.goto_first_child() {
        loop {
            out.children.push(convert(cursor, language, text));
            if !cursor.goto_next_sibling() {
                break;
            }
        }
        cursor.goto_parent();
    }
    out
}
