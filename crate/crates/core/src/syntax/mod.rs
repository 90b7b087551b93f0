//! Java source handling: parsing, scope resolution and span-tracked edits.

mod edit;
mod scope;
mod source;
mod tree;

pub use edit::{apply_edits, Edit, LineMap, LineTarget};
pub use scope::{find_identifier_occurrences, resolve_scopes, Declaration, DeclarationKind, ScopeTable};
pub use source::{SourceText, Span};
pub use tree::{parse_source, Descendants, SyntaxNode, SyntaxTree};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SyntaxError {
    #[error("source is not valid UTF-8 (first bad byte at offset {offset})")]
    Encoding { offset: usize },
    #[error("grammar failure: {0}")]
    Grammar(String),
    #[error("syntax tree contains parse errors")]
    ErrorTree,
    #[error("unknown declaration `{0}`")]
    UnknownDeclaration(String),
    #[error("edits {first} and {second} overlap")]
    OverlappingEdits { first: Span, second: Span },
    #[error("edit {start}..{end} outside text of length {len}")]
    EditOutOfRange { start: usize, end: usize, len: usize },
}

/// A parsed, scope-resolved program.
#[derive(Debug, Clone)]
pub struct Program {
    pub text: SourceText,
    pub tree: SyntaxTree,
    pub scopes: ScopeTable,
}

impl Program {
    pub fn parse(text: impl Into<SourceText>) -> Result<Self, SyntaxError> {
        let text = text.into();
        let tree = parse_source(&text)?;
        let scopes = resolve_scopes(&tree, &text)?;
        Ok(Program { text, tree, scopes })
    }
}
