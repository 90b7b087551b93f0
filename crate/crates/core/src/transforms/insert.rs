//! Log-statement and try-catch insertion.

use super::{expect_kind, SiteDetail, TransformError, TransformKind, TransformResult, TransformSite};
use crate::syntax::{find_identifier_occurrences, DeclarationKind, Edit, Program, SourceText, SyntaxNode};

pub const LOG_STATEMENT: &str = "System.out.println(\"log\");";

const INDENT_UNIT: &str = "    ";

fn is_comment(node: &SyntaxNode) -> bool {
    matches!(node.kind(), "line_comment" | "block_comment")
}

fn block_statements(block: &SyntaxNode) -> impl Iterator<Item = &SyntaxNode> + '_ {
    block.named_children().filter(|n| !is_comment(n))
}

/// True if only whitespace precedes `offset` on its line.
fn starts_line(text: &SourceText, offset: usize) -> bool {
    let line_start = text.line_range(text.line_of(offset)).map(|r| r.start).unwrap_or(0);
    text.as_str()[line_start..offset].trim().is_empty()
}

fn line_start_of(text: &SourceText, offset: usize) -> usize {
    text.line_range(text.line_of(offset)).map(|r| r.start).unwrap_or(0)
}

pub(super) fn log_sites(program: &Program) -> Vec<TransformSite> {
    let text = &program.text;
    program
        .tree
        .root()
        .descendants()
        .filter(|n| n.kind() == "method_declaration")
        .filter_map(|m| {
            let body = m.child_by_field("body")?;
            (body.kind() == "block").then(|| TransformSite {
                kind: TransformKind::InsertLog,
                anchor: body.span(),
                site_id: 0,
                detail: SiteDetail::MethodBody {
                    method: m.child_by_field("name").map(|n| n.text(text).to_string()).unwrap_or_default(),
                },
            })
        })
        .collect()
}

/// Inserts the log statement as the first statement of a method body.
///
/// When the first statement (or the closing brace of an empty body) sits on
/// its own line, the log statement becomes a new line above it, so no
/// existing line changes.
pub fn insert_log_statement(program: &Program, site: &TransformSite) -> Result<TransformResult, TransformError> {
    expect_kind(site, &[TransformKind::InsertLog])?;
    let text = &program.text;
    let body = program
        .tree
        .find(&site.anchor, "block")
        .ok_or_else(|| TransformError::Inapplicable("method has no block body".into()))?;
    let open = body.span().start_byte + 1;
    let close = body.span().end_byte - 1;
    let edit = match block_statements(body).next() {
        Some(first) if starts_line(text, first.span().start_byte) && text.line_of(first.span().start_byte) > text.line_of(open - 1) => {
            let at = first.span().start_byte;
            let indent = text.indentation_at(at);
            Edit::insert(text, line_start_of(text, at), format!("{indent}{LOG_STATEMENT}\n"))
        }
        Some(_) => Edit::insert(text, open, format!(" {LOG_STATEMENT}")),
        None if starts_line(text, close) && text.line_of(close) > text.line_of(open - 1) => {
            let indent = text.indentation_at(close);
            Edit::insert(text, line_start_of(text, close), format!("{indent}{INDENT_UNIT}{LOG_STATEMENT}\n"))
        }
        None => Edit::insert(text, open, format!(" {LOG_STATEMENT} ")),
    };
    TransformResult::from_edits(program, site, vec![edit])
}

/// Statement kinds that may be wrapped. Control-flow statements are never
/// wrapped: their headers would move into the try block, and wrapping a
/// `return`/`throw`/`break` breaks definite-return analysis.
fn wrappable(stmt: &SyntaxNode) -> bool {
    matches!(stmt.kind(), "expression_statement" | "local_variable_declaration")
}

fn declares_variable_used_later(program: &Program, stmt: &SyntaxNode) -> bool {
    if stmt.kind() != "local_variable_declaration" {
        return false;
    }
    let end = stmt.span().end_byte;
    program
        .scopes
        .declarations_of(DeclarationKind::LocalVariable)
        .filter(|d| stmt.span().contains(&d.decl_span))
        .any(|d| {
            find_identifier_occurrences(&program.scopes, d)
                .map(|occ| occ.iter().any(|s| s.start_byte >= end))
                .unwrap_or(true)
        })
}

/// Plain assignment to a variable declared without an initializer: moving it
/// into a try block would break definite assignment of later reads.
fn assigns_uninitialized(program: &Program, stmt: &SyntaxNode) -> bool {
    let text = &program.text;
    stmt.descendants()
        .filter(|n| n.kind() == "assignment_expression")
        .filter_map(|a| a.child_by_field("left"))
        .filter(|l| l.kind() == "identifier")
        .any(|l| {
            program
                .scopes
                .declarations()
                .iter()
                .filter(|d| d.kind != DeclarationKind::Method && d.name == l.text(text))
                .any(|d| {
                    let declarator_has_value = program
                        .tree
                        .ancestors_of(&d.decl_span)
                        .iter()
                        .rev()
                        .find(|n| n.kind() == "variable_declarator")
                        .map(|n| n.child_by_field("value").is_some());
                    declarator_has_value == Some(false)
                })
        })
}

pub(super) fn try_catch_sites(program: &Program) -> Vec<TransformSite> {
    program
        .tree
        .root()
        .descendants()
        .filter(|n| matches!(n.kind(), "block" | "constructor_body"))
        .flat_map(|block| block_statements(block))
        .filter(|stmt| wrappable(stmt))
        .filter(|stmt| !stmt.descendants().any(|n| n.kind() == "explicit_constructor_invocation"))
        .filter(|stmt| !declares_variable_used_later(program, stmt))
        .filter(|stmt| !assigns_uninitialized(program, stmt))
        .map(|stmt| TransformSite {
            kind: TransformKind::InsertTryCatch,
            anchor: stmt.span(),
            site_id: 0,
            detail: SiteDetail::Statement,
        })
        .collect()
}

fn catch_variable(program: &Program) -> String {
    let used = program.scopes.names_in_use();
    std::iter::once("e".to_string())
        .chain((1..).map(|i| format!("e{i}")))
        .find(|n| !used.contains(n))
        .expect("unbounded candidates")
}

/// Wraps the site's statement as `try { <stmt> } catch (Exception e) {}`.
///
/// The seed is recorded in provenance; site choice among applicable
/// statements is made by the caller with [`super::choose_site`].
pub fn insert_try_catch(program: &Program, site: &TransformSite, rng_seed: u64) -> Result<TransformResult, TransformError> {
    expect_kind(site, &[TransformKind::InsertTryCatch])?;
    let applicable = try_catch_sites(program);
    if !applicable.iter().any(|s| s.anchor == site.anchor) {
        return Err(TransformError::Inapplicable("statement cannot be wrapped in try-catch".into()));
    }
    let text = &program.text;
    let var = catch_variable(program);
    let edits = vec![
        Edit::insert(text, site.anchor.start_byte, "try { "),
        Edit::insert(text, site.anchor.end_byte, format!(" }} catch (Exception {var}) {{}}")),
    ];
    let mut result = TransformResult::from_edits(program, site, edits)?;
    result.provenance.seed = Some(rng_seed);
    Ok(result)
}
