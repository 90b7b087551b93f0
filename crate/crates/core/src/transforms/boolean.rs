use super::{expect_kind, SiteDetail, TransformError, TransformKind, TransformResult, TransformSite};
use crate::syntax::{find_identifier_occurrences, Declaration, DeclarationKind, Edit, Program, SourceText, Span, SyntaxNode};

fn declarator_of<'a>(program: &'a Program, decl: &Declaration) -> Option<&'a SyntaxNode> {
    program
        .tree
        .ancestors_of(&decl.decl_span)
        .into_iter()
        .rev()
        .find(|n| n.kind() == "variable_declarator")
}

pub(super) fn sites(program: &Program) -> Vec<TransformSite> {
    program
        .scopes
        .declarations_of(DeclarationKind::LocalVariable)
        .filter(|d| d.type_text.as_deref() == Some("boolean"))
        .filter(|d| program.scopes.conflict(d).is_none())
        .filter_map(|d| {
            let value = declarator_of(program, d)?.child_by_field("value")?;
            let initial = match value.kind() {
                "true" => true,
                "false" => false,
                _ => return None,
            };
            plan(program, d).ok()?;
            Some(TransformSite {
                kind: TransformKind::BooleanExchange,
                anchor: d.decl_span,
                site_id: 0,
                detail: SiteDetail::Boolean {
                    declaration: d.clone(),
                    initial,
                },
            })
        })
        .collect()
}

struct Assignment<'a> {
    operator: &'a SyntaxNode,
    right: &'a SyntaxNode,
}

/// Classifies every non-declaring occurrence as a read or the target of a
/// statement-level assignment.
fn plan<'a>(program: &'a Program, decl: &Declaration) -> Result<(Vec<Span>, Vec<Assignment<'a>>), TransformError> {
    let mut reads = Vec::new();
    let mut assignments = Vec::new();
    for occ in find_identifier_occurrences(&program.scopes, decl)? {
        if occ == decl.decl_span {
            continue;
        }
        let chain = program.tree.ancestors_of(&occ);
        let parent = chain.len().checked_sub(2).map(|i| chain[i]);
        match parent {
            Some(p) if p.kind() == "assignment_expression" && p.child_by_field("left").map(|l| l.span()) == Some(occ) => {
                let statement_level = chain
                    .get(chain.len() - 3)
                    .is_some_and(|g| g.kind() == "expression_statement");
                if !statement_level {
                    return Err(TransformError::Inapplicable("assignment used as an expression".into()));
                }
                let (Some(operator), Some(right)) = (p.child_by_field("operator"), p.child_by_field("right")) else {
                    return Err(TransformError::Inapplicable("incomplete assignment".into()));
                };
                if !matches!(operator.kind(), "=" | "&=" | "|=" | "^=") {
                    return Err(TransformError::Inapplicable(format!("operator {}", operator.kind())));
                }
                assignments.push(Assignment { operator, right });
            }
            _ => reads.push(occ),
        }
    }
    Ok((reads, assignments))
}

fn negated_read(name: &str) -> String {
    format!("!({name})")
}

/// Text of `span` with every read inside it negated.
fn rewrite_region(text: &SourceText, span: Span, reads: &[Span], name: &str) -> String {
    let mut out = String::new();
    let mut cursor = span.start_byte;
    for r in reads.iter().filter(|r| span.contains(r)) {
        out.push_str(&text.as_str()[cursor..r.start_byte]);
        out.push_str(&negated_read(name));
        cursor = r.end_byte;
    }
    out.push_str(&text.as_str()[cursor..span.end_byte]);
    out
}

/// Flips a boolean local's literal initializer and compensates at every use,
/// so the variable always holds the negation of its old value.
///
/// Reads become `!(name)`. Assignments keep the invariant: `x = e` becomes
/// `x = !(e)`, `x &= e` becomes `x |= !(e)`, `x |= e` becomes `x &= !(e)`,
/// and `x ^= e` is unchanged (apart from reads inside `e`). Negated boolean
/// literals are folded.
pub fn exchange_boolean(program: &Program, site: &TransformSite) -> Result<TransformResult, TransformError> {
    expect_kind(site, &[TransformKind::BooleanExchange])?;
    let SiteDetail::Boolean { declaration, .. } = &site.detail else {
        return Err(TransformError::Contract("boolean site without a declaration".into()));
    };
    if !sites(program).iter().any(|s| s.anchor == site.anchor) {
        return Err(TransformError::Inapplicable("not a boolean local with a literal initializer".into()));
    }
    let text = &program.text;
    let name = declaration.name.as_str();
    let value = declarator_of(program, declaration)
        .and_then(|d| d.child_by_field("value"))
        .ok_or_else(|| TransformError::Inapplicable("no initializer".into()))?;
    let flipped = if value.kind() == "true" { "false" } else { "true" };
    let (reads, assignments) = plan(program, declaration)?;

    let mut edits = vec![Edit::replace(text, value.span().start_byte, value.span().end_byte, flipped)];
    for a in &assignments {
        let new_op = match a.operator.kind() {
            "&=" => Some("|="),
            "|=" => Some("&="),
            _ => None,
        };
        if let Some(op) = new_op {
            edits.push(Edit::replace(text, a.operator.span().start_byte, a.operator.span().end_byte, op));
        }
        let inner = rewrite_region(text, a.right.span(), &reads, name);
        let replacement = match (a.operator.kind(), inner.as_str()) {
            ("^=", _) => inner,
            (_, "true") => "false".to_string(),
            (_, "false") => "true".to_string(),
            _ => format!("!({inner})"),
        };
        edits.push(Edit::replace(text, a.right.span().start_byte, a.right.span().end_byte, replacement));
    }
    for r in reads.iter().filter(|r| !assignments.iter().any(|a| a.right.span().contains(r))) {
        edits.push(Edit::replace(text, r.start_byte, r.end_byte, negated_read(name)));
    }
    // `x ^= e` with no reads inside `e` leaves the right-hand side unchanged.
    edits.retain(|e| text.slice(&e.target) != e.replacement);
    TransformResult::from_edits(program, site, edits)
}
