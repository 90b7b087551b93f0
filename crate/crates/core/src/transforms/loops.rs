use super::{expect_kind, LoopDirection, SiteDetail, TransformError, TransformKind, TransformResult, TransformSite};
use crate::syntax::{Edit, Program, SourceText, SyntaxNode};

fn is_abrupt(stmt: &SyntaxNode) -> bool {
    match stmt.kind() {
        "return_statement" | "throw_statement" | "break_statement" | "continue_statement" => true,
        "block" => stmt
            .named_children()
            .filter(|c| !matches!(c.kind(), "line_comment" | "block_comment"))
            .last()
            .is_some_and(is_abrupt),
        "if_statement" => {
            stmt.child_by_field("consequence").is_some_and(is_abrupt)
                && stmt.child_by_field("alternative").is_some_and(is_abrupt)
        }
        _ => false,
    }
}

/// Why a `for` loop cannot become a `while` loop, if it cannot.
fn for_blocker(node: &SyntaxNode) -> Option<&'static str> {
    let body = node.child_by_field("body")?;
    // `continue` would skip the update once it moves into the body.
    if body.descendants().any(|n| n.kind() == "continue_statement") {
        return Some("body contains continue");
    }
    if node.children_by_field("update").next().is_some() && is_abrupt(body) {
        return Some("update would be unreachable");
    }
    None
}

pub(super) fn sites(program: &Program) -> Vec<TransformSite> {
    program
        .tree
        .root()
        .descendants()
        .filter_map(|n| {
            let direction = match n.kind() {
                "for_statement" if for_blocker(n).is_none() && n.child_by_field("body").is_some() => {
                    LoopDirection::ForToWhile
                }
                "while_statement" if n.child_by_field("condition").is_some() => LoopDirection::WhileToFor,
                _ => return None,
            };
            Some(TransformSite {
                kind: TransformKind::LoopExchange,
                anchor: n.span(),
                site_id: 0,
                detail: SiteDetail::Loop { direction },
            })
        })
        .collect()
}

fn init_statements(node: &SyntaxNode, text: &SourceText) -> String {
    node.children_by_field("init")
        .map(|i| {
            let t = i.text(text);
            if i.kind() == "local_variable_declaration" {
                format!("{t} ")
            } else {
                format!("{t}; ")
            }
        })
        .collect()
}

fn update_statements(node: &SyntaxNode, text: &SourceText) -> String {
    node.children_by_field("update")
        .map(|u| format!("{};", u.text(text)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn for_to_while(program: &Program, node: &SyntaxNode) -> Result<Vec<Edit>, TransformError> {
    if let Some(reason) = for_blocker(node) {
        return Err(TransformError::Inapplicable(reason.into()));
    }
    let text = &program.text;
    let body = node
        .child_by_field("body")
        .ok_or_else(|| TransformError::Inapplicable("loop without body".into()))?;
    let init = init_statements(node, text);
    let cond = node.child_by_field("condition").map(|c| c.text(text)).unwrap_or("true");
    let update = update_statements(node, text);
    let scoped = !init.is_empty();
    let open = if scoped { "{ " } else { "" };
    let close = if scoped { " }" } else { "" };

    let mut edits = vec![Edit::replace(
        text,
        node.span().start_byte,
        body.span().start_byte,
        format!("{open}{init}while ({cond}) "),
    )];
    let (body_start, body_end) = (body.span().start_byte, body.span().end_byte);
    if body.kind() == "block" {
        let brace = body_end - 1;
        if !update.is_empty() {
            let own_line = text.line_of(brace) > text.line_of(body_start)
                && text.as_str()[text.line_range(text.line_of(brace)).map(|r| r.start).unwrap_or(0)..brace]
                    .trim()
                    .is_empty();
            if own_line {
                let line_start = text.line_range(text.line_of(brace)).map(|r| r.start).unwrap_or(0);
                let inner_indent = body
                    .named_children()
                    .next()
                    .map(|s| text.indentation_at(s.span().start_byte).to_string())
                    .unwrap_or_else(|| format!("{}    ", text.indentation_at(brace)));
                edits.push(Edit::insert(text, line_start, format!("{inner_indent}{update}\n")));
            } else {
                let lead = if text.as_str()[..brace].ends_with(char::is_whitespace) { "" } else { " " };
                edits.push(Edit::insert(text, brace, format!("{lead}{update} ")));
            }
        }
        if scoped {
            edits.push(Edit::insert(text, body_end, close));
        }
    } else {
        let inner = if body.kind() == ";" || body.text(text) == ";" { String::new() } else { format!("{} ", body.text(text)) };
        let update = if update.is_empty() { String::new() } else { format!("{update} ") };
        edits.push(Edit::replace(text, body_start, body_end, format!("{{ {inner}{update}}}{close}")));
    }
    Ok(edits)
}

fn while_to_for(program: &Program, node: &SyntaxNode) -> Result<Vec<Edit>, TransformError> {
    let text = &program.text;
    let cond = node
        .child_by_field("condition")
        .ok_or_else(|| TransformError::Inapplicable("loop without condition".into()))?;
    let inner = cond
        .named_children()
        .next()
        .ok_or_else(|| TransformError::Inapplicable("empty condition".into()))?;
    Ok(vec![Edit::replace(
        text,
        node.span().start_byte,
        cond.span().end_byte,
        format!("for (; {}; )", inner.text(text)),
    )])
}

/// Rewrites a `for` loop as an equivalent `while` loop or vice versa.
///
/// `for (init; cond; update) body` becomes
/// `{ init while (cond) { body update; } }`; the outer braces keep the scope
/// of declarations in `init`. `while (cond) body` becomes `for (; cond; ) body`.
pub fn exchange_loop(program: &Program, site: &TransformSite) -> Result<TransformResult, TransformError> {
    expect_kind(site, &[TransformKind::LoopExchange])?;
    let SiteDetail::Loop { direction } = site.detail else {
        return Err(TransformError::Contract("loop site without a direction".into()));
    };
    let kind = match direction {
        LoopDirection::ForToWhile => "for_statement",
        LoopDirection::WhileToFor => "while_statement",
    };
    let node = program
        .tree
        .find(&site.anchor, kind)
        .ok_or_else(|| TransformError::Inapplicable(format!("no {kind} at site")))?;
    let edits = match direction {
        LoopDirection::ForToWhile => for_to_while(program, node)?,
        LoopDirection::WhileToFor => while_to_for(program, node)?,
    };
    TransformResult::from_edits(program, site, edits)
}
