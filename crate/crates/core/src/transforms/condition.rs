use super::{expect_kind, SiteDetail, TransformError, TransformKind, TransformResult, TransformSite};
use crate::syntax::{Edit, Program, SyntaxNode};

/// Binary operators that bind tighter than `==`, so the operand can move to
/// either side of an equality without parentheses.
const TIGHT_BINARY: &[&str] = &["*", "/", "%", "+", "-", "<<", ">>", ">>>", "<", ">", "<=", ">="];

fn is_literal(kind: &str) -> bool {
    kind.ends_with("_literal") || matches!(kind, "true" | "false")
}

/// Side-effect-free expression forms. Operator precedence is not checked here.
fn is_pure(node: &SyntaxNode) -> bool {
    match node.kind() {
        "identifier" | "this" | "class_literal" => true,
        k if is_literal(k) => true,
        "parenthesized_expression" | "field_access" | "array_access" | "cast_expression" => {
            node.named_children().all(|c| is_pure(c) || is_type(c))
        }
        "unary_expression" => node.child_by_field("operand").is_some_and(is_pure),
        "binary_expression" => {
            node.child_by_field("left").is_some_and(is_pure) && node.child_by_field("right").is_some_and(is_pure)
        }
        "instanceof_expression" => {
            node.child_by_field("name").is_none()
                && node.child_by_field("pattern").is_none()
                && node.child_by_field("left").is_some_and(is_pure)
        }
        _ => false,
    }
}

fn is_type(node: &SyntaxNode) -> bool {
    node.kind().ends_with("_type") || node.kind() == "type_identifier"
}

/// Conservative check that evaluating `node` has no side effects and that
/// it can be moved across an equality operator verbatim.
pub fn is_side_effect_free(node: &SyntaxNode) -> bool {
    let movable = match node.kind() {
        "binary_expression" => {
            let op = node.child_by_field("operator").map(|o| o.kind()).unwrap_or("");
            TIGHT_BINARY.contains(&op)
        }
        _ => true,
    };
    movable && is_pure(node)
}

pub(super) fn sites(program: &Program) -> Vec<TransformSite> {
    let text = &program.text;
    program
        .tree
        .root()
        .descendants()
        .filter(|n| n.kind() == "binary_expression")
        .filter_map(|n| {
            let op = n.child_by_field("operator")?.kind();
            if op != "==" && op != "!=" {
                return None;
            }
            let (left, right) = (n.child_by_field("left")?, n.child_by_field("right")?);
            // Swapping identical operands would leave the text unchanged.
            if left.text(text) == right.text(text) || !is_side_effect_free(left) || !is_side_effect_free(right) {
                return None;
            }
            Some(TransformSite {
                kind: TransformKind::ReorderCondition,
                anchor: n.span(),
                site_id: 0,
                detail: SiteDetail::Comparison { operator: op.to_string() },
            })
        })
        .collect()
}

/// Swaps the operands of an `==`/`!=` comparison. Applying it twice to the
/// same site restores the original text.
pub fn reorder_condition(program: &Program, site: &TransformSite) -> Result<TransformResult, TransformError> {
    expect_kind(site, &[TransformKind::ReorderCondition])?;
    if !sites(program).iter().any(|s| s.anchor == site.anchor) {
        return Err(TransformError::Inapplicable("comparison operands are not side-effect-free".into()));
    }
    let text = &program.text;
    let node = program
        .tree
        .find(&site.anchor, "binary_expression")
        .ok_or_else(|| TransformError::Inapplicable("no comparison at site".into()))?;
    let (left, right) = match (node.child_by_field("left"), node.child_by_field("right")) {
        (Some(l), Some(r)) => (l, r),
        _ => return Err(TransformError::Inapplicable("incomplete comparison".into())),
    };
    let edits = vec![
        Edit::replace(text, left.span().start_byte, left.span().end_byte, right.text(text)),
        Edit::replace(text, right.span().start_byte, right.span().end_byte, left.text(text)),
    ];
    TransformResult::from_edits(program, site, edits)
}

#[cfg(test)]
mod tests {
    use super::super::test_util::{apply_first, program, reparses};
    use super::super::enumerate_sites;
    use super::*;

    #[test]
    fn swaps_equality_operands() {
        let (_, r) = apply_first("class A { void m(int a, int b) { if (a == b) f(); } }", TransformKind::ReorderCondition);
        reparses(&r);
        assert_eq!(r.output.as_str(), "class A { void m(int a, int b) { if (b == a) f(); } }");
    }

    #[test]
    fn identical_operands_have_no_site() {
        let p = program("class A { boolean m(double x) { return x != x; } }");
        assert!(enumerate_sites(&p, TransformKind::ReorderCondition).is_empty());
    }

    #[test]
    fn side_effects_block_the_swap() {
        let p = program("class A { void m(int a) { if (a++ == 3) f(); if (g() != a) f(); if ((a = 2) == a) f(); } }");
        assert!(enumerate_sites(&p, TransformKind::ReorderCondition).is_empty());
    }

    #[test]
    fn low_precedence_operands_are_not_moved() {
        let p = program("class A { boolean m(boolean a, boolean b, boolean c) { return (a == b) == c || a && b == c; } }");
        let sites = enumerate_sites(&p, TransformKind::ReorderCondition);
        let texts: Vec<_> = sites.iter().map(|s| p.text.slice(&s.anchor)).collect();
        assert_eq!(texts, vec!["(a == b) == c", "a == b", "b == c"]);
    }

    #[test]
    fn arithmetic_and_array_operands_are_allowed() {
        let (_, r) = apply_first("class A { boolean m(int[] xs, int i) { return xs[i] + 1 != -xs[0]; } }", TransformKind::ReorderCondition);
        assert_eq!(r.output.as_str(), "class A { boolean m(int[] xs, int i) { return -xs[0] != xs[i] + 1; } }");
    }

    #[test]
    fn reorder_twice_is_identity() {
        let src = "class A { boolean m(String s, int n) { return s.length() > 0 && n % 2 == (int) 'a'; } }";
        let p = program(src);
        let site = enumerate_sites(&p, TransformKind::ReorderCondition).remove(0);
        let once = reorder_condition(&p, &site).unwrap();
        let p2 = Program::parse(once.output.clone()).unwrap();
        let site2 = enumerate_sites(&p2, TransformKind::ReorderCondition)
            .into_iter()
            .find(|s| s.anchor.start_byte == site.anchor.start_byte)
            .unwrap();
        let twice = reorder_condition(&p2, &site2).unwrap();
        assert_eq!(twice.output.as_str(), src);
    }
}
