use std::sync::LazyLock;

use regex::Regex;

use super::{expect_kind, NamingInfo, SiteDetail, TransformError, TransformKind, TransformResult, TransformSite};
use crate::syntax::{find_identifier_occurrences, Edit, Program};

const JAVA_RESERVED: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "final", "finally", "float",
    "for", "goto", "if", "implements", "import", "instanceof", "int", "interface", "long", "native",
    "new", "package", "private", "protected", "public", "return", "short", "static", "strictfp",
    "super", "switch", "synchronized", "this", "throw", "throws", "transient", "try", "void",
    "volatile", "while", "true", "false", "null", "var", "yield", "record", "sealed", "permits", "_",
];

static IDENT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[A-Za-z_$][A-Za-z0-9_$]*$").unwrap());

/// Lexically valid Java identifier that is not a reserved word.
pub fn is_valid_identifier(name: &str) -> bool {
    IDENT.is_match(name) && !JAVA_RESERVED.contains(&name)
}

pub(super) fn sites(program: &Program, kind: TransformKind) -> Vec<TransformSite> {
    let Some(decl_kind) = kind.declaration_kind() else {
        return Vec::new();
    };
    program
        .scopes
        .declarations_of(decl_kind)
        .filter(|d| program.scopes.conflict(d).is_none())
        .map(|d| TransformSite {
            kind,
            anchor: d.decl_span,
            site_id: 0,
            detail: SiteDetail::Rename {
                declaration: d.clone(),
            },
        })
        .collect()
}

/// Renames every bound occurrence of the site's declaration.
///
/// For methods this covers the declaration and every call site resolved to
/// it inside the program; callers in other compilation units are handled by
/// [`rename_qualified_calls`].
pub fn rename_identifier(program: &Program, site: &TransformSite, new_name: &str) -> Result<TransformResult, TransformError> {
    expect_kind(
        site,
        &[TransformKind::LocalVarRename, TransformKind::MethodRename, TransformKind::ParamRename],
    )?;
    let SiteDetail::Rename { declaration } = &site.detail else {
        return Err(TransformError::Contract("rename site without a declaration".into()));
    };
    if new_name == declaration.name {
        return Err(TransformError::Contract(format!("new name equals old name `{new_name}`")));
    }
    if !is_valid_identifier(new_name) {
        return Err(TransformError::Contract(format!("`{new_name}` is not a valid identifier")));
    }
    if let Some(reason) = program.scopes.conflict(declaration) {
        return Err(TransformError::Inapplicable(reason.to_string()));
    }
    if program.scopes.names_in_use().contains(new_name) {
        return Err(TransformError::Collision(new_name.to_string()));
    }
    let edits: Vec<Edit> = find_identifier_occurrences(&program.scopes, declaration)?
        .into_iter()
        .map(|span| Edit {
            target: span,
            replacement: new_name.to_string(),
        })
        .collect();
    let mut result = TransformResult::from_edits(program, site, edits)?;
    result.provenance.naming = Some(NamingInfo {
        original: declaration.name.clone(),
        replacement: new_name.to_string(),
        provider: String::new(),
    });
    Ok(result)
}

/// Renames `ClassName.old(...)` calls in another compilation unit (typically
/// the test class) after a method rename.
pub fn rename_qualified_calls(
    program: &Program,
    class_name: &str,
    old: &str,
    new_name: &str,
) -> Result<(crate::syntax::SourceText, usize), TransformError> {
    if program.scopes.names_in_use().contains(new_name) {
        return Err(TransformError::Collision(new_name.to_string()));
    }
    let text = &program.text;
    let edits: Vec<Edit> = program
        .tree
        .root()
        .descendants()
        .filter(|n| n.kind() == "method_invocation")
        .filter(|n| n.child_by_field("object").map(|o| o.text(text)) == Some(class_name))
        .filter_map(|n| n.child_by_field("name"))
        .filter(|name| name.text(text) == old)
        .map(|name| Edit {
            target: name.span(),
            replacement: new_name.to_string(),
        })
        .collect();
    let count = edits.len();
    let (out, _) = crate::syntax::apply_edits(text, &edits)?;
    Ok((out, count))
}
