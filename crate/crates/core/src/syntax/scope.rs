//! Structural scope resolution for local variables, parameters and methods.
//!
//! Binding is purely syntactic: block nesting plus innermost-wins shadowing.
//! There is no type information, so anything that could bind through a
//! field, an override or an overload is flagged as a conflict instead of
//! being resolved; callers treat conflicted declarations as unrenamable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{SourceText, Span, SyntaxError, SyntaxNode, SyntaxTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeclarationKind {
    LocalVariable,
    Parameter,
    Method,
}

impl fmt::Display for DeclarationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DeclarationKind::LocalVariable => "local-variable",
            DeclarationKind::Parameter => "parameter",
            DeclarationKind::Method => "method",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Declaration {
    pub name: String,
    pub kind: DeclarationKind,
    /// Span of the declaring identifier.
    pub decl_span: Span,
    /// Region in which the name is bound to this declaration.
    pub scope_span: Span,
    /// Declared type (return type for methods), as written.
    pub type_text: Option<String>,
}

/// Declarations of one program and the identifier spans bound to each.
#[derive(Debug, Clone, Default)]
pub struct ScopeTable {
    declarations: Vec<Declaration>,
    occurrences: Vec<Vec<Span>>,
    conflicts: Vec<Option<String>>,
    /// Reads of the declaration (occurrences that are not the declaring
    /// identifier and not the target of a plain assignment).
    reads: Vec<Vec<Span>>,
    names_in_use: BTreeSet<String>,
    class_names: Vec<String>,
}

impl ScopeTable {
    pub fn declarations(&self) -> &[Declaration] {
        &self.declarations
    }

    pub fn declarations_of(&self, kind: DeclarationKind) -> impl Iterator<Item = &Declaration> + '_ {
        self.declarations.iter().filter(move |d| d.kind == kind)
    }

    fn index_of(&self, decl: &Declaration) -> Option<usize> {
        self.declarations.iter().position(|d| d == decl)
    }

    /// Why a declaration cannot be renamed safely, if it cannot.
    pub fn conflict(&self, decl: &Declaration) -> Option<&str> {
        self.index_of(decl).and_then(|i| self.conflicts[i].as_deref())
    }

    /// Occurrences of `decl` that read its value.
    pub fn reads(&self, decl: &Declaration) -> Result<&[Span], SyntaxError> {
        let i = self
            .index_of(decl)
            .ok_or_else(|| SyntaxError::UnknownDeclaration(decl.name.clone()))?;
        Ok(&self.reads[i])
    }

    /// Every identifier and type name spelled anywhere in the program.
    pub fn names_in_use(&self) -> &BTreeSet<String> {
        &self.names_in_use
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn find(&self, kind: DeclarationKind, decl_start: usize) -> Option<&Declaration> {
        self.declarations
            .iter()
            .find(|d| d.kind == kind && d.decl_span.start_byte == decl_start)
    }
}

/// All and only the spans bound to `decl` (declaration included), sorted by start.
pub fn find_identifier_occurrences(table: &ScopeTable, decl: &Declaration) -> Result<Vec<Span>, SyntaxError> {
    let i = table
        .index_of(decl)
        .ok_or_else(|| SyntaxError::UnknownDeclaration(decl.name.clone()))?;
    Ok(table.occurrences[i].clone())
}

const RESERVED_METHOD_NAMES: &[&str] = &[
    "main", "equals", "hashCode", "toString", "compareTo", "compare", "clone", "finalize",
    "run", "call", "apply", "accept", "test", "get", "iterator", "hasNext", "next", "close",
];

struct Use<'a> {
    node: &'a SyntaxNode,
    name: String,
    plain_assign_target: bool,
}

struct MethodCall {
    name: String,
    span: Span,
    /// `None` for unqualified calls, otherwise the receiver text.
    receiver: Option<String>,
    enclosing_class: Option<Span>,
}

#[derive(Default)]
struct Collector<'a> {
    decls: Vec<Declaration>,
    conflicts: Vec<Option<String>>,
    uses: Vec<Use<'a>>,
    calls: Vec<MethodCall>,
    method_refs: BTreeSet<String>,
    field_names: BTreeSet<String>,
    class_names: Vec<String>,
    names_in_use: BTreeSet<String>,
    /// (class body span, method name) → declaration indices
    methods_by_class: BTreeMap<(usize, usize, String), Vec<usize>>,
    /// method declaration index → name of the declaring class
    method_owner: BTreeMap<usize, String>,
}

/// Resolves declarations and their occurrences in an error-free tree.
pub fn resolve_scopes(tree: &SyntaxTree, text: &SourceText) -> Result<ScopeTable, SyntaxError> {
    if tree.has_error() {
        return Err(SyntaxError::ErrorTree);
    }
    let mut c = Collector::default();
    let mut ancestors = Vec::new();
    visit(tree.root(), &mut ancestors, text, &mut c);

    let mut occurrences: Vec<Vec<Span>> = c.decls.iter().map(|d| vec![d.decl_span]).collect();
    let mut reads: Vec<Vec<Span>> = vec![Vec::new(); c.decls.len()];
    let mut conflicts = c.conflicts;

    // variable uses → innermost enclosing declaration
    let mut unresolved: Vec<(String, usize)> = Vec::new();
    for u in &c.uses {
        let pos = u.node.span().start_byte;
        let binding = c
            .decls
            .iter()
            .enumerate()
            .filter(|(_, d)| d.kind != DeclarationKind::Method && d.name == u.name && d.scope_span.contains_offset(pos))
            .min_by_key(|(_, d)| (d.scope_span.len(), usize::MAX - d.scope_span.start_byte));
        match binding {
            Some((i, _)) => {
                occurrences[i].push(u.node.span());
                if !u.plain_assign_target {
                    reads[i].push(u.node.span());
                }
            }
            None => unresolved.push((u.name.clone(), pos)),
        }
    }

    for (i, d) in c.decls.iter().enumerate() {
        if conflicts[i].is_some() {
            continue;
        }
        match d.kind {
            DeclarationKind::LocalVariable | DeclarationKind::Parameter => {
                if c.field_names.contains(&d.name) {
                    conflicts[i] = Some(format!("`{}` is also a field name", d.name));
                } else if c.class_names.contains(&d.name) {
                    conflicts[i] = Some(format!("`{}` is also a type name", d.name));
                } else if unresolved
                    .iter()
                    .any(|(n, p)| n == &d.name && d.scope_span.contains_offset(*p))
                {
                    conflicts[i] = Some(format!("unresolved `{}` inside scope", d.name));
                }
            }
            DeclarationKind::Method => {}
        }
    }

    // methods: unqualified / this / ClassName calls inside the same class
    for ((_, _, _), idxs) in c.methods_by_class.iter() {
        if idxs.len() > 1 {
            for &i in idxs {
                conflicts[i].get_or_insert_with(|| "overloaded method".to_string());
            }
        }
    }
    for (i, d) in c.decls.iter().enumerate() {
        if d.kind != DeclarationKind::Method {
            continue;
        }
        if c.method_refs.contains(&d.name) {
            conflicts[i].get_or_insert_with(|| "referenced through a method reference".to_string());
        }
        for call in c.calls.iter().filter(|call| call.name == d.name) {
            let same_class = call.enclosing_class == Some(d.scope_span);
            match &call.receiver {
                None if same_class => occurrences[i].push(call.span),
                Some(r) if r == "this" && same_class => occurrences[i].push(call.span),
                Some(r) if c.method_owner.get(&i) == Some(r) => occurrences[i].push(call.span),
                None => {
                    conflicts[i].get_or_insert_with(|| "called from another class".to_string());
                }
                Some(_) => {
                    conflicts[i].get_or_insert_with(|| "called on an untyped receiver".to_string());
                }
            }
        }
    }

    for occ in &mut occurrences {
        occ.sort_by_key(|s| s.start_byte);
        occ.dedup();
    }
    for r in &mut reads {
        r.sort_by_key(|s| s.start_byte);
    }
    Ok(ScopeTable {
        declarations: c.decls,
        occurrences,
        conflicts,
        reads,
        names_in_use: c.names_in_use,
        class_names: c.class_names,
    })
}

fn is_class_body(kind: &str) -> bool {
    matches!(
        kind,
        "class_body" | "interface_body" | "enum_body" | "enum_body_declarations" | "record_declaration_body"
    )
}

fn nearest<'a>(ancestors: &[&'a SyntaxNode], pred: impl Fn(&SyntaxNode) -> bool) -> Option<&'a SyntaxNode> {
    ancestors.iter().rev().copied().find(|n| pred(n))
}

fn enclosing_class_body<'a>(ancestors: &[&'a SyntaxNode]) -> Option<&'a SyntaxNode> {
    nearest(ancestors, |n| is_class_body(n.kind()))
}

/// Span of the type declaration owning the nearest class body.
fn enclosing_class_span(ancestors: &[&SyntaxNode]) -> Option<Span> {
    let idx = ancestors.iter().rposition(|n| is_class_body(n.kind()))?;
    let owner = if ancestors[idx].kind() == "enum_body_declarations" {
        idx.checked_sub(2)?
    } else {
        idx.checked_sub(1)?
    };
    Some(ancestors[owner].span())
}

fn type_text(node: &SyntaxNode, text: &SourceText) -> Option<String> {
    node.child_by_field("type").map(|t| {
        let mut s = t.text(text).to_string();
        if let Some(dims) = node.child_by_field("dimensions") {
            s.push_str(dims.text(text));
        }
        s
    })
}

fn is_use_position(node: &SyntaxNode, parent: Option<&SyntaxNode>) -> bool {
    let Some(parent) = parent else { return true };
    let field = node.field();
    match parent.kind() {
        "method_invocation" => field != Some("name"),
        "field_access" => field != Some("field"),
        "method_declaration" | "constructor_declaration" | "class_declaration" | "interface_declaration"
        | "enum_declaration" | "record_declaration" | "annotation_type_declaration" | "enum_constant"
        | "variable_declarator" | "formal_parameter" | "catch_formal_parameter" | "enhanced_for_statement"
        | "resource" | "spread_parameter" | "receiver_parameter" => field != Some("name"),
        "labeled_statement" | "break_statement" | "continue_statement" | "scoped_identifier"
        | "package_declaration" | "import_declaration" | "marker_annotation" | "annotation"
        | "inferred_parameters" | "switch_label" | "module_declaration" | "method_reference" => false,
        "lambda_expression" => field != Some("parameters"),
        "element_value_pair" => field != Some("key"),
        _ => true,
    }
}

fn add_decl(c: &mut Collector<'_>, decl: Declaration, conflict: Option<String>) -> usize {
    c.decls.push(decl);
    c.conflicts.push(conflict);
    c.decls.len() - 1
}

fn local_scope(declaration: &SyntaxNode, declarator: &SyntaxNode, ancestors: &[&SyntaxNode], text: &SourceText) -> Span {
    let parent = ancestors.last().copied();
    match parent {
        Some(p) if p.kind() == "for_statement" => p.span(),
        Some(p) if p.kind() == "switch_block_statement_group" => {
            let end = ancestors
                .iter()
                .rev()
                .nth(1)
                .map(|g| g.span().end_byte)
                .unwrap_or(p.span().end_byte);
            text.span(declarator.span().start_byte, end)
        }
        Some(p) => text.span(declarator.span().start_byte, p.span().end_byte),
        None => text.span(declarator.span().start_byte, declaration.span().end_byte),
    }
}

fn visit<'a>(node: &'a SyntaxNode, ancestors: &mut Vec<&'a SyntaxNode>, text: &SourceText, c: &mut Collector<'a>) {
    let parent = ancestors.last().copied();
    match node.kind() {
        "identifier" | "type_identifier" => {
            c.names_in_use.insert(node.text(text).to_string());
        }
        _ => {}
    }

    match node.kind() {
        "class_declaration" | "interface_declaration" | "enum_declaration" | "record_declaration" => {
            if let Some(name) = node.child_by_field("name") {
                c.class_names.push(name.text(text).to_string());
            }
        }
        "field_declaration" | "constant_declaration" => {
            for d in node.children_by_field("declarator") {
                if let Some(name) = d.child_by_field("name") {
                    c.field_names.insert(name.text(text).to_string());
                }
            }
        }
        "method_declaration" => {
            if let (Some(name), Some(body), Some(class_span)) = (
                node.child_by_field("name"),
                enclosing_class_body(ancestors),
                enclosing_class_span(ancestors),
            ) {
                let method = name.text(text).to_string();
                let mut conflict = None;
                if RESERVED_METHOD_NAMES.contains(&method.as_str()) {
                    conflict = Some(format!("`{method}` has a conventional meaning"));
                }
                let has_override = node
                    .child_of_kind("modifiers")
                    .map(|m| m.text(text).contains("@Override"))
                    .unwrap_or(false);
                if has_override {
                    conflict = Some("overrides a supertype method".into());
                }
                let owner_kind = ancestors
                    .iter()
                    .rposition(|n| is_class_body(n.kind()))
                    .and_then(|i| i.checked_sub(1))
                    .map(|i| ancestors[i].kind());
                if matches!(owner_kind, Some("object_creation_expression" | "interface_declaration" | "enum_constant")) {
                    conflict = Some("declared in an interface or anonymous class".into());
                }
                let idx = add_decl(
                    c,
                    Declaration {
                        name: method.clone(),
                        kind: DeclarationKind::Method,
                        decl_span: name.span(),
                        scope_span: class_span,
                        type_text: type_text(node, text),
                    },
                    conflict,
                );
                let owner_name = ancestors
                    .iter()
                    .rposition(|n| is_class_body(n.kind()))
                    .and_then(|i| i.checked_sub(1))
                    .and_then(|i| ancestors[i].child_by_field("name"))
                    .map(|n| n.text(text).to_string());
                if let Some(owner_name) = owner_name {
                    c.method_owner.insert(idx, owner_name);
                }
                let b = body.span();
                c.methods_by_class
                    .entry((b.start_byte, b.end_byte, method))
                    .or_default()
                    .push(idx);
            }
        }
        "formal_parameter" | "spread_parameter" => {
            let owner = ancestors.iter().rev().nth(1).copied();
            let name = node.child_by_field("name").or_else(|| {
                node.child_of_kind("variable_declarator")
                    .and_then(|d| d.child_by_field("name"))
            });
            if let (Some(owner), Some(name)) = (owner, name) {
                let kind = match owner.kind() {
                    "method_declaration" | "constructor_declaration" => Some(DeclarationKind::Parameter),
                    "lambda_expression" => Some(DeclarationKind::LocalVariable),
                    _ => None,
                };
                if let Some(kind) = kind {
                    add_decl(
                        c,
                        Declaration {
                            name: name.text(text).to_string(),
                            kind,
                            decl_span: name.span(),
                            scope_span: owner.span(),
                            type_text: type_text(node, text),
                        },
                        None,
                    );
                }
            }
        }
        "local_variable_declaration" => {
            for d in node.children_by_field("declarator") {
                if let Some(name) = d.child_by_field("name") {
                    let mut ty = type_text(node, text);
                    if let (Some(t), Some(dims)) = (ty.as_mut(), d.child_by_field("dimensions")) {
                        t.push_str(dims.text(text));
                    }
                    add_decl(
                        c,
                        Declaration {
                            name: name.text(text).to_string(),
                            kind: DeclarationKind::LocalVariable,
                            decl_span: name.span(),
                            scope_span: local_scope(node, d, ancestors, text),
                            type_text: ty,
                        },
                        None,
                    );
                }
            }
        }
        "enhanced_for_statement" | "catch_formal_parameter" | "resource" => {
            if let Some(name) = node.child_by_field("name") {
                let scope = match node.kind() {
                    "enhanced_for_statement" => Some(node.span()),
                    "catch_formal_parameter" => parent.map(|p| p.span()),
                    _ => nearest(ancestors, |n| n.kind() == "try_with_resources_statement").map(|n| n.span()),
                };
                if let Some(scope) = scope {
                    add_decl(
                        c,
                        Declaration {
                            name: name.text(text).to_string(),
                            kind: DeclarationKind::LocalVariable,
                            decl_span: name.span(),
                            scope_span: scope,
                            type_text: type_text(node, text),
                        },
                        None,
                    );
                }
            }
        }
        "lambda_expression" => {
            if let Some(params) = node.child_by_field("parameters") {
                let idents: Vec<&SyntaxNode> = match params.kind() {
                    "identifier" => vec![params],
                    "inferred_parameters" => params.named_children().filter(|n| n.kind() == "identifier").collect(),
                    _ => Vec::new(),
                };
                for ident in idents {
                    add_decl(
                        c,
                        Declaration {
                            name: ident.text(text).to_string(),
                            kind: DeclarationKind::LocalVariable,
                            decl_span: ident.span(),
                            scope_span: node.span(),
                            type_text: None,
                        },
                        None,
                    );
                }
            }
        }
        "method_invocation" => {
            if let Some(name) = node.child_by_field("name") {
                c.calls.push(MethodCall {
                    name: name.text(text).to_string(),
                    span: name.span(),
                    receiver: node.child_by_field("object").map(|o| o.text(text).to_string()),
                    enclosing_class: enclosing_class_span(ancestors),
                });
            }
        }
        "method_reference" => {
            if let Some(last) = node.named_children().last() {
                if last.kind() == "identifier" {
                    c.method_refs.insert(last.text(text).to_string());
                }
            }
        }
        "identifier" => {
            if is_use_position(node, parent) {
                let plain_assign_target = parent.is_some_and(|p| {
                    p.kind() == "assignment_expression"
                        && node.field() == Some("left")
                        && p.child_by_field("operator").map(|o| o.text(text)) == Some("=")
                });
                c.uses.push(Use {
                    node,
                    name: node.text(text).to_string(),
                    plain_assign_target,
                });
            }
        }
        _ => {}
    }

    ancestors.push(node);
    for child in node.children() {
        visit(child, ancestors, text, c);
    }
    ancestors.pop();
}
