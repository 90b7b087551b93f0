//! Replacement identifiers for the renaming transformations.
//!
//! A provider ranks candidate names for a masked declaration context. The
//! built-in provider is a deterministic dictionary ranker; the external one
//! speaks a line-delimited JSON protocol to a subprocess (for example a
//! masked language model server).

mod builtin;
mod external;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{find_identifier_occurrences, Declaration, DeclarationKind, Program, SyntaxError};
use crate::transforms::is_valid_identifier;

pub use builtin::BuiltinProvider;
pub use external::{ExternalProvider, PROTOCOL_VERSION};

pub const MASK_TOKEN: &str = "<mask>";

pub const DEFAULT_CANDIDATES: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamingRequest {
    pub masked_context: String,
    pub original_name: String,
    pub kind: DeclarationKind,
    pub k: usize,
}

impl NamingRequest {
    /// Masks every bound occurrence of `decl` in the program text.
    pub fn for_declaration(program: &Program, decl: &Declaration, k: usize) -> Result<Self, SyntaxError> {
        let src = program.text.as_str();
        let mut masked = String::with_capacity(src.len());
        let mut cursor = 0;
        for span in find_identifier_occurrences(&program.scopes, decl)? {
            masked.push_str(&src[cursor..span.start_byte]);
            masked.push_str(MASK_TOKEN);
            cursor = span.end_byte;
        }
        masked.push_str(&src[cursor..]);
        Ok(NamingRequest {
            masked_context: masked,
            original_name: decl.name.clone(),
            kind: decl.kind,
            k,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NameCandidate {
    pub name: String,
    pub score: f64,
}

#[derive(Debug, Error)]
pub enum NamingError {
    #[error("invalid naming request: {0}")]
    InvalidRequest(String),
    #[error("naming provider did not answer within {0:?}")]
    Timeout(std::time::Duration),
    #[error("naming provider protocol violation: {0}")]
    Protocol(String),
    #[error("naming provider i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

/// Source of ranked candidate names.
pub trait NameProvider: Send + Sync {
    /// Short identifier recorded in instance provenance.
    fn id(&self) -> &str;

    /// Raw candidates; [`suggest_names`] validates and normalizes them.
    fn candidates(&self, request: &NamingRequest) -> Result<Vec<NameCandidate>, NamingError>;
}

/// At most `k` distinct, valid candidates other than the original name,
/// sorted by descending score (stable for ties).
pub fn suggest_names(request: &NamingRequest, provider: &dyn NameProvider) -> Result<Vec<NameCandidate>, NamingError> {
    if request.k == 0 {
        return Err(NamingError::InvalidRequest("k must be at least 1".into()));
    }
    if !request.masked_context.contains(MASK_TOKEN) {
        return Err(NamingError::InvalidRequest("context contains no mask token".into()));
    }
    let mut seen = BTreeSet::new();
    let mut out: Vec<NameCandidate> = provider
        .candidates(request)?
        .into_iter()
        .filter(|c| c.score.is_finite())
        .filter(|c| c.name != request.original_name && is_valid_identifier(&c.name))
        .filter(|c| seen.insert(c.name.clone()))
        .collect();
    out.sort_by(|a, b| b.score.total_cmp(&a.score));
    out.truncate(request.k);
    Ok(out)
}

/// Highest-scored candidate not in `visible`; if every candidate collides,
/// the top candidate with the smallest free numeric suffix (`count2`, ...).
///
/// Ties keep list order. Panics if `candidates` is empty.
pub fn select_name(candidates: &[NameCandidate], visible: &BTreeSet<String>) -> String {
    assert!(!candidates.is_empty(), "select_name needs at least one candidate");
    let mut best: Option<&NameCandidate> = None;
    for c in candidates.iter().filter(|c| !visible.contains(&c.name)) {
        if best.is_none_or(|b| c.score > b.score) {
            best = Some(c);
        }
    }
    if let Some(b) = best {
        return b.name.clone();
    }
    let top = candidates
        .iter()
        .fold(&candidates[0], |acc, c| if c.score > acc.score { c } else { acc });
    (2..)
        .map(|i| format!("{}{i}", top.name))
        .find(|n| !visible.contains(n))
        .expect("unbounded suffixes")
}

/// Picks a replacement for `decl`, falling back to `fallback` when the
/// primary provider fails or returns nothing usable. Returns the name and the
/// id of the provider that produced it.
pub fn choose_replacement(
    program: &Program,
    decl: &Declaration,
    provider: &dyn NameProvider,
    fallback: &dyn NameProvider,
    extra_visible: &BTreeSet<String>,
) -> Result<(String, String), NamingError> {
    let request = NamingRequest::for_declaration(program, decl, DEFAULT_CANDIDATES)
        .map_err(|e| NamingError::InvalidRequest(e.to_string()))?;
    let mut visible: BTreeSet<String> = program.scopes.names_in_use().clone();
    visible.extend(extra_visible.iter().cloned());
    visible.insert(decl.name.clone());

    let (candidates, used) = match suggest_names(&request, provider) {
        Ok(c) if !c.is_empty() => (c, provider),
        Ok(_) => {
            log::warn!("{} returned no usable names for `{}`", provider.id(), decl.name);
            (suggest_names(&request, fallback)?, fallback)
        }
        Err(e) => {
            log::warn!("{} failed for `{}`: {e}", provider.id(), decl.name);
            (suggest_names(&request, fallback)?, fallback)
        }
    };
    if candidates.is_empty() {
        return Err(NamingError::Protocol(format!("no candidates for `{}`", decl.name)));
    }
    Ok((select_name(&candidates, &visible), used.id().to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cands(items: &[(&str, f64)]) -> Vec<NameCandidate> {
        items
            .iter()
            .map(|(n, s)| NameCandidate {
                name: n.to_string(),
                score: *s,
            })
            .collect()
    }

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn select_takes_argmax_outside_visible() {
        assert_eq!(select_name(&cands(&[("count", 0.9), ("value", 0.8)]), &set(&[])), "count");
        assert_eq!(select_name(&cands(&[("count", 0.9), ("value", 0.8)]), &set(&["count"])), "value");
        assert_eq!(select_name(&cands(&[("value", 0.5), ("count", 0.9)]), &set(&[])), "count");
    }

    #[test]
    fn select_falls_back_to_numeric_suffix() {
        assert_eq!(select_name(&cands(&[("count", 0.9)]), &set(&["count"])), "count2");
        assert_eq!(
            select_name(&cands(&[("count", 0.9), ("n", 0.1)]), &set(&["count", "count2", "n"])),
            "count3"
        );
    }

    #[test]
    fn ties_keep_list_order() {
        assert_eq!(select_name(&cands(&[("b", 0.5), ("a", 0.5)]), &set(&[])), "b");
    }

    struct Fixed(Vec<NameCandidate>);

    impl NameProvider for Fixed {
        fn id(&self) -> &str {
            "fixed"
        }
        fn candidates(&self, _: &NamingRequest) -> Result<Vec<NameCandidate>, NamingError> {
            Ok(self.0.clone())
        }
    }

    #[test]
    fn suggest_filters_and_sorts() {
        let provider = Fixed(cands(&[
            ("temp", 1.0),
            ("9bad", 0.95),
            ("class", 0.9),
            ("total", 0.3),
            ("count", 0.7),
            ("count", 0.6),
            ("sum", 0.5),
        ]));
        let req = NamingRequest {
            masked_context: "int <mask> = 0;".into(),
            original_name: "temp".into(),
            kind: DeclarationKind::LocalVariable,
            k: 2,
        };
        let names: Vec<_> = suggest_names(&req, &provider).unwrap().into_iter().map(|c| c.name).collect();
        assert_eq!(names, vec!["count", "sum"]);
        let bad = NamingRequest { k: 0, ..req.clone() };
        assert!(suggest_names(&bad, &provider).is_err());
        let unmasked = NamingRequest {
            masked_context: "int temp;".into(),
            ..req
        };
        assert!(suggest_names(&unmasked, &provider).is_err());
    }

    #[test]
    fn request_masks_every_occurrence() {
        let p = Program::parse("class A { int m() { int temp = 0; temp++; return temp; } }").unwrap();
        let decl = p.scopes.declarations_of(DeclarationKind::LocalVariable).next().unwrap();
        let req = NamingRequest::for_declaration(&p, decl, 3).unwrap();
        assert_eq!(req.masked_context, "class A { int m() { int <mask> = 0; <mask>++; return <mask>; } }");
    }

    #[test]
    fn fallback_provider_is_used_on_failure() {
        struct Broken;
        impl NameProvider for Broken {
            fn id(&self) -> &str {
                "broken"
            }
            fn candidates(&self, _: &NamingRequest) -> Result<Vec<NameCandidate>, NamingError> {
                Err(NamingError::Protocol("nope".into()))
            }
        }
        let p = Program::parse("class A { int m() { int temp = 0; temp++; return temp; } }").unwrap();
        let decl = p.scopes.declarations_of(DeclarationKind::LocalVariable).next().unwrap();
        let (name, id) = choose_replacement(&p, decl, &Broken, &BuiltinProvider, &BTreeSet::new()).unwrap();
        assert_eq!(id, "builtin");
        assert_eq!(name, "count");
    }
}
