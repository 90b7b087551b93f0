//! The eight semantics-preserving transformations.
//!
//! Each kind has an applicability predicate ([`enumerate_sites`]) and a
//! deterministic application function returning a [`TransformResult`] whose
//! edit script, output and line map are mutually consistent.

mod boolean;
mod condition;
mod insert;
mod loops;
mod rename;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::{Harness, HarnessError, SourceFile, TestStatus};
use crate::syntax::{apply_edits, Declaration, DeclarationKind, Edit, LineMap, Program, SourceText, Span, SyntaxError};

pub use boolean::exchange_boolean;
pub use condition::{is_side_effect_free, reorder_condition};
pub use insert::{insert_log_statement, insert_try_catch, LOG_STATEMENT};
pub use loops::exchange_loop;
pub use rename::{is_valid_identifier, rename_identifier, rename_qualified_calls};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TransformKind {
    LocalVarRename,
    MethodRename,
    ParamRename,
    InsertLog,
    InsertTryCatch,
    BooleanExchange,
    LoopExchange,
    ReorderCondition,
}

impl TransformKind {
    pub const ALL: [TransformKind; 8] = [
        TransformKind::LocalVarRename,
        TransformKind::MethodRename,
        TransformKind::ParamRename,
        TransformKind::InsertLog,
        TransformKind::InsertTryCatch,
        TransformKind::BooleanExchange,
        TransformKind::LoopExchange,
        TransformKind::ReorderCondition,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TransformKind::LocalVarRename => "LocalVarRename",
            TransformKind::MethodRename => "MethodRename",
            TransformKind::ParamRename => "ParamRename",
            TransformKind::InsertLog => "InsertLog",
            TransformKind::InsertTryCatch => "InsertTryCatch",
            TransformKind::BooleanExchange => "BooleanExchange",
            TransformKind::LoopExchange => "LoopExchange",
            TransformKind::ReorderCondition => "ReorderCondition",
        }
    }

    /// Human-readable title used in reports.
    pub fn title(self) -> &'static str {
        match self {
            TransformKind::LocalVarRename => "Local Variable Renaming",
            TransformKind::MethodRename => "Method Renaming",
            TransformKind::ParamRename => "Parameter Renaming",
            TransformKind::InsertLog => "Insert Log Statement",
            TransformKind::InsertTryCatch => "Insert Try Catch",
            TransformKind::BooleanExchange => "Boolean Exchange",
            TransformKind::LoopExchange => "Loop Exchange",
            TransformKind::ReorderCondition => "Reorder Condition",
        }
    }

    pub fn is_rename(self) -> bool {
        self.declaration_kind().is_some()
    }

    pub fn declaration_kind(self) -> Option<DeclarationKind> {
        match self {
            TransformKind::LocalVarRename => Some(DeclarationKind::LocalVariable),
            TransformKind::MethodRename => Some(DeclarationKind::Method),
            TransformKind::ParamRename => Some(DeclarationKind::Parameter),
            _ => None,
        }
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TransformKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TransformKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown transformation kind `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoopDirection {
    ForToWhile,
    WhileToFor,
}

/// Kind-specific data attached to a site.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum SiteDetail {
    Rename { declaration: Declaration },
    MethodBody { method: String },
    Statement,
    Boolean { declaration: Declaration, initial: bool },
    Loop { direction: LoopDirection },
    Comparison { operator: String },
}

/// One applicable location for one transformation kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformSite {
    pub kind: TransformKind,
    /// Declaration name, method body, statement, loop or comparison.
    pub anchor: Span,
    /// Document-order ordinal among sites of this kind, starting at 0.
    pub site_id: usize,
    pub detail: SiteDetail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamingInfo {
    pub original: String,
    pub replacement: String,
    pub provider: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub kind: TransformKind,
    pub site_id: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub naming: Option<NamingInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct TransformResult {
    pub output: SourceText,
    pub edits: Vec<Edit>,
    pub line_map: LineMap,
    pub touched_buggy_line: bool,
    pub provenance: Provenance,
}

impl TransformResult {
    pub(crate) fn from_edits(program: &Program, site: &TransformSite, edits: Vec<Edit>) -> Result<Self, TransformError> {
        let (output, line_map) = apply_edits(&program.text, &edits)?;
        Ok(TransformResult {
            output,
            edits,
            line_map,
            touched_buggy_line: false,
            provenance: Provenance {
                kind: site.kind,
                site_id: site.site_id,
                naming: None,
                seed: None,
            },
        })
    }

    /// Records whether any edit touches a line of the annotated buggy span.
    pub fn mark_buggy_span(&mut self, buggy: &Span) {
        self.touched_buggy_line = self.line_map.touches(buggy.start_line, buggy.end_line);
    }
}

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("site is not applicable: {0}")]
    Inapplicable(String),
    #[error("`{0}` collides with a name already in use")]
    Collision(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

/// Applicable sites of `kind` in document order; empty when inapplicable.
pub fn enumerate_sites(program: &Program, kind: TransformKind) -> Vec<TransformSite> {
    let mut sites = match kind {
        TransformKind::LocalVarRename | TransformKind::MethodRename | TransformKind::ParamRename => {
            rename::sites(program, kind)
        }
        TransformKind::InsertLog => insert::log_sites(program),
        TransformKind::InsertTryCatch => insert::try_catch_sites(program),
        TransformKind::BooleanExchange => boolean::sites(program),
        TransformKind::LoopExchange => loops::sites(program),
        TransformKind::ReorderCondition => condition::sites(program),
    };
    sites.sort_by_key(|s| (s.anchor.start_byte, s.anchor.end_byte));
    for (i, site) in sites.iter_mut().enumerate() {
        site.site_id = i;
    }
    sites
}

/// Seeded uniform choice among sites.
pub fn choose_site(sites: &[TransformSite], seed: u64) -> Option<&TransformSite> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sites.choose(&mut rng)
}

/// Parameters beyond the site that some kinds need.
#[derive(Debug, Clone, Default)]
pub struct ApplyOptions {
    pub new_name: Option<String>,
    pub naming_provider: Option<String>,
    pub seed: Option<u64>,
}

/// Dispatches to the kind-specific application function.
pub fn apply(program: &Program, site: &TransformSite, options: &ApplyOptions) -> Result<TransformResult, TransformError> {
    match site.kind {
        TransformKind::LocalVarRename | TransformKind::MethodRename | TransformKind::ParamRename => {
            let new_name = options
                .new_name
                .as_deref()
                .ok_or_else(|| TransformError::Contract("rename requires a new name".into()))?;
            let mut result = rename_identifier(program, site, new_name)?;
            if let (Some(naming), Some(provider)) = (result.provenance.naming.as_mut(), &options.naming_provider) {
                naming.provider = provider.clone();
            }
            Ok(result)
        }
        TransformKind::InsertLog => insert_log_statement(program, site),
        TransformKind::InsertTryCatch => insert_try_catch(program, site, options.seed.unwrap_or(DEFAULT_SEED)),
        TransformKind::BooleanExchange => exchange_boolean(program, site),
        TransformKind::LoopExchange => exchange_loop(program, site),
        TransformKind::ReorderCondition => reorder_condition(program, site),
    }
}

/// True iff the transformed fixed program compiles and passes every test.
///
/// A `false` verdict is data (the instance gets dropped); a missing or broken
/// toolchain is an error.
pub fn validate_preservation(
    program_file: &str,
    result: &TransformResult,
    tests: &SourceFile,
    harness: &Harness,
) -> Result<bool, HarnessError> {
    let program = SourceFile::new(program_file, result.output.as_str());
    let verdict = harness.run_suite(&program, tests)?;
    Ok(verdict.status == TestStatus::Pass)
}

pub(crate) fn expect_kind(site: &TransformSite, kinds: &[TransformKind]) -> Result<(), TransformError> {
    if kinds.contains(&site.kind) {
        Ok(())
    } else {
        Err(TransformError::Contract(format!(
            "site of kind {} passed to a {} transformation",
            site.kind,
            kinds.iter().map(|k| k.name()).collect::<Vec<_>>().join("/")
        )))
    }
}

#[cfg(test)]
pub(crate) mod test_util {
    use super::*;

    pub fn program(src: &str) -> Program {
        Program::parse(src).expect("fixture parses")
    }

    pub fn apply_first(src: &str, kind: TransformKind) -> (Program, TransformResult) {
        let p = program(src);
        let sites = enumerate_sites(&p, kind);
        let site = sites.first().unwrap_or_else(|| panic!("no {kind} site in {src}"));
        let options = ApplyOptions {
            new_name: Some("renamed".into()),
            ..ApplyOptions::default()
        };
        let r = apply(&p, site, &options).expect("applies");
        (p, r)
    }

    pub fn reparses(result: &TransformResult) {
        Program::parse(result.output.clone())
            .unwrap_or_else(|e| panic!("output does not re-parse ({e}):\n{}", result.output));
    }
}
