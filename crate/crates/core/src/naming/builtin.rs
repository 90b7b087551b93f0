//! Dictionary-based name ranking.
//!
//! The masked context is reduced to a sparse vector of role tags (declared
//! type, loop index, counter, accumulator, returned value, ...). Dictionary
//! entries carry their own tag vectors; candidates are ranked by cosine
//! similarity, ties broken by a stable hash of (original, candidate).

use std::collections::BTreeMap;
use std::sync::LazyLock;

use regex::Regex;
use sha2::{Digest, Sha256};

use super::{NameCandidate, NameProvider, NamingError, NamingRequest};
use crate::syntax::DeclarationKind;

#[derive(Debug, Clone, Copy, Default)]
pub struct BuiltinProvider;

type Tags = BTreeMap<&'static str, f64>;

struct Entry {
    name: &'static str,
    kinds: &'static [DeclarationKind],
    tags: &'static [(&'static str, f64)],
}

const LOCAL: &[DeclarationKind] = &[DeclarationKind::LocalVariable];
const PARAM: &[DeclarationKind] = &[DeclarationKind::Parameter];
const BOTH: &[DeclarationKind] = &[DeclarationKind::LocalVariable, DeclarationKind::Parameter];

macro_rules! entry {
    ($name:literal, $kinds:expr, [$($tag:literal : $w:literal),* $(,)?]) => {
        Entry { name: $name, kinds: $kinds, tags: &[$(($tag, $w)),*] }
    };
}

static DICTIONARY: &[Entry] = &[
    entry!("count", LOCAL, ["int": 1.0, "counter": 2.0]),
    entry!("counter", LOCAL, ["int": 1.0, "counter": 1.5]),
    entry!("index", BOTH, ["int": 1.0, "index": 2.0, "loop-index": 1.0]),
    entry!("idx", LOCAL, ["int": 1.0, "loop-index": 2.0, "index": 1.0]),
    entry!("pos", BOTH, ["int": 1.0, "index": 1.5]),
    entry!("total", LOCAL, ["int": 0.7, "real": 0.7, "accumulator": 2.0, "result": 0.6]),
    entry!("sum", LOCAL, ["int": 0.7, "real": 0.7, "accumulator": 1.8]),
    entry!("product", LOCAL, ["int": 0.7, "real": 0.7, "product": 2.0]),
    entry!("result", LOCAL, ["result": 2.0, "int": 0.3, "string": 0.3, "bool": 0.3, "list": 0.3]),
    entry!("res", LOCAL, ["result": 1.6]),
    entry!("ans", LOCAL, ["result": 1.4, "int": 0.3]),
    entry!("value", BOTH, ["int": 0.5, "real": 0.5, "param": 0.8]),
    entry!("current", LOCAL, ["int": 0.6, "element": 1.0, "char": 0.4]),
    entry!("item", BOTH, ["element": 2.0]),
    entry!("element", BOTH, ["element": 1.8, "array": 0.2]),
    entry!("flag", LOCAL, ["bool": 1.0, "flag": 2.0]),
    entry!("found", LOCAL, ["bool": 1.0, "flag": 1.2, "result": 0.8]),
    entry!("valid", LOCAL, ["bool": 1.0, "result": 0.6]),
    entry!("done", LOCAL, ["bool": 0.8, "flag": 1.0]),
    entry!("text", BOTH, ["string": 2.0]),
    entry!("word", BOTH, ["string": 1.5, "element": 0.6]),
    entry!("builder", LOCAL, ["builder": 2.0]),
    entry!("buffer", LOCAL, ["builder": 1.6]),
    entry!("items", BOTH, ["list": 2.0]),
    entry!("values", BOTH, ["array": 1.6, "list": 0.8]),
    entry!("numbers", BOTH, ["array": 1.6, "int": 0.4]),
    entry!("mapping", BOTH, ["map": 2.0]),
    entry!("lookup", LOCAL, ["map": 1.6]),
    entry!("seen", LOCAL, ["set": 2.0]),
    entry!("letter", BOTH, ["char": 2.0]),
    entry!("symbol", BOTH, ["char": 1.5]),
    entry!("temp", LOCAL, ["int": 0.3, "real": 0.3, "swap": 2.0]),
    entry!("tmp", LOCAL, ["swap": 1.8]),
    entry!("limit", BOTH, ["int": 0.6, "bound": 2.0]),
    entry!("size", BOTH, ["int": 0.6, "bound": 1.6]),
    entry!("val", PARAM, ["int": 1.0, "param": 1.0]),
    entry!("num", PARAM, ["int": 1.0, "param": 0.7]),
    entry!("number", PARAM, ["int": 1.0, "param": 0.6]),
    entry!("amount", PARAM, ["real": 1.0, "param": 0.9]),
    entry!("input", PARAM, ["string": 1.2, "param": 1.0]),
    entry!("str", PARAM, ["string": 1.5, "param": 0.8]),
    entry!("arr", PARAM, ["array": 2.0, "param": 0.8]),
    entry!("nums", PARAM, ["array": 1.6, "int": 0.5, "param": 0.6]),
    entry!("list", PARAM, ["list": 2.0, "param": 0.8]),
    entry!("condition", PARAM, ["bool": 1.5, "param": 0.8]),
    entry!("c", PARAM, ["char": 1.8, "param": 0.8]),
    entry!("obj", PARAM, ["object": 2.0, "param": 0.8]),
    entry!("other", BOTH, ["object": 1.2]),
];

/// Method names: synonyms for a leading verb or any camel-case word.
static WORD_SYNONYMS: &[(&str, &[&str])] = &[
    ("compute", &["calculate", "calc", "evaluate"]),
    ("calculate", &["compute", "calc"]),
    ("calc", &["calculate", "compute"]),
    ("get", &["fetch", "retrieve", "obtain"]),
    ("find", &["search", "locate", "lookup"]),
    ("search", &["find", "locate"]),
    ("check", &["verify", "test", "validate"]),
    ("is", &["check", "test"]),
    ("has", &["contains", "includes"]),
    ("contains", &["has", "includes"]),
    ("count", &["tally", "number"]),
    ("sum", &["total", "add"]),
    ("make", &["create", "build"]),
    ("create", &["make", "build"]),
    ("build", &["create", "make"]),
    ("add", &["append", "insert"]),
    ("remove", &["delete", "drop"]),
    ("delete", &["remove", "drop"]),
    ("sort", &["order", "arrange"]),
    ("reverse", &["invert", "flip"]),
    ("convert", &["transform", "translate"]),
    ("to", &["as"]),
    ("parse", &["read", "decode"]),
    ("print", &["display", "show"]),
    ("validate", &["verify", "check"]),
    ("generate", &["produce", "create"]),
    ("merge", &["combine", "join"]),
    ("filter", &["select", "keep"]),
    ("split", &["divide", "separate"]),
    ("max", &["largest", "maximum"]),
    ("min", &["smallest", "minimum"]),
    ("number", &["num", "value"]),
    ("numbers", &["values", "nums"]),
    ("string", &["text", "str"]),
    ("str", &["string", "text"]),
    ("length", &["size", "len"]),
    ("list", &["items", "array"]),
    ("array", &["list", "values"]),
    ("words", &["tokens", "terms"]),
    ("digits", &["figures", "numerals"]),
    ("prime", &["primal"]),
    ("average", &["mean"]),
    ("mean", &["average"]),
    ("first", &["initial", "leading"]),
    ("last", &["final", "trailing"]),
    ("even", &["evens"]),
    ("odd", &["odds"]),
    ("closest", &["nearest"]),
    ("unique", &["distinct"]),
    ("common", &["shared"]),
    ("total", &["sum", "overall"]),
];

static PREFIX_VERBS: &[&str] = &["compute", "get", "calc", "do"];

struct ContextPattern {
    tag: &'static str,
    weight: f64,
    regex: Regex,
}

static CONTEXT_PATTERNS: LazyLock<Vec<ContextPattern>> = LazyLock::new(|| {
    let p = |tag, weight, re: &str| ContextPattern {
        tag,
        weight,
        regex: Regex::new(re).expect("valid pattern"),
    };
    vec![
        p("loop-index", 2.0, r"for\s*\(\s*(?:int|long)\s+<mask>\s*="),
        p("element", 2.0, r"for\s*\([^;:()]*\s<mask>\s*:"),
        p("counter", 2.0, r"<mask>\s*\+\+|\+\+\s*<mask>|<mask>\s*\+=\s*1\s*;|<mask>\s*=\s*<mask>\s*\+\s*1\s*;"),
        p("accumulator", 2.0, r"<mask>\s*\+=\s*(?:[^1\s]|1\S)|<mask>\s*=\s*<mask>\s*\+\s*[^1]"),
        p("product", 2.0, r"<mask>\s*\*="),
        p("result", 2.0, r"return\s+<mask>\s*;"),
        p("index", 1.0, r"\[\s*<mask>\s*[\]+-]"),
        p("flag", 1.5, r"<mask>\s*=\s*(?:true|false)\s*;"),
        p("swap", 2.0, r"<mask>\s*=\s*\w+(?:\[[^\]]*\])?\s*;\s*\w+(?:\[[^\]]*\])?\s*=\s*\w+(?:\[[^\]]*\])?\s*;\s*\w+(?:\[[^\]]*\])?\s*=\s*<mask>\s*;"),
        p("bound", 1.2, r"<\s*<mask>\s*[;)]"),
    ]
});

static DECLARED_TYPE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"([A-Za-z_][\w.]*(?:\s*<[^<>;]*(?:<[^<>;]*>[^<>;]*)*>)?(?:\s*\[\s*\])*)\s+<mask>\s*[=;,:)\[]")
        .expect("valid pattern")
});

fn type_tags(type_text: &str) -> Vec<&'static str> {
    let base = type_text.split('<').next().unwrap_or("").trim();
    if type_text.contains('[') {
        let mut tags = vec!["array"];
        if base.starts_with("int") || base.starts_with("long") {
            tags.push("int");
        }
        return tags;
    }
    let tag = match base {
        "int" | "long" | "short" | "byte" | "Integer" | "Long" => "int",
        "double" | "float" | "Double" | "Float" => "real",
        "boolean" | "Boolean" => "bool",
        "char" | "Character" => "char",
        "String" | "CharSequence" => "string",
        "StringBuilder" | "StringBuffer" => "builder",
        "List" | "ArrayList" | "LinkedList" | "Collection" | "Deque" | "Queue" | "Stack" => "list",
        "Map" | "HashMap" | "TreeMap" | "LinkedHashMap" => "map",
        "Set" | "HashSet" | "TreeSet" => "set",
        "Object" => "object",
        _ => return Vec::new(),
    };
    vec![tag]
}

/// Role tags inferred from the masked context.
fn request_tags(request: &NamingRequest) -> Tags {
    let ctx = &request.masked_context;
    let mut tags = Tags::new();
    if let Some(m) = DECLARED_TYPE.captures(ctx) {
        for t in type_tags(&m[1]) {
            *tags.entry(t).or_default() += 1.0;
        }
    }
    for p in CONTEXT_PATTERNS.iter() {
        if p.regex.is_match(ctx) {
            *tags.entry(p.tag).or_default() += p.weight;
        }
    }
    if request.kind == DeclarationKind::Parameter {
        *tags.entry("param").or_default() += 1.0;
    }
    tags
}

fn cosine(a: &Tags, b: &[(&str, f64)]) -> f64 {
    let dot: f64 = b.iter().map(|(t, w)| a.get(t).copied().unwrap_or(0.0) * w).sum();
    let na = a.values().map(|w| w * w).sum::<f64>().sqrt();
    let nb = b.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(0.0, 1.0)
    }
}

fn stable_hash(original: &str, candidate: &str) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(original.as_bytes());
    h.update([0]);
    h.update(candidate.as_bytes());
    h.finalize().into()
}

fn split_camel(name: &str) -> Vec<String> {
    let mut words = Vec::new();
    let mut current = String::new();
    for ch in name.chars() {
        if (ch.is_uppercase() && !current.is_empty()) || ch == '_' {
            words.push(std::mem::take(&mut current));
        }
        if ch != '_' {
            current.push(ch.to_ascii_lowercase());
        }
    }
    if !current.is_empty() {
        words.push(current);
    }
    words.retain(|w| !w.is_empty());
    words
}

fn join_camel(words: &[String]) -> String {
    let mut out = String::new();
    for (i, w) in words.iter().enumerate() {
        if i == 0 {
            out.push_str(w);
        } else {
            let mut chars = w.chars();
            if let Some(c) = chars.next() {
                out.extend(c.to_uppercase());
                out.push_str(chars.as_str());
            }
        }
    }
    out
}

fn synonyms(word: &str) -> &'static [&'static str] {
    WORD_SYNONYMS
        .iter()
        .find(|(w, _)| *w == word)
        .map(|(_, s)| *s)
        .unwrap_or(&[])
}

fn method_candidates(original: &str) -> Vec<NameCandidate> {
    let words = split_camel(original);
    let mut out = Vec::new();
    if words.is_empty() {
        return out;
    }
    for (i, word) in words.iter().enumerate() {
        for (rank, syn) in synonyms(word).iter().enumerate() {
            let mut replaced = words.clone();
            replaced[i] = syn.to_string();
            let base = if i == 0 { 0.9 } else { 0.8 };
            out.push(NameCandidate {
                name: join_camel(&replaced),
                score: base - 0.05 * rank as f64,
            });
        }
    }
    if !synonyms(&words[0]).is_empty() && words.len() > 1 {
        for (rank, verb) in synonyms(&words[0]).iter().enumerate() {
            for j in 1..words.len() {
                for noun in synonyms(&words[j]).iter().take(1) {
                    let mut replaced = words.clone();
                    replaced[0] = verb.to_string();
                    replaced[j] = noun.to_string();
                    out.push(NameCandidate {
                        name: join_camel(&replaced),
                        score: 0.7 - 0.05 * rank as f64,
                    });
                }
            }
        }
    }
    for (rank, verb) in PREFIX_VERBS.iter().enumerate() {
        if words[0] != *verb {
            let mut prefixed = vec![verb.to_string()];
            prefixed.extend(words.iter().cloned());
            out.push(NameCandidate {
                name: join_camel(&prefixed),
                score: 0.5 - 0.05 * rank as f64,
            });
        }
    }
    out
}

fn variable_candidates(request: &NamingRequest) -> Vec<NameCandidate> {
    let tags = request_tags(request);
    DICTIONARY
        .iter()
        .filter(|e| e.kinds.contains(&request.kind))
        .map(|e| NameCandidate {
            name: e.name.to_string(),
            score: cosine(&tags, e.tags),
        })
        .collect()
}

impl NameProvider for BuiltinProvider {
    fn id(&self) -> &str {
        "builtin"
    }

    fn candidates(&self, request: &NamingRequest) -> Result<Vec<NameCandidate>, NamingError> {
        let mut out = match request.kind {
            DeclarationKind::Method => method_candidates(&request.original_name),
            _ => variable_candidates(request),
        };
        out.retain(|c| c.name != request.original_name);
        out.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then_with(|| stable_hash(&request.original_name, &a.name).cmp(&stable_hash(&request.original_name, &b.name)))
        });
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::super::suggest_names;
    use super::*;

    fn request(ctx: &str, original: &str, kind: DeclarationKind, k: usize) -> NamingRequest {
        NamingRequest {
            masked_context: ctx.into(),
            original_name: original.into(),
            kind,
            k,
        }
    }

    fn top(ctx: &str, original: &str, kind: DeclarationKind) -> Vec<String> {
        suggest_names(&request(ctx, original, kind, 3), &BuiltinProvider)
            .unwrap()
            .into_iter()
            .map(|c| c.name)
            .collect()
    }

    #[test]
    fn int_counter_suggests_count() {
        let names = top(
            "class A { int m(int[] xs) { int <mask> = 0; for (int x : xs) if (x > 0) <mask>++; return <mask>; } }",
            "temp",
            DeclarationKind::LocalVariable,
        );
        assert_eq!(names[0], "count");
    }

    #[test]
    fn int_parameter_suggests_val() {
        let names = top(
            "class A { void foo(int <mask>) { System.out.println(<mask>); } }",
            "x",
            DeclarationKind::Parameter,
        );
        assert_eq!(names[0], "val");
    }

    #[test]
    fn loop_index_and_accumulator() {
        let ctx_i = "class A { int m(int[] xs) { int s = 0; for (int <mask> = 0; <mask> < xs.length; <mask>++) s += xs[<mask>]; return s; } }";
        assert_eq!(top(ctx_i, "i", DeclarationKind::LocalVariable)[0], "idx");
        let ctx_s = "class A { int m(int[] xs) { int <mask> = 0; for (int i = 0; i < xs.length; i++) <mask> += xs[i]; return <mask>; } }";
        assert_eq!(top(ctx_s, "s", DeclarationKind::LocalVariable)[0], "total");
    }

    #[test]
    fn method_verbs_get_synonyms() {
        let names = top("class A { int <mask>(int n) { return n; } }", "compute", DeclarationKind::Method);
        assert_eq!(names[0], "calculate");
        let names = top("class A { boolean <mask>(int n) { return n > 1; } }", "isPrime", DeclarationKind::Method);
        assert_eq!(names[0], "checkPrime");
        let names = top("class A { int <mask>(int n) { return n; } }", "fib", DeclarationKind::Method);
        assert_eq!(names[0], "computeFib");
    }

    #[test]
    fn deterministic_and_never_the_original() {
        let req = request("class A { int m() { int <mask> = 0; <mask>++; return <mask>; } }", "count", DeclarationKind::LocalVariable, 1);
        let a = suggest_names(&req, &BuiltinProvider).unwrap();
        let b = suggest_names(&req, &BuiltinProvider).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 1);
        assert_ne!(a[0].name, "count");
    }

    #[test]
    fn camel_case_round_trip() {
        assert_eq!(split_camel("sumOfDigits"), vec!["sum", "of", "digits"]);
        assert_eq!(join_camel(&split_camel("sumOfDigits")), "sumOfDigits");
        assert_eq!(split_camel("max_value"), vec!["max", "value"]);
    }
}
