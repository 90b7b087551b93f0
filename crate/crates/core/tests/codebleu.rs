mod common;

use repairbench_core::metrics::{bleu, codebleu_subset, ngram_matches, tokenize, CodeBleuWeights};

use common::{brute_force_ngram_matches, corpus_files, token_disjoint_pairs};

#[test]
fn identical_sources_score_one() {
    for path in corpus_files() {
        let src = std::fs::read_to_string(&path).unwrap();
        let s = codebleu_subset(&src, &src, CodeBleuWeights::default()).unwrap();
        assert_eq!(s.total, 1.0, "{}", path.display());
    }
}

#[test]
fn token_disjoint_sources_score_low() {
    for (a, b) in token_disjoint_pairs() {
        let (ta, tb) = (tokenize(&a).unwrap(), tokenize(&b).unwrap());
        assert!(ta.iter().all(|t| !tb.contains(t)), "{ta:?} / {tb:?}");
        let s = codebleu_subset(&a, &b, CodeBleuWeights::default()).unwrap();
        assert!(s.total < 0.1, "{} vs {}: {}", a, b, s.total);
    }
}

#[test]
fn ngram_counts_match_brute_force() {
    let files = corpus_files();
    let sources: Vec<Vec<String>> = files.iter().map(|p| tokenize(&std::fs::read_to_string(p).unwrap()).unwrap()).collect();
    let mut pairs = 0;
    for i in 0..sources.len() {
        let j = (i * 7 + 3) % sources.len();
        for n in 1..=4 {
            assert_eq!(ngram_matches(&sources[i], &sources[j], n), brute_force_ngram_matches(&sources[i], &sources[j], n));
        }
        pairs += 1;
    }
    assert!(pairs >= 20);
}

#[test]
fn empty_hypothesis_scores_zero() {
    let reference = tokenize("class A { int f() { return 1; } }").unwrap();
    assert_eq!(bleu(&reference, &[]), 0.0);
    let s = codebleu_subset("class A { int f() { return 1; } }", "", CodeBleuWeights::default()).unwrap();
    assert_eq!(s.total, 0.0);
}

#[test]
fn scores_stay_in_unit_interval() {
    let files = corpus_files();
    for w in files.windows(2) {
        let a = std::fs::read_to_string(&w[0]).unwrap();
        let b = std::fs::read_to_string(&w[1]).unwrap();
        let s = codebleu_subset(&a, &b, CodeBleuWeights::default()).unwrap();
        assert!((0.0..=1.0).contains(&s.total));
    }
}
