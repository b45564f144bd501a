#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::OnceLock;

use csfe::{load_resources, LexiconBundle};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn resources_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../resources")
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn bundle() -> &'static LexiconBundle {
    static BUNDLE: OnceLock<LexiconBundle> = OnceLock::new();
    BUNDLE.get_or_init(|| load_resources(resources_dir()).expect("shipped resources load"))
}

pub fn corpus50() -> Vec<String> {
    std::fs::read_to_string(fixture("corpus50.txt"))
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect()
}

/// Values of a two-column resource table, read straight from disk.
pub fn table_values(file: &str) -> Vec<(String, String)> {
    std::fs::read_to_string(resources_dir().join(file))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let mut f = l.split('\t');
            (f.next().unwrap().to_string(), f.next().unwrap().to_string())
        })
        .collect()
}

/// Reference grapheme splitting for IPA: a new cluster starts at every
/// codepoint that is not a combining mark.
pub fn oracle_clusters(s: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for c in s.chars() {
        match out.last_mut() {
            Some(last) if unicode_normalization::char::is_combining_mark(c) => last.push(c),
            _ => out.push(c.to_string()),
        }
    }
    out
}

/// Deterministic mixed-language lines of at most `max_chars` characters.
pub fn mixed_corpus(n: usize, max_chars: usize, seed: u64) -> Vec<String> {
    let b = bundle();
    let mandarin: Vec<String> = b
        .mandarin_words()
        .map(|(w, _)| w.to_string())
        .chain(b.mandarin_chars().map(|(c, _)| c.to_string()))
        .collect();
    let english: Vec<&str> = b
        .english_words()
        .map(|(w, _)| w)
        .filter(|w| w.len() <= 8 && !w.contains('\''))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let target = rng.gen_range(4..=max_chars);
            let mut line = String::new();
            let mut chars = 0;
            let mut last_english = false;
            loop {
                let word = if rng.gen_bool(0.2) {
                    english.choose(&mut rng).unwrap().to_string()
                } else {
                    mandarin.choose(&mut rng).unwrap().clone()
                };
                let is_english = word.is_ascii();
                let sep = if is_english && last_english { " " } else { "" };
                let punct = match rng.gen_range(0..10) {
                    0 => "，",
                    1 => "。",
                    _ => "",
                };
                let added = sep.chars().count() + word.chars().count() + punct.chars().count();
                if chars + added > target {
                    break;
                }
                line.push_str(sep);
                line.push_str(&word);
                line.push_str(punct);
                chars += added;
                last_english = is_english && punct.is_empty();
            }
            if line.is_empty() {
                line.push('好');
            }
            line
        })
        .collect()
}
