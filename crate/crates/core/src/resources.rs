//! Lexicon and mapping tables, loaded from a directory of TSV files.
//!
//! | file                | line format                                   |
//! |---------------------|-----------------------------------------------|
//! | `mandarin_char.tsv` | `<char>\t<tonal_pinyin>[,<alt>...]`           |
//! | `mandarin_word.tsv` | `<word>\t<tonal_pinyin> <tonal_pinyin> ...`   |
//! | `english.dict`      | `WORD  PH1 PH2 ...` (CMU format)              |
//! | `pinyin_ipa.tsv`    | `<toneless_pinyin>\t<ipa>`                    |
//! | `arpabet_ipa.tsv`   | `<phone>\t<ipa>`                              |
//! | `pos.tsv`           | `<word>\t<tag>`                               |
//!
//! The TSV tables accept an optional trailing language-tag column
//! (`cmn`, `yue`, `wuu`, ...) so other languages can ship in the same files.
//! Blank lines and `#` comments are ignored everywhere; `english.dict` also
//! skips `;;;` comments.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::g2p::{split_stress, tone_of};
use crate::segmentation::PosTag;

pub const MANDARIN_CHAR_FILE: &str = "mandarin_char.tsv";
pub const MANDARIN_WORD_FILE: &str = "mandarin_word.tsv";
pub const ENGLISH_DICT_FILE: &str = "english.dict";
pub const PINYIN_IPA_FILE: &str = "pinyin_ipa.tsv";
pub const ARPABET_IPA_FILE: &str = "arpabet_ipa.tsv";
pub const POS_FILE: &str = "pos.tsv";

pub const RESOURCE_FILES: [&str; 6] = [
    MANDARIN_CHAR_FILE,
    MANDARIN_WORD_FILE,
    ENGLISH_DICT_FILE,
    PINYIN_IPA_FILE,
    ARPABET_IPA_FILE,
    POS_FILE,
];

#[derive(Debug, Error)]
pub enum ResourceError {
    #[error("missing resource file {0}")]
    MissingResource(String),
    #[error("{file}:{line}: malformed line: {reason}")]
    MalformedLine {
        file: String,
        line: usize,
        reason: String,
    },
    #[error("{file}: duplicate key {key:?}")]
    DuplicateKey { file: String, key: String },
    #[error("no IPA mapping for {0:?}")]
    DanglingReference(String),
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// One violated bundle invariant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Finding {
    /// A pinyin syllable used by `used_by` has no `pinyin_ipa.tsv` row.
    DanglingPinyin { syllable: String, used_by: String },
    /// An ARPAbet phone used by `used_by` has no `arpabet_ipa.tsv` row.
    DanglingPhone { phone: String, used_by: String },
    /// A pronunciation with no stressed vowel, so it yields no syllables.
    NoNucleus { word: String },
}

impl Finding {
    pub fn invariant(&self) -> &'static str {
        match self {
            Finding::DanglingPinyin { .. } => "pinyin syllable has IPA mapping",
            Finding::DanglingPhone { .. } => "ARPAbet phone has IPA mapping",
            Finding::NoNucleus { .. } => "English pronunciation has a vowel nucleus",
        }
    }

    /// The offending key.
    pub fn key(&self) -> &str {
        match self {
            Finding::DanglingPinyin { syllable, .. } => syllable,
            Finding::DanglingPhone { phone, .. } => phone,
            Finding::NoNucleus { word } => word,
        }
    }
}

/// Immutable pronunciation, POS and IPA-mapping resources.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconBundle {
    mandarin_char_pron: BTreeMap<char, Vec<String>>,
    mandarin_word_pron: BTreeMap<String, Vec<String>>,
    english_pron: BTreeMap<String, Vec<String>>,
    pinyin_to_ipa: BTreeMap<String, String>,
    arpabet_to_ipa: BTreeMap<String, String>,
    pos_table: BTreeMap<String, PosTag>,
    language_tags: BTreeSet<String>,
    max_word_chars: usize,
}

impl LexiconBundle {
    /// Default reading of a character.
    pub fn char_reading(&self, ch: char) -> Option<&str> {
        self.mandarin_char_pron
            .get(&ch)
            .and_then(|r| r.first())
            .map(String::as_str)
    }

    /// All readings of a character, default first.
    pub fn char_readings(&self, ch: char) -> Option<&[String]> {
        self.mandarin_char_pron.get(&ch).map(Vec::as_slice)
    }

    pub fn word_reading(&self, word: &str) -> Option<&[String]> {
        self.mandarin_word_pron.get(word).map(Vec::as_slice)
    }

    pub fn is_lexicon_word(&self, word: &str) -> bool {
        self.mandarin_word_pron.contains_key(word)
    }

    /// Length in characters of the longest segmentation lexicon entry.
    pub fn max_word_chars(&self) -> usize {
        self.max_word_chars
    }

    /// ARPAbet phones (with stress digits) for a lowercase English word.
    pub fn english_phones(&self, word: &str) -> Option<&[String]> {
        self.english_pron.get(word).map(Vec::as_slice)
    }

    pub fn pinyin_ipa(&self, base: &str) -> Option<&str> {
        self.pinyin_to_ipa.get(base).map(String::as_str)
    }

    pub fn arpabet_ipa(&self, phone: &str) -> Option<&str> {
        self.arpabet_to_ipa.get(phone).map(String::as_str)
    }

    pub fn pos(&self, word: &str) -> Option<PosTag> {
        self.pos_table.get(word).copied()
    }

    pub fn mandarin_chars(&self) -> impl Iterator<Item = (char, &[String])> {
        self.mandarin_char_pron
            .iter()
            .map(|(c, r)| (*c, r.as_slice()))
    }

    pub fn mandarin_words(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.mandarin_word_pron
            .iter()
            .map(|(w, r)| (w.as_str(), r.as_slice()))
    }

    /// English entries, excluding `WORD(2)`-style variant pronunciations.
    pub fn english_words(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.english_pron
            .iter()
            .filter(|(w, _)| !w.contains('('))
            .map(|(w, p)| (w.as_str(), p.as_slice()))
    }

    pub fn pinyin_ipa_table(&self) -> impl Iterator<Item = (&str, &str)> {
        self.pinyin_to_ipa
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn arpabet_ipa_table(&self) -> impl Iterator<Item = (&str, &str)> {
        self.arpabet_to_ipa
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn language_tags(&self) -> &BTreeSet<String> {
        &self.language_tags
    }

    /// (chars, words, english, pinyin, arpabet, pos) table sizes.
    pub fn table_sizes(&self) -> [usize; 6] {
        [
            self.mandarin_char_pron.len(),
            self.mandarin_word_pron.len(),
            self.english_pron.len(),
            self.pinyin_to_ipa.len(),
            self.arpabet_to_ipa.len(),
            self.pos_table.len(),
        ]
    }

    /// Canonical, key-sorted dump of every table.
    pub fn to_canonical_bytes(&self) -> Vec<u8> {
        let mut out = String::new();
        out.push_str("[mandarin_char]\n");
        for (c, r) in &self.mandarin_char_pron {
            let _ = writeln!(out, "{c}\t{}", r.join(","));
        }
        out.push_str("[mandarin_word]\n");
        for (w, r) in &self.mandarin_word_pron {
            let _ = writeln!(out, "{w}\t{}", r.join(" "));
        }
        out.push_str("[english]\n");
        for (w, p) in &self.english_pron {
            let _ = writeln!(out, "{w}\t{}", p.join(" "));
        }
        out.push_str("[pinyin_ipa]\n");
        for (k, v) in &self.pinyin_to_ipa {
            let _ = writeln!(out, "{k}\t{v}");
        }
        out.push_str("[arpabet_ipa]\n");
        for (k, v) in &self.arpabet_to_ipa {
            let _ = writeln!(out, "{k}\t{v}");
        }
        out.push_str("[pos]\n");
        for (k, v) in &self.pos_table {
            let _ = writeln!(out, "{k}\t{}", v.as_str());
        }
        out.push_str("[languages]\n");
        for tag in &self.language_tags {
            let _ = writeln!(out, "{tag}");
        }
        out.into_bytes()
    }
}

/// Raw contents of the six resource files.
#[derive(Debug, Clone, Copy, Default)]
pub struct ResourceTexts<'a> {
    pub mandarin_char: &'a str,
    pub mandarin_word: &'a str,
    pub english: &'a str,
    pub pinyin_ipa: &'a str,
    pub arpabet_ipa: &'a str,
    pub pos: &'a str,
}

impl ResourceTexts<'_> {
    /// Parses every table without cross-table checks. Use
    /// [`validate_bundle`] (or [`load_resources`]) for the reference checks.
    pub fn parse(&self) -> Result<LexiconBundle, ResourceError> {
        let mut language_tags = BTreeSet::new();

        let mut mandarin_char_pron = BTreeMap::new();
        for line in tsv_lines(MANDARIN_CHAR_FILE, self.mandarin_char, &mut language_tags)? {
            let mut chars = line.key.chars();
            let ch = match (chars.next(), chars.next()) {
                (Some(c), None) => c,
                _ => return Err(line.malformed("key must be a single character")),
            };
            let readings: Vec<String> = line
                .value
                .split(',')
                .map(|r| r.trim().to_string())
                .collect();
            for r in &readings {
                tone_of(r).map_err(|e| line.malformed(&e.to_string()))?;
            }
            if mandarin_char_pron.insert(ch, readings).is_some() {
                return Err(duplicate(MANDARIN_CHAR_FILE, line.key));
            }
        }

        let mut mandarin_word_pron = BTreeMap::new();
        let mut max_word_chars = 0;
        for line in tsv_lines(MANDARIN_WORD_FILE, self.mandarin_word, &mut language_tags)? {
            let readings: Vec<String> = line.value.split_whitespace().map(str::to_string).collect();
            let n_chars = line.key.chars().count();
            if readings.len() != n_chars {
                return Err(line.malformed(&format!(
                    "{} syllables for {n_chars} characters",
                    readings.len()
                )));
            }
            for r in &readings {
                tone_of(r).map_err(|e| line.malformed(&e.to_string()))?;
            }
            max_word_chars = max_word_chars.max(n_chars);
            if mandarin_word_pron
                .insert(line.key.to_string(), readings)
                .is_some()
            {
                return Err(duplicate(MANDARIN_WORD_FILE, line.key));
            }
        }

        let english_pron = parse_cmu(self.english)?;

        let mut pinyin_to_ipa = BTreeMap::new();
        for line in tsv_lines(PINYIN_IPA_FILE, self.pinyin_ipa, &mut language_tags)? {
            if !line.key.chars().all(|c| c.is_ascii_lowercase() || c == 'ü') {
                return Err(line.malformed("pinyin key must be lowercase letters"));
            }
            check_ipa(&line)?;
            if pinyin_to_ipa
                .insert(line.key.to_string(), line.value.to_string())
                .is_some()
            {
                return Err(duplicate(PINYIN_IPA_FILE, line.key));
            }
        }

        let mut arpabet_to_ipa = BTreeMap::new();
        for line in tsv_lines(ARPABET_IPA_FILE, self.arpabet_ipa, &mut language_tags)? {
            if !line.key.chars().all(|c| c.is_ascii_uppercase()) {
                return Err(line.malformed("phone must be uppercase letters without stress"));
            }
            check_ipa(&line)?;
            if arpabet_to_ipa
                .insert(line.key.to_string(), line.value.to_string())
                .is_some()
            {
                return Err(duplicate(ARPABET_IPA_FILE, line.key));
            }
        }

        let mut pos_table = BTreeMap::new();
        for line in tsv_lines(POS_FILE, self.pos, &mut language_tags)? {
            let tag = PosTag::parse(line.value)
                .ok_or_else(|| line.malformed(&format!("unknown POS tag {:?}", line.value)))?;
            if pos_table.insert(line.key.to_string(), tag).is_some() {
                return Err(duplicate(POS_FILE, line.key));
            }
        }

        Ok(LexiconBundle {
            mandarin_char_pron,
            mandarin_word_pron,
            english_pron,
            pinyin_to_ipa,
            arpabet_to_ipa,
            pos_table,
            language_tags,
            max_word_chars,
        })
    }
}

/// Loads and validates the six resource files in `dir`.
pub fn load_resources(dir: impl AsRef<Path>) -> Result<LexiconBundle, ResourceError> {
    let dir = dir.as_ref();
    let mut texts: Vec<String> = Vec::with_capacity(RESOURCE_FILES.len());
    for name in RESOURCE_FILES {
        let path = dir.join(name);
        match fs::read_to_string(&path) {
            Ok(t) => texts.push(t),
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return Err(ResourceError::MissingResource(name.to_string()))
            }
            Err(source) => return Err(ResourceError::Io { path, source }),
        }
    }
    let bundle = ResourceTexts {
        mandarin_char: &texts[0],
        mandarin_word: &texts[1],
        english: &texts[2],
        pinyin_ipa: &texts[3],
        arpabet_ipa: &texts[4],
        pos: &texts[5],
    }
    .parse()?;
    if let Some(finding) = validate_bundle(&bundle).into_iter().next() {
        return Err(ResourceError::DanglingReference(finding.key().to_string()));
    }
    Ok(bundle)
}

/// Checks the cross-table invariants. Empty iff the bundle is consistent;
/// one finding per offending key, sorted.
pub fn validate_bundle(bundle: &LexiconBundle) -> Vec<Finding> {
    let mut pinyin: BTreeMap<String, String> = BTreeMap::new();
    let mut note_pinyin = |reading: &str, used_by: String| {
        if let Ok((base, _)) = tone_of(reading) {
            if !bundle.pinyin_to_ipa.contains_key(&base) {
                pinyin.entry(base).or_insert(used_by);
            }
        }
    };
    for (ch, readings) in &bundle.mandarin_char_pron {
        for r in readings {
            note_pinyin(r, ch.to_string());
        }
    }
    for (word, readings) in &bundle.mandarin_word_pron {
        for r in readings {
            note_pinyin(r, word.clone());
        }
    }

    let mut phones: BTreeMap<String, String> = BTreeMap::new();
    let mut findings = Vec::new();
    for (word, pron) in &bundle.english_pron {
        let mut has_nucleus = false;
        for p in pron {
            let (phone, stress) = split_stress(p);
            has_nucleus |= stress.is_some();
            if !bundle.arpabet_to_ipa.contains_key(phone) {
                phones
                    .entry(phone.to_string())
                    .or_insert_with(|| word.clone());
            }
        }
        if !has_nucleus {
            findings.push(Finding::NoNucleus { word: word.clone() });
        }
    }

    findings.extend(
        pinyin
            .into_iter()
            .map(|(syllable, used_by)| Finding::DanglingPinyin { syllable, used_by }),
    );
    findings.extend(
        phones
            .into_iter()
            .map(|(phone, used_by)| Finding::DanglingPhone { phone, used_by }),
    );
    findings.sort();
    findings
}

struct TsvLine<'a> {
    file: &'static str,
    number: usize,
    key: &'a str,
    value: &'a str,
}

impl TsvLine<'_> {
    fn malformed(&self, reason: &str) -> ResourceError {
        ResourceError::MalformedLine {
            file: self.file.to_string(),
            line: self.number,
            reason: reason.to_string(),
        }
    }
}

fn duplicate(file: &str, key: &str) -> ResourceError {
    ResourceError::DuplicateKey {
        file: file.to_string(),
        key: key.to_string(),
    }
}

fn is_comment(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

fn tsv_lines<'a>(
    file: &'static str,
    text: &'a str,
    language_tags: &mut BTreeSet<String>,
) -> Result<Vec<TsvLine<'a>>, ResourceError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        if is_comment(raw) {
            continue;
        }
        let number = i + 1;
        let fields: Vec<&str> = raw.trim_end_matches('\r').split('\t').collect();
        let malformed = |reason: &str| ResourceError::MalformedLine {
            file: file.to_string(),
            line: number,
            reason: reason.to_string(),
        };
        let (key, value) = match fields.as_slice() {
            [k, v] => (*k, *v),
            [k, v, lang] => {
                if lang.is_empty() || !lang.chars().all(|c| c.is_ascii_lowercase() || c == '-') {
                    return Err(malformed("language tag must be lowercase ASCII"));
                }
                language_tags.insert(lang.to_string());
                (*k, *v)
            }
            _ => return Err(malformed("expected 2 or 3 tab-separated fields")),
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(malformed("empty field"));
        }
        out.push(TsvLine {
            file,
            number,
            key,
            value,
        });
    }
    Ok(out)
}

fn check_ipa(line: &TsvLine<'_>) -> Result<(), ResourceError> {
    if line
        .value
        .chars()
        .any(|c| c.is_ascii_digit() || c.is_whitespace())
    {
        return Err(line.malformed("IPA value must not contain digits or whitespace"));
    }
    Ok(())
}

fn parse_cmu(text: &str) -> Result<BTreeMap<String, Vec<String>>, ResourceError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with(";;;") || line.starts_with('#') {
            continue;
        }
        let malformed = |reason: &str| ResourceError::MalformedLine {
            file: ENGLISH_DICT_FILE.to_string(),
            line: i + 1,
            reason: reason.to_string(),
        };
        let mut parts = line.split_whitespace();
        let word = parts.next().unwrap_or_default().to_lowercase();
        let phones: Vec<String> = parts.map(str::to_string).collect();
        if phones.is_empty() {
            return Err(malformed("no phones"));
        }
        for p in &phones {
            let (phone, _) = split_stress(p);
            let digits = p.len() - phone.len();
            if phone.is_empty() || !phone.chars().all(|c| c.is_ascii_uppercase()) || digits > 1 {
                return Err(malformed(&format!("bad phone {p:?}")));
            }
        }
        if out.contains_key(&word) {
            return Err(duplicate(ENGLISH_DICT_FILE, &word));
        }
        out.insert(word, phones);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> ResourceTexts<'static> {
        ResourceTexts {
            mandarin_char: "# comment\n欢\thuan1\n声\tsheng1\n",
            mandarin_word: "欢声\thuan1 sheng1\n",
            english: ";;; header\nHELLO  HH AH0 L OW1\n",
            pinyin_ipa: "huan\txwan\nsheng\tʂɤŋ\n",
            arpabet_ipa: "HH\th\nAH\tə\nL\tl\nOW\toʊ\n",
            pos: "欢声\tv\nhello\tx\n",
        }
    }

    #[test]
    fn parses_consistent_fixture() {
        let bundle = fixture().parse().unwrap();
        assert_eq!(bundle.table_sizes(), [2, 1, 1, 2, 4, 2]);
        assert_eq!(bundle.char_reading('欢'), Some("huan1"));
        assert_eq!(bundle.english_phones("hello").unwrap().len(), 4);
        assert_eq!(bundle.max_word_chars(), 2);
        assert!(validate_bundle(&bundle).is_empty());
    }

    #[test]
    fn dangling_pinyin_is_reported() {
        let bundle = ResourceTexts {
            mandarin_char: "欢\thuan1\n",
            mandarin_word: "",
            pinyin_ipa: "sheng\tʂɤŋ\n",
            ..fixture()
        }
        .parse()
        .unwrap();
        let findings = validate_bundle(&bundle);
        assert_eq!(
            findings,
            vec![Finding::DanglingPinyin {
                syllable: "huan".into(),
                used_by: "欢".into()
            }]
        );
    }

    #[test]
    fn one_unmapped_phone_is_one_finding() {
        let texts = ResourceTexts {
            english: "HELLO  HH AH0 L OW1\nLOW  L OW1\n",
            arpabet_ipa: "HH\th\nAH\tə\nL\tl\n",
            ..fixture()
        };
        let findings = validate_bundle(&texts.parse().unwrap());
        assert_eq!(findings.len(), 1);
        assert_eq!(findings[0].key(), "OW");
    }

    #[test]
    fn duplicate_pos_key_fails_before_validation() {
        let texts = ResourceTexts {
            pos: "欢声\tv\n欢声\tn\n",
            ..fixture()
        };
        match texts.parse() {
            Err(ResourceError::DuplicateKey { file, key }) => {
                assert_eq!(file, POS_FILE);
                assert_eq!(key, "欢声");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_lines_carry_line_numbers() {
        let texts = ResourceTexts {
            mandarin_char: "欢\thuan1\n\n声\tsheng9\n",
            ..fixture()
        };
        match texts.parse() {
            Err(ResourceError::MalformedLine { file, line, .. }) => {
                assert_eq!(file, MANDARIN_CHAR_FILE);
                assert_eq!(line, 3);
            }
            other => panic!("{other:?}"),
        }
        let texts = ResourceTexts {
            mandarin_word: "欢声\thuan1\n",
            ..fixture()
        };
        assert!(matches!(
            texts.parse(),
            Err(ResourceError::MalformedLine { line: 1, .. })
        ));
        let texts = ResourceTexts {
            pos: "欢声\tzz\n",
            ..fixture()
        };
        assert!(matches!(
            texts.parse(),
            Err(ResourceError::MalformedLine { .. })
        ));
    }

    #[test]
    fn language_tag_column_is_accepted() {
        let texts = ResourceTexts {
            pinyin_ipa: "huan\txwan\tcmn\nsheng\tʂɤŋ\tcmn\n",
            ..fixture()
        };
        let bundle = texts.parse().unwrap();
        assert!(bundle.language_tags().contains("cmn"));
    }

    #[test]
    fn line_order_does_not_change_the_bundle() {
        let a = fixture().parse().unwrap();
        let b = ResourceTexts {
            mandarin_char: "声\tsheng1\n欢\thuan1\n",
            arpabet_ipa: "OW\toʊ\nL\tl\nAH\tə\nHH\th\n",
            ..fixture()
        }
        .parse()
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_canonical_bytes(), b.to_canonical_bytes());
    }
}
