//! Script segmentation, word segmentation and POS tagging.
//!
//! Mandarin runs are segmented by forward maximum matching against the word
//! lexicon; Latin runs are split on whitespace. Punctuation never becomes a
//! token but is kept as [`Span`]s for the boundary predictor.

use std::fmt;

use thiserror::Error;

use crate::resources::LexiconBundle;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SegmentError {
    #[error("unsupported character {ch:?} (U+{:04X}) at byte {offset}", *ch as u32)]
    UnsupportedCharacter { ch: char, offset: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Language {
    Mandarin,
    English,
}

impl Language {
    pub fn as_str(self) -> &'static str {
        match self {
            Language::Mandarin => "cmn",
            Language::English => "en",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Script {
    Mandarin,
    Latin,
    Punct,
}

/// How strongly a punctuation mark separates the tokens around it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PunctClass {
    Neutral,
    /// `，、；：,;:`
    Pause,
    /// `。！？.!?`
    Final,
}

/// Classifies the listed punctuation marks; `None` for anything else.
pub fn punct_class(ch: char) -> Option<PunctClass> {
    match ch {
        '。' | '！' | '？' | '．' | '.' | '!' | '?' => Some(PunctClass::Final),
        '，' | '、' | '；' | '：' | ',' | ';' | ':' => Some(PunctClass::Pause),
        '"' | '“' | '”' | '‘' | '’' | '(' | ')' | '（' | '）' | '《' | '》' | '〈' | '〉'
        | '【' | '】' | '[' | ']' | '「' | '」' | '『' | '』' | '-' | '—' | '…' | '·' | '～'
        | '~' | '/' => Some(PunctClass::Neutral),
        _ => None,
    }
}

/// CJK Unified Ideographs, including extensions A through H.
pub fn is_cjk_ideograph(ch: char) -> bool {
    matches!(ch as u32,
        0x4E00..=0x9FFF
        | 0x3400..=0x4DBF
        | 0x20000..=0x2A6DF
        | 0x2A700..=0x2EBEF
        | 0x30000..=0x323AF)
}

fn is_latin(ch: char) -> bool {
    ch.is_ascii_alphabetic() || ch == '\''
}

/// A single-script run of the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span<'a> {
    pub text: &'a str,
    pub script: Script,
    /// Byte offset of the first byte in the source text.
    pub start: usize,
    /// Byte offset one past the last byte.
    pub end: usize,
}

impl Span<'_> {
    /// Strongest punctuation class inside a `Punct` span.
    pub fn punct_strength(&self) -> Option<PunctClass> {
        if self.script != Script::Punct {
            return None;
        }
        self.text.chars().filter_map(punct_class).max()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PosTag {
    N,
    V,
    A,
    D,
    P,
    C,
    U,
    M,
    Q,
    R,
    X,
}

impl PosTag {
    pub const ALL: [PosTag; 11] = [
        PosTag::N,
        PosTag::V,
        PosTag::A,
        PosTag::D,
        PosTag::P,
        PosTag::C,
        PosTag::U,
        PosTag::M,
        PosTag::Q,
        PosTag::R,
        PosTag::X,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PosTag::N => "n",
            PosTag::V => "v",
            PosTag::A => "a",
            PosTag::D => "d",
            PosTag::P => "p",
            PosTag::C => "c",
            PosTag::U => "u",
            PosTag::M => "m",
            PosTag::Q => "q",
            PosTag::R => "r",
            PosTag::X => "x",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.as_str() == s)
    }

    /// Position in [`PosTag::ALL`].
    pub fn id(self) -> u16 {
        self as u16
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A word-level unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub language: Language,
    pub pos: PosTag,
    /// Ordinal within its sentence, from 0.
    pub word_index: usize,
    /// Ordinal of the sentence within the line; sentences end at `。！？.!?`.
    pub sentence_index: usize,
    /// Mandarin characters, or 1 for an English word.
    pub char_count: usize,
    /// Ordinal within the whole line, from 0. Boundary gaps are addressed by it.
    pub position: usize,
    /// Byte offset in the source text.
    pub offset: usize,
}

impl Token {
    pub fn end(&self) -> usize {
        self.offset + self.surface.len()
    }
}

/// Splits `text` into single-script spans.
///
/// Whitespace between ASCII words stays inside the Latin span; any other
/// whitespace falls between spans and is recoverable from the offsets.
pub fn segment_scripts(text: &str) -> Result<Vec<Span<'_>>, SegmentError> {
    #[derive(PartialEq, Clone, Copy)]
    enum Class {
        Script(Script),
        Space,
    }

    let mut classes = Vec::with_capacity(text.len());
    for (offset, ch) in text.char_indices() {
        let class = if is_cjk_ideograph(ch) {
            Class::Script(Script::Mandarin)
        } else if is_latin(ch) {
            Class::Script(Script::Latin)
        } else if punct_class(ch).is_some() {
            Class::Script(Script::Punct)
        } else if ch.is_whitespace() {
            Class::Space
        } else {
            return Err(SegmentError::UnsupportedCharacter { ch, offset });
        };
        classes.push((offset, ch.len_utf8(), class));
    }

    let mut spans: Vec<Span<'_>> = Vec::new();
    let mut i = 0;
    while i < classes.len() {
        let (start, _, class) = classes[i];
        let Class::Script(script) = class else {
            i += 1;
            continue;
        };
        let mut j = i + 1;
        loop {
            match classes.get(j) {
                Some(&(_, _, c)) if c == class => j += 1,
                Some(&(_, _, Class::Space)) if script == Script::Latin => {
                    // absorb the whitespace run only if Latin text follows it
                    let mut k = j;
                    while matches!(classes.get(k), Some(&(_, _, Class::Space))) {
                        k += 1;
                    }
                    if matches!(classes.get(k), Some(&(_, _, Class::Script(Script::Latin)))) {
                        j = k;
                    } else {
                        break;
                    }
                }
                _ => break,
            }
        }
        let (last, len, _) = classes[j - 1];
        let end = last + len;
        spans.push(Span {
            text: &text[start..end],
            script,
            start,
            end,
        });
        i = j;
    }
    Ok(spans)
}

/// Segments Mandarin spans by forward maximum matching and Latin spans by
/// whitespace. Tokens come back with POS `x`; see [`tag_pos`].
pub fn segment_words(spans: &[Span<'_>], bundle: &LexiconBundle) -> Vec<Token> {
    let mut tokens: Vec<Token> = Vec::new();
    let mut sentence_index = 0;
    let mut word_index = 0;
    for span in spans {
        let words: Vec<(&str, Language, usize, usize)> = match span.script {
            Script::Mandarin => forward_maximum_match(span.text, bundle)
                .into_iter()
                .map(|(start, end, n)| {
                    (
                        &span.text[start..end],
                        Language::Mandarin,
                        n,
                        span.start + start,
                    )
                })
                .collect(),
            Script::Latin => span
                .text
                .split_whitespace()
                .map(|w| {
                    let offset = span.start + (w.as_ptr() as usize - span.text.as_ptr() as usize);
                    (w, Language::English, 1, offset)
                })
                .collect(),
            Script::Punct => {
                let ends_sentence = span.punct_strength() == Some(PunctClass::Final);
                let sentence_open = tokens
                    .last()
                    .is_some_and(|t| t.sentence_index == sentence_index);
                if ends_sentence && sentence_open {
                    sentence_index += 1;
                    word_index = 0;
                }
                continue;
            }
        };
        for (surface, language, char_count, offset) in words {
            tokens.push(Token {
                surface: surface.to_string(),
                language,
                pos: PosTag::X,
                word_index,
                sentence_index,
                char_count,
                position: tokens.len(),
                offset,
            });
            word_index += 1;
        }
    }
    tokens
}

/// Byte ranges `(start, end, n_chars)` of the words in a Mandarin run.
fn forward_maximum_match(text: &str, bundle: &LexiconBundle) -> Vec<(usize, usize, usize)> {
    let mut bounds: Vec<usize> = text.char_indices().map(|(i, _)| i).collect();
    bounds.push(text.len());
    let n = bounds.len() - 1;
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let longest = bundle.max_word_chars().min(n - i);
        let len = (2..=longest)
            .rev()
            .find(|&len| bundle.is_lexicon_word(&text[bounds[i]..bounds[i + len]]))
            .unwrap_or(1);
        out.push((bounds[i], bounds[i + len], len));
        i += len;
    }
    out
}

/// Fills in POS tags from the bundle; unknown words get `x`.
pub fn tag_pos(tokens: Vec<Token>, bundle: &LexiconBundle) -> Vec<Token> {
    tokens
        .into_iter()
        .map(|mut t| {
            let tag = match t.language {
                Language::Mandarin => bundle.pos(&t.surface),
                Language::English => bundle.pos(&t.surface.to_lowercase()),
            };
            t.pos = tag.unwrap_or(PosTag::X);
            t
        })
        .collect()
}
