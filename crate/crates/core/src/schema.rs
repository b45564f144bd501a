//! Embedding layer definitions: system presets, symbol inventories, IPA
//! splitting and tone-description contours.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;
use unicode_segmentation::UnicodeSegmentation;

use crate::enhancement::{
    BoundaryKind, CHAR_POS_IN_SENTENCE_MAX, CHAR_POS_IN_WORD_MAX, WORD_LEN_MAX,
    WORD_POS_IN_SENTENCE_MAX,
};
use crate::g2p::{english_syllable_groups, tone_of, Language};
use crate::resources::LexiconBundle;
use crate::segmentation::PosTag;

pub const PAD: &str = "<pad>";
pub const UNK: &str = "<unk>";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("empty IPA string")]
    EmptyInput,
    #[error("tone {0} outside 1..=5")]
    InvalidTone(u8),
    #[error("symbol {symbol:?} not in the {layer} vocabulary")]
    UnknownSymbol { layer: String, symbol: String },
    #[error("{layer} vocabulary has {size} symbols, more than a u16 index can address")]
    VocabularyOverflow { layer: String, size: usize },
    #[error("unknown system configuration {0:?}")]
    UnknownConfig(String),
    #[error("malformed symbol manifest line {0}")]
    MalformedManifest(usize),
}

/// What the segmental (phoneme or IPA) layer carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SegmentalMode {
    /// One symbol per syllable, toneless phonemes plus a tone tag (PE).
    PhonemeTonal,
    /// One symbol per syllable, toneless phonemes (PTE).
    Phoneme,
    /// One symbol per syllable, unsplit IPA plus a tone tag (IE).
    IpaTonal,
    /// One symbol per IPA grapheme cluster (ITE family).
    IpaSplit,
}

impl SegmentalMode {
    pub const ALL: [SegmentalMode; 4] = [
        SegmentalMode::PhonemeTonal,
        SegmentalMode::Phoneme,
        SegmentalMode::IpaTonal,
        SegmentalMode::IpaSplit,
    ];

    pub fn column_name(self) -> &'static str {
        match self {
            SegmentalMode::PhonemeTonal => "phoneme_tonal",
            SegmentalMode::Phoneme => "phoneme",
            SegmentalMode::IpaTonal => "ipa_tonal",
            SegmentalMode::IpaSplit => "ipa",
        }
    }

    pub fn is_phoneme(self) -> bool {
        matches!(self, SegmentalMode::PhonemeTonal | SegmentalMode::Phoneme)
    }
}

/// One column of a frame matrix, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Column {
    Segmental(SegmentalMode),
    Tone,
    ToneDesc(u8),
    Boundary,
    WordLen,
    Pos,
    CharPosInWord,
    CharPosInSentence,
    WordPosInSentence,
}

impl Column {
    pub fn name(self) -> &'static str {
        match self {
            Column::Segmental(mode) => mode.column_name(),
            Column::Tone => "tone",
            Column::ToneDesc(0) => "tone_desc_1",
            Column::ToneDesc(1) => "tone_desc_2",
            Column::ToneDesc(_) => "tone_desc_3",
            Column::Boundary => "boundary",
            Column::WordLen => "word_len",
            Column::Pos => "pos",
            Column::CharPosInWord => "char_pos_in_word",
            Column::CharPosInSentence => "char_pos_in_sentence",
            Column::WordPosInSentence => "word_pos_in_sentence",
        }
    }

    pub fn parse(name: &str) -> Option<Column> {
        SegmentalMode::ALL
            .into_iter()
            .map(Column::Segmental)
            .chain([
                Column::Tone,
                Column::ToneDesc(0),
                Column::ToneDesc(1),
                Column::ToneDesc(2),
                Column::Boundary,
                Column::WordLen,
                Column::Pos,
                Column::CharPosInWord,
                Column::CharPosInSentence,
                Column::WordPosInSentence,
            ])
            .find(|c| c.name() == name)
    }

    /// Symbols of the fixed (non-segmental) layers, in index order.
    fn fixed_vocabulary(self) -> Option<Vec<String>> {
        let numeric = |max: u16| (0..=max).map(|i| i.to_string()).collect();
        Some(match self {
            Column::Segmental(_) => return None,
            Column::Tone => numeric(8),
            Column::ToneDesc(_) => numeric(5),
            Column::Boundary => ["none", "PW", "PPH", "IPH"].map(String::from).to_vec(),
            Column::Pos => PosTag::ALL.iter().map(|t| t.as_str().to_string()).collect(),
            Column::WordLen => numeric(WORD_LEN_MAX),
            Column::CharPosInWord => numeric(CHAR_POS_IN_WORD_MAX),
            Column::CharPosInSentence => numeric(CHAR_POS_IN_SENTENCE_MAX),
            Column::WordPosInSentence => numeric(WORD_POS_IN_SENTENCE_MAX),
        })
    }
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A system preset: which embedding layers and context features are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SystemConfig {
    pub name: &'static str,
    pub segmental: SegmentalMode,
    pub tone_layer: bool,
    pub tone_desc_layer: bool,
    pub boundary: bool,
    pub word_context: bool,
    pub sentence_context: bool,
}

const fn preset(
    name: &'static str,
    segmental: SegmentalMode,
    [tone_layer, tone_desc_layer, boundary, word_context, sentence_context]: [bool; 5],
) -> SystemConfig {
    SystemConfig {
        name,
        segmental,
        tone_layer,
        tone_desc_layer,
        boundary,
        word_context,
        sentence_context,
    }
}

impl SystemConfig {
    pub const PE: SystemConfig = preset("PE", SegmentalMode::PhonemeTonal, [false; 5]);
    pub const IE: SystemConfig = preset("IE", SegmentalMode::IpaTonal, [false; 5]);
    pub const PTE: SystemConfig = preset(
        "PTE",
        SegmentalMode::Phoneme,
        [true, true, false, false, false],
    );
    pub const ITE: SystemConfig = preset(
        "ITE",
        SegmentalMode::IpaSplit,
        [true, false, false, false, false],
    );
    pub const ITE_B: SystemConfig = preset(
        "ITE-B",
        SegmentalMode::IpaSplit,
        [true, false, true, false, false],
    );
    pub const ITE_BW: SystemConfig = preset(
        "ITE-BW",
        SegmentalMode::IpaSplit,
        [true, false, true, true, false],
    );
    pub const ITE_BS: SystemConfig = preset(
        "ITE-BS",
        SegmentalMode::IpaSplit,
        [true, false, true, false, true],
    );
    pub const ITE_BWS: SystemConfig = preset(
        "ITE-BWS",
        SegmentalMode::IpaSplit,
        [true, false, true, true, true],
    );

    pub const PRESETS: [SystemConfig; 8] = [
        Self::PE,
        Self::IE,
        Self::PTE,
        Self::ITE,
        Self::ITE_B,
        Self::ITE_BW,
        Self::ITE_BS,
        Self::ITE_BWS,
    ];

    /// Every layer and feature on, for one segmental mode. Any preset with
    /// the same segmental mode can be cut out of it with
    /// [`apply_config`](crate::encoder::apply_config).
    pub const fn superset(segmental: SegmentalMode) -> SystemConfig {
        let name = match segmental {
            SegmentalMode::PhonemeTonal => "ALL-phoneme_tonal",
            SegmentalMode::Phoneme => "ALL-phoneme",
            SegmentalMode::IpaTonal => "ALL-ipa_tonal",
            SegmentalMode::IpaSplit => "ALL-ipa",
        };
        preset(name, segmental, [true; 5])
    }

    pub fn phoneme_layer(&self) -> bool {
        self.segmental.is_phoneme()
    }

    pub fn ipa_layer(&self) -> bool {
        !self.segmental.is_phoneme()
    }

    /// Active columns in canonical order.
    pub fn columns(&self) -> Vec<Column> {
        let mut cols = vec![Column::Segmental(self.segmental)];
        if self.tone_layer {
            cols.push(Column::Tone);
        }
        if self.tone_desc_layer {
            cols.extend([
                Column::ToneDesc(0),
                Column::ToneDesc(1),
                Column::ToneDesc(2),
            ]);
        }
        if self.boundary {
            cols.push(Column::Boundary);
        }
        if self.word_context {
            cols.extend([Column::WordLen, Column::Pos, Column::CharPosInWord]);
        }
        if self.sentence_context {
            cols.extend([Column::CharPosInSentence, Column::WordPosInSentence]);
        }
        cols
    }

    /// Presets and supersets, by name.
    pub fn by_name(name: &str) -> Option<SystemConfig> {
        Self::PRESETS
            .into_iter()
            .chain(SegmentalMode::ALL.map(Self::superset))
            .find(|c| c.name == name)
    }

    /// The preset or superset whose manifest is exactly `columns`.
    pub fn from_columns(columns: &[Column]) -> Option<SystemConfig> {
        Self::PRESETS
            .into_iter()
            .chain(SegmentalMode::ALL.map(Self::superset))
            .find(|c| c.columns() == columns)
    }
}

impl FromStr for SystemConfig {
    type Err = SchemaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::by_name(s).ok_or_else(|| SchemaError::UnknownConfig(s.to_string()))
    }
}

impl fmt::Display for SystemConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strictness {
    /// Unlisted symbols are an error.
    Strict,
    /// Unlisted segmental symbols map to `<unk>`.
    #[default]
    Lenient,
}

/// Ordered vocabulary for one layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolTable {
    layer: String,
    symbols: Vec<String>,
    index: HashMap<String, u16>,
}

impl SymbolTable {
    /// `<pad>`, `<unk>`, then the boundary symbols and `symbols`, sorted by
    /// codepoint.
    pub fn segmental(
        layer: &str,
        symbols: impl IntoIterator<Item = String>,
    ) -> Result<SymbolTable, SchemaError> {
        let mut rest: BTreeSet<String> = symbols.into_iter().collect();
        rest.extend(BoundaryKind::ALL.map(|k| k.symbol().to_string()));
        rest.remove(PAD);
        rest.remove(UNK);
        let all = [PAD.to_string(), UNK.to_string()]
            .into_iter()
            .chain(rest)
            .collect();
        Self::from_ordered(layer, all)
    }

    pub fn from_ordered(layer: &str, symbols: Vec<String>) -> Result<SymbolTable, SchemaError> {
        if symbols.len() > u16::MAX as usize + 1 {
            return Err(SchemaError::VocabularyOverflow {
                layer: layer.to_string(),
                size: symbols.len(),
            });
        }
        let index = symbols
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as u16))
            .collect();
        Ok(SymbolTable {
            layer: layer.to_string(),
            symbols,
            index,
        })
    }

    pub fn layer(&self) -> &str {
        &self.layer
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn contains(&self, symbol: &str) -> bool {
        self.index.contains_key(symbol)
    }

    pub fn encode(&self, symbol: &str, strictness: Strictness) -> Result<u16, SchemaError> {
        match (self.index.get(symbol), strictness) {
            (Some(&i), _) => Ok(i),
            (None, Strictness::Lenient) if self.index.contains_key(UNK) => Ok(self.index[UNK]),
            _ => Err(SchemaError::UnknownSymbol {
                layer: self.layer.clone(),
                symbol: symbol.to_string(),
            }),
        }
    }

    pub fn decode(&self, index: u16) -> Option<&str> {
        self.symbols.get(index as usize).map(String::as_str)
    }
}

pub fn encode_symbol(
    table: &SymbolTable,
    symbol: &str,
    strictness: Strictness,
) -> Result<u16, SchemaError> {
    table.encode(symbol, strictness)
}

/// The tables for one configuration, in manifest order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolTables {
    tables: Vec<(Column, SymbolTable)>,
}

impl SymbolTables {
    pub fn get(&self, column: Column) -> Option<&SymbolTable> {
        self.tables
            .iter()
            .find(|(c, _)| *c == column)
            .map(|(_, t)| t)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Column, &SymbolTable)> {
        self.tables.iter().map(|(c, t)| (*c, t))
    }

    /// `layer\tindex\tsymbol` rows.
    pub fn to_manifest(&self) -> String {
        let mut out = String::new();
        for (column, table) in &self.tables {
            for (i, s) in table.symbols.iter().enumerate() {
                out.push_str(&format!("{}\t{i}\t{s}\n", column.name()));
            }
        }
        out
    }

    pub fn from_manifest(text: &str) -> Result<SymbolTables, SchemaError> {
        let mut tables: Vec<(Column, Vec<String>)> = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let bad = || SchemaError::MalformedManifest(n + 1);
            let mut fields = line.splitn(3, '\t');
            let (Some(layer), Some(index), Some(symbol)) =
                (fields.next(), fields.next(), fields.next())
            else {
                return Err(bad());
            };
            let column = Column::parse(layer).ok_or_else(bad)?;
            let index: usize = index.parse().map_err(|_| bad())?;
            if tables.last().map(|(c, _)| *c) != Some(column) {
                tables.push((column, Vec::new()));
            }
            let symbols = &mut tables.last_mut().expect("pushed above").1;
            if index != symbols.len() {
                return Err(bad());
            }
            symbols.push(symbol.to_string());
        }
        let tables = tables
            .into_iter()
            .map(|(c, s)| SymbolTable::from_ordered(c.name(), s).map(|t| (c, t)))
            .collect::<Result<_, _>>()?;
        Ok(SymbolTables { tables })
    }
}

/// Splits IPA into extended grapheme clusters: combining diacritics stay on
/// their base, spacing modifiers such as `ʰ` stand alone.
pub fn split_ipa(ipa: &str) -> Result<Vec<&str>, SchemaError> {
    if ipa.is_empty() {
        return Err(SchemaError::EmptyInput);
    }
    Ok(ipa.graphemes(true).collect())
}

/// Three pitch levels (1..=5) describing a tone; `(0, 0, 0)` means none.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ToneDescription {
    pub contour: [u8; 3],
}

impl ToneDescription {
    pub const NONE: ToneDescription = ToneDescription { contour: [0; 3] };
}

/// Chao tone letters of the four full Mandarin tones.
fn chao_letters(tone: u8) -> Option<&'static [u8]> {
    match tone {
        1 => Some(&[5, 5]),
        2 => Some(&[3, 5]),
        3 => Some(&[2, 1, 4]),
        4 => Some(&[5, 1]),
        _ => None,
    }
}

/// Linear interpolation of a pitch contour onto `n` evenly spaced points.
pub fn resample_contour(levels: &[u8], n: usize) -> Vec<u8> {
    if levels.len() == 1 || n == 1 {
        return vec![levels[0]; n];
    }
    let span = (levels.len() - 1) as f64;
    (0..n)
        .map(|k| {
            let x = k as f64 * span / (n - 1) as f64;
            let lo = x.floor() as usize;
            let hi = (lo + 1).min(levels.len() - 1);
            let frac = x - lo as f64;
            let v = levels[lo] as f64 + frac * (levels[hi] as f64 - levels[lo] as f64);
            v.round() as u8
        })
        .collect()
}

pub fn tone_description(tone: u8) -> Result<ToneDescription, SchemaError> {
    match tone {
        5 => Ok(ToneDescription::NONE),
        t => {
            let letters = chao_letters(t).ok_or(SchemaError::InvalidTone(t))?;
            let v = resample_contour(letters, 3);
            Ok(ToneDescription {
                contour: [v[0], v[1], v[2]],
            })
        }
    }
}

/// Segmental symbols for one syllable under `mode`.
pub(crate) fn segmental_symbols(
    language: Language,
    base: &str,
    ipa: &str,
    tone_tag: &str,
    mode: SegmentalMode,
) -> Vec<String> {
    let _ = language;
    match mode {
        SegmentalMode::PhonemeTonal => vec![format!("{base}/{tone_tag}")],
        SegmentalMode::Phoneme => vec![base.to_string()],
        SegmentalMode::IpaTonal => vec![format!("{ipa}/{tone_tag}")],
        SegmentalMode::IpaSplit => ipa.graphemes(true).map(str::to_string).collect(),
    }
}

/// Every unsplit segmental symbol the lexicon can produce, by language.
pub fn lexicon_symbols(
    bundle: &LexiconBundle,
    mode: SegmentalMode,
) -> (BTreeSet<String>, BTreeSet<String>) {
    let mut mandarin = BTreeSet::new();
    let mut english = BTreeSet::new();
    if mode == SegmentalMode::IpaSplit {
        for (_, ipa) in bundle.pinyin_ipa_table() {
            mandarin.extend(ipa.graphemes(true).map(str::to_string));
        }
        for (_, ipa) in bundle.arpabet_ipa_table() {
            english.extend(ipa.graphemes(true).map(str::to_string));
        }
        return (mandarin, english);
    }

    let mut add_reading = |reading: &str| {
        if let Ok((base, tone)) = tone_of(reading) {
            if let Some(ipa) = bundle.pinyin_ipa(&base) {
                let tag = tone.to_string();
                mandarin.extend(segmental_symbols(
                    Language::Mandarin,
                    &base,
                    ipa,
                    &tag,
                    mode,
                ));
            }
        }
    };
    for (_, readings) in bundle.mandarin_chars() {
        readings.iter().for_each(|r| add_reading(r));
    }
    for (_, readings) in bundle.mandarin_words() {
        readings.iter().for_each(|r| add_reading(r));
    }
    for (_, phones) in bundle.english_words() {
        for (group, stress) in english_syllable_groups(phones) {
            let Some(ipa) = group
                .iter()
                .map(|p| bundle.arpabet_ipa(p))
                .collect::<Option<String>>()
            else {
                continue;
            };
            let tag = format!("E{}", stress.min(2));
            english.extend(segmental_symbols(
                Language::English,
                &group.join(" "),
                &ipa,
                &tag,
                mode,
            ));
        }
    }
    (mandarin, english)
}

pub fn build_segmental_table(
    bundle: &LexiconBundle,
    mode: SegmentalMode,
) -> Result<SymbolTable, SchemaError> {
    let (mandarin, english) = lexicon_symbols(bundle, mode);
    SymbolTable::segmental(mode.column_name(), mandarin.into_iter().chain(english))
}

pub fn fixed_table(column: Column) -> Option<SymbolTable> {
    let symbols = column.fixed_vocabulary()?;
    SymbolTable::from_ordered(column.name(), symbols).ok()
}

/// All tables for the active columns of `config`.
pub fn build_symbol_tables(
    bundle: &LexiconBundle,
    config: &SystemConfig,
) -> Result<SymbolTables, SchemaError> {
    let segmental = build_segmental_table(bundle, config.segmental)?;
    Ok(tables_with_segmental(config, segmental))
}

pub(crate) fn tables_with_segmental(config: &SystemConfig, segmental: SymbolTable) -> SymbolTables {
    let mut segmental = Some(segmental);
    let tables = config
        .columns()
        .into_iter()
        .map(|c| match c {
            Column::Segmental(_) => (c, segmental.take().expect("one segmental column")),
            _ => (c, fixed_table(c).expect("fixed layer")),
        })
        .collect();
    SymbolTables { tables }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_tone_is_three_four_five() {
        assert_eq!(tone_description(2).unwrap().contour, [3, 4, 5]);
    }

    #[test]
    fn chao_derived_contours() {
        // hand interpolation: 55 -> 5,5,5; 214 already 3 points; 51 -> 5,3,1
        assert_eq!(resample_contour(&[5, 5], 3), [5, 5, 5]);
        assert_eq!(resample_contour(&[3, 5], 3), [3, 4, 5]);
        assert_eq!(resample_contour(&[2, 1, 4], 3), [2, 1, 4]);
        assert_eq!(resample_contour(&[5, 1], 3), [5, 3, 1]);
        assert_eq!(tone_description(1).unwrap().contour, [5, 5, 5]);
        assert_eq!(tone_description(3).unwrap().contour, [2, 1, 4]);
        assert_eq!(tone_description(4).unwrap().contour, [5, 3, 1]);
        assert_eq!(tone_description(5).unwrap(), ToneDescription::NONE);
        assert_eq!(tone_description(0), Err(SchemaError::InvalidTone(0)));
        assert_eq!(tone_description(6), Err(SchemaError::InvalidTone(6)));
    }

    #[test]
    fn split_keeps_combining_marks_and_separates_aspiration() {
        assert_eq!(split_ipa("ɕ").unwrap(), ["ɕ"]);
        assert_eq!(split_ipa("tsʰwən").unwrap(), ["t", "s", "ʰ", "w", "ə", "n"]);
        assert_eq!(split_ipa("n̩a").unwrap(), ["n̩", "a"]);
        assert_eq!(split_ipa(""), Err(SchemaError::EmptyInput));
    }

    #[test]
    fn segmental_table_order() {
        let t = SymbolTable::segmental("ipa", ["b".to_string(), "a".into(), "ʰ".into()]).unwrap();
        assert_eq!(
            t.symbols(),
            ["<pad>", "<unk>", "#IPH", "#PPH", "#PW", "a", "b", "ʰ"]
        );
        assert_eq!(t.encode(PAD, Strictness::Strict), Ok(0));
        assert_eq!(t.encode("zz", Strictness::Lenient), Ok(1));
        assert!(matches!(
            t.encode("zz", Strictness::Strict),
            Err(SchemaError::UnknownSymbol { .. })
        ));
        for i in 0..t.len() as u16 {
            assert_eq!(t.encode(t.decode(i).unwrap(), Strictness::Strict), Ok(i));
        }
    }

    #[test]
    fn preset_columns_follow_the_flags() {
        let names = |c: SystemConfig| c.columns().iter().map(|c| c.name()).collect::<Vec<_>>();
        assert_eq!(names(SystemConfig::PE), ["phoneme_tonal"]);
        assert_eq!(names(SystemConfig::IE), ["ipa_tonal"]);
        assert_eq!(
            names(SystemConfig::PTE),
            [
                "phoneme",
                "tone",
                "tone_desc_1",
                "tone_desc_2",
                "tone_desc_3"
            ]
        );
        assert_eq!(names(SystemConfig::ITE), ["ipa", "tone"]);
        assert_eq!(names(SystemConfig::ITE_B), ["ipa", "tone", "boundary"]);
        for c in SystemConfig::PRESETS {
            assert!(c.phoneme_layer() ^ c.ipa_layer());
            assert_eq!(SystemConfig::from_columns(&c.columns()), Some(c));
            assert_eq!(c.name.parse::<SystemConfig>(), Ok(c));
        }
        assert!("BOGUS".parse::<SystemConfig>().is_err());
    }

    #[test]
    fn manifest_round_trip() {
        let seg = SymbolTable::segmental("ipa", ["a".to_string(), "HH AH/E0".into()]).unwrap();
        let tables = tables_with_segmental(&SystemConfig::ITE_BWS, seg);
        let text = tables.to_manifest();
        assert!(text.starts_with("ipa\t0\t<pad>\n"));
        assert_eq!(SymbolTables::from_manifest(&text).unwrap(), tables);
        assert_eq!(
            SymbolTables::from_manifest("ipa\t1\ta\n"),
            Err(SchemaError::MalformedManifest(1))
        );
    }
}
