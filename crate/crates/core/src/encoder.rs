//! The full pipeline: text in, per-frame index matrix out.

use std::fmt;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use thiserror::Error;

use crate::enhancement::{
    insert_boundary_frames, sentence_context, validate_annotations, word_context, BoundaryKind,
    BoundaryPredictor, EnhanceError, RulePredictor, DEFAULT_PPH_THRESHOLD,
};
use crate::g2p::{token_g2p, G2pError, Syllable, ToneSandhi};
use crate::resources::LexiconBundle;
use crate::schema::{
    build_segmental_table, segmental_symbols, tables_with_segmental, tone_description, Column,
    SchemaError, SegmentalMode, Strictness, SymbolTable, SymbolTables, SystemConfig,
};
use crate::segmentation::{
    segment_scripts, segment_words, tag_pos, Script, SegmentError, Span, Token,
};

/// One timestep: a segmental symbol and every feature-layer index.
/// Columns that the owning matrix does not carry are always 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Frame {
    pub segmental: u16,
    pub tone: u16,
    pub tone_desc: [u16; 3],
    pub boundary: u16,
    pub word_len: u16,
    pub pos: u16,
    pub char_pos_in_word: u16,
    pub char_pos_in_sentence: u16,
    pub word_pos_in_sentence: u16,
}

impl Frame {
    pub fn get(&self, column: Column) -> u16 {
        match column {
            Column::Segmental(_) => self.segmental,
            Column::Tone => self.tone,
            Column::ToneDesc(i) => self.tone_desc[i as usize],
            Column::Boundary => self.boundary,
            Column::WordLen => self.word_len,
            Column::Pos => self.pos,
            Column::CharPosInWord => self.char_pos_in_word,
            Column::CharPosInSentence => self.char_pos_in_sentence,
            Column::WordPosInSentence => self.word_pos_in_sentence,
        }
    }

    pub fn set(&mut self, column: Column, value: u16) {
        let slot = match column {
            Column::Segmental(_) => &mut self.segmental,
            Column::Tone => &mut self.tone,
            Column::ToneDesc(i) => &mut self.tone_desc[i as usize],
            Column::Boundary => &mut self.boundary,
            Column::WordLen => &mut self.word_len,
            Column::Pos => &mut self.pos,
            Column::CharPosInWord => &mut self.char_pos_in_word,
            Column::CharPosInSentence => &mut self.char_pos_in_sentence,
            Column::WordPosInSentence => &mut self.word_pos_in_sentence,
        };
        *slot = value;
    }

    fn masked(&self, columns: &[Column]) -> Frame {
        let mut out = Frame::default();
        for &c in columns {
            out.set(c, self.get(c));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameMatrix {
    pub config: SystemConfig,
    pub source: String,
    pub frames: Vec<Frame>,
}

impl FrameMatrix {
    /// Builds a matrix from rows in manifest order.
    pub fn from_rows(config: SystemConfig, source: String, rows: &[Vec<u16>]) -> FrameMatrix {
        let columns = config.columns();
        let frames = rows
            .iter()
            .map(|row| {
                let mut f = Frame::default();
                for (c, v) in columns.iter().zip(row) {
                    f.set(*c, *v);
                }
                f
            })
            .collect();
        FrameMatrix {
            config,
            source,
            frames,
        }
    }

    pub fn columns(&self) -> Vec<Column> {
        self.config.columns()
    }

    /// Active column names in order.
    pub fn manifest(&self) -> Vec<&'static str> {
        self.columns().into_iter().map(Column::name).collect()
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn rows(&self) -> Vec<Vec<u16>> {
        let columns = self.columns();
        self.frames
            .iter()
            .map(|f| columns.iter().map(|&c| f.get(c)).collect())
            .collect()
    }

    pub fn column(&self, column: Column) -> Vec<u16> {
        self.frames.iter().map(|f| f.get(column)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeErrorKind {
    #[error(transparent)]
    Segment(#[from] SegmentError),
    #[error(transparent)]
    G2p(#[from] G2pError),
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Enhance(#[from] EnhanceError),
}

/// A pipeline failure at a byte offset of the source text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("byte {offset}: {kind}")]
pub struct EncodeError {
    pub offset: usize,
    pub kind: EncodeErrorKind,
}

impl EncodeError {
    fn at(offset: usize, kind: impl Into<EncodeErrorKind>) -> EncodeError {
        EncodeError {
            offset,
            kind: kind.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("configuration {requested} needs column {column}, which {available} does not carry")]
pub struct IncompatibleConfig {
    pub requested: &'static str,
    pub available: &'static str,
    pub column: &'static str,
}

/// Everything upstream of symbol encoding for one line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Analysis<'t> {
    pub tokens: Vec<Token>,
    /// In token order; [`Syllable::token_index`] points into `tokens`.
    pub syllables: Vec<Syllable>,
    /// Punctuation spans, the evidence for boundary prediction.
    pub punct: Vec<Span<'t>>,
}

#[derive(Clone)]
pub struct EncoderOptions {
    /// Used by the default rule predictor.
    pub pph_threshold: usize,
    pub strictness: Strictness,
    pub sandhi: Option<Arc<dyn ToneSandhi>>,
    /// Replaces the rule predictor when set.
    pub predictor: Option<Arc<dyn BoundaryPredictor>>,
}

impl Default for EncoderOptions {
    fn default() -> Self {
        EncoderOptions {
            pph_threshold: DEFAULT_PPH_THRESHOLD,
            strictness: Strictness::Lenient,
            sandhi: None,
            predictor: None,
        }
    }
}

impl fmt::Debug for EncoderOptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EncoderOptions")
            .field("pph_threshold", &self.pph_threshold)
            .field("strictness", &self.strictness)
            .field("sandhi", &self.sandhi.is_some())
            .field("predictor", &self.predictor.is_some())
            .finish()
    }
}

/// Runs the pipeline against one bundle. Segmental tables are built lazily
/// per mode and shared across threads.
pub struct Encoder<'b> {
    bundle: &'b LexiconBundle,
    options: EncoderOptions,
    rule: RulePredictor,
    segmental: [OnceLock<Result<SymbolTable, SchemaError>>; 4],
}

fn mode_slot(mode: SegmentalMode) -> usize {
    match mode {
        SegmentalMode::PhonemeTonal => 0,
        SegmentalMode::Phoneme => 1,
        SegmentalMode::IpaTonal => 2,
        SegmentalMode::IpaSplit => 3,
    }
}

impl<'b> Encoder<'b> {
    pub fn new(bundle: &'b LexiconBundle, options: EncoderOptions) -> Encoder<'b> {
        Encoder {
            bundle,
            rule: RulePredictor {
                pph_threshold: options.pph_threshold,
            },
            options,
            segmental: Default::default(),
        }
    }

    pub fn bundle(&self) -> &'b LexiconBundle {
        self.bundle
    }

    pub fn segmental_table(&self, mode: SegmentalMode) -> Result<&SymbolTable, SchemaError> {
        self.segmental[mode_slot(mode)]
            .get_or_init(|| build_segmental_table(self.bundle, mode))
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn symbol_tables(&self, config: &SystemConfig) -> Result<SymbolTables, SchemaError> {
        let segmental = self.segmental_table(config.segmental)?.clone();
        Ok(tables_with_segmental(config, segmental))
    }

    /// Segmentation, POS tagging and G2P for one line.
    pub fn analyze<'t>(&self, text: &'t str) -> Result<Analysis<'t>, EncodeError> {
        let spans = segment_scripts(text).map_err(|e| {
            let SegmentError::UnsupportedCharacter { offset, .. } = e;
            EncodeError::at(offset, e)
        })?;
        let tokens = tag_pos(segment_words(&spans, self.bundle), self.bundle);
        let mut syllables = Vec::with_capacity(tokens.len() * 2);
        for token in &tokens {
            let units = token_g2p(token, self.bundle).map_err(|e| {
                let offset = match &e {
                    G2pError::UnknownCharacter(c) => {
                        token.offset + token.surface.find(*c).unwrap_or(0)
                    }
                    _ => token.offset,
                };
                EncodeError::at(offset, e)
            })?;
            syllables.extend(units);
        }
        if let Some(sandhi) = &self.options.sandhi {
            sandhi.apply(&tokens, &mut syllables);
        }
        let punct = spans
            .into_iter()
            .filter(|s| s.script == Script::Punct)
            .collect();
        Ok(Analysis {
            tokens,
            syllables,
            punct,
        })
    }

    pub fn encode_utterance(
        &self,
        text: &str,
        config: &SystemConfig,
    ) -> Result<FrameMatrix, EncodeError> {
        let table = self
            .segmental_table(config.segmental)
            .map_err(|e| EncodeError::at(0, e))?;
        let Analysis {
            tokens,
            syllables,
            punct,
        } = self.analyze(text)?;
        let strictness = self.options.strictness;

        let words = config
            .word_context
            .then(|| word_context(&tokens, &syllables));
        let sentences = config
            .sentence_context
            .then(|| sentence_context(&tokens, &syllables));

        // (token position, frame) pairs, one per segmental symbol
        let mut frames: Vec<(usize, Frame)> = Vec::with_capacity(syllables.len() * 4);
        for (i, syl) in syllables.iter().enumerate() {
            let offset = tokens[syl.token_index].offset;
            let mut frame = Frame::default();
            if config.tone_layer {
                frame.tone = syl.tone_class() as u16;
            }
            if config.tone_desc_layer && syl.language == crate::g2p::Language::Mandarin {
                let d = tone_description(syl.tone).map_err(|e| EncodeError::at(offset, e))?;
                frame.tone_desc = d.contour.map(u16::from);
            }
            if let Some(w) = &words {
                frame.word_len = w[i].word_len;
                frame.pos = w[i].pos_id;
                frame.char_pos_in_word = w[i].char_pos_in_word;
            }
            if let Some(s) = &sentences {
                frame.char_pos_in_sentence = s[i].char_pos_in_sentence;
                frame.word_pos_in_sentence = s[i].word_pos_in_sentence;
            }
            let symbols = segmental_symbols(
                syl.language,
                &syl.base,
                &syl.ipa,
                &syl.tone_tag(),
                config.segmental,
            );
            for symbol in symbols {
                frame.segmental = table
                    .encode(&symbol, strictness)
                    .map_err(|e| EncodeError::at(offset, e))?;
                frames.push((syl.token_index, frame));
            }
        }

        if config.boundary {
            let annotations = match &self.options.predictor {
                Some(p) => p.predict(&tokens, &punct),
                None => self.rule.predict(&tokens, &punct),
            };
            validate_annotations(&annotations, tokens.len()).map_err(|e| EncodeError::at(0, e))?;
            let boundary_index =
                |kind: BoundaryKind| table.encode(kind.symbol(), Strictness::Strict);
            let ids = BoundaryKind::ALL
                .map(|k| boundary_index(k).expect("segmental tables carry boundary symbols"));
            frames = insert_boundary_frames(
                frames,
                &annotations,
                |f| f.0,
                |prev, kind| {
                    let mut f = prev.1;
                    f.segmental = ids[kind.id() as usize - 1];
                    f.tone = 0;
                    f.tone_desc = [0; 3];
                    f.boundary = kind.id();
                    (prev.0, f)
                },
            )
            .map_err(|e| EncodeError::at(0, e))?;
        }

        Ok(FrameMatrix {
            config: *config,
            source: text.to_string(),
            frames: frames.into_iter().map(|(_, f)| f).collect(),
        })
    }

    /// Every layer and feature for one segmental mode; cut presets out of it
    /// with [`apply_config`].
    pub fn encode_full(&self, text: &str, mode: SegmentalMode) -> Result<FrameMatrix, EncodeError> {
        self.encode_utterance(text, &SystemConfig::superset(mode))
    }

    /// Encodes lines in parallel; results keep input order.
    pub fn encode_batch<S: AsRef<str> + Sync>(
        &self,
        lines: &[S],
        config: &SystemConfig,
    ) -> Vec<Result<FrameMatrix, EncodeError>> {
        lines
            .par_iter()
            .map(|l| self.encode_utterance(l.as_ref(), config))
            .collect()
    }
}

/// Reduces a matrix to `config`: drops columns it does not carry and, when
/// the boundary layer is off, the inserted boundary frames.
pub fn apply_config(
    full: &FrameMatrix,
    config: &SystemConfig,
) -> Result<FrameMatrix, IncompatibleConfig> {
    let available = full.columns();
    let wanted = config.columns();
    if let Some(missing) = wanted.iter().find(|c| !available.contains(c)) {
        return Err(IncompatibleConfig {
            requested: config.name,
            available: full.config.name,
            column: missing.name(),
        });
    }
    let keep_boundaries = config.boundary || !full.config.boundary;
    let frames = full
        .frames
        .iter()
        .filter(|f| keep_boundaries || f.boundary == 0)
        .map(|f| f.masked(&wanted))
        .collect();
    Ok(FrameMatrix {
        config: *config,
        source: full.source.clone(),
        frames,
    })
}
