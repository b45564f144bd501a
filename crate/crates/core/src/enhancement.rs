//! Prosodic boundary prediction, boundary frame insertion and word/sentence
//! context features.

use thiserror::Error;

use crate::g2p::Syllable;
use crate::segmentation::{PunctClass, Span, Token};

pub const WORD_LEN_MAX: u16 = 8;
pub const CHAR_POS_IN_WORD_MAX: u16 = 7;
pub const CHAR_POS_IN_SENTENCE_MAX: u16 = 127;
pub const WORD_POS_IN_SENTENCE_MAX: u16 = 63;

pub const DEFAULT_PPH_THRESHOLD: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnhanceError {
    #[error("boundary annotation after token {position} but the line has {tokens} tokens")]
    AnnotationOutOfRange { position: usize, tokens: usize },
    #[error("two boundary annotations on the gap after token {0}")]
    DuplicateAnnotation(usize),
}

/// Prosodic word, prosodic phrase, intonational phrase; weakest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundaryKind {
    PW,
    PPH,
    IPH,
}

impl BoundaryKind {
    pub const ALL: [BoundaryKind; 3] = [BoundaryKind::PW, BoundaryKind::PPH, BoundaryKind::IPH];

    /// Index in the boundary layer; 0 is "no boundary".
    pub fn id(self) -> u16 {
        match self {
            BoundaryKind::PW => 1,
            BoundaryKind::PPH => 2,
            BoundaryKind::IPH => 3,
        }
    }

    /// Symbol inserted into the segmental sequence.
    pub fn symbol(self) -> &'static str {
        match self {
            BoundaryKind::PW => "#PW",
            BoundaryKind::PPH => "#PPH",
            BoundaryKind::IPH => "#IPH",
        }
    }
}

/// A boundary on the gap after the token whose [`Token::position`] is
/// `position`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoundaryAnnotation {
    pub position: usize,
    pub kind: BoundaryKind,
}

/// Anything that labels token gaps. Implementations must return at most one
/// annotation per gap, sorted by position, with an IPH closing every
/// sentence.
pub trait BoundaryPredictor: Send + Sync {
    fn predict(&self, tokens: &[Token], punct: &[Span<'_>]) -> Vec<BoundaryAnnotation>;
}

/// Punctuation and length rules.
///
/// Every token gap is at least a PW. Pause punctuation makes a PPH and
/// sentence-final punctuation (and the end of the line) an IPH. A PPH is
/// also placed once the characters accumulated since the last IPH or
/// length-triggered PPH reach `pph_threshold`; English words count as one.
/// Punctuation does not reset the accumulator, so adding a comma can only
/// upgrade a gap, never move a later one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RulePredictor {
    pub pph_threshold: usize,
}

impl Default for RulePredictor {
    fn default() -> Self {
        RulePredictor {
            pph_threshold: DEFAULT_PPH_THRESHOLD,
        }
    }
}

impl BoundaryPredictor for RulePredictor {
    fn predict(&self, tokens: &[Token], punct: &[Span<'_>]) -> Vec<BoundaryAnnotation> {
        let mut forced: Vec<Option<BoundaryKind>> = vec![None; tokens.len()];
        for span in punct {
            let kind = match span.punct_strength() {
                Some(PunctClass::Final) => BoundaryKind::IPH,
                Some(PunctClass::Pause) => BoundaryKind::PPH,
                _ => continue,
            };
            // the gap after the last token that ends before the mark
            let gap = tokens.partition_point(|t| t.end() <= span.start);
            if gap == 0 {
                continue;
            }
            let slot = &mut forced[gap - 1];
            *slot = (*slot).max(Some(kind));
        }

        let mut out = Vec::with_capacity(tokens.len());
        let mut accumulated = 0;
        for (i, token) in tokens.iter().enumerate() {
            accumulated += token.char_count;
            let by_length = accumulated >= self.pph_threshold;
            let mut kind = if by_length {
                BoundaryKind::PPH
            } else {
                BoundaryKind::PW
            };
            if let Some(f) = forced[i] {
                kind = kind.max(f);
            }
            if i + 1 == tokens.len() {
                kind = BoundaryKind::IPH;
            }
            if by_length || kind == BoundaryKind::IPH {
                accumulated = 0;
            }
            out.push(BoundaryAnnotation {
                position: token.position,
                kind,
            });
        }
        out
    }
}

/// Checks that annotations are sorted, unique per gap and refer to tokens.
pub fn validate_annotations(
    annotations: &[BoundaryAnnotation],
    n_tokens: usize,
) -> Result<(), EnhanceError> {
    let mut previous: Option<usize> = None;
    for a in annotations {
        if a.position >= n_tokens {
            return Err(EnhanceError::AnnotationOutOfRange {
                position: a.position,
                tokens: n_tokens,
            });
        }
        if previous.is_some_and(|p| p >= a.position) {
            return Err(EnhanceError::DuplicateAnnotation(a.position));
        }
        previous = Some(a.position);
    }
    Ok(())
}

/// Inserts one frame per annotation after the last frame of the annotated
/// token. `token_of` gives a frame's token position; frames must be grouped
/// by token in order. `boundary_frame` builds the inserted frame from the
/// frame before it.
pub fn insert_boundary_frames<F>(
    frames: Vec<F>,
    annotations: &[BoundaryAnnotation],
    token_of: impl Fn(&F) -> usize,
    boundary_frame: impl Fn(&F, BoundaryKind) -> F,
) -> Result<Vec<F>, EnhanceError> {
    let n_tokens = frames.last().map_or(0, |f| token_of(f) + 1);
    validate_annotations(annotations, n_tokens)?;
    let mut pending = annotations.iter().peekable();
    let mut out = Vec::with_capacity(frames.len() + annotations.len());
    let mut frames = frames.into_iter().peekable();
    while let Some(frame) = frames.next() {
        let token = token_of(&frame);
        let last_of_token = frames.peek().is_none_or(|next| token_of(next) != token);
        let inserted = match pending.peek().copied() {
            Some(a) if last_of_token && a.position == token => {
                pending.next();
                Some(boundary_frame(&frame, a.kind))
            }
            Some(a) if a.position < token => {
                // annotated token produced no frames
                return Err(EnhanceError::AnnotationOutOfRange {
                    position: a.position,
                    tokens: n_tokens,
                });
            }
            _ => None,
        };
        out.push(frame);
        out.extend(inserted);
    }
    match pending.next() {
        Some(a) => Err(EnhanceError::AnnotationOutOfRange {
            position: a.position,
            tokens: n_tokens,
        }),
        None => Ok(out),
    }
}

/// Context features of one pronounceable unit, already clipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ContextFeatures {
    pub word_len: u16,
    pub pos_id: u16,
    pub char_pos_in_word: u16,
    pub char_pos_in_sentence: u16,
    pub word_pos_in_sentence: u16,
}

fn clip(value: usize, max: u16) -> u16 {
    value.min(max as usize) as u16
}

/// Word fields: the owning token's syllable count and POS, and the unit's
/// index inside the token. Sentence fields are left at 0.
///
/// `tokens[i].position` must equal `i`.
pub fn word_context(tokens: &[Token], units: &[Syllable]) -> Vec<ContextFeatures> {
    let mut lengths = vec![0usize; tokens.len()];
    for u in units {
        lengths[u.token_index] += 1;
    }
    units
        .iter()
        .map(|u| ContextFeatures {
            word_len: clip(lengths[u.token_index], WORD_LEN_MAX).max(1),
            pos_id: tokens[u.token_index].pos.id(),
            char_pos_in_word: clip(u.unit_index_in_word, CHAR_POS_IN_WORD_MAX),
            ..ContextFeatures::default()
        })
        .collect()
}

/// Sentence fields: units counted from the start of the sentence, and the
/// owning token's word index. Word fields are left at 0.
pub fn sentence_context(tokens: &[Token], units: &[Syllable]) -> Vec<ContextFeatures> {
    let mut sentence = usize::MAX;
    let mut counter = 0;
    units
        .iter()
        .map(|u| {
            let token = &tokens[u.token_index];
            if token.sentence_index != sentence {
                sentence = token.sentence_index;
                counter = 0;
            }
            let features = ContextFeatures {
                char_pos_in_sentence: clip(counter, CHAR_POS_IN_SENTENCE_MAX),
                word_pos_in_sentence: clip(token.word_index, WORD_POS_IN_SENTENCE_MAX),
                ..ContextFeatures::default()
            };
            counter += 1;
            features
        })
        .collect()
}
