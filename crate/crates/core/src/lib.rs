//! Linguistic front-end for code-switching Mandarin/English speech synthesis.
//!
//! Text goes through script segmentation, word segmentation and POS
//! tagging, grapheme-to-phoneme conversion, prosodic boundary prediction and
//! context feature extraction, and comes out as a per-frame matrix of symbol
//! indices. Eight preset system configurations select which embedding layers
//! (phoneme or IPA, tone, tone description) and which context features
//! (prosodic boundary, word level, sentence level) are emitted.
//!
//! ```no_run
//! use csfe::{load_resources, Encoder, EncoderOptions, SystemConfig};
//!
//! let bundle = load_resources("resources").unwrap();
//! let encoder = Encoder::new(&bundle, EncoderOptions::default());
//! let matrix = encoder.encode_utterance("欢声笑语洒满村庄", &SystemConfig::ITE_BWS).unwrap();
//! println!("{:?}", matrix.manifest());
//! ```

pub mod cli;
pub mod embedding;
pub mod encoder;
pub mod enhancement;
pub mod g2p;
pub mod resources;
pub mod schema;
pub mod segmentation;
pub mod serialize;

pub use embedding::{assemble_embeddings, EmbeddingError, EmbeddingTables, LayerDims};
pub use encoder::{
    apply_config, Analysis, EncodeError, EncodeErrorKind, Encoder, EncoderOptions, Frame,
    FrameMatrix, IncompatibleConfig,
};
pub use enhancement::{
    BoundaryAnnotation, BoundaryKind, BoundaryPredictor, ContextFeatures, RulePredictor,
};
pub use g2p::{Language, Syllable, ToneSandhi};
pub use resources::{load_resources, validate_bundle, Finding, LexiconBundle, ResourceError};
pub use schema::{
    Column, SegmentalMode, Strictness, SymbolTable, SymbolTables, SystemConfig, ToneDescription,
};
pub use segmentation::{PosTag, Script, Span, Token};
pub use serialize::{deserialize, deserialize_stream, serialize, DeserializeError, Format};
