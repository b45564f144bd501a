//! Seeded lookup tables that turn a frame matrix into dense encoder input.
//!
//! Each layer gets a `(vocab, dim)` table of values in `[-0.1, 0.1]` drawn
//! from ChaCha8 seeded with SHA-256 of the seed and the layer name, so a
//! table does not depend on which other layers are active.

use ndarray::{Array2, ArrayView1};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::encoder::FrameMatrix;
use crate::schema::{Column, SymbolTables};

pub const INIT_RANGE: f32 = 0.1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmbeddingError {
    #[error("layer {0} has dimension 0")]
    DimensionZero(&'static str),
    #[error("no symbol table for layer {0}")]
    MissingTable(&'static str),
    #[error("index {index} out of range for layer {layer} of size {size}")]
    IndexOutOfRange {
        layer: &'static str,
        index: u16,
        size: usize,
    },
}

/// Embedding width per layer. `tone_desc` applies to each of the three
/// channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerDims {
    pub segmental: usize,
    pub tone: usize,
    pub tone_desc: usize,
    pub boundary: usize,
    pub word_len: usize,
    pub pos: usize,
    pub char_pos_in_word: usize,
    pub char_pos_in_sentence: usize,
    pub word_pos_in_sentence: usize,
}

impl Default for LayerDims {
    fn default() -> Self {
        LayerDims {
            segmental: 256,
            tone: 16,
            tone_desc: 4,
            boundary: 8,
            word_len: 8,
            pos: 8,
            char_pos_in_word: 8,
            char_pos_in_sentence: 8,
            word_pos_in_sentence: 8,
        }
    }
}

impl LayerDims {
    pub fn dim(&self, column: Column) -> usize {
        match column {
            Column::Segmental(_) => self.segmental,
            Column::Tone => self.tone,
            Column::ToneDesc(_) => self.tone_desc,
            Column::Boundary => self.boundary,
            Column::WordLen => self.word_len,
            Column::Pos => self.pos,
            Column::CharPosInWord => self.char_pos_in_word,
            Column::CharPosInSentence => self.char_pos_in_sentence,
            Column::WordPosInSentence => self.word_pos_in_sentence,
        }
    }

    /// Output width for a set of active columns.
    pub fn width(&self, columns: &[Column]) -> usize {
        columns.iter().map(|&c| self.dim(c)).sum()
    }
}

/// One generated table per active layer.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTables {
    layers: Vec<(Column, Array2<f32>)>,
}

fn layer_rng(seed: u64, layer: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(layer.as_bytes());
    let digest: [u8; 32] = h.finalize().into();
    ChaCha8Rng::from_seed(digest)
}

impl EmbeddingTables {
    pub fn new(
        tables: &SymbolTables,
        dims: &LayerDims,
        seed: u64,
    ) -> Result<EmbeddingTables, EmbeddingError> {
        let layers = tables
            .iter()
            .map(|(column, table)| {
                let dim = dims.dim(column);
                if dim == 0 {
                    return Err(EmbeddingError::DimensionZero(column.name()));
                }
                let mut rng = layer_rng(seed, column.name());
                let values = Array2::from_shape_simple_fn((table.len(), dim), || {
                    rng.gen_range(-INIT_RANGE..=INIT_RANGE)
                });
                Ok((column, values))
            })
            .collect::<Result<_, _>>()?;
        Ok(EmbeddingTables { layers })
    }

    pub fn layer(&self, column: Column) -> Option<&Array2<f32>> {
        self.layers
            .iter()
            .find(|(c, _)| *c == column)
            .map(|(_, t)| t)
    }

    /// Concatenates each frame's per-layer rows in manifest order.
    pub fn assemble(&self, matrix: &FrameMatrix) -> Result<Array2<f32>, EmbeddingError> {
        let columns = matrix.columns();
        let layers = columns
            .iter()
            .map(|&c| {
                self.layer(c)
                    .map(|t| (c, t))
                    .ok_or(EmbeddingError::MissingTable(c.name()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let width = layers.iter().map(|(_, t)| t.ncols()).sum();
        let mut out = Array2::zeros((matrix.len(), width));
        for (mut row, frame) in out.rows_mut().into_iter().zip(&matrix.frames) {
            let mut at = 0;
            for (column, table) in &layers {
                let index = frame.get(*column);
                if index as usize >= table.nrows() {
                    return Err(EmbeddingError::IndexOutOfRange {
                        layer: column.name(),
                        index,
                        size: table.nrows(),
                    });
                }
                let src: ArrayView1<f32> = table.row(index as usize);
                row.slice_mut(ndarray::s![at..at + src.len()]).assign(&src);
                at += src.len();
            }
        }
        Ok(out)
    }
}

/// One-shot table generation and assembly.
pub fn assemble_embeddings(
    matrix: &FrameMatrix,
    tables: &SymbolTables,
    dims: &LayerDims,
    seed: u64,
) -> Result<Array2<f32>, EmbeddingError> {
    EmbeddingTables::new(tables, dims, seed)?.assemble(matrix)
}
