//! Shared discrete token vocabulary and the value/action/proprioception
//! codecs over it.
//!
//! Token ids live in four disjoint, contiguous ranges, in this order:
//! reserved markers, value bins, instruction words, observation palette.
//! Continuous values are quantized into uniform bins over fixed per-dimension
//! ranges; de-tokenization returns bin centers. Out-of-range inputs clamp,
//! they never error — only non-finite inputs are rejected.

use serde::{Deserialize, Serialize};

use crate::action::{ActionVector, ProprioState};

/// Uniform binning of one continuous dimension over [lo, hi].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    lo: f64,
    hi: f64,
    n_bins: usize,
}

impl BinSpec {
    pub fn new(lo: f64, hi: f64, n_bins: usize) -> Result<Self, CodecError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(CodecError::BadBinSpec {
                detail: format!("need finite lo < hi, got [{lo}, {hi}]"),
            });
        }
        if n_bins < 2 {
            return Err(CodecError::BadBinSpec {
                detail: format!("need n_bins >= 2, got {n_bins}"),
            });
        }
        let width = (hi - lo) / n_bins as f64;
        if !(width.is_finite() && width > 0.0) {
            return Err(CodecError::BadBinSpec {
                detail: format!("degenerate bin width {width}"),
            });
        }
        Ok(Self { lo, hi, n_bins })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.n_bins as f64
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }
}

/// The eleven reserved marker tokens, in fixed id order starting at 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u32)]
pub enum Marker {
    Bos = 0,
    Eos = 1,
    EndOfChunk = 2,
    ProprioMark = 3,
    ObsMark = 4,
    ActMark = 5,
    /// Prompt marker appended after the instruction on mobile tasks.
    NavPrompt = 6,
    DirForward = 7,
    DirTurnLeft = 8,
    DirTurnRight = 9,
    DirStop = 10,
}

impl Marker {
    pub const ALL: [Marker; 11] = [
        Marker::Bos,
        Marker::Eos,
        Marker::EndOfChunk,
        Marker::ProprioMark,
        Marker::ObsMark,
        Marker::ActMark,
        Marker::NavPrompt,
        Marker::DirForward,
        Marker::DirTurnLeft,
        Marker::DirTurnRight,
        Marker::DirStop,
    ];

    pub fn id(self) -> u32 {
        self as u32
    }

    pub fn from_id(id: u32) -> Option<Marker> {
        Marker::ALL.get(id as usize).copied()
    }
}

/// Number of reserved marker ids.
pub const RESERVED_TOKENS: usize = Marker::ALL.len();

/// What a token id stands for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SymbolClass {
    Marker(Marker),
    /// Value bin index in [0, n_bins).
    Bin(usize),
    /// Instruction word index.
    Word(usize),
    /// Observation palette cell index.
    Palette(usize),
}

/// A sequence of token ids under one [`Vocabulary`].
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenSeq {
    pub ids: Vec<u32>,
}

impl TokenSeq {
    pub fn new(ids: Vec<u32>) -> Self {
        Self { ids }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn push(&mut self, id: u32) {
        self.ids.push(id);
    }

    pub fn extend(&mut self, other: &TokenSeq) {
        self.ids.extend_from_slice(&other.ids);
    }
}

impl From<Vec<u32>> for TokenSeq {
    fn from(ids: Vec<u32>) -> Self {
        Self { ids }
    }
}

/// The shared token space: markers, value bins, instruction words, palette.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    n_bins: usize,
    instruction_words: Vec<String>,
    palette_size: usize,
}

/// Builds the vocabulary with the standard disjoint-range layout.
///
/// Errors on `n_bins < 2`, an empty word list, duplicate words, or a zero
/// palette.
pub fn build_vocabulary(
    n_bins: usize,
    instruction_words: &[&str],
    palette_size: usize,
) -> Result<Vocabulary, CodecError> {
    if n_bins < 2 {
        return Err(CodecError::BadBinSpec {
            detail: format!("vocabulary needs n_bins >= 2, got {n_bins}"),
        });
    }
    if instruction_words.is_empty() {
        return Err(CodecError::EmptyWordList);
    }
    if palette_size == 0 {
        return Err(CodecError::BadBinSpec {
            detail: "palette_size must be positive".to_string(),
        });
    }
    let mut seen = std::collections::BTreeSet::new();
    for w in instruction_words {
        if !seen.insert(*w) {
            return Err(CodecError::DuplicateWord {
                word: (*w).to_string(),
            });
        }
    }
    Ok(Vocabulary {
        n_bins,
        instruction_words: instruction_words.iter().map(|w| w.to_string()).collect(),
        palette_size,
    })
}

impl Vocabulary {
    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn palette_size(&self) -> usize {
        self.palette_size
    }

    pub fn instruction_words(&self) -> &[String] {
        &self.instruction_words
    }

    /// Total token count: markers + bins + words + palette.
    pub fn size(&self) -> usize {
        RESERVED_TOKENS + self.n_bins + self.instruction_words.len() + self.palette_size
    }

    pub fn bin_base(&self) -> u32 {
        RESERVED_TOKENS as u32
    }

    pub fn word_base(&self) -> u32 {
        self.bin_base() + self.n_bins as u32
    }

    pub fn palette_base(&self) -> u32 {
        self.word_base() + self.instruction_words.len() as u32
    }

    /// Token id for a bin index. Panics if the index is out of range; call
    /// sites always hold indices produced by [`tokenize_value`].
    pub fn bin_token(&self, bin: usize) -> u32 {
        assert!(bin < self.n_bins, "bin index {bin} out of range");
        self.bin_base() + bin as u32
    }

    pub fn word_token(&self, word: &str) -> Result<u32, CodecError> {
        self.instruction_words
            .iter()
            .position(|w| w == word)
            .map(|i| self.word_base() + i as u32)
            .ok_or_else(|| CodecError::UnknownWord {
                word: word.to_string(),
            })
    }

    pub fn palette_token(&self, cell: usize) -> Result<u32, CodecError> {
        if cell >= self.palette_size {
            return Err(CodecError::PaletteOverflow {
                cell,
                palette_size: self.palette_size,
            });
        }
        Ok(self.palette_base() + cell as u32)
    }

    /// Classifies a token id; the four ranges partition [0, size).
    pub fn classify(&self, id: u32) -> Result<SymbolClass, CodecError> {
        if let Some(m) = Marker::from_id(id) {
            return Ok(SymbolClass::Marker(m));
        }
        let idx = id as usize;
        let bin_base = self.bin_base() as usize;
        let word_base = self.word_base() as usize;
        let palette_base = self.palette_base() as usize;
        if idx < word_base {
            Ok(SymbolClass::Bin(idx - bin_base))
        } else if idx < palette_base {
            Ok(SymbolClass::Word(idx - word_base))
        } else if idx < self.size() {
            Ok(SymbolClass::Palette(idx - palette_base))
        } else {
            Err(CodecError::UnknownToken { id })
        }
    }

    /// Inverse of [`Vocabulary::classify`].
    pub fn id_of(&self, class: &SymbolClass) -> u32 {
        match class {
            SymbolClass::Marker(m) => m.id(),
            SymbolClass::Bin(b) => self.bin_base() + *b as u32,
            SymbolClass::Word(w) => self.word_base() + *w as u32,
            SymbolClass::Palette(p) => self.palette_base() + *p as u32,
        }
    }

    /// Extracts the bin index from a token, or reports its actual class.
    pub fn bin_index(&self, id: u32, position: usize) -> Result<usize, CodecError> {
        match self.classify(id)? {
            SymbolClass::Bin(b) => Ok(b),
            other => Err(CodecError::NotABinToken {
                position,
                class: format!("{other:?}"),
            }),
        }
    }
}

/// Quantizes a finite value into its bin index: floor with upper clamp, so
/// `x = hi` lands in the top bin and out-of-range values saturate.
pub fn tokenize_value(x: f64, spec: &BinSpec) -> Result<usize, CodecError> {
    if !x.is_finite() {
        return Err(CodecError::NonFiniteValue { x });
    }
    let n = spec.n_bins as f64;
    let raw = ((x - spec.lo) / (spec.hi - spec.lo) * n).floor();
    let clamped = raw.clamp(0.0, n - 1.0);
    Ok(clamped as usize)
}

/// Returns the center of bin `i`.
pub fn detokenize_value(i: usize, spec: &BinSpec) -> Result<f64, CodecError> {
    if i >= spec.n_bins {
        return Err(CodecError::BinOutOfRange {
            index: i,
            n_bins: spec.n_bins,
        });
    }
    Ok(spec.lo + (i as f64 + 0.5) * spec.width())
}

/// One bin token per action dimension, in dimension order.
pub fn tokenize_action(
    action: &ActionVector,
    specs: &[BinSpec],
    vocab: &Vocabulary,
) -> Result<TokenSeq, CodecError> {
    if specs.len() != action.values.len() {
        return Err(CodecError::SpecCountMismatch {
            specs: specs.len(),
            dims: action.values.len(),
        });
    }
    let mut ids = Vec::with_capacity(action.values.len());
    for (x, spec) in action.values.iter().zip(specs) {
        ids.push(vocab.bin_token(tokenize_value(*x, spec)?));
    }
    Ok(TokenSeq::new(ids))
}

/// Inverse of [`tokenize_action`] up to quantization: per-dimension bin
/// centers. Rejects any non-bin token, identifying position and class.
pub fn detokenize_action(
    tokens: &TokenSeq,
    specs: &[BinSpec],
    vocab: &Vocabulary,
    embodiment: crate::action::Embodiment,
) -> Result<ActionVector, CodecError> {
    if specs.len() != tokens.len() {
        return Err(CodecError::SpecCountMismatch {
            specs: specs.len(),
            dims: tokens.len(),
        });
    }
    let mut values = Vec::with_capacity(tokens.len());
    for (pos, (&id, spec)) in tokens.ids.iter().zip(specs).enumerate() {
        let bin = vocab.bin_index(id, pos)?;
        values.push(detokenize_value(bin, spec)?);
    }
    ActionVector::new(embodiment, values).map_err(|e| CodecError::BadDimensions {
        detail: e.to_string(),
    })
}

/// PROPRIO_MARK followed by one bin token per proprioception dimension,
/// sharing the action bin vocabulary.
pub fn tokenize_proprio(
    proprio: &ProprioState,
    specs: &[BinSpec],
    vocab: &Vocabulary,
) -> Result<TokenSeq, CodecError> {
    if specs.len() != proprio.values.len() {
        return Err(CodecError::SpecCountMismatch {
            specs: specs.len(),
            dims: proprio.values.len(),
        });
    }
    let mut ids = Vec::with_capacity(proprio.values.len() + 1);
    ids.push(Marker::ProprioMark.id());
    for (x, spec) in proprio.values.iter().zip(specs) {
        ids.push(vocab.bin_token(tokenize_value(*x, spec)?));
    }
    Ok(TokenSeq::new(ids))
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CodecError {
    #[error("invalid bin spec: {detail}")]
    BadBinSpec { detail: String },
    #[error("instruction word list is empty")]
    EmptyWordList,
    #[error("duplicate instruction word {word:?}")]
    DuplicateWord { word: String },
    #[error("unknown instruction word {word:?}")]
    UnknownWord { word: String },
    #[error("non-finite value {x} cannot be tokenized")]
    NonFiniteValue { x: f64 },
    #[error("bin index {index} out of range for {n_bins} bins")]
    BinOutOfRange { index: usize, n_bins: usize },
    #[error("palette id {cell} exceeds palette size {palette_size}")]
    PaletteOverflow { cell: usize, palette_size: usize },
    #[error("token id {id} is outside the vocabulary")]
    UnknownToken { id: u32 },
    #[error("token at position {position} is not a bin token (found {class})")]
    NotABinToken { position: usize, class: String },
    #[error("spec count {specs} does not match dimension count {dims}")]
    SpecCountMismatch { specs: usize, dims: usize },
    #[error("bad dimensions: {detail}")]
    BadDimensions { detail: String },
}
