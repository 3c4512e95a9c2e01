//! Symbolic observations: palette-id view grids standing in for camera
//! images, composed by vertical concatenation into one input stream.

use serde::{Deserialize, Serialize};

use crate::vocab::{CodecError, Marker, TokenSeq, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViewKind {
    /// Scene-level view of the whole arena.
    Allocentric,
    /// Window around the active gripper (fixed-base) or ahead of the base
    /// (mobile).
    Egocentric,
}

/// An H x W grid of palette cell ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewGrid {
    pub kind: ViewKind,
    pub h: usize,
    pub w: usize,
    /// Row-major cells, length h * w.
    pub cells: Vec<u8>,
}

impl ViewGrid {
    pub fn new(kind: ViewKind, h: usize, w: usize, cells: Vec<u8>) -> Result<Self, ObsError> {
        if h == 0 || w == 0 {
            return Err(ObsError::EmptyView { h, w });
        }
        if cells.len() != h * w {
            return Err(ObsError::CellCountMismatch {
                expected: h * w,
                got: cells.len(),
            });
        }
        Ok(Self { kind, h, w, cells })
    }

    pub fn filled(kind: ViewKind, h: usize, w: usize, cell: u8) -> Self {
        Self::new(kind, h, w, vec![cell; h * w]).expect("positive dimensions")
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.cells[row * self.w + col]
    }

    pub fn set(&mut self, row: usize, col: usize, cell: u8) {
        self.cells[row * self.w + col] = cell;
    }
}

/// The model's visual input: allocentric rows stacked above egocentric rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositeObservation {
    pub h: usize,
    pub w: usize,
    pub cells: Vec<u8>,
}

/// Vertically concatenates the two views, allocentric block on top. No
/// resampling, no cell mutation; widths must match.
pub fn compose_views(
    allocentric: &ViewGrid,
    egocentric: &ViewGrid,
) -> Result<CompositeObservation, ObsError> {
    if allocentric.w != egocentric.w {
        return Err(ObsError::WidthMismatch {
            allocentric: allocentric.w,
            egocentric: egocentric.w,
        });
    }
    let mut cells = Vec::with_capacity((allocentric.h + egocentric.h) * allocentric.w);
    cells.extend_from_slice(&allocentric.cells);
    cells.extend_from_slice(&egocentric.cells);
    Ok(CompositeObservation {
        h: allocentric.h + egocentric.h,
        w: allocentric.w,
        cells,
    })
}

/// OBS_MARK followed by one palette token per cell, row-major.
pub fn obs_to_tokens(
    obs: &CompositeObservation,
    vocab: &Vocabulary,
) -> Result<TokenSeq, CodecError> {
    let mut ids = Vec::with_capacity(1 + obs.cells.len());
    ids.push(Marker::ObsMark.id());
    for &cell in &obs.cells {
        ids.push(vocab.palette_token(cell as usize)?);
    }
    Ok(TokenSeq::new(ids))
}

/// Ablation baseline: the two views as separate token streams, each behind
/// its own OBS_MARK, instead of one composed image.
pub fn concat_tokens_baseline(
    allocentric: &ViewGrid,
    egocentric: &ViewGrid,
    vocab: &Vocabulary,
) -> Result<TokenSeq, CodecError> {
    let mut ids = Vec::with_capacity(2 + allocentric.cells.len() + egocentric.cells.len());
    for view in [allocentric, egocentric] {
        ids.push(Marker::ObsMark.id());
        for &cell in &view.cells {
            ids.push(vocab.palette_token(cell as usize)?);
        }
    }
    Ok(TokenSeq::new(ids))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ObsError {
    #[error("view grid must be non-empty, got {h}x{w}")]
    EmptyView { h: usize, w: usize },
    #[error("cell buffer length {got} does not match {expected}")]
    CellCountMismatch { expected: usize, got: usize },
    #[error("view widths differ: allocentric {allocentric}, egocentric {egocentric}")]
    WidthMismatch { allocentric: usize, egocentric: usize },
}
