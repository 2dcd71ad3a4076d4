//! The observation model: 64x64 grids of 16-color cells.

use std::fmt;

use thiserror::Error;

/// Grid side length in cells.
pub const GRID_SIZE: usize = 64;
/// Number of cells in a frame.
pub const CELL_COUNT: usize = GRID_SIZE * GRID_SIZE;
/// Number of distinct colors; valid cell values are `0..COLOR_COUNT`.
pub const COLOR_COUNT: u8 = 16;

/// The fixed display palette (RGB) shared by every renderer of frames.
pub const PALETTE: [[u8; 3]; 16] = [
    [0x00, 0x00, 0x00],
    [0x1e, 0x93, 0xff],
    [0xf9, 0x3c, 0x31],
    [0x4f, 0xcc, 0x30],
    [0xff, 0xdc, 0x00],
    [0x99, 0x99, 0x99],
    [0xe5, 0x3a, 0xa3],
    [0xff, 0x85, 0x1b],
    [0x87, 0xd8, 0xf1],
    [0x92, 0x12, 0x31],
    [0xff, 0xff, 0xff],
    [0x55, 0x55, 0x55],
    [0x3d, 0x2b, 0x8c],
    [0x0b, 0x6e, 0x4f],
    [0xb0, 0x8a, 0x5c],
    [0x2c, 0x2c, 0x3a],
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrameError {
    #[error("frame has {0} cells, expected {CELL_COUNT}")]
    WrongSize(usize),
    #[error("cell ({x}, {y}) holds color {value}, outside 0..16")]
    ColorOutOfRange { x: usize, y: usize, value: u8 },
    #[error("frame sequence is empty")]
    EmptySequence,
}

/// One 64x64 observation. Cells are stored row-major, `cells[y * 64 + x]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Frame {
    cells: Box<[u8; CELL_COUNT]>,
}

impl Frame {
    pub fn filled(color: u8) -> Self {
        assert!(color < COLOR_COUNT, "color {color} out of range");
        Self {
            cells: Box::new([color; CELL_COUNT]),
        }
    }

    /// Builds a frame from row-major cells, checking size and color range.
    pub fn from_cells(cells: &[u8]) -> Result<Self, FrameError> {
        if cells.len() != CELL_COUNT {
            return Err(FrameError::WrongSize(cells.len()));
        }
        let mut boxed = Box::new([0u8; CELL_COUNT]);
        boxed.copy_from_slice(cells);
        let frame = Self { cells: boxed };
        frame.validate()?;
        Ok(frame)
    }

    /// Builds a frame from 64 rows of 64 values.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self, FrameError> {
        if rows.len() != GRID_SIZE || rows.iter().any(|r| r.len() != GRID_SIZE) {
            let total = rows.iter().map(Vec::len).sum();
            return Err(FrameError::WrongSize(total));
        }
        let flat: Vec<u8> = rows.iter().flatten().copied().collect();
        Self::from_cells(&flat)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.cells[y * GRID_SIZE + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, color: u8) {
        debug_assert!(color < COLOR_COUNT);
        self.cells[y * GRID_SIZE + x] = color;
    }

    /// Fills the clipped rectangle `[x, x+w) x [y, y+h)`.
    pub fn fill_rect(&mut self, x: usize, y: usize, w: usize, h: usize, color: u8) {
        debug_assert!(color < COLOR_COUNT);
        let x1 = (x + w).min(GRID_SIZE);
        let y1 = (y + h).min(GRID_SIZE);
        if x >= x1 {
            return;
        }
        for row in y..y1 {
            self.cells[row * GRID_SIZE + x..row * GRID_SIZE + x1].fill(color);
        }
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.cells[..]
    }

    /// Raw mutable access for fast blitting. Callers are responsible for
    /// keeping values in range; [`Frame::validate`] catches violations.
    pub fn as_bytes_mut(&mut self) -> &mut [u8] {
        &mut self.cells[..]
    }

    pub fn copy_from(&mut self, other: &Frame) {
        self.cells.copy_from_slice(&other.cells[..]);
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> {
        self.cells.chunks_exact(GRID_SIZE)
    }

    pub fn validate(&self) -> Result<(), FrameError> {
        if self.cells.iter().all(|&c| c < COLOR_COUNT) {
            return Ok(());
        }
        let idx = self.cells.iter().position(|&c| c >= COLOR_COUNT).unwrap();
        Err(FrameError::ColorOutOfRange {
            x: idx % GRID_SIZE,
            y: idx / GRID_SIZE,
            value: self.cells[idx],
        })
    }
}

impl fmt::Debug for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Frame [")?;
        for row in self.rows() {
            let line: String = row
                .iter()
                .map(|&c| char::from_digit(u32::from(c), 16).unwrap_or('?'))
                .collect();
            writeln!(f, "  {line}")?;
        }
        write!(f, "]")
    }
}

/// Frames emitted by one action. Earlier frames are animation; the last
/// frame is the state the next action applies to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameSequence {
    frames: Vec<Frame>,
}

impl FrameSequence {
    pub fn single(frame: Frame) -> Self {
        Self {
            frames: vec![frame],
        }
    }

    pub fn new(frames: Vec<Frame>) -> Result<Self, FrameError> {
        if frames.is_empty() {
            return Err(FrameError::EmptySequence);
        }
        Ok(Self { frames })
    }

    pub fn last(&self) -> &Frame {
        self.frames.last().expect("frame sequence is never empty")
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn into_frames(self) -> Vec<Frame> {
        self.frames
    }

    pub fn validate(&self) -> Result<(), FrameError> {
        self.frames.iter().try_for_each(Frame::validate)
    }
}
