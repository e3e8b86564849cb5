//! Binary sequences: the environment state, the test-battery input, and the
//! block-image rendering used to visualize generated bits.

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BitSeqError {
    #[error("bit position {position} out of range 1..={length}")]
    OutOfRange { position: usize, length: usize },
    #[error("bit value {0} is not 0 or 1")]
    InvalidBit(u8),
    #[error("appended pattern must be non-empty")]
    EmptyPattern,
    #[error("sequence length {length} does not match {rows} rows x {cols} cols")]
    DimensionMismatch {
        length: usize,
        rows: usize,
        cols: usize,
    },
    #[error("invalid character '{found}' at line {line}, column {column}")]
    InvalidCharacter {
        found: char,
        line: usize,
        column: usize,
    },
    #[error("image spec requires block_px >= 1")]
    ZeroBlockSize,
}

/// An ordered sequence of binary symbols.
///
/// Values are immutable from the caller's perspective: mutating operations
/// return a new sequence. Storage is one byte per bit, index-addressable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BitSequence {
    bits: Vec<u8>,
}

impl BitSequence {
    pub fn empty() -> Self {
        Self { bits: Vec::new() }
    }

    /// Builds a sequence from raw symbols, rejecting anything but 0 and 1.
    pub fn from_bits(bits: impl Into<Vec<u8>>) -> Result<Self, BitSeqError> {
        let bits = bits.into();
        if let Some(&bad) = bits.iter().find(|&&b| b > 1) {
            return Err(BitSeqError::InvalidBit(bad));
        }
        Ok(Self { bits })
    }

    /// `len` independent fair-coin bits drawn from `rng`.
    pub fn random(len: usize, rng: &mut impl Rng) -> Self {
        Self {
            bits: (0..len).map(|_| rng.gen::<bool>() as u8).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// 1-based read access, mirroring the positional action encoding.
    pub fn bit(&self, n: usize) -> Result<u8, BitSeqError> {
        if n == 0 || n > self.len() {
            return Err(BitSeqError::OutOfRange {
                position: n,
                length: self.len(),
            });
        }
        Ok(self.bits[n - 1])
    }

    /// Returns a copy with the n-th bit (1-based) set to `v`.
    pub fn set_bit(&self, n: usize, v: u8) -> Result<Self, BitSeqError> {
        if v > 1 {
            return Err(BitSeqError::InvalidBit(v));
        }
        if n == 0 || n > self.len() {
            return Err(BitSeqError::OutOfRange {
                position: n,
                length: self.len(),
            });
        }
        let mut bits = self.bits.clone();
        bits[n - 1] = v;
        Ok(Self { bits })
    }

    /// Returns this sequence with `pattern` concatenated at the end.
    pub fn append_pattern(&self, pattern: &BitSequence) -> Result<Self, BitSeqError> {
        if pattern.is_empty() {
            return Err(BitSeqError::EmptyPattern);
        }
        let mut bits = Vec::with_capacity(self.len() + pattern.len());
        bits.extend_from_slice(&self.bits);
        bits.extend_from_slice(&pattern.bits);
        Ok(Self { bits })
    }

    /// The last `n` bits (or the whole sequence when shorter).
    pub fn tail(&self, n: usize) -> Self {
        let start = self.len().saturating_sub(n);
        Self {
            bits: self.bits[start..].to_vec(),
        }
    }

    /// Maps 1 to +1.0 and 0 to -1.0, preserving order.
    pub fn to_pm1(&self) -> Vec<f64> {
        self.bits
            .iter()
            .map(|&b| if b == 1 { 1.0 } else { -1.0 })
            .collect()
    }

    /// Bits as 0.0/1.0 reals, the shape network inputs take.
    pub fn to_f64(&self) -> Vec<f64> {
        self.bits.iter().map(|&b| b as f64).collect()
    }

    pub fn complement(&self) -> Self {
        Self {
            bits: self.bits.iter().map(|&b| 1 - b).collect(),
        }
    }

    pub fn reversed(&self) -> Self {
        let mut bits = self.bits.clone();
        bits.reverse();
        Self { bits }
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    /// Serializes to '0'/'1' characters, no separators, newline-terminated.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.len() + 1);
        for &b in &self.bits {
            s.push(if b == 1 { '1' } else { '0' });
        }
        s.push('\n');
        s
    }

    /// Parses '0'/'1' text. Newlines are tolerated anywhere; any other
    /// character is reported with its line and column.
    pub fn from_text(text: &str) -> Result<Self, BitSeqError> {
        let mut bits = Vec::with_capacity(text.len());
        let mut line = 1usize;
        let mut column = 0usize;
        for ch in text.chars() {
            column += 1;
            match ch {
                '0' => bits.push(0),
                '1' => bits.push(1),
                '\n' => {
                    line += 1;
                    column = 0;
                }
                '\r' => {}
                other => {
                    return Err(BitSeqError::InvalidCharacter {
                        found: other,
                        line,
                        column,
                    })
                }
            }
        }
        Ok(Self { bits })
    }
}

impl std::fmt::Display for BitSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", b)?;
        }
        Ok(())
    }
}

/// Smoothing applied after block expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothing {
    None,
    /// 3x3 uniform box filter, single pass, clamped borders.
    Box3,
}

/// Layout for rendering a sequence as a grid of square blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitImageSpec {
    pub rows: usize,
    pub cols: usize,
    pub block_px: usize,
    pub smoothing: Smoothing,
}

impl Default for BitImageSpec {
    fn default() -> Self {
        Self {
            rows: 40,
            cols: 25,
            block_px: 10,
            smoothing: Smoothing::Box3,
        }
    }
}

/// 8-bit grayscale raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn pixel(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }
}

/// Renders the sequence row-major into `rows x cols` blocks of
/// `block_px x block_px` pixels: ones white, zeros black, then the smoothing
/// kernel is applied once.
pub fn render_image(seq: &BitSequence, spec: &BitImageSpec) -> Result<GrayImage, BitSeqError> {
    if spec.block_px == 0 {
        return Err(BitSeqError::ZeroBlockSize);
    }
    if seq.len() != spec.rows * spec.cols {
        return Err(BitSeqError::DimensionMismatch {
            length: seq.len(),
            rows: spec.rows,
            cols: spec.cols,
        });
    }
    let width = spec.cols * spec.block_px;
    let height = spec.rows * spec.block_px;
    let mut pixels = vec![0u8; width * height];
    for (idx, &b) in seq.bits().iter().enumerate() {
        if b == 0 {
            continue;
        }
        let block_row = idx / spec.cols;
        let block_col = idx % spec.cols;
        for dy in 0..spec.block_px {
            let y = block_row * spec.block_px + dy;
            let row_base = y * width + block_col * spec.block_px;
            pixels[row_base..row_base + spec.block_px].fill(255);
        }
    }
    let pixels = match spec.smoothing {
        Smoothing::None => pixels,
        Smoothing::Box3 => box_filter_3x3(&pixels, width, height),
    };
    Ok(GrayImage {
        width,
        height,
        pixels,
    })
}

fn box_filter_3x3(pixels: &[u8], width: usize, height: usize) -> Vec<u8> {
    let mut out = vec![0u8; pixels.len()];
    let clamp = |v: isize, hi: usize| -> usize { v.clamp(0, hi as isize - 1) as usize };
    for y in 0..height {
        for x in 0..width {
            let mut sum = 0u32;
            for dy in -1..=1isize {
                let sy = clamp(y as isize + dy, height);
                for dx in -1..=1isize {
                    let sx = clamp(x as isize + dx, width);
                    sum += pixels[sy * width + sx] as u32;
                }
            }
            out[y * width + x] = ((sum + 4) / 9) as u8;
        }
    }
    out
}
