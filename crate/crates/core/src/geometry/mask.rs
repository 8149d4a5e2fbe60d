//! Binary hair mask raster and its run-length text encoding.
//!
//! The wire form is a comma-separated list of decimal run lengths over the
//! row-major pixel sequence. Runs alternate starting with non-hair, so a mask
//! whose first pixel is hair begins with a `0` run. The runs must cover exactly
//! `width * height` pixels.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MaskError {
    #[error("mask run {index} is not a non-negative integer: {text:?}")]
    BadRun { index: usize, text: String },
    #[error("mask runs cover {covered} pixels, expected {expected}")]
    LengthMismatch { covered: u64, expected: u64 },
    #[error("mask raster has {len} pixels, expected {expected}")]
    RasterSize { len: usize, expected: usize },
}

/// Row-major binary raster, `true` marks a hair pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HairMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl HairMask {
    pub fn new(width: u32, height: u32, bits: Vec<bool>) -> Result<Self, MaskError> {
        let expected = width as usize * height as usize;
        if bits.len() != expected {
            return Err(MaskError::RasterSize {
                len: bits.len(),
                expected,
            });
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    /// Mask with every pixel set to `value`.
    pub fn filled(width: u32, height: u32, value: bool) -> Self {
        Self {
            width,
            height,
            bits: vec![value; width as usize * height as usize],
        }
    }

    /// Builds a mask by evaluating `f(col, row)` for every pixel.
    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width as usize * height as usize);
        for row in 0..height {
            for col in 0..width {
                bits.push(f(col, row));
            }
        }
        Self {
            width,
            height,
            bits,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Pixel lookup; out-of-range coordinates read as non-hair.
    pub fn get(&self, col: i64, row: i64) -> bool {
        if col < 0 || row < 0 || col >= self.width as i64 || row >= self.height as i64 {
            return false;
        }
        self.bits[row as usize * self.width as usize + col as usize]
    }

    pub fn count_hair(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn decode_rle(width: u32, height: u32, text: &str) -> Result<Self, MaskError> {
        let expected = width as u64 * height as u64;
        let mut bits = Vec::with_capacity(expected as usize);
        let mut value = false;
        let mut covered: u64 = 0;
        let trimmed = text.trim();
        if !trimmed.is_empty() {
            for (index, part) in trimmed.split(',').enumerate() {
                let run: u64 = part.trim().parse().map_err(|_| MaskError::BadRun {
                    index,
                    text: part.to_string(),
                })?;
                covered = covered.saturating_add(run);
                if covered > expected {
                    return Err(MaskError::LengthMismatch { covered, expected });
                }
                bits.extend(std::iter::repeat_n(value, run as usize));
                value = !value;
            }
        }
        if covered != expected {
            return Err(MaskError::LengthMismatch { covered, expected });
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn encode_rle(&self) -> String {
        let mut runs: Vec<u64> = Vec::new();
        let mut current = false;
        let mut run = 0u64;
        for &bit in &self.bits {
            if bit == current {
                run += 1;
            } else {
                runs.push(run);
                current = bit;
                run = 1;
            }
        }
        runs.push(run);
        runs.iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Mask shifted by whole pixels; uncovered pixels become non-hair.
    pub fn shifted(&self, dx: i64, dy: i64) -> Self {
        Self::from_fn(self.width, self.height, |c, r| {
            self.get(c as i64 - dx, r as i64 - dy)
        })
    }
}
