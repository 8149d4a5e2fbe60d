use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::mask::{HairMask, MaskError};
use super::MESH_VERTEX_COUNT;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("frame has {0} vertices, expected {MESH_VERTEX_COUNT}")]
    VertexCount(usize),
    #[error("frame dimensions must be positive, got {width}x{height}")]
    ZeroDimension { width: u32, height: u32 },
    #[error("vertex {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("hair mask is {mask_w}x{mask_h} but frame is {width}x{height}")]
    MaskSize {
        mask_w: u32,
        mask_h: u32,
        width: u32,
        height: u32,
    },
    #[error("hair mask: {0}")]
    Mask(#[from] MaskError),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
    #[error("line {line}: {source}")]
    Invalid {
        line: usize,
        source: Box<FrameError>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One timestamped face-mesh observation in normalized image coordinates
/// (origin top-left, y down).
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkFrame {
    timestamp: i64,
    width: u32,
    height: u32,
    vertices: Vec<[f64; 3]>,
    hair_mask: Option<HairMask>,
}

impl LandmarkFrame {
    pub fn new(
        timestamp: i64,
        width: u32,
        height: u32,
        vertices: Vec<[f64; 3]>,
        hair_mask: Option<HairMask>,
    ) -> Result<Self, FrameError> {
        if width == 0 || height == 0 {
            return Err(FrameError::ZeroDimension { width, height });
        }
        if vertices.len() != MESH_VERTEX_COUNT {
            return Err(FrameError::VertexCount(vertices.len()));
        }
        if let Some(i) = vertices
            .iter()
            .position(|v| v.iter().any(|c| !c.is_finite()))
        {
            return Err(FrameError::NonFinite(i));
        }
        if let Some(mask) = &hair_mask {
            if mask.width() != width || mask.height() != height {
                return Err(FrameError::MaskSize {
                    mask_w: mask.width(),
                    mask_h: mask.height(),
                    width,
                    height,
                });
            }
        }
        Ok(Self {
            timestamp,
            width,
            height,
            vertices,
            hair_mask,
        })
    }

    pub fn timestamp(&self) -> i64 {
        self.timestamp
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Width over height; x is scaled by this to obtain an isotropic plane.
    pub fn aspect(&self) -> f64 {
        self.width as f64 / self.height as f64
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn vertex(&self, index: usize) -> [f64; 3] {
        self.vertices[index]
    }

    pub fn hair_mask(&self) -> Option<&HairMask> {
        self.hair_mask.as_ref()
    }

    pub fn with_timestamp(mut self, timestamp: i64) -> Self {
        self.timestamp = timestamp;
        self
    }

    pub fn with_hair_mask(mut self, mask: Option<HairMask>) -> Result<Self, FrameError> {
        if let Some(m) = &mask {
            if m.width() != self.width || m.height() != self.height {
                return Err(FrameError::MaskSize {
                    mask_w: m.width(),
                    mask_h: m.height(),
                    width: self.width,
                    height: self.height,
                });
            }
        }
        self.hair_mask = mask;
        Ok(self)
    }

    /// Replaces every vertex; the count must stay 468.
    pub fn with_vertices(self, vertices: Vec<[f64; 3]>) -> Result<Self, FrameError> {
        Self::new(
            self.timestamp,
            self.width,
            self.height,
            vertices,
            self.hair_mask,
        )
    }

    /// Every vertex shifted by `(dx, dy)` normalized units. The hair mask is
    /// left untouched; shift it separately when the shift is whole pixels.
    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        let mut out = self.clone();
        for v in &mut out.vertices {
            v[0] += dx;
            v[1] += dy;
        }
        out
    }

    pub fn to_record(&self) -> FrameRecord {
        FrameRecord {
            ts: self.timestamp,
            w: self.width,
            h: self.height,
            v: self.vertices.clone(),
            hair: self.hair_mask.as_ref().map(HairMask::encode_rle),
        }
    }

    pub fn from_record(record: FrameRecord) -> Result<Self, FrameError> {
        let mask = match &record.hair {
            Some(text) => Some(HairMask::decode_rle(record.w, record.h, text)?),
            None => None,
        };
        Self::new(record.ts, record.w, record.h, record.v, mask)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&self.to_record()).expect("frame record serializes")
    }
}

/// Wire form of a frame: one JSON object per line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub ts: i64,
    pub w: u32,
    pub h: u32,
    pub v: Vec<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hair: Option<String>,
}

/// Iterates frames from a JSONL reader. Blank lines are skipped; each bad line
/// yields an error carrying its 1-based line number and iteration continues.
pub fn read_frames<R: BufRead>(
    reader: R,
) -> impl Iterator<Item = Result<LandmarkFrame, FrameError>> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(i, line)| {
            let line_no = i + 1;
            let line = match line {
                Ok(l) => l,
                Err(e) => return Some(Err(FrameError::Io(e))),
            };
            if line.trim().is_empty() {
                return None;
            }
            let parsed = serde_json::from_str::<FrameRecord>(&line)
                .map_err(|source| FrameError::Json {
                    line: line_no,
                    source,
                })
                .and_then(|rec| {
                    LandmarkFrame::from_record(rec).map_err(|e| FrameError::Invalid {
                        line: line_no,
                        source: Box::new(e),
                    })
                });
            Some(parsed)
        })
}

pub fn write_frames<'a, W: Write>(
    mut out: W,
    frames: impl IntoIterator<Item = &'a LandmarkFrame>,
) -> std::io::Result<()> {
    for frame in frames {
        writeln!(out, "{}", frame.to_json_line())?;
    }
    Ok(())
}
