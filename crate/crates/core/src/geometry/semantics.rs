//! Named anatomy on the 468-vertex mesh.
//!
//! Side names follow the frame as delivered: `left` is the side with the
//! smaller image x. The shipped defaults are editable data, not ground truth.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::MESH_VERTEX_COUNT;

pub const DEFAULT_HAIRLINE_FALLBACK_FACTOR: f64 = 1.10;

#[derive(Debug, Error)]
pub enum SemanticsError {
    #[error("{field}: vertex index {index} is out of range (mesh has {MESH_VERTEX_COUNT} vertices)")]
    IndexOutOfRange { field: &'static str, index: usize },
    #[error("{field} must not be empty")]
    Empty { field: &'static str },
    #[error("left and right assignments overlap at vertex {0}")]
    Overlap(usize),
    #[error("hairline_fallback_factor must be positive and finite, got {0}")]
    BadFallbackFactor(f64),
    #[error("cannot read semantics file: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid TOML semantics: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("invalid JSON semantics: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticsConfig {
    pub medial_brow_left: usize,
    pub medial_brow_right: usize,
    pub eye_contour_left: Vec<usize>,
    pub eye_contour_right: Vec<usize>,
    pub forehead_top: usize,
    pub midline_indices: Vec<usize>,
    /// RHD2 fallback: forehead_top extended from RHD1 by this factor.
    #[serde(default = "default_fallback_factor")]
    pub hairline_fallback_factor: f64,
}

fn default_fallback_factor() -> f64 {
    DEFAULT_HAIRLINE_FALLBACK_FACTOR
}

impl Default for SemanticsConfig {
    /// Indices follow the common face-mesh topology.
    fn default() -> Self {
        Self {
            medial_brow_left: 55,
            medial_brow_right: 285,
            eye_contour_left: vec![
                33, 7, 163, 144, 145, 153, 154, 155, 133, 173, 157, 158, 159, 160, 161, 246,
            ],
            eye_contour_right: vec![
                263, 249, 390, 373, 374, 380, 381, 382, 362, 398, 384, 385, 386, 387, 388, 466,
            ],
            forehead_top: 10,
            midline_indices: vec![
                10, 151, 9, 8, 168, 6, 197, 195, 5, 4, 1, 19, 94, 2, 164, 0, 11, 12, 13, 14, 15,
                16, 17, 18, 200, 199, 175, 152,
            ],
            hairline_fallback_factor: DEFAULT_HAIRLINE_FALLBACK_FACTOR,
        }
    }
}

impl SemanticsConfig {
    pub fn validate(&self) -> Result<(), SemanticsError> {
        let check = |field: &'static str, index: usize| {
            if index >= MESH_VERTEX_COUNT {
                Err(SemanticsError::IndexOutOfRange { field, index })
            } else {
                Ok(())
            }
        };
        check("medial_brow_left", self.medial_brow_left)?;
        check("medial_brow_right", self.medial_brow_right)?;
        check("forehead_top", self.forehead_top)?;
        for (field, list) in [
            ("eye_contour_left", &self.eye_contour_left),
            ("eye_contour_right", &self.eye_contour_right),
            ("midline_indices", &self.midline_indices),
        ] {
            if list.is_empty() {
                return Err(SemanticsError::Empty { field });
            }
            for &i in list {
                check(field, i)?;
            }
        }
        if self.medial_brow_left == self.medial_brow_right {
            return Err(SemanticsError::Overlap(self.medial_brow_left));
        }
        let left: BTreeSet<_> = self.eye_contour_left.iter().collect();
        if let Some(&shared) = self.eye_contour_right.iter().find(|i| left.contains(i)) {
            return Err(SemanticsError::Overlap(shared));
        }
        if !(self.hairline_fallback_factor.is_finite() && self.hairline_fallback_factor > 0.0) {
            return Err(SemanticsError::BadFallbackFactor(
                self.hairline_fallback_factor,
            ));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, SemanticsError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_str(text: &str) -> Result<Self, SemanticsError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a `.json` file as JSON and anything else as TOML.
    pub fn load(path: &Path) -> Result<Self, SemanticsError> {
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Self::from_json_str(&text),
            _ => Self::from_toml_str(&text),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        SemanticsConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_out_of_range_and_overlap() {
        let cfg = SemanticsConfig {
            forehead_top: 468,
            ..Default::default()
        };
        assert!(matches!(
            cfg.validate(),
            Err(SemanticsError::IndexOutOfRange { .. })
        ));

        let mut cfg = SemanticsConfig::default();
        cfg.eye_contour_right.push(33);
        assert!(matches!(cfg.validate(), Err(SemanticsError::Overlap(33))));

        let mut cfg = SemanticsConfig::default();
        cfg.midline_indices.clear();
        assert!(matches!(cfg.validate(), Err(SemanticsError::Empty { .. })));
    }

    #[test]
    fn toml_and_json_agree() {
        let cfg = SemanticsConfig::default();
        let toml_text = toml::to_string(&cfg).unwrap();
        let json_text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(SemanticsConfig::from_toml_str(&toml_text).unwrap(), cfg);
        assert_eq!(SemanticsConfig::from_json_str(&json_text).unwrap(), cfg);
    }

    #[test]
    fn fallback_factor_defaults_when_absent() {
        let text = r#"{"medial_brow_left":1,"medial_brow_right":2,"eye_contour_left":[3],
            "eye_contour_right":[4],"forehead_top":5,"midline_indices":[5]}"#;
        let cfg = SemanticsConfig::from_json_str(text).unwrap();
        assert_eq!(cfg.hairline_fallback_factor, 1.10);
    }
}
