//! Coordinate conventions and reference-point extraction.
//!
//! Frames arrive in normalized image coordinates. Before any measurement the
//! x axis is scaled by the frame aspect ratio (width / height), giving an
//! isotropic plane whose unit is the frame height. A rigid transform (rotation
//! plus translation, no scale) then maps that plane into *aligned space*, where
//! the facial midline is vertical and the face centroid sits at
//! `(0.5 * aspect, 0.5)`. All proportional measurements happen in aligned space.

mod frame;
mod mask;
mod semantics;

pub use frame::{read_frames, write_frames, FrameError, FrameRecord, LandmarkFrame};
pub use mask::{HairMask, MaskError};
pub use semantics::{SemanticsConfig, SemanticsError, DEFAULT_HAIRLINE_FALLBACK_FACTOR};

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Point2, Rotation2, Vector2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MESH_VERTEX_COUNT: usize = 468;

/// Distances below this (normalized units) are treated as zero.
pub const DEGENERACY_EPSILON: f64 = 1e-6;

pub type Point = Point2<f64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("degenerate face: {0}")]
    DegenerateFace(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    Measured,
    Estimated,
}

impl Confidence {
    pub fn combine(self, other: Confidence) -> Confidence {
        if self == Confidence::Estimated || other == Confidence::Estimated {
            Confidence::Estimated
        } else {
            Confidence::Measured
        }
    }
}

/// Least-squares fit `x = intercept + slope * y` through the configured
/// midline vertices, in aligned space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MidlineFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
}

impl MidlineFit {
    pub fn tilt_radians(&self) -> f64 {
        self.slope.atan()
    }
}

/// A frame mapped into aligned space.
#[derive(Debug, Clone)]
pub struct AlignedFrame {
    angle: f64,
    rotation: Rotation2<f64>,
    translation: Vector2<f64>,
    aspect: f64,
    width: u32,
    height: u32,
    vertices: Vec<Point>,
    depths: Vec<f64>,
    rhd1: Point,
    forehead_top: Point,
    midline_x: f64,
    midline_fit: Option<MidlineFit>,
}

impl AlignedFrame {
    /// Rotation angle of the image-to-aligned transform, radians.
    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn translation(&self) -> Vector2<f64> {
        self.translation
    }

    pub fn aspect(&self) -> f64 {
        self.aspect
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn midline_x(&self) -> f64 {
        self.midline_x
    }

    pub fn midline_fit(&self) -> Option<MidlineFit> {
        self.midline_fit
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, index: usize) -> Point {
        self.vertices[index]
    }

    /// Depth values as delivered; alignment leaves them untouched.
    pub fn depth(&self, index: usize) -> f64 {
        self.depths[index]
    }

    pub fn rhd1(&self) -> Point {
        self.rhd1
    }

    pub fn forehead_top(&self) -> Point {
        self.forehead_top
    }

    /// Isotropic image point to aligned space.
    pub fn to_aligned(&self, iso: Point) -> Point {
        self.rotation * iso + self.translation
    }

    /// Aligned point back to the isotropic image plane.
    pub fn from_aligned(&self, aligned: Point) -> Point {
        self.rotation.inverse() * (aligned - self.translation)
    }

    pub fn norm_to_aligned(&self, x: f64, y: f64) -> Point {
        self.to_aligned(Point::new(x * self.aspect, y))
    }

    /// Aligned point to normalized image coordinates.
    pub fn aligned_to_norm(&self, aligned: Point) -> Point {
        let iso = self.from_aligned(aligned);
        Point::new(iso.x / self.aspect, iso.y)
    }

    /// Aligned point to pixel coordinates of the source frame.
    pub fn aligned_to_pixels(&self, aligned: Point) -> Point {
        let n = self.aligned_to_norm(aligned);
        Point::new(n.x * self.width as f64, n.y * self.height as f64)
    }
}

fn iso_point(frame: &LandmarkFrame, index: usize) -> Point {
    let v = frame.vertex(index);
    Point::new(v[0] * frame.aspect(), v[1])
}

fn midpoint(a: Point, b: Point) -> Point {
    Point::new(0.5 * (a.x + b.x), 0.5 * (a.y + b.y))
}

fn centroid(points: impl ExactSizeIterator<Item = Point>) -> Point {
    let n = points.len() as f64;
    let (sx, sy) = points.fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    Point::new(sx / n, sy / n)
}

/// Canonicalizes a frame: the medial-brow midpoint (RHD1) to forehead-top
/// direction becomes `-y`, the vertex centroid lands on `(0.5 * aspect, 0.5)`.
pub fn align_frame(
    frame: &LandmarkFrame,
    cfg: &SemanticsConfig,
) -> Result<AlignedFrame, GeometryError> {
    let brow_l = iso_point(frame, cfg.medial_brow_left);
    let brow_r = iso_point(frame, cfg.medial_brow_right);
    if (brow_l - brow_r).norm() < DEGENERACY_EPSILON {
        return Err(GeometryError::DegenerateFace(
            "medial brow vertices coincide",
        ));
    }
    let rhd1_iso = midpoint(brow_l, brow_r);
    let top_iso = iso_point(frame, cfg.forehead_top);
    let up = top_iso - rhd1_iso;
    if up.norm() < DEGENERACY_EPSILON {
        return Err(GeometryError::DegenerateFace(
            "midline direction undefined: forehead anchor coincides with brow midpoint",
        ));
    }

    let mut angle = -FRAC_PI_2 - up.y.atan2(up.x);
    if angle <= -PI {
        angle += 2.0 * PI;
    } else if angle > PI {
        angle -= 2.0 * PI;
    }
    let rotation = Rotation2::new(angle);
    let aspect = frame.aspect();

    let center = centroid((0..MESH_VERTEX_COUNT).map(|i| iso_point(frame, i)));
    let anchor = Point::new(0.5 * aspect, 0.5);
    let translation = anchor - rotation * center;

    let vertices: Vec<Point> = (0..MESH_VERTEX_COUNT)
        .map(|i| rotation * iso_point(frame, i) + translation)
        .collect();
    let depths = frame.vertices().iter().map(|v| v[2]).collect();
    let rhd1 = rotation * rhd1_iso + translation;
    let forehead_top = rotation * top_iso + translation;

    let midline_fit = fit_midline(cfg.midline_indices.iter().map(|&i| vertices[i]));

    Ok(AlignedFrame {
        angle,
        rotation,
        translation,
        aspect,
        width: frame.width(),
        height: frame.height(),
        vertices,
        depths,
        rhd1,
        forehead_top,
        midline_x: rhd1.x,
        midline_fit,
    })
}

fn fit_midline(points: impl Iterator<Item = Point>) -> Option<MidlineFit> {
    let pts: Vec<Point> = points.collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mean_y = pts.iter().map(|p| p.y).sum::<f64>() / n;
    let mean_x = pts.iter().map(|p| p.x).sum::<f64>() / n;
    let syy: f64 = pts.iter().map(|p| (p.y - mean_y).powi(2)).sum();
    if syy < DEGENERACY_EPSILON * DEGENERACY_EPSILON {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.y - mean_y) * (p.x - mean_x)).sum();
    let slope = sxy / syy;
    let intercept = mean_x - slope * mean_y;
    let rms_residual = (pts
        .iter()
        .map(|p| (p.x - intercept - slope * p.y).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Some(MidlineFit {
        slope,
        intercept,
        rms_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hairline {
    /// Aligned-space point on the midline.
    pub point: Point,
    pub confidence: Confidence,
}

/// Finds the anterior hairline on the aligned midline.
///
/// With a mask, samples one pixel apart are taken upward from RHD1 and the
/// first sample landing on a hair pixel wins. Without a mask, or when no hair
/// is met before leaving the image, the forehead-top vertex is extended from
/// RHD1 by `cfg.hairline_fallback_factor` and the result is `Estimated`.
pub fn extract_hairline(
    frame: &LandmarkFrame,
    aligned: &AlignedFrame,
    cfg: &SemanticsConfig,
) -> Hairline {
    if let Some(mask) = frame.hair_mask() {
        if let Some(point) = scan_mask(mask, aligned) {
            return Hairline {
                point,
                confidence: Confidence::Measured,
            };
        }
    }
    let rhd1 = aligned.rhd1();
    let top = aligned.forehead_top();
    let k = cfg.hairline_fallback_factor;
    Hairline {
        point: Point::new(aligned.midline_x(), rhd1.y + k * (top.y - rhd1.y)),
        confidence: Confidence::Estimated,
    }
}

fn scan_mask(mask: &HairMask, aligned: &AlignedFrame) -> Option<Point> {
    let h = aligned.height() as f64;
    let step = 1.0 / h;
    let start = aligned.rhd1();
    let limit = 2 * (aligned.width() as usize + aligned.height() as usize);
    let mut entered = false;
    for k in 1..=limit {
        let p = Point::new(start.x, start.y - k as f64 * step);
        let iso = aligned.from_aligned(p);
        let col = (iso.x * h).floor() as i64;
        let row = (iso.y * h).floor() as i64;
        let inside =
            col >= 0 && row >= 0 && col < mask.width() as i64 && row < mask.height() as i64;
        if !inside {
            if entered {
                break;
            }
            continue;
        }
        entered = true;
        if mask.get(col, row) {
            return Some(p);
        }
    }
    None
}

/// The reference channel in aligned space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferencePoints {
    pub rhd1: Point,
    pub rhd2: Point,
    pub rhd3_left: Point,
    pub rhd3_right: Point,
    pub rhd2_confidence: Confidence,
}

pub fn extract_reference_points(
    aligned: &AlignedFrame,
    hairline: &Hairline,
    cfg: &SemanticsConfig,
) -> Result<ReferencePoints, GeometryError> {
    let rhd1 = aligned.rhd1();
    if (rhd1 - hairline.point).norm() < DEGENERACY_EPSILON {
        return Err(GeometryError::DegenerateFace(
            "hairline coincides with brow midpoint",
        ));
    }
    let eye = |set: &[usize]| centroid(set.iter().map(|&i| aligned.vertex(i)));
    Ok(ReferencePoints {
        rhd1,
        rhd2: hairline.point,
        rhd3_left: eye(&cfg.eye_contour_left),
        rhd3_right: eye(&cfg.eye_contour_right),
        rhd2_confidence: hairline.confidence,
    })
}

/// Aligned-space length of one cun.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CunUnit(f64);

impl CunUnit {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// One cun is a third of the brow-midpoint to hairline distance.
pub fn unit_cun(refs: &ReferencePoints) -> Result<CunUnit, GeometryError> {
    let d = (refs.rhd1.y - refs.rhd2.y).abs();
    if d < DEGENERACY_EPSILON {
        return Err(GeometryError::DegenerateFace(
            "brow midpoint to hairline distance is zero",
        ));
    }
    Ok(CunUnit(d / 3.0))
}

pub fn mirror_point(p: Point, aligned: &AlignedFrame) -> Point {
    mirror_about(p, aligned.midline_x())
}

pub(crate) fn mirror_about(p: Point, midline_x: f64) -> Point {
    Point::new(2.0 * midline_x - p.x, p.y)
}

/// Everything the evaluator needs from one frame.
#[derive(Debug, Clone)]
pub struct FrameReferences {
    pub aligned: AlignedFrame,
    pub refs: ReferencePoints,
    pub cun: CunUnit,
}

pub fn locate_references(
    frame: &LandmarkFrame,
    cfg: &SemanticsConfig,
) -> Result<FrameReferences, GeometryError> {
    let aligned = align_frame(frame, cfg)?;
    let hairline = extract_hairline(frame, &aligned, cfg);
    let refs = extract_reference_points(&aligned, &hairline, cfg)?;
    let cun = unit_cun(&refs)?;
    Ok(FrameReferences { aligned, refs, cun })
}
