//! Synthetic face fixtures and the bundled sample data.
//!
//! The canonical fixture is a 512x512 frontal face built on an ellipsoidal
//! surface. Vertices named by the default [`SemanticsConfig`] sit at plausible
//! anatomical positions; the rest fill the face oval in mirrored pairs. The
//! whole mesh is shifted so its centroid is `(0.5, 0.5)`, which makes the
//! canonical frame a fixed point of alignment.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{HairMask, LandmarkFrame, SemanticsConfig, MESH_VERTEX_COUNT};

pub const SAMPLE_ATLAS_CSV: &str = include_str!("../data/sample_atlas.csv");
pub const SAMPLE_CHANNELS_CSV: &str = include_str!("../data/channels.csv");
pub const BENCH_ATLAS_CSV: &str = include_str!("../data/bench_atlas.csv");
pub const DEFAULT_SEMANTICS_TOML: &str = include_str!("../data/semantics.toml");

pub const FIXTURE_SIZE: u32 = 512;

const FACE_DEPTH: f64 = 0.12;
const SURFACE_CENTER: (f64, f64) = (0.5, 0.52);
const SURFACE_RADII: (f64, f64) = (0.25, 0.36);

/// Depth of the synthetic face surface; negative is toward the camera.
fn surface_z(x: f64, y: f64) -> f64 {
    let u = (x - SURFACE_CENTER.0) / SURFACE_RADII.0;
    let w = (y - SURFACE_CENTER.1) / SURFACE_RADII.1;
    -FACE_DEPTH * (1.0 - u * u - w * w).max(0.0).sqrt()
}

fn canonical_vertices() -> Vec<[f64; 3]> {
    let cfg = SemanticsConfig::default();
    let mut placed: Vec<Option<(f64, f64)>> = vec![None; MESH_VERTEX_COUNT];

    placed[cfg.medial_brow_left] = Some((0.465, 0.39));
    placed[cfg.medial_brow_right] = Some((0.535, 0.39));

    let n_mid = cfg.midline_indices.len();
    for (k, &i) in cfg.midline_indices.iter().enumerate() {
        let y = 0.24 + (0.80 - 0.24) * k as f64 / (n_mid - 1) as f64;
        placed[i] = Some((0.5, y));
    }

    // eye_contour_right[k] sits at angle k * 22.5 degrees on an ellipse around
    // the right pupil; the left contour is its mirror image.
    let n_eye = cfg.eye_contour_right.len();
    for k in 0..n_eye {
        let t = 2.0 * PI * k as f64 / n_eye as f64;
        let (x, y) = (0.59 + 0.045 * t.cos(), 0.445 + 0.018 * t.sin());
        placed[cfg.eye_contour_right[k]] = Some((x, y));
        placed[cfg.eye_contour_left[k]] = Some((1.0 - x, y));
    }

    let named: BTreeSet<usize> = (0..MESH_VERTEX_COUNT)
        .filter(|&i| placed[i].is_some())
        .collect();
    let free: Vec<usize> = (0..MESH_VERTEX_COUNT)
        .filter(|i| !named.contains(i))
        .collect();
    let pairs = free.len() / 2;
    let golden = PI * (3.0 - 5f64.sqrt());
    for (k, pair) in free.chunks(2).enumerate() {
        let r = ((k as f64 + 0.5) / pairs as f64).sqrt();
        let t = k as f64 * golden;
        let x = 0.5 + 0.012 + 0.19 * r * t.cos().abs();
        let y = 0.53 + 0.29 * r * t.sin();
        placed[pair[0]] = Some((x, y));
        if let Some(&j) = pair.get(1) {
            placed[j] = Some((1.0 - x, y));
        }
    }

    let pts: Vec<(f64, f64)> = placed.into_iter().map(|p| p.expect("placed")).collect();
    let n = pts.len() as f64;
    let cy = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let cx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    pts.into_iter()
        .map(|(x, y)| {
            let (x, y) = (x + 0.5 - cx, y + 0.5 - cy);
            [x, y, surface_z(x, y)]
        })
        .collect()
}

/// The upright, centered 512x512 synthetic face, no hair mask.
pub fn canonical_frame(timestamp: i64) -> LandmarkFrame {
    LandmarkFrame::new(
        timestamp,
        FIXTURE_SIZE,
        FIXTURE_SIZE,
        canonical_vertices(),
        None,
    )
    .expect("canonical fixture is valid")
}

/// The canonical face scaled into a frame of another size and aspect. The
/// face keeps its pixel proportions and stays centered.
pub fn canonical_frame_sized(timestamp: i64, width: u32, height: u32) -> LandmarkFrame {
    let side = width.min(height) as f64;
    let verts = canonical_vertices()
        .into_iter()
        .map(|[x, y, z]| {
            [
                0.5 + (x - 0.5) * side / width as f64,
                0.5 + (y - 0.5) * side / height as f64,
                z * side / width as f64,
            ]
        })
        .collect();
    LandmarkFrame::new(timestamp, width, height, verts, None).expect("sized fixture is valid")
}

fn vertex_centroid(frame: &LandmarkFrame) -> (f64, f64) {
    let n = frame.vertices().len() as f64;
    let a = frame.aspect();
    let (sx, sy) = frame
        .vertices()
        .iter()
        .fold((0.0, 0.0), |(sx, sy), v| (sx + v[0] * a, sy + v[1]));
    (sx / n, sy / n)
}

/// Rotates the mesh in the image plane by `degrees` about its centroid,
/// measured in pixel-isotropic space so the face stays rigid on any aspect.
pub fn rolled(frame: &LandmarkFrame, degrees: f64) -> LandmarkFrame {
    let a = frame.aspect();
    let (cx, cy) = vertex_centroid(frame);
    let (s, c) = degrees.to_radians().sin_cos();
    let verts = frame
        .vertices()
        .iter()
        .map(|v| {
            let (dx, dy) = (v[0] * a - cx, v[1] - cy);
            [(cx + c * dx - s * dy) / a, cy + s * dx + c * dy, v[2]]
        })
        .collect();
    frame.clone().with_vertices(verts).expect("rotation keeps count")
}

/// Adds uniform noise of half-width `amplitude` to every coordinate.
pub fn perturbed(frame: &LandmarkFrame, seed: u64, amplitude: f64) -> LandmarkFrame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let verts = frame
        .vertices()
        .iter()
        .map(|v| {
            [
                v[0] + rng.random_range(-amplitude..=amplitude),
                v[1] + rng.random_range(-amplitude..=amplitude),
                v[2] + rng.random_range(-amplitude..=amplitude),
            ]
        })
        .collect();
    frame.clone().with_vertices(verts).expect("noise keeps count")
}

/// Mask with hair on every pixel row above `hairline_y` (normalized).
pub fn hair_above(frame: &LandmarkFrame, hairline_y: f64) -> HairMask {
    let limit = hairline_y * frame.height() as f64;
    HairMask::from_fn(frame.width(), frame.height(), |_, row| {
        (row as f64 + 1.0) <= limit
    })
}

/// `count` frames of the canonical face with small per-frame jitter, spaced
/// `interval_us` apart.
pub fn jittered_stream(count: usize, interval_us: i64, seed: u64) -> Vec<LandmarkFrame> {
    let base = canonical_frame(0);
    (0..count)
        .map(|i| {
            perturbed(&base, seed.wrapping_add(i as u64), 0.002)
                .with_timestamp(i as i64 * interval_us)
        })
        .collect()
}
