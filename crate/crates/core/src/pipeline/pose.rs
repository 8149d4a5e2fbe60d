//! Rigid head-pose perturbation and the pose-sweep accuracy experiment.

use nalgebra::{Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::adl::{AtlasProgram, Complexity, Side};
use crate::evaluator::{evaluate_atlas, EvaluatedAtlas};
use crate::geometry::{GeometryError, LandmarkFrame, SemanticsConfig};

/// Rotation axis in frame coordinates: X to the right, Y down, Z into the
/// image. Rotation about Z stays in the image plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RotationAxis {
    X,
    Y,
    Z,
}

/// A rigid rotation about a fixed center, applied in pixel-isotropic space
/// (`x * aspect`, `y`, `z * aspect`) so the face does not shear on
/// non-square frames.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseRotation {
    center: Vector3<f64>,
    rotation: Rotation3<f64>,
    aspect: f64,
}

impl PoseRotation {
    /// Rotation about the 3D vertex centroid of `frame`.
    pub fn about_centroid(frame: &LandmarkFrame, axis: RotationAxis, degrees: f64) -> Self {
        let aspect = frame.aspect();
        let sum = frame
            .vertices()
            .iter()
            .fold(Vector3::zeros(), |acc, v| acc + iso(v, aspect));
        let unit = match axis {
            RotationAxis::X => Vector3::x_axis(),
            RotationAxis::Y => Vector3::y_axis(),
            RotationAxis::Z => Vector3::z_axis(),
        };
        Self {
            center: sum / frame.vertices().len() as f64,
            rotation: Rotation3::from_axis_angle(&unit, degrees.to_radians()),
            aspect,
        }
    }

    /// Maps a normalized `[x, y, z]` point.
    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        let p = self.rotation * (iso(&v, self.aspect) - self.center) + self.center;
        [p.x / self.aspect, p.y, p.z / self.aspect]
    }
}

fn iso(v: &[f64; 3], aspect: f64) -> Vector3<f64> {
    Vector3::new(v[0] * aspect, v[1], v[2] * aspect)
}

/// Rotates every vertex about the face centroid and projects orthographically
/// (the rotated z is kept). The hair mask is left as is. A zero angle returns
/// the frame unchanged.
pub fn pose_transform(frame: &LandmarkFrame, axis: RotationAxis, degrees: f64) -> LandmarkFrame {
    if degrees == 0.0 {
        return frame.clone();
    }
    let rot = PoseRotation::about_centroid(frame, axis, degrees);
    let verts = frame.vertices().iter().map(|v| rot.apply(*v)).collect();
    frame
        .clone()
        .with_vertices(verts)
        .expect("rotation keeps the vertex count")
}

/// The four poses of the sweep. Axis labels follow the source experiment:
/// pitch about X, roll about Y, yaw about Z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pose {
    Frontal,
    Pitch,
    Roll,
    Yaw,
}

pub const POSE_DEGREES: f64 = 10.0;

impl Pose {
    pub const ALL: [Pose; 4] = [Pose::Frontal, Pose::Pitch, Pose::Roll, Pose::Yaw];

    pub fn rotation(self) -> Option<(RotationAxis, f64)> {
        match self {
            Pose::Frontal => None,
            Pose::Pitch => Some((RotationAxis::X, POSE_DEGREES)),
            Pose::Roll => Some((RotationAxis::Y, POSE_DEGREES)),
            Pose::Yaw => Some((RotationAxis::Z, POSE_DEGREES)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointError {
    pub id: String,
    pub side: Side,
    pub class: Complexity,
    pub error_px: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassError {
    pub class: Complexity,
    pub points: usize,
    /// `None` when the class has no points.
    pub mean_px: Option<f64>,
    pub max_px: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoseResult {
    pub pose: Pose,
    pub degenerate: bool,
    pub classes: Vec<ClassError>,
    pub points: Vec<PointError>,
}

impl PoseResult {
    pub fn class(&self, class: Complexity) -> &ClassError {
        self.classes
            .iter()
            .find(|c| c.class == class)
            .expect("every class reported")
    }

    /// Whether mean error is non-decreasing from Direct to MultiTime, with
    /// slack `tol` pixels. Empty classes are skipped.
    pub fn ordering_holds(&self, tol: f64) -> bool {
        let means: Vec<f64> = self.classes.iter().filter_map(|c| c.mean_px).collect();
        means.windows(2).all(|w| w[0] <= w[1] + tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoseSweepReport {
    /// How ground truth was obtained.
    pub ground_truth: &'static str,
    pub degrees: f64,
    pub poses: Vec<PoseResult>,
    /// Per-class mean over all non-degenerate poses.
    pub overall: Vec<ClassError>,
}

impl PoseSweepReport {
    pub fn pose(&self, pose: Pose) -> &PoseResult {
        self.poses.iter().find(|p| p.pose == pose).expect("every pose reported")
    }
}

const GROUND_TRUTH: &str = "frontal evaluation lifted onto the mesh surface and carried through the same rigid rotation as the vertices";

/// Depth at a normalized image point, by inverse-distance weighting of the
/// nearest mesh vertices.
pub fn surface_depth(frame: &LandmarkFrame, x: f64, y: f64) -> f64 {
    const K: usize = 4;
    let a = frame.aspect();
    let mut nearest: Vec<(f64, f64)> = frame
        .vertices()
        .iter()
        .map(|v| {
            let (dx, dy) = ((v[0] - x) * a, v[1] - y);
            (dx * dx + dy * dy, v[2])
        })
        .collect();
    nearest.sort_by(|p, q| p.0.total_cmp(&q.0));
    if nearest[0].0 < 1e-24 {
        return nearest[0].1;
    }
    let (num, den) = nearest[..K]
        .iter()
        .fold((0.0, 0.0), |(n, d), &(d2, z)| (n + z / d2, d + 1.0 / d2));
    num / den
}

fn summarize(points: &[PointError]) -> Vec<ClassError> {
    Complexity::ALL
        .iter()
        .map(|&class| {
            let errs: Vec<f64> = points
                .iter()
                .filter(|p| p.class == class)
                .map(|p| p.error_px)
                .collect();
            ClassError {
                class,
                points: errs.len(),
                mean_px: (!errs.is_empty()).then(|| errs.iter().sum::<f64>() / errs.len() as f64),
                max_px: errs.iter().copied().reduce(f64::max),
            }
        })
        .collect()
}

/// Evaluates the atlas on the frontal fixture and on each rotated pose and
/// compares against the rigidly carried frontal result, in pixels.
pub fn accuracy_experiment(
    program: &AtlasProgram,
    fixture: &LandmarkFrame,
    cfg: &SemanticsConfig,
) -> Result<PoseSweepReport, GeometryError> {
    let frontal = evaluate_atlas(program, fixture, cfg);
    if frontal.degenerate {
        return Err(GeometryError::DegenerateFace("frontal fixture"));
    }
    let lifted: Vec<[f64; 3]> = frontal
        .points
        .iter()
        .map(|p| {
            let n = p.position_norm;
            [n.x, n.y, surface_depth(fixture, n.x, n.y)]
        })
        .collect();
    let (w, h) = (fixture.width() as f64, fixture.height() as f64);

    let mut poses = Vec::new();
    let mut all = Vec::new();
    for pose in Pose::ALL {
        let (posed, truth): (LandmarkFrame, Vec<[f64; 2]>) = match pose.rotation() {
            None => (
                fixture.clone(),
                frontal
                    .points
                    .iter()
                    .map(|p| [p.position_px.x, p.position_px.y])
                    .collect(),
            ),
            Some((axis, deg)) => {
                let rot = PoseRotation::about_centroid(fixture, axis, deg);
                (
                    pose_transform(fixture, axis, deg),
                    lifted
                        .iter()
                        .map(|&v| {
                            let q = rot.apply(v);
                            [q[0] * w, q[1] * h]
                        })
                        .collect(),
                )
            }
        };
        let measured: EvaluatedAtlas = evaluate_atlas(program, &posed, cfg);
        if measured.degenerate {
            poses.push(PoseResult {
                pose,
                degenerate: true,
                classes: summarize(&[]),
                points: Vec::new(),
            });
            continue;
        }
        let points: Vec<PointError> = frontal
            .points
            .iter()
            .zip(&truth)
            .map(|(p, t)| {
                let m = measured
                    .point(&p.id, p.side)
                    .expect("same program yields the same points")
                    .position_px;
                PointError {
                    id: p.id.to_string(),
                    side: p.side,
                    class: program.complexity(&p.id).expect("id from program"),
                    error_px: (m.x - t[0]).hypot(m.y - t[1]),
                }
            })
            .collect();
        all.extend(points.iter().cloned());
        poses.push(PoseResult {
            pose,
            degenerate: false,
            classes: summarize(&points),
            points,
        });
    }

    Ok(PoseSweepReport {
        ground_truth: GROUND_TRUTH,
        degrees: POSE_DEGREES,
        poses,
        overall: summarize(&all),
    })
}
