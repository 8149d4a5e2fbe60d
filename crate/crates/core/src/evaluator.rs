//! Evaluates a compiled atlas against one frame.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adl::{AtlasProgram, Axis, Expr, Lowered, PointId, Reference, Side, Slot};
use crate::geometry::{
    align_frame, extract_hairline, extract_reference_points, mirror_about, unit_cun, Confidence,
    LandmarkFrame, Point, ReferencePoints, SemanticsConfig,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("reference {0} cannot be resolved")]
    Unresolved(String),
}

/// Resolved positions of one definition, in aligned space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Instance {
    Center(Point),
    Pair { left: Point, right: Point },
}

impl Instance {
    fn get(&self, side: Side) -> Option<Point> {
        match (self, side) {
            (Instance::Center(p), Side::Center) => Some(*p),
            (Instance::Pair { left, .. }, Side::Left) => Some(*left),
            (Instance::Pair { right, .. }, Side::Right) => Some(*right),
            _ => None,
        }
    }
}

/// Per-call evaluation state: aligned vertices, hairline, cun and the table of
/// points resolved so far (indexed by definition position).
#[derive(Debug)]
pub struct EvalEnvironment<'a> {
    program: &'a AtlasProgram,
    vertices: &'a [Point],
    hairline: Point,
    cun: f64,
    table: Vec<Option<Instance>>,
}

impl<'a> EvalEnvironment<'a> {
    pub fn new(program: &'a AtlasProgram, vertices: &'a [Point], hairline: Point, cun: f64) -> Self {
        Self {
            program,
            vertices,
            hairline,
            cun,
            table: vec![None; program.len()],
        }
    }

    pub fn cun(&self) -> f64 {
        self.cun
    }

    /// Records a resolved definition. Each definition is inserted once.
    pub fn insert(&mut self, def_index: usize, instance: Instance) {
        assert!(
            self.table[def_index].is_none(),
            "point {} inserted twice",
            self.program.definitions()[def_index].id
        );
        self.table[def_index] = Some(instance);
    }

    /// Inserts by id; convenient for hand-built environments.
    pub fn insert_point(&mut self, id: &PointId, instance: Instance) -> Result<(), EvalError> {
        let i = self
            .program
            .position(id)
            .ok_or_else(|| EvalError::Unresolved(id.to_string()))?;
        self.insert(i, instance);
        Ok(())
    }

    pub fn lookup(&self, id: &PointId, side: Side) -> Option<Point> {
        let i = self.program.position(id)?;
        self.table[i].as_ref()?.get(side)
    }

    fn slot_point(&self, slot: Slot) -> Point {
        match slot {
            Slot::Mesh(i) => self.vertices[i],
            Slot::Hairline => self.hairline,
            Slot::Point(i, side) => self.table[i]
                .as_ref()
                .and_then(|inst| inst.get(side))
                .unwrap_or_else(|| {
                    panic!(
                        "point {} read before evaluation",
                        self.program.definitions()[i].id
                    )
                }),
        }
    }

    fn eval_lowered(&self, e: &Lowered) -> f64 {
        match e {
            Lowered::Num(v) => *v,
            Lowered::Cun => self.cun,
            Lowered::Coord(axis, slot) => pick(self.slot_point(*slot), *axis),
            Lowered::Neg(x) => -self.eval_lowered(x),
            Lowered::Add(l, r) => self.eval_lowered(l) + self.eval_lowered(r),
            Lowered::Sub(l, r) => self.eval_lowered(l) - self.eval_lowered(r),
            Lowered::Mul(l, r) => self.eval_lowered(l) * self.eval_lowered(r),
        }
    }
}

fn pick(p: Point, axis: Axis) -> f64 {
    match axis {
        Axis::X => p.x,
        Axis::Y => p.y,
    }
}

/// Evaluates an expression tree for the instance on `side`. Unqualified
/// references to symmetric points bind to `side`.
pub fn evaluate_expression(e: &Expr, env: &EvalEnvironment<'_>, side: Side) -> Result<f64, EvalError> {
    Ok(match e {
        Expr::Num(v) => *v,
        Expr::Cun => env.cun,
        Expr::Coord(axis, r) => {
            let p = match r {
                Reference::Mesh(i) => *env
                    .vertices
                    .get(*i as usize)
                    .ok_or_else(|| EvalError::Unresolved(r.to_string()))?,
                Reference::Hairline => env.hairline,
                Reference::Point { id, side: q } => {
                    let def = env
                        .program
                        .get(id)
                        .ok_or_else(|| EvalError::Unresolved(r.to_string()))?;
                    let s = match q {
                        Some(s) => *s,
                        None if def.is_symmetric => side,
                        None => Side::Center,
                    };
                    env.lookup(id, s)
                        .ok_or_else(|| EvalError::Unresolved(r.to_string()))?
                }
            };
            pick(p, *axis)
        }
        Expr::Neg(x) => -evaluate_expression(x, env, side)?,
        Expr::Add(l, r) => evaluate_expression(l, env, side)? + evaluate_expression(r, env, side)?,
        Expr::Sub(l, r) => evaluate_expression(l, env, side)? - evaluate_expression(r, env, side)?,
        Expr::Mul(l, r) => evaluate_expression(l, env, side)? * evaluate_expression(r, env, side)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluatedPoint {
    pub id: PointId,
    pub side: Side,
    pub position_px: Point,
    pub position_norm: Point,
    /// Position in aligned space.
    pub aligned: Point,
    pub confidence: Confidence,
    pub channel: String,
    pub name_en: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluatedAtlas {
    pub timestamp: i64,
    pub points: Vec<EvaluatedPoint>,
    /// Cun used, aligned units; `None` when degenerate.
    pub uc: Option<f64>,
    pub degenerate: bool,
    /// Aligned midline and reference points, absent when degenerate.
    pub references: Option<ReferencePoints>,
    pub midline_x: Option<f64>,
}

impl EvaluatedAtlas {
    pub fn degenerate(timestamp: i64) -> Self {
        Self {
            timestamp,
            points: Vec::new(),
            uc: None,
            degenerate: true,
            references: None,
            midline_x: None,
        }
    }

    pub fn point(&self, id: &PointId, side: Side) -> Option<&EvaluatedPoint> {
        self.points.iter().find(|p| &p.id == id && p.side == side)
    }

    pub fn to_record(&self) -> AtlasRecord {
        AtlasRecord {
            ts: self.timestamp,
            uc: self.uc,
            degenerate: self.degenerate,
            points: self
                .points
                .iter()
                .map(|p| PointRecord {
                    id: p.id.to_string(),
                    side: p.side,
                    name: p.name_en.clone(),
                    channel: p.channel.clone(),
                    px: [p.position_px.x, p.position_px.y],
                    norm: [p.position_norm.x, p.position_norm.y],
                    conf: p.confidence,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_record()).expect("atlas serializes")
    }
}

/// Wire form of an evaluated atlas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtlasRecord {
    pub ts: i64,
    pub uc: Option<f64>,
    pub degenerate: bool,
    pub points: Vec<PointRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub id: String,
    pub side: Side,
    pub name: String,
    pub channel: String,
    pub px: [f64; 2],
    pub norm: [f64; 2],
    pub conf: Confidence,
}

/// Wall time spent in each stage of one evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageDurations {
    pub alignment: Duration,
    pub hairline: Duration,
    pub evaluation: Duration,
}

pub fn evaluate_atlas(
    program: &AtlasProgram,
    frame: &LandmarkFrame,
    cfg: &SemanticsConfig,
) -> EvaluatedAtlas {
    evaluate_atlas_timed(program, frame, cfg).0
}

/// Same as [`evaluate_atlas`], also reporting per-stage wall time.
pub fn evaluate_atlas_timed(
    program: &AtlasProgram,
    frame: &LandmarkFrame,
    cfg: &SemanticsConfig,
) -> (EvaluatedAtlas, StageDurations) {
    let mut timing = StageDurations::default();
    let t0 = Instant::now();
    let aligned = match align_frame(frame, cfg) {
        Ok(a) => a,
        Err(_) => return (EvaluatedAtlas::degenerate(frame.timestamp()), timing),
    };
    let t1 = Instant::now();
    timing.alignment = t1 - t0;
    let hairline = extract_hairline(frame, &aligned, cfg);
    let refs = extract_reference_points(&aligned, &hairline, cfg).and_then(|r| {
        let uc = unit_cun(&r)?;
        Ok((r, uc))
    });
    let t2 = Instant::now();
    timing.hairline = t2 - t1;
    let Ok((refs, uc)) = refs else {
        return (EvaluatedAtlas::degenerate(frame.timestamp()), timing);
    };

    let midline_x = aligned.midline_x();
    let mut env = EvalEnvironment::new(program, aligned.vertices(), refs.rhd2, uc.value());
    for &i in program.evaluation_order() {
        let [lx, ly] = program.lowered(i);
        let p = Point::new(env.eval_lowered(lx), env.eval_lowered(ly));
        let instance = if program.definitions()[i].is_symmetric {
            Instance::Pair {
                left: mirror_about(p, midline_x),
                right: p,
            }
        } else {
            Instance::Center(p)
        };
        env.insert(i, instance);
    }

    let mut points = Vec::with_capacity(program.instance_count());
    for (i, def) in program.definitions().iter().enumerate() {
        let confidence =
            if program.depends_on_hairline(i) && refs.rhd2_confidence == Confidence::Estimated {
                Confidence::Estimated
            } else {
                Confidence::Measured
            };
        let instances: &[(Side, Point)] = &match env.table[i].expect("every point evaluated") {
            Instance::Center(p) => vec![(Side::Center, p)],
            Instance::Pair { left, right } => vec![(Side::Left, left), (Side::Right, right)],
        };
        for &(side, aligned_pt) in instances {
            let norm = aligned.aligned_to_norm(aligned_pt);
            points.push(EvaluatedPoint {
                id: def.id.clone(),
                side,
                position_px: Point::new(
                    norm.x * frame.width() as f64,
                    norm.y * frame.height() as f64,
                ),
                position_norm: norm,
                aligned: aligned_pt,
                confidence,
                channel: def.id.channel().to_string(),
                name_en: def.name_en.clone(),
            });
        }
    }
    timing.evaluation = t2.elapsed();

    (
        EvaluatedAtlas {
            timestamp: frame.timestamp(),
            points,
            uc: Some(uc.value()),
            degenerate: false,
            references: Some(refs),
            midline_x: Some(midline_x),
        },
        timing,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adl::{load_atlas, parse_expression};
    use crate::fixture;

    const HEADER: &str = "Channel,ID,NameE,Region,FaceMeshX,FaceMeshY,IsSymmetry,Comments\n";

    fn table_program() -> AtlasProgram {
        load_atlas(&format!(
            "{HEADER}RHD,3,Pupil,eye,GetX(M263),GetY(M263),TRUE,-\n\
             ST,1,Chengqi,eye,GetX(RHD3),GetY(RHD3)+1*U,TRUE,-\n\
             ST,2,Sibai,eye,GetX(RHD3),GetY(ST1)+0.5*U,TRUE,-\n"
        ))
        .unwrap()
    }

    fn id(s: &str) -> PointId {
        s.parse().unwrap()
    }

    #[test]
    fn expression_examples() {
        let program = table_program();
        let vertices = vec![Point::origin(); 468];
        let mut env = EvalEnvironment::new(&program, &vertices, Point::new(0.5, 0.1), 0.1);
        env.insert_point(
            &id("RHD3"),
            Instance::Pair {
                left: Point::new(0.60, 0.45),
                right: Point::new(0.40, 0.45),
            },
        )
        .unwrap();
        env.insert_point(
            &id("ST1"),
            Instance::Pair {
                left: Point::new(0.60, 0.50),
                right: Point::new(0.40, 0.50),
            },
        )
        .unwrap();

        let half_cun = parse_expression("0.5*U").unwrap();
        assert!((evaluate_expression(&half_cun, &env, Side::Right).unwrap() - 0.05).abs() < 1e-15);
        let y_st1 = parse_expression("GetY(ST1)").unwrap();
        assert_eq!(evaluate_expression(&y_st1, &env, Side::Right).unwrap(), 0.5);
        let sibai_y = parse_expression("GetY(ST1)+0.5*U").unwrap();
        assert!((evaluate_expression(&sibai_y, &env, Side::Right).unwrap() - 0.55).abs() < 1e-15);
        let sibai_x = parse_expression("GetX(RHD3)").unwrap();
        assert_eq!(evaluate_expression(&sibai_x, &env, Side::Right).unwrap(), 0.40);
        assert_eq!(evaluate_expression(&sibai_x, &env, Side::Left).unwrap(), 0.60);
        let cross = parse_expression("GetX(RHD3.L)").unwrap();
        assert_eq!(evaluate_expression(&cross, &env, Side::Right).unwrap(), 0.60);

        let missing = parse_expression("GetX(ST2)").unwrap();
        assert!(evaluate_expression(&missing, &env, Side::Right).is_err());
    }

    #[test]
    #[should_panic(expected = "inserted twice")]
    fn double_insert_panics() {
        let program = table_program();
        let vertices = vec![Point::origin(); 468];
        let mut env = EvalEnvironment::new(&program, &vertices, Point::origin(), 0.1);
        env.insert(0, Instance::Center(Point::origin()));
        env.insert(0, Instance::Center(Point::origin()));
    }

    #[test]
    fn sample_atlas_point_count_and_pixels() {
        let program = load_atlas(fixture::SAMPLE_ATLAS_CSV).unwrap();
        let frame = fixture::canonical_frame_sized(7, 640, 480);
        let atlas = evaluate_atlas(&program, &frame, &SemanticsConfig::default());
        assert!(!atlas.degenerate);
        assert_eq!(atlas.timestamp, 7);
        assert_eq!(atlas.points.len(), program.instance_count());
        for p in &atlas.points {
            assert!((p.position_px.x / 640.0 - p.position_norm.x).abs() < 1e-9);
            assert!((p.position_px.y / 480.0 - p.position_norm.y).abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_frame_yields_empty_atlas() {
        let program = load_atlas(fixture::SAMPLE_ATLAS_CSV).unwrap();
        let cfg = SemanticsConfig::default();
        let frame = fixture::canonical_frame(3);
        let collapsed = frame.with_vertices(vec![[0.5, 0.5, 0.0]; 468]).unwrap();
        let atlas = evaluate_atlas(&program, &collapsed, &cfg);
        assert!(atlas.degenerate);
        assert!(atlas.points.is_empty());
        assert_eq!(atlas.uc, None);
        let json: serde_json::Value = serde_json::from_str(&atlas.to_json()).unwrap();
        assert_eq!(json["degenerate"], true);
        assert_eq!(json["ts"], 3);
    }

    #[test]
    fn estimated_hairline_marks_dependents() {
        let program = load_atlas(fixture::SAMPLE_ATLAS_CSV).unwrap();
        let atlas = evaluate_atlas(
            &program,
            &fixture::canonical_frame(0),
            &SemanticsConfig::default(),
        );
        for p in &atlas.points {
            let expected = if p.id.to_string() == "RHD1" || p.id.to_string() == "RHD3" {
                Confidence::Measured
            } else {
                Confidence::Estimated
            };
            assert_eq!(p.confidence, expected, "{}", p.id);
        }

        let frame = fixture::canonical_frame(0);
        let mask = fixture::hair_above(&frame, 0.22);
        let with_hair = frame.with_hair_mask(Some(mask)).unwrap();
        let atlas = evaluate_atlas(&program, &with_hair, &SemanticsConfig::default());
        assert!(atlas
            .points
            .iter()
            .all(|p| p.confidence == Confidence::Measured));
    }

    #[test]
    fn wire_format_fields() {
        let program = load_atlas(fixture::SAMPLE_ATLAS_CSV).unwrap();
        let atlas = evaluate_atlas(
            &program,
            &fixture::canonical_frame(11),
            &SemanticsConfig::default(),
        );
        let v: serde_json::Value = serde_json::from_str(&atlas.to_json()).unwrap();
        let p = &v["points"][0];
        for key in ["id", "side", "name", "channel", "px", "norm", "conf"] {
            assert!(p.get(key).is_some(), "missing {key}");
        }
        assert_eq!(p["id"], "RHD1");
        assert_eq!(p["side"], "center");
        assert_eq!(p["conf"], "measured");
        let back: AtlasRecord = serde_json::from_value(v).unwrap();
        assert_eq!(back, atlas.to_record());
    }
}
