use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::ast::{Axis, Expr, PointId, Reference, Side};
use super::atlas_file::AcupointDef;
use crate::geometry::MESH_VERTEX_COUNT;

/// Channel code of the reference points.
pub const REFERENCE_CHANNEL: &str = "RHD";

/// Localization complexity, by how many proportional steps a point is away
/// from raw mesh vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Complexity {
    /// Built from mesh vertices only.
    Direct,
    /// Uses the cun or the hairline, and depends on direct points only.
    OneTimeProportional,
    /// Depends on at least one proportional point.
    MultiTimeProportional,
}

impl Complexity {
    pub const ALL: [Complexity; 3] = [
        Complexity::Direct,
        Complexity::OneTimeProportional,
        Complexity::MultiTimeProportional,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Complexity::Direct => "direct",
            Complexity::OneTimeProportional => "one-time",
            Complexity::MultiTimeProportional => "multi-time",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("dependency cycle: {}", format_cycle(.0))]
    Cycle(Vec<PointId>),
    #[error("{from}: reference to undefined point {to}")]
    UndefinedReference { from: PointId, to: PointId },
    #[error("{from}: {reason} ({to})")]
    SideAccess {
        from: PointId,
        to: PointId,
        reason: &'static str,
    },
    #[error("{from}: mesh index {index} is out of range (mesh has {MESH_VERTEX_COUNT} vertices)")]
    MeshIndex { from: PointId, index: u32 },
    #[error("{from} {column}: product of two lengths")]
    LengthProduct { from: PointId, column: &'static str },
    #[error("{from} {column}: adds a plain number to a length")]
    DimensionMismatch { from: PointId, column: &'static str },
    #[error("{from} {column}: expression is a plain number, not a coordinate")]
    NotACoordinate { from: PointId, column: &'static str },
}

fn format_cycle(ids: &[PointId]) -> String {
    let mut parts: Vec<String> = ids.iter().map(ToString::to_string).collect();
    if let Some(first) = ids.first() {
        parts.push(first.to_string());
    }
    parts.join(" -> ")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct CompileErrors(pub Vec<CompileError>);

impl fmt::Display for CompileErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} compile error(s)", self.0.len())?;
        for e in &self.0 {
            write!(f, "\n  {e}")?;
        }
        Ok(())
    }
}

/// Reference after name resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Slot {
    Mesh(usize),
    Hairline,
    /// Definition index in file order, with the instance to read.
    Point(usize, Side),
}

/// Expression with resolved references, ready for evaluation.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Lowered {
    Num(f64),
    Cun,
    Coord(Axis, Slot),
    Neg(Box<Lowered>),
    Add(Box<Lowered>, Box<Lowered>),
    Sub(Box<Lowered>, Box<Lowered>),
    Mul(Box<Lowered>, Box<Lowered>),
}

/// A compiled, immutable atlas.
#[derive(Debug, Clone)]
pub struct AtlasProgram {
    defs: Vec<AcupointDef>,
    index: HashMap<PointId, usize>,
    order: Vec<usize>,
    classes: Vec<Complexity>,
    hairline_dependent: Vec<bool>,
    lowered: Vec<[Lowered; 2]>,
    channels: Vec<String>,
}

impl AtlasProgram {
    pub fn definitions(&self) -> &[AcupointDef] {
        &self.defs
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    pub fn get(&self, id: &PointId) -> Option<&AcupointDef> {
        self.index.get(id).map(|&i| &self.defs[i])
    }

    pub fn position(&self, id: &PointId) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Definition indices (file order) in evaluation order.
    pub fn evaluation_order(&self) -> &[usize] {
        &self.order
    }

    pub fn evaluation_order_ids(&self) -> impl Iterator<Item = &PointId> {
        self.order.iter().map(|&i| &self.defs[i].id)
    }

    pub fn complexity(&self, id: &PointId) -> Option<Complexity> {
        self.index.get(id).map(|&i| self.classes[i])
    }

    pub fn complexity_at(&self, def_index: usize) -> Complexity {
        self.classes[def_index]
    }

    /// True when the point depends on the hairline, directly, through the
    /// cun, or through another point.
    pub fn depends_on_hairline(&self, def_index: usize) -> bool {
        self.hairline_dependent[def_index]
    }

    /// Channel codes in order of first appearance.
    pub fn channels(&self) -> &[String] {
        &self.channels
    }

    /// Number of evaluated instances: symmetric rows count twice.
    pub fn instance_count(&self) -> usize {
        self.defs
            .iter()
            .map(|d| if d.is_symmetric { 2 } else { 1 })
            .sum()
    }

    pub(crate) fn lowered(&self, def_index: usize) -> &[Lowered; 2] {
        &self.lowered[def_index]
    }

    /// Canonical JSON dump with sorted keys.
    pub fn to_canonical_json(&self) -> String {
        #[derive(Serialize)]
        struct DefDump<'a> {
            id: String,
            name: &'a str,
            region: &'a str,
            x: String,
            y: String,
            symmetric: bool,
            comments: &'a str,
            complexity: Complexity,
            hairline_dependent: bool,
        }
        #[derive(Serialize)]
        struct Dump<'a> {
            definitions: Vec<DefDump<'a>>,
            order: Vec<String>,
            channels: &'a [String],
        }
        let dump = Dump {
            definitions: self
                .defs
                .iter()
                .enumerate()
                .map(|(i, d)| DefDump {
                    id: d.id.to_string(),
                    name: &d.name_en,
                    region: &d.region,
                    x: d.expr_x.to_string(),
                    y: d.expr_y.to_string(),
                    symmetric: d.is_symmetric,
                    comments: &d.comments,
                    complexity: self.classes[i],
                    hairline_dependent: self.hairline_dependent[i],
                })
                .collect(),
            order: self.evaluation_order_ids().map(ToString::to_string).collect(),
            channels: &self.channels,
        };
        // Value maps are BTreeMaps, so keys come out sorted.
        let value = serde_json::to_value(&dump).expect("dump serializes");
        serde_json::to_string_pretty(&value).expect("value serializes")
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Dim {
    Scalar,
    Length,
}

fn dimension(e: &Expr) -> Result<Dim, &'static str> {
    Ok(match e {
        Expr::Num(_) => Dim::Scalar,
        Expr::Cun | Expr::Coord(..) => Dim::Length,
        Expr::Neg(x) => dimension(x)?,
        Expr::Add(l, r) | Expr::Sub(l, r) => {
            let (a, b) = (dimension(l)?, dimension(r)?);
            if a != b {
                return Err("mismatch");
            }
            a
        }
        Expr::Mul(l, r) => match (dimension(l)?, dimension(r)?) {
            (Dim::Length, Dim::Length) => return Err("product"),
            (Dim::Scalar, Dim::Scalar) => Dim::Scalar,
            _ => Dim::Length,
        },
    })
}

fn lower(
    e: &Expr,
    index: &HashMap<PointId, usize>,
    defs: &[AcupointDef],
    canonical: Side,
) -> Lowered {
    let rec = |x: &Expr| Box::new(lower(x, index, defs, canonical));
    match e {
        Expr::Num(v) => Lowered::Num(*v),
        Expr::Cun => Lowered::Cun,
        Expr::Coord(axis, r) => {
            let slot = match r {
                Reference::Mesh(i) => Slot::Mesh(*i as usize),
                Reference::Hairline => Slot::Hairline,
                Reference::Point { id, side } => {
                    let target = index[id];
                    let side = match side {
                        Some(s) => *s,
                        None if defs[target].is_symmetric => canonical,
                        None => Side::Center,
                    };
                    Slot::Point(target, side)
                }
            };
            Lowered::Coord(*axis, slot)
        }
        Expr::Neg(x) => Lowered::Neg(rec(x)),
        Expr::Add(l, r) => Lowered::Add(rec(l), rec(r)),
        Expr::Sub(l, r) => Lowered::Sub(rec(l), rec(r)),
        Expr::Mul(l, r) => Lowered::Mul(rec(l), rec(r)),
    }
}

/// Checks references and dimensions, orders the definitions so every point
/// follows the points it reads (ties keep file order), and classifies them.
pub fn compile_atlas(defs: Vec<AcupointDef>) -> Result<AtlasProgram, CompileErrors> {
    let index: HashMap<PointId, usize> = defs
        .iter()
        .enumerate()
        .map(|(i, d)| (d.id.clone(), i))
        .collect();
    let mut errors = Vec::new();
    let mut deps: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); defs.len()];
    let mut uses_hairline = vec![false; defs.len()];
    let mut uses_cun = vec![false; defs.len()];

    for (i, def) in defs.iter().enumerate() {
        for (column, e) in [("FaceMeshX", &def.expr_x), ("FaceMeshY", &def.expr_y)] {
            match dimension(e) {
                Ok(Dim::Length) => {}
                Ok(Dim::Scalar) => errors.push(CompileError::NotACoordinate {
                    from: def.id.clone(),
                    column,
                }),
                Err("product") => errors.push(CompileError::LengthProduct {
                    from: def.id.clone(),
                    column,
                }),
                Err(_) => errors.push(CompileError::DimensionMismatch {
                    from: def.id.clone(),
                    column,
                }),
            }
            uses_cun[i] |= e.uses_cun();
            for r in e.references() {
                match r {
                    Reference::Mesh(m) if *m as usize >= MESH_VERTEX_COUNT => {
                        errors.push(CompileError::MeshIndex {
                            from: def.id.clone(),
                            index: *m,
                        })
                    }
                    Reference::Mesh(_) => {}
                    Reference::Hairline => uses_hairline[i] = true,
                    Reference::Point { id, side } => {
                        let Some(&target) = index.get(id) else {
                            errors.push(CompileError::UndefinedReference {
                                from: def.id.clone(),
                                to: id.clone(),
                            });
                            continue;
                        };
                        let target_sym = defs[target].is_symmetric;
                        let problem = match side {
                            None if target_sym && !def.is_symmetric => Some(
                                "unqualified reference to a symmetric point from a non-symmetric definition; add .L or .R",
                            ),
                            Some(_) if !target_sym => {
                                Some("side qualifier on a non-symmetric point")
                            }
                            _ => None,
                        };
                        if let Some(reason) = problem {
                            errors.push(CompileError::SideAccess {
                                from: def.id.clone(),
                                to: id.clone(),
                                reason,
                            });
                        }
                        deps[i].insert(target);
                    }
                }
            }
        }
    }
    // A reference used in both columns is reported once.
    let mut unique: Vec<CompileError> = Vec::with_capacity(errors.len());
    for e in errors {
        if !unique.contains(&e) {
            unique.push(e);
        }
    }
    let errors = unique;
    if !errors.is_empty() {
        return Err(CompileErrors(errors));
    }

    let order = topological_order(&deps).map_err(|cycle| {
        CompileErrors(vec![CompileError::Cycle(
            cycle.into_iter().map(|i| defs[i].id.clone()).collect(),
        )])
    })?;

    let mut classes = vec![Complexity::Direct; defs.len()];
    let mut hairline_dependent = vec![false; defs.len()];
    for &i in &order {
        classes[i] = if deps[i].is_empty() && !uses_cun[i] && !uses_hairline[i] {
            Complexity::Direct
        } else if deps[i].iter().all(|&d| classes[d] == Complexity::Direct) {
            Complexity::OneTimeProportional
        } else {
            Complexity::MultiTimeProportional
        };
        hairline_dependent[i] =
            uses_cun[i] || uses_hairline[i] || deps[i].iter().any(|&d| hairline_dependent[d]);
    }

    let lowered = defs
        .iter()
        .map(|d| {
            let canonical = if d.is_symmetric {
                Side::Right
            } else {
                Side::Center
            };
            [
                lower(&d.expr_x, &index, &defs, canonical),
                lower(&d.expr_y, &index, &defs, canonical),
            ]
        })
        .collect();

    let mut channels: Vec<String> = Vec::new();
    for d in &defs {
        if !channels.iter().any(|c| c == d.id.channel()) {
            channels.push(d.id.channel().to_string());
        }
    }

    Ok(AtlasProgram {
        defs,
        index,
        order,
        classes,
        hairline_dependent,
        lowered,
        channels,
    })
}

/// Kahn's algorithm, always releasing the lowest ready index. On failure
/// returns one cycle as a list of indices.
fn topological_order(deps: &[BTreeSet<usize>]) -> Result<Vec<usize>, Vec<usize>> {
    let n = deps.len();
    let mut dependents: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut pending: Vec<usize> = deps.iter().map(BTreeSet::len).collect();
    for (i, ds) in deps.iter().enumerate() {
        for &d in ds {
            dependents[d].push(i);
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&i| pending[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(i)) = ready.pop() {
        order.push(i);
        for &p in &dependents[i] {
            pending[p] -= 1;
            if pending[p] == 0 {
                ready.push(Reverse(p));
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }

    // Every unplaced node still waits on an unplaced node, so walking first
    // unplaced dependencies must revisit a node.
    let placed: BTreeSet<usize> = order.into_iter().collect();
    let start = (0..n).find(|i| !placed.contains(i)).expect("unplaced node");
    let mut path = vec![start];
    let mut seen_at: HashMap<usize, usize> = HashMap::from([(start, 0)]);
    let mut cur = start;
    loop {
        let next = *deps[cur]
            .iter()
            .find(|d| !placed.contains(d))
            .expect("unplaced node has an unplaced dependency");
        if let Some(&pos) = seen_at.get(&next) {
            return Err(path[pos..].to_vec());
        }
        seen_at.insert(next, path.len());
        path.push(next);
        cur = next;
    }
}
