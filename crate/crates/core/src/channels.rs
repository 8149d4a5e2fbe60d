//! Meridian channel registry, selection and flow polylines.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adl::{compile_atlas, AtlasProgram, PointId, Reference, Side};
use crate::evaluator::EvaluatedAtlas;

pub const CHANNELS_HEADER: [&str; 4] = ["Code", "DisplayName", "Flow", "ColorHint"];

const PALETTE: [[u8; 3]; 8] = [
    [0x1E, 0x88, 0xE5],
    [0x43, 0xA0, 0x47],
    [0xFB, 0x8C, 0x00],
    [0x8E, 0x24, 0xAA],
    [0x00, 0xAC, 0xC1],
    [0xD8, 0x1B, 0x60],
    [0x6D, 0x4C, 0x41],
    [0xC0, 0xCA, 0x33],
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub code: String,
    pub display_name: String,
    pub flow: Vec<PointId>,
    pub color_hint: [u8; 3],
}

impl ChannelSpec {
    pub fn color_hex(&self) -> String {
        let [r, g, b] = self.color_hint;
        format!("#{r:02X}{g:02X}{b:02X}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChannelError {
    #[error("channel file header must be {expected:?}, found {found:?}")]
    BadHeader { expected: String, found: String },
    #[error("line {line}: {reason}")]
    BadRow { line: u64, reason: String },
    #[error("line {line}: {id} appears twice in the flow of {code}")]
    DuplicateFlowEntry { line: u64, code: String, id: PointId },
    #[error("line {line}: channel {code} declared twice")]
    DuplicateChannel { line: u64, code: String },
    #[error("channel {code}: flow references {id}, which the atlas does not define")]
    UnknownPoint { code: String, id: PointId },
}

pub fn parse_color(text: &str) -> Option<[u8; 3]> {
    let hex = text.strip_prefix('#')?;
    if hex.len() != 6 || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
        return None;
    }
    let byte = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).ok();
    Some([byte(0)?, byte(2)?, byte(4)?])
}

/// Parses the channel registry CSV. All row problems are reported together.
pub fn parse_channels(text: &str) -> Result<Vec<ChannelSpec>, Vec<ChannelError>> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| {
            vec![ChannelError::BadRow {
                line: 1,
                reason: e.to_string(),
            }]
        })?
        .clone();
    if header.iter().map(str::trim).ne(CHANNELS_HEADER) {
        return Err(vec![ChannelError::BadHeader {
            expected: CHANNELS_HEADER.join(","),
            found: header.iter().collect::<Vec<_>>().join(","),
        }]);
    }

    let mut specs: Vec<ChannelSpec> = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    let mut errors = Vec::new();
    for record in reader.records() {
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                errors.push(ChannelError::BadRow {
                    line,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let bad = |reason: String| ChannelError::BadRow { line, reason };
        if record.len() != 4 {
            errors.push(bad(format!("expected 4 fields, found {}", record.len())));
            continue;
        }
        let code = record[0].trim().to_string();
        if !crate::adl::is_channel_code(&code) {
            errors.push(bad(format!("bad channel code {code:?}")));
            continue;
        }
        if !seen.insert(code.clone()) {
            errors.push(ChannelError::DuplicateChannel { line, code });
            continue;
        }
        let mut flow = Vec::new();
        let mut row_ok = true;
        for part in record[2].split(';').map(str::trim).filter(|p| !p.is_empty()) {
            match part.parse::<PointId>() {
                Ok(id) if flow.contains(&id) => {
                    errors.push(ChannelError::DuplicateFlowEntry {
                        line,
                        code: code.clone(),
                        id,
                    });
                    row_ok = false;
                }
                Ok(id) => flow.push(id),
                Err(e) => {
                    errors.push(bad(format!("flow entry {part:?}: {e}")));
                    row_ok = false;
                }
            }
        }
        let Some(color_hint) = parse_color(record[3].trim()) else {
            errors.push(bad(format!("color {:?} is not #RRGGBB", &record[3])));
            continue;
        };
        if row_ok {
            specs.push(ChannelSpec {
                code,
                display_name: record[1].trim().to_string(),
                flow,
                color_hint,
            });
        }
    }
    if errors.is_empty() {
        Ok(specs)
    } else {
        Err(errors)
    }
}

/// Channel specs checked against a program, one per program channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelRegistry {
    specs: Vec<ChannelSpec>,
}

impl ChannelRegistry {
    /// Binds `specs` to `program`. Channels the file omits get a flow of
    /// ascending point index and a palette color.
    pub fn bind(specs: &[ChannelSpec], program: &AtlasProgram) -> Result<Self, Vec<ChannelError>> {
        let errors: Vec<_> = specs
            .iter()
            .flat_map(|s| {
                s.flow
                    .iter()
                    .filter(|id| program.get(id).is_none())
                    .map(|id| ChannelError::UnknownPoint {
                        code: s.code.clone(),
                        id: id.clone(),
                    })
            })
            .collect();
        if !errors.is_empty() {
            return Err(errors);
        }
        let mut out: Vec<ChannelSpec> = Vec::new();
        for (k, code) in program.channels().iter().enumerate() {
            match specs.iter().find(|s| &s.code == code) {
                Some(s) => out.push(s.clone()),
                None => out.push(default_spec(code, program, PALETTE[k % PALETTE.len()])),
            }
        }
        for s in specs {
            if !out.iter().any(|o| o.code == s.code) {
                out.push(s.clone());
            }
        }
        Ok(Self { specs: out })
    }

    /// Registry built from defaults only.
    pub fn defaults(program: &AtlasProgram) -> Self {
        Self::bind(&[], program).expect("defaults always bind")
    }

    pub fn specs(&self) -> &[ChannelSpec] {
        &self.specs
    }

    pub fn get(&self, code: &str) -> Option<&ChannelSpec> {
        self.specs.iter().find(|s| s.code == code)
    }
}

fn default_spec(code: &str, program: &AtlasProgram, color_hint: [u8; 3]) -> ChannelSpec {
    let mut flow: Vec<PointId> = program
        .definitions()
        .iter()
        .map(|d| d.id.clone())
        .filter(|id| id.channel() == code)
        .collect();
    flow.sort_by_key(PointId::index);
    ChannelSpec {
        code: code.to_string(),
        display_name: code.to_string(),
        flow,
        color_hint,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub channel: String,
    pub side: Side,
    pub points: Vec<[f64; 2]>,
}

/// Pixel polylines for one channel. Symmetric channels give a Left and a
/// Right chain (center points join both), others a single Center chain. A
/// flow entry absent from `atlas` splits the chain.
pub fn channel_polylines(spec: &ChannelSpec, atlas: &EvaluatedAtlas) -> Vec<Polyline> {
    if atlas.degenerate {
        return Vec::new();
    }
    let bilateral = spec.flow.iter().any(|id| {
        atlas
            .points
            .iter()
            .any(|p| &p.id == id && p.side != Side::Center)
    });
    let sides: &[Side] = if bilateral {
        &[Side::Left, Side::Right]
    } else {
        &[Side::Center]
    };

    let mut out = Vec::new();
    for &side in sides {
        let mut chain: Vec<[f64; 2]> = Vec::new();
        for id in &spec.flow {
            let found = atlas
                .point(id, side)
                .or_else(|| atlas.point(id, Side::Center));
            match found {
                Some(p) => chain.push([p.position_px.x, p.position_px.y]),
                None if !chain.is_empty() => out.push(Polyline {
                    channel: spec.code.clone(),
                    side,
                    points: std::mem::take(&mut chain),
                }),
                None => {}
            }
        }
        if !chain.is_empty() {
            out.push(Polyline {
                channel: spec.code.clone(),
                side,
                points: chain,
            });
        }
    }
    out
}

/// Polylines for every registered channel present in the selection.
pub fn registry_polylines(
    registry: &ChannelRegistry,
    selection: &ChannelSelection,
    atlas: &EvaluatedAtlas,
) -> Vec<Polyline> {
    registry
        .specs()
        .iter()
        .filter(|s| selection.contains_channel(&s.code))
        .flat_map(|s| channel_polylines(s, atlas))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SelectionDiagnostic {
    UnknownChannel(String),
}

impl fmt::Display for SelectionDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionDiagnostic::UnknownChannel(c) => write!(f, "unknown channel {c:?}"),
        }
    }
}

/// The point ids of the selected channels, in file order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelSelection {
    channels: BTreeSet<String>,
    ids: Vec<PointId>,
    pub diagnostics: Vec<SelectionDiagnostic>,
}

/// Selects channels by code. An empty set selects every channel; unknown
/// codes are reported and otherwise ignored.
pub fn select_channels<S: AsRef<str>>(codes: &[S], program: &AtlasProgram) -> ChannelSelection {
    let known: BTreeSet<&str> = program.channels().iter().map(String::as_str).collect();
    let mut diagnostics = Vec::new();
    let mut channels = BTreeSet::new();
    for code in codes {
        let code = code.as_ref().trim();
        if known.contains(code) {
            channels.insert(code.to_string());
        } else if !diagnostics.contains(&SelectionDiagnostic::UnknownChannel(code.to_string())) {
            diagnostics.push(SelectionDiagnostic::UnknownChannel(code.to_string()));
        }
    }
    if codes.is_empty() {
        channels = known.iter().map(|c| c.to_string()).collect();
    }
    let ids = program
        .definitions()
        .iter()
        .filter(|d| channels.contains(d.id.channel()))
        .map(|d| d.id.clone())
        .collect();
    ChannelSelection {
        channels,
        ids,
        diagnostics,
    }
}

impl ChannelSelection {
    pub fn ids(&self) -> &[PointId] {
        &self.ids
    }

    pub fn channels(&self) -> impl Iterator<Item = &str> {
        self.channels.iter().map(String::as_str)
    }

    pub fn contains_channel(&self, code: &str) -> bool {
        self.channels.contains(code)
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Keeps only the selected points.
    pub fn filter(&self, atlas: &EvaluatedAtlas) -> EvaluatedAtlas {
        let mut out = atlas.clone();
        out.points.retain(|p| self.channels.contains(p.id.channel()));
        out
    }

    /// The smallest program that still evaluates every selected point: the
    /// selection plus its transitive dependencies, in file order.
    pub fn subprogram(&self, program: &AtlasProgram) -> AtlasProgram {
        let mut keep: HashSet<PointId> = HashSet::new();
        let mut stack: Vec<PointId> = self.ids.clone();
        while let Some(id) = stack.pop() {
            if !keep.insert(id.clone()) {
                continue;
            }
            let def = program.get(&id).expect("selected ids come from the program");
            for r in def.expr_x.references().into_iter().chain(def.expr_y.references()) {
                if let Reference::Point { id, .. } = r {
                    stack.push(id.clone());
                }
            }
        }
        let defs = program
            .definitions()
            .iter()
            .filter(|d| keep.contains(&d.id))
            .cloned()
            .collect();
        compile_atlas(defs).expect("closed subset of a valid program compiles")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adl::load_atlas;
    use crate::evaluator::evaluate_atlas;
    use crate::fixture;
    use crate::geometry::SemanticsConfig;

    fn program() -> AtlasProgram {
        load_atlas(fixture::SAMPLE_ATLAS_CSV).unwrap()
    }

    fn id(s: &str) -> PointId {
        s.parse().unwrap()
    }

    fn spec(code: &str, flow: &[&str]) -> ChannelSpec {
        ChannelSpec {
            code: code.into(),
            display_name: code.into(),
            flow: flow.iter().map(|s| id(s)).collect(),
            color_hint: [0, 0, 0],
        }
    }

    #[test]
    fn parses_bundled_channel_file() {
        let specs = parse_channels(fixture::SAMPLE_CHANNELS_CSV).unwrap();
        assert_eq!(specs.len(), 2);
        assert_eq!(specs[1].code, "ST");
        assert_eq!(specs[1].flow, vec![id("ST1"), id("ST2"), id("ST3")]);
        assert_eq!(specs[1].color_hex(), "#E53935");
        assert_eq!(specs[0].flow, vec![id("RHD2"), id("RHD1")]);
    }

    #[test]
    fn channel_file_errors_are_collected() {
        let text = "Code,DisplayName,Flow,ColorHint\n\
                    ST,Stomach,ST1;ST1,#000000\n\
                    GB,Gall,GB1,red\n\
                    ST,Again,,#000000\n";
        let errs = parse_channels(text).unwrap_err();
        assert_eq!(errs.len(), 3, "{errs:?}");
        assert!(matches!(errs[0], ChannelError::DuplicateFlowEntry { line: 2, .. }));
        assert!(matches!(errs[1], ChannelError::BadRow { line: 3, .. }));
        assert!(matches!(errs[2], ChannelError::DuplicateChannel { line: 4, .. }));

        let errs = parse_channels("Code,Name,Flow,ColorHint\n").unwrap_err();
        assert!(matches!(errs[0], ChannelError::BadHeader { .. }));
    }

    #[test]
    fn colors() {
        assert_eq!(parse_color("#E53935"), Some([0xE5, 0x39, 0x35]));
        assert_eq!(parse_color("E53935"), None);
        assert_eq!(parse_color("#E5393"), None);
        assert_eq!(parse_color("#GG0000"), None);
    }

    #[test]
    fn bind_reports_unknown_points_and_fills_defaults() {
        let p = program();
        let errs = ChannelRegistry::bind(&[spec("ST", &["ST1", "ST9"])], &p).unwrap_err();
        assert_eq!(
            errs,
            vec![ChannelError::UnknownPoint {
                code: "ST".into(),
                id: id("ST9")
            }]
        );
        let reg = ChannelRegistry::defaults(&p);
        assert_eq!(reg.get("RHD").unwrap().flow, vec![id("RHD1"), id("RHD2"), id("RHD3")]);
        assert_eq!(reg.get("ST").unwrap().flow, vec![id("ST1"), id("ST2"), id("ST3")]);
    }

    #[test]
    fn polylines_per_side_and_center() {
        let p = program();
        let atlas = evaluate_atlas(&p, &fixture::canonical_frame(0), &SemanticsConfig::default());
        let st = channel_polylines(&spec("ST", &["ST1", "ST2"]), &atlas);
        assert_eq!(st.len(), 2);
        assert!(st.iter().all(|l| l.points.len() == 2));
        assert_eq!(st[0].side, Side::Left);
        assert_eq!(st[1].side, Side::Right);

        let rhd = channel_polylines(&spec("RHD", &["RHD2", "RHD1"]), &atlas);
        assert_eq!(rhd.len(), 1);
        assert_eq!(rhd[0].side, Side::Center);
        assert_eq!(rhd[0].points.len(), 2);
    }

    #[test]
    fn missing_point_splits_chain() {
        let p = program();
        let mut atlas =
            evaluate_atlas(&p, &fixture::canonical_frame(0), &SemanticsConfig::default());
        atlas.points.retain(|q| q.id != id("ST2"));
        let lines = channel_polylines(&spec("ST", &["ST1", "ST2", "ST3"]), &atlas);
        assert_eq!(lines.len(), 4);
        assert!(lines.iter().all(|l| l.points.len() == 1));
    }

    #[test]
    fn selection_examples() {
        let p = program();
        let st = select_channels(&["ST"], &p);
        assert_eq!(st.ids(), &[id("ST1"), id("ST2"), id("ST3")]);
        assert!(st.diagnostics.is_empty());

        let none: [&str; 0] = [];
        assert_eq!(select_channels(&none, &p).ids().len(), p.len());

        let zz = select_channels(&["ZZ"], &p);
        assert!(zz.is_empty());
        assert_eq!(
            zz.diagnostics,
            vec![SelectionDiagnostic::UnknownChannel("ZZ".into())]
        );
    }

    #[test]
    fn subprogram_keeps_dependencies() {
        let p = program();
        let sub = select_channels(&["ST"], &p).subprogram(&p);
        let ids: Vec<String> = sub.definitions().iter().map(|d| d.id.to_string()).collect();
        assert_eq!(ids, ["RHD3", "ST1", "ST2", "ST3"]);
    }
}
