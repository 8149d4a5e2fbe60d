//! SVG overlay of an evaluated atlas.

use svg::node::element::path::Data;
use svg::node::element::{Circle, Group, Path, Rectangle, Text};
use svg::Document;

use crate::channels::{channel_polylines, ChannelRegistry, ChannelSelection};
use crate::evaluator::EvaluatedAtlas;
use crate::geometry::Confidence;

const POINT_RADIUS: f64 = 3.0;
const FALLBACK_COLOR: &str = "#9E9E9E";

/// Renders points as circles, channel flows as paths and ids as labels on
/// a canvas the size of the source frame. Estimated points are hollow.
pub fn render_overlay(
    atlas: &EvaluatedAtlas,
    registry: &ChannelRegistry,
    selection: &ChannelSelection,
    width: u32,
    height: u32,
) -> String {
    let mut doc = Document::new()
        .set("viewBox", (0, 0, width, height))
        .set("width", width)
        .set("height", height)
        .add(
            Rectangle::new()
                .set("width", width)
                .set("height", height)
                .set("fill", "#FAFAFA"),
        );

    let mut flows = Group::new().set("id", "flows").set("fill", "none");
    let mut dots = Group::new().set("id", "points");
    let mut labels = Group::new()
        .set("id", "labels")
        .set("font-family", "sans-serif")
        .set("font-size", 9);

    for spec in registry.specs() {
        if !selection.contains_channel(&spec.code) {
            continue;
        }
        for line in channel_polylines(spec, atlas) {
            if line.points.len() < 2 {
                continue;
            }
            let mut data = Data::new().move_to((line.points[0][0], line.points[0][1]));
            for p in &line.points[1..] {
                data = data.line_to((p[0], p[1]));
            }
            flows = flows.add(
                Path::new()
                    .set("d", data)
                    .set("stroke", spec.color_hex())
                    .set("stroke-width", 1.5)
                    .set("class", format!("flow {} {:?}", spec.code, line.side).to_lowercase()),
            );
        }
    }

    for p in selection.filter(atlas).points {
        let color = registry
            .get(&p.channel)
            .map(|s| s.color_hex())
            .unwrap_or_else(|| FALLBACK_COLOR.to_string());
        let (x, y) = (p.position_px.x, p.position_px.y);
        let circle = Circle::new()
            .set("cx", x)
            .set("cy", y)
            .set("r", POINT_RADIUS)
            .set("stroke", color.clone());
        let circle = match p.confidence {
            Confidence::Measured => circle.set("fill", color),
            Confidence::Estimated => circle.set("fill", "none").set("stroke-width", 1),
        };
        dots = dots.add(circle);
        labels = labels.add(
            Text::new(format!("{}{}", p.id, p.side.suffix()))
                .set("x", x + POINT_RADIUS + 1.0)
                .set("y", y - POINT_RADIUS),
        );
    }

    doc = doc.add(flows).add(dots).add(labels);
    doc.to_string()
}
