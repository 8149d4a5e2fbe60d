mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use faceatlas::fixture;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("faceatlas-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(common::bin_path()).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_frames(dir: &Path, frames: &[faceatlas::geometry::LandmarkFrame]) -> String {
    let path = dir.join("frames.jsonl");
    let text: String = frames.iter().map(|f| serde_json::to_string(&f.to_record()).unwrap() + "\n").collect();
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const HEADER: &str = "Channel,ID,NameE,Region,FaceMeshX,FaceMeshY,IsSymmetry,Comments";

#[test]
fn validate_sample_prints_census() {
    let o = run(&["validate"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("Acupoints"));
    assert!(out.contains("6 definitions, 10 points"));
}

#[test]
fn validate_reports_cycle() {
    let dir = scratch("cycle");
    let path = dir.join("atlas.csv");
    std::fs::write(
        &path,
        format!("{HEADER}\nST,1,A,eye,GetX(ST2),GetY(ST2),FALSE,-\nST,2,B,eye,GetX(ST1),GetY(ST1),FALSE,-\n"),
    )
    .unwrap();
    let o = run(&["validate", "--atlas", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("ST1 -> ST2 -> ST1"), "{}", stderr(&o));
}

#[test]
fn validate_reports_missing_column() {
    let dir = scratch("header");
    let path = dir.join("atlas.csv");
    std::fs::write(
        &path,
        "Channel,ID,NameE,Region,FaceMeshX,FaceMeshY,IsSymmetry\nRHD,1,A,x,GetX(M1),GetY(M1),FALSE\n",
    )
    .unwrap();
    let o = run(&["validate", "--atlas", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing columns Comments"));
}

#[test]
fn eval_single_frame_and_svg() {
    let dir = scratch("eval");
    let frames = write_frames(&dir, &[fixture::canonical_frame(0)]);
    let svg = dir.join("overlay.svg");
    let o = run(&["eval", "--frame", &frames, "--svg", svg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["points"].as_array().unwrap().len(), 10);
    assert_eq!(v["degenerate"], false);

    let text = std::fs::read_to_string(&svg).unwrap();
    let doc = roxmltree::Document::parse(&text).expect("well-formed svg");
    let circles = doc.descendants().filter(|n| n.has_tag_name("circle")).count();
    assert_eq!(circles, 10);
}

#[test]
fn eval_select_keeps_one_channel() {
    let dir = scratch("select");
    let frames = write_frames(&dir, &[fixture::canonical_frame(0)]);
    let o = run(&["eval", "--frame", &frames, "--select", "ST,XX"]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("XX"));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    let points = v["points"].as_array().unwrap();
    assert_eq!(points.len(), 6);
    assert!(points.iter().all(|p| p["channel"] == "ST"));
}

#[test]
fn eval_degenerate_frame_is_not_an_error() {
    let dir = scratch("degenerate");
    let mut rec = fixture::canonical_frame(4).to_record();
    rec.v = vec![[0.5, 0.5, 0.0]; 468];
    let path = dir.join("frames.jsonl");
    std::fs::write(&path, serde_json::to_string(&rec).unwrap()).unwrap();
    let o = run(&["eval", "--frame", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["degenerate"], true);
    assert!(stderr(&o).contains("degenerate"));
}

#[test]
fn eval_stream_writes_one_line_per_frame() {
    let dir = scratch("stream");
    let frames = write_frames(&dir, &fixture::jittered_stream(12, 33_333, 5));
    let o = run(&["eval", "--stream", &frames, "--max-in-flight", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let ts: Vec<i64> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["ts"].as_i64().unwrap())
        .collect();
    assert_eq!(ts.len(), 12);
    assert!(ts.windows(2).all(|w| w[0] < w[1]));
    let summary: serde_json::Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(summary["completed"], 12);
}

#[test]
fn eval_missing_file_is_user_error() {
    let o = run(&["eval", "--frame", "/nonexistent/frames.jsonl"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn experiment_frontal_is_exact() {
    let o = run(&["experiment"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    let frontal = &v["poses"][0];
    assert_eq!(frontal["pose"], "frontal");
    for class in frontal["classes"].as_array().unwrap() {
        assert_eq!(class["max_px"], 0.0);
    }
}

#[test]
fn bench_emits_json() {
    let o = run(&["bench", "--iterations", "5"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["iterations"], 5);
    assert!(stderr(&o).contains("parse+compile median"));
}

#[test]
fn unknown_subcommand_exits_one() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
