//! Reference implementations written independently of the library code,
//! used as oracles by the integration tests.

#![allow(dead_code)]

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::process::{Child, Command, Stdio};
use std::time::Duration;

use faceatlas::adl::{Axis, Expr, PointId, Reference, Side};
use faceatlas::geometry::LandmarkFrame;
use proptest::prelude::*;

pub const BROW_L: usize = 55;
pub const BROW_R: usize = 285;
pub const FOREHEAD: usize = 10;
pub const FALLBACK: f64 = 1.10;

/// One evaluated instance: id with side suffix, aligned position, pixels.
#[derive(Debug, Clone, Copy)]
pub struct OraclePoint {
    pub aligned: [f64; 2],
    pub px: [f64; 2],
}

/// Straight-line evaluation of the bundled sample atlas (no mask), using
/// the default mesh semantics. Keys look like `ST2.L`, `RHD1`.
pub fn sample_atlas_oracle(frame: &LandmarkFrame) -> HashMap<String, OraclePoint> {
    let a = frame.width() as f64 / frame.height() as f64;
    let iso = |i: usize| {
        let v = frame.vertex(i);
        [v[0] * a, v[1]]
    };
    let b = [
        (iso(BROW_L)[0] + iso(BROW_R)[0]) / 2.0,
        (iso(BROW_L)[1] + iso(BROW_R)[1]) / 2.0,
    ];
    let t = iso(FOREHEAD);
    let (ux, uy) = (t[0] - b[0], t[1] - b[1]);
    let len = (ux * ux + uy * uy).sqrt();
    let (ux, uy) = (ux / len, uy / len);
    // rows of the rotation taking the up direction to (0, -1)
    let r = [[-uy, ux], [-ux, -uy]];
    let n = frame.vertices().len() as f64;
    let mut c = [0.0, 0.0];
    for i in 0..frame.vertices().len() {
        let p = iso(i);
        c[0] += p[0] / n;
        c[1] += p[1] / n;
    }
    let anchor = [0.5 * a, 0.5];
    let fwd = |p: [f64; 2]| {
        let d = [p[0] - c[0], p[1] - c[1]];
        [
            r[0][0] * d[0] + r[0][1] * d[1] + anchor[0],
            r[1][0] * d[0] + r[1][1] * d[1] + anchor[1],
        ]
    };
    let back = |q: [f64; 2]| {
        let d = [q[0] - anchor[0], q[1] - anchor[1]];
        // transpose
        let x = r[0][0] * d[0] + r[1][0] * d[1] + c[0];
        let y = r[0][1] * d[0] + r[1][1] * d[1] + c[1];
        [x / a * frame.width() as f64, y * frame.height() as f64]
    };
    let v = |i: usize| fwd(iso(i));

    let rhd1 = [
        0.5 * v(BROW_L)[0] + 0.5 * v(BROW_R)[0],
        0.5 * v(BROW_L)[1] + 0.5 * v(BROW_R)[1],
    ];
    let top = v(FOREHEAD);
    let mid = rhd1[0];
    let rhd2 = [mid, rhd1[1] + FALLBACK * (top[1] - rhd1[1])];
    let uc = (rhd1[1] - rhd2[1]).abs() / 3.0;
    let eye = [263, 362, 374, 386];
    let rhd3_r = [
        0.25 * eye.iter().map(|&i| v(i)[0]).sum::<f64>(),
        0.25 * eye.iter().map(|&i| v(i)[1]).sum::<f64>(),
    ];
    let mirror = |p: [f64; 2]| [2.0 * mid - p[0], p[1]];
    let rhd3_l = mirror(rhd3_r);

    let mut out = HashMap::new();
    let mut put = |k: &str, p: [f64; 2]| {
        out.insert(
            k.to_string(),
            OraclePoint {
                aligned: p,
                px: back(p),
            },
        );
    };
    put("RHD1", rhd1);
    put("RHD2", rhd2);
    for (side, r3) in [("L", rhd3_l), ("R", rhd3_r)] {
        let st1 = [r3[0], r3[1] + uc];
        let st2 = [r3[0], st1[1] + 0.5 * uc];
        let st3 = [r3[0], st2[1] + uc];
        put(&format!("RHD3.{side}"), r3);
        put(&format!("ST1.{side}"), st1);
        put(&format!("ST2.{side}"), st2);
        put(&format!("ST3.{side}"), st3);
    }
    out
}

/// Classifies every row of an atlas CSV by brute-force dependency depth,
/// reading references straight from the text. 0 = direct, 1 = one-time,
/// 2 = multi-time.
pub fn complexity_oracle(csv_text: &str) -> HashMap<String, u8> {
    struct Row {
        refs: Vec<String>,
        proportional: bool,
    }
    let mut rows: HashMap<String, Row> = HashMap::new();
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    for rec in reader.records() {
        let rec = rec.unwrap();
        let id = format!("{}{}", rec[0].trim(), rec[1].trim());
        let text = format!("{} {}", &rec[4], &rec[5]);
        let mut refs = Vec::new();
        let mut rest = text.as_str();
        while let Some(pos) = rest.find("Get") {
            let after = &rest[pos + 5..];
            let close = after.find(')').unwrap();
            refs.push(after[..close].trim().to_string());
            rest = &after[close..];
        }
        let stripped: String = {
            let mut s = text.clone();
            for r in &refs {
                s = s.replace(r.as_str(), "");
            }
            s.replace("GetX", "").replace("GetY", "")
        };
        let uses_u = stripped.contains('U');
        let hair = refs.iter().any(|r| r == "M_HAIRLINE");
        let point_refs: Vec<String> = refs
            .into_iter()
            .filter(|r| !is_mesh(r))
            .map(|r| r.split('.').next().unwrap().to_string())
            .collect();
        rows.insert(
            id,
            Row {
                proportional: uses_u || hair,
                refs: point_refs,
            },
        );
    }
    fn depth(id: &str, rows: &HashMap<String, Row>) -> u32 {
        let row = &rows[id];
        if row.refs.is_empty() && !row.proportional {
            return 0;
        }
        1 + row.refs.iter().map(|r| depth(r, rows)).max().unwrap_or(0)
    }
    rows.keys()
        .map(|id| (id.clone(), depth(id, &rows).min(2) as u8))
        .collect()
}

fn is_mesh(r: &str) -> bool {
    r == "M_HAIRLINE" || (r.starts_with('M') && r[1..].chars().all(|c| c.is_ascii_digit()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimiterOutcome {
    pub admitted: Vec<usize>,
    pub dropped: Vec<usize>,
    pub max_in_flight: usize,
}

/// Tick-by-tick model of the newest-wins limiter. Each tick handles the
/// arrival first, then jobs finishing on that tick. After the last arrival
/// the waiting frame is discarded.
pub fn limiter_oracle(arrivals: &[u64], service: &[u64], cap: usize) -> LimiterOutcome {
    let mut running: Vec<(u64, usize)> = Vec::new();
    let mut waiting: Option<usize> = None;
    let mut out = LimiterOutcome {
        admitted: vec![],
        dropped: vec![],
        max_in_flight: 0,
    };
    let last = arrivals.last().copied().unwrap_or(0);
    let horizon = last + service.iter().sum::<u64>() + 1;
    let mut next = 0;
    for tick in 0..=horizon {
        while next < arrivals.len() && arrivals[next] == tick {
            if running.len() < cap {
                running.push((tick + service[next], next));
                out.admitted.push(next);
            } else if let Some(old) = waiting.replace(next) {
                out.dropped.push(old);
            }
            next += 1;
        }
        if next == arrivals.len() && tick == last {
            if let Some(old) = waiting.take() {
                out.dropped.push(old);
            }
        }
        loop {
            running.sort();
            match running.first() {
                Some(&(end, _)) if end == tick => {
                    running.remove(0);
                    if let Some(w) = waiting.take() {
                        running.push((tick + service[w], w));
                        out.admitted.push(w);
                    }
                }
                _ => break,
            }
        }
        out.max_in_flight = out.max_in_flight.max(running.len());
    }
    out
}

/// Rotation of `p` about `c` by `deg` around one coordinate axis, written
/// out element by element.
pub fn rotate_about(p: [f64; 3], c: [f64; 3], axis: char, deg: f64) -> [f64; 3] {
    let (s, k) = deg.to_radians().sin_cos();
    let (x, y, z) = (p[0] - c[0], p[1] - c[1], p[2] - c[2]);
    let (x, y, z) = match axis {
        'x' => (x, k * y - s * z, s * y + k * z),
        'y' => (k * x + s * z, y, -s * x + k * z),
        'z' => (k * x - s * y, s * x + k * y, z),
        _ => unreachable!(),
    };
    [x + c[0], y + c[1], z + c[2]]
}

/// First hair pixel met walking up from `(col, row0)`, one row at a time.
pub fn mask_scan_oracle(mask: &faceatlas::geometry::HairMask, col: i64, row0: i64) -> Option<i64> {
    (0..row0).rev().find(|&r| mask.get(col, r))
}

pub fn bin_path() -> &'static str {
    env!("CARGO_BIN_EXE_faceatlas")
}

pub fn reference() -> impl Strategy<Value = Reference> {
    prop_oneof![
        (0u32..468).prop_map(Reference::Mesh),
        Just(Reference::Hairline),
        (
            "[A-Z]{1,4}".prop_filter("M is reserved", |c| c != "M"),
            1u32..200,
            prop_oneof![Just(None), Just(Some(Side::Left)), Just(Some(Side::Right))],
        )
            .prop_map(|(c, i, side)| Reference::Point {
                id: PointId::new(&c, i).unwrap(),
                side,
            }),
    ]
}

pub fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0.0f64..1e6).prop_map(Expr::Num),
        (0u32..1000).prop_map(|n| Expr::Num(f64::from(n) / 8.0)),
        Just(Expr::Cun),
        (prop_oneof![Just(Axis::X), Just(Axis::Y)], reference())
            .prop_map(|(a, r)| Expr::get(a, r)),
    ];
    leaf.prop_recursive(6, 48, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Expr::neg),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Expr::add(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Expr::sub(l, r)),
            (inner.clone(), inner).prop_map(|(l, r)| Expr::mul(l, r)),
        ]
    })
}

/// `faceatlas serve --port 0` as a child process, killed on drop.
pub struct Server {
    child: Child,
    pub addr: String,
}

impl Server {
    pub fn start(extra: &[&str]) -> Self {
        let mut child = Command::new(bin_path())
            .args(["serve", "--port", "0"])
            .args(extra)
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .unwrap();
        let mut line = String::new();
        BufReader::new(child.stdout.take().unwrap())
            .read_line(&mut line)
            .unwrap();
        let addr = line
            .trim()
            .strip_prefix("listening on http://")
            .unwrap_or_else(|| panic!("unexpected banner {line:?}"))
            .to_string();
        Server { child, addr }
    }

    pub fn get(&self, path: &str) -> String {
        let mut s = TcpStream::connect(&self.addr).unwrap();
        s.set_read_timeout(Some(Duration::from_secs(5))).unwrap();
        write!(s, "GET {path} HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n").unwrap();
        let mut out = String::new();
        s.read_to_string(&mut out).unwrap();
        out
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
