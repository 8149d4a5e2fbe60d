mod common;

use faceatlas::adl::{load_atlas, Complexity};
use faceatlas::fixture;
use faceatlas::geometry::SemanticsConfig;
use faceatlas::pipeline::{
    accuracy_experiment, pose_transform, run_stream, simulate_stream, Pacing, Pose,
    RotationAxis, StreamOptions,
};
use proptest::prelude::*;

#[test]
fn ten_frames_double_service_time_cap_one() {
    let arrivals: Vec<u64> = (0..10).map(|i| i * 100).collect();
    let sim = simulate_stream(&arrivals, |_| 200, 1);
    let oracle = common::limiter_oracle(&arrivals, &[200; 10], 1);
    assert_eq!(sim.admitted, oracle.admitted);
    assert_eq!(sim.dropped, oracle.dropped);
    assert_eq!((sim.admitted.len(), sim.dropped.len()), (5, 5));
    assert!(sim.events.iter().all(|e| e.in_flight <= 1));
}

#[test]
fn cap_two_matches_oracle() {
    let arrivals: Vec<u64> = (0..10).map(|i| i * 100).collect();
    let sim = simulate_stream(&arrivals, |_| 200, 2);
    let oracle = common::limiter_oracle(&arrivals, &[200; 10], 2);
    assert_eq!(sim.admitted, oracle.admitted);
    assert_eq!(sim.dropped, oracle.dropped);
    // the last frame arrives while both slots are busy and the stream ends there
    assert_eq!(sim.admitted, (0..9).collect::<Vec<_>>());
    assert_eq!(sim.dropped, [9]);
    assert_eq!(oracle.max_in_flight, 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn limiter_matches_tick_oracle(
        gaps in prop::collection::vec(1u64..6, 1..30),
        service in prop::collection::vec(1u64..9, 30),
        cap in 1usize..4,
    ) {
        let arrivals: Vec<u64> = gaps.iter().scan(0, |t, g| { *t += g; Some(*t) }).collect();
        let service = &service[..arrivals.len()];
        let sim = simulate_stream(&arrivals, |i| service[i], cap);
        let oracle = common::limiter_oracle(&arrivals, service, cap);
        prop_assert_eq!(&sim.admitted, &oracle.admitted);
        prop_assert_eq!(&sim.dropped, &oracle.dropped);
        prop_assert!(sim.max_in_flight_seen <= cap);
        prop_assert_eq!(sim.admitted.len() + sim.dropped.len(), arrivals.len());
        prop_assert_eq!(sim.completed.len(), sim.admitted.len());
        // admission order is arrival order
        prop_assert!(sim.admitted.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn unbounded_stream_processes_every_frame_once_in_order() {
    let program = load_atlas(fixture::SAMPLE_ATLAS_CSV).unwrap();
    let frames = fixture::jittered_stream(40, 10_000, 2);
    let mut ts = Vec::new();
    let summary = run_stream(
        frames.into_iter().map(Ok),
        &program,
        &SemanticsConfig::default(),
        &StreamOptions {
            max_in_flight: usize::MAX,
            pacing: Pacing::Unpaced,
            workers: Some(4),
        },
        |a| ts.push(a.timestamp),
    );
    assert_eq!(ts, (0..40).map(|i| i * 10_000).collect::<Vec<_>>());
    assert_eq!((summary.completed, summary.dropped), (40, 0));
}

#[test]
fn yaw_of_one_vertex_matches_rotation_matrix() {
    let frame = fixture::canonical_frame(0);
    let n = frame.vertices().len() as f64;
    let mut c = [0.0; 3];
    for v in frame.vertices() {
        for k in 0..3 {
            c[k] += v[k] / n;
        }
    }
    for (axis, name) in [(RotationAxis::X, 'x'), (RotationAxis::Y, 'y'), (RotationAxis::Z, 'z')] {
        let posed = pose_transform(&frame, axis, 10.0);
        for i in [1, 55, 263] {
            let expected = common::rotate_about(frame.vertex(i), c, name, 10.0);
            let got = posed.vertex(i);
            for k in 0..3 {
                assert!((got[k] - expected[k]).abs() < 1e-12, "{name} v{i}");
            }
        }
    }
}

#[test]
fn pose_transform_is_rigid() {
    let frame = fixture::canonical_frame(0);
    let dist = |a: [f64; 3], b: [f64; 3]| {
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    };
    for axis in [RotationAxis::X, RotationAxis::Y, RotationAxis::Z] {
        let posed = pose_transform(&frame, axis, 17.0);
        for (i, j) in [(0, 467), (10, 152), (55, 285), (33, 263)] {
            let before = dist(frame.vertex(i), frame.vertex(j));
            let after = dist(posed.vertex(i), posed.vertex(j));
            assert!((before - after).abs() < 1e-9);
        }
    }
}

#[test]
fn pose_sweep_shape() {
    let program = load_atlas(fixture::SAMPLE_ATLAS_CSV).unwrap();
    let report = accuracy_experiment(
        &program,
        &fixture::canonical_frame(0),
        &SemanticsConfig::default(),
    )
    .unwrap();
    assert_eq!(report.poses.len(), 4);
    for pose in &report.poses {
        assert!(pose.points.iter().all(|p| p.error_px >= 0.0));
    }
    let yaw = report.pose(Pose::Yaw);
    assert!(yaw.class(Complexity::Direct).max_px.unwrap() < 1e-6);
    assert!(report.pose(Pose::Pitch).ordering_holds(1e-9));
}

#[test]
fn pose_sweep_baselines() {
    let program = load_atlas(fixture::SAMPLE_ATLAS_CSV).unwrap();
    let report = accuracy_experiment(
        &program,
        &fixture::canonical_frame(0),
        &SemanticsConfig::default(),
    )
    .unwrap();
    let baselines = [
        (Pose::Pitch, [0.0963, 0.8138, 2.2692]),
        (Pose::Roll, [1.8545, 2.4945, 4.5870]),
    ];
    for (pose, expected) in baselines {
        for (class, want) in Complexity::ALL.iter().zip(expected) {
            let got = report.pose(pose).class(*class).mean_px.unwrap();
            assert!((got - want).abs() < 1e-3, "{pose:?} {class:?} {got}");
        }
        assert!(report.pose(pose).ordering_holds(0.0));
    }
}
