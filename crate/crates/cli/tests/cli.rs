use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn scanfield(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scanfield"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL: &[&str] = &[
    "--rooms",
    "1",
    "--width",
    "4",
    "--depth",
    "4",
    "--scene-seed",
    "3",
];

#[test]
fn gen_scene_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let mut args = vec!["gen-scene", "--out", path(p)];
        args.extend_from_slice(SMALL);
        assert_eq!(code(&scanfield(&args)), 0);
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let scene: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(scene["resolution"], 0.1);
    assert!(scene["boxes"].as_array().unwrap().len() > 1);
}

#[test]
fn run_writes_outputs_and_field_export_replays() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("scene.json");
    let mut args = vec!["gen-scene", "--out", path(&scene)];
    args.extend_from_slice(SMALL);
    assert_eq!(code(&scanfield(&args)), 0);

    let ep = dir.path().join("ep");
    let out = scanfield(&[
        "run",
        "--scene",
        path(&scene),
        "--seed",
        "5",
        "--budget",
        "6",
        "--out",
        path(&ep),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let metrics = fs::read_to_string(ep.join("metrics.csv")).unwrap();
    let mut lines = metrics.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("step,cycle,sim_time,distance"));
    assert_eq!(lines.count(), 7);

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(ep.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["termination"], "step-budget");
    let cycles = summary["cycles"].as_u64().unwrap() as usize;
    assert_eq!(fs::read_dir(ep.join("plans")).unwrap().count(), cycles);
    let plan: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(ep.join("plans/plan_0001.json")).unwrap())
            .unwrap();
    assert!(plan["camera_schedule"].is_array());

    let map: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(ep.join("map_final.json")).unwrap()).unwrap();
    assert!(!map["voxels"].as_array().unwrap().is_empty());
    assert!(fs::read_to_string(ep.join("entropy_final.csv"))
        .unwrap()
        .starts_with("z=0"));

    let again = dir.path().join("again");
    let cfg = ep.join("config.json");
    assert_eq!(
        code(&scanfield(&[
            "run",
            "--config",
            path(&cfg),
            "--out",
            path(&again)
        ])),
        0
    );
    assert_eq!(
        metrics,
        fs::read_to_string(again.join("metrics.csv")).unwrap()
    );

    let out = scanfield(&["export-field", "--episode", path(&ep), "--step", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let slices = ep.join("field_step_3");
    assert_eq!(fs::read_dir(&slices).unwrap().count(), 16);
    let slice = fs::read_to_string(slices.join("field_theta_00.csv")).unwrap();
    let widths: Vec<usize> = slice.lines().map(|l| l.split(',').count()).collect();
    assert!(widths.len() > 1 && widths.iter().all(|&w| w == widths[0]));
    assert!(slice.contains("-inf"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    assert_eq!(code(&scanfield(&["run", "--out", path(&out)])), 2);
    assert_eq!(
        code(&scanfield(&[
            "run",
            "--gen",
            "--budget",
            "0",
            "--out",
            path(&out)
        ])),
        2
    );
    assert_eq!(
        code(&scanfield(&[
            "run",
            "--gen",
            "--stop-fraction",
            "1.5",
            "--out",
            path(&out)
        ])),
        2
    );
    assert_eq!(
        code(&scanfield(&[
            "export-field",
            "--episode",
            path(&out),
            "--step",
            "0"
        ])),
        2
    );

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"base\": 3}").unwrap();
    assert_eq!(
        code(&scanfield(&[
            "compare",
            "--matrix",
            path(&bad),
            "--out",
            path(&out)
        ])),
        2
    );
}

#[test]
fn scene_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let scene = dir.path().join("scene.json");
    fs::write(
        &scene,
        r#"{"resolution": 0.1, "extents": [20, 20, 20], "labels": ["crate"],
            "boxes": [{"min": [0.5, 0.5, 0], "max": [1.5, 1.5, 1], "label": 0}],
            "start": {"x": 1.0, "y": 1.0, "theta": 0.0}}"#,
    )
    .unwrap();
    let run = scanfield(&["run", "--scene", path(&scene), "--out", path(&out)]);
    assert_eq!(code(&run), 3);
    assert!(String::from_utf8_lossy(&run.stderr).contains("start_pose"));

    fs::write(&scene, r#"{"resolution": 0.1, "extents": [20, 20, 20], "labels": [], "boxes": [], "start": {"x": 1, "y": 1, "theta": 0}}"#).unwrap();
    assert_eq!(
        code(&scanfield(&[
            "run",
            "--scene",
            path(&scene),
            "--out",
            path(&out)
        ])),
        3
    );
    let missing = dir.path().join("missing.json");
    assert_eq!(
        code(&scanfield(&[
            "run",
            "--scene",
            path(&missing),
            "--out",
            path(&out)
        ])),
        3
    );
}

#[test]
fn unreachable_views_exit_4() {
    // the robot starts inside a knee-high pen: it sees the room beyond but
    // cannot drive there
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pen");
    let scene = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/pen.json");
    let run = scanfield(&[
        "run",
        "--scene",
        path(&scene),
        "--budget",
        "300",
        "--out",
        path(&out),
    ]);
    assert_eq!(code(&run), 4);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["termination"], "no-reachable-view");
}
