use std::path::Path;
use std::process::{Command, Output};

use textkernel::io::annotation::{parse_annotations, ParseMode};
use textkernel::io::mapfile::{read_map, write_map, MapData};
use textkernel::{generate_labels, mask_iou, rasterize_polygon, DilationSize, Polygon};

fn textkernel(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_textkernel"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn error_category(out: &Output) -> String {
    let line = String::from_utf8_lossy(&out.stderr)
        .lines()
        .last()
        .unwrap()
        .to_string();
    let v: serde_json::Value = serde_json::from_str(&line).unwrap();
    v["error"].as_str().unwrap().to_string()
}

#[test]
fn one_rectangle_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let rect = Polygon::rect(20.0, 30.0, 90.0, 52.0).unwrap();
    let labels = generate_labels(
        std::slice::from_ref(&rect),
        120,
        80,
        DilationSize::new(9).unwrap(),
    )
    .unwrap();
    let map = dir.path().join("k.fkm");
    write_map(&map, &MapData::Mask(labels.kernels.to_mask())).unwrap();

    let out = textkernel(
        &[
            "reconstruct",
            "--map",
            "k.fkm",
            "--s",
            "9",
            "--out",
            "dets.txt",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("dets.txt")).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.trim_end().ends_with(",1.000000"));
    let dets = parse_annotations(&dir.path().join("dets.txt"), ParseMode::Strict)
        .unwrap()
        .polygons;
    let a = rasterize_polygon(&dets[0], 120, 80).unwrap();
    let b = rasterize_polygon(&rect, 120, 80).unwrap();
    assert_eq!(mask_iou(&a, &b).unwrap(), 1.0);

    let scaled = textkernel(
        &["reconstruct", "--map", "k.fkm", "--scale-to", "240x160"],
        dir.path(),
    );
    assert!(String::from_utf8_lossy(&scaled.stdout).starts_with("180,60,180,104,40,104,40,60,"));
}

#[test]
fn synthetic_pipeline_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(
        textkernel(&["synth", "--count", "4", "--seed", "2", "--out", "ann"], d)
            .status
            .success()
    );
    let summary = stdout_json(&textkernel(
        &["gen-labels", "--ann", "ann", "--out", "lab"],
        d,
    ));
    assert_eq!(summary["images"].as_array().unwrap().len(), 4);
    assert!(matches!(
        read_map(&d.join("lab/img_0000.tex.fkm")).unwrap(),
        MapData::Mask(_)
    ));

    for i in 0..4 {
        let name = format!("img_{i:04}");
        let map = format!("lab/{name}.ker.fkm");
        let out = format!("dets/{name}.txt");
        assert!(
            textkernel(&["reconstruct", "--map", &map, "--out", &out], d)
                .status
                .success()
        );
    }
    let report = stdout_json(&textkernel(
        &["evaluate", "--dets", "dets", "--gts", "ann", "--no-timing"],
        d,
    ));
    assert_eq!(report["aggregate"]["f_measure"], 1.0);
    assert!(report.get("timing_ms").is_none());
    let timed = stdout_json(&textkernel(
        &["evaluate", "--dets", "dets", "--gts", "ann"],
        d,
    ));
    assert!(timed["timing_ms"]["total"].as_f64().unwrap() >= 0.0);

    let same = stdout_json(&textkernel(
        &["evaluate", "--dets", "ann", "--gts", "ann", "--no-timing"],
        d,
    ));
    assert_eq!(same["aggregate"]["precision"], 1.0);

    let ub = stdout_json(&textkernel(
        &[
            "upper-bound",
            "--ann",
            "ann",
            "--s",
            "9",
            "--size",
            "640x640",
        ],
        d,
    ));
    assert_eq!(ub["results"][0]["f_measure"], 1.0);
}

#[test]
fn gen_labels_rescales_annotations() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::create_dir(d.join("ann")).unwrap();
    std::fs::write(
        d.join("ann/a.txt"),
        "100,100,500,100,500,300,100,300,hello\n",
    )
    .unwrap();
    let out = stdout_json(&textkernel(
        &[
            "gen-labels",
            "--ann",
            "ann",
            "--out",
            "lab",
            "--size",
            "320x320",
            "--ann-size",
            "640x640",
            "--s",
            "auto",
        ],
        d,
    ));
    assert_eq!(out["s"], 5);
    assert_eq!(out["images"][0]["text_pixels"], 200 * 100);
    assert_eq!(out["images"][0]["kernel_pixels"], 196 * 96);
}

#[test]
fn thin_instances_are_listed() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::create_dir(d.join("ann")).unwrap();
    std::fs::write(
        d.join("ann/a.txt"),
        "10,10,60,10,60,40,10,40\n10,60,60,60,60,64,10,64\n",
    )
    .unwrap();
    let out = stdout_json(&textkernel(
        &[
            "gen-labels",
            "--ann",
            "ann",
            "--out",
            "lab",
            "--size",
            "80x80",
        ],
        d,
    ));
    assert_eq!(out["images"][0]["empty_kernels"], serde_json::json!([1]));
}

#[test]
fn loss_check_and_nas_demo_succeed() {
    let dir = tempfile::tempdir().unwrap();
    let out = textkernel(&["loss-check", "--instances", "10"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 5);

    let nas = stdout_json(&textkernel(
        &[
            "nas-demo",
            "--budget",
            "30",
            "--seed",
            "1",
            "--partition",
            "1,2,3,4",
        ],
        dir.path(),
    ));
    assert_eq!(nas["blocks"], 10);
    assert_eq!(nas["search_space"], "1048576");
    assert_eq!(
        nas["architecture"]["partition"],
        serde_json::json!([1, 2, 3, 4])
    );

    let constant = stdout_json(&textkernel(
        &["nas-demo", "--budget", "5", "--oracle", "constant"],
        dir.path(),
    ));
    assert_eq!(constant["best_index"], 0);
}

#[test]
fn bench_reports_stage_timings() {
    let dir = tempfile::tempdir().unwrap();
    let out = stdout_json(&textkernel(
        &["bench", "--repeat", "2", "--components", "5"],
        dir.path(),
    ));
    assert_eq!(out["detections"], 5);
    for key in ["parse", "ccl", "dilate", "contour", "total"] {
        assert!(out["timing_ms"][key].as_f64().unwrap() >= 0.0);
    }
}

#[test]
fn failures_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let usage = textkernel(&["reconstruct"], d);
    assert_eq!(usage.status.code(), Some(1));
    assert_eq!(error_category(&usage), "usage");
    assert_eq!(
        textkernel(&["reconstruct", "--map", "x", "--s", "4"], d)
            .status
            .code(),
        Some(1)
    );

    let io = textkernel(&["reconstruct", "--map", "missing.fkm"], d);
    assert_eq!(io.status.code(), Some(2));
    assert_eq!(error_category(&io), "io");

    std::fs::write(d.join("bad.fkm"), b"FKM1\x02\0\0\0\x02\0\0\0\x00\xff").unwrap();
    let data = textkernel(&["reconstruct", "--map", "bad.fkm"], d);
    assert_eq!(data.status.code(), Some(3));
    assert_eq!(error_category(&data), "data-format");

    std::fs::create_dir(d.join("ann")).unwrap();
    std::fs::write(d.join("ann/a.txt"), "1,2,3,4,5\n").unwrap();
    let parse = textkernel(&["upper-bound", "--ann", "ann"], d);
    assert_eq!(parse.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&parse.stderr).contains("line 1"));

    assert_eq!(textkernel(&["--help"], d).status.code(), Some(0));
}
