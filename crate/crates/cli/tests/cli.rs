#[path = "../../core/tests/support/toy.rs"]
mod toy;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tactile_gcn::dataset::{write_csv, DatasetSplit, Label, Orientation, SplitKind};
use tactile_gcn::experiments::{aggregate_rows, read_report_csv, EpochPolicy};
use tactile_gcn::viz::{plot_points, read_plot_csv, PlotAxis};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tactile-gcn"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_split(dir: &Path, name: &str, split: &DatasetSplit) -> PathBuf {
    let path = dir.join(name);
    let mut buf = Vec::new();
    write_csv(split, &mut buf).unwrap();
    std::fs::write(&path, buf).unwrap();
    path
}

fn fixture() -> (TempDir, PathBuf) {
    let dir = TempDir::new().unwrap();
    let path = write_split(dir.path(), "train.csv", &toy::separable_split(24, 1, SplitKind::Train));
    (dir, path)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_exits_zero_everywhere() {
    for sub in [&[][..], &["layout"], &["summary"], &["train"], &["sweep"], &["test"], &["viz"]] {
        let mut args = sub.to_vec();
        args.push("--help");
        let o = run(&args);
        assert_eq!(code(&o), 0, "{args:?}");
        assert!(String::from_utf8_lossy(&o.stdout).contains("Usage"));
    }
}

#[test]
fn unknown_flag_prints_usage_and_has_no_side_effects() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("layout.csv");
    let o = run(&["layout", "--out", s(&out), "--bogus"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("Usage"));
    assert!(!out.exists());
}

#[test]
fn layout_export_is_stable() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert_eq!(code(&run(&["layout", "--out", s(&a)])), 0);
    assert_eq!(code(&run(&["layout", "--out", s(&b)])), 0);
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 25);
    assert_eq!(text.lines().nth(1).unwrap(), "1,0.386434851,-0.108966104,0.156871012");
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn unwritable_output_is_an_io_error() {
    let o = run(&["layout", "--out", "/nonexistent-dir/for/sure/layout.csv"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn missing_dataset_names_the_path() {
    let o = run(&["summary", "--dataset", "/no/such/train.csv"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("/no/such/train.csv"));
}

#[test]
fn invalid_readings_are_data_errors() {
    let dir = TempDir::new().unwrap();
    let mut split = toy::separable_split(4, 2, SplitKind::Train);
    split.samples[2].readings[30] = 5000;
    let path = write_split(dir.path(), "bad.csv", &split);
    let o = run(&["train", "--dataset", s(&path), "--epochs", "1", "--rounds", "0", "--out", s(dir.path())]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("row 4") && stderr(&o).contains("m07"), "{}", stderr(&o));
}

#[test]
fn summary_prints_counts() {
    let (_dir, data) = fixture();
    let o = run(&["summary", "--dataset", s(&data)]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("Palm Down"));
    assert!(text.lines().last().unwrap().split_whitespace().eq(["All", "12", "12"]));
}

fn train_args<'a>(data: &'a str, out: &'a str, rounds: &'a str) -> Vec<&'a str> {
    vec![
        "train", "--dataset", data, "--epochs", "3", "--rounds", rounds, "--folds", "2", "--seed", "7", "--depth", "5",
        "--quiet", "--out", out,
    ]
}

#[test]
fn train_is_reproducible_and_writes_artifacts() {
    let (dir, data) = fixture();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let o = run(&train_args(s(&data), s(&a), "1"));
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(code(&run(&train_args(s(&data), s(&b), "1"))), 0);
    let report = std::fs::read(a.join("report.csv")).unwrap();
    assert_eq!(report, std::fs::read(b.join("report.csv")).unwrap());
    assert!(a.join("model.tgcn").is_file());
    let meta = std::fs::read_to_string(a.join("report.meta.txt")).unwrap();
    assert!(meta.contains("conv_widths = 8-8-16-16-32"));
    assert!(meta.contains("dataset_sha256 = "));
    assert!(meta.contains("manual_edges_sha256 = "));
    let (_, rows) = read_report_csv(report.as_slice(), Label::Slippery).unwrap();
    assert_eq!(rows.len(), 4);
}

#[test]
fn test_command_reports_orientations_and_guards_structure() {
    let (dir, data) = fixture();
    let out = dir.path().join("run");
    assert_eq!(code(&run(&train_args(s(&data), s(&out), "0"))), 0);
    let model = out.join("model.tgcn");

    let test = write_split(dir.path(), "test.csv", &toy::separable_split(18, 3, SplitKind::Test));
    let o = run(&["test", "--model", s(&model), "--dataset", s(&test), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    let names: Vec<&str> = stdout.lines().skip(1).map(|l| l.split_whitespace().next().unwrap()).collect();
    assert_eq!(names, ["Down", "45", "Side", "All"]);
    assert!(out.join("generalization.csv").is_file());

    let o = run(&["test", "--model", s(&model), "--dataset", s(&test), "--edges", "knn:3", "--out", s(&out)]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));

    let mut no_side = toy::separable_split(18, 3, SplitKind::Test);
    no_side.samples.retain(|x| x.orientation != Orientation::PalmSide);
    let test = write_split(dir.path(), "test_no_side.csv", &no_side);
    let o = run(&["test", "--model", s(&model), "--dataset", s(&test), "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("warning") && stderr(&o).contains("Palm Side"));
}

#[test]
fn test_rejects_a_different_manual_edge_list() {
    let (dir, data) = fixture();
    let out = dir.path().join("run");
    assert_eq!(code(&run(&train_args(s(&data), s(&out), "0"))), 0);
    let default = tactile_gcn::sensor_graph::manual_edges(None).unwrap().to_canonical_text();
    let edited = default.replacen("0 1\n", "0 2\n", 1);
    assert_ne!(default, edited);
    let edge_file = dir.path().join("edges.txt");
    std::fs::write(&edge_file, edited).unwrap();
    let o = run(&[
        "test", "--model", s(&out.join("model.tgcn")), "--dataset", s(&data), "--edge-file", s(&edge_file), "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
}

fn sweep(kind: &str, data: &Path, out: &Path) -> Output {
    run(&[
        "sweep", kind, "--dataset", s(data), "--epochs", "1", "--rounds", "1", "--folds", "2", "--quiet", "--out",
        s(out),
    ])
}

#[test]
fn sweeps_emit_consistent_plot_files() {
    let (dir, data) = fixture();
    for (kind, stem, rows, axis) in [
        ("connectivity", "connectivity", 13, PlotAxis::K),
        ("depth-width", "depth_width", 10, PlotAxis::Depth),
    ] {
        let out = dir.path().join(kind);
        let o = sweep(kind, &data, &out);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let plot = read_plot_csv(&std::fs::read_to_string(out.join(format!("{stem}_plot.csv"))).unwrap()).unwrap();
        assert_eq!(plot.len(), rows);
        let (_, report) = read_report_csv(std::fs::File::open(out.join(format!("{stem}.csv"))).unwrap(), Label::Slippery).unwrap();
        let aggs: Vec<_> = aggregate_rows(&report).into_iter().filter(|a| a.epoch_policy == EpochPolicy::Best).collect();
        let expected = plot_points(&aggs, axis);
        for (p, e) in plot.iter().zip(&expected) {
            assert_eq!(p.x, e.x);
            assert!((p.mean - e.mean).abs() < 1e-12 && (p.std - e.std).abs() < 1e-12);
        }
    }
}

#[test]
fn viz_writes_one_svg_per_finger() {
    let (dir, data) = fixture();
    let out = dir.path().join("svg");
    let o = run(&["viz", "--dataset", s(&data), "--sample", "3", "--edges", "knn:8", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for finger in ["index", "middle", "thumb"] {
        let svg = std::fs::read_to_string(out.join(format!("sample3_{finger}.svg"))).unwrap();
        assert_eq!(svg.matches("<line ").count(), 192);
    }
    let o = run(&["viz", "--dataset", s(&data), "--sample", "999", "--out", s(&out)]);
    assert_eq!(code(&o), 3);
    let o = run(&["viz", "--dataset", s(&data), "--sample", "0", "--out", s(&out)]);
    assert_eq!(code(&o), 3);
}
