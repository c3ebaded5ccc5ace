use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dmnn::architecture::{identity_params, serialize_params, ArchitectureSpec, LayerParams, LayerSpec, ParamVector};
use dmnn::dataset::{read_pbm, write_pbm};
use dmnn::lattice::{PixelSet, Point};
use dmnn::mcg::json::graph_to_json;
use dmnn::mcg::{MCGraph, Operator, StructOp};
use dmnn::morphology::BinaryImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dmnn(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dmnn"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_arch(dir: &Path, name: &str, arch: &ArchitectureSpec) {
    fs::write(dir.join(name), serde_json::to_string(arch).unwrap()).unwrap();
}

fn write_params(dir: &Path, name: &str, arch: &ArchitectureSpec, p: &ParamVector) {
    fs::write(dir.join(name), serialize_params(arch, p).unwrap()).unwrap();
}

fn tiny_corpus(dir: &Path) {
    for (name, seed) in [("train", 1), ("val", 2)] {
        let o = dmnn(dir, &["synth", "--out", name, "--count", "4", "--width", "20", "--height", "20", "--seed", &seed.to_string()]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
}

fn config(dir: &Path, train: &str) {
    let text = format!(
        r#"{{"architecture": {{"layers": [{{"kind": "asf", "d": 3}}, {{"kind": "supgen", "k": 2, "d": 3}}]}},
            "train": {train},
            "data": {{"train_dir": "train", "val_dir": "val"}},
            "output_dir": "run"}}"#
    );
    fs::write(dir.join("config.json"), text).unwrap();
}

#[test]
fn train_writes_all_outputs() {
    let d = tempfile::tempdir().unwrap();
    tiny_corpus(d.path());
    config(d.path(), r#"{"algorithm": "slda", "epochs": 5, "batch_size": 4, "neighbors": 4, "seed": 3}"#);
    let o = dmnn(d.path(), &["train", "--config", "config.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let run = d.path().join("run");
    let csv = fs::read_to_string(run.join("metrics.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "epoch,current_loss,best_loss,time_ms");
    assert_eq!(lines.len(), 6);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(run.join("report.json")).unwrap()).unwrap();
    for k in ["train_loss", "val_loss", "epochs_to_min"] {
        assert!(report.get(k).is_some(), "missing {k}");
    }
    // b = N: one move per epoch
    assert_eq!(report["moves"], 5);
    assert!(report.get("wall_ms").is_none());
    let timing: serde_json::Value = serde_json::from_str(&fs::read_to_string(run.join("timing.json")).unwrap()).unwrap();
    assert!(timing["wall_ms"].is_u64());

    let first = fs::read(run.join("report.json")).unwrap();
    let o = dmnn(d.path(), &["train", "--config", "config.json", "--out", "again"]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read(d.path().join("again/report.json")).unwrap(), first);

    // eval on the training data agrees with the report's exact loss
    let o = dmnn(d.path(), &["eval", "--arch", "config.json", "--params", "run/params.json", "--data", "train"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let e: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(e["loss_exact"], report["train_loss_exact"]);
}

#[test]
fn config_errors_exit_one_with_pointer() {
    let d = tempfile::tempdir().unwrap();
    tiny_corpus(d.path());
    config(d.path(), r#"{"algorithm": "slda", "epochs": 5, "batch_size": 9, "neighbors": 4}"#);
    let o = dmnn(d.path(), &["train", "--config", "config.json"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("/train/batch_size"), "{}", stderr(&o));

    config(d.path(), r#"{"algorithm": "sgd", "epochs": 5}"#);
    let o = dmnn(d.path(), &["train", "--config", "config.json"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("/train/algorithm"), "{}", stderr(&o));

    let o = dmnn(d.path(), &["train"]);
    assert_eq!(code(&o), 1);
    let o = dmnn(d.path(), &["--help"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn missing_data_exits_one_and_bad_data_two() {
    let d = tempfile::tempdir().unwrap();
    config(d.path(), r#"{"algorithm": "lda", "epochs": 1}"#);
    let o = dmnn(d.path(), &["train", "--config", "config.json"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("/data/train_dir"), "{}", stderr(&o));

    fs::create_dir(d.path().join("train")).unwrap();
    fs::create_dir(d.path().join("val")).unwrap();
    let o = dmnn(d.path(), &["train", "--config", "config.json"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));

    fs::write(d.path().join("train/input_000.pbm"), b"P1\n3 3\n1 0").unwrap();
    fs::write(d.path().join("train/target_000.pbm"), b"P1\n1 1\n1").unwrap();
    let o = dmnn(d.path(), &["train", "--config", "config.json"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("byte"), "{}", stderr(&o));
}

#[test]
fn apply_trace_and_eval() {
    let d = tempfile::tempdir().unwrap();
    let dir = d.path();
    let arch = ArchitectureSpec::new(vec![
        LayerSpec::Erosion { d: 3 },
        LayerSpec::SupGenSup { k: 2, d: 3 },
        LayerSpec::Complement,
    ])
    .unwrap();
    write_arch(dir, "arch.json", &arch);
    write_params(dir, "id.json", &arch, &identity_params(&arch));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = BinaryImage::from_fn(17, 13, |_, _| rng.random_bool(0.5));
    write_pbm(&x, dir.join("x.pbm")).unwrap();

    let o = dmnn(dir, &["apply", "--arch", "arch.json", "--params", "id.json", "--input", "x.pbm", "--out", "y.pbm"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(read_pbm(dir.join("y.pbm")).unwrap(), x.complement());

    let o = dmnn(dir, &["trace", "--arch", "arch.json", "--params", "id.json", "--input", "x.pbm", "--out", "trace"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mut names: Vec<String> = fs::read_dir(dir.join("trace"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 3);
    assert_eq!(read_pbm(dir.join("trace").join(&names[2])).unwrap(), x.complement());

    // an empty input still gives one image per layer; the complement fills it
    write_pbm(&BinaryImage::new(5, 5), dir.join("e.pbm")).unwrap();
    let o = dmnn(dir, &["trace", "--arch", "arch.json", "--params", "id.json", "--input", "e.pbm", "--out", "etrace"]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_dir(dir.join("etrace")).unwrap().count(), 3);

    // perfect operator on a corpus → 0
    fs::create_dir(dir.join("data")).unwrap();
    write_pbm(&x, dir.join("data/input_000.pbm")).unwrap();
    write_pbm(&x.complement(), dir.join("data/target_000.pbm")).unwrap();
    let o = dmnn(dir, &["eval", "--arch", "arch.json", "--params", "id.json", "--data", "data", "--loss", "absolute"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let e: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(e["loss"], 0.0);

    fs::create_dir(dir.join("empty")).unwrap();
    let o = dmnn(dir, &["eval", "--arch", "arch.json", "--params", "id.json", "--data", "empty"]);
    assert_eq!(code(&o), 2);

    // params for another architecture
    let other = ArchitectureSpec::new(vec![LayerSpec::Dilation { d: 3 }]).unwrap();
    write_params(dir, "other.json", &other, &identity_params(&other));
    let o = dmnn(dir, &["apply", "--arch", "arch.json", "--params", "other.json", "--input", "x.pbm", "--out", "z.pbm"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn basis_dumps_and_refusals() {
    let d = tempfile::tempdir().unwrap();
    let dir = d.path();
    let arch = ArchitectureSpec::new(vec![LayerSpec::Erosion { d: 3 }]).unwrap();
    write_arch(dir, "arch.json", &arch);
    write_params(dir, "id.json", &arch, &identity_params(&arch));
    let o = dmnn(dir, &["basis", "--arch", "arch.json", "--params", "id.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(
        stdout(&o),
        "window (9 points):\n111\n1O1\n111\nbasis (1 intervals):\n# interval 1\nA:\n000\n0O0\n000\nB:\n111\n1O1\n111\n"
    );

    let se: PixelSet = [Point::ORIGIN, Point::new(1, 0), Point::new(0, -1)].into_iter().collect();
    let p = ParamVector::new(vec![LayerParams::Set(StructOp::square(se, 3).unwrap())]);
    write_params(dir, "e.json", &arch, &p);
    let o = dmnn(dir, &["basis", "--arch", "arch.json", "--params", "e.json"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("A:\n010\n0O1\n000\nB:\n111\n1O1\n111\n"), "{}", stdout(&o));

    let g = MCGraph::chain([
        Operator::Erosion(StructOp::square(PixelSet::square(5), 5).unwrap()),
        Operator::Dilation(StructOp::square(PixelSet::square(5), 5).unwrap()),
    ]);
    fs::write(dir.join("g.json"), graph_to_json(&g)).unwrap();
    let o = dmnn(dir, &["basis", "--graph", "g.json"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("window cap exceeded"), "{}", stderr(&o));

    let o = dmnn(dir, &["validate", "--graph", "g.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mut bad = g.clone();
    bad.add_edge(0, 3);
    fs::write(dir.join("bad.json"), graph_to_json(&bad)).unwrap();
    let o = dmnn(dir, &["validate", "--graph", "bad.json"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("A"), "{}", stderr(&o));
}
