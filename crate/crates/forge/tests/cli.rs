mod common;

use forge_core::imgcore::{save_image_png, save_mask_png};
use forge_core::scoremap::write_raw_scoremap;
use forge_core::{GrayField, Mask, SeededRng};

use common::{forge, snapshot, striped_image, toy_tree, write_config};

fn stderr(out: &std::process::Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn generate_writes_manifest_and_summary_lines() {
    let dir = tempfile::tempdir().unwrap();
    toy_tree(dir.path(), 4, 48, 1);
    let config = write_config(dir.path(), 3, "out");
    let out = forge(&["generate", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 5);
    assert!(stdout.contains("opaque") && stdout.contains("written"));
    let root = dir.path().join("out");
    assert!(root.join("manifest.jsonl").is_file());
    assert!(root.join("summary.json").is_file());
    assert_eq!(
        std::fs::read(root.join("config.json")).unwrap(),
        std::fs::read(&config).unwrap()
    );
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    toy_tree(dir.path(), 2, 32, 2);
    let config = write_config(dir.path(), 1, "out");
    let text = std::fs::read_to_string(&config).unwrap().replace(
        r#""out_dir": "out""#,
        r#""out_dir": "out", "operators": {"transparent": {"betta_range": [0.2, 0.4]}}"#,
    );
    std::fs::write(&config, text).unwrap();
    let out = forge(&["generate", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("/operators/transparent/betta_range"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn missing_config_and_missing_dataset_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = forge(&[
        "generate",
        "--config",
        dir.path().join("nope.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let config = write_config(dir.path(), 1, "out");
    let out = forge(&["generate", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("/dataset_root"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(forge(&[]).status.code(), Some(2));
    assert_eq!(forge(&["generate"]).status.code(), Some(2));
    assert_eq!(
        forge(&["generate", "--config", "x.json", "--jobs", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(forge(&["--help"]).status.code(), Some(0));
}

#[test]
fn bad_log_level_is_a_usage_error() {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_forge"))
        .args(["eval", "--scores", ".", "--gt", ".", "--out", "r.json"])
        .env("FORGE_LOG", "verbose")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("FORGE_LOG"));
}

fn inspect_into(image: &str, category: &str, out: &std::path::Path) -> std::process::Output {
    forge(&[
        "inspect",
        "--image",
        image,
        "--category",
        category,
        "--seed",
        "17",
        "--out",
        out.to_str().unwrap(),
    ])
}

#[test]
fn inspect_ndaa_writes_five_stages_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("in.png");
    save_image_png(&striped_image(64, &mut SeededRng::new(8)), &img).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let out = inspect_into(img.to_str().unwrap(), "ndaa", d);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    let snap = snapshot(&a);
    assert_eq!(snap.len(), 5);
    assert_eq!(snap, snapshot(&b));
}

#[test]
fn inspect_other_categories_write_image_and_mask() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("in.png");
    save_image_png(&striped_image(48, &mut SeededRng::new(9)), &img).unwrap();
    for cat in ["transparent", "opaque", "cutpaste", "nsa", "rotation"] {
        let d = dir.path().join(cat);
        let out = inspect_into(img.to_str().unwrap(), cat, &d);
        assert_eq!(out.status.code(), Some(0), "{cat}: {}", stderr(&out));
        assert_eq!(snapshot(&d).len(), 2, "{cat}");
    }
}

#[test]
fn inspect_unknown_category_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = inspect_into("in.png", "blur", dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn inspect_missing_image_is_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = inspect_into(
        dir.path().join("none.png").to_str().unwrap(),
        "opaque",
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}

fn eval_fixture(dir: &std::path::Path) -> (std::path::PathBuf, std::path::PathBuf) {
    let (scores, gt) = (dir.join("scores"), dir.join("gt"));
    std::fs::create_dir_all(&scores).unwrap();
    std::fs::create_dir_all(&gt).unwrap();
    for i in 0..4 {
        let m = Mask::from_fn(8, 8, |x, y| i % 2 == 1 && x >= i && y < 4);
        save_mask_png(&m, gt.join(format!("{i:03}_mask.png"))).unwrap();
        write_raw_scoremap(&GrayField::from(&m), scores.join(format!("{i:03}.f32"))).unwrap();
    }
    (scores, gt)
}

#[test]
fn eval_perfect_scores() {
    let dir = tempfile::tempdir().unwrap();
    let (scores, gt) = eval_fixture(dir.path());
    let report = dir.path().join("report.json");
    let out = forge(&[
        "eval",
        "--scores",
        scores.to_str().unwrap(),
        "--gt",
        gt.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("image AUROC / AP: 100.0 / 100.0"));
    assert!(stdout.contains("pixel AUROC / AP: 100.0 / 100.0"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(json["pixel"]["auroc"], 1.0);
    assert_eq!(json["counts"]["images"], 4);
}

#[test]
fn eval_unpaired_file_names_the_stem() {
    let dir = tempfile::tempdir().unwrap();
    let (scores, gt) = eval_fixture(dir.path());
    std::fs::remove_file(gt.join("002_mask.png")).unwrap();
    let out = forge(&[
        "eval",
        "--scores",
        scores.to_str().unwrap(),
        "--gt",
        gt.to_str().unwrap(),
        "--out",
        dir.path().join("r.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("'002'"), "{}", stderr(&out));
}
