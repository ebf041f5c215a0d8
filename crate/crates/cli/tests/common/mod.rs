#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use aquastretch::synth::bluish_scene;
use aquastretch::save_image;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_aquastretch"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn aquastretch")
}

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn schema_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/report.schema.json")
}

/// Writes `n` synthetic scenes as `scene_00.png`, `scene_01.png`, ...
pub fn write_corpus(dir: &Path, n: usize, w: usize, h: usize) {
    std::fs::create_dir_all(dir).unwrap();
    for i in 0..n {
        let img = bluish_scene(w, h, 100 + i as u64);
        save_image(&img, dir.join(format!("scene_{i:02}.png"))).unwrap();
    }
}

pub fn write_truncated(path: &Path) {
    let tmp = path.with_extension("full.tmp");
    save_image(&bluish_scene(24, 24, 1), &tmp).unwrap();
    let bytes = std::fs::read(&tmp).unwrap();
    std::fs::remove_file(&tmp).unwrap();
    std::fs::write(path, &bytes[..bytes.len() / 3]).unwrap();
}

/// The report with its timestamp removed.
pub fn stable_report(path: &Path) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    v.as_object_mut().unwrap().remove("generated_at");
    v
}

pub fn validate_report(path: &Path) {
    let schema: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(schema_path()).unwrap()).unwrap();
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(&report).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "report violates schema: {errors:#?}");
}

pub fn files_in(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}
