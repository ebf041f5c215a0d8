mod common;

use aquastretch::PipelineConfig;
use aquastretch_cli::batch::Status;
use aquastretch_cli::{run_batch, run_enhance, JobError, JobSpec, Summary};
use common::*;

fn job(input: &std::path::Path, out: &std::path::Path) -> JobSpec {
    JobSpec {
        input: input.to_path_buf(),
        output_dir: out.to_path_buf(),
        config: PipelineConfig::default(),
        report: None,
        parallelism: 2,
        repeatability_rotation: None,
    }
}

#[test]
fn three_valid_images() {
    let dir = tempfile::tempdir().unwrap();
    let (input, out) = (dir.path().join("in"), dir.path().join("out"));
    write_corpus(&input, 3, 32, 24);
    std::fs::write(input.join("readme.txt"), "not an image").unwrap();
    let summary = run_enhance(&job(&input, &out)).unwrap();
    assert_eq!(summary, Summary { ok: 3, degenerate: 0, failed: 0 });
    assert_eq!(files_in(&out), ["scene_00.enhanced.png", "scene_01.enhanced.png", "scene_02.enhanced.png"]);
}

#[test]
fn truncated_file_is_tallied_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let (input, out) = (dir.path().join("in"), dir.path().join("out"));
    write_corpus(&input, 2, 32, 24);
    write_truncated(&input.join("broken.png"));
    let report = run_batch(&job(&input, &out)).unwrap();
    assert_eq!(report.summary, Summary { ok: 2, degenerate: 0, failed: 1 });
    assert_eq!(report.summary.exit_code(), 1);
    let broken = &report.images[0];
    assert_eq!((broken.input.as_str(), broken.status), ("broken.png", Status::Failed));
    assert!(broken.error.as_deref().unwrap().contains("format"));
    assert_eq!(files_in(&out).len(), 2);
}

#[test]
fn single_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let (input, out) = (dir.path().join("in"), dir.path().join("out"));
    write_corpus(&input, 2, 16, 16);
    let summary = run_enhance(&job(&input.join("scene_01.png"), &out)).unwrap();
    assert_eq!(summary.ok, 1);
    assert_eq!(files_in(&out), ["scene_01.enhanced.png"]);
}

#[test]
fn constant_image_is_flagged_degenerate() {
    let dir = tempfile::tempdir().unwrap();
    let (input, out) = (dir.path().join("in"), dir.path().join("out"));
    std::fs::create_dir_all(&input).unwrap();
    aquastretch::save_image(&aquastretch::RgbImage::filled(8, 8, [90.0, 120.0, 150.0]), input.join("flat.png")).unwrap();
    let report = run_batch(&job(&input, &out)).unwrap();
    assert_eq!(report.summary, Summary { ok: 1, degenerate: 1, failed: 0 });
    assert_eq!(report.images[0].status, Status::Degenerate);
}

#[test]
fn colliding_output_names_fail_the_later_input() {
    let dir = tempfile::tempdir().unwrap();
    let (input, out) = (dir.path().join("in"), dir.path().join("out"));
    write_corpus(&input, 1, 16, 16);
    std::fs::copy(input.join("scene_00.png"), input.join("scene_00.PNG")).unwrap();
    let report = run_batch(&job(&input, &out)).unwrap();
    assert_eq!((report.summary.ok, report.summary.failed), (1, 1));
}

#[test]
fn invocation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty");
    std::fs::create_dir_all(&empty).unwrap();
    let err = run_enhance(&job(&empty, &dir.path().join("out"))).unwrap_err();
    assert!(err.to_string().contains("no inputs"));
    assert_eq!(err.exit_code(), 2);

    write_corpus(&dir.path().join("in"), 1, 8, 8);
    let inplace = run_enhance(&job(&dir.path().join("in"), &dir.path().join("in/.")));
    assert!(matches!(inplace, Err(JobError::Invocation(_))));

    let zero = JobSpec { parallelism: 0, ..job(&dir.path().join("in"), &dir.path().join("o")) };
    assert!(matches!(run_enhance(&zero), Err(JobError::Invocation(_))));
}

#[test]
fn report_validates_against_schema() {
    let dir = tempfile::tempdir().unwrap();
    let (input, out) = (dir.path().join("in"), dir.path().join("out"));
    write_corpus(&input, 2, 48, 48);
    write_truncated(&input.join("bad.png"));
    std::fs::create_dir_all(&input).unwrap();
    aquastretch::save_image(&aquastretch::RgbImage::filled(8, 8, [30.0; 3]), input.join("flat.png")).unwrap();
    let report = dir.path().join("r/report.json");
    let with_report = JobSpec { report: Some(report.clone()), repeatability_rotation: Some(15.0), ..job(&input, &out) };
    run_enhance(&with_report).unwrap();
    validate_report(&report);
}

#[test]
fn schema_rejects_malformed_reports() {
    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(schema_path()).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let bad = serde_json::json!({
        "generated_at": "x", "version": "0", "config": {}, "summary": {"ok": 1, "degenerate": 0, "failed": 0},
        "images": []
    });
    assert!(!validator.is_valid(&bad));
}
