mod common;

use guiforge::dataset::read_dataset;
use guiforge::pipeline::{
    annotate_stage, load_annotated, run_pipeline, synthesize_all, write_output, Resources, Stages,
};

fn staged(cfg: &guiforge::config::PipelineConfig, res: &Resources, stages: Stages, out: &std::path::Path) -> String {
    let annotated = tempfile::tempdir().unwrap();
    let summary = annotate_stage(&common::pages_dir(), annotated.path(), &cfg.annotate).unwrap();
    assert!(summary.errors.is_empty(), "{:?}", summary.errors);
    let (pages, errors) = load_annotated(annotated.path()).unwrap();
    assert!(errors.is_empty(), "{errors:?}");
    let client = common::stub_client();
    let out_stage = synthesize_all(&pages, cfg, res, Some(&client), stages);
    write_output(out_stage, out, cfg).unwrap().0.digest
}

#[test]
fn annotate_then_synthesize_equals_fused_run() {
    let cfg = common::config(5);
    let res = Resources::load(&cfg).unwrap();
    for stages in [Stages::ELEMENTARY, Stages::ALL] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let split = staged(&cfg, &res, stages, a.path());
        let client = common::stub_client();
        let (fused, summary) = run_pipeline(&common::pages_dir(), b.path(), &cfg, &res, Some(&client), stages).unwrap();
        assert!(summary.errors.is_empty(), "{:?}", summary.errors);
        assert_eq!(split, fused.digest, "{stages:?}");
        assert_eq!(read_dataset(a.path()).unwrap(), read_dataset(b.path()).unwrap());
    }
}

#[test]
fn annotate_stage_writes_goldens() {
    let out = tempfile::tempdir().unwrap();
    annotate_stage(&common::pages_dir(), out.path(), &Default::default()).unwrap();
    for entry in std::fs::read_dir(common::pages_dir()).unwrap() {
        let dir = entry.unwrap().path();
        if !dir.is_dir() {
            continue;
        }
        let name = dir.file_name().unwrap();
        let want = std::fs::read(dir.join("annotation.json")).unwrap();
        let got = std::fs::read(out.path().join(name).join("annotation.json")).unwrap();
        let want: serde_json::Value = serde_json::from_slice(&want).unwrap();
        let got: serde_json::Value = serde_json::from_slice(&got).unwrap();
        assert_eq!(got, want, "{name:?}");
    }
}

#[test]
fn manifest_records_seed_and_config_digest() {
    let out = tempfile::tempdir().unwrap();
    common::run_fixture_pipeline(11, out.path());
    let m = guiforge::dataset::read_manifest(out.path()).unwrap();
    assert_eq!(m.created_with_seed, 11);
    assert_eq!(m.config_digest, common::config(11).digest());
    for s in read_dataset(out.path()).unwrap() {
        assert_eq!(s.meta.get("seed").and_then(|v| v.as_u64()), Some(11), "{}", s.id);
    }
}

#[test]
fn different_seeds_differ() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_ne!(
        common::run_fixture_pipeline(1, a.path()),
        common::run_fixture_pipeline(2, b.path())
    );
}
