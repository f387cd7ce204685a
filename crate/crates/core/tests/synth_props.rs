mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use guiforge::annotate::AnnotatorConfig;
use guiforge::pipeline::{load_and_annotate, synthesize_pages, AnnotatedPage};
use guiforge::sample::{Source, TaskKind};
use guiforge::synth::{make_element_sample, SampleContext, SynthConfig};
use guiforge::templates::TemplateBank;

fn pages() -> Vec<AnnotatedPage> {
    load_and_annotate(&common::pages_dir(), &AnnotatorConfig::default())
        .unwrap()
        .0
}

#[test]
fn every_template_gets_used() {
    let bank = TemplateBank::builtin();
    let google = pages().into_iter().find(|p| p.name == "google_home").unwrap();
    let ctx = SampleContext::new("p", google.annotation.screenshot.clone(), Source::Fixture, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for task in [TaskKind::Grounding, TaskKind::Referring, TaskKind::OCR] {
        let n = bank.templates(task).len();
        assert!(n >= 3, "{task} has {n} templates");
        let mut used = BTreeSet::new();
        for _ in 0..1000 {
            let s =
                make_element_sample(&google.annotation, task, &bank, &mut rng, &SynthConfig::default(), &ctx).unwrap();
            used.insert(s.meta["template"].as_u64().unwrap());
        }
        assert_eq!(used.len(), n, "{task}");
    }
}

#[test]
fn one_image_per_sample_and_well_formed_turns() {
    let pages = pages();
    let out = synthesize_pages(&pages, &TemplateBank::builtin(), &SynthConfig::default(), 3);
    assert!(out.summary.errors.is_empty(), "{:?}", out.summary.errors);
    let keys: BTreeSet<&str> = pages.iter().map(|p| p.annotation.screenshot.as_str()).collect();
    let mut by_task: BTreeMap<TaskKind, usize> = BTreeMap::new();
    for s in &out.samples {
        s.check_shape().unwrap();
        assert!(keys.contains(s.image.as_str()));
        assert!(out.images.contains_key(&s.image));
        assert_eq!(s.meta["seed"], 3);
        *by_task.entry(s.task).or_default() += 1;
    }
    for t in [
        TaskKind::Grounding,
        TaskKind::Referring,
        TaskKind::OCR,
        TaskKind::PageTitle,
        TaskKind::PageDescription,
    ] {
        assert!(by_task.get(&t).copied().unwrap_or(0) > 0, "no {t} samples");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn same_seed_same_bytes(seed in any::<u64>()) {
        let pages = pages();
        let bank = TemplateBank::builtin();
        let a = synthesize_pages(&pages, &bank, &SynthConfig::default(), seed);
        let b = synthesize_pages(&pages, &bank, &SynthConfig::default(), seed);
        prop_assert_eq!(serde_json::to_string(&a.samples).unwrap(), serde_json::to_string(&b.samples).unwrap());
    }

    #[test]
    fn k_stays_in_range(seed in any::<u64>(), k_min in 1usize..5, extra in 0usize..6) {
        let cfg = SynthConfig { k_min, k_max: k_min + extra, ..SynthConfig::default() };
        for s in synthesize_pages(&pages(), &TemplateBank::builtin(), &cfg, seed).samples {
            if matches!(s.task, TaskKind::Grounding | TaskKind::Referring | TaskKind::OCR) {
                prop_assert!(s.qa_pairs() >= 1 && s.qa_pairs() <= cfg.k_max);
            }
        }
    }
}
