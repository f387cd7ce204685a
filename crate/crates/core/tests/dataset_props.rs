use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use guiforge::dataset::{
    compute_stats, dedup, read_dataset, read_manifest, split, stats_of, write_dataset, DatasetError,
};
use guiforge::raster::{encode_png, image_key};
use guiforge::sample::{QASample, Source, TaskKind, Turn};

fn image(n: u8) -> (String, Vec<u8>) {
    let png = encode_png(&image::RgbaImage::from_pixel(2, 2, image::Rgba([n, 0, 0, 255])));
    (image_key(&png), png)
}

fn sample(id: usize, img: &str, task: TaskKind, answer: &str, url: &str) -> QASample {
    QASample {
        id: format!("s{id}"),
        image: img.to_string(),
        width: 2,
        height: 2,
        task,
        source: if id % 2 == 0 {
            Source::Fineweb
        } else {
            Source::TopDomains
        },
        turns: vec![Turn::user("q"), Turn::assistant(answer)],
        meta: BTreeMap::from([("url".to_string(), json!(url))]),
    }
}

fn samples_strategy() -> impl Strategy<Value = Vec<QASample>> {
    prop::collection::vec((0u8..4, 0usize..3, 0u8..5, 0u8..6), 0..60).prop_map(|raw| {
        raw.into_iter()
            .enumerate()
            .map(|(i, (img, task, ans, url))| {
                let task = [TaskKind::Grounding, TaskKind::OCR, TaskKind::Referring][task];
                sample(
                    i,
                    &image(img).0,
                    task,
                    &format!("a{ans}"),
                    &format!("https://u{url}.test/"),
                )
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn dedup_is_idempotent(s in samples_strategy()) {
        let once = dedup(s);
        prop_assert_eq!(dedup(once.clone()), once);
    }

    #[test]
    fn stats_ignore_order(s in samples_strategy(), seed in any::<u64>()) {
        let mut shuffled = s.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(stats_of(&s), stats_of(&shuffled));
    }

    #[test]
    fn split_keeps_pages_together(s in samples_strategy(), seed in any::<u64>()) {
        let (train, val) = split(s.clone(), 0.3, seed).unwrap();
        prop_assert_eq!(train.len() + val.len(), s.len());
        for v in &val {
            prop_assert!(train.iter().all(|t| t.url() != v.url()));
        }
    }
}

#[test]
fn write_then_read_reproduces_records() {
    let dir = tempfile::tempdir().unwrap();
    let imgs: BTreeMap<String, Vec<u8>> = (0..4).map(image).collect();
    let keys: Vec<&String> = imgs.keys().collect();
    let samples: Vec<QASample> = (0..50)
        .map(|i| {
            sample(
                i,
                keys[i % 4],
                TaskKind::ALL[i % 12],
                &format!("answer {i}"),
                "https://a.test/",
            )
        })
        .collect();
    let m = write_dataset(&samples, &imgs, dir.path(), 9, "cfg").unwrap();
    assert_eq!(read_dataset(dir.path()).unwrap(), samples);
    assert_eq!(read_manifest(dir.path()).unwrap(), m);
    assert_eq!((m.records, m.images, m.created_with_seed), (50, 4, 9));
    for k in keys {
        assert!(dir.path().join(k).is_file());
    }
}

#[test]
fn planted_duplicates_are_removed_in_order() {
    let (key, png) = image(1);
    let mut all = Vec::new();
    let mut unique = Vec::new();
    for i in 0..1000 {
        // Every fifth record repeats the content of the one before it under a new id.
        let content = if i % 5 == 4 { i - 1 } else { i };
        let s = sample(i, &key, TaskKind::Grounding, &format!("a{content}"), "https://a.test/");
        if i % 5 != 4 {
            unique.push(s.id.clone());
        }
        all.push(s);
    }
    let kept = dedup(all);
    assert_eq!(kept.len(), 800);
    assert_eq!(kept.iter().map(|s| s.id.clone()).collect::<Vec<_>>(), unique);

    let dir = tempfile::tempdir().unwrap();
    write_dataset(&kept, &BTreeMap::from([(key, png)]), dir.path(), 0, "x").unwrap();
    assert_eq!(compute_stats(dir.path()).unwrap().records, 800);
}

#[test]
fn split_fraction_on_10k_urls() {
    let urls: Vec<String> = (0..10_000).map(|i| format!("https://site{i}.test/page")).collect();
    let (key, _) = image(0);
    let samples: Vec<QASample> = urls
        .iter()
        .enumerate()
        .map(|(i, u)| sample(i, &key, TaskKind::OCR, "a", u))
        .collect();
    for seed in [0, 1, 42] {
        let (_, val) = split(samples.clone(), 0.1, seed).unwrap();
        let f = val.len() as f64 / 10_000.0;
        assert!((0.08..=0.12).contains(&f), "seed {seed}: {f}");
    }
    assert!(matches!(split(samples, 1.0, 0), Err(DatasetError::InvalidFraction(_))));
}

#[test]
fn missing_and_mismatched_images_are_errors() {
    let dir = tempfile::tempdir().unwrap();
    let (key, png) = image(3);
    let s = vec![sample(0, &key, TaskKind::OCR, "a", "u")];
    assert!(matches!(
        write_dataset(&s, &BTreeMap::new(), dir.path(), 0, ""),
        Err(DatasetError::MissingImage { .. })
    ));
    let wrong = BTreeMap::from([(key.clone(), image(4).1)]);
    assert!(matches!(
        write_dataset(&s, &wrong, dir.path(), 0, ""),
        Err(DatasetError::ImageKeyMismatch(_))
    ));
    let twice = vec![s[0].clone(), s[0].clone()];
    assert!(matches!(
        write_dataset(&twice, &BTreeMap::from([(key, png)]), dir.path(), 0, ""),
        Err(DatasetError::DuplicateId(_))
    ));
}

#[test]
fn corrupt_record_line_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("records.jsonl"), "{}\n").unwrap();
    match compute_stats(dir.path()) {
        Err(DatasetError::Corrupt { line, .. }) => assert_eq!(line, 1),
        other => panic!("{other:?}"),
    }
}
