use std::path::PathBuf;

use odqa_core::corpus::{read_jsonl, ChunkStore};
use odqa_core::fixtures::{write_fixture_files, FIXTURE_FILES};
use odqa_core::{Article, QAPair};

fn shipped_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

#[test]
fn shipped_fixtures_match_generators() {
    let tmp = tempfile::tempdir().unwrap();
    write_fixture_files(tmp.path()).unwrap();
    for name in FIXTURE_FILES {
        let fresh = std::fs::read(tmp.path().join(name)).unwrap();
        let shipped = std::fs::read(shipped_dir().join(name))
            .unwrap_or_else(|e| panic!("{name}: {e}; regenerate with `qa fixture write`"));
        assert!(
            fresh == shipped,
            "{name} is stale; regenerate with `qa fixture write`"
        );
    }
}

#[test]
fn shipped_fixtures_load() {
    let dir = shipped_dir();
    let articles: Vec<Article> = read_jsonl(dir.join("synthetic_articles.jsonl")).unwrap();
    let chunks = ChunkStore::load(dir.join("synthetic_chunks.jsonl")).unwrap();
    let qa: Vec<QAPair> = read_jsonl(dir.join("synthetic_qa.jsonl")).unwrap();
    assert_eq!(articles.len(), 50);
    assert_eq!(chunks.len(), 200);
    assert_eq!(qa.len(), 50);
    assert_eq!(
        ChunkStore::load(dir.join("demo_chunks.jsonl"))
            .unwrap()
            .len(),
        6
    );
    assert_eq!(
        ChunkStore::load(dir.join("two_topic_chunks.jsonl"))
            .unwrap()
            .len(),
        20
    );
}

#[test]
fn example_config_spells_out_the_defaults() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../config/qa.example.toml");
    let mut cfg = odqa_core::AppConfig::load(&path).unwrap();
    assert_eq!(cfg.corpus.as_deref(), Some("fixtures/demo_chunks.jsonl".as_ref()));
    cfg.corpus = None;
    cfg.index = None;
    assert_eq!(cfg, odqa_core::AppConfig::default());
}
