mod common;

use common::{dead_url, MockServer};
use odqa_core::dense::{build_index, EmbeddingProvider, EndpointEmbedder, EndpointSettings};
use odqa_core::fixtures::{chunk, store_from_texts};
use odqa_core::reader::{EndpointSpanScorer, SpanScorer};
use odqa_core::Error;
use serde_json::json;

/// Three-dimensional toy encoder: counts of a, b and c characters.
fn toy_embed(text: &str) -> Vec<f32> {
    ['a', 'b', 'c']
        .iter()
        .map(|ch| text.chars().filter(|c| c == ch).count() as f32)
        .collect()
}

fn embed_server() -> MockServer {
    MockServer::start(|path, body| {
        assert_eq!(path, "/embed");
        let vectors: Vec<Vec<f32>> = body["texts"]
            .as_array()
            .unwrap()
            .iter()
            .map(|t| toy_embed(t.as_str().unwrap()))
            .collect();
        (200, json!({ "vectors": vectors }))
    })
}

#[test]
fn endpoint_embedder_discovers_dimension() {
    let server = embed_server();
    let e = EndpointEmbedder::connect(&server.url, EndpointSettings::default()).unwrap();
    assert_eq!(e.dimension(), 3);
    assert!(e.fingerprint().ends_with("/d3"));
    let v = e.embed_texts(&["aab", "c"]).unwrap();
    assert_eq!(v[0].0, vec![2.0, 1.0, 0.0]);
    assert_eq!(v[1].0, vec![0.0, 0.0, 1.0]);
    e.probe().unwrap();
}

#[test]
fn endpoint_embedder_batches_requests() {
    let server = embed_server();
    let settings = EndpointSettings {
        batch_size: 2,
        dimension: Some(3),
        model: Some("toy".into()),
        ..Default::default()
    };
    let e = EndpointEmbedder::connect(&server.url, settings).unwrap();
    assert_eq!(server.hits(), 0);
    assert_eq!(e.fingerprint(), "endpoint:toy/d3");
    e.embed_texts(&["a", "b", "c", "ab", "bc"]).unwrap();
    assert_eq!(server.hits(), 3);
}

#[test]
fn endpoint_embedder_builds_an_index() {
    let server = embed_server();
    let e = EndpointEmbedder::connect(&server.url, EndpointSettings::default()).unwrap();
    let store = store_from_texts(&[("x", "aaa"), ("y", "bbb"), ("z", "abc")]);
    let index = build_index(&store, &e).unwrap();
    assert_eq!(index.len(), 3);
    assert_eq!(index.row(1), &[0.0, 3.0, 0.0]);
}

#[test]
fn endpoint_embedder_rejects_short_responses() {
    let server = MockServer::start(|_, _| (200, json!({ "vectors": [] })));
    let settings = EndpointSettings {
        dimension: Some(3),
        ..Default::default()
    };
    let e = EndpointEmbedder::connect(&server.url, settings).unwrap();
    assert!(matches!(e.embed_texts(&["a"]), Err(Error::Provider { .. })));
}

#[test]
fn endpoint_embedder_surfaces_http_errors() {
    let server = MockServer::start(|_, _| (500, json!({ "error": "boom" })));
    let err = EndpointEmbedder::connect(&server.url, EndpointSettings::default())
        .err()
        .unwrap();
    assert!(matches!(err, Error::Provider { .. }), "{err}");
}

#[test]
fn unreachable_endpoint_fails_probe() {
    let settings = EndpointSettings {
        dimension: Some(8),
        timeout_ms: 2_000,
        ..Default::default()
    };
    let e = EndpointEmbedder::connect(&dead_url(), settings).unwrap();
    assert!(e.probe().is_err());
    assert!(e.embed_texts(&["a"]).is_err());
}

#[test]
fn endpoint_span_scorer_maps_scores_by_id() {
    let server = MockServer::start(|path, body| {
        assert_eq!(path, "/score_spans");
        assert!(body["question"] == "q?" || body["question"] == "ping");
        let scores: Vec<_> = body["passages"]
            .as_array()
            .unwrap()
            .iter()
            .rev()
            .filter(|p| p["id"] != "missing")
            .map(|p| {
                let text = p["text"].as_str().unwrap();
                json!({ "id": p["id"], "start": [1.0], "end": [2.0], "offsets": [[0, text.len()]] })
            })
            .collect();
        (200, json!({ "scores": scores }))
    });
    let scorer = EndpointSpanScorer::new(&server.url, 5_000);
    let a = chunk("a", "alpha");
    let b = chunk("missing", "beta");
    let out = scorer.score("q?", &[&a, &b]);
    let first = out[0].as_ref().unwrap();
    assert_eq!(first.start, vec![1.0]);
    assert_eq!(first.offsets, vec![(0, 5)]);
    match &out[1] {
        Err(Error::Provider { chunk_id, .. }) => assert_eq!(chunk_id.as_deref(), Some("missing")),
        other => panic!("expected provider error, got {other:?}"),
    }
    scorer.probe().unwrap();
}

#[test]
fn unreachable_span_scorer_fails_every_passage() {
    let scorer = EndpointSpanScorer::new(&dead_url(), 2_000);
    let a = chunk("a", "alpha");
    let b = chunk("b", "beta");
    let out = scorer.score("q?", &[&a, &b]);
    assert!(out.iter().all(|r| r.is_err()));
    assert!(scorer.probe().is_err());
}
