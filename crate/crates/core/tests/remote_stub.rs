#![cfg(feature = "http")]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::thread;

use presgauge::checker::remote::{external_scorer_adapter, RemoteScorerConfig};
use presgauge::checker::{run_refinement, CheckerConfig, Scorer, ScorerError};
use presgauge::planner::PlannerRefiner;
use presgauge::slide::{BBox, DefectCategory, Element, SlideDoc, DEFAULT_ASPECT};

/// Serves one canned reply per connection, in order, and hands back each
/// request body.
fn stub(replies: Vec<String>) -> (String, mpsc::Receiver<String>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/judge", listener.local_addr().unwrap());
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for reply in replies {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" || line.is_empty() {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
            }
            let mut body = vec![0; len];
            reader.read_exact(&mut body).unwrap();
            tx.send(String::from_utf8(body).unwrap()).unwrap();
            let mut stream = stream;
            write!(
                stream,
                "HTTP/1.1 200 OK\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{reply}",
                reply.len()
            )
            .unwrap();
        }
    });
    (url, rx)
}

fn reply(text: &str) -> String {
    serde_json::json!({ "text": text }).to_string()
}

fn slide() -> SlideDoc {
    SlideDoc::with_elements(
        DEFAULT_ASPECT,
        vec![
            Element::text("title", BBox::new(0.1, 0.08, 0.8, 0.12), 0, 0.07, "Results"),
            Element::text("body", BBox::new(0.1, 0.3, 0.8, 0.5), 1, 0.04, "Revenue grew in every region"),
        ],
    )
}

#[test]
fn scores_and_feedback_over_http() {
    let (url, rx) = stub(vec![
        reply("<think>crowded</think><answer>6.25</answer>"),
        reply("<think>fonts</think><answer>1. Typography\n- sizes are inconsistent</answer>"),
    ]);
    let scorer = external_scorer_adapter(RemoteScorerConfig::new(url));
    assert_eq!(scorer.score(&slide()).unwrap(), 6.25);
    let fb = scorer.feedback(&slide()).unwrap();
    assert!(fb.categories().contains(&DefectCategory::Typography));

    let first: serde_json::Value = serde_json::from_str(&rx.recv().unwrap()).unwrap();
    assert_eq!(first["task"], "scoring");
    assert_eq!(first["slide"]["elements"][0]["id"], "title");
    let second: serde_json::Value = serde_json::from_str(&rx.recv().unwrap()).unwrap();
    assert_eq!(second["task"], "adjustment");
}

#[test]
fn untagged_reply_is_rejected() {
    let (url, _rx) = stub(vec![reply("7.5")]);
    let scorer = external_scorer_adapter(RemoteScorerConfig::new(url));
    assert!(matches!(scorer.score(&slide()), Err(ScorerError::MalformedRemoteResponse(_))));
}

#[test]
fn refinement_loop_drives_a_remote_judge() {
    let (url, _rx) = stub(vec![
        reply("<think>a</think><answer>5.00</answer>"),
        reply("<think>b</think><answer>1. Composition & Layout\n- off balance</answer>"),
        reply("<think>c</think><answer>8.50</answer>"),
    ]);
    let scorer = external_scorer_adapter(RemoteScorerConfig::new(url));
    let out = run_refinement(&slide(), &scorer, &PlannerRefiner::default(), &CheckerConfig::default()).unwrap();
    assert_eq!(out.trace.scores(), vec![5.0, 8.5]);
    assert!(out.trace.early_exit);
    assert_eq!(out.final_score, 8.5);
}

#[test]
fn dead_endpoint_is_a_transport_error() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let cfg = RemoteScorerConfig {
        retries: 0,
        timeout_ms: 2000,
        ..RemoteScorerConfig::new(format!("http://127.0.0.1:{port}/"))
    };
    let scorer = external_scorer_adapter(cfg);
    assert!(matches!(scorer.score(&slide()), Err(ScorerError::Transport(_))));
}
