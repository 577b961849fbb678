//! Adapter for an external aesthetic judge reached over JSON.
//!
//! Request body: `{"slide": <SlideDoc>, "task": "scoring" | "adjustment"}`.
//! Response body: `{"text": "<think>…</think><answer>…</answer>"}`.
//! Every response goes through [`parse_tagged`] and is rejected unless well
//! formed.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{Feedback, FeedbackItem, FeedbackOp, Scorer, ScorerError};
use crate::rewards::{extract_categories, parse_score, parse_tagged, RewardConfig, RewardError};
use crate::slide::{encode, DefectCategory, ElementKind, SlideDoc};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RemoteScorerConfig {
    pub endpoint: String,
    pub timeout_ms: u64,
    /// Extra attempts after a transport failure.
    pub retries: u32,
}

impl Default for RemoteScorerConfig {
    fn default() -> Self {
        Self {
            endpoint: String::new(),
            timeout_ms: 30_000,
            retries: 2,
        }
    }
}

impl RemoteScorerConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            ..Default::default()
        }
    }
}

/// Moves a JSON request body to the endpoint and returns the response body.
pub trait Transport {
    fn post_json(&self, url: &str, body: &str, timeout: Duration) -> Result<String, String>;
}

impl<F> Transport for F
where
    F: Fn(&str, &str, Duration) -> Result<String, String>,
{
    fn post_json(&self, url: &str, body: &str, timeout: Duration) -> Result<String, String> {
        self(url, body, timeout)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemoteTask {
    Scoring,
    Adjustment,
}

#[derive(Deserialize)]
struct RemoteReply {
    text: String,
}

pub struct RemoteScorer<T> {
    cfg: RemoteScorerConfig,
    score_range: RewardConfig,
    transport: T,
}

impl<T: Transport> RemoteScorer<T> {
    pub fn with_transport(cfg: RemoteScorerConfig, transport: T) -> Self {
        Self {
            cfg,
            score_range: RewardConfig::default(),
            transport,
        }
    }

    fn request(&self, task: RemoteTask, slide: &SlideDoc) -> Result<String, ScorerError> {
        let task = match task {
            RemoteTask::Scoring => "scoring",
            RemoteTask::Adjustment => "adjustment",
        };
        let body = format!("{{\"slide\":{},\"task\":\"{task}\"}}", encode(slide));
        let timeout = Duration::from_millis(self.cfg.timeout_ms);

        let mut last_err = String::new();
        for _ in 0..=self.cfg.retries {
            match self.transport.post_json(&self.cfg.endpoint, &body, timeout) {
                Ok(raw) => {
                    let reply: RemoteReply = serde_json::from_str(&raw)
                        .map_err(|e| ScorerError::MalformedRemoteResponse(format!("bad reply body: {e}")))?;
                    return Ok(reply.text);
                }
                Err(e) => last_err = e,
            }
        }
        Err(ScorerError::Transport(last_err))
    }

    fn answer(&self, task: RemoteTask, slide: &SlideDoc) -> Result<String, ScorerError> {
        let text = self.request(task, slide)?;
        let parsed = parse_tagged(&text);
        if !parsed.well_formed {
            return Err(ScorerError::MalformedRemoteResponse(
                "response is not a single think block followed by a single answer block".into(),
            ));
        }
        Ok(parsed.answer)
    }
}

impl<T: Transport> Scorer for RemoteScorer<T> {
    fn score(&self, slide: &SlideDoc) -> Result<f64, ScorerError> {
        let answer = self.answer(RemoteTask::Scoring, slide)?;
        parse_score(&answer, &self.score_range).map_err(|e| match e {
            RewardError::ScoreOutOfRange(v) => ScorerError::ScoreOutOfRange(v),
            other => ScorerError::MalformedRemoteResponse(other.to_string()),
        })
    }

    fn feedback(&self, slide: &SlideDoc) -> Result<Feedback, ScorerError> {
        let answer = self.answer(RemoteTask::Adjustment, slide)?;
        let categories = extract_categories(&answer);
        if categories.is_empty() {
            return Err(ScorerError::MalformedRemoteResponse(
                "no defect category or no-deficiency sentinel in the answer".into(),
            ));
        }
        Ok(feedback_for_categories(&categories, slide))
    }
}

/// Turns bare category labels into actionable feedback aimed at every
/// content element the category can concern.
pub fn feedback_for_categories(categories: &crate::slide::LabelSet, slide: &SlideDoc) -> Feedback {
    if categories.contains(&DefectCategory::NoDeficiency) {
        return Feedback::clean();
    }
    let ids = |pred: &dyn Fn(ElementKind) -> bool| -> Vec<String> {
        slide.content().filter(|e| pred(e.kind)).map(|e| e.id.clone()).collect()
    };
    let mut items = Vec::new();
    for &cat in categories {
        let (ops, targets): (&[FeedbackOp], Vec<String>) = match cat {
            DefectCategory::CompositionLayout => (&[FeedbackOp::Respace, FeedbackOp::Rescale], ids(&|_| true)),
            DefectCategory::Typography => (&[FeedbackOp::NormalizeFonts], ids(&|k| k == ElementKind::Text)),
            DefectCategory::ImageryVisualizations => (&[FeedbackOp::FixAspect], ids(&|k| k == ElementKind::Image)),
            DefectCategory::NoDeficiency => continue,
        };
        for &op in ops {
            items.push(FeedbackItem {
                category: cat,
                element_ids: targets.clone(),
                suggested_op: Some(op),
                note: format!("remote judge flagged {cat}"),
            });
        }
    }
    Feedback { items }
}

#[cfg(feature = "http")]
mod http {
    use std::time::Duration;

    use super::Transport;

    /// Plain HTTP transport.
    #[derive(Debug, Clone, Default)]
    pub struct HttpTransport;

    impl Transport for HttpTransport {
        fn post_json(&self, url: &str, body: &str, timeout: Duration) -> Result<String, String> {
            let agent: ureq::Agent = ureq::Agent::config_builder()
                .timeout_global(Some(timeout))
                .build()
                .into();
            let mut resp = agent
                .post(url)
                .header("content-type", "application/json")
                .send(body)
                .map_err(|e| e.to_string())?;
            resp.body_mut().read_to_string().map_err(|e| e.to_string())
        }
    }
}

#[cfg(feature = "http")]
pub use http::HttpTransport;

/// Builds a scorer that talks to `cfg.endpoint` over HTTP.
#[cfg(feature = "http")]
pub fn external_scorer_adapter(cfg: RemoteScorerConfig) -> RemoteScorer<HttpTransport> {
    RemoteScorer::with_transport(cfg, HttpTransport)
}

#[cfg(test)]
mod tests {
    use std::cell::Cell;

    use super::*;
    use crate::slide::{BBox, Element, LabelSet};

    fn slide() -> SlideDoc {
        SlideDoc::with_elements(
            16.0 / 9.0,
            vec![
                Element::text("title", BBox::new(0.1, 0.1, 0.8, 0.1), 0, 0.06, "Title"),
                Element::image("fig", BBox::new(0.3, 0.3, 0.4, 0.4), 1.5),
            ],
        )
    }

    fn fixed(text: &'static str) -> impl Fn(&str, &str, Duration) -> Result<String, String> {
        move |_, _, _| Ok(serde_json::json!({ "text": text }).to_string())
    }

    #[test]
    fn echoes_remote_score() {
        let s = RemoteScorer::with_transport(RemoteScorerConfig::new("stub"), fixed("<think>ok</think><answer>7.25</answer>"));
        assert_eq!(s.score(&slide()), Ok(7.25));
    }

    #[test]
    fn out_of_range_score() {
        let s = RemoteScorer::with_transport(RemoteScorerConfig::new("stub"), fixed("<think>ok</think><answer>11.0</answer>"));
        assert_eq!(s.score(&slide()), Err(ScorerError::ScoreOutOfRange(11.0)));
    }

    #[test]
    fn untagged_reply_is_malformed() {
        let s = RemoteScorer::with_transport(RemoteScorerConfig::new("stub"), fixed("7.25"));
        assert!(matches!(s.score(&slide()), Err(ScorerError::MalformedRemoteResponse(_))));
    }

    #[test]
    fn feedback_goes_through_category_extraction() {
        let text = "<think>look</think><answer>1. Composition & Layout\n- crowded\n2. Imagery & Visualizations\n- No major deficiencies found.</answer>";
        let s = RemoteScorer::with_transport(RemoteScorerConfig::new("stub"), fixed(text));
        let fb = s.feedback(&slide()).unwrap();
        assert_eq!(fb.categories(), LabelSet::from([DefectCategory::CompositionLayout]));
        assert!(fb.items.iter().all(|i| i.element_ids == vec!["title".to_owned(), "fig".to_owned()]));
    }

    #[test]
    fn request_body_carries_task_and_slide() {
        let transport = |_: &str, body: &str, _: Duration| {
            let v: serde_json::Value = serde_json::from_str(body).unwrap();
            assert_eq!(v["task"], "scoring");
            assert_eq!(v["slide"]["elements"][0]["id"], "title");
            Ok(r#"{"text":"<think>x</think><answer>5</answer>"}"#.to_owned())
        };
        let s = RemoteScorer::with_transport(RemoteScorerConfig::new("stub"), transport);
        assert_eq!(s.score(&slide()), Ok(5.0));
    }

    #[test]
    fn transport_errors_are_retried() {
        let attempts = Cell::new(0);
        let transport = |_: &str, _: &str, _: Duration| {
            attempts.set(attempts.get() + 1);
            Err::<String, _>("connection refused".to_owned())
        };
        let cfg = RemoteScorerConfig {
            retries: 2,
            ..RemoteScorerConfig::new("stub")
        };
        let s = RemoteScorer::with_transport(cfg, &transport);
        assert!(matches!(s.score(&slide()), Err(ScorerError::Transport(_))));
        assert_eq!(attempts.get(), 3);
    }
}
