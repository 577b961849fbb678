//! Score → threshold exit → revert on regression → refine loop with
//! best-version selection, generic over the scorer and the refiner.

pub mod remote;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::slide::{DefectCategory, LabelSet, SlideDoc};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeedbackOp {
    AlignToGrid,
    Rescale,
    Respace,
    NormalizeFonts,
    FixAspect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackItem {
    pub category: DefectCategory,
    #[serde(default)]
    pub element_ids: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suggested_op: Option<FeedbackOp>,
    #[serde(default)]
    pub note: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Feedback {
    pub items: Vec<FeedbackItem>,
}

impl Feedback {
    /// The single-item feedback meaning "nothing to fix".
    pub fn clean() -> Self {
        Self {
            items: vec![FeedbackItem {
                category: DefectCategory::NoDeficiency,
                element_ids: Vec::new(),
                suggested_op: None,
                note: "No major deficiencies found.".to_owned(),
            }],
        }
    }

    pub fn categories(&self) -> LabelSet {
        self.items.iter().map(|i| i.category).collect()
    }

    pub fn is_clean(&self) -> bool {
        self.items.iter().all(|i| i.category == DefectCategory::NoDeficiency)
    }

    pub fn summary(&self) -> String {
        if self.is_clean() {
            return "no deficiency".to_owned();
        }
        self.items
            .iter()
            .filter(|i| i.category != DefectCategory::NoDeficiency)
            .map(|i| match i.suggested_op {
                Some(op) => format!("{}: {op:?} [{}]", i.category, i.element_ids.join(",")),
                None => format!("{}: {}", i.category, i.note),
            })
            .collect::<Vec<_>>()
            .join("; ")
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScorerError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("malformed remote response: {0}")]
    MalformedRemoteResponse(String),
    #[error("score {0} outside [1, 10]")]
    ScoreOutOfRange(f64),
    #[error("{0}")]
    Other(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("refiner failed: {0}")]
pub struct RefinerError(pub String);

/// Aesthetic judge. `score` must be deterministic for a fixed slide within
/// one refinement run.
pub trait Scorer {
    fn score(&self, slide: &SlideDoc) -> Result<f64, ScorerError>;
    fn feedback(&self, slide: &SlideDoc) -> Result<Feedback, ScorerError>;
}

pub trait Refiner {
    fn refine(&self, slide: &SlideDoc, feedback: &Feedback) -> Result<SlideDoc, RefinerError>;
}

impl<S: Scorer + ?Sized> Scorer for &S {
    fn score(&self, slide: &SlideDoc) -> Result<f64, ScorerError> {
        (**self).score(slide)
    }
    fn feedback(&self, slide: &SlideDoc) -> Result<Feedback, ScorerError> {
        (**self).feedback(slide)
    }
}

impl<R: Refiner + ?Sized> Refiner for &R {
    fn refine(&self, slide: &SlideDoc, feedback: &Feedback) -> Result<SlideDoc, RefinerError> {
        (**self).refine(slide, feedback)
    }
}

impl<S: Scorer + ?Sized> Scorer for Box<S> {
    fn score(&self, slide: &SlideDoc) -> Result<f64, ScorerError> {
        (**self).score(slide)
    }
    fn feedback(&self, slide: &SlideDoc) -> Result<Feedback, ScorerError> {
        (**self).feedback(slide)
    }
}

/// Which version a regression reverts to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RevertPolicy {
    /// Compare with and fall back to the immediately preceding version.
    #[default]
    Previous,
    /// Compare with and fall back to the best version seen so far.
    BestSoFar,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CheckerConfig {
    pub max_iters: usize,
    pub threshold: f64,
    pub revert: RevertPolicy,
}

impl Default for CheckerConfig {
    fn default() -> Self {
        Self {
            max_iters: 5,
            threshold: 8.0,
            revert: RevertPolicy::Previous,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub t: usize,
    pub score: f64,
    /// Best score observed up to and including this iteration.
    pub best_score: f64,
    pub reverted: bool,
    /// False on the threshold exit and on the last iteration, where the
    /// refined version could never be scored.
    pub refined: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feedback: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckerTrace {
    pub iterations: Vec<IterationRecord>,
    pub best_index: usize,
    pub early_exit: bool,
    pub refine_skipped_on_last: bool,
}

impl CheckerTrace {
    pub fn scores(&self) -> Vec<f64> {
        self.iterations.iter().map(|r| r.score).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementOutcome {
    pub final_slide: SlideDoc,
    pub final_score: f64,
    pub trace: CheckerTrace,
    /// Every scored version, `versions[t]` is the slide scored at iteration `t`.
    pub versions: Vec<SlideDoc>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckerError {
    #[error("invalid checker config: {0}")]
    InvalidConfig(&'static str),
    #[error("scorer failed at iteration {}: {source}", trace.iterations.len())]
    Scorer { source: ScorerError, trace: Box<CheckerTrace> },
    #[error("{source} at iteration {}", trace.iterations.len().saturating_sub(1))]
    Refiner { source: RefinerError, trace: Box<CheckerTrace> },
}

impl CheckerError {
    pub fn partial_trace(&self) -> Option<&CheckerTrace> {
        match self {
            CheckerError::InvalidConfig(_) => None,
            CheckerError::Scorer { trace, .. } | CheckerError::Refiner { trace, .. } => Some(trace),
        }
    }
}

/// Runs the refinement loop.
///
/// At iteration `t` the current version is scored; a score at or above the
/// threshold returns it immediately. Otherwise the version to refine is the
/// current one, or, when the score dropped strictly below the previous
/// iteration's, the previous version. After `max_iters` iterations the best
/// scored version is returned. The refinement on the last iteration is never
/// scored, so it is skipped.
pub fn run_refinement<S, R>(
    initial: &SlideDoc,
    scorer: &S,
    refiner: &R,
    cfg: &CheckerConfig,
) -> Result<RefinementOutcome, CheckerError>
where
    S: Scorer + ?Sized,
    R: Refiner + ?Sized,
{
    if cfg.max_iters == 0 {
        return Err(CheckerError::InvalidConfig("max_iters must be at least 1"));
    }
    if !(1.0..=10.0).contains(&cfg.threshold) {
        return Err(CheckerError::InvalidConfig("threshold must lie in [1, 10]"));
    }

    let mut trace = CheckerTrace::default();
    let mut versions: Vec<SlideDoc> = vec![initial.clone()];
    let mut best_index = 0usize;
    let mut best_score = 0.0f64;

    for t in 0..cfg.max_iters {
        let current = &versions[t];
        let score = match scorer.score(current) {
            Ok(s) => s,
            Err(source) => {
                return Err(CheckerError::Scorer {
                    source,
                    trace: Box::new(trace),
                })
            }
        };

        if score >= cfg.threshold {
            trace.iterations.push(IterationRecord {
                t,
                score,
                best_score: score.max(best_score),
                reverted: false,
                refined: false,
                feedback: None,
            });
            trace.best_index = t;
            trace.early_exit = true;
            let final_slide = versions[t].clone();
            versions.truncate(t + 1);
            return Ok(RefinementOutcome {
                final_slide,
                final_score: score,
                trace,
                versions,
            });
        }

        let mut base = t;
        let mut reverted = false;
        if t > 0 {
            match cfg.revert {
                RevertPolicy::Previous => {
                    if score < trace.iterations[t - 1].score {
                        base = t - 1;
                        reverted = true;
                    }
                }
                RevertPolicy::BestSoFar => {
                    if score < best_score {
                        base = best_index;
                        reverted = true;
                    }
                }
            }
        }

        if score > best_score {
            best_score = score;
            best_index = t;
        }

        let last = t + 1 == cfg.max_iters;
        let mut record = IterationRecord {
            t,
            score,
            best_score,
            reverted,
            refined: !last,
            feedback: None,
        };

        if last {
            trace.iterations.push(record);
            trace.refine_skipped_on_last = true;
            break;
        }

        let feedback = match scorer.feedback(&versions[base]) {
            Ok(f) => f,
            Err(source) => {
                trace.iterations.push(record);
                return Err(CheckerError::Scorer {
                    source,
                    trace: Box::new(trace),
                });
            }
        };
        record.feedback = Some(feedback.summary());
        trace.iterations.push(record);

        match refiner.refine(&versions[base], &feedback) {
            Ok(next) => versions.push(next),
            Err(source) => {
                return Err(CheckerError::Refiner {
                    source,
                    trace: Box::new(trace),
                })
            }
        }
    }

    // the refined-but-unscored tail, if any, is not a candidate
    versions.truncate(trace.iterations.len());
    trace.best_index = best_index;
    Ok(RefinementOutcome {
        final_slide: versions[best_index].clone(),
        final_score: best_score,
        trace,
        versions,
    })
}

impl fmt::Display for CheckerTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.iterations {
            write!(f, "t={} score={:.2} best={:.2}", r.t, r.score, r.best_score)?;
            if r.reverted {
                f.write_str(" reverted")?;
            }
            if let Some(fb) = &r.feedback {
                write!(f, " feedback: {fb}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use std::cell::{Cell, RefCell};

    use super::*;
    use crate::slide::{BBox, Element};

    /// Scores version k (tagged through the element count) with `scores[k]`.
    struct Scripted {
        scores: Vec<f64>,
        score_calls: Cell<usize>,
        feedback_on: RefCell<Vec<usize>>,
    }

    impl Scripted {
        fn new(scores: &[f64]) -> Self {
            Self {
                scores: scores.to_vec(),
                score_calls: Cell::new(0),
                feedback_on: RefCell::new(Vec::new()),
            }
        }
    }

    fn version_of(slide: &SlideDoc) -> usize {
        slide.elements.len()
    }

    impl Scorer for Scripted {
        fn score(&self, slide: &SlideDoc) -> Result<f64, ScorerError> {
            self.score_calls.set(self.score_calls.get() + 1);
            Ok(self.scores[version_of(slide)])
        }
        fn feedback(&self, slide: &SlideDoc) -> Result<Feedback, ScorerError> {
            self.feedback_on.borrow_mut().push(version_of(slide));
            Ok(Feedback::clean())
        }
    }

    /// Produces the next version number regardless of the input version.
    struct Counter {
        calls: Cell<usize>,
        refined_from: RefCell<Vec<usize>>,
    }

    impl Counter {
        fn new() -> Self {
            Self {
                calls: Cell::new(0),
                refined_from: RefCell::new(Vec::new()),
            }
        }
    }

    impl Refiner for Counter {
        fn refine(&self, slide: &SlideDoc, _: &Feedback) -> Result<SlideDoc, RefinerError> {
            self.calls.set(self.calls.get() + 1);
            self.refined_from.borrow_mut().push(version_of(slide));
            Ok(versioned(self.calls.get()))
        }
    }

    fn versioned(k: usize) -> SlideDoc {
        let elements = (0..k)
            .map(|i| Element::shape(format!("e{i}"), BBox::new(0.0, 0.0, 0.1, 0.1)))
            .collect();
        SlideDoc::with_elements(16.0 / 9.0, elements)
    }

    fn cfg(max_iters: usize, threshold: f64) -> CheckerConfig {
        CheckerConfig {
            max_iters,
            threshold,
            ..Default::default()
        }
    }

    #[test]
    fn constant_high_score_exits_immediately() {
        let scorer = Scripted::new(&[9.0; 6]);
        let refiner = Counter::new();
        let out = run_refinement(&versioned(0), &scorer, &refiner, &cfg(5, 8.0)).unwrap();
        assert_eq!(scorer.score_calls.get(), 1);
        assert_eq!(refiner.calls.get(), 0);
        assert!(out.trace.early_exit);
        assert_eq!(out.final_slide, versioned(0));
        assert_eq!(out.final_score, 9.0);
    }

    #[test]
    fn regression_reverts_to_previous_version() {
        let scorer = Scripted::new(&[5.0, 4.0, 6.0]);
        let refiner = Counter::new();
        let out = run_refinement(&versioned(0), &scorer, &refiner, &cfg(3, 8.0)).unwrap();
        assert_eq!(scorer.score_calls.get(), 3);
        assert_eq!(refiner.calls.get(), 2);
        let reverted: Vec<bool> = out.trace.iterations.iter().map(|r| r.reverted).collect();
        assert_eq!(reverted, vec![false, true, false]);
        // iteration 1 refines S(0), not S(1)
        assert_eq!(*refiner.refined_from.borrow(), vec![0, 0]);
        assert_eq!(*scorer.feedback_on.borrow(), vec![0, 0]);
        assert_eq!(out.final_slide, versioned(2));
        assert_eq!(out.final_score, 6.0);
        assert!(!out.trace.early_exit);
        assert!(out.trace.refine_skipped_on_last);
        assert_eq!(out.trace.best_index, 2);
    }

    #[test]
    fn late_threshold_exit() {
        let scorer = Scripted::new(&[5.0, 6.0, 8.2, 9.0]);
        let refiner = Counter::new();
        let out = run_refinement(&versioned(0), &scorer, &refiner, &cfg(5, 8.0)).unwrap();
        assert_eq!(scorer.score_calls.get(), 3);
        assert_eq!(refiner.calls.get(), 2);
        assert!(out.trace.early_exit);
        assert_eq!(out.final_slide, versioned(2));
        assert_eq!(out.final_score, 8.2);
    }

    #[test]
    fn ties_do_not_revert() {
        let scorer = Scripted::new(&[5.0, 5.0, 5.0]);
        let refiner = Counter::new();
        let out = run_refinement(&versioned(0), &scorer, &refiner, &cfg(3, 8.0)).unwrap();
        assert!(out.trace.iterations.iter().all(|r| !r.reverted));
        // first of the tied maxima is kept
        assert_eq!(out.trace.best_index, 0);
    }

    #[test]
    fn best_so_far_policy() {
        let scorer = Scripted::new(&[6.0, 4.0, 5.0, 3.0]);
        let refiner = Counter::new();
        let c = CheckerConfig {
            revert: RevertPolicy::BestSoFar,
            ..cfg(4, 8.0)
        };
        let out = run_refinement(&versioned(0), &scorer, &refiner, &c).unwrap();
        // 5.0 beats its predecessor but not the best, so it still reverts to S(0)
        assert_eq!(*refiner.refined_from.borrow(), vec![0, 0, 0]);
        assert_eq!(out.final_slide, versioned(0));
    }

    #[test]
    fn single_iteration_never_refines() {
        let scorer = Scripted::new(&[3.0]);
        let refiner = Counter::new();
        let out = run_refinement(&versioned(0), &scorer, &refiner, &cfg(1, 8.0)).unwrap();
        assert_eq!(refiner.calls.get(), 0);
        assert_eq!(out.final_score, 3.0);
    }

    #[test]
    fn invalid_config() {
        let scorer = Scripted::new(&[3.0]);
        let refiner = Counter::new();
        assert!(matches!(
            run_refinement(&versioned(0), &scorer, &refiner, &cfg(0, 8.0)),
            Err(CheckerError::InvalidConfig(_))
        ));
        assert!(run_refinement(&versioned(0), &scorer, &refiner, &cfg(3, 11.0)).is_err());
    }

    struct Failing;
    impl Refiner for Failing {
        fn refine(&self, _: &SlideDoc, _: &Feedback) -> Result<SlideDoc, RefinerError> {
            Err(RefinerError("boom".into()))
        }
    }

    #[test]
    fn refiner_failure_carries_partial_trace() {
        let scorer = Scripted::new(&[3.0, 4.0]);
        let err = run_refinement(&versioned(0), &scorer, &Failing, &cfg(3, 8.0)).unwrap_err();
        let trace = err.partial_trace().unwrap();
        assert_eq!(trace.iterations.len(), 1);
        assert_eq!(trace.iterations[0].score, 3.0);
    }
}
