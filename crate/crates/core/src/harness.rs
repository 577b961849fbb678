//! Dataset ingestion, evaluation reports and the batch drivers behind the
//! command-line tool.
//!
//! Every output is canonical JSON (sorted keys, fixed float formatting), and
//! aggregation always walks records in file order, so reports are
//! byte-identical across reruns and across the sequential and parallel paths.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::aesth::{HeuristicScorer, ScorerConfig};
use crate::checker::{CheckerConfig, Scorer, ScorerError};
use crate::metrics::{comparison_accuracy, defect_f1_report, layout_balance, mae, rouge_l_text, Choice, DefectF1Report};
use crate::perturb::{make_pairs, make_variants, slide_seed, BenchmarkRow, PerturbConfig, PerturbError};
use crate::planner::PlannerConfig;
use crate::rewards::{
    extract_categories, group_advantages, parse_choice, parse_score, parse_tagged, total_reward, RewardConfig, Task,
    Truth,
};
use crate::slide::{canonical_json, check_label_set, DefectCategory, LabelSet, SlideDoc, SCHEMA_VERSION};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Environment variable naming an external scorer endpoint.
pub const SCORER_URL_ENV: &str = "PRESGAUGE_SCORER_URL";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatasetError {
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("dataset contains no records")]
    Empty,
}

fn schema(line: usize, message: impl Into<String>) -> DatasetError {
    DatasetError::Schema {
        line,
        message: message.into(),
    }
}

/// All tunables of the tool in one place; `--config` files deserialize into
/// this and missing sections keep their defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HarnessConfig {
    pub reward: RewardConfig,
    pub scorer: ScorerConfig,
    pub planner: PlannerConfig,
    pub perturb: PerturbConfig,
    pub checker: CheckerConfig,
}

impl HarnessConfig {
    /// Hex SHA-256 of the canonical JSON form.
    pub fn fingerprint(&self) -> String {
        let value = serde_json::to_value(self).expect("config always serializes");
        let digest = Sha256::digest(canonical_json(&value).as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlidePairRef {
    pub a: SlideDoc,
    pub b: SlideDoc,
}

/// One line of an evaluation dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub id: String,
    pub task: Task,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slide: Option<SlideDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<SlidePairRef>,
    /// Score, list of category names, or "Slide A" / "Slide B".
    pub truth: Value,
    /// A ready-made prediction of the same shape as `truth`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prediction: Option<Value>,
    /// A raw tagged model response; its answer block is the prediction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response_text: Option<String>,
    /// Deck the slide belongs to, for per-deck balance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deck: Option<String>,
    /// Generated slide text and its reference, for ROUGE-L.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text_candidate: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text_reference: Option<String>,
    /// Fine-grained rubric labels from external judges, carried through
    /// untouched.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rubric: Option<Value>,
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

fn parse_category(s: &str) -> Option<DefectCategory> {
    let norm = s.trim().to_lowercase();
    DefectCategory::ALL
        .into_iter()
        .find(|c| c.key() == norm || c.heading().to_lowercase() == norm)
}

fn parse_choice_value(s: &str) -> Option<Choice> {
    match s.trim().to_lowercase().as_str() {
        "a" => Some(Choice::A),
        "b" => Some(Choice::B),
        _ => parse_choice(s).ok(),
    }
}

/// Interprets a JSON truth or prediction value for `task`.
pub fn typed_truth(task: Task, v: &Value) -> Result<Truth, String> {
    match task {
        Task::Scoring => v.as_f64().map(Truth::Score).ok_or_else(|| "scoring truth must be a number".into()),
        Task::Adjustment => {
            let arr = v.as_array().ok_or("adjustment truth must be a list of categories")?;
            let mut set = LabelSet::new();
            for item in arr {
                let s = item.as_str().ok_or("categories must be strings")?;
                set.insert(parse_category(s).ok_or_else(|| format!("unknown category {s:?}"))?);
            }
            if set.is_empty() {
                return Err("adjustment truth must name at least one category".into());
            }
            check_label_set(&set).map_err(|e| e.to_string())?;
            Ok(Truth::Labels(set))
        }
        Task::Comparison => v
            .as_str()
            .and_then(parse_choice_value)
            .map(Truth::Choice)
            .ok_or_else(|| "comparison truth must be \"Slide A\" or \"Slide B\"".into()),
    }
}

/// A record whose truth and prediction have been checked against its task.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedRecord {
    pub line: usize,
    pub record: EvalRecord,
    pub truth: Truth,
    pub prediction: Option<Truth>,
}

/// Parses a JSONL dataset, skipping blank lines. Schema problems carry the
/// 1-based line number.
pub fn parse_dataset(text: &str) -> Result<Vec<PreparedRecord>, DatasetError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let record: EvalRecord = serde_json::from_str(raw).map_err(|e| schema(line, e.to_string()))?;
        if record.schema_version != SCHEMA_VERSION {
            return Err(schema(line, format!("unsupported schema_version {}", record.schema_version)));
        }
        let truth = typed_truth(record.task, &record.truth).map_err(|m| schema(line, m))?;
        let prediction = match &record.prediction {
            Some(v) => Some(typed_truth(record.task, v).map_err(|m| schema(line, format!("prediction: {m}")))?),
            None => None,
        };
        let has_model_output = prediction.is_some() || record.response_text.is_some();
        match record.task {
            Task::Comparison if !has_model_output && record.pair.is_none() => {
                return Err(schema(line, "comparison record needs a pair, a prediction or a response"));
            }
            Task::Scoring | Task::Adjustment if !has_model_output && record.slide.is_none() => {
                return Err(schema(line, "record needs a slide, a prediction or a response"));
            }
            _ => {}
        }
        for s in record.slide.iter().chain(record.pair.iter().flat_map(|p| [&p.a, &p.b])) {
            if let Some(v) = s.validate().first() {
                return Err(schema(line, format!("invalid slide: {v}")));
            }
        }
        out.push(PreparedRecord {
            line,
            record,
            truth,
            prediction,
        });
    }
    if out.is_empty() {
        return Err(DatasetError::Empty);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionSource {
    Prediction,
    Response,
    Scorer,
}

/// Per-record result before aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordOutcome {
    pub task: Task,
    pub truth: Truth,
    /// `None` when a response could not be interpreted.
    pub predicted: Option<Truth>,
    pub source: PredictionSource,
    pub balance: Option<f64>,
    pub deck: Option<String>,
    pub rouge_l: Option<f64>,
}

fn predict_from_response(task: Task, text: &str, cfg: &RewardConfig) -> Option<Truth> {
    let parsed = parse_tagged(text);
    let answer = parsed.answer.as_str();
    match task {
        Task::Scoring => parse_score(answer, cfg).ok().map(Truth::Score),
        Task::Adjustment => {
            let cats = extract_categories(answer);
            (!cats.is_empty()).then_some(Truth::Labels(cats))
        }
        Task::Comparison => parse_choice(answer).ok().map(Truth::Choice),
    }
}

fn predict_with_scorer<S: Scorer + ?Sized>(rec: &EvalRecord, scorer: &S) -> Result<Truth, ScorerError> {
    match rec.task {
        Task::Scoring => Ok(Truth::Score(scorer.score(rec.slide.as_ref().expect("checked at parse time"))?)),
        Task::Adjustment => {
            let fb = scorer.feedback(rec.slide.as_ref().expect("checked at parse time"))?;
            Ok(Truth::Labels(fb.categories()))
        }
        Task::Comparison => {
            let pair = rec.pair.as_ref().expect("checked at parse time");
            let (a, b) = (scorer.score(&pair.a)?, scorer.score(&pair.b)?);
            Ok(Truth::Choice(if a >= b { Choice::A } else { Choice::B }))
        }
    }
}

/// Evaluates one record. Predictions come from `prediction`, else from
/// `response_text`, else from the scorer.
pub fn evaluate_record<S: Scorer + ?Sized>(
    rec: &PreparedRecord,
    scorer: &S,
    cfg: &RewardConfig,
) -> Result<RecordOutcome, ScorerError> {
    let r = &rec.record;
    let (predicted, source) = if let Some(p) = &rec.prediction {
        (Some(p.clone()), PredictionSource::Prediction)
    } else if let Some(text) = &r.response_text {
        (predict_from_response(r.task, text, cfg), PredictionSource::Response)
    } else {
        (Some(predict_with_scorer(r, scorer)?), PredictionSource::Scorer)
    };
    let rouge_l = match (&r.text_candidate, &r.text_reference) {
        (Some(c), Some(reference)) => rouge_l_text(c, reference, 1.0).ok().map(|x| x.f_score),
        _ => None,
    };
    Ok(RecordOutcome {
        task: r.task,
        truth: rec.truth.clone(),
        predicted,
        source,
        balance: r.slide.as_ref().and_then(|s| layout_balance(s).ok()).map(|b| b.balance),
        deck: r.deck.clone(),
        rouge_l,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoringTable {
    pub records: usize,
    /// Records whose response held no usable score; excluded from the MAE.
    pub unparsed: usize,
    pub mae: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjustmentTable {
    pub records: usize,
    /// Records whose response named no category; scored as empty predictions.
    pub unparsed: usize,
    pub f1: DefectF1Report,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub records: usize,
    /// Records whose response named neither slide; counted as wrong.
    pub unparsed: usize,
    pub correct: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub records: usize,
    pub by_task: BTreeMap<String, usize>,
    pub by_source: BTreeMap<String, usize>,
    pub slides_with_balance: usize,
    /// Mean layout balance over slides.
    pub balance_per_slide: Option<f64>,
    /// Mean over decks of each deck's mean balance; slides without a deck
    /// form their own single-slide decks.
    pub balance_per_deck: Option<f64>,
    pub rouge_l_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub config_fingerprint: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub task_filter: Option<Task>,
    pub corpus: CorpusStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scoring: Option<ScoringTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adjustment: Option<AdjustmentTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonTable>,
    pub notes: Vec<String>,
}

fn task_key(t: Task) -> &'static str {
    match t {
        Task::Scoring => "scoring",
        Task::Adjustment => "adjustment",
        Task::Comparison => "comparison",
    }
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Folds per-record outcomes, in order, into a report.
pub fn aggregate(outcomes: &[RecordOutcome], fingerprint: String, task_filter: Option<Task>) -> Report {
    let mut by_task = BTreeMap::new();
    let mut by_source = BTreeMap::new();
    let mut balances = Vec::new();
    let mut decks: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut rouge = Vec::new();

    let (mut s_pred, mut s_truth, mut s_unparsed, mut s_n) = (Vec::new(), Vec::new(), 0, 0);
    let (mut a_pairs, mut a_unparsed) = (Vec::new(), 0);
    let (mut c_pred, mut c_truth, mut c_unparsed) = (Vec::new(), Vec::new(), 0);

    for (i, o) in outcomes.iter().enumerate() {
        *by_task.entry(task_key(o.task).to_owned()).or_insert(0) += 1;
        let src = serde_json::to_value(o.source).ok().and_then(|v| v.as_str().map(str::to_owned));
        *by_source.entry(src.unwrap_or_default()).or_insert(0) += 1;
        if let Some(b) = o.balance {
            balances.push(b);
            let deck = o.deck.clone().unwrap_or_else(|| format!("\u{0}{i}"));
            decks.entry(deck).or_default().push(b);
        }
        rouge.extend(o.rouge_l);
        match (&o.truth, &o.predicted) {
            (Truth::Score(y), p) => {
                s_n += 1;
                match p {
                    Some(Truth::Score(x)) => {
                        s_pred.push(*x);
                        s_truth.push(*y);
                    }
                    _ => s_unparsed += 1,
                }
            }
            (Truth::Labels(y), p) => match p {
                Some(Truth::Labels(x)) => a_pairs.push((x.clone(), y.clone())),
                _ => {
                    a_unparsed += 1;
                    a_pairs.push((LabelSet::new(), y.clone()));
                }
            },
            (Truth::Choice(y), p) => {
                c_truth.push(*y);
                match p {
                    Some(Truth::Choice(x)) => c_pred.push(Some(*x)),
                    _ => {
                        c_unparsed += 1;
                        c_pred.push(None);
                    }
                }
            }
        }
    }

    let scoring = (s_n > 0).then(|| ScoringTable {
        records: s_n,
        unparsed: s_unparsed,
        mae: mae(&s_pred, &s_truth).ok(),
    });
    let adjustment = (!a_pairs.is_empty()).then(|| AdjustmentTable {
        records: a_pairs.len(),
        unparsed: a_unparsed,
        f1: defect_f1_report(&a_pairs).expect("truths are validated non-empty"),
    });
    let comparison = (!c_truth.is_empty()).then(|| {
        // an unusable answer is a miss: substitute the wrong choice
        let preds: Vec<Choice> = c_pred
            .iter()
            .zip(&c_truth)
            .map(|(p, t)| p.unwrap_or(if *t == Choice::A { Choice::B } else { Choice::A }))
            .collect();
        let accuracy = comparison_accuracy(&preds, &c_truth).expect("lengths match and are non-zero");
        ComparisonTable {
            records: c_truth.len(),
            unparsed: c_unparsed,
            correct: preds.iter().zip(&c_truth).filter(|(p, t)| p == t).count(),
            accuracy,
        }
    });

    let deck_means: Vec<f64> = decks.values().filter_map(|v| mean(v)).collect();
    let mut notes = Vec::new();
    if by_source.contains_key("scorer") {
        notes.push("records without a prediction or response were judged by the configured scorer".to_owned());
    }
    Report {
        schema_version: REPORT_SCHEMA_VERSION,
        config_fingerprint: fingerprint,
        task_filter,
        corpus: CorpusStats {
            records: outcomes.len(),
            by_task,
            by_source,
            slides_with_balance: balances.len(),
            balance_per_slide: mean(&balances),
            balance_per_deck: mean(&deck_means),
            rouge_l_mean: mean(&rouge),
        },
        scoring,
        adjustment,
        comparison,
        notes,
    }
}

/// Evaluates every record (in parallel when `parallel` is set and the
/// feature is enabled) and aggregates in record order.
pub fn evaluate<S: Scorer + Sync + ?Sized>(
    records: &[PreparedRecord],
    scorer: &S,
    cfg: &HarnessConfig,
    task_filter: Option<Task>,
    parallel: bool,
) -> Result<Report, ScorerError> {
    let selected: Vec<&PreparedRecord> = records
        .iter()
        .filter(|r| task_filter.is_none_or(|t| r.record.task == t))
        .collect();
    let outcomes: Vec<RecordOutcome> = map_ordered(&selected, parallel, |r| evaluate_record(r, scorer, &cfg.reward))
        .into_iter()
        .collect::<Result<_, _>>()?;
    Ok(aggregate(&outcomes, cfg.fingerprint(), task_filter))
}

/// `items.iter().map(f)` whose output order never depends on scheduling.
pub fn map_ordered<T: Sync, U: Send>(items: &[T], parallel: bool, f: impl Fn(&T) -> U + Sync) -> Vec<U> {
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return items.par_iter().map(&f).collect();
    }
    let _ = parallel;
    items.iter().map(f).collect()
}

impl Report {
    pub fn to_json(&self) -> String {
        canonical_json(&serde_json::to_value(self).expect("reports always serialize"))
    }

    pub fn to_markdown(&self) -> String {
        let f = |v: Option<f64>| v.map_or("n/a".to_owned(), |x| format!("{x:.4}"));
        let mut out = String::new();
        out.push_str("| Task | Metric | Value | Records |\n|---|---|---|---|\n");
        if let Some(s) = &self.scoring {
            out.push_str(&format!("| Scoring | MAE ↓ | {} | {} |\n", f(s.mae), s.records));
        }
        if let Some(a) = &self.adjustment {
            for (cat, c) in &a.f1.per_category {
                out.push_str(&format!("| Adjustment | F1 {cat} | {:.4} | {} |\n", c.f1, c.support));
            }
            out.push_str(&format!("| Adjustment | macro F1 | {:.4} | {} |\n", a.f1.macro_f1, a.records));
        }
        if let Some(c) = &self.comparison {
            out.push_str(&format!("| Comparison | accuracy | {:.4} | {} |\n", c.accuracy, c.records));
        }
        out.push_str(&format!(
            "\nLayout balance: {} per slide, {} per deck ({} slides). Config {}.\n",
            f(self.corpus.balance_per_slide),
            f(self.corpus.balance_per_deck),
            self.corpus.slides_with_balance,
            &self.config_fingerprint[..12.min(self.config_fingerprint.len())],
        ));
        out
    }
}

/// One response for reward computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub id: String,
    /// Rollout group; when absent, consecutive runs of `group_size` records
    /// form the groups.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    pub task: Task,
    pub truth: Value,
    pub response_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardRow {
    pub schema_version: u32,
    pub id: String,
    pub group: String,
    pub r_fmt: u8,
    pub r_acc: u8,
    pub r: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvantageRow {
    pub schema_version: u32,
    pub id: String,
    pub group: String,
    pub reward: f64,
    pub advantage: f64,
}

/// Rewards for every response and group-normalized advantages.
pub fn reward_dump(text: &str, group_size: usize, cfg: &RewardConfig) -> Result<(Vec<RewardRow>, Vec<AdvantageRow>), DatasetError> {
    if group_size < 2 {
        return Err(schema(0, "group size must be at least 2"));
    }
    let mut records = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let rec: ResponseRecord = serde_json::from_str(raw).map_err(|e| schema(i + 1, e.to_string()))?;
        let truth = typed_truth(rec.task, &rec.truth).map_err(|m| schema(i + 1, m))?;
        records.push((i + 1, rec, truth));
    }
    if records.is_empty() {
        return Err(DatasetError::Empty);
    }

    let explicit = records.iter().filter(|r| r.1.group.is_some()).count();
    if explicit != 0 && explicit != records.len() {
        let line = records.iter().find(|r| r.1.group.is_none()).map_or(0, |r| r.0);
        return Err(schema(line, "either every record names its group or none does"));
    }
    let group_names: Vec<String> = records
        .iter()
        .enumerate()
        .map(|(i, r)| r.1.group.clone().unwrap_or_else(|| format!("g{:05}", i / group_size)))
        .collect();
    let mut order: Vec<String> = Vec::new();
    let mut members: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, g) in group_names.iter().enumerate() {
        if !members.contains_key(g) {
            order.push(g.clone());
        }
        members.entry(g.clone()).or_default().push(i);
    }

    let mut reward_rows = Vec::with_capacity(records.len());
    for (i, (_, rec, truth)) in records.iter().enumerate() {
        let b = total_reward(&parse_tagged(&rec.response_text), truth, cfg);
        reward_rows.push(RewardRow {
            schema_version: SCHEMA_VERSION,
            id: rec.id.clone(),
            group: group_names[i].clone(),
            r_fmt: b.r_fmt,
            r_acc: b.r_acc,
            r: b.r,
            error: b.error,
        });
    }
    let mut adv_rows = Vec::with_capacity(records.len());
    for g in &order {
        let idx = &members[g];
        if idx.len() != group_size {
            return Err(schema(records[idx[0]].0, format!("group {g:?} has {} responses, expected {group_size}", idx.len())));
        }
        let rewards: Vec<f64> = idx.iter().map(|&i| f64::from(reward_rows[i].r)).collect();
        let adv = group_advantages(&rewards).map_err(|e| schema(records[idx[0]].0, e.to_string()))?;
        for (k, &i) in idx.iter().enumerate() {
            adv_rows.push(AdvantageRow {
                schema_version: SCHEMA_VERSION,
                id: reward_rows[i].id.clone(),
                group: g.clone(),
                reward: rewards[k],
                advantage: adv.advantages[k],
            });
        }
    }
    Ok((reward_rows, adv_rows))
}

/// Canonical JSONL: one canonical JSON object per line.
pub fn to_jsonl<T: Serialize>(rows: &[T]) -> String {
    let mut out = String::new();
    for r in rows {
        out.push_str(&canonical_json(&serde_json::to_value(r).expect("rows always serialize")));
        out.push('\n');
    }
    out
}

/// Benchmark rows for a corpus; slides are independent, so the parallel
/// path yields the same rows in the same order.
pub fn perturb_rows(corpus: &[SlideDoc], seed: u64, cfg: &PerturbConfig, parallel: bool) -> Result<Vec<BenchmarkRow>, PerturbError> {
    let indexed: Vec<(usize, &SlideDoc)> = corpus.iter().enumerate().collect();
    let per_slide = map_ordered(&indexed, parallel, |(i, slide)| {
        let s = slide_seed(seed, *i);
        make_variants(slide, s, cfg).map(|v| {
            make_pairs(&v, s)
                .iter()
                .map(|p| BenchmarkRow::from_pair(*i, p, s))
                .collect::<Vec<_>>()
        })
    });
    let mut rows = Vec::with_capacity(corpus.len() * 3);
    for r in per_slide {
        rows.extend(r?);
    }
    Ok(rows)
}

/// The scorer the tool uses when no external endpoint is configured.
pub fn heuristic_scorer(cfg: &HarnessConfig) -> HeuristicScorer {
    HeuristicScorer { cfg: cfg.scorer.clone() }
}
