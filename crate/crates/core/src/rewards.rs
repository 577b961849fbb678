//! Reward machinery for multi-task GRPO training of an aesthetic judge:
//! tagged-response parsing, format and accuracy rewards, group-relative
//! advantages and the clipped surrogate objective.
//!
//! Everything here is pure arithmetic; no policy is instantiated. The KL
//! term enters [`grpo_surrogate`] as a precomputed scalar.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{defect_f1, Choice, MetricsError};
use crate::slide::{DefectCategory, LabelSet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RewardError {
    #[error("answer is not a decimal score: {0:?}")]
    NonNumericAnswer(String),
    #[error("score {0} outside the configured range")]
    ScoreOutOfRange(f64),
    #[error("answer is not one of 'Slide A' or 'Slide B': {0:?}")]
    UnrecognizedChoice(String),
    #[error("invalid label set: {0}")]
    InvalidLabelSet(String),
    #[error("reward group needs at least 2 members, got {0}")]
    GroupTooSmall(usize),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
    #[error("invalid reward config: {0}")]
    InvalidConfig(&'static str),
}

impl From<MetricsError> for RewardError {
    fn from(e: MetricsError) -> Self {
        RewardError::InvalidLabelSet(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardConfig {
    /// F1 threshold for the adjustment task.
    pub alpha: f64,
    /// Absolute error tolerance for the scoring task.
    pub zeta: f64,
    pub score_min: f64,
    pub score_max: f64,
    pub group_size: usize,
    /// Ratio clip half-width.
    pub clip_delta: f64,
    /// KL penalty coefficient.
    pub kl_beta: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            zeta: 0.25,
            score_min: 1.0,
            score_max: 10.0,
            group_size: 8,
            clip_delta: 0.2,
            kl_beta: 0.001,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<(), RewardError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(RewardError::InvalidConfig("alpha must lie in (0, 1)"));
        }
        if !(self.zeta > 0.0) {
            return Err(RewardError::InvalidConfig("zeta must be positive"));
        }
        if !(self.score_min < self.score_max) {
            return Err(RewardError::InvalidConfig("score_min must be below score_max"));
        }
        if self.group_size < 2 {
            return Err(RewardError::InvalidConfig("group_size must be at least 2"));
        }
        if !(self.clip_delta > 0.0 && self.clip_delta < 1.0) {
            return Err(RewardError::InvalidConfig("clip_delta must lie in (0, 1)"));
        }
        if !(self.kl_beta >= 0.0) {
            return Err(RewardError::InvalidConfig("kl_beta must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Scoring,
    Adjustment,
    Comparison,
}

/// Ground truth for one record; the variant fixes the task.
#[derive(Debug, Clone, PartialEq)]
pub enum Truth {
    Score(f64),
    Labels(LabelSet),
    Choice(Choice),
}

impl Truth {
    pub fn task(&self) -> Task {
        match self {
            Truth::Score(_) => Task::Scoring,
            Truth::Labels(_) => Task::Adjustment,
            Truth::Choice(_) => Task::Comparison,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ParsedResponse {
    pub think: String,
    pub answer: String,
    pub well_formed: bool,
}

impl ParsedResponse {
    pub fn format_reward(&self) -> u8 {
        u8::from(self.well_formed)
    }
}

const THINK_OPEN: &str = "<think>";
const THINK_CLOSE: &str = "</think>";
const ANSWER_OPEN: &str = "<answer>";
const ANSWER_CLOSE: &str = "</answer>";
const TAGS: [&str; 4] = [THINK_OPEN, THINK_CLOSE, ANSWER_OPEN, ANSWER_CLOSE];

fn between<'a>(text: &'a str, open: &str, close: &str) -> Option<&'a str> {
    let start = text.find(open)? + open.len();
    let end = text[start..].find(close)? + start;
    Some(&text[start..end])
}

fn has_tag(s: &str) -> bool {
    TAGS.iter().any(|t| s.contains(t))
}

/// Splits a response into its think and answer blocks.
///
/// The response is well formed only if, ignoring surrounding whitespace, it
/// is exactly one think block followed by exactly one answer block.
/// Malformed responses still get a best-effort extraction of the first
/// blocks found, but they never earn accuracy reward.
pub fn parse_tagged(text: &str) -> ParsedResponse {
    let strict = || -> Option<(&str, &str)> {
        let t = text.trim().strip_prefix(THINK_OPEN)?;
        let close = t.find(THINK_CLOSE)?;
        let think = &t[..close];
        let rest = t[close + THINK_CLOSE.len()..].trim_start();
        let answer = rest.strip_prefix(ANSWER_OPEN)?.strip_suffix(ANSWER_CLOSE)?;
        (!has_tag(think) && !has_tag(answer)).then_some((think, answer))
    };
    match strict() {
        Some((think, answer)) => ParsedResponse {
            think: think.to_owned(),
            answer: answer.to_owned(),
            well_formed: true,
        },
        None => ParsedResponse {
            think: between(text, THINK_OPEN, THINK_CLOSE).unwrap_or_default().to_owned(),
            answer: between(text, ANSWER_OPEN, ANSWER_CLOSE).unwrap_or_default().to_owned(),
            well_formed: false,
        },
    }
}

/// Parses a score written as a decimal with at most two fractional digits,
/// returning it in hundredths.
fn parse_hundredths(text: &str) -> Option<i64> {
    let t = text.trim();
    let (int, frac) = match t.split_once('.') {
        Some((i, f)) => (i, f),
        None => (t, ""),
    };
    let digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if int.is_empty() || int.len() > 6 || !digits(int) || frac.len() > 2 || !digits(frac) {
        return None;
    }
    if t.contains('.') && frac.is_empty() {
        return None;
    }
    let whole: i64 = int.parse().ok()?;
    let mut cents: i64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    if frac.len() == 1 {
        cents *= 10;
    }
    Some(whole * 100 + cents)
}

/// Parses and range-checks a score answer.
pub fn parse_score(text: &str, cfg: &RewardConfig) -> Result<f64, RewardError> {
    let cents = parse_hundredths(text).ok_or_else(|| RewardError::NonNumericAnswer(text.trim().to_owned()))?;
    let value = cents as f64 / 100.0;
    if value < cfg.score_min || value > cfg.score_max {
        return Err(RewardError::ScoreOutOfRange(value));
    }
    Ok(value)
}

/// Scoring accuracy: 1 iff `|o - y| < zeta`, strictly.
///
/// The comparison is carried out in integer hundredths so that a difference
/// exactly equal to the tolerance is never accepted through rounding.
pub fn acc_scoring(answer: &str, truth: f64, cfg: &RewardConfig) -> Result<u8, RewardError> {
    let predicted = parse_score(answer, cfg)?;
    if !(truth >= cfg.score_min && truth <= cfg.score_max) {
        return Err(RewardError::ScoreOutOfRange(truth));
    }
    let diff = ((predicted * 100.0).round() - (truth * 100.0).round()).abs();
    let tolerance = (cfg.zeta * 100.0 * 1e9).round() / 1e9;
    Ok(u8::from(diff < tolerance))
}

/// Adjustment accuracy: 1 iff the set F1 strictly exceeds alpha.
pub fn acc_adjustment(predicted: &LabelSet, truth: &LabelSet, cfg: &RewardConfig) -> Result<u8, RewardError> {
    let f1 = defect_f1(predicted, truth)?.f1;
    Ok(u8::from(f1 > cfg.alpha))
}

/// Reads "Slide A" / "Slide B", ignoring case and surrounding whitespace.
pub fn parse_choice(answer: &str) -> Result<Choice, RewardError> {
    let norm = answer.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
    match norm.as_str() {
        "slide a" => Ok(Choice::A),
        "slide b" => Ok(Choice::B),
        _ => Err(RewardError::UnrecognizedChoice(answer.trim().to_owned())),
    }
}

pub fn acc_comparison(answer: &str, truth: Choice) -> Result<u8, RewardError> {
    Ok(u8::from(parse_choice(answer)? == truth))
}

pub const NO_DEFICIENCY_SENTINEL: &str = "no major deficiencies found";

const HEADINGS: [(&str, DefectCategory); 10] = [
    ("composition & layout", DefectCategory::CompositionLayout),
    ("composition \\& layout", DefectCategory::CompositionLayout),
    ("composition and layout", DefectCategory::CompositionLayout),
    ("typography", DefectCategory::Typography),
    ("imagery & visualizations", DefectCategory::ImageryVisualizations),
    ("imagery \\& visualizations", DefectCategory::ImageryVisualizations),
    ("imagery and visualizations", DefectCategory::ImageryVisualizations),
    ("imagery & visualization", DefectCategory::ImageryVisualizations),
    ("imagery \\& visualization", DefectCategory::ImageryVisualizations),
    ("imagery and visualization", DefectCategory::ImageryVisualizations),
];

/// Skips list markers, emphasis and LaTeX commands in front of text.
fn strip_markup(mut s: &str) -> &str {
    loop {
        let before = s.len();
        s = s.trim_start_matches(|c: char| {
            c.is_whitespace() || c.is_ascii_digit() || ".)-*#>_:{}[]|`•".contains(c)
        });
        if let Some(rest) = s.strip_prefix('\\') {
            let cmd_len = rest.bytes().take_while(u8::is_ascii_alphabetic).count();
            if cmd_len > 0 {
                s = &rest[cmd_len..];
            }
        }
        if s.len() == before {
            return s;
        }
    }
}

fn starts_with_ci(s: &str, prefix: &str) -> bool {
    s.len() >= prefix.len() && s.as_bytes()[..prefix.len()].eq_ignore_ascii_case(prefix.as_bytes())
}

fn heading_at(line: &str) -> Option<(DefectCategory, &str)> {
    let s = strip_markup(line);
    HEADINGS.iter().find_map(|&(h, cat)| {
        if !starts_with_ci(s, h) {
            return None;
        }
        let rest = &s[h.len()..];
        let boundary = rest.chars().next().is_none_or(|c| !c.is_alphanumeric());
        boundary.then_some((cat, rest))
    })
}

/// Recovers the defect categories named in free-text feedback.
///
/// A category counts when its heading starts a line and the section under it
/// does not open with the "No major deficiencies found" sentinel. Feedback
/// made only of the sentinel, or whose every section carries it, maps to
/// `{NoDeficiency}`. Text without headings or sentinel maps to the empty set.
pub fn extract_categories(feedback: &str) -> LabelSet {
    let mut sections: Vec<(DefectCategory, String)> = Vec::new();
    for line in feedback.lines() {
        match heading_at(line) {
            Some((cat, rest)) => sections.push((cat, rest.to_owned())),
            None => {
                if let Some((_, body)) = sections.last_mut() {
                    body.push('\n');
                    body.push_str(line);
                }
            }
        }
    }

    let mut found = LabelSet::new();
    for (cat, body) in &sections {
        if !starts_with_ci(strip_markup(body), NO_DEFICIENCY_SENTINEL) {
            found.insert(*cat);
        }
    }
    if found.is_empty() {
        let has_sentinel = feedback.to_lowercase().contains(NO_DEFICIENCY_SENTINEL);
        if !sections.is_empty() || has_sentinel {
            found.insert(DefectCategory::NoDeficiency);
        }
    }
    found
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub r_fmt: u8,
    pub r_acc: u8,
    pub r: u8,
    /// Why accuracy was withheld, when the answer could not be interpreted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// `r = r_fmt + r_acc`. Accuracy is judged on the answer block only and is
/// always 0 for malformed responses.
pub fn total_reward(parsed: &ParsedResponse, truth: &Truth, cfg: &RewardConfig) -> RewardBreakdown {
    let r_fmt = parsed.format_reward();
    let acc = if !parsed.well_formed {
        Ok(0)
    } else {
        match truth {
            Truth::Score(y) => acc_scoring(&parsed.answer, *y, cfg),
            Truth::Labels(y) => acc_adjustment(&extract_categories(&parsed.answer), y, cfg),
            Truth::Choice(y) => acc_comparison(&parsed.answer, *y),
        }
    };
    let (r_acc, error) = match acc {
        Ok(v) => (v, None),
        Err(e) => (0, Some(e.to_string())),
    };
    RewardBreakdown {
        r_fmt,
        r_acc,
        r: r_fmt + r_acc,
        error,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRewards {
    pub rewards: Vec<f64>,
    pub advantages: Vec<f64>,
}

/// Standardizes rewards within their group using the population standard
/// deviation. A group with no spread gets all-zero advantages.
pub fn group_advantages(rewards: &[f64]) -> Result<GroupRewards, RewardError> {
    if rewards.len() < 2 {
        return Err(RewardError::GroupTooSmall(rewards.len()));
    }
    if rewards.iter().any(|r| !r.is_finite()) {
        return Err(RewardError::InvalidInput("non-finite reward"));
    }
    let n = rewards.len() as f64;
    let mean = rewards.iter().sum::<f64>() / n;
    let var = rewards.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    let constant = rewards.iter().all(|&r| r == rewards[0]);
    let advantages = if constant || std == 0.0 {
        vec![0.0; rewards.len()]
    } else {
        rewards.iter().map(|r| (r - mean) / std).collect()
    };
    Ok(GroupRewards {
        rewards: rewards.to_vec(),
        advantages,
    })
}

/// One response's contribution: `min(ρÂ, clip(ρ, 1-δ, 1+δ)Â)`.
pub fn clipped_term(ratio: f64, advantage: f64, delta: f64) -> f64 {
    let unclipped = ratio * advantage;
    let clipped = ratio.clamp(1.0 - delta, 1.0 + delta) * advantage;
    unclipped.min(clipped)
}

/// Group mean of the clipped terms minus `β·KL`.
pub fn grpo_surrogate(ratios: &[f64], advantages: &[f64], kl: f64, cfg: &RewardConfig) -> Result<f64, RewardError> {
    if ratios.len() != advantages.len() {
        return Err(RewardError::LengthMismatch {
            left: ratios.len(),
            right: advantages.len(),
        });
    }
    if ratios.is_empty() {
        return Err(RewardError::InvalidInput("empty group"));
    }
    if ratios.iter().any(|&r| !(r > 0.0)) {
        return Err(RewardError::InvalidInput("policy ratios must be positive"));
    }
    if !(kl >= 0.0) {
        return Err(RewardError::InvalidInput("kl divergence must be non-negative"));
    }
    let sum: f64 = ratios
        .iter()
        .zip(advantages)
        .map(|(&r, &a)| clipped_term(r, a, cfg.clip_delta))
        .sum();
    Ok(sum / ratios.len() as f64 - cfg.kl_beta * kl)
}

#[cfg(test)]
mod tests {
    use super::*;
    use DefectCategory::*;

    const SCORING_EXAMPLE: &str = "<think>This slide has good overall quality.</think>\n\n<answer>8.50</answer>";

    #[test]
    fn parses_well_formed_response() {
        let p = parse_tagged(SCORING_EXAMPLE);
        assert!(p.well_formed);
        assert_eq!(p.answer, "8.50");
        assert_eq!(p.format_reward(), 1);
    }

    #[test]
    fn malformed_responses() {
        let p = parse_tagged("<think>reasoning</think>");
        assert!(!p.well_formed);
        assert_eq!(p.format_reward(), 0);

        let p = parse_tagged("<answer>8</answer><think>late</think>");
        assert!(!p.well_formed);
        assert_eq!(p.answer, "8");

        assert!(!parse_tagged("<think>a</think><answer>1</answer><answer>2</answer>").well_formed);
        assert!(!parse_tagged("<think>a</think>junk<answer>1</answer>").well_formed);
        assert!(!parse_tagged("<think>a</think><answer>1</answer> trailing").well_formed);
        assert!(parse_tagged("  <think>a</think> <answer>1</answer>\n").well_formed);
    }

    #[test]
    fn scoring_accuracy() {
        let cfg = RewardConfig::default();
        assert_eq!(acc_scoring("8.50", 8.0, &cfg), Ok(0));
        assert_eq!(acc_scoring("8.10", 8.0, &cfg), Ok(1));
        assert_eq!(acc_scoring("8.25", 8.0, &cfg), Ok(0));
        assert_eq!(acc_scoring("7.75", 8.0, &cfg), Ok(0));
        assert_eq!(acc_scoring("7.76", 8.0, &cfg), Ok(1));
        assert_eq!(acc_scoring("8", 8.0, &cfg), Ok(1));
        assert!(matches!(acc_scoring("great", 8.0, &cfg), Err(RewardError::NonNumericAnswer(_))));
        assert!(matches!(acc_scoring("8.505", 8.0, &cfg), Err(RewardError::NonNumericAnswer(_))));
        assert!(matches!(acc_scoring("11.0", 8.0, &cfg), Err(RewardError::ScoreOutOfRange(_))));
        assert!(matches!(acc_scoring("0.5", 8.0, &cfg), Err(RewardError::ScoreOutOfRange(_))));
    }

    #[test]
    fn tolerance_boundary_survives_binary_rounding() {
        let cfg = RewardConfig { zeta: 0.1, ..Default::default() };
        // 8.35 - 8.25 is not exactly 0.1 in binary floating point.
        assert_eq!(acc_scoring("8.35", 8.25, &cfg), Ok(0));
        assert_eq!(acc_scoring("8.34", 8.25, &cfg), Ok(1));
    }

    #[test]
    fn adjustment_accuracy() {
        let cfg = RewardConfig::default();
        assert_eq!(acc_adjustment(&[CompositionLayout].into(), &[CompositionLayout, Typography].into(), &cfg), Ok(1));
        // F1 = 2·1/(1+3) = 0.5 exactly
        assert_eq!(
            acc_adjustment(
                &[CompositionLayout].into(),
                &[CompositionLayout, Typography, ImageryVisualizations].into(),
                &cfg
            ),
            Ok(0)
        );
        assert_eq!(acc_adjustment(&[NoDeficiency].into(), &[NoDeficiency].into(), &cfg), Ok(1));
        assert!(acc_adjustment(&[NoDeficiency, Typography].into(), &[Typography].into(), &cfg).is_err());
    }

    #[test]
    fn comparison_accuracy() {
        assert_eq!(acc_comparison("Slide B", Choice::B), Ok(1));
        assert_eq!(acc_comparison(" slide b ", Choice::B), Ok(1));
        assert_eq!(acc_comparison("Slide A", Choice::B), Ok(0));
        assert!(matches!(acc_comparison("Both", Choice::A), Err(RewardError::UnrecognizedChoice(_))));
    }

    #[test]
    fn category_extraction() {
        let answer = "1. **Composition & Layout**\n   - Recommendations: align the blocks.\n\
                      2. **Typography**\n   - Quality: mixed header styles.\n\
                      3. **Imagery & Visualizations**\n   - **No major deficiencies found**.\n";
        assert_eq!(extract_categories(answer), LabelSet::from([CompositionLayout, Typography]));
        assert_eq!(extract_categories("No major deficiencies found."), LabelSet::from([NoDeficiency]));
        assert_eq!(extract_categories(""), LabelSet::new());
        assert_eq!(extract_categories("the slide looks fine"), LabelSet::new());
    }

    #[test]
    fn latex_flavoured_headings() {
        let answer = "\\item \\textbf{Composition \\& Layout}\n\\item \\textbf{Imagery \\& Visualizations}\n\\item \\textbf{No major deficiencies found}.";
        assert_eq!(extract_categories(answer), LabelSet::from([CompositionLayout]));
    }

    #[test]
    fn every_section_clean_means_no_deficiency() {
        let answer = "Typography: No major deficiencies found.\nImagery & Visualizations: no major deficiencies found";
        assert_eq!(extract_categories(answer), LabelSet::from([NoDeficiency]));
    }

    #[test]
    fn heading_needs_word_boundary() {
        assert_eq!(extract_categories("Typographyish remarks"), LabelSet::new());
    }

    #[test]
    fn total_reward_cases() {
        let cfg = RewardConfig::default();
        let p = parse_tagged("<think>x</think><answer>Slide B</answer>");
        assert_eq!(total_reward(&p, &Truth::Choice(Choice::B), &cfg).r, 2);

        let r = total_reward(&parse_tagged(SCORING_EXAMPLE), &Truth::Score(8.0), &cfg);
        assert_eq!((r.r_fmt, r.r_acc, r.r), (1, 0, 1));

        let r = total_reward(&parse_tagged("Slide B"), &Truth::Choice(Choice::B), &cfg);
        assert_eq!(r.r, 0);

        let r = total_reward(&parse_tagged("<think>x</think><answer>Both</answer>"), &Truth::Choice(Choice::A), &cfg);
        assert_eq!((r.r_fmt, r.r_acc), (1, 0));
        assert!(r.error.is_some());
    }

    #[test]
    fn advantage_examples() {
        assert_eq!(group_advantages(&[1.0, 1.0, 1.0]).unwrap().advantages, vec![0.0; 3]);
        assert_eq!(group_advantages(&[2.0, 0.0]).unwrap().advantages, vec![1.0, -1.0]);
        assert_eq!(group_advantages(&[1.0]), Err(RewardError::GroupTooSmall(1)));
    }

    #[test]
    fn advantage_mixed_group_matches_hand_values() {
        // mean = 7/8, population variance = (2·(9/8)² + 3·(1/8)² + 3·(7/8)²)/8 = 0.609375
        let rewards = [2.0, 2.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0];
        let std = 0.609375f64.sqrt();
        let expected = [1.125 / std, 1.125 / std, 0.125 / std, 0.125 / std, 0.125 / std, -0.875 / std, -0.875 / std, -0.875 / std];
        let adv = group_advantages(&rewards).unwrap().advantages;
        for (a, e) in adv.iter().zip(expected) {
            assert!((a - e).abs() < 1e-12, "{a} vs {e}");
        }
        assert!((expected[0] - 1.441153).abs() < 1e-6);
    }

    #[test]
    fn surrogate_cases() {
        let cfg = RewardConfig::default();
        assert!((clipped_term(1.5, 1.0, 0.2) - 1.2).abs() < 1e-12);
        assert!((clipped_term(1.5, -1.0, 0.2) + 1.5).abs() < 1e-12);
        assert!((clipped_term(0.5, -1.0, 0.2) + 0.8).abs() < 1e-12);
        assert!((clipped_term(0.5, 1.0, 0.2) - 0.5).abs() < 1e-12);

        let adv = [1.0, -1.0, 0.5];
        let j = grpo_surrogate(&[1.0; 3], &adv, 2.0, &cfg).unwrap();
        assert!((j - (0.5 / 3.0 - 0.002)).abs() < 1e-12);
        assert!(matches!(grpo_surrogate(&[1.0], &adv, 0.0, &cfg), Err(RewardError::LengthMismatch { .. })));
        assert!(grpo_surrogate(&[0.0], &[1.0], 0.0, &cfg).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(RewardConfig::default().validate().is_ok());
        assert!(RewardConfig { alpha: 1.0, ..Default::default() }.validate().is_err());
        assert!(RewardConfig { group_size: 1, ..Default::default() }.validate().is_err());
        assert!(RewardConfig { clip_delta: 0.0, ..Default::default() }.validate().is_err());
    }
}
