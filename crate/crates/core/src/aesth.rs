//! Deterministic, geometry-driven aesthetic scorer.
//!
//! Seven components in `[0, 1]` (1 is best) are combined with weights that
//! sum to one and mapped onto the 1–10 scale: `1 + 9·Σ wᵢcᵢ`, rounded to two
//! decimals. Every component below its threshold produces a feedback item.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checker::{Feedback, FeedbackItem, FeedbackOp, Scorer, ScorerError};
use crate::metrics::layout_balance;
use crate::slide::{overlap_area, BBox, DefectCategory, Element, SlideDoc, Weight};
use crate::typeset;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Components {
    pub balance: f64,
    pub overlap_penalty: f64,
    pub overflow_penalty: f64,
    pub whitespace_band: f64,
    pub font_hierarchy: f64,
    pub legibility: f64,
    pub image_aspect: f64,
}

impl Default for Components {
    fn default() -> Self {
        Self {
            balance: 1.0,
            overlap_penalty: 1.0,
            overflow_penalty: 1.0,
            whitespace_band: 1.0,
            font_hierarchy: 1.0,
            legibility: 1.0,
            image_aspect: 1.0,
        }
    }
}

impl Components {
    pub fn as_array(&self) -> [f64; 7] {
        [
            self.balance,
            self.overlap_penalty,
            self.overflow_penalty,
            self.whitespace_band,
            self.font_hierarchy,
            self.legibility,
            self.image_aspect,
        ]
    }

    pub fn dot(&self, other: &Components) -> f64 {
        self.as_array().iter().zip(other.as_array()).map(|(a, b)| a * b).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid scorer config: {0}")]
pub struct ScorerConfigError(pub String);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScorerConfig {
    /// Component weights; must be non-negative and sum to 1.
    pub weights: Components,
    /// A component below its threshold triggers feedback.
    pub thresholds: Components,
    /// Raw balance at or below which the balance component is 0.
    pub balance_floor: f64,
    /// Raw balance at or above which the balance component is 1.
    pub balance_full: f64,
    /// Content coverage band that scores 1.
    pub coverage_band: (f64, f64),
    /// Safe-area margin on every canvas edge.
    pub margin: f64,
    /// Overlap component is `1 − gain·Σ overlap/smaller area`.
    pub overlap_gain: f64,
    /// Overflow component is `1 − gain·Σ (protrusion + text excess)`.
    pub overflow_gain: f64,
    /// Smallest comfortable font size, fraction of canvas height.
    pub min_font: f64,
    /// Adjacent hierarchy levels should differ at least by this ratio.
    pub min_level_ratio: f64,
    pub max_line_spacing: f64,
    pub max_letter_spacing: f64,
    /// Images below this normalized area are considered too small.
    pub min_image_area: f64,
}

impl Default for ScorerConfig {
    fn default() -> Self {
        Self {
            weights: Components {
                balance: 0.25,
                overlap_penalty: 0.2,
                overflow_penalty: 0.15,
                whitespace_band: 0.1,
                font_hierarchy: 0.15,
                legibility: 0.1,
                image_aspect: 0.05,
            },
            thresholds: Components {
                balance: 0.6,
                overlap_penalty: 0.95,
                overflow_penalty: 0.95,
                whitespace_band: 0.75,
                font_hierarchy: 0.9,
                legibility: 0.9,
                image_aspect: 0.9,
            },
            balance_floor: 0.8,
            balance_full: 0.97,
            coverage_band: (0.25, 0.65),
            margin: 0.03,
            overlap_gain: 4.0,
            overflow_gain: 4.0,
            min_font: 0.02,
            min_level_ratio: 1.15,
            max_line_spacing: 1.6,
            max_letter_spacing: 0.08,
            min_image_area: 0.05,
        }
    }
}

impl ScorerConfig {
    pub fn validate(&self) -> Result<(), ScorerConfigError> {
        let w = self.weights.as_array();
        if w.iter().any(|v| !(*v >= 0.0)) {
            return Err(ScorerConfigError("weights must be non-negative".into()));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(ScorerConfigError(format!("weights sum to {sum}, expected 1")));
        }
        if !(self.balance_floor < self.balance_full) {
            return Err(ScorerConfigError("balance_floor must be below balance_full".into()));
        }
        let (lo, hi) = self.coverage_band;
        if !(0.0 < lo && lo < hi && hi < 1.0) {
            return Err(ScorerConfigError("coverage band must satisfy 0 < lo < hi < 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreBreakdown {
    pub components: Components,
    pub weights: Components,
    /// Raw layout balance, 1.0 for a slide without content.
    pub raw_balance: f64,
    /// Fraction of the canvas covered by the union of content boxes.
    pub coverage: f64,
    /// `1 + 9·Σ wᵢcᵢ`, rounded to two decimals.
    pub final_score: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct HeuristicScorer {
    pub cfg: ScorerConfig,
}

fn unit(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

pub fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

/// Exact area of a union of boxes by coordinate compression.
pub fn union_area(boxes: &[BBox]) -> f64 {
    let mut xs: Vec<f64> = boxes.iter().flat_map(|b| [b.x, b.right()]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut area = 0.0;
    for win in xs.windows(2) {
        let (x0, x1) = (win[0], win[1]);
        let mut spans: Vec<(f64, f64)> = boxes
            .iter()
            .filter(|b| b.x <= x0 && b.right() >= x1)
            .map(|b| (b.y, b.bottom()))
            .collect();
        spans.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut covered = 0.0;
        let mut cur: Option<(f64, f64)> = None;
        for (lo, hi) in spans {
            match cur {
                Some((clo, chi)) if lo <= chi => cur = Some((clo, chi.max(hi))),
                Some((clo, chi)) => {
                    covered += chi - clo;
                    cur = Some((lo, hi));
                }
                None => cur = Some((lo, hi)),
            }
        }
        if let Some((lo, hi)) = cur {
            covered += hi - lo;
        }
        area += covered * (x1 - x0);
    }
    area
}

impl HeuristicScorer {
    pub fn new(cfg: ScorerConfig) -> Result<Self, ScorerConfigError> {
        cfg.validate()?;
        Ok(Self { cfg })
    }

    fn balance(&self, raw: f64) -> f64 {
        unit((raw - self.cfg.balance_floor) / (self.cfg.balance_full - self.cfg.balance_floor))
    }

    /// Pairs of content elements whose interiors intersect, with the overlap
    /// as a fraction of the smaller box.
    fn overlaps<'a>(&self, content: &[&'a Element]) -> Vec<(&'a Element, &'a Element, f64)> {
        let mut out = Vec::new();
        for (i, a) in content.iter().enumerate() {
            for b in &content[i + 1..] {
                let ov = overlap_area(&a.bbox, &b.bbox);
                if ov > 1e-12 {
                    let smaller = a.bbox.area().min(b.bbox.area());
                    out.push((*a, *b, ov / smaller));
                }
            }
        }
        out
    }

    fn overflow_amount(&self, el: &Element, aspect: f64) -> f64 {
        let m = self.cfg.margin;
        let b = &el.bbox;
        let safe = BBox::new(m, m, 1.0 - 2.0 * m, 1.0 - 2.0 * m);
        let inside = b.intersection(&safe).map_or(0.0, |i| i.area());
        let protrusion = if b.area() > 0.0 { 1.0 - inside / b.area() } else { 0.0 };
        let text_excess = typeset::required_height(el, aspect)
            .map_or(0.0, |need| ((need - b.h) / b.h).clamp(0.0, 1.0));
        protrusion + text_excess
    }

    fn whitespace(&self, coverage: f64) -> f64 {
        let (lo, hi) = self.cfg.coverage_band;
        if coverage < lo {
            unit(coverage / lo)
        } else if coverage > hi {
            unit((1.0 - coverage) / (1.0 - hi))
        } else {
            1.0
        }
    }

    fn font_hierarchy(&self, texts: &[&Element]) -> f64 {
        let mut levels: BTreeMap<u8, Vec<(f64, Weight)>> = BTreeMap::new();
        for el in texts {
            if let Some(s) = &el.style {
                levels.entry(el.text_level()).or_default().push((s.font_size, s.weight));
            }
        }
        let mut worst: f64 = 1.0;
        for sizes in levels.values() {
            let lo = sizes.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
            let hi = sizes.iter().map(|s| s.0).fold(0.0, f64::max);
            // within-level consistency: 0.8 ratio or worse scores 0
            worst = worst.min(unit((lo / hi - 0.8) / 0.2));
            if sizes.iter().any(|s| s.1 != sizes[0].1) {
                worst = worst.min(0.5);
            }
        }
        let levels: Vec<&Vec<(f64, Weight)>> = levels.values().collect();
        for pair in levels.windows(2) {
            let (upper, lower) = (pair[0], pair[1]);
            let upper_min = upper.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
            let lower_max = lower.iter().map(|s| s.0).fold(0.0, f64::max);
            let mut s = unit((upper_min / lower_max - 1.0) / (self.cfg.min_level_ratio - 1.0));
            let upper_bold = upper.iter().any(|x| x.1 == Weight::Bold);
            let lower_bold = lower.iter().any(|x| x.1 == Weight::Bold);
            if lower_bold && !upper_bold {
                s = 0.0;
            }
            worst = worst.min(s);
        }
        worst
    }

    fn legibility(&self, texts: &[&Element]) -> f64 {
        texts
            .iter()
            .filter_map(|el| el.style.as_ref())
            .map(|s| {
                let size = unit(s.font_size / self.cfg.min_font).powi(2);
                let lines = unit(1.0 - (s.line_spacing - self.cfg.max_line_spacing) / 0.6);
                let tracking = unit(1.0 - (s.letter_spacing - self.cfg.max_letter_spacing) / 0.2);
                size * lines * tracking
            })
            .fold(1.0, f64::min)
    }

    fn image_quality(&self, el: &Element, aspect: f64) -> f64 {
        let Some(intrinsic) = el.intrinsic_aspect else { return 1.0 };
        let distortion = (el.bbox.physical_aspect(aspect) / intrinsic).ln().abs();
        let fidelity = unit(1.0 - distortion / 1.2f64.ln());
        let size = unit(el.bbox.area() / self.cfg.min_image_area);
        fidelity * size
    }

    pub fn breakdown(&self, slide: &SlideDoc) -> ScoreBreakdown {
        let content: Vec<&Element> = slide.content().collect();
        let texts: Vec<&Element> = content.iter().copied().filter(|e| e.is_text()).collect();
        let aspect = slide.aspect_ratio;

        let raw_balance = layout_balance(slide).map_or(1.0, |b| b.balance);
        let boxes: Vec<BBox> = content.iter().map(|e| e.bbox).collect();
        let coverage = union_area(&boxes);
        let overlap_sum: f64 = self.overlaps(&content).iter().map(|o| o.2).sum();
        let overflow_sum: f64 = content.iter().map(|e| self.overflow_amount(e, aspect)).sum();

        let components = Components {
            balance: self.balance(raw_balance),
            overlap_penalty: unit(1.0 - self.cfg.overlap_gain * overlap_sum),
            overflow_penalty: unit(1.0 - self.cfg.overflow_gain * overflow_sum),
            whitespace_band: self.whitespace(coverage),
            font_hierarchy: self.font_hierarchy(&texts),
            legibility: self.legibility(&texts),
            image_aspect: content
                .iter()
                .filter(|e| e.is_image())
                .map(|e| self.image_quality(e, aspect))
                .fold(1.0, f64::min),
        };
        let weights = self.cfg.weights;
        ScoreBreakdown {
            components,
            weights,
            raw_balance,
            coverage,
            final_score: round2(1.0 + 9.0 * components.dot(&weights)),
        }
    }

    pub fn score_slide(&self, slide: &SlideDoc) -> f64 {
        self.breakdown(slide).final_score
    }

    /// Feedback items for every component under its threshold, or the single
    /// no-deficiency item when all components pass.
    pub fn feedback_for(&self, slide: &SlideDoc) -> Feedback {
        let b = self.breakdown(slide);
        let c = &b.components;
        let t = &self.cfg.thresholds;
        let content: Vec<&Element> = slide.content().collect();
        let all_ids: Vec<String> = content.iter().map(|e| e.id.clone()).collect();
        let text_ids: Vec<String> = content.iter().filter(|e| e.is_text()).map(|e| e.id.clone()).collect();
        let aspect = slide.aspect_ratio;
        let mut items = Vec::new();

        let mut layout_notes = Vec::new();
        if c.balance < t.balance {
            layout_notes.push(format!("off-center visual weight (balance {:.2})", b.raw_balance));
        }
        if c.whitespace_band < t.whitespace_band {
            layout_notes.push(format!("content covers {:.0}% of the canvas", b.coverage * 100.0));
        }
        if c.overflow_penalty < t.overflow_penalty {
            layout_notes.push("content spills past the safe area or its box".to_owned());
        }
        if !layout_notes.is_empty() {
            items.push(FeedbackItem {
                category: DefectCategory::CompositionLayout,
                element_ids: all_ids.clone(),
                suggested_op: Some(FeedbackOp::Respace),
                note: layout_notes.join("; "),
            });
        }
        if c.overlap_penalty < t.overlap_penalty {
            let mut ids: Vec<String> = Vec::new();
            for (a, bb, _) in self.overlaps(&content) {
                for id in [&a.id, &bb.id] {
                    if !ids.contains(id) {
                        ids.push(id.clone());
                    }
                }
            }
            items.push(FeedbackItem {
                category: DefectCategory::CompositionLayout,
                element_ids: ids,
                suggested_op: Some(FeedbackOp::Rescale),
                note: "overlapping elements".to_owned(),
            });
        }
        if c.font_hierarchy < t.font_hierarchy || c.legibility < t.legibility {
            let mut notes = Vec::new();
            if c.font_hierarchy < t.font_hierarchy {
                notes.push("font sizes do not follow the information hierarchy");
            }
            if c.legibility < t.legibility {
                notes.push("text is too small or too loosely spaced");
            }
            items.push(FeedbackItem {
                category: DefectCategory::Typography,
                element_ids: text_ids,
                suggested_op: Some(FeedbackOp::NormalizeFonts),
                note: notes.join("; "),
            });
        }
        if c.image_aspect < t.image_aspect {
            let mut distorted = Vec::new();
            let mut small = false;
            for el in content.iter().filter(|e| e.is_image()) {
                if self.image_quality(el, aspect) >= t.image_aspect {
                    continue;
                }
                let ratio = el.bbox.physical_aspect(aspect) / el.intrinsic_aspect.unwrap_or(1.0);
                if (ratio.ln()).abs() > 0.01 {
                    distorted.push(el.id.clone());
                }
                if el.bbox.area() < self.cfg.min_image_area {
                    small = true;
                }
            }
            if !distorted.is_empty() {
                items.push(FeedbackItem {
                    category: DefectCategory::ImageryVisualizations,
                    element_ids: distorted,
                    suggested_op: Some(FeedbackOp::FixAspect),
                    note: "image drawn at the wrong aspect ratio".to_owned(),
                });
            }
            if small {
                items.push(FeedbackItem {
                    category: DefectCategory::ImageryVisualizations,
                    element_ids: all_ids,
                    suggested_op: Some(FeedbackOp::Respace),
                    note: "image too small to read".to_owned(),
                });
            }
        }

        if items.is_empty() {
            Feedback::clean()
        } else {
            Feedback { items }
        }
    }
}

impl Scorer for HeuristicScorer {
    fn score(&self, slide: &SlideDoc) -> Result<f64, ScorerError> {
        Ok(self.score_slide(slide))
    }

    fn feedback(&self, slide: &SlideDoc) -> Result<Feedback, ScorerError> {
        Ok(self.feedback_for(slide))
    }
}
