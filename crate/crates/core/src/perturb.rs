//! Seeded perturbations that turn a clean slide into labeled poor / base /
//! good variants and preference pairs.
//!
//! Magnitude `m ∈ [0, 1]` maps to physical ranges per family:
//!
//! | family                  | effect at m = 1                                  |
//! |-------------------------|--------------------------------------------------|
//! | within-object alignment | new alignment, shift of 0.15 toward the tighter side |
//! | layout / scale          | one element grows ×1.8 about its center          |
//! | layout / reposition     | one element moves 0.35 toward a corner           |
//! | layout / spacing        | all elements squeezed to 40% of their spread     |
//! | typography / size       | title ×0.4, other text ×1.6                      |
//! | typography / weight     | headings lose bold, all other text gains it      |
//! | typography / spacing    | line spacing +1.5, letter spacing +0.3           |
//! | imagery / aspect        | one image stretched ×1.8 on one axis             |
//! | imagery / downscale     | one image shrunk to 25% of its size              |

use std::f64::consts::FRAC_1_SQRT_2;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aesth::{HeuristicScorer, ScorerConfig};
use crate::planner::{plan_layout, repair, ContentManifest, ManifestItem, PlannerConfig, PlannerError};
use crate::slide::{canonical_json, BBox, DefectCategory, HAlign, LabelSet, SlideDoc, Weight, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutSub {
    Scale,
    Reposition,
    Spacing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TypographySub {
    Size,
    Weight,
    Spacing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImagerySub {
    AspectDistort,
    Downscale,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    WithinObjectAlignment,
    BetweenObjectLayout(LayoutSub),
    TypographyAlter(TypographySub),
    ImageryAlter(ImagerySub),
}

impl Family {
    pub const ALL: [Family; 9] = [
        Family::WithinObjectAlignment,
        Family::BetweenObjectLayout(LayoutSub::Scale),
        Family::BetweenObjectLayout(LayoutSub::Reposition),
        Family::BetweenObjectLayout(LayoutSub::Spacing),
        Family::TypographyAlter(TypographySub::Size),
        Family::TypographyAlter(TypographySub::Weight),
        Family::TypographyAlter(TypographySub::Spacing),
        Family::ImageryAlter(ImagerySub::AspectDistort),
        Family::ImageryAlter(ImagerySub::Downscale),
    ];

    pub fn category(self) -> DefectCategory {
        match self {
            Family::WithinObjectAlignment | Family::BetweenObjectLayout(_) => DefectCategory::CompositionLayout,
            Family::TypographyAlter(_) => DefectCategory::Typography,
            Family::ImageryAlter(_) => DefectCategory::ImageryVisualizations,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub family: Family,
    pub magnitude: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PerturbError {
    #[error("{0:?} does not apply: the slide has no suitable element")]
    NotApplicable(Family),
    #[error("invalid perturbation: {0}")]
    InvalidSpec(String),
    #[error("no applicable perturbation found after {0} draws")]
    RetriesExhausted(usize),
    #[error(transparent)]
    Planner(#[from] PlannerError),
}

fn fit_in_canvas(b: BBox) -> BBox {
    let w = b.w.min(1.0);
    let h = b.h.min(1.0);
    BBox::new(b.x.clamp(0.0, 1.0 - w), b.y.clamp(0.0, 1.0 - h), w, h)
}

fn scaled_about_center(b: &BBox, sx: f64, sy: f64) -> BBox {
    let (cx, cy) = b.center();
    fit_in_canvas(BBox::centered(cx, cy, b.w * sx, b.h * sy))
}

/// Applies one perturbation. Deterministic in `(slide, spec)`; magnitude 0
/// returns the slide unchanged with no labels.
pub fn apply_perturbation(slide: &SlideDoc, spec: &PerturbationSpec) -> Result<(SlideDoc, LabelSet), PerturbError> {
    let m = spec.magnitude;
    if !(0.0..=1.0).contains(&m) {
        return Err(PerturbError::InvalidSpec(format!("magnitude {m} outside [0, 1]")));
    }
    let pick = |pred: &dyn Fn(&crate::slide::Element) -> bool| -> Vec<usize> {
        (0..slide.elements.len())
            .filter(|&i| !slide.elements[i].background && pred(&slide.elements[i]))
            .collect()
    };
    let targets = match spec.family {
        Family::WithinObjectAlignment | Family::TypographyAlter(_) => pick(&|e| e.is_text() && e.style.is_some()),
        Family::ImageryAlter(_) => pick(&|e| e.is_image()),
        Family::BetweenObjectLayout(LayoutSub::Spacing) => {
            let all = pick(&|_| true);
            if all.len() < 2 {
                Vec::new()
            } else {
                all
            }
        }
        Family::BetweenObjectLayout(_) => pick(&|_| true),
    };
    if targets.is_empty() {
        return Err(PerturbError::NotApplicable(spec.family));
    }
    if m == 0.0 {
        return Ok((slide.clone(), LabelSet::new()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = slide.clone();
    let one = targets[rng.gen_range(0..targets.len())];
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };

    match spec.family {
        Family::WithinObjectAlignment => {
            let el = &mut out.elements[one];
            if let Some(style) = el.style.as_mut() {
                let others: Vec<HAlign> = [HAlign::Left, HAlign::Center, HAlign::Right]
                    .into_iter()
                    .filter(|a| *a != style.h_align)
                    .collect();
                style.h_align = others[rng.gen_range(0..others.len())];
            }
            // shift toward whichever side has less free room, so the box
            // runs into a neighbour or the canvas edge
            let b = el.bbox;
            let mut room_left = b.x;
            let mut room_right = 1.0 - b.right();
            for (j, o) in slide.elements.iter().enumerate() {
                let shares_row = o.bbox.y < b.bottom() && b.y < o.bbox.bottom();
                if j == one || o.background || !shares_row {
                    continue;
                }
                if o.bbox.right() <= b.x {
                    room_left = room_left.min(b.x - o.bbox.right());
                } else if o.bbox.x >= b.right() {
                    room_right = room_right.min(o.bbox.x - b.right());
                }
            }
            let dir = if room_left < room_right { -1.0 } else { 1.0 };
            el.bbox = fit_in_canvas(b.translated(dir * 0.15 * m, 0.0));
        }
        Family::BetweenObjectLayout(LayoutSub::Scale) => {
            let f = 1.0 + 0.8 * m;
            let el = &mut out.elements[one];
            el.bbox = scaled_about_center(&el.bbox, f, f);
        }
        Family::BetweenObjectLayout(LayoutSub::Reposition) => {
            let sy = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let step = 0.35 * m * FRAC_1_SQRT_2;
            let el = &mut out.elements[one];
            el.bbox = fit_in_canvas(el.bbox.translated(sign * step, sy * step));
        }
        Family::BetweenObjectLayout(LayoutSub::Spacing) => {
            let horizontal = rng.gen_bool(0.5);
            let f = 1.0 - 0.6 * m;
            let boxes: Vec<BBox> = targets.iter().map(|&i| slide.elements[i].bbox).collect();
            let (lo, hi) = if horizontal {
                (
                    boxes.iter().map(|b| b.x).fold(f64::INFINITY, f64::min),
                    boxes.iter().map(BBox::right).fold(0.0, f64::max),
                )
            } else {
                (
                    boxes.iter().map(|b| b.y).fold(f64::INFINITY, f64::min),
                    boxes.iter().map(BBox::bottom).fold(0.0, f64::max),
                )
            };
            let anchor = (lo + hi) / 2.0;
            for &i in &targets {
                let b = out.elements[i].bbox;
                let (cx, cy) = b.center();
                let moved = if horizontal {
                    BBox::centered(anchor + (cx - anchor) * f, cy, b.w, b.h)
                } else {
                    BBox::centered(cx, anchor + (cy - anchor) * f, b.w, b.h)
                };
                out.elements[i].bbox = fit_in_canvas(moved);
            }
        }
        Family::TypographyAlter(TypographySub::Size) => {
            let el = &mut out.elements[one];
            let f = if el.text_level() == 0 { 1.0 - 0.6 * m } else { 1.0 + 0.6 * m };
            if let Some(style) = el.style.as_mut() {
                style.font_size = (style.font_size * f).clamp(1e-3, 0.5);
            }
        }
        Family::TypographyAlter(TypographySub::Weight) => {
            // emphasis swap: headings lose bold, a share of other text gains it
            let mut order = targets.clone();
            order.shuffle(&mut rng);
            let lower: Vec<usize> = order.iter().copied().filter(|&i| out.elements[i].text_level() > 0).collect();
            let k = ((m * lower.len() as f64).round() as usize).max(1).min(lower.len());
            for &i in &order {
                let heading = out.elements[i].text_level() == 0;
                let chosen = lower[..k].contains(&i);
                if let Some(style) = out.elements[i].style.as_mut() {
                    if heading {
                        style.weight = Weight::Regular;
                    } else if chosen {
                        style.weight = Weight::Bold;
                    }
                }
            }
            if lower.is_empty() {
                for &i in &targets {
                    if let Some(style) = out.elements[i].style.as_mut() {
                        style.weight = match style.weight {
                            Weight::Bold => Weight::Regular,
                            Weight::Regular => Weight::Bold,
                        };
                    }
                }
            }
        }
        Family::TypographyAlter(TypographySub::Spacing) => {
            if let Some(style) = out.elements[one].style.as_mut() {
                style.line_spacing = (style.line_spacing + 1.5 * m).min(3.0);
                style.letter_spacing += 0.3 * m;
            }
        }
        Family::ImageryAlter(ImagerySub::AspectDistort) => {
            let f = 1.0 + 0.8 * m;
            let el = &mut out.elements[one];
            el.bbox = if rng.gen_bool(0.5) {
                scaled_about_center(&el.bbox, f, 1.0)
            } else {
                scaled_about_center(&el.bbox, 1.0, f)
            };
        }
        Family::ImageryAlter(ImagerySub::Downscale) => {
            let f = 1.0 - 0.75 * m;
            let el = &mut out.elements[one];
            el.bbox = scaled_about_center(&el.bbox, f, f);
        }
    }
    Ok((out, LabelSet::from([spec.family.category()])))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Poor,
    Base,
    Good,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub slide: SlideDoc,
    pub tier: Tier,
    pub defect_labels: LabelSet,
    pub applied: Vec<PerturbationSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variants {
    pub poor: Variant,
    pub base: Variant,
    pub good: Variant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerturbConfig {
    pub min_perturbations: usize,
    pub max_perturbations: usize,
    pub magnitude_range: (f64, f64),
    /// Draws allowed beyond the perturbations actually applied.
    pub max_redraws: usize,
    pub planner: PlannerConfig,
    pub scorer: ScorerConfig,
}

impl Default for PerturbConfig {
    fn default() -> Self {
        Self {
            min_perturbations: 2,
            max_perturbations: 3,
            magnitude_range: (0.7, 1.0),
            max_redraws: 32,
            planner: PlannerConfig::default(),
            scorer: ScorerConfig::default(),
        }
    }
}

fn clean_labels() -> LabelSet {
    LabelSet::from([DefectCategory::NoDeficiency])
}

fn applicable(slide: &SlideDoc, family: Family) -> bool {
    let spec = PerturbationSpec {
        family,
        magnitude: 0.0,
        seed: 0,
    };
    apply_perturbation(slide, &spec).is_ok()
}

/// Poor, base and good variants of `slide`. The poor variant carries 2–3
/// perturbations spanning at least two defect categories whenever the slide
/// has elements for two; the good variant is the repair pass, kept only when
/// it does not lower the heuristic score.
pub fn make_variants(slide: &SlideDoc, seed: u64, cfg: &PerturbConfig) -> Result<Variants, PerturbError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(cfg.min_perturbations..=cfg.max_perturbations.max(cfg.min_perturbations));

    let usable: Vec<Family> = Family::ALL.into_iter().filter(|f| applicable(slide, *f)).collect();
    if usable.is_empty() {
        return Err(PerturbError::NotApplicable(Family::WithinObjectAlignment));
    }
    let mut categories: Vec<DefectCategory> = Vec::new();
    for f in &usable {
        if !categories.contains(&f.category()) {
            categories.push(f.category());
        }
    }
    categories.shuffle(&mut rng);

    let (lo, hi) = cfg.magnitude_range;
    let mut current = slide.clone();
    let mut labels = LabelSet::new();
    let mut applied = Vec::new();
    let mut draws = 0;
    while applied.len() < k {
        draws += 1;
        if draws > k + cfg.max_redraws {
            return Err(PerturbError::RetriesExhausted(draws - 1));
        }
        // the first draws cycle through distinct categories
        let pool: Vec<Family> = match categories.get(applied.len()) {
            Some(cat) => usable.iter().copied().filter(|f| f.category() == *cat).collect(),
            None => usable.clone(),
        };
        let spec = PerturbationSpec {
            family: pool[rng.gen_range(0..pool.len())],
            magnitude: rng.gen_range(lo..=hi),
            seed: rng.gen(),
        };
        match apply_perturbation(&current, &spec) {
            Ok((next, l)) => {
                current = next;
                labels.extend(l);
                applied.push(spec);
            }
            Err(PerturbError::NotApplicable(_)) => continue,
            Err(e) => return Err(e),
        }
    }

    let scorer = HeuristicScorer { cfg: cfg.scorer.clone() };
    let repaired = repair(slide, &cfg.planner);
    let good_slide = if scorer.score_slide(&repaired) >= scorer.score_slide(slide) {
        repaired
    } else {
        slide.clone()
    };
    Ok(Variants {
        poor: Variant {
            slide: current,
            tier: Tier::Poor,
            defect_labels: labels,
            applied,
        },
        base: Variant {
            slide: slide.clone(),
            tier: Tier::Base,
            defect_labels: clean_labels(),
            applied: Vec::new(),
        },
        good: Variant {
            slide: good_slide,
            tier: Tier::Good,
            defect_labels: clean_labels(),
            applied: Vec::new(),
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preference {
    First,
    Second,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlidePair {
    pub first: Variant,
    pub second: Variant,
    pub preference: Preference,
}

/// The three pairs (good, base), (base, poor), (good, poor), each in a
/// seeded order, with the preference pointing at the higher tier.
pub fn make_pairs(v: &Variants, seed: u64) -> Vec<SlidePair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    [(&v.good, &v.base), (&v.base, &v.poor), (&v.good, &v.poor)]
        .into_iter()
        .map(|(hi, lo)| {
            let (first, second) = if rng.gen_bool(0.5) { (lo, hi) } else { (hi, lo) };
            SlidePair {
                preference: if first.tier > second.tier { Preference::First } else { Preference::Second },
                first: first.clone(),
                second: second.clone(),
            }
        })
        .collect()
}

/// One line of the benchmark JSONL file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub schema_version: u32,
    pub pair_id: String,
    pub first: SlideDoc,
    pub second: SlideDoc,
    pub preference: Preference,
    pub defect_labels_first: LabelSet,
    pub defect_labels_second: LabelSet,
    pub tier_first: Tier,
    pub tier_second: Tier,
    pub seed: u64,
}

impl BenchmarkRow {
    pub fn from_pair(slide_index: usize, pair: &SlidePair, seed: u64) -> Self {
        let tier = |t: Tier| match t {
            Tier::Poor => "poor",
            Tier::Base => "base",
            Tier::Good => "good",
        };
        Self {
            schema_version: SCHEMA_VERSION,
            pair_id: format!("{slide_index:05}-{}-{}", tier(pair.first.tier), tier(pair.second.tier)),
            first: pair.first.slide.clone(),
            second: pair.second.slide.clone(),
            preference: pair.preference,
            defect_labels_first: pair.first.defect_labels.clone(),
            defect_labels_second: pair.second.defect_labels.clone(),
            tier_first: pair.first.tier,
            tier_second: pair.second.tier,
            seed,
        }
    }

    /// Canonical single-line JSON.
    pub fn to_line(&self) -> String {
        let value = serde_json::to_value(self).expect("benchmark rows always serialize");
        canonical_json(&value)
    }
}

/// Per-slide seed derived from the run seed, so slides can be processed in
/// any order.
pub fn slide_seed(seed: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng.gen()
}

/// Benchmark rows for a corpus: three pairs per slide.
pub fn benchmark_rows(corpus: &[SlideDoc], seed: u64, cfg: &PerturbConfig) -> Result<Vec<BenchmarkRow>, PerturbError> {
    let mut rows = Vec::with_capacity(corpus.len() * 3);
    for (i, slide) in corpus.iter().enumerate() {
        let s = slide_seed(seed, i);
        let v = make_variants(slide, s, cfg)?;
        rows.extend(make_pairs(&v, s).iter().map(|p| BenchmarkRow::from_pair(i, p, s)));
    }
    Ok(rows)
}

const WORDS: &[&str] = &[
    "revenue", "growth", "market", "quarterly", "customer", "retention", "pipeline", "model", "latency", "throughput",
    "design", "research", "results", "analysis", "baseline", "improvement", "strategy", "roadmap", "team", "budget",
    "forecast", "risk", "launch", "feedback", "survey", "accuracy", "dataset", "training", "evaluation", "summary",
    "regional", "sales", "product", "platform", "users", "costs", "margin", "hiring", "goals", "timeline",
];

fn sentence(rng: &mut ChaCha8Rng, words: usize) -> String {
    let mut s: Vec<&str> = Vec::with_capacity(words);
    for _ in 0..words {
        s.push(WORDS[rng.gen_range(0..WORDS.len())]);
    }
    let mut out = s.join(" ");
    if let Some(first) = out.get(0..1) {
        out.replace_range(0..1, &first.to_uppercase());
    }
    out
}

const IMAGE_ASPECTS: [f64; 5] = [4.0 / 3.0, 16.0 / 9.0, 1.0, 3.0 / 4.0, 3.0 / 2.0];

/// A plausible content manifest: a title, one or two body paragraphs, an
/// optional caption and up to two images.
pub fn synthetic_manifest(rng: &mut ChaCha8Rng) -> ContentManifest {
    let mut items = Vec::new();
    let mut rank = 0;
    let mut next = || {
        rank += 1;
        rank - 1
    };
    let title_words = rng.gen_range(2..=6);
    items.push(ManifestItem::text(next(), &sentence(rng, title_words)).with_level(0));
    for _ in 0..rng.gen_range(1..=2) {
        let words = rng.gen_range(10..=40);
        items.push(ManifestItem::text(next(), &(sentence(rng, words) + ".")).with_level(1));
    }
    let images = rng.gen_range(0..=2);
    for _ in 0..images {
        let aspect = IMAGE_ASPECTS[rng.gen_range(0..IMAGE_ASPECTS.len())];
        items.push(ManifestItem::image(next(), aspect));
    }
    if images > 0 && rng.gen_bool(0.3) {
        let words = rng.gen_range(3..=8);
        items.push(ManifestItem::text(next(), &sentence(rng, words)).with_level(2));
    }
    ContentManifest::new(items)
}

/// `n` planner-built slides from seeded manifests. Manifests the planner
/// cannot place are redrawn.
pub fn synthetic_corpus(n: usize, seed: u64, aspect_ratio: f64, cfg: &PlannerConfig) -> Result<Vec<SlideDoc>, PerturbError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut failures = 0;
    while out.len() < n {
        let manifest = synthetic_manifest(&mut rng);
        match plan_layout(&manifest, aspect_ratio, cfg) {
            Ok(slide) => out.push(slide),
            Err(PlannerError::Overconstrained) if failures < 16 * n.max(1) => failures += 1,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::layout_balance;
    use crate::slide::{validate, Element, DEFAULT_ASPECT};

    fn fixture() -> SlideDoc {
        synthetic_corpus(1, 3, DEFAULT_ASPECT, &PlannerConfig::default()).unwrap().remove(0)
    }

    #[test]
    fn zero_magnitude_is_identity() {
        let s = fixture();
        for family in Family::ALL {
            let spec = PerturbationSpec { family, magnitude: 0.0, seed: 9 };
            match apply_perturbation(&s, &spec) {
                Ok((out, labels)) => {
                    assert_eq!(out, s);
                    assert!(labels.is_empty());
                }
                Err(e) => assert_eq!(e, PerturbError::NotApplicable(family)),
            }
        }
    }

    #[test]
    fn reposition_toward_corner() {
        let s = SlideDoc::with_elements(DEFAULT_ASPECT, vec![Element::shape("a", BBox::centered(0.5, 0.5, 0.2, 0.2))]);
        let spec = PerturbationSpec {
            family: Family::BetweenObjectLayout(LayoutSub::Reposition),
            magnitude: 0.8,
            seed: 1,
        };
        let (out, labels) = apply_perturbation(&s, &spec).unwrap();
        assert_eq!(labels, LabelSet::from([DefectCategory::CompositionLayout]));
        let (cx, cy) = out.elements[0].bbox.center();
        let d = ((cx - 0.5).powi(2) + (cy - 0.5).powi(2)).sqrt();
        let expected = 1.0 - d / FRAC_1_SQRT_2;
        assert!((d - 0.28).abs() < 1e-12);
        assert!((layout_balance(&out).unwrap().balance - expected).abs() < 1e-12);
    }

    #[test]
    fn text_size_maps_to_typography() {
        let s = fixture();
        let spec = PerturbationSpec {
            family: Family::TypographyAlter(TypographySub::Size),
            magnitude: 1.0,
            seed: 4,
        };
        assert_eq!(apply_perturbation(&s, &spec).unwrap().1, LabelSet::from([DefectCategory::Typography]));
    }

    #[test]
    fn imagery_needs_an_image() {
        let s = SlideDoc::with_elements(DEFAULT_ASPECT, vec![Element::shape("a", BBox::centered(0.5, 0.5, 0.2, 0.2))]);
        let spec = PerturbationSpec {
            family: Family::ImageryAlter(ImagerySub::Downscale),
            magnitude: 0.5,
            seed: 0,
        };
        assert!(matches!(apply_perturbation(&s, &spec), Err(PerturbError::NotApplicable(_))));
    }

    #[test]
    fn variants_follow_tier_rules() {
        let s = fixture();
        let v = make_variants(&s, 42, &PerturbConfig::default()).unwrap();
        assert!(v.poor.applied.len() >= 2);
        assert!(v.poor.defect_labels.len() >= 2, "{:?}", v.poor.defect_labels);
        assert_eq!(v.base.slide, s);
        assert!(v.base.applied.is_empty());
        for variant in [&v.poor, &v.base, &v.good] {
            assert!(validate(&variant.slide).is_empty());
        }
        assert_eq!(v, make_variants(&s, 42, &PerturbConfig::default()).unwrap());
    }

    #[test]
    fn pairs_prefer_higher_tier() {
        let v = make_variants(&fixture(), 5, &PerturbConfig::default()).unwrap();
        let pairs = make_pairs(&v, 11);
        assert_eq!(pairs.len(), 3);
        for p in &pairs {
            let winner = match p.preference {
                Preference::First => &p.first,
                Preference::Second => &p.second,
            };
            assert_eq!(winner.tier, p.first.tier.max(p.second.tier));
        }
    }

    #[test]
    fn rows_are_single_canonical_lines() {
        let corpus = synthetic_corpus(2, 1, DEFAULT_ASPECT, &PlannerConfig::default()).unwrap();
        let rows = benchmark_rows(&corpus, 7, &PerturbConfig::default()).unwrap();
        assert_eq!(rows.len(), 6);
        for r in &rows {
            let line = r.to_line();
            assert!(!line.contains('\n'));
            let back: BenchmarkRow = serde_json::from_str(&line).unwrap();
            assert_eq!(back.pair_id, r.pair_id);
        }
    }
}
