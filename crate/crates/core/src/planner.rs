//! Geometric layout planner and the default refiner.
//!
//! Layouts come from a handful of templates (stacked column, two columns at
//! several split ratios, header + grid). Every candidate is placed inside the
//! safe area without overlap; the one with the best layout balance wins,
//! preferring candidates whose coverage sits in the comfortable band.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aesth::union_area;
use crate::checker::{Feedback, FeedbackOp, Refiner, RefinerError};
use crate::metrics::balance_from_masses;
use crate::slide::{overlap_area, BBox, Element, ElementKind, SlideDoc, Style, Weight};
use crate::typeset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    /// Safe-area margin; one grid column by default so grid snapping keeps it.
    pub margin: f64,
    pub gutter: f64,
    /// Preferred body font, fraction of canvas height.
    pub body_font: f64,
    /// Smallest body font the planner will shrink to.
    pub min_body_font: f64,
    /// Font size of each hierarchy level relative to body (level 1).
    pub level_ratios: Vec<f64>,
    pub line_spacing: f64,
    /// Balance the planner tries to reach before settling for less.
    pub balance_target: f64,
    pub coverage_band: (f64, f64),
    /// Images are never planned smaller than this normalized area.
    pub min_image_area: f64,
    pub grid_columns: u32,
    /// Physical aspect for shapes that carry none.
    pub shape_aspect: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            margin: 1.0 / 24.0,
            gutter: 0.03,
            body_font: 0.04,
            min_body_font: 0.025,
            level_ratios: vec![1.5, 1.0, 0.8],
            line_spacing: 1.2,
            balance_target: 0.7,
            coverage_band: (0.25, 0.65),
            min_image_area: 0.05,
            grid_columns: 24,
            shape_aspect: 1.5,
        }
    }
}

impl PlannerConfig {
    /// Font ratio for a level; levels past the table keep shrinking by 15%.
    pub fn ratio(&self, level: u8) -> f64 {
        let n = self.level_ratios.len();
        let l = level as usize;
        if l < n {
            self.level_ratios[l]
        } else {
            self.level_ratios.last().copied().unwrap_or(1.0) * 0.85f64.powi((l + 1 - n) as i32)
        }
    }

    fn safe_area(&self) -> BBox {
        BBox::new(self.margin, self.margin, 1.0 - 2.0 * self.margin, 1.0 - 2.0 * self.margin)
    }

    fn text_style(&self, level: u8, body: f64) -> Style {
        let mut style = Style::text(body * self.ratio(level));
        style.line_spacing = self.line_spacing;
        style.letter_spacing = 0.0;
        style.weight = if level == 0 { Weight::Bold } else { Weight::Regular };
        style
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlannerError {
    #[error("invalid manifest: {0}")]
    InvalidManifest(String),
    #[error("content does not fit at the minimum legible font")]
    Overconstrained,
    #[error("feedback references unknown element id {0:?}")]
    UnknownElementId(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestItem {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub kind: ElementKind,
    /// Lower rank is more important.
    pub rank: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    /// Used when `text` is absent; filler of this length is generated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text_len: Option<usize>,
    /// Width / height of an image or shape.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intrinsic_aspect: Option<f64>,
    /// Explicit hierarchy level: 0 title, 1 body, 2 caption.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u8>,
}

impl ManifestItem {
    pub fn text(rank: u32, text: &str) -> Self {
        Self {
            id: None,
            kind: ElementKind::Text,
            rank,
            text: Some(text.to_owned()),
            text_len: None,
            intrinsic_aspect: None,
            level: None,
        }
    }

    pub fn image(rank: u32, aspect: f64) -> Self {
        Self {
            id: None,
            kind: ElementKind::Image,
            rank,
            text: None,
            text_len: None,
            intrinsic_aspect: Some(aspect),
            level: None,
        }
    }

    pub fn with_level(mut self, level: u8) -> Self {
        self.level = Some(level);
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ContentManifest {
    #[serde(default)]
    pub items: Vec<ManifestItem>,
}

impl ContentManifest {
    pub fn new(items: Vec<ManifestItem>) -> Self {
        Self { items }
    }

    pub fn validate(&self) -> Result<(), PlannerError> {
        let mut ranks = BTreeSet::new();
        let mut ids = BTreeSet::new();
        for item in &self.items {
            if !ranks.insert(item.rank) {
                return Err(PlannerError::InvalidManifest(format!("duplicate rank {}", item.rank)));
            }
            if let Some(id) = &item.id {
                if !ids.insert(id.clone()) {
                    return Err(PlannerError::InvalidManifest(format!("duplicate id {id:?}")));
                }
            }
            match item.kind {
                ElementKind::Text if item.text.is_none() && item.text_len.is_none() => {
                    return Err(PlannerError::InvalidManifest(format!("text item {} has no text or text_len", item.rank)));
                }
                ElementKind::Image if !item.intrinsic_aspect.is_some_and(|a| a.is_finite() && a > 0.0) => {
                    return Err(PlannerError::InvalidManifest(format!("image item {} needs intrinsic_aspect > 0", item.rank)));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

const FILLER: &str = "Lorem ipsum dolor sit amet consectetur adipiscing elit sed do eiusmod tempor incididunt ut labore et dolore magna aliqua ";

fn filler(len: usize) -> String {
    FILLER.chars().cycle().take(len).collect()
}

/// One element to be placed by the reflow engine.
#[derive(Debug, Clone)]
struct Block {
    el: usize,
    kind: ElementKind,
    chars: usize,
    level: u8,
    /// Physical width / height for non-text blocks.
    aspect: f64,
}

#[derive(Debug, Clone)]
struct Placement {
    el: usize,
    bbox: BBox,
    style: Option<Style>,
}

/// Height of a text box, computed conservatively so a box that is later
/// rounded to six decimals still holds its text.
fn text_box_height(chars: usize, w: f64, aspect: f64, style: &Style) -> f64 {
    typeset::text_height(chars, (w - 1e-5).max(1e-6), aspect, style) + 1e-5
}

struct Flow<'a> {
    cfg: &'a PlannerConfig,
    aspect: f64,
    body: f64,
    /// Text frames absorb the column height images leave free.
    fill_text: bool,
    /// Images start at this fraction of the column width.
    image_scale: f64,
}

impl Flow<'_> {
    /// Blocks stacked top to bottom in `col`, centered vertically. Images
    /// share whatever height text leaves and are centered horizontally.
    /// With `fill_text`, text frames take up the height that remains.
    fn column(&self, blocks: &[&Block], col: BBox) -> Option<Vec<Placement>> {
        if blocks.is_empty() {
            return Some(Vec::new());
        }
        let gaps = self.cfg.gutter * (blocks.len() - 1) as f64;
        let mut text_sum = 0.0;
        let mut natural_sum = 0.0;
        let mut dims = Vec::with_capacity(blocks.len());
        for b in blocks {
            if b.kind == ElementKind::Text {
                let style = self.cfg.text_style(b.level, self.body);
                let h = text_box_height(b.chars, col.w, self.aspect, &style);
                text_sum += h;
                dims.push((col.w, h, Some(style)));
            } else {
                let w = col.w * self.image_scale;
                let h = w * self.aspect / b.aspect;
                natural_sum += h;
                dims.push((w, h, None));
            }
        }
        if text_sum + gaps > col.h {
            return None;
        }
        let room = col.h - text_sum - gaps;
        let scale = if natural_sum > room { room / natural_sum } else { 1.0 };
        for (d, b) in dims.iter_mut().zip(blocks) {
            if b.kind != ElementKind::Text {
                d.0 *= scale;
                d.1 *= scale;
                if d.0 * d.1 < self.cfg.min_image_area {
                    return None;
                }
            }
        }
        let texts = blocks.iter().filter(|b| b.kind == ElementKind::Text).count();
        if self.fill_text && texts > 0 {
            let used: f64 = dims.iter().map(|d| d.1).sum::<f64>() + gaps;
            let extra = (col.h - used).max(0.0) / texts as f64;
            for (d, b) in dims.iter_mut().zip(blocks) {
                if b.kind == ElementKind::Text {
                    d.1 += extra;
                }
            }
        }
        let total: f64 = dims.iter().map(|d| d.1).sum::<f64>() + gaps;
        let mut y = col.y + (col.h - total) / 2.0;
        let mut out = Vec::with_capacity(blocks.len());
        for ((w, h, style), b) in dims.into_iter().zip(blocks) {
            let x = col.x + (col.w - w) / 2.0;
            out.push(Placement {
                el: b.el,
                bbox: BBox::new(x, y, w, h),
                style,
            });
            y += h + self.cfg.gutter;
        }
        Some(out)
    }

    fn two_columns(&self, left: &[&Block], right: &[&Block], region: BBox, split: f64) -> Option<Vec<Placement>> {
        let usable = region.w - self.cfg.gutter;
        let lw = usable * split;
        let lcol = BBox::new(region.x, region.y, lw, region.h);
        let rcol = BBox::new(region.x + lw + self.cfg.gutter, region.y, usable - lw, region.h);
        let mut out = self.column(left, lcol)?;
        out.extend(self.column(right, rcol)?);
        Some(out)
    }

    fn grid(&self, blocks: &[&Block], region: BBox) -> Option<Vec<Placement>> {
        let n = blocks.len();
        let cols = (n as f64).sqrt().ceil() as usize;
        let rows = n.div_ceil(cols);
        let g = self.cfg.gutter;
        let cw = (region.w - g * (cols - 1) as f64) / cols as f64;
        let ch = (region.h - g * (rows - 1) as f64) / rows as f64;
        let mut out = Vec::new();
        for (i, b) in blocks.iter().enumerate() {
            let (r, c) = (i / cols, i % cols);
            let cell = BBox::new(region.x + c as f64 * (cw + g), region.y + r as f64 * (ch + g), cw, ch);
            out.extend(self.column(&[*b], cell)?);
        }
        Some(out)
    }

    /// Every template candidate for `blocks` inside `region`, flagged when it
    /// sets text beside images (preferred for mixed content).
    fn candidates(&self, blocks: &[Block], region: BBox) -> Vec<(Vec<Placement>, bool)> {
        let all: Vec<&Block> = blocks.iter().collect();
        let mut out = Vec::new();
        out.extend(self.column(&all, region).map(|c| (c, false)));
        if blocks.len() < 2 {
            return out;
        }

        let title = blocks.iter().position(|b| b.kind == ElementKind::Text && b.level == 0);
        let mut bodies: Vec<(Option<Placement>, BBox, Vec<&Block>)> = vec![(None, region, all.clone())];
        if let Some(t) = title {
            let tb = &blocks[t];
            let style = self.cfg.text_style(0, self.body);
            let h = text_box_height(tb.chars, region.w, self.aspect, &style);
            let rest_h = region.h - h - self.cfg.gutter;
            if rest_h > 0.0 {
                let head = Placement {
                    el: tb.el,
                    bbox: BBox::new(region.x, region.y, region.w, h),
                    style: Some(style),
                };
                let body_region = BBox::new(region.x, region.y + h + self.cfg.gutter, region.w, rest_h);
                let rest = all.iter().copied().filter(|b| b.el != tb.el).collect();
                bodies.push((Some(head), body_region, rest));
            }
        }

        for (head, area, rest) in bodies {
            let mut push = |c: Option<Vec<Placement>>, mixed: bool| {
                if let Some(mut c) = c {
                    if let Some(h) = &head {
                        c.insert(0, h.clone());
                    }
                    out.push((c, mixed));
                }
            };
            if head.is_some() {
                push(self.column(&rest, area), false);
            }
            if rest.len() >= 2 {
                let texts: Vec<&Block> = rest.iter().copied().filter(|b| b.kind == ElementKind::Text).collect();
                let others: Vec<&Block> = rest.iter().copied().filter(|b| b.kind != ElementKind::Text).collect();
                let mixed = !texts.is_empty() && !others.is_empty();
                let partitions: Vec<(Vec<&Block>, Vec<&Block>)> = if mixed {
                    vec![(texts.clone(), others.clone()), (others, texts)]
                } else {
                    let half = rest.len().div_ceil(2);
                    vec![(rest[..half].to_vec(), rest[half..].to_vec())]
                };
                for (l, r) in &partitions {
                    for split in [0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65] {
                        push(self.two_columns(l, r, area, split), mixed);
                    }
                }
            }
            if rest.len() >= 3 {
                push(self.grid(&rest, area), false);
            }
        }
        out
    }
}

/// Ranking key: in the coverage band, reaches the balance target, preferred
/// template, then balance itself.
fn assess(placements: &[Placement], preferred: bool, cfg: &PlannerConfig) -> (bool, bool, bool, f64) {
    let band = cfg.coverage_band;
    let boxes: Vec<BBox> = placements.iter().map(|p| p.bbox).collect();
    let coverage = union_area(&boxes);
    let balance = balance_from_masses(boxes.iter().map(|b| {
        let (cx, cy) = b.center();
        (b.area(), cx, cy)
    }))
    .map_or(1.0, |b| b.balance);
    let in_band = coverage >= band.0 && coverage <= band.1;
    (in_band, balance >= cfg.balance_target, preferred, balance)
}

/// Places `blocks` inside `region`. Starts at the configured body font and
/// shrinks until a candidate fits; `None` when nothing fits at the minimum.
fn reflow(blocks: &[Block], region: BBox, aspect: f64, cfg: &PlannerConfig) -> Option<Vec<Placement>> {
    if blocks.is_empty() {
        return Some(Vec::new());
    }
    let mut fonts = Vec::new();
    let mut body = cfg.body_font;
    while body > cfg.min_body_font {
        fonts.push(body);
        body *= 0.92;
    }
    fonts.push(cfg.min_body_font);

    type Key = (bool, bool, bool, f64);
    let mut fallback: Option<(Key, Vec<Placement>)> = None;
    for body in fonts {
        let mut best: Option<(Key, Vec<Placement>)> = None;
        let flows = [false, true].into_iter().flat_map(|fill_text| {
            [1.0, 0.8, 0.6].into_iter().map(move |image_scale| Flow {
                cfg,
                aspect,
                body,
                fill_text,
                image_scale,
            })
        });
        let candidates: Vec<(Vec<Placement>, bool)> = flows.flat_map(|f| f.candidates(blocks, region)).collect();
        for (cand, preferred) in candidates {
            let key = assess(&cand, preferred, cfg);
            let better = match &best {
                None => true,
                Some((k, _)) => (key.0, key.1, key.2) > (k.0, k.1, k.2) || ((key.0, key.1, key.2) == (k.0, k.1, k.2) && key.3 > k.3 + 1e-12),
            };
            if better {
                best = Some((key, cand));
            }
        }
        let Some((key, cand)) = best else { continue };
        if key.1 {
            return Some(cand);
        }
        if fallback.as_ref().is_none_or(|(k, _)| key.3 > k.3) {
            fallback = Some((key, cand));
        }
    }
    fallback.map(|(_, c)| c)
}

fn block_for(el: &Element, idx: usize, cfg: &PlannerConfig, aspect: f64) -> Block {
    let shape_aspect = el.intrinsic_aspect.unwrap_or(cfg.shape_aspect);
    Block {
        el: idx,
        kind: el.kind,
        chars: el.char_count(),
        level: el.text_level(),
        aspect: match el.kind {
            ElementKind::Text => 1.0,
            _ if shape_aspect > 0.0 => shape_aspect,
            _ => el.bbox.physical_aspect(aspect),
        },
    }
}

fn apply_placements(slide: &mut SlideDoc, placements: Vec<Placement>) {
    for p in placements {
        let el = &mut slide.elements[p.el];
        el.bbox = p.bbox;
        if let Some(mut style) = p.style {
            if let Some(old) = &el.style {
                style.h_align = old.h_align;
            }
            el.style = Some(style);
        }
    }
}

/// Builds an initial slide from a content manifest.
pub fn plan_layout(manifest: &ContentManifest, aspect_ratio: f64, cfg: &PlannerConfig) -> Result<SlideDoc, PlannerError> {
    manifest.validate()?;
    if !(aspect_ratio.is_finite() && aspect_ratio > 0.0) {
        return Err(PlannerError::InvalidManifest("aspect_ratio must be positive".into()));
    }
    let mut items: Vec<&ManifestItem> = manifest.items.iter().collect();
    items.sort_by_key(|i| i.rank);

    let mut slide = SlideDoc::new(aspect_ratio);
    if items.is_empty() {
        let style = cfg.text_style(0, cfg.body_font);
        let w = 0.6;
        let h = text_box_height(5, w, aspect_ratio, &style);
        let mut el = Element::text("title", BBox::centered(0.5, 0.5, w, h), 0, style.font_size, "Title");
        el.style = Some(style);
        slide.elements.push(el);
        return Ok(slide);
    }

    let text_count = items.iter().filter(|i| i.kind == ElementKind::Text).count();
    let mut first_text = true;
    for item in &items {
        let id = item.id.clone().unwrap_or_else(|| {
            let kind = match item.kind {
                ElementKind::Text => "text",
                ElementKind::Image => "image",
                ElementKind::Shape => "shape",
            };
            format!("{kind}-{}", item.rank)
        });
        let placeholder = BBox::new(0.0, 0.0, 0.1, 0.1);
        let el = match item.kind {
            ElementKind::Text => {
                let auto = if first_text && text_count >= 2 { 0 } else { 1 };
                first_text = false;
                let level = item.level.unwrap_or(auto);
                let text = item.text.clone().unwrap_or_else(|| filler(item.text_len.unwrap_or(0)));
                let mut el = Element::text(id, placeholder, level, cfg.body_font, &text);
                el.style = Some(cfg.text_style(level, cfg.body_font));
                el
            }
            ElementKind::Image => Element::image(id, placeholder, item.intrinsic_aspect.unwrap_or(1.0)),
            ElementKind::Shape => {
                let mut el = Element::shape(id, placeholder);
                el.intrinsic_aspect = item.intrinsic_aspect;
                el
            }
        };
        slide.elements.push(el);
    }

    let blocks: Vec<Block> = slide
        .elements
        .iter()
        .enumerate()
        .map(|(i, el)| block_for(el, i, cfg, aspect_ratio))
        .collect();
    let placements = reflow(&blocks, cfg.safe_area(), aspect_ratio, cfg).ok_or(PlannerError::Overconstrained)?;
    apply_placements(&mut slide, placements);
    Ok(slide)
}

/// Body size implied by the current text: the median of each element's size
/// divided by its level ratio, clamped to `[min_body_font, body_font]`.
fn implied_body(slide: &SlideDoc, cfg: &PlannerConfig) -> f64 {
    let mut est: Vec<f64> = slide
        .content()
        .filter(|e| e.is_text())
        .filter_map(|e| e.style.as_ref().map(|s| s.font_size / cfg.ratio(e.text_level())))
        .collect();
    if est.is_empty() {
        return cfg.body_font;
    }
    est.sort_by(f64::total_cmp);
    let n = est.len();
    let median = if n % 2 == 1 { est[n / 2] } else { (est[n / 2 - 1] + est[n / 2]) / 2.0 };
    median.clamp(cfg.min_body_font, cfg.body_font)
}

fn normalize_fonts(slide: &mut SlideDoc, ids: &BTreeSet<&str>, cfg: &PlannerConfig) {
    let body = implied_body(slide, cfg);
    let aspect = slide.aspect_ratio;
    let others: Vec<BBox> = slide.content().map(|e| e.bbox).collect();
    let bottom_limit = 1.0 - cfg.margin;
    for el in slide.elements.iter_mut().filter(|e| e.is_text() && ids.contains(e.id.as_str())) {
        let mut style = cfg.text_style(el.text_level(), body);
        if let Some(old) = &el.style {
            style.h_align = old.h_align;
        }
        el.style = Some(style);
        // grow downward when the new size overflows and there is free room
        let need = text_box_height(el.char_count(), el.bbox.w, aspect, &style);
        if need > el.bbox.h {
            let grown = BBox::new(el.bbox.x, el.bbox.y, el.bbox.w, need);
            let free = grown.bottom() <= bottom_limit
                && others
                    .iter()
                    .filter(|o| **o != el.bbox)
                    .all(|o| overlap_area(o, &grown) <= 1e-12);
            if free {
                el.bbox = grown;
            }
        }
    }
}

/// Rewrites every text element's size, weight and spacing to follow the
/// level ratios around the implied body size.
pub fn assign_font_hierarchy(slide: &SlideDoc, cfg: &PlannerConfig) -> SlideDoc {
    let mut out = slide.clone();
    let ids: BTreeSet<&str> = slide.content().filter(|e| e.is_text()).map(|e| e.id.as_str()).collect();
    normalize_fonts(&mut out, &ids, cfg);
    out
}

fn fix_aspect(slide: &mut SlideDoc, ids: &BTreeSet<&str>) {
    let aspect = slide.aspect_ratio;
    for el in slide.elements.iter_mut().filter(|e| e.is_image() && ids.contains(e.id.as_str())) {
        if let Some(a) = el.intrinsic_aspect {
            el.bbox = contain(&el.bbox, a, aspect);
        }
    }
}

/// Largest box of physical aspect `a` centered inside `b`.
fn contain(b: &BBox, a: f64, canvas_aspect: f64) -> BBox {
    let current = b.physical_aspect(canvas_aspect);
    let (cx, cy) = b.center();
    if current > a {
        BBox::centered(cx, cy, b.h * a / canvas_aspect, b.h)
    } else {
        BBox::centered(cx, cy, b.w, b.w * canvas_aspect / a)
    }
}

fn respace(slide: &mut SlideDoc, ids: &BTreeSet<&str>, cfg: &PlannerConfig) {
    let aspect = slide.aspect_ratio;
    let targets: Vec<usize> = (0..slide.elements.len())
        .filter(|&i| !slide.elements[i].background && ids.contains(slide.elements[i].id.as_str()))
        .collect();
    if targets.is_empty() {
        return;
    }
    let covers_all = slide.content().all(|e| ids.contains(e.id.as_str()));
    let safe = cfg.safe_area();
    let region = if covers_all {
        safe
    } else {
        let boxes: Vec<BBox> = targets.iter().map(|&i| slide.elements[i].bbox).collect();
        let x0 = boxes.iter().map(|b| b.x).fold(f64::INFINITY, f64::min).max(safe.x);
        let y0 = boxes.iter().map(|b| b.y).fold(f64::INFINITY, f64::min).max(safe.y);
        let x1 = boxes.iter().map(BBox::right).fold(0.0, f64::max).min(safe.right());
        let y1 = boxes.iter().map(BBox::bottom).fold(0.0, f64::max).min(safe.bottom());
        if x1 <= x0 || y1 <= y0 {
            return;
        }
        BBox::new(x0, y0, x1 - x0, y1 - y0)
    };
    let blocks: Vec<Block> = targets
        .iter()
        .map(|&i| block_for(&slide.elements[i], i, cfg, aspect))
        .collect();
    if let Some(p) = reflow(&blocks, region, aspect, cfg) {
        apply_placements(slide, p);
    }
}

fn align_to_grid(slide: &mut SlideDoc, ids: &BTreeSet<&str>, cfg: &PlannerConfig) {
    let n = cfg.grid_columns.max(1) as f64;
    for el in slide.elements.iter_mut().filter(|e| ids.contains(e.id.as_str())) {
        let w = el.bbox.w;
        // grid lines that keep the box off the outermost column
        let lines = (1..cfg.grid_columns).map(|k| k as f64 / n).filter(|g| g + w <= 1.0 - 1.0 / n + 1e-9);
        let best = lines.min_by(|a, b| (a - el.bbox.x).abs().total_cmp(&(b - el.bbox.x).abs()));
        if let Some(g) = best {
            el.bbox.x = g;
        }
    }
}

/// Shrinks referenced elements away from whatever they overlap.
fn rescale(slide: &mut SlideDoc, ids: &BTreeSet<&str>) {
    let aspect = slide.aspect_ratio;
    let content: Vec<usize> = (0..slide.elements.len()).filter(|&i| !slide.elements[i].background).collect();
    for _ in 0..8 {
        let mut changed = false;
        for (ai, &a) in content.iter().enumerate() {
            for &b in &content[ai + 1..] {
                let (ea, eb) = (&slide.elements[a], &slide.elements[b]);
                if overlap_area(&ea.bbox, &eb.bbox) <= 1e-12 {
                    continue;
                }
                let (ra, rb) = (ids.contains(ea.id.as_str()), ids.contains(eb.id.as_str()));
                let (mover, other) = match (ra, rb) {
                    (false, false) => continue,
                    (true, false) => (a, b),
                    (false, true) => (b, a),
                    (true, true) if ea.bbox.area() >= eb.bbox.area() => (a, b),
                    (true, true) => (b, a),
                };
                let fixed = slide.elements[other].bbox;
                let cur = slide.elements[mover].bbox;
                let new = match cut_away(&cur, &fixed) {
                    Some(bb) => bb,
                    None if ra && rb => {
                        // neither box can escape the other: split their union
                        let x0 = cur.x.min(fixed.x);
                        let x1 = cur.right().max(fixed.right());
                        let half = (x1 - x0) / 2.0;
                        let y0 = cur.y.min(fixed.y);
                        let h = cur.bottom().max(fixed.bottom()) - y0;
                        slide.elements[other].bbox = BBox::new(x0 + half, y0, half, h);
                        BBox::new(x0, y0, half, h)
                    }
                    None => continue,
                };
                let el = &mut slide.elements[mover];
                el.bbox = match el.intrinsic_aspect {
                    Some(ia) if el.is_image() => contain(&new, ia, aspect),
                    _ => new,
                };
                let o = &mut slide.elements[other];
                if let (true, Some(ia)) = (o.is_image() && ra && rb, o.intrinsic_aspect) {
                    o.bbox = contain(&o.bbox, ia, aspect);
                }
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}

/// The largest part of `b` on one side of `fixed`, if any.
fn cut_away(b: &BBox, fixed: &BBox) -> Option<BBox> {
    let candidates = [
        BBox::new(b.x, b.y, fixed.x - b.x, b.h),
        BBox::new(fixed.right(), b.y, b.right() - fixed.right(), b.h),
        BBox::new(b.x, b.y, b.w, fixed.y - b.y),
        BBox::new(b.x, fixed.bottom(), b.w, b.bottom() - fixed.bottom()),
    ];
    candidates
        .into_iter()
        .filter(|c| c.w > 1e-3 && c.h > 1e-3)
        .max_by(|p, q| p.area().total_cmp(&q.area()))
}

/// Applies every suggested operation in a fixed order: fonts, aspect,
/// spacing, grid alignment, overlap removal. Only referenced elements move.
pub fn apply_feedback_ops(slide: &SlideDoc, feedback: &Feedback, cfg: &PlannerConfig) -> Result<SlideDoc, PlannerError> {
    let known: BTreeSet<&str> = slide.elements.iter().map(|e| e.id.as_str()).collect();
    let mut by_op: HashMap<FeedbackOp, BTreeSet<&str>> = HashMap::new();
    for item in &feedback.items {
        for id in &item.element_ids {
            if !known.contains(id.as_str()) {
                return Err(PlannerError::UnknownElementId(id.clone()));
            }
        }
        if let Some(op) = item.suggested_op {
            by_op.entry(op).or_default().extend(item.element_ids.iter().map(String::as_str));
        }
    }

    let mut out = slide.clone();
    let empty = BTreeSet::new();
    let ids = |op| by_op.get(&op).unwrap_or(&empty);
    normalize_fonts(&mut out, ids(FeedbackOp::NormalizeFonts), cfg);
    fix_aspect(&mut out, ids(FeedbackOp::FixAspect));
    respace(&mut out, ids(FeedbackOp::Respace), cfg);
    align_to_grid(&mut out, ids(FeedbackOp::AlignToGrid), cfg);
    rescale(&mut out, ids(FeedbackOp::Rescale));
    for el in &mut out.elements {
        el.bbox = el.bbox.clamped_to_canvas();
    }
    Ok(out)
}

/// Grid alignment plus font normalization over the whole slide.
pub fn repair(slide: &SlideDoc, cfg: &PlannerConfig) -> SlideDoc {
    let mut out = slide.clone();
    let all: BTreeSet<&str> = slide.content().map(|e| e.id.as_str()).collect();
    align_to_grid(&mut out, &all, cfg);
    normalize_fonts(&mut out, &all, cfg);
    out
}

/// [`apply_feedback_ops`] as a [`Refiner`].
#[derive(Debug, Clone, Default)]
pub struct PlannerRefiner {
    pub cfg: PlannerConfig,
}

impl Refiner for PlannerRefiner {
    fn refine(&self, slide: &SlideDoc, feedback: &Feedback) -> Result<SlideDoc, RefinerError> {
        apply_feedback_ops(slide, feedback, &self.cfg).map_err(|e| RefinerError(e.to_string()))
    }
}
