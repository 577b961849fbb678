//! Slide document model: normalized geometry, element styles, the defect
//! label space and the canonical JSON encoding.
//!
//! All coordinates live in the unit square with a top-left origin,
//! independently of the canvas aspect ratio. Physical proportions (image
//! aspect, text line widths) are recovered by multiplying horizontal extents
//! by [`SlideDoc::aspect_ratio`].

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

/// Slack allowed on the right and bottom canvas edges.
pub const EDGE_EPS: f64 = 1e-9;

pub const DEFAULT_ASPECT: f64 = 16.0 / 9.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub const fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    /// Box of the given size centered on `(cx, cy)`.
    pub fn centered(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        Self::new(cx - w / 2.0, cy - h / 2.0, w, h)
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self::new(self.x + dx, self.y + dy, self.w, self.h)
    }

    /// Intersection box, `None` when the interiors are disjoint.
    pub fn intersection(&self, other: &BBox) -> Option<BBox> {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        (x1 > x0 && y1 > y0).then(|| BBox::new(x0, y0, x1 - x0, y1 - y0))
    }

    /// Moves the box inside the unit canvas, shrinking it first if it is
    /// larger than the canvas.
    pub fn clamped_to_canvas(&self) -> Self {
        let w = self.w.min(1.0);
        let h = self.h.min(1.0);
        let x = self.x.clamp(0.0, 1.0 - w);
        let y = self.y.clamp(0.0, 1.0 - h);
        Self::new(x, y, w, h)
    }

    /// Physical width / height on a canvas with the given aspect ratio.
    pub fn physical_aspect(&self, canvas_aspect: f64) -> f64 {
        self.w * canvas_aspect / self.h
    }
}

/// Area of the intersection of two boxes; zero when they are disjoint.
pub fn overlap_area(a: &BBox, b: &BBox) -> f64 {
    let ix = (a.right().min(b.right()) - a.x.max(b.x)).max(0.0);
    let iy = (a.bottom().min(b.bottom()) - a.y.max(b.y)).max(0.0);
    ix * iy
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Text,
    Image,
    Shape,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weight {
    #[default]
    Regular,
    Bold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HAlign {
    #[default]
    Left,
    Center,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Style {
    /// Fraction of canvas height.
    pub font_size: f64,
    pub weight: Weight,
    pub h_align: HAlign,
    /// Line height as a multiple of the font size.
    pub line_spacing: f64,
    /// Extra tracking as a fraction of the font size.
    pub letter_spacing: f64,
}

impl Style {
    pub fn text(font_size: f64) -> Self {
        Self {
            font_size,
            weight: Weight::Regular,
            h_align: HAlign::Left,
            line_spacing: 1.2,
            letter_spacing: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub id: String,
    pub kind: ElementKind,
    pub bbox: BBox,
    #[serde(default)]
    pub z: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub style: Option<Style>,
    /// Physical width / height of the source image.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intrinsic_aspect: Option<f64>,
    /// Background elements are drawn but ignored by every metric.
    #[serde(default, skip_serializing_if = "is_false")]
    pub background: bool,
    /// Hierarchy level for text: 0 title, 1 body, 2 caption, deeper levels after.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    /// Image reference; payloads are never embedded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub src: Option<String>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

impl Element {
    pub fn text(id: impl Into<String>, bbox: BBox, level: u8, font_size: f64, text: &str) -> Self {
        let mut style = Style::text(font_size);
        if level == 0 {
            style.weight = Weight::Bold;
        }
        Self {
            id: id.into(),
            kind: ElementKind::Text,
            bbox,
            z: 0,
            style: Some(style),
            intrinsic_aspect: None,
            background: false,
            level: Some(level),
            text: Some(text.to_owned()),
            src: None,
        }
    }

    pub fn image(id: impl Into<String>, bbox: BBox, intrinsic_aspect: f64) -> Self {
        Self {
            id: id.into(),
            kind: ElementKind::Image,
            bbox,
            z: 0,
            style: None,
            intrinsic_aspect: Some(intrinsic_aspect),
            background: false,
            level: None,
            text: None,
            src: None,
        }
    }

    pub fn shape(id: impl Into<String>, bbox: BBox) -> Self {
        Self {
            id: id.into(),
            kind: ElementKind::Shape,
            bbox,
            z: 0,
            style: None,
            intrinsic_aspect: None,
            background: false,
            level: None,
            text: None,
            src: None,
        }
    }

    pub fn with_z(mut self, z: i32) -> Self {
        self.z = z;
        self
    }

    pub fn as_background(mut self) -> Self {
        self.background = true;
        self
    }

    pub fn is_text(&self) -> bool {
        self.kind == ElementKind::Text
    }

    pub fn is_image(&self) -> bool {
        self.kind == ElementKind::Image
    }

    /// Hierarchy level used for typography; unlabeled text counts as body.
    pub fn text_level(&self) -> u8 {
        self.level.unwrap_or(1)
    }

    pub fn char_count(&self) -> usize {
        self.text.as_deref().map_or(0, |t| t.chars().count())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlideDoc {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    /// Canvas width / height.
    #[serde(default = "default_aspect")]
    pub aspect_ratio: f64,
    #[serde(default)]
    pub elements: Vec<Element>,
}

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}

fn default_aspect() -> f64 {
    DEFAULT_ASPECT
}

impl Default for SlideDoc {
    fn default() -> Self {
        Self::new(DEFAULT_ASPECT)
    }
}

impl SlideDoc {
    pub fn new(aspect_ratio: f64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            aspect_ratio,
            elements: Vec::new(),
        }
    }

    pub fn with_elements(aspect_ratio: f64, elements: Vec<Element>) -> Self {
        Self {
            elements,
            ..Self::new(aspect_ratio)
        }
    }

    /// Non-background elements, in document order.
    pub fn content(&self) -> impl Iterator<Item = &Element> {
        self.elements.iter().filter(|e| !e.background)
    }

    pub fn element(&self, id: &str) -> Option<&Element> {
        self.elements.iter().find(|e| e.id == id)
    }

    pub fn element_mut(&mut self, id: &str) -> Option<&mut Element> {
        self.elements.iter_mut().find(|e| e.id == id)
    }

    /// Indices of elements in paint order (z, then document order).
    pub fn paint_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.elements.len()).collect();
        idx.sort_by_key(|&i| (self.elements[i].z, i));
        idx
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate(self)
    }

    /// Canonical JSON text, see [`encode`].
    pub fn to_canonical_json(&self) -> String {
        encode(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectCategory {
    NoDeficiency,
    CompositionLayout,
    Typography,
    ImageryVisualizations,
}

impl DefectCategory {
    pub const ALL: [DefectCategory; 4] = [
        DefectCategory::NoDeficiency,
        DefectCategory::CompositionLayout,
        DefectCategory::Typography,
        DefectCategory::ImageryVisualizations,
    ];

    /// The three categories that denote an actual defect.
    pub const DEFECTS: [DefectCategory; 3] = [
        DefectCategory::CompositionLayout,
        DefectCategory::Typography,
        DefectCategory::ImageryVisualizations,
    ];

    /// Heading used in free-text feedback.
    pub fn heading(self) -> &'static str {
        match self {
            DefectCategory::NoDeficiency => "No Deficiency",
            DefectCategory::CompositionLayout => "Composition & Layout",
            DefectCategory::Typography => "Typography",
            DefectCategory::ImageryVisualizations => "Imagery & Visualizations",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            DefectCategory::NoDeficiency => "no_deficiency",
            DefectCategory::CompositionLayout => "composition_layout",
            DefectCategory::Typography => "typography",
            DefectCategory::ImageryVisualizations => "imagery_visualizations",
        }
    }
}

impl fmt::Display for DefectCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.heading())
    }
}

pub type LabelSet = BTreeSet<DefectCategory>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid label set: {0}")]
pub struct InvalidLabelSet(pub &'static str);

/// `NoDeficiency` may not be combined with any defect category.
pub fn check_label_set(labels: &LabelSet) -> Result<(), InvalidLabelSet> {
    if labels.contains(&DefectCategory::NoDeficiency) && labels.len() > 1 {
        return Err(InvalidLabelSet("no_deficiency combined with a defect category"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub element_id: Option<String>,
    pub rule: &'static str,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.element_id {
            Some(id) => write!(f, "{id}: {}", self.rule),
            None => write!(f, "slide: {}", self.rule),
        }
    }
}

/// Every invariant breach in the slide. An empty list means the slide is valid.
pub fn validate(slide: &SlideDoc) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |id: Option<&str>, rule: &'static str| {
        out.push(Violation {
            element_id: id.map(str::to_owned),
            rule,
        })
    };

    if !(slide.aspect_ratio.is_finite() && slide.aspect_ratio > 0.0) {
        push(None, "aspect_ratio>0");
    }

    let mut seen = HashSet::new();
    for el in &slide.elements {
        let id = Some(el.id.as_str());
        if !seen.insert(el.id.as_str()) {
            push(id, "id unique");
        }
        let b = &el.bbox;
        if ![b.x, b.y, b.w, b.h].iter().all(|v| v.is_finite()) {
            push(id, "finite bbox");
            continue;
        }
        if b.w <= 0.0 {
            push(id, "w>0");
        }
        if b.h <= 0.0 {
            push(id, "h>0");
        }
        if b.x < 0.0 {
            push(id, "x≥0");
        }
        if b.y < 0.0 {
            push(id, "y≥0");
        }
        if b.x + b.w > 1.0 + EDGE_EPS {
            push(id, "x+w≤1");
        }
        if b.y + b.h > 1.0 + EDGE_EPS {
            push(id, "y+h≤1");
        }
        if el.kind == ElementKind::Image && !el.intrinsic_aspect.is_some_and(|a| a.is_finite() && a > 0.0) {
            push(id, "intrinsic_aspect>0");
        }
        if let Some(s) = &el.style {
            if !(s.font_size > 0.0 && s.font_size <= 0.5) {
                push(id, "0<font_size≤0.5");
            }
            if !(1.0..=3.0).contains(&s.line_spacing) {
                push(id, "1≤line_spacing≤3");
            }
            if !(s.letter_spacing >= 0.0) {
                push(id, "letter_spacing≥0");
            }
        } else if el.kind == ElementKind::Text {
            push(id, "text style");
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("decode error at byte {offset} (line {line}, column {column}): {message}")]
pub struct DecodeError {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl DecodeError {
    pub(crate) fn from_json(src: &str, err: &serde_json::Error) -> Self {
        let line = err.line();
        let column = err.column();
        let line_start: usize = src
            .split_inclusive('\n')
            .take(line.saturating_sub(1))
            .map(str::len)
            .sum();
        let offset = if err.is_eof() {
            src.len()
        } else {
            (line_start + column.saturating_sub(1)).min(src.len())
        };
        Self {
            offset,
            line,
            column,
            message: err.to_string(),
        }
    }
}

/// Canonical encoding: object keys sorted, floats printed with exactly six
/// decimals, no insignificant whitespace. Structurally equal slides encode
/// to identical bytes.
pub fn encode(slide: &SlideDoc) -> String {
    let value = serde_json::to_value(slide).expect("slide serializes to a JSON value");
    canonical_json(&value)
}

pub fn decode(text: &str) -> Result<SlideDoc, DecodeError> {
    serde_json::from_str(text).map_err(|e| DecodeError::from_json(text, &e))
}

/// Encodes a value to canonical JSON text with six-decimal floats.
pub fn canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_canonical(value, &mut out);
    out
}

pub(crate) fn format_float(v: f64) -> String {
    let s = format!("{v:.6}");
    if s.starts_with('-') && s[1..].bytes().all(|c| c == b'0' || c == b'.') {
        s[1..].to_owned()
    } else {
        s
    }
}

fn write_canonical(value: &Value, out: &mut String) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&format_float(n.as_f64().unwrap_or(0.0)));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let sorted: BTreeMap<&String, &Value> = map.iter().collect();
            out.push('{');
            for (i, (k, v)) in sorted.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_canonical(v, out);
            }
            out.push('}');
        }
    }
}

/// Snaps every float of the slide to the six-decimal grid used on the wire,
/// so that `decode(encode(s)) == s.quantized()`.
impl SlideDoc {
    pub fn quantized(&self) -> SlideDoc {
        decode(&encode(self)).expect("canonical encoding decodes")
    }
}

#[derive(Debug, Error)]
pub enum DeckError {
    #[error("line {line}: {source}")]
    Decode { line: usize, source: DecodeError },
}

/// One slide per line.
pub fn encode_deck(slides: &[SlideDoc]) -> String {
    let mut out = String::new();
    for s in slides {
        out.push_str(&encode(s));
        out.push('\n');
    }
    out
}

/// Parses a JSONL deck, skipping blank lines. Line numbers are 1-based.
pub fn decode_deck(text: &str) -> Result<Vec<SlideDoc>, DeckError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| decode(l).map_err(|source| DeckError::Decode { line: i + 1, source }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn centered_text() -> SlideDoc {
        SlideDoc::with_elements(
            DEFAULT_ASPECT,
            vec![Element::text("t", BBox::centered(0.5, 0.5, 0.6, 0.2), 1, 0.05, "hello")],
        )
    }

    #[test]
    fn centered_text_is_valid() {
        assert!(validate(&centered_text()).is_empty());
    }

    #[test]
    fn zero_width_is_flagged() {
        let mut s = centered_text();
        s.elements[0].bbox.w = 0.0;
        let v = validate(&s);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, "w>0");
        assert_eq!(v[0].element_id.as_deref(), Some("t"));
    }

    #[test]
    fn out_of_canvas_is_flagged() {
        let mut s = centered_text();
        s.elements[0].bbox = BBox::new(0.9, 0.1, 0.3, 0.2);
        let rules: Vec<_> = validate(&s).iter().map(|v| v.rule).collect();
        assert_eq!(rules, vec!["x+w≤1"]);
    }

    #[test]
    fn duplicate_ids_and_bad_styles() {
        let mut s = centered_text();
        let mut dup = s.elements[0].clone();
        dup.style.as_mut().unwrap().line_spacing = 0.5;
        s.elements.push(dup);
        s.elements.push(Element {
            intrinsic_aspect: None,
            ..Element::image("img", BBox::new(0.0, 0.0, 0.1, 0.1), 1.0)
        });
        let rules: Vec<_> = validate(&s).iter().map(|v| v.rule).collect();
        assert!(rules.contains(&"id unique"));
        assert!(rules.contains(&"1≤line_spacing≤3"));
        assert!(rules.contains(&"intrinsic_aspect>0"));
    }

    #[test]
    fn overlap_examples() {
        let a = BBox::new(0.0, 0.0, 0.25, 0.25);
        let b = BBox::new(0.5, 0.5, 0.25, 0.25);
        assert_eq!(overlap_area(&a, &b), 0.0);

        let c = BBox::new(0.1, 0.1, 0.2, 0.3);
        assert!((overlap_area(&c, &c) - 0.06).abs() < 1e-12);

        let d = BBox::new(0.0, 0.0, 0.4, 0.4);
        let e = BBox::new(0.2, 0.2, 0.4, 0.4);
        // per-axis interval intersection: [0.2, 0.4] x [0.2, 0.4]
        let oracle = (0.4f64.min(0.6) - 0.2f64.max(0.0)) * (0.4f64.min(0.6) - 0.2f64.max(0.0));
        assert!((overlap_area(&d, &e) - oracle).abs() < 1e-12);
        assert!((overlap_area(&d, &e) - 0.04).abs() < 1e-12);
    }

    #[test]
    fn touching_boxes_do_not_overlap() {
        let a = BBox::new(0.0, 0.0, 0.5, 0.5);
        let b = BBox::new(0.5, 0.0, 0.5, 0.5);
        assert_eq!(overlap_area(&a, &b), 0.0);
        assert!(a.intersection(&b).is_none());
    }

    #[test]
    fn encoding_is_canonical() {
        let s = centered_text();
        let text = encode(&s);
        assert!(text.starts_with("{\"aspect_ratio\":1.777778,\"elements\":[{\"bbox\":{\"h\":0.200000"));
        assert_eq!(decode(&text).unwrap(), s.quantized());

        // same structure built differently encodes the same bytes
        let mut t = SlideDoc::new(16.0 / 9.0);
        t.elements.push(centered_text().elements[0].clone());
        assert_eq!(encode(&t), text);
    }

    #[test]
    fn negative_zero_encodes_as_zero() {
        assert_eq!(format_float(-0.0), "0.000000");
        assert_eq!(format_float(-1e-9), "0.000000");
        assert_eq!(format_float(-0.5), "-0.500000");
    }

    #[test]
    fn truncated_document_reports_offset() {
        let text = encode(&centered_text());
        let cut = &text[..40];
        let err = decode(cut).unwrap_err();
        assert_eq!(err.line, 1);
        assert_eq!(err.offset, 40);
    }

    #[test]
    fn deck_errors_carry_line_numbers() {
        let good = encode(&centered_text());
        let deck = format!("{good}\n\n{{\"elements\": [}}\n");
        match decode_deck(&deck) {
            Err(DeckError::Decode { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected decode error, got {other:?}"),
        }
        assert_eq!(decode_deck(&encode_deck(&[centered_text()])).unwrap().len(), 1);
    }

    #[test]
    fn label_set_exclusivity() {
        let ok: LabelSet = [DefectCategory::Typography, DefectCategory::CompositionLayout].into();
        assert!(check_label_set(&ok).is_ok());
        let bad: LabelSet = [DefectCategory::NoDeficiency, DefectCategory::Typography].into();
        assert!(check_label_set(&bad).is_err());
    }
}
