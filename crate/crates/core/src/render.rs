//! SVG output and an occupancy rasterizer whose connected components give a
//! raster estimate of layout balance.

use std::fmt::Write as _;

use thiserror::Error;

use crate::metrics::{balance_from_masses, BalanceBreakdown, MetricsError};
use crate::slide::{ElementKind, HAlign, SlideDoc, Weight};
use crate::typeset;

/// SVG canvas height in pixels; width follows the aspect ratio.
pub const SVG_HEIGHT: f64 = 720.0;

pub const MIN_GRID: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenderError {
    #[error("grid must be at least {MIN_GRID}x{MIN_GRID}, got {0}x{1}")]
    GridTooSmall(usize, usize),
    #[error("grid has no occupied cells")]
    EmptyGrid,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SvgOptions {
    /// Mark the area-weighted center of mass and the canvas center.
    pub show_center_of_mass: bool,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn to_svg(slide: &SlideDoc) -> String {
    to_svg_with(slide, SvgOptions::default())
}

/// Deterministic SVG 1.1 rendering. Elements are painted in z order; text is
/// drawn as one bar per wrapped line inside an outlined block.
pub fn to_svg_with(slide: &SlideDoc, opts: SvgOptions) -> String {
    let hpx = SVG_HEIGHT;
    let wpx = SVG_HEIGHT * slide.aspect_ratio;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{wpx:.2}" height="{hpx:.2}" viewBox="0 0 {wpx:.2} {hpx:.2}">"#
    );
    let _ = writeln!(out, r##"<rect class="canvas" x="0" y="0" width="{wpx:.2}" height="{hpx:.2}" fill="#ffffff" stroke="#333333" stroke-width="1"/>"##);

    for i in slide.paint_order() {
        let el = &slide.elements[i];
        let (x, y, w, h) = (el.bbox.x * wpx, el.bbox.y * hpx, el.bbox.w * wpx, el.bbox.h * hpx);
        let id = esc(&el.id);
        if el.background {
            let _ = writeln!(out, r##"<rect id="{id}" class="background" x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="#f1f3f6"/>"##);
            continue;
        }
        match el.kind {
            ElementKind::Shape => {
                let _ = writeln!(out, r##"<rect id="{id}" class="shape" x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="#d9e2ef" stroke="#6c7a89" stroke-width="1"/>"##);
            }
            ElementKind::Image => {
                let _ = writeln!(out, r#"<g id="{id}" class="image">"#);
                if let Some(src) = &el.src {
                    let _ = writeln!(out, "<title>{}</title>", esc(src));
                }
                let _ = writeln!(out, r##"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="#cfe0c8" stroke="#5b7f4f" stroke-width="1.5"/>"##);
                let _ = writeln!(
                    out,
                    r##"<path d="M{x:.2} {y:.2} L{:.2} {:.2} M{:.2} {y:.2} L{x:.2} {:.2}" stroke="#5b7f4f" stroke-width="1"/>"##,
                    x + w,
                    y + h,
                    x + w,
                    y + h
                );
                out.push_str("</g>\n");
            }
            ElementKind::Text => {
                let Some(style) = el.style else { continue };
                let font_px = style.font_size * hpx;
                let weight = match style.weight {
                    Weight::Regular => "normal",
                    Weight::Bold => "bold",
                };
                let _ = writeln!(out, r#"<g id="{id}" class="text" font-size="{font_px:.2}" font-weight="{weight}">"#);
                if let Some(text) = &el.text {
                    let _ = writeln!(out, "<title>{}</title>", esc(text));
                }
                let _ = writeln!(out, r##"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="none" stroke="#8a8f98" stroke-width="1" stroke-dasharray="4 3"/>"##);

                let cpl = typeset::chars_per_line(el.bbox.w, slide.aspect_ratio, &style);
                let line_px = typeset::line_height(&style) * hpx;
                let bar_h = font_px * 0.6;
                let fill = if style.weight == Weight::Bold { "#2f3640" } else { "#7f8c9a" };
                let mut remaining = el.char_count().max(1);
                let mut top = y + (line_px - bar_h) / 2.0;
                while remaining > 0 {
                    let n = remaining.min(cpl);
                    remaining -= n;
                    let bar_w = (n as f64 * typeset::advance(&style) * hpx).min(w);
                    let bx = match style.h_align {
                        HAlign::Left => x,
                        HAlign::Center => x + (w - bar_w) / 2.0,
                        HAlign::Right => x + w - bar_w,
                    };
                    let _ = writeln!(out, r#"<rect x="{bx:.2}" y="{top:.2}" width="{bar_w:.2}" height="{bar_h:.2}" fill="{fill}"/>"#);
                    top += line_px;
                }
                out.push_str("</g>\n");
            }
        }
    }

    if opts.show_center_of_mass {
        if let Ok(b) = crate::metrics::layout_balance(slide) {
            let (cx, cy) = (b.com_x * wpx, b.com_y * hpx);
            let _ = writeln!(out, r##"<g class="balance"><line x1="{:.2}" y1="{:.2}" x2="{cx:.2}" y2="{cy:.2}" stroke="#c0392b" stroke-width="2" stroke-dasharray="6 4"/><circle cx="{:.2}" cy="{:.2}" r="5" fill="none" stroke="#2c3e50" stroke-width="2"/><circle cx="{cx:.2}" cy="{cy:.2}" r="7" fill="#c0392b"/></g>"##, wpx / 2.0, hpx / 2.0, wpx / 2.0, hpx / 2.0);
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Binary occupancy grid, row-major, `cells[row * width + col]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupancyGrid {
    pub width: usize,
    pub height: usize,
    pub cells: Vec<bool>,
}

impl OccupancyGrid {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            cells: vec![false; width * height],
        }
    }

    pub fn get(&self, col: usize, row: usize) -> bool {
        self.cells[row * self.width + col]
    }

    pub fn occupied(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }
}

/// Cell indices whose centers fall in `[lo, hi)` on an axis of `n` cells.
fn cell_span(lo: f64, hi: f64, n: usize) -> (usize, usize) {
    let nf = n as f64;
    let start = (lo * nf - 0.5).ceil().clamp(0.0, nf) as usize;
    let end = (hi * nf - 0.5).ceil().clamp(0.0, nf) as usize;
    (start, end.max(start))
}

/// A cell is set iff its center lies inside some content element's box.
pub fn rasterize(slide: &SlideDoc, width: usize, height: usize) -> Result<OccupancyGrid, RenderError> {
    if width < MIN_GRID || height < MIN_GRID {
        return Err(RenderError::GridTooSmall(width, height));
    }
    let mut grid = OccupancyGrid::new(width, height);
    for el in slide.content() {
        let (c0, c1) = cell_span(el.bbox.x, el.bbox.right(), width);
        let (r0, r1) = cell_span(el.bbox.y, el.bbox.bottom(), height);
        for row in r0..r1 {
            grid.cells[row * width + c0..row * width + c1].fill(true);
        }
    }
    Ok(grid)
}

/// One 4-connected region of set cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub area: usize,
    /// Inclusive cell bounds: `(min_col, min_row, max_col, max_row)`.
    pub bounds: (usize, usize, usize, usize),
    /// Centroid in cell units, measured at cell centers.
    pub centroid: (f64, f64),
}

/// Labels 4-connected components in scan order.
pub fn components(grid: &OccupancyGrid) -> Vec<Component> {
    let (w, h) = (grid.width, grid.height);
    let mut seen = vec![false; w * h];
    let mut stack = Vec::new();
    let mut out = Vec::new();

    for start in 0..w * h {
        if !grid.cells[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let (mut area, mut sx, mut sy) = (0usize, 0.0f64, 0.0f64);
        let (mut min_c, mut min_r, mut max_c, mut max_r) = (usize::MAX, usize::MAX, 0, 0);
        while let Some(idx) = stack.pop() {
            let (c, r) = (idx % w, idx / w);
            area += 1;
            sx += c as f64 + 0.5;
            sy += r as f64 + 0.5;
            min_c = min_c.min(c);
            min_r = min_r.min(r);
            max_c = max_c.max(c);
            max_r = max_r.max(r);
            let mut visit = |n: usize| {
                if grid.cells[n] && !seen[n] {
                    seen[n] = true;
                    stack.push(n);
                }
            };
            if c > 0 {
                visit(idx - 1);
            }
            if c + 1 < w {
                visit(idx + 1);
            }
            if r > 0 {
                visit(idx - w);
            }
            if r + 1 < h {
                visit(idx + w);
            }
        }
        out.push(Component {
            area,
            bounds: (min_c, min_r, max_c, max_r),
            centroid: (sx / area as f64, sy / area as f64),
        });
    }
    out
}

/// Balance computed from the grid's connected components, each weighted by
/// its cell count and placed at its cell centroid.
pub fn raster_balance(grid: &OccupancyGrid) -> Result<BalanceBreakdown, RenderError> {
    let comps = components(grid);
    if comps.is_empty() {
        return Err(RenderError::EmptyGrid);
    }
    let (w, h) = (grid.width as f64, grid.height as f64);
    balance_from_masses(
        comps
            .iter()
            .map(|c| (c.area as f64 / (w * h), c.centroid.0 / w, c.centroid.1 / h)),
    )
    .map_err(|e| match e {
        MetricsError::NoElements => RenderError::EmptyGrid,
        _ => unreachable!("balance_from_masses only reports NoElements"),
    })
}
