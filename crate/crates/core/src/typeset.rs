//! Coarse monospace text metrics used to size, score and draw text blocks.
//!
//! Canvas height is the unit of physical length, so the canvas is
//! `aspect_ratio` wide. A glyph advances `0.5 em × (1 + letter_spacing)`;
//! lines wrap at character granularity.

use crate::slide::{Element, Style};

pub const GLYPH_ADVANCE_EM: f64 = 0.5;

pub fn advance(style: &Style) -> f64 {
    GLYPH_ADVANCE_EM * style.font_size * (1.0 + style.letter_spacing)
}

/// Characters that fit on one line of a box `box_w` wide (normalized).
pub fn chars_per_line(box_w: f64, aspect: f64, style: &Style) -> usize {
    let n = (box_w * aspect / advance(style)).floor();
    if n.is_finite() && n >= 1.0 {
        n as usize
    } else {
        1
    }
}

pub fn line_count(chars: usize, box_w: f64, aspect: f64, style: &Style) -> usize {
    chars.max(1).div_ceil(chars_per_line(box_w, aspect, style))
}

pub fn line_height(style: &Style) -> f64 {
    style.font_size * style.line_spacing
}

/// Normalized height needed to set `chars` characters in a box `box_w` wide.
pub fn text_height(chars: usize, box_w: f64, aspect: f64, style: &Style) -> f64 {
    line_count(chars, box_w, aspect, style) as f64 * line_height(style)
}

/// Normalized height the element's text needs at its current width and style.
pub fn required_height(el: &Element, aspect: f64) -> Option<f64> {
    let style = el.style.as_ref()?;
    el.is_text()
        .then(|| text_height(el.char_count(), el.bbox.w, aspect, style))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wraps_by_characters() {
        let style = Style::text(0.05);
        // box 0.5 wide on a 2:1 canvas is 1.0 physical; advance 0.025 -> 40 chars
        assert_eq!(chars_per_line(0.5, 2.0, &style), 40);
        assert_eq!(line_count(81, 0.5, 2.0, &style), 3);
        assert!((text_height(81, 0.5, 2.0, &style) - 3.0 * 0.06).abs() < 1e-12);
    }

    #[test]
    fn tracking_widens_glyphs() {
        let mut style = Style::text(0.05);
        style.letter_spacing = 1.0;
        assert_eq!(chars_per_line(0.5, 2.0, &style), 20);
    }

    #[test]
    fn empty_text_takes_one_line() {
        assert_eq!(line_count(0, 0.5, 2.0, &Style::text(0.05)), 1);
    }
}
