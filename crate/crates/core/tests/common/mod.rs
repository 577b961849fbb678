#![allow(dead_code)]

use std::cell::{Cell, RefCell};

use presgauge::checker::{Feedback, Refiner, RefinerError, Scorer, ScorerError};
use presgauge::slide::{BBox, Element, SlideDoc, DEFAULT_ASPECT};
use rand::seq::SliceRandom;
use rand::Rng;

/// 1 to 6 elements of mixed kinds, each inside its own cell of a 4×4 grid.
pub fn disjoint_slide<R: Rng>(rng: &mut R) -> SlideDoc {
    let mut cells: Vec<usize> = (0..16).collect();
    cells.shuffle(rng);
    let k = rng.gen_range(1..=6);
    let elements = cells[..k]
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let (cx, cy) = ((c % 4) as f64 * 0.25, (c / 4) as f64 * 0.25);
            let w = rng.gen_range(0.03..0.24);
            let h = rng.gen_range(0.03..0.24);
            let x = cx + rng.gen_range(0.0..0.25 - w);
            let y = cy + rng.gen_range(0.0..0.25 - h);
            let b = BBox::new(x, y, w, h);
            match rng.gen_range(0..3) {
                0 => Element::shape(format!("e{i}"), b),
                1 => Element::text(format!("e{i}"), b, 1, 0.03, "text"),
                _ => Element::image(format!("e{i}"), b, 1.5),
            }
        })
        .collect();
    SlideDoc::with_elements(DEFAULT_ASPECT, elements)
}

/// Encodes a version number as the slide's element count.
pub fn versioned(k: usize) -> SlideDoc {
    let elements = (0..k)
        .map(|i| Element::shape(format!("v{i}"), BBox::new(0.0, 0.0, 0.1, 0.1)))
        .collect();
    SlideDoc::with_elements(DEFAULT_ASPECT, elements)
}

pub fn version_of(slide: &SlideDoc) -> usize {
    slide.elements.len()
}

/// Returns `scores[v]` for version `v` and counts calls.
pub struct Scripted {
    pub scores: Vec<f64>,
    pub calls: Cell<usize>,
}

impl Scripted {
    pub fn new(scores: &[f64]) -> Self {
        Self {
            scores: scores.to_vec(),
            calls: Cell::new(0),
        }
    }
}

impl Scorer for Scripted {
    fn score(&self, slide: &SlideDoc) -> Result<f64, ScorerError> {
        self.calls.set(self.calls.get() + 1);
        Ok(self.scores[version_of(slide)])
    }

    fn feedback(&self, _: &SlideDoc) -> Result<Feedback, ScorerError> {
        Ok(Feedback::clean())
    }
}

/// Each call produces the next version, whatever it was given.
pub struct Counter {
    pub calls: Cell<usize>,
    pub refined_from: RefCell<Vec<usize>>,
}

impl Counter {
    pub fn new() -> Self {
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
