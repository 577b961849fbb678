use std::path::PathBuf;

use presgauge::aesth::HeuristicScorer;
use presgauge::planner::{plan_layout, ContentManifest, PlannerConfig};
use presgauge::render::to_svg;
use presgauge::slide::{decode, encode, DefectCategory, DEFAULT_ASPECT};

fn fixture(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn planner_output_is_stable() {
    let manifest: ContentManifest = serde_json::from_str(&fixture("manifest.json")).unwrap();
    let slide = plan_layout(&manifest, DEFAULT_ASPECT, &PlannerConfig::default()).unwrap();
    assert_eq!(encode(&slide), fixture("clean_slide.json").trim());
}

#[test]
fn clean_fixture_scores_high() {
    let slide = decode(fixture("clean_slide.json").trim()).unwrap();
    let scorer = HeuristicScorer::default();
    assert!(scorer.score_slide(&slide) >= 8.0);
    assert!(scorer.feedback_for(&slide).is_clean());
}

#[test]
fn svg_matches_golden() {
    let slide = decode(fixture("clean_slide.json").trim()).unwrap();
    assert_eq!(to_svg(&slide), fixture("clean_slide.svg"));
}

#[test]
fn defective_fixture_is_flagged() {
    let slide = decode(&fixture("defective_slide.json")).unwrap();
    let scorer = HeuristicScorer::default();
    let b = scorer.breakdown(&slide);
    assert!(b.final_score < 6.0, "{}", b.final_score);
    let cats = scorer.feedback_for(&slide).categories();
    for c in [DefectCategory::CompositionLayout, DefectCategory::Typography, DefectCategory::ImageryVisualizations] {
        assert!(cats.contains(&c), "missing {c:?} in {cats:?}");
    }
}
