//! Browser bindings for the layout planner, the perturbation engine and the
//! refinement loop. Each export takes and returns JSON strings so the page
//! needs no generated type glue.

use presgauge::aesth::HeuristicScorer;
use presgauge::checker::{run_refinement, CheckerConfig};
use presgauge::perturb::{make_variants, PerturbConfig, Variant};
use presgauge::planner::{plan_layout, ContentManifest, PlannerConfig, PlannerRefiner};
use presgauge::render::{to_svg_with, SvgOptions};
use presgauge::slide::{decode, SlideDoc};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn svg(slide: &SlideDoc) -> String {
    to_svg_with(slide, SvgOptions { show_center_of_mass: true })
}

fn view(slide: &SlideDoc, scorer: &HeuristicScorer) -> Value {
    let b = scorer.breakdown(slide);
    json!({
        "slide": slide,
        "svg": svg(slide),
        "score": b.final_score,
        "balance": b.raw_balance,
        "components": b.components,
        "feedback": scorer.feedback_for(slide).summary(),
    })
}

fn read_slide(slide_json: &str) -> Result<SlideDoc, String> {
    let slide = decode(slide_json).map_err(|e| e.to_string())?;
    if let Some(v) = slide.validate().first() {
        return Err(format!("invalid slide: {v}"));
    }
    Ok(slide)
}

/// Lays out a manifest and returns the slide with its rendering and score.
pub fn plan(manifest_json: &str, aspect: f64) -> Result<String, String> {
    let manifest: ContentManifest = serde_json::from_str(manifest_json).map_err(|e| e.to_string())?;
    let slide = plan_layout(&manifest, aspect, &PlannerConfig::default()).map_err(|e| e.to_string())?;
    Ok(view(&slide, &HeuristicScorer::default()).to_string())
}

/// Poor, base and good variants of a slide for one seed.
pub fn perturb(slide_json: &str, seed: u64) -> Result<String, String> {
    let slide = read_slide(slide_json)?;
    let v = make_variants(&slide, seed, &PerturbConfig::default()).map_err(|e| e.to_string())?;
    let scorer = HeuristicScorer::default();
    let variant = |v: &Variant| {
        let mut out = view(&v.slide, &scorer);
        out["tier"] = json!(v.tier);
        out["labels"] = json!(v.defect_labels);
        out["applied"] = json!(v
            .applied
            .iter()
            .map(|a| format!("{:?} @ {:.2}", a.family, a.magnitude))
            .collect::<Vec<_>>());
        out
    };
    Ok(json!({ "variants": [variant(&v.poor), variant(&v.base), variant(&v.good)] }).to_string())
}

/// Runs the refinement loop and returns every scored version.
pub fn refine(slide_json: &str, max_iters: usize, threshold: f64) -> Result<String, String> {
    let slide = read_slide(slide_json)?;
    let scorer = HeuristicScorer::default();
    let cfg = CheckerConfig {
        max_iters,
        threshold,
        ..CheckerConfig::default()
    };
    let out = run_refinement(&slide, &scorer, &PlannerRefiner::default(), &cfg).map_err(|e| e.to_string())?;
    let steps: Vec<Value> = out
        .trace
        .iterations
        .iter()
        .zip(&out.versions)
        .map(|(it, v)| {
            json!({
                "t": it.t,
                "score": it.score,
                "reverted": it.reverted,
                "feedback": it.feedback,
                "svg": svg(v),
            })
        })
        .collect();
    Ok(json!({
        "steps": steps,
        "best_index": out.trace.best_index,
        "final_score": out.final_score,
        "final_slide": out.final_slide,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn plan_demo(manifest_json: &str, aspect: f64) -> Result<String, JsValue> {
    plan(manifest_json, aspect).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn perturb_demo(slide_json: &str, seed: u32) -> Result<String, JsValue> {
    perturb(slide_json, u64::from(seed)).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn refine_demo(slide_json: &str, max_iters: u32, threshold: f64) -> Result<String, JsValue> {
    refine(slide_json, max_iters as usize, threshold).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MANIFEST: &str = r#"{"items":[
        {"kind":"text","rank":0,"text":"Quarterly results"},
        {"kind":"text","rank":1,"text":"Revenue grew in every region"},
        {"kind":"image","rank":2,"intrinsic_aspect":1.5}]}"#;

    fn planned() -> String {
        let v: Value = serde_json::from_str(&plan(MANIFEST, 16.0 / 9.0).unwrap()).unwrap();
        v["slide"].to_string()
    }

    #[test]
    fn plan_returns_svg_and_score() {
        let v: Value = serde_json::from_str(&plan(MANIFEST, 16.0 / 9.0).unwrap()).unwrap();
        assert!(v["svg"].as_str().unwrap().starts_with("<svg"));
        assert!(v["score"].as_f64().unwrap() >= 8.0);
        assert!(plan("{", 1.0).is_err());
    }

    #[test]
    fn perturb_orders_tiers() {
        let v: Value = serde_json::from_str(&perturb(&planned(), 3).unwrap()).unwrap();
        let scores: Vec<f64> = v["variants"].as_array().unwrap().iter().map(|x| x["score"].as_f64().unwrap()).collect();
        assert!(scores[0] < scores[1] && scores[1] <= scores[2], "{scores:?}");
        assert_eq!(perturb(&planned(), 3).unwrap(), perturb(&planned(), 3).unwrap());
    }

    #[test]
    fn refine_lifts_a_poor_variant() {
        let v: Value = serde_json::from_str(&perturb(&planned(), 3).unwrap()).unwrap();
        let poor = v["variants"][0]["slide"].to_string();
        let r: Value = serde_json::from_str(&refine(&poor, 5, 8.0).unwrap()).unwrap();
        let first = r["steps"][0]["score"].as_f64().unwrap();
        assert!(r["final_score"].as_f64().unwrap() >= first);
        assert!(refine(&poor, 0, 8.0).is_err());
    }
}
