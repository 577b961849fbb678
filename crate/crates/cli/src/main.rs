use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use presgauge::checker::remote::{external_scorer_adapter, RemoteScorerConfig};
use presgauge::checker::{run_refinement, CheckerError, RevertPolicy, Scorer, ScorerError};
use presgauge::harness::{
    evaluate, heuristic_scorer, parse_dataset, perturb_rows, reward_dump, to_jsonl, DatasetError, HarnessConfig,
    SCORER_URL_ENV,
};
use presgauge::perturb::synthetic_corpus;
use presgauge::planner::{plan_layout, ContentManifest, PlannerRefiner};
use presgauge::render::{to_svg_with, SvgOptions};
use presgauge::rewards::Task;
use presgauge::slide::{canonical_json, decode, decode_deck, encode, encode_deck, DeckError, SlideDoc, DEFAULT_ASPECT};

const EXIT_SCHEMA: u8 = 2;
const EXIT_EMPTY: u8 = 3;
const EXIT_TRANSPORT: u8 = 4;

#[derive(Parser)]
#[command(name = "presgauge", version, about = "Score, perturb, plan and refine slide layouts")]
struct Cli {
    /// JSON file overriding reward, scorer, planner, perturb and checker settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Md,
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    Scoring,
    Adjustment,
    Comparison,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::Scoring => Task::Scoring,
            TaskArg::Adjustment => Task::Adjustment,
            TaskArg::Comparison => Task::Comparison,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RevertArg {
    Previous,
    Best,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a JSONL dataset and print a metrics report.
    Eval {
        dataset: PathBuf,
        #[arg(long)]
        task: Option<TaskArg>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// "heuristic" or the URL of an external judge.
        #[arg(long, env = SCORER_URL_ENV, default_value = "heuristic")]
        scorer: String,
        /// Evaluate records one at a time.
        #[arg(long)]
        sequential: bool,
    },
    /// Build benchmark pairs from a corpus of clean slides.
    Perturb {
        /// JSONL deck; omit to use a synthetic corpus.
        corpus: Option<PathBuf>,
        /// Size of the synthetic corpus.
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(long)]
        sequential: bool,
    },
    /// Run the score-and-refine loop over every slide of a deck.
    Refine {
        deck: PathBuf,
        #[arg(long, env = SCORER_URL_ENV, default_value = "heuristic")]
        scorer: String,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long, value_enum)]
        revert: Option<RevertArg>,
        /// Receives refined.jsonl, trace.json and one SVG per scored version.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Compute rewards and group advantages for tagged responses.
    Reward {
        responses: PathBuf,
        #[arg(long, default_value_t = 8)]
        group_size: usize,
        /// Also write advantage rows here.
        #[arg(long)]
        advantages: Option<PathBuf>,
    },
    /// Lay out a content manifest.
    Plan {
        manifest: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ASPECT)]
        aspect: f64,
    },
    /// Heuristic score, components and feedback for each slide of a file.
    Score { input: PathBuf },
    /// Render one slide to SVG.
    Render {
        input: PathBuf,
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Mark the center of mass.
        #[arg(long)]
        com: bool,
    },
    /// Print a synthetic corpus of planned slides.
    Synth {
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = DEFAULT_ASPECT)]
        aspect: f64,
    },
}

/// Error that maps to a specific process exit code.
#[derive(Debug)]
struct Exit(u8, String);

impl fmt::Display for Exit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.1)
    }
}

impl std::error::Error for Exit {}

fn dataset_err(e: DatasetError) -> anyhow::Error {
    match e {
        DatasetError::Empty => Exit(EXIT_EMPTY, e.to_string()).into(),
        DatasetError::Schema { .. } => Exit(EXIT_SCHEMA, format!("schema violation: {e}")).into(),
    }
}

fn scorer_err(e: ScorerError) -> anyhow::Error {
    match e {
        ScorerError::Transport(_) | ScorerError::MalformedRemoteResponse(_) => Exit(EXIT_TRANSPORT, e.to_string()).into(),
        other => anyhow::Error::new(other),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<HarnessConfig> {
    let Some(p) = path else {
        return Ok(HarnessConfig::default());
    };
    let cfg: HarnessConfig = serde_json::from_str(&read(p)?).with_context(|| format!("parsing {}", p.display()))?;
    cfg.scorer.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok(cfg)
}

/// A single JSON slide or a JSONL deck.
fn load_slides(path: &Path) -> Result<Vec<SlideDoc>> {
    let text = read(path)?;
    if let Ok(s) = decode(text.trim()) {
        return Ok(vec![s]);
    }
    let slides = decode_deck(&text).map_err(|e| match e {
        DeckError::Decode { line, source } => Exit(EXIT_SCHEMA, format!("schema violation: line {line}: {source}")),
    })?;
    if slides.is_empty() {
        return Err(Exit(EXIT_EMPTY, format!("{} contains no slides", path.display())).into());
    }
    for (i, s) in slides.iter().enumerate() {
        if let Some(v) = s.validate().first() {
            return Err(Exit(EXIT_SCHEMA, format!("schema violation: slide {}: {v}", i + 1)).into());
        }
    }
    Ok(slides)
}

fn make_scorer(choice: &str, cfg: &HarnessConfig) -> Result<Box<dyn Scorer + Sync>> {
    if choice == "heuristic" {
        return Ok(Box::new(heuristic_scorer(cfg)));
    }
    if !(choice.starts_with("http://") || choice.starts_with("https://")) {
        anyhow::bail!("--scorer must be \"heuristic\" or an http(s) URL, got {choice:?}");
    }
    Ok(Box::new(external_scorer_adapter(RemoteScorerConfig::new(choice))))
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = load_config(cli.config.as_deref())?;
    match cli.cmd {
        Cmd::Eval {
            dataset,
            task,
            format,
            scorer,
            sequential,
        } => {
            let records = parse_dataset(&read(&dataset)?).map_err(dataset_err)?;
            let scorer = make_scorer(&scorer, &cfg)?;
            let report = evaluate(&records, &*scorer, &cfg, task.map(Task::from), !sequential).map_err(scorer_err)?;
            match format {
                Format::Json => println!("{}", report.to_json()),
                Format::Md => print!("{}", report.to_markdown()),
            }
        }
        Cmd::Perturb {
            corpus,
            count,
            out,
            sequential,
        } => {
            let slides = match corpus {
                Some(p) => load_slides(&p)?,
                None => synthetic_corpus(count, cli.seed, DEFAULT_ASPECT, &cfg.planner)?,
            };
            let rows = perturb_rows(&slides, cli.seed, &cfg.perturb, !sequential)?;
            write_or_print(out.as_deref(), &to_jsonl(&rows))?;
        }
        Cmd::Refine {
            deck,
            scorer,
            max_iters,
            threshold,
            revert,
            out_dir,
        } => {
            if let Some(t) = max_iters {
                cfg.checker.max_iters = t;
            }
            if let Some(s) = threshold {
                cfg.checker.threshold = s;
            }
            if let Some(r) = revert {
                cfg.checker.revert = match r {
                    RevertArg::Previous => RevertPolicy::Previous,
                    RevertArg::Best => RevertPolicy::BestSoFar,
                };
            }
            refine(&load_slides(&deck)?, &*make_scorer(&scorer, &cfg)?, &cfg, &out_dir)?;
        }
        Cmd::Reward {
            responses,
            group_size,
            advantages,
        } => {
            let (rewards, adv) = reward_dump(&read(&responses)?, group_size, &cfg.reward).map_err(dataset_err)?;
            print!("{}", to_jsonl(&rewards));
            if let Some(p) = advantages {
                write_or_print(Some(&p), &to_jsonl(&adv))?;
            }
        }
        Cmd::Plan { manifest, aspect } => {
            let m: ContentManifest = serde_json::from_str(&read(&manifest)?)
                .map_err(|e| Exit(EXIT_SCHEMA, format!("schema violation: {e}")))?;
            println!("{}", encode(&plan_layout(&m, aspect, &cfg.planner)?));
        }
        Cmd::Score { input } => {
            let scorer = heuristic_scorer(&cfg);
            for s in load_slides(&input)? {
                let value = serde_json::json!({
                    "breakdown": scorer.breakdown(&s),
                    "feedback": scorer.feedback_for(&s),
                });
                println!("{}", canonical_json(&value));
            }
        }
        Cmd::Render { input, out, com } => {
            let slides = load_slides(&input)?;
            let svg = to_svg_with(&slides[0], SvgOptions { show_center_of_mass: com });
            write_or_print(out.as_deref(), &svg)?;
        }
        Cmd::Synth { count, aspect } => {
            print!("{}", encode_deck(&synthetic_corpus(count, cli.seed, aspect, &cfg.planner)?));
        }
    }
    Ok(())
}

fn refine(slides: &[SlideDoc], scorer: &dyn Scorer, cfg: &HarnessConfig, out_dir: &Path) -> Result<()> {
    let refiner = PlannerRefiner { cfg: cfg.planner.clone() };
    let svg_dir = out_dir.join("svg");
    fs::create_dir_all(&svg_dir).with_context(|| format!("creating {}", svg_dir.display()))?;
    let mut finals = Vec::with_capacity(slides.len());
    let mut traces = Vec::with_capacity(slides.len());
    for (i, slide) in slides.iter().enumerate() {
        let outcome = run_refinement(slide, &scorer, &refiner, &cfg.checker).map_err(|e| match e {
            CheckerError::Scorer { source, .. } => scorer_err(source).context(format!("slide {}", i + 1)),
            other => anyhow::Error::new(other).context(format!("slide {}", i + 1)),
        })?;
        for (t, v) in outcome.versions.iter().enumerate() {
            let svg = to_svg_with(v, SvgOptions { show_center_of_mass: true });
            fs::write(svg_dir.join(format!("slide-{i:03}-iter-{t}.svg")), svg)?;
        }
        traces.push(serde_json::json!({
            "slide": i,
            "initial_score": outcome.trace.iterations.first().map(|r| r.score),
            "final_score": outcome.final_score,
            "trace": outcome.trace,
        }));
        finals.push(outcome.final_slide);
    }
    fs::write(out_dir.join("refined.jsonl"), encode_deck(&finals))?;
    fs::write(out_dir.join("trace.json"), canonical_json(&serde_json::Value::Array(traces)) + "\n")?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Exit>() {
                Some(Exit(code, _)) => ExitCode::from(*code),
                None => ExitCode::FAILURE,
            }
        }
    }
}
