//! dyadsim: batch simulation, judging, and analysis for dyadic goal-driven
//! social interactions.
//!
//! Subcommands mirror the pipeline stages: `simulate` produces a run
//! directory of episode JSON, `evaluate` adds judge scores, `analyze`
//! compares runs, `export-finetune` converts a Script run into chat JSONL,
//! `card` renders the simulation card, and `annotate` drives the blinded
//! pairwise naturalness protocol. Exit codes: 0 ok, 1 partial failures,
//! 2 configuration error.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::sync::Arc;

use anyhow::Result;
use clap::{Parser, Subcommand};

use dyadsim_core::analysis::{
    compare_runs, histogram_csv, naturalness_win_rate, AnalysisOptions, AnnotationChoice,
    NaturalnessReport, PairKey, RunCorpus, Side,
};
use dyadsim_core::annotate::export_annotation_pairs;
use dyadsim_core::backend::{Clock, SystemClock, VirtualClock};
use dyadsim_core::card::{render_simulation_card, CardSections};
use dyadsim_core::domain::{validate_task, SimulationMode, SocialTask};
use dyadsim_core::engine::EngineConfig;
use dyadsim_core::prompt::{
    build_agent_prompt, build_script_prompt, ProfileDetail, VisibilityPolicy,
};
use dyadsim_core::run::{
    evaluate, export_finetune, load_corpus, load_manifest, simulate, EvaluateOptions, RunBackend,
    RunDir, RunError, SimulateOptions,
};

#[derive(Parser)]
#[command(name = "dyadsim")]
#[command(about = "Batch simulator and analysis toolkit for dyadic social interactions")]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Run episodes for every task in a task file
    Simulate {
        /// Interaction regime: agents | mindreaders | script
        #[arg(long, value_parser = SimulationMode::from_str)]
        mode: SimulationMode,

        /// Path to the task file (JSON array of tasks)
        #[arg(long)]
        tasks: PathBuf,

        /// Backend: `fixture:PATH` or a profile name from --profiles
        #[arg(long)]
        profile: String,

        /// JSON file mapping profile names to backend settings
        #[arg(long)]
        profiles: Option<PathBuf>,

        /// Episodes to run per task
        #[arg(long, default_value_t = 5)]
        episodes_per_task: usize,

        /// Hard cap on turns per episode
        #[arg(long, default_value_t = 20)]
        max_turns: usize,

        /// Which participant takes turn 0
        #[arg(long, default_value_t = 0)]
        start_speaker: usize,

        /// Retries per turn on malformed model output
        #[arg(long, default_value_t = 3)]
        malformed_retries: u32,

        /// Sampling temperature for interaction turns
        #[arg(long, default_value_t = 0.7)]
        temperature: f64,

        /// Record full prompt text in provenance (hashes are always kept)
        #[arg(long)]
        log_prompts: bool,

        /// Worker threads
        #[arg(long, default_value_t = 4)]
        concurrency: usize,

        /// Output root; the run lands in OUT/<run-id>/
        #[arg(long)]
        out: PathBuf,

        /// Fixture reply rotation seed
        #[arg(long, default_value_t = 0)]
        seed: u64,

        /// Render character backgrounds as names only
        #[arg(long)]
        name_only: bool,

        /// Override partner-secret visibility (mode default otherwise)
        #[arg(long, value_name = "BOOL", action = clap::ArgAction::Set)]
        show_partner_secret: Option<bool>,
    },

    /// Judge every complete episode of a run
    Evaluate {
        /// Run directory produced by `simulate`
        #[arg(long)]
        run: PathBuf,

        /// Judge backend: `fixture:PATH` or a profile name from --profiles
        #[arg(long)]
        judge: String,

        /// JSON file mapping profile names to backend settings
        #[arg(long)]
        profiles: Option<PathBuf>,

        /// Also run the deal-reached judgment per episode
        #[arg(long)]
        deals: bool,
    },

    /// Compare metrics across runs and write the report artifacts
    Analyze {
        /// Run directory, optionally labeled as LABEL=DIR; repeatable
        #[arg(long = "run", required = true)]
        runs: Vec<String>,

        /// Name whose first mention position is tracked
        #[arg(long)]
        mention_name: Option<String>,

        /// Count only spoken words toward verbosity
        #[arg(long)]
        speak_only: bool,

        /// Imported annotation choices (JSON array) for naturalness
        #[arg(long, requires = "labeling")]
        choices: Option<PathBuf>,

        /// Unblinding key written by `annotate`
        #[arg(long, requires = "choices")]
        labeling: Option<PathBuf>,

        /// Report directory (default: reports/ inside the first run)
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Export a scored Script run as chat-format JSONL
    ExportFinetune {
        /// Run directory produced by `simulate --mode script`
        #[arg(long)]
        run: PathBuf,

        /// Output JSONL path (default: reports/finetune.jsonl in the run)
        #[arg(long)]
        out: Option<PathBuf>,

        /// Keep turns by this speaker: both | 0 | 1
        #[arg(long, default_value = "both")]
        speakers: String,
    },

    /// Render the simulation card for a run
    Card {
        /// Run directory
        #[arg(long)]
        run: PathBuf,

        /// JSON file with the free-text card sections
        #[arg(long)]
        sections: Option<PathBuf>,

        /// Fail if a required free-text section is missing
        #[arg(long)]
        strict: bool,

        /// Output path (default: reports/card.md in the run)
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Pair two runs for blinded annotation and collect choices
    Annotate {
        /// First run directory
        #[arg(long)]
        run_a: PathBuf,

        /// Second run directory
        #[arg(long)]
        run_b: PathBuf,

        /// Side-assignment seed
        #[arg(long, default_value_t = 0)]
        seed: u64,

        /// Directory for pairs.json, labeling.json, and choices.json
        #[arg(long)]
        out: PathBuf,

        /// Write the pair files without running the terminal loop
        #[arg(long)]
        export_only: bool,
    },

    /// Print a rendered prompt for one task
    DumpPrompt {
        /// Path to the task file (JSON array of tasks)
        #[arg(long)]
        tasks: PathBuf,

        /// Which task in the file
        #[arg(long, default_value_t = 0)]
        task_index: usize,

        /// Prompt flavor: agents | mindreaders | script
        #[arg(long, value_parser = SimulationMode::from_str)]
        mode: SimulationMode,

        /// Viewer participant for agent prompts
        #[arg(long, default_value_t = 0)]
        viewer: usize,

        /// Turn cap quoted in Script prompts
        #[arg(long, default_value_t = 20)]
        max_turns: usize,

        /// Render character backgrounds as names only
        #[arg(long)]
        name_only: bool,
    },
}

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    RunError::Config(msg.into()).into()
}

fn load_tasks(path: &Path) -> Result<Vec<SocialTask>> {
    let raw = fs::read_to_string(path)
        .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    let tasks: Vec<SocialTask> = serde_json::from_str(&raw)
        .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    for (index, task) in tasks.iter().enumerate() {
        let violations = validate_task(task);
        if !violations.is_empty() {
            return Err(RunError::InvalidTask { index, violations }.into());
        }
    }
    Ok(tasks)
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let raw = fs::read_to_string(path)
        .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&raw).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

fn write_report(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, contents)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Fixture runs get a virtual clock so reruns are byte-identical; live runs
/// need real time for rate limiting and provenance.
fn clock_for(profile_arg: &str) -> Arc<dyn Clock> {
    if profile_arg.starts_with("fixture:") {
        Arc::new(VirtualClock::new())
    } else {
        Arc::new(SystemClock)
    }
}

fn sanitize_label(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    mode: SimulationMode,
    tasks: PathBuf,
    profile: String,
    profiles: Option<PathBuf>,
    episodes_per_task: usize,
    engine: EngineConfig,
    concurrency: usize,
    out: PathBuf,
    seed: u64,
    name_only: bool,
    show_partner_secret: Option<bool>,
) -> Result<u8> {
    load_tasks(&tasks)?;
    let violations = engine.validate();
    if !violations.is_empty() {
        return Err(config_err(violations.join("; ")));
    }

    let mut policy = VisibilityPolicy::for_mode(mode);
    if name_only {
        policy.profile_detail = ProfileDetail::NameOnly;
    }
    if let Some(show) = show_partner_secret {
        policy.show_partner_secret = show;
    }

    let clock = clock_for(&profile);
    let backend = RunBackend::from_profile_arg(&profile, profiles.as_deref(), clock.clone())?;

    let options = SimulateOptions {
        mode,
        tasks_path: tasks,
        profile_label: profile,
        backend,
        episodes_per_task,
        engine,
        policy,
        concurrency,
        out_root: out,
        seed,
        clock,
    };
    let outcome = simulate(&options)?;
    println!("run {}", outcome.manifest.run_id);
    println!("dir {}", outcome.run_dir.display());
    println!(
        "episodes {} (new {}, cached {}, failed {})",
        outcome.manifest.episodes.len(),
        outcome.newly_run,
        outcome.cached,
        outcome.failures
    );
    for status in outcome.manifest.episodes.iter().filter(|s| s.status != "ok") {
        println!("  {}: {}", status.id, status.status);
    }
    Ok(if outcome.failures > 0 { 1 } else { 0 })
}

fn cmd_evaluate(run: PathBuf, judge: String, profiles: Option<PathBuf>, deals: bool) -> Result<u8> {
    let judge_backend = RunBackend::from_profile_arg(&judge, profiles.as_deref(), clock_for(&judge))?;
    let options = EvaluateOptions { run_dir: run, judge: judge_backend, deals };
    let summary = evaluate(&options)?;
    println!(
        "scored {} (cached {}), deals {} (cached {}), skipped {}",
        summary.scored, summary.score_cached, summary.deals_judged, summary.deal_cached,
        summary.skipped
    );
    for failure in summary.score_failed.iter().chain(summary.deal_failed.iter()) {
        println!("  failed {failure}");
    }
    Ok(if summary.failures() > 0 { 1 } else { 0 })
}

fn parse_run_spec(spec: &str) -> (Option<String>, PathBuf) {
    match spec.split_once('=') {
        Some((label, dir)) if !label.contains('/') && !label.is_empty() => {
            (Some(label.to_string()), PathBuf::from(dir))
        }
        _ => (None, PathBuf::from(spec)),
    }
}

fn cmd_analyze(
    runs: Vec<String>,
    mention_name: Option<String>,
    speak_only: bool,
    choices: Option<PathBuf>,
    labeling: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<u8> {
    let mut corpora: Vec<RunCorpus> = Vec::new();
    for spec in &runs {
        let (label, dir) = parse_run_spec(spec);
        corpora.push(load_corpus(&dir, label.as_deref())?);
    }

    let naturalness: Option<NaturalnessReport> = match (&choices, &labeling) {
        (Some(choices_path), Some(labeling_path)) => {
            let choices: Vec<AnnotationChoice> = load_json(choices_path)?;
            let keys: Vec<PairKey> = load_json(labeling_path)?;
            let labeling: BTreeMap<String, PairKey> =
                keys.into_iter().map(|k| (k.pair_id.clone(), k)).collect();
            Some(naturalness_win_rate(&choices, &labeling)?)
        }
        _ => None,
    };

    let options = AnalysisOptions { speak_only, mention_name };
    let report = compare_runs(&corpora, &options, naturalness);

    let out_dir = match out {
        Some(dir) => dir,
        None => {
            let (_, first_dir) = parse_run_spec(&runs[0]);
            RunDir::new(first_dir).reports_dir()
        }
    };
    write_report(&out_dir.join("comparison.md"), &report.to_markdown())?;
    write_report(
        &out_dir.join("comparison.json"),
        &(serde_json::to_string_pretty(&report)? + "\n"),
    )?;
    for run in &report.runs {
        if let Some(bins) = &run.first_mention_bins {
            let name = format!("first_mention_{}.csv", sanitize_label(&run.label));
            write_report(&out_dir.join(name), &histogram_csv(bins))?;
        }
    }
    Ok(0)
}

fn cmd_export_finetune(run: PathBuf, out: Option<PathBuf>, speakers: String) -> Result<u8> {
    let speaker = match speakers.as_str() {
        "both" => None,
        "0" => Some(0),
        "1" => Some(1),
        other => return Err(config_err(format!("--speakers must be both|0|1, got {other:?}"))),
    };
    let out_path = out.unwrap_or_else(|| RunDir::new(run.clone()).reports_dir().join("finetune.jsonl"));
    if let Some(parent) = out_path.parent() {
        fs::create_dir_all(parent)?;
    }
    let manifest = export_finetune(&run, &out_path, speaker)?;
    println!("wrote {}", out_path.display());
    println!(
        "records {} from {} episodes ({} dropped); suggested epochs {}",
        manifest.record_count,
        manifest.kept,
        manifest.dropped.len(),
        manifest.recommended_epochs
    );
    Ok(0)
}

fn cmd_card(run: PathBuf, sections: Option<PathBuf>, strict: bool, out: Option<PathBuf>) -> Result<u8> {
    let manifest = load_manifest(&run)?;
    let sections: CardSections = match sections {
        Some(path) => load_json(&path)?,
        None => CardSections::default(),
    };
    let card = render_simulation_card(&manifest, &sections, strict)
        .map_err(|e| config_err(e.to_string()))?;
    let out_path = out.unwrap_or_else(|| RunDir::new(run).reports_dir().join("card.md"));
    write_report(&out_path, &card)?;
    Ok(0)
}

fn cmd_annotate(
    run_a: PathBuf,
    run_b: PathBuf,
    seed: u64,
    out: PathBuf,
    export_only: bool,
) -> Result<u8> {
    let a = load_corpus(&run_a, None)?;
    let b = load_corpus(&run_b, None)?;
    let (pairs, keys) = export_annotation_pairs(&a, &b, seed);
    if pairs.is_empty() {
        return Err(config_err("no task-matched complete episodes between the two runs"));
    }
    fs::create_dir_all(&out)?;
    write_report(&out.join("pairs.json"), &(serde_json::to_string_pretty(&pairs)? + "\n"))?;
    write_report(&out.join("labeling.json"), &(serde_json::to_string_pretty(&keys)? + "\n"))?;
    if export_only {
        return Ok(0);
    }

    let stdin = io::stdin();
    let mut lines = stdin.lock().lines();
    let mut choices: Vec<AnnotationChoice> = Vec::new();
    'pairs: for (i, pair) in pairs.iter().enumerate() {
        println!("\nPair {}/{} [{}]", i + 1, pairs.len(), pair.pair_id);
        println!("Scenario: {}", pair.scenario);
        println!("\n--- A ---\n{}", pair.transcript_a);
        println!("\n--- B ---\n{}", pair.transcript_b);
        loop {
            print!("\nWhich interaction is more natural? [a/b/s=skip/q=quit] ");
            io::stdout().flush()?;
            let Some(line) = lines.next() else { break 'pairs };
            match line?.trim().to_ascii_lowercase().as_str() {
                "a" => {
                    choices.push(AnnotationChoice { pair_id: pair.pair_id.clone(), winner: Side::A });
                    break;
                }
                "b" => {
                    choices.push(AnnotationChoice { pair_id: pair.pair_id.clone(), winner: Side::B });
                    break;
                }
                "s" => break,
                "q" => break 'pairs,
                other => println!("unrecognized choice {other:?}"),
            }
        }
    }
    println!();
    write_report(&out.join("choices.json"), &(serde_json::to_string_pretty(&choices)? + "\n"))?;
    println!("recorded {} choices over {} pairs", choices.len(), pairs.len());
    Ok(0)
}

fn cmd_dump_prompt(
    tasks: PathBuf,
    task_index: usize,
    mode: SimulationMode,
    viewer: usize,
    max_turns: usize,
    name_only: bool,
) -> Result<u8> {
    let tasks = load_tasks(&tasks)?;
    let task = tasks
        .get(task_index)
        .ok_or_else(|| config_err(format!("task index {task_index} out of range (0..{})", tasks.len())))?;
    if viewer > 1 {
        return Err(config_err("viewer must be 0 or 1"));
    }
    let text = match mode {
        SimulationMode::Script => build_script_prompt(task, max_turns).text(),
        mode => {
            let mut policy = VisibilityPolicy::for_mode(mode);
            if name_only {
                policy.profile_detail = ProfileDetail::NameOnly;
            }
            build_agent_prompt(task, viewer, mode, &[], 0, &policy)
                .map_err(|e| config_err(e.to_string()))?
                .text()
        }
    };
    print!("{text}");
    io::stdout().flush()?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Commands::Simulate {
            mode,
            tasks,
            profile,
            profiles,
            episodes_per_task,
            max_turns,
            start_speaker,
            malformed_retries,
            temperature,
            log_prompts,
            concurrency,
            out,
            seed,
            name_only,
            show_partner_secret,
        } => {
            let engine = EngineConfig {
                max_turns,
                start_speaker,
                malformed_retries,
                temperature,
                log_prompts,
            };
            cmd_simulate(
                mode,
                tasks,
                profile,
                profiles,
                episodes_per_task,
                engine,
                concurrency,
                out,
                seed,
                name_only,
                show_partner_secret,
            )
        }
        Commands::Evaluate { run, judge, profiles, deals } => {
            cmd_evaluate(run, judge, profiles, deals)
        }
        Commands::Analyze { runs, mention_name, speak_only, choices, labeling, out } => {
            cmd_analyze(runs, mention_name, speak_only, choices, labeling, out)
        }
        Commands::ExportFinetune { run, out, speakers } => cmd_export_finetune(run, out, speakers),
        Commands::Card { run, sections, strict, out } => cmd_card(run, sections, strict, out),
        Commands::Annotate { run_a, run_b, seed, out, export_only } => {
            cmd_annotate(run_a, run_b, seed, out, export_only)
        }
        Commands::DumpPrompt { tasks, task_index, mode, viewer, max_turns, name_only } => {
            cmd_dump_prompt(tasks, task_index, mode, viewer, max_turns, name_only)
        }
    }
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<RunError>() {
        Some(RunError::Config(_)) | Some(RunError::InvalidTask { .. }) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
