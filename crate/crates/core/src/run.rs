//! Run orchestration: content-addressed run directories, fixture/HTTP
//! backend resolution, an episode worker pool behind a single writer
//! thread, resume-by-diff, artifact loading, and the export pipeline.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Arc};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::RunCorpus;
use crate::backend::{
    BackendError, BackendProfile, Clock, FixtureBackend, HttpBackend, TextBackend,
};
use crate::domain::{validate_task, Episode, SimulationMode, SocialTask};
use crate::engine::{run_interactive_episode, EngineConfig, EngineError};
use crate::finetune::{
    episode_to_records, filter_episodes, restrict_speakers, write_chat_jsonl, ExportError,
    ExportManifest,
};
use crate::hash::sha256_hex;
use crate::judge::{
    judge_deal, rubric_version, score_episode, DealRecord, JudgeError, ScoreRecord,
};
use crate::prompt::VisibilityPolicy;
use crate::script::{run_script_episode, ScriptError};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("task {index} is invalid: {}", violations.join("; "))]
    InvalidTask { index: usize, violations: Vec<String> },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Judge(#[from] JudgeError),
    #[error(transparent)]
    Export(#[from] ExportError),
}

/// The identity of a run; hashing the canonical JSON of this struct yields
/// the run id, so identical configurations land in the same directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: SimulationMode,
    pub tasks_sha256: String,
    pub profile: String,
    pub episodes_per_task: usize,
    pub engine: EngineConfig,
    pub policy: VisibilityPolicy,
    pub seed: u64,
}

impl RunConfig {
    pub fn run_id(&self) -> String {
        let canonical = serde_json::to_string(self).expect("run config serializes");
        sha256_hex(canonical.as_bytes())[..12].to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeStatus {
    pub id: String,
    pub task_index: usize,
    pub rep: usize,
    pub complete: bool,
    /// Whether an episode file exists for this entry; a backend failure
    /// before the first persisted byte leaves only the status.
    pub persisted: bool,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub config: RunConfig,
    pub models: Vec<String>,
    pub rubric_version: String,
    pub started_at_ms: u64,
    pub finished_at_ms: u64,
    pub episodes: Vec<EpisodeStatus>,
}

/// Path layout of one run directory:
/// `<root>/{manifest.json, episodes/*.json, scores/*.json, reports/*}`.
#[derive(Debug, Clone)]
pub struct RunDir {
    pub root: PathBuf,
}

impl RunDir {
    pub fn new(root: PathBuf) -> Self {
        RunDir { root }
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn episodes_dir(&self) -> PathBuf {
        self.root.join("episodes")
    }

    pub fn scores_dir(&self) -> PathBuf {
        self.root.join("scores")
    }

    pub fn reports_dir(&self) -> PathBuf {
        self.root.join("reports")
    }

    pub fn episode_path(&self, id: &str) -> PathBuf {
        self.episodes_dir().join(format!("{id}.json"))
    }

    pub fn journal_path(&self, id: &str) -> PathBuf {
        self.episodes_dir().join(format!("{id}.journal.jsonl"))
    }

    pub fn score_path(&self, id: &str) -> PathBuf {
        self.scores_dir().join(format!("{id}.json"))
    }

    pub fn deal_path(&self, id: &str) -> PathBuf {
        self.scores_dir().join(format!("{id}.deal.json"))
    }

    pub fn create_dirs(&self) -> std::io::Result<()> {
        fs::create_dir_all(self.episodes_dir())?;
        fs::create_dir_all(self.scores_dir())?;
        fs::create_dir_all(self.reports_dir())
    }
}

/// How per-episode backends are produced. Fixtures are re-instantiated per
/// episode with a seed-rotated reply queue so distinct episodes draw
/// different reply alignments; one HTTP backend is shared across workers so
/// its rate limiter covers the whole run.
pub enum RunBackend {
    Fixture { fixture: serde_json::Value, model: String },
    Http(Arc<HttpBackend>),
}

impl RunBackend {
    /// Resolves a CLI `--profile` argument: `fixture:PATH` loads a fixture
    /// file; any other name is looked up in the `--profiles` JSON file
    /// (name -> BackendProfile).
    pub fn from_profile_arg(
        arg: &str,
        profiles_path: Option<&Path>,
        clock: Arc<dyn Clock>,
    ) -> Result<RunBackend, RunError> {
        if let Some(path) = arg.strip_prefix("fixture:") {
            let raw = fs::read_to_string(path)
                .map_err(|e| RunError::Config(format!("fixture {path}: {e}")))?;
            let fixture: serde_json::Value = serde_json::from_str(&raw)
                .map_err(|e| RunError::Config(format!("fixture {path}: {e}")))?;
            let stem = Path::new(path)
                .file_stem()
                .map(|s| s.to_string_lossy().to_string())
                .unwrap_or_else(|| "replies".to_string());
            let model = format!("fixture:{stem}");
            FixtureBackend::from_value(&fixture, &model)?;
            Ok(RunBackend::Fixture { fixture, model })
        } else {
            let path = profiles_path.ok_or_else(|| {
                RunError::Config(format!(
                    "profile {arg:?} needs --profiles FILE (or use fixture:PATH)"
                ))
            })?;
            let raw = fs::read_to_string(path)?;
            let profiles: BTreeMap<String, BackendProfile> = serde_json::from_str(&raw)?;
            let profile = profiles
                .get(arg)
                .cloned()
                .ok_or_else(|| {
                    RunError::Config(format!("profile {arg:?} not found in {}", path.display()))
                })?;
            Ok(RunBackend::Http(Arc::new(HttpBackend::new(profile, clock))))
        }
    }

    pub fn model_name(&self) -> String {
        match self {
            RunBackend::Fixture { model, .. } => model.clone(),
            RunBackend::Http(backend) => backend.model_name().to_string(),
        }
    }

    /// One backend instance for one episode. Sequence fixtures are rotated
    /// left by `rotation % len` so reply alignment varies per episode while
    /// staying reproducible for a given seed.
    pub fn instantiate(&self, rotation: u64) -> Result<Box<dyn TextBackend>, RunError> {
        match self {
            RunBackend::Fixture { fixture, model } => match fixture {
                serde_json::Value::Array(items) => {
                    let mut replies = Vec::with_capacity(items.len());
                    for item in items {
                        let s = item.as_str().ok_or_else(|| {
                            BackendError::BadFixture("sequence entries must be strings".into())
                        })?;
                        replies.push(s.to_string());
                    }
                    if replies.is_empty() {
                        return Err(
                            BackendError::BadFixture("fixture sequence is empty".into()).into()
                        );
                    }
                    let k = (rotation % replies.len() as u64) as usize;
                    replies.rotate_left(k);
                    Ok(Box::new(FixtureBackend::sequence(replies, model.clone())))
                }
                other => Ok(Box::new(FixtureBackend::from_value(other, model.clone())?)),
            },
            RunBackend::Http(backend) => Ok(Box::new(backend.clone())),
        }
    }
}

pub struct SimulateOptions {
    pub mode: SimulationMode,
    pub tasks_path: PathBuf,
    /// The raw profile argument; recorded in the run config and hashed into
    /// the run id.
    pub profile_label: String,
    pub backend: RunBackend,
    pub episodes_per_task: usize,
    pub engine: EngineConfig,
    pub policy: VisibilityPolicy,
    pub concurrency: usize,
    pub out_root: PathBuf,
    pub seed: u64,
    pub clock: Arc<dyn Clock>,
}

pub struct SimulateOutcome {
    pub run_dir: PathBuf,
    pub manifest: RunManifest,
    pub newly_run: usize,
    pub cached: usize,
    pub failures: usize,
}

struct Job {
    id: String,
    task_index: usize,
    rep: usize,
    ordinal: u64,
    task: SocialTask,
}

enum WriterMsg {
    Journal { id: String, line: String },
    Finish { status: EpisodeStatus, episode_json: Option<String> },
}

fn episode_json(episode: &Episode) -> Result<String, RunError> {
    Ok(serde_json::to_string_pretty(episode)? + "\n")
}

/// Runs `episodes_per_task` episodes per task with bounded concurrency.
///
/// Episode files already present in the run directory are kept as-is
/// (resume-by-diff); only missing episodes are generated. All file writes go
/// through one writer thread, which also journals interactive turns to
/// `episodes/<id>.journal.jsonl` until the episode file lands.
pub fn simulate(options: &SimulateOptions) -> Result<SimulateOutcome, RunError> {
    let raw_tasks = fs::read_to_string(&options.tasks_path)?;
    let tasks: Vec<SocialTask> = serde_json::from_str(&raw_tasks)?;
    if tasks.is_empty() {
        return Err(RunError::Config("task file contains no tasks".to_string()));
    }
    for (index, task) in tasks.iter().enumerate() {
        let violations = validate_task(task);
        if !violations.is_empty() {
            return Err(RunError::InvalidTask { index, violations });
        }
    }
    let engine_violations = options.engine.validate();
    if !engine_violations.is_empty() {
        return Err(RunError::Config(engine_violations.join("; ")));
    }
    if options.episodes_per_task == 0 {
        return Err(RunError::Config("episodes-per-task must be >= 1".to_string()));
    }
    if options.concurrency == 0 {
        return Err(RunError::Config("concurrency must be >= 1".to_string()));
    }

    let config = RunConfig {
        mode: options.mode,
        tasks_sha256: sha256_hex(raw_tasks.as_bytes())[..12].to_string(),
        profile: options.profile_label.clone(),
        episodes_per_task: options.episodes_per_task,
        engine: options.engine.clone(),
        policy: options.policy,
        seed: options.seed,
    };
    let run_id = config.run_id();
    let dir = RunDir::new(options.out_root.join(&run_id));
    dir.create_dirs()?;
    let started_at_ms = options.clock.now_ms();

    let mut cached_statuses: Vec<EpisodeStatus> = Vec::new();
    let mut jobs: Vec<Job> = Vec::new();
    for (task_index, task) in tasks.iter().enumerate() {
        let task_hash = sha256_hex(serde_json::to_string(task)?.as_bytes())[..8].to_string();
        for rep in 0..options.episodes_per_task {
            let id = format!("{task_index:03}-{task_hash}-{rep:02}");
            let path = dir.episode_path(&id);
            if path.exists() {
                let episode: Episode = serde_json::from_str(&fs::read_to_string(&path)?)?;
                cached_statuses.push(EpisodeStatus {
                    id,
                    task_index,
                    rep,
                    complete: episode.complete,
                    persisted: true,
                    status: if episode.complete { "ok".to_string() } else { "aborted".to_string() },
                });
            } else {
                jobs.push(Job {
                    id,
                    task_index,
                    rep,
                    ordinal: (task_index * options.episodes_per_task + rep) as u64,
                    task: task.clone(),
                });
            }
        }
    }

    let (tx, rx) = mpsc::channel::<WriterMsg>();
    let dir_ref = &dir;
    let jobs_ref = &jobs;
    let next = AtomicUsize::new(0);
    let next_ref = &next;

    let new_statuses = std::thread::scope(|scope| -> Result<Vec<EpisodeStatus>, RunError> {
        let writer = scope.spawn(move || -> Result<Vec<EpisodeStatus>, std::io::Error> {
            let mut statuses = Vec::new();
            while let Ok(msg) = rx.recv() {
                match msg {
                    WriterMsg::Journal { id, line } => {
                        let mut file = fs::OpenOptions::new()
                            .create(true)
                            .append(true)
                            .open(dir_ref.journal_path(&id))?;
                        file.write_all(line.as_bytes())?;
                        file.write_all(b"\n")?;
                    }
                    WriterMsg::Finish { status, episode_json } => {
                        if let Some(json) = episode_json {
                            fs::write(dir_ref.episode_path(&status.id), json)?;
                        }
                        let journal = dir_ref.journal_path(&status.id);
                        if journal.exists() {
                            fs::remove_file(journal)?;
                        }
                        statuses.push(status);
                    }
                }
            }
            Ok(statuses)
        });

        let worker_count = options.concurrency.min(jobs_ref.len().max(1));
        let mut workers = Vec::with_capacity(worker_count);
        for _ in 0..worker_count {
            let tx = tx.clone();
            workers.push(scope.spawn(move || -> Result<(), RunError> {
                loop {
                    let idx = next_ref.fetch_add(1, Ordering::Relaxed);
                    if idx >= jobs_ref.len() {
                        return Ok(());
                    }
                    let job = &jobs_ref[idx];
                    let rotation = options.seed.wrapping_add(job.ordinal);
                    let msg = run_one_episode(job, rotation, options, &tx)?;
                    tx.send(msg)
                        .map_err(|_| RunError::Config("writer channel closed".to_string()))?;
                }
            }));
        }
        drop(tx);

        let mut first_error: Option<RunError> = None;
        for worker in workers {
            match worker.join() {
                Ok(Ok(())) => {}
                Ok(Err(e)) => {
                    first_error.get_or_insert(e);
                }
                Err(_) => {
                    first_error
                        .get_or_insert(RunError::Config("episode worker panicked".to_string()));
                }
            }
        }
        let statuses = writer
            .join()
            .map_err(|_| RunError::Config("writer thread panicked".to_string()))??;
        if let Some(e) = first_error {
            return Err(e);
        }
        Ok(statuses)
    })?;

    let cached = cached_statuses.len();
    let newly_run = new_statuses.len();
    let mut episodes = cached_statuses;
    episodes.extend(new_statuses);
    episodes.sort_by(|a, b| a.id.cmp(&b.id));
    let failures = episodes.iter().filter(|s| s.status != "ok").count();

    let manifest = RunManifest {
        run_id,
        config,
        models: vec![options.backend.model_name()],
        rubric_version: rubric_version(),
        started_at_ms,
        finished_at_ms: options.clock.now_ms(),
        episodes,
    };
    fs::write(dir.manifest_path(), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(SimulateOutcome { run_dir: dir.root.clone(), manifest, newly_run, cached, failures })
}

fn run_one_episode(
    job: &Job,
    rotation: u64,
    options: &SimulateOptions,
    tx: &mpsc::Sender<WriterMsg>,
) -> Result<WriterMsg, RunError> {
    let status_for = |complete: bool, persisted: bool, status: String| EpisodeStatus {
        id: job.id.clone(),
        task_index: job.task_index,
        rep: job.rep,
        complete,
        persisted,
        status,
    };
    match options.mode {
        SimulationMode::Script => {
            let backend = options.backend.instantiate(rotation)?;
            match run_script_episode(
                &job.id,
                &job.task,
                backend.as_ref(),
                &options.engine,
                options.clock.as_ref(),
            ) {
                Ok(episode) => Ok(WriterMsg::Finish {
                    status: status_for(episode.complete, true, "ok".to_string()),
                    episode_json: Some(episode_json(&episode)?),
                }),
                Err(ScriptError::Backend(e)) => Ok(WriterMsg::Finish {
                    status: status_for(false, false, format!("failed: backend: {e}")),
                    episode_json: None,
                }),
                Err(e) => Ok(WriterMsg::Finish {
                    status: status_for(false, false, format!("failed: {e}")),
                    episode_json: None,
                }),
            }
        }
        mode => {
            let b0 = options.backend.instantiate(rotation)?;
            let b1 = options.backend.instantiate(rotation)?;
            let result = run_interactive_episode(
                &job.id,
                &job.task,
                mode,
                [b0.as_ref(), b1.as_ref()],
                &options.policy,
                &options.engine,
                options.clock.as_ref(),
                |turn| {
                    let line = serde_json::to_string(turn).map_err(std::io::Error::other)?;
                    tx.send(WriterMsg::Journal { id: job.id.clone(), line })
                        .map_err(std::io::Error::other)
                },
            );
            match result {
                Ok(episode) => Ok(WriterMsg::Finish {
                    status: status_for(episode.complete, true, "ok".to_string()),
                    episode_json: Some(episode_json(&episode)?),
                }),
                Err(EngineError::EpisodeAborted { cause, partial, .. }) => Ok(WriterMsg::Finish {
                    status: status_for(false, true, format!("aborted: {cause}")),
                    episode_json: Some(episode_json(&partial)?),
                }),
                Err(EngineError::Journal(e)) => Err(RunError::Io(e)),
            }
        }
    }
}

pub fn load_manifest(run_dir: &Path) -> Result<RunManifest, RunError> {
    let path = RunDir::new(run_dir.to_path_buf()).manifest_path();
    let raw = fs::read_to_string(&path)
        .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&raw)?)
}

/// Loads the manifest and every persisted episode, sorted by id.
pub fn load_run(run_dir: &Path) -> Result<(RunManifest, Vec<Episode>), RunError> {
    let manifest = load_manifest(run_dir)?;
    let dir = RunDir::new(run_dir.to_path_buf());
    let mut episodes = Vec::new();
    for entry in fs::read_dir(dir.episodes_dir())? {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let episode: Episode = serde_json::from_str(&fs::read_to_string(&path)?)?;
        episodes.push(episode);
    }
    episodes.sort_by(|a, b| a.id.cmp(&b.id));
    Ok((manifest, episodes))
}

/// Loads a run plus its score and deal records into an analysis corpus.
pub fn load_corpus(run_dir: &Path, label: Option<&str>) -> Result<RunCorpus, RunError> {
    let (manifest, episodes) = load_run(run_dir)?;
    let dir = RunDir::new(run_dir.to_path_buf());
    let mut scores: Vec<ScoreRecord> = Vec::new();
    let mut deals: Vec<DealRecord> = Vec::new();
    if dir.scores_dir().is_dir() {
        for entry in fs::read_dir(dir.scores_dir())? {
            let path = entry?.path();
            let Some(name) = path.file_name().and_then(|n| n.to_str()) else { continue };
            if !name.ends_with(".json") {
                continue;
            }
            let raw = fs::read_to_string(&path)?;
            if name.ends_with(".deal.json") {
                deals.push(serde_json::from_str(&raw)?);
            } else {
                scores.push(serde_json::from_str(&raw)?);
            }
        }
    }
    scores.sort_by(|a, b| a.episode_id.cmp(&b.episode_id));
    deals.sort_by(|a, b| a.episode_id.cmp(&b.episode_id));
    let label = label
        .map(str::to_string)
        .unwrap_or_else(|| format!("{}:{}", manifest.config.mode, manifest.config.profile));
    Ok(RunCorpus {
        run_id: manifest.run_id.clone(),
        label,
        mode: manifest.config.mode,
        episodes,
        scores,
        deals,
    })
}

pub struct EvaluateOptions {
    pub run_dir: PathBuf,
    pub judge: RunBackend,
    pub deals: bool,
}

#[derive(Debug, Default, PartialEq, Eq)]
pub struct EvaluateSummary {
    pub scored: usize,
    pub score_cached: usize,
    pub score_failed: Vec<String>,
    pub deals_judged: usize,
    pub deal_cached: usize,
    pub deal_failed: Vec<String>,
    pub skipped: usize,
}

impl EvaluateSummary {
    pub fn failures(&self) -> usize {
        self.score_failed.len() + self.deal_failed.len()
    }
}

/// Scores every complete episode of a run, writing one score record per
/// episode under `scores/`. Episodes already scored with the same judge
/// model and rubric version are skipped (cache hits). With `deals`, also
/// runs the deal judgment into `scores/<id>.deal.json`.
///
/// Judging failures are collected, not fatal; backend hard failures abort.
pub fn evaluate(options: &EvaluateOptions) -> Result<EvaluateSummary, RunError> {
    let dir = RunDir::new(options.run_dir.clone());
    let (_, episodes) = load_run(&options.run_dir)?;
    fs::create_dir_all(dir.scores_dir())?;
    let judge = options.judge.instantiate(0)?;
    let version = rubric_version();
    let mut summary = EvaluateSummary::default();

    for episode in &episodes {
        if !episode.complete || episode.turns.is_empty() {
            summary.skipped += 1;
            continue;
        }
        let score_path = dir.score_path(&episode.id);
        let cached = fs::read_to_string(&score_path)
            .ok()
            .and_then(|raw| serde_json::from_str::<ScoreRecord>(&raw).ok())
            .is_some_and(|r| r.rubric_version == version && r.judge_model == judge.model_name());
        if cached {
            summary.score_cached += 1;
        } else {
            match score_episode(&episode.task, episode, judge.as_ref()) {
                Ok(scores) => {
                    let record = ScoreRecord {
                        episode_id: episode.id.clone(),
                        judge_model: judge.model_name().to_string(),
                        rubric_version: version.clone(),
                        scores,
                    };
                    fs::write(&score_path, serde_json::to_string_pretty(&record)? + "\n")?;
                    summary.scored += 1;
                }
                Err(JudgeError::Backend(e)) => return Err(e.into()),
                Err(e) => summary.score_failed.push(format!("{}: {e}", episode.id)),
            }
        }

        if options.deals {
            let deal_path = dir.deal_path(&episode.id);
            let cached = fs::read_to_string(&deal_path)
                .ok()
                .and_then(|raw| serde_json::from_str::<DealRecord>(&raw).ok())
                .is_some_and(|r| r.judge_model == judge.model_name());
            if cached {
                summary.deal_cached += 1;
                continue;
            }
            match judge_deal(&episode.task, episode, judge.as_ref()) {
                Ok(judgment) => {
                    let record = DealRecord {
                        episode_id: episode.id.clone(),
                        judge_model: judge.model_name().to_string(),
                        judgment,
                    };
                    fs::write(&deal_path, serde_json::to_string_pretty(&record)? + "\n")?;
                    summary.deals_judged += 1;
                }
                Err(JudgeError::Backend(e)) => return Err(e.into()),
                Err(e) => summary.deal_failed.push(format!("{}: {e}", episode.id)),
            }
        }
    }
    Ok(summary)
}

/// The full export pipeline: filter to scored, complete episodes; convert to
/// records; optionally restrict the acting speaker; write the JSONL and its
/// manifest (at `<out>.manifest.json` for `<out>.jsonl`).
pub fn export_finetune(
    run_dir: &Path,
    out_path: &Path,
    speaker: Option<usize>,
) -> Result<ExportManifest, RunError> {
    let corpus = load_corpus(run_dir, None)?;
    if corpus.mode != SimulationMode::Script {
        return Err(RunError::Config(format!(
            "run {} is not a Script-mode run; finetune export only covers Script episodes",
            corpus.run_id
        )));
    }
    let (kept, dropped) = filter_episodes(&corpus.episodes, &corpus.scores);
    let mut records = Vec::new();
    for episode in &kept {
        records.extend(episode_to_records(episode, &episode.task)?);
    }
    let records = restrict_speakers(records, speaker);
    let mut manifest = write_chat_jsonl(&records, out_path)?;
    manifest.kept = kept.len();
    manifest.dropped = dropped;
    if let Some(s) = speaker {
        manifest.speakers = s.to_string();
    }
    fs::write(
        out_path.with_extension("manifest.json"),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    Ok(manifest)
}

/// Reads one JSON value per line.
pub fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, RunError> {
    let raw = fs::read_to_string(path)?;
    let mut items = Vec::new();
    for line in raw.lines() {
        if line.trim().is_empty() {
            continue;
        }
        items.push(serde_json::from_str(line)?);
    }
    Ok(items)
}

/// Writes one JSON value per line.
pub fn write_jsonl<T: Serialize>(items: &[T], path: &Path) -> Result<(), RunError> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item)?);
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}
