//! LLM-judge evaluation: a frozen seven-dimension rubric prompt, a binary
//! deal-formation judgment, strict parsing of both, and score aggregation.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{BackendError, GenerationRequest, TextBackend, DEFAULT_BULK_MAX_TOKENS};
use crate::domain::{AgentScores, Dimension, DimensionScore, Episode, EvaluationScores, SocialTask};
use crate::hash::sha256_hex;
use crate::prompt::{render_context_common, render_turn_line, PromptText, VisibilityPolicy};
use crate::stats::{mean, sample_std};

/// All judge calls run at temperature 0 so repeat scoring is reproducible.
pub const JUDGE_TEMPERATURE: f64 = 0.0;

/// The rubric prompt skeleton. The placeholders `{context}`, `{transcript}`,
/// and `{dimensions}` are substituted textually; everything else is frozen,
/// and [`rubric_version`] hashes these bytes so scores produced by different
/// rubric revisions are never mixed.
pub const RUBRIC_TEMPLATE: &str = r#"You are a strict, impartial judge of goal-driven social interactions. Read the context and the transcript, then score BOTH participants on every dimension listed below.

Here is the context of this interaction:
{context}
Transcript:
{transcript}

Score dimensions:
{dimensions}

For each participant and each dimension, reason in one or two sentences about what the transcript shows, then choose an integer score inside the dimension's range.

After all reasoning, output the scores as exactly one fenced code block labelled json, shaped like this:
```json
{"<full name of participant 1>": {"BEL": {"reasoning": "<short justification>", "score": 0}, "REL": {"reasoning": "<short justification>", "score": 0}, "KNO": {"reasoning": "<short justification>", "score": 0}, "SEC": {"reasoning": "<short justification>", "score": 0}, "SOC": {"reasoning": "<short justification>", "score": 0}, "FIN": {"reasoning": "<short justification>", "score": 0}, "GOAL": {"reasoning": "<short justification>", "score": 0}}, "<full name of participant 2>": {"BEL": {"reasoning": "<short justification>", "score": 0}, "REL": {"reasoning": "<short justification>", "score": 0}, "KNO": {"reasoning": "<short justification>", "score": 0}, "SEC": {"reasoning": "<short justification>", "score": 0}, "SOC": {"reasoning": "<short justification>", "score": 0}, "FIN": {"reasoning": "<short justification>", "score": 0}, "GOAL": {"reasoning": "<short justification>", "score": 0}}}
```
Use the participants' full names as the top-level keys and write nothing after the closing fence."#;

/// 12-hex-digit fingerprint of [`RUBRIC_TEMPLATE`], stored with every score
/// record so re-scoring under a changed rubric is detectable.
pub fn rubric_version() -> String {
    sha256_hex(RUBRIC_TEMPLATE.as_bytes())[..12].to_string()
}

/// Binary deal-formation verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DealJudgment {
    pub reasoning: String,
    pub answer: bool,
}

/// One persisted rubric scoring, keyed by episode, judge model, and rubric
/// revision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub episode_id: String,
    pub judge_model: String,
    pub rubric_version: String,
    pub scores: EvaluationScores,
}

/// One persisted deal judgment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DealRecord {
    pub episode_id: String,
    pub judge_model: String,
    pub judgment: DealJudgment,
}

#[derive(Debug, Error)]
pub enum JudgeError {
    #[error("cannot judge an episode with no turns")]
    EmptyTranscript,
    #[error("episode {id} is incomplete; only complete episodes are judged")]
    IncompleteEpisode { id: String },
    #[error("judge output has no well-formed yes/no <Answer> tag: {raw:?}")]
    UnparseableJudgment { raw: String },
    #[error("judging failed after a re-ask: {reason}")]
    JudgingFailed { reason: String },
    #[error(transparent)]
    Backend(#[from] BackendError),
}

fn transcript(task: &SocialTask, episode: &Episode) -> String {
    episode
        .turns
        .iter()
        .map(|t| render_turn_line(t, &task.participants[t.speaker].name))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Fills the deal-formation template with both goals and the rendered
/// transcript.
pub fn build_deal_prompt(task: &SocialTask, episode: &Episode) -> Result<PromptText, JudgeError> {
    if episode.turns.is_empty() {
        return Err(JudgeError::EmptyTranscript);
    }
    let text = format!(
        "Given social goals and social interactions below, tell me whether the deal has been made.\n\
         Agent one's goal: {}\n\
         Agent two's goal: {}\n\
         Social interactions:\n\
         {}. \n\n\
         Output format: <Reasoning> </Reasoning>, <Answer>(choose yes or no)</Answer>",
        task.goals[0],
        task.goals[1],
        transcript(task, episode),
    );
    Ok(PromptText::user(text))
}

fn answer_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?is)<answer>(.*?)</answer>").unwrap())
}

fn reasoning_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?is)<reasoning>(.*?)</reasoning>").unwrap())
}

/// Extracts a [`DealJudgment`] from raw judge output.
///
/// Tags are matched case-insensitively. The answer body must be "yes" or
/// "no" (any case, optional trailing period); the reasoning block is
/// optional.
pub fn parse_deal(raw: &str) -> Result<DealJudgment, JudgeError> {
    let unparseable = || JudgeError::UnparseableJudgment { raw: raw.to_string() };
    let captures = answer_re().captures(raw).ok_or_else(unparseable)?;
    let body = captures[1].trim().trim_end_matches('.').trim();
    let answer = if body.eq_ignore_ascii_case("yes") {
        true
    } else if body.eq_ignore_ascii_case("no") {
        false
    } else {
        return Err(unparseable());
    };
    let reasoning = reasoning_re()
        .captures(raw)
        .map(|c| c[1].trim().to_string())
        .unwrap_or_default();
    Ok(DealJudgment { reasoning, answer })
}

/// Runs the deal judgment: one call, one re-ask on unparseable output.
pub fn judge_deal(
    task: &SocialTask,
    episode: &Episode,
    judge: &dyn TextBackend,
) -> Result<DealJudgment, JudgeError> {
    let prompt = build_deal_prompt(task, episode)?;
    let request = GenerationRequest::new(prompt, JUDGE_TEMPERATURE, DEFAULT_BULK_MAX_TOKENS);
    let mut last_raw = String::new();
    for _ in 0..2 {
        let completion = judge.complete(&request)?;
        match parse_deal(&completion.text) {
            Ok(judgment) => return Ok(judgment),
            Err(_) => last_raw = completion.text,
        }
    }
    Err(JudgeError::UnparseableJudgment { raw: last_raw })
}

/// Renders the full rubric prompt for one episode. The judge sees the
/// omniscient context (both goals, both secrets).
pub fn build_rubric_prompt(task: &SocialTask, episode: &Episode) -> PromptText {
    let context = render_context_common(task, 0, &VisibilityPolicy::mindreaders_default());
    let dimensions = Dimension::ALL
        .iter()
        .map(|dim| {
            let (lo, hi) = dim.range();
            format!("- {}: {}; integer in [{}, {}].", dim.wire_name(), dim.description(), lo, hi)
        })
        .collect::<Vec<_>>()
        .join("\n");
    let text = RUBRIC_TEMPLATE
        .replace("{context}", &context)
        .replace("{transcript}", &transcript(task, episode))
        .replace("{dimensions}", &dimensions);
    PromptText::user(text)
}

/// The content of the last complete fenced code block in `raw`, with the
/// opening fence's language tag stripped.
fn last_fenced_block(raw: &str) -> Option<&str> {
    let mut last = None;
    let mut from = 0;
    while let Some(open) = raw[from..].find("```") {
        let tag_start = from + open + 3;
        let Some(nl) = raw[tag_start..].find('\n') else { break };
        let content_start = tag_start + nl + 1;
        let Some(close) = raw[content_start..].find("```") else { break };
        let content_end = content_start + close;
        last = Some(raw[content_start..content_end].trim());
        from = content_end + 3;
    }
    last
}

/// Parses and range-validates a rubric reply against the task's
/// participants; the error string names the first problem found.
fn parse_scores(raw: &str, task: &SocialTask) -> Result<EvaluationScores, String> {
    let block = last_fenced_block(raw).ok_or("no fenced score block in judge output")?;
    let parsed: BTreeMap<String, BTreeMap<String, DimensionScore>> =
        serde_json::from_str(block).map_err(|e| format!("score block is not valid JSON: {e}"))?;
    for key in parsed.keys() {
        if !task.participants.iter().any(|p| &p.name == key) {
            return Err(format!("unknown participant {key:?} in score block"));
        }
    }
    let mut agents = Vec::with_capacity(2);
    for participant in &task.participants {
        let cells = parsed
            .get(&participant.name)
            .ok_or_else(|| format!("no scores for participant {:?}", participant.name))?;
        if cells.is_empty() {
            return Err(format!("empty score set for participant {:?}", participant.name));
        }
        let mut dims = BTreeMap::new();
        for (name, cell) in cells {
            let dim = Dimension::from_wire_name(name)
                .ok_or_else(|| format!("unknown dimension {name:?}"))?;
            dims.insert(dim, cell.clone());
        }
        agents.push(AgentScores { name: participant.name.clone(), dims });
    }
    let second = agents.pop().expect("two participants");
    let first = agents.pop().expect("two participants");
    let scores = EvaluationScores { agents: [first, second] };
    let violations = scores.validate();
    if !violations.is_empty() {
        return Err(violations.join("; "));
    }
    Ok(scores)
}

/// Scores one complete episode with the rubric judge.
///
/// Issues one call at temperature 0; an unparseable or out-of-range reply is
/// re-asked once, after which the episode fails judging and is excluded
/// downstream.
pub fn score_episode(
    task: &SocialTask,
    episode: &Episode,
    judge: &dyn TextBackend,
) -> Result<EvaluationScores, JudgeError> {
    if !episode.complete {
        return Err(JudgeError::IncompleteEpisode { id: episode.id.clone() });
    }
    if episode.turns.is_empty() {
        return Err(JudgeError::EmptyTranscript);
    }
    let prompt = build_rubric_prompt(task, episode);
    let request = GenerationRequest::new(prompt, JUDGE_TEMPERATURE, DEFAULT_BULK_MAX_TOKENS);
    let mut last_reason = String::new();
    for _ in 0..2 {
        let completion = judge.complete(&request)?;
        match parse_scores(&completion.text, task) {
            Ok(scores) => return Ok(scores),
            Err(reason) => last_reason = reason,
        }
    }
    Err(JudgeError::JudgingFailed { reason: last_reason })
}

/// Mean, sample standard deviation (n−1), and sample count for one
/// dimension; each agent of each scoring contributes one sample. `None` when
/// no scoring carries the dimension.
pub fn aggregate_scores(
    scores: &[EvaluationScores],
    dimension: Dimension,
) -> Option<(f64, f64, usize)> {
    let samples: Vec<f64> = scores.iter().flat_map(|s| s.dimension_samples(dimension)).collect();
    if samples.is_empty() {
        return None;
    }
    Some((mean(&samples), sample_std(&samples), samples.len()))
}
