//! Interactive episode engine: a strict-alternation state machine that
//! builds a prompt, calls the speaker's backend, parses the JSON action,
//! and appends the turn until a Leave or the turn cap.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{Clock, GenerationRequest, TextBackend, DEFAULT_TURN_MAX_TOKENS};
use crate::domain::{
    ActionType, CallRecord, Episode, Provenance, SimulationMode, SocialTask, Turn,
};
use crate::prompt::{build_agent_prompt, VisibilityPolicy};

/// Engine knobs shared by the interactive and Script runners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    #[serde(default = "default_max_turns")]
    pub max_turns: usize,
    #[serde(default)]
    pub start_speaker: usize,
    #[serde(default = "default_malformed_retries")]
    pub malformed_retries: u32,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    /// Store full prompt text in provenance call records (hashes are always
    /// stored).
    #[serde(default)]
    pub log_prompts: bool,
}

fn default_max_turns() -> usize {
    20
}

fn default_malformed_retries() -> u32 {
    3
}

fn default_temperature() -> f64 {
    0.7
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            max_turns: default_max_turns(),
            start_speaker: 0,
            malformed_retries: default_malformed_retries(),
            temperature: default_temperature(),
            log_prompts: false,
        }
    }
}

impl EngineConfig {
    /// One description per violated invariant; empty when valid.
    pub fn validate(&self) -> Vec<String> {
        let mut violations = Vec::new();
        if self.max_turns < 1 {
            violations.push("max_turns must be >= 1".to_string());
        }
        if self.start_speaker > 1 {
            violations.push("start_speaker must be 0 or 1".to_string());
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            violations.push(format!("temperature {} outside [0, 2]", self.temperature));
        }
        violations
    }
}

/// The wire form of one agent action: a JSON object with exactly the keys
/// `action_type` and `argument`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionEnvelope {
    pub action_type: ActionType,
    pub argument: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("malformed action: {reason}")]
pub struct MalformedAction {
    pub reason: String,
}

#[derive(Debug, Error)]
pub enum EngineError {
    /// A turn stayed malformed after all retries, or its backend call
    /// failed. The partial episode (with `complete = false`) is attached so
    /// callers can persist it.
    #[error("episode aborted at turn {turn_index}: {cause}")]
    EpisodeAborted { turn_index: usize, cause: String, partial: Box<Episode> },
    #[error("turn journal write failed: {0}")]
    Journal(#[from] std::io::Error),
}

/// Extracts and validates the first JSON action object in `raw`.
///
/// Models often wrap the object in code fences or prose, and sometimes quote
/// other JSON first, so every balanced `{...}` candidate is tried in order;
/// the first one that satisfies the action schema wins. Leave/None arguments
/// are normalized to the empty string; Speak/NonVerbal/Action arguments must
/// be non-empty.
pub fn parse_action(raw: &str) -> Result<ActionEnvelope, MalformedAction> {
    let mut first_reason: Option<String> = None;
    let mut search_from = 0;
    while let Some(offset) = raw[search_from..].find('{') {
        let start = search_from + offset;
        search_from = start + 1;
        let Some(candidate) = balanced_object(&raw[start..]) else {
            continue;
        };
        match serde_json::from_str::<ActionEnvelope>(candidate) {
            Ok(mut envelope) => {
                if envelope.action_type.requires_argument()
                    && envelope.argument.trim().is_empty()
                {
                    first_reason.get_or_insert_with(|| {
                        format!("empty argument for {:?}", envelope.action_type.wire_name())
                    });
                    continue;
                }
                if !envelope.action_type.requires_argument() {
                    envelope.argument.clear();
                }
                return Ok(envelope);
            }
            Err(e) => {
                first_reason.get_or_insert_with(|| e.to_string());
            }
        }
    }
    Err(MalformedAction {
        reason: first_reason.unwrap_or_else(|| "no JSON object found".to_string()),
    })
}

/// The balanced `{...}` slice starting at the first byte of `s`, honoring
/// JSON string escapes; `None` when the object never closes.
fn balanced_object(s: &str) -> Option<&str> {
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, c) in s.char_indices() {
        if in_string {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
            continue;
        }
        match c {
            '"' => in_string = true,
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(&s[..=i]);
                }
            }
            _ => {}
        }
    }
    None
}

/// Who acts next: `start_speaker` on an empty history, otherwise the other
/// participant.
pub fn next_speaker(history: &[Turn], start_speaker: usize) -> usize {
    history.last().map(|t| 1 - t.speaker).unwrap_or(start_speaker)
}

/// Runs one Agents/Mindreaders episode to completion.
///
/// Speakers strictly alternate from `config.start_speaker`; the episode ends
/// immediately after any Leave or when `config.max_turns` is reached, and is
/// `complete = true` in both cases. Every backend call (including retries)
/// is logged in provenance. `on_turn` is invoked after each accepted turn so
/// callers can journal incrementally.
#[allow(clippy::too_many_arguments)]
pub fn run_interactive_episode(
    id: &str,
    task: &SocialTask,
    mode: SimulationMode,
    backends: [&dyn TextBackend; 2],
    policy: &VisibilityPolicy,
    config: &EngineConfig,
    clock: &dyn Clock,
    mut on_turn: impl FnMut(&Turn) -> std::io::Result<()>,
) -> Result<Episode, EngineError> {
    assert_ne!(mode, SimulationMode::Script, "interactive engine cannot run Script mode");
    assert!(config.validate().is_empty(), "invalid engine config: {:?}", config.validate());

    let started_at_ms = clock.now_ms();
    let mut turns: Vec<Turn> = Vec::new();
    let mut calls: Vec<CallRecord> = Vec::new();
    let models =
        vec![backends[0].model_name().to_string(), backends[1].model_name().to_string()];

    let make_episode = |turns: Vec<Turn>, calls: Vec<CallRecord>, complete: bool, now: u64| Episode {
        id: id.to_string(),
        task: task.clone(),
        mode,
        turns,
        provenance: Provenance {
            models: models.clone(),
            temperature: config.temperature,
            started_at_ms,
            finished_at_ms: now,
            raw_output: None,
            script_skipped_lines: Vec::new(),
            calls,
        },
        complete,
    };

    while turns.len() < config.max_turns {
        let speaker = next_speaker(&turns, config.start_speaker);
        let turn_no = turns.len();
        let prompt = build_agent_prompt(task, speaker, mode, &turns, turn_no, policy)
            .expect("engine always passes a consistent turn number and a non-Script mode");
        let prompt_sha256 = prompt.sha256();
        let logged_prompt = config.log_prompts.then(|| prompt.text());
        let request =
            GenerationRequest::new(prompt, config.temperature, DEFAULT_TURN_MAX_TOKENS);

        let mut accepted: Option<ActionEnvelope> = None;
        let mut last_reason = String::new();
        for attempt in 1..=config.malformed_retries + 1 {
            let completion = match backends[speaker].complete(&request) {
                Ok(c) => c,
                Err(e) => {
                    let now = clock.now_ms();
                    return Err(EngineError::EpisodeAborted {
                        turn_index: turn_no,
                        cause: format!("backend: {e}"),
                        partial: Box::new(make_episode(turns, calls, false, now)),
                    });
                }
            };
            calls.push(CallRecord {
                turn_index: Some(turn_no),
                attempt,
                prompt_sha256: prompt_sha256.clone(),
                prompt: logged_prompt.clone(),
                response: completion.text.clone(),
                latency_ms: completion.latency_ms,
                at_ms: clock.now_ms(),
            });
            match parse_action(&completion.text) {
                Ok(envelope) => {
                    accepted = Some(envelope);
                    break;
                }
                Err(e) => last_reason = e.reason,
            }
        }
        let Some(envelope) = accepted else {
            let attempts = config.malformed_retries + 1;
            let now = clock.now_ms();
            return Err(EngineError::EpisodeAborted {
                turn_index: turn_no,
                cause: format!("still malformed after {attempts} attempts: {last_reason}"),
                partial: Box::new(make_episode(turns, calls, false, now)),
            });
        };

        let turn = Turn {
            index: turn_no,
            speaker,
            action: envelope.action_type,
            argument: envelope.argument,
        };
        on_turn(&turn)?;
        let is_leave = turn.action == ActionType::Leave;
        turns.push(turn);
        if is_leave {
            break;
        }
    }

    let now = clock.now_ms();
    Ok(make_episode(turns, calls, true, now))
}
