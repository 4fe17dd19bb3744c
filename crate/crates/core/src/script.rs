//! Script-line grammar: parsing raw one-shot scripts into structured turns,
//! plus the Script-mode episode runner.
//!
//! The grammar is the inverse of `prompt::render_turn_line`. Name matching is
//! exact full-name prefix (longest match wins); smart quotes are normalized
//! to ASCII before matching; unrecognized lines are skipped and logged.

use thiserror::Error;

use crate::backend::TextBackend;
use crate::domain::{
    ActionType, Episode, Provenance, SimulationMode, SkippedLine, SocialTask, Turn,
};
use crate::engine::EngineConfig;
use crate::prompt::build_script_prompt;

/// Result of one parsed line: either a turn fragment or a skip.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LineParse {
    Turn { speaker: usize, action: ActionType, argument: String },
    Skip(String),
}

/// Everything `parse_script` learned from a raw script.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptParseReport {
    pub turns: Vec<Turn>,
    /// `(line_no, text, reason)` per skipped non-empty line; line numbers are
    /// 1-based over the raw input.
    pub skipped_lines: Vec<SkippedLine>,
    /// True when non-empty lines followed the first Leave.
    pub truncated_at_leave: bool,
}

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("script produced zero parseable turns")]
    EmptyScript { raw: String },
    #[error("script has unparseable lines: {0:?}")]
    SkippedLines(Vec<SkippedLine>),
    #[error("backend: {0}")]
    Backend(#[from] crate::backend::BackendError),
}

fn normalize_quotes(line: &str) -> String {
    line.chars()
        .map(|c| match c {
            '\u{201c}' | '\u{201d}' => '"',
            '\u{2018}' | '\u{2019}' => '\'',
            other => other,
        })
        .collect()
}

/// Parses a single script line against the two participant names.
///
/// Recognized forms after the speaker's full name:
/// `said: "<arg>"`, `[action] <arg>`, `[non-verbal communication] <arg>`,
/// `did nothing`, `left the conversation`. Speak arguments span from the
/// first quote to the last quote on the line; other arguments are trimmed of
/// trailing whitespace.
pub fn parse_script_line(line: &str, names: [&str; 2]) -> LineParse {
    debug_assert_ne!(names[0], names[1], "participant names must differ");
    let line = normalize_quotes(line);
    let trimmed = line.trim_start();

    let mut speaker: Option<usize> = None;
    let mut matched_len = 0;
    for (idx, name) in names.iter().enumerate() {
        if trimmed.starts_with(name) && name.len() > matched_len {
            speaker = Some(idx);
            matched_len = name.len();
        }
    }
    let Some(speaker) = speaker else {
        return LineParse::Skip("unknown speaker".to_string());
    };
    let rest = trimmed[matched_len..].trim_start();

    if let Some(after) = rest.strip_prefix("said:") {
        let after = after.trim_start();
        let Some(open) = after.find('"') else {
            return LineParse::Skip("unrecognized form".to_string());
        };
        let close = after.rfind('"').expect("find succeeded, rfind must too");
        let argument = if close > open {
            after[open + 1..close].to_string()
        } else {
            after[open + 1..].trim_end().to_string()
        };
        if argument.is_empty() {
            return LineParse::Skip("empty utterance".to_string());
        }
        return LineParse::Turn { speaker, action: ActionType::Speak, argument };
    }
    if let Some(after) = rest.strip_prefix("[action]") {
        let argument = after.trim().to_string();
        if argument.is_empty() {
            return LineParse::Skip("empty action".to_string());
        }
        return LineParse::Turn { speaker, action: ActionType::Action, argument };
    }
    if let Some(after) = rest.strip_prefix("[non-verbal communication]") {
        let argument = after.trim().to_string();
        if argument.is_empty() {
            return LineParse::Skip("empty non-verbal communication".to_string());
        }
        return LineParse::Turn { speaker, action: ActionType::NonVerbal, argument };
    }
    if rest.trim_end() == "did nothing" {
        return LineParse::Turn { speaker, action: ActionType::None, argument: String::new() };
    }
    if rest.trim_end() == "left the conversation" {
        return LineParse::Turn { speaker, action: ActionType::Leave, argument: String::new() };
    }
    LineParse::Skip("unrecognized form".to_string())
}

/// Parses a whole raw script, stopping at the first Leave.
///
/// Speaker alternation is not enforced; scripts that repeat a speaker are
/// recorded as-is. Blank lines are ignored silently; other unparseable lines
/// land in `skipped_lines`.
pub fn parse_script(text: &str, names: [&str; 2]) -> ScriptParseReport {
    let mut turns: Vec<Turn> = Vec::new();
    let mut skipped_lines = Vec::new();
    let mut truncated_at_leave = false;
    let mut saw_leave = false;

    for (i, raw_line) in text.lines().enumerate() {
        if raw_line.trim().is_empty() {
            continue;
        }
        if saw_leave {
            truncated_at_leave = true;
            break;
        }
        match parse_script_line(raw_line, names) {
            LineParse::Turn { speaker, action, argument } => {
                if action == ActionType::Leave {
                    saw_leave = true;
                }
                turns.push(Turn { index: turns.len(), speaker, action, argument });
            }
            LineParse::Skip(reason) => skipped_lines.push(SkippedLine {
                line_no: i + 1,
                text: raw_line.to_string(),
                reason,
            }),
        }
    }
    ScriptParseReport { turns, skipped_lines, truncated_at_leave }
}

/// Strict variant used in tests: any skipped line is an error.
pub fn parse_script_strict(text: &str, names: [&str; 2]) -> Result<ScriptParseReport, ScriptError> {
    let report = parse_script(text, names);
    if report.skipped_lines.is_empty() {
        Ok(report)
    } else {
        Err(ScriptError::SkippedLines(report.skipped_lines))
    }
}

/// Runs one Script-mode episode: a single omniscient backend call, parsed
/// leniently, truncated to `config.max_turns`.
pub fn run_script_episode(
    id: &str,
    task: &SocialTask,
    backend: &dyn TextBackend,
    config: &EngineConfig,
    clock: &dyn crate::backend::Clock,
) -> Result<Episode, ScriptError> {
    let prompt = build_script_prompt(task, config.max_turns);
    let request = crate::backend::GenerationRequest {
        segments: prompt.clone(),
        temperature: config.temperature,
        max_output_tokens: crate::backend::DEFAULT_BULK_MAX_TOKENS,
        stop_sequences: Vec::new(),
    };
    let started_at_ms = clock.now_ms();
    let completion = backend.complete(&request)?;
    let names = [task.participants[0].name.as_str(), task.participants[1].name.as_str()];
    let mut report = parse_script(&completion.text, names);
    report.turns.truncate(config.max_turns);
    if report.turns.is_empty() {
        return Err(ScriptError::EmptyScript { raw: completion.text });
    }
    let finished_at_ms = clock.now_ms();
    let calls = vec![crate::domain::CallRecord {
        turn_index: None,
        attempt: 1,
        prompt_sha256: prompt.sha256(),
        prompt: if config.log_prompts { Some(prompt.text()) } else { None },
        response: completion.text.clone(),
        latency_ms: completion.latency_ms,
        at_ms: started_at_ms,
    }];
    Ok(Episode {
        id: id.to_string(),
        task: task.clone(),
        mode: SimulationMode::Script,
        turns: report.turns,
        provenance: Provenance {
            models: vec![backend.model_name().to_string()],
            temperature: config.temperature,
            started_at_ms,
            finished_at_ms,
            raw_output: Some(completion.text),
            script_skipped_lines: report.skipped_lines,
            calls,
        },
        complete: true,
    })
}
