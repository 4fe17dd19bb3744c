//! Supervised-finetune export: converts Script-mode episodes into
//! (instruction, context, goal, history) → response records and writes
//! provider-ready chat-format JSONL with a reconciling manifest.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Episode, SimulationMode, SocialTask};
use crate::judge::ScoreRecord;
use crate::prompt::{build_agent_prompt, render_turn_line, VisibilityPolicy};

pub const FORMAT_VERSION: &str = "chat-jsonl/1";

/// One supervised example: everything the acting agent saw, plus the turn it
/// produced re-encoded as the interactive wire format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinetuneRecord {
    pub episode_id: String,
    pub turn_index: usize,
    pub speaker: usize,
    /// i: the perspective/speaker instruction.
    pub instruction: String,
    /// c: scenario + participants block.
    pub context: String,
    /// g: the acting agent's goal, verbatim.
    pub goal: String,
    /// h: prior turns rendered one per line; empty for the first turn.
    pub history: String,
    /// r: the target turn as an action-envelope JSON string.
    pub response: String,
    /// The full training input, byte-identical to the live interactive
    /// prompt for the same (task, history, turn) inputs.
    pub user_content: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedEpisode {
    pub episode_id: String,
    pub reason: String,
}

/// Written beside every export; `kept + dropped.len()` equals the number of
/// input episodes and `record_count` equals the kept episodes' turn total.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportManifest {
    pub format_version: String,
    pub output_path: String,
    pub source_episode_ids: Vec<String>,
    pub kept: usize,
    pub dropped: Vec<DroppedEpisode>,
    pub record_count: usize,
    /// "both", "0", or "1".
    pub speakers: String,
    pub recommended_epochs: u32,
}

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("episode {id} is not a Script-mode episode")]
    NotScriptMode { id: String },
    #[error("episode {id} is incomplete")]
    Incomplete { id: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One record per turn of a complete Script-mode episode.
///
/// The acting agent for turn k is `turns[k].speaker`; history is turns
/// 0..k−1; the response is the turn re-encoded as the Agents-mode JSON
/// action so the finetuned model speaks the interactive wire format.
pub fn episode_to_records(
    episode: &Episode,
    task: &SocialTask,
) -> Result<Vec<FinetuneRecord>, ExportError> {
    if episode.mode != SimulationMode::Script {
        return Err(ExportError::NotScriptMode { id: episode.id.clone() });
    }
    if !episode.complete {
        return Err(ExportError::Incomplete { id: episode.id.clone() });
    }
    let policy = VisibilityPolicy::agents_default();
    let mut records = Vec::with_capacity(episode.turns.len());
    for (k, turn) in episode.turns.iter().enumerate() {
        let name = &task.participants[turn.speaker].name;
        let instruction = format!(
            "Imagine you are {name}, your task is to act/speak as {name} would, \
             keeping in mind {name}'s social goal."
        );
        let context = format!(
            "Scenario: {}\nParticipants: {} and {}",
            task.scenario, task.participants[0].name, task.participants[1].name
        );
        let history = episode.turns[..k]
            .iter()
            .map(|t| render_turn_line(t, &task.participants[t.speaker].name))
            .collect::<Vec<_>>()
            .join("\n");
        let argument = if turn.action.requires_argument() { turn.argument.as_str() } else { "" };
        let response = format!(
            r#"{{"action_type": {}, "argument": {}}}"#,
            serde_json::to_string(turn.action.wire_name()).expect("string serializes"),
            serde_json::to_string(argument).expect("string serializes"),
        );
        let user_content = build_agent_prompt(
            task,
            turn.speaker,
            SimulationMode::Agents,
            &episode.turns[..k],
            k,
            &policy,
        )
        .expect("history slice length always equals the turn number")
        .text();
        records.push(FinetuneRecord {
            episode_id: episode.id.clone(),
            turn_index: k,
            speaker: turn.speaker,
            instruction,
            context,
            goal: task.goals[turn.speaker].clone(),
            history,
            response,
            user_content,
        });
    }
    Ok(records)
}

/// Splits episodes into exportable and dropped-with-reason: an episode is
/// kept only when complete and covered by a successful evaluation record.
pub fn filter_episodes<'a>(
    episodes: &'a [Episode],
    evaluations: &[ScoreRecord],
) -> (Vec<&'a Episode>, Vec<DroppedEpisode>) {
    let scored: BTreeSet<&str> = evaluations.iter().map(|r| r.episode_id.as_str()).collect();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for episode in episodes {
        if !episode.complete {
            dropped.push(DroppedEpisode {
                episode_id: episode.id.clone(),
                reason: "incomplete".to_string(),
            });
        } else if !scored.contains(episode.id.as_str()) {
            dropped.push(DroppedEpisode {
                episode_id: episode.id.clone(),
                reason: "no rewards".to_string(),
            });
        } else {
            kept.push(episode);
        }
    }
    (kept, dropped)
}

/// Keeps only records whose acting agent matches `speaker`; `None` keeps
/// both speakers.
pub fn restrict_speakers(records: Vec<FinetuneRecord>, speaker: Option<usize>) -> Vec<FinetuneRecord> {
    match speaker {
        None => records,
        Some(s) => records.into_iter().filter(|r| r.speaker == s).collect(),
    }
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatLine<'a> {
    messages: [ChatMessage<'a>; 2],
}

/// Writes records as chat-format JSONL in deterministic (episode id, turn
/// index) order and returns the manifest describing the file.
pub fn write_chat_jsonl(
    records: &[FinetuneRecord],
    path: &Path,
) -> Result<ExportManifest, ExportError> {
    let mut ordered: Vec<&FinetuneRecord> = records.iter().collect();
    ordered.sort_by(|a, b| {
        a.episode_id.cmp(&b.episode_id).then(a.turn_index.cmp(&b.turn_index))
    });
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    for record in &ordered {
        let line = ChatLine {
            messages: [
                ChatMessage { role: "user", content: &record.user_content },
                ChatMessage { role: "assistant", content: &record.response },
            ],
        };
        serde_json::to_writer(&mut file, &line).map_err(std::io::Error::other)?;
        file.write_all(b"\n")?;
    }
    file.flush()?;

    let ids: BTreeSet<&str> = ordered.iter().map(|r| r.episode_id.as_str()).collect();
    let speakers: BTreeSet<usize> = ordered.iter().map(|r| r.speaker).collect();
    let speakers = match (speakers.contains(&0), speakers.contains(&1)) {
        (true, true) => "both".to_string(),
        (true, false) => "0".to_string(),
        (false, true) => "1".to_string(),
        (false, false) => "both".to_string(),
    };
    Ok(ExportManifest {
        format_version: FORMAT_VERSION.to_string(),
        output_path: path.display().to_string(),
        source_episode_ids: ids.into_iter().map(str::to_string).collect(),
        kept: 0,
        dropped: Vec::new(),
        record_count: ordered.len(),
        speakers,
        recommended_epochs: 1,
    })
}
