//! Blinded pairwise annotation: pairs up same-task episodes from two runs,
//! hides which mode produced which side, and keeps the unblinding key in a
//! separate artifact so annotators never see it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analysis::{PairKey, RunCorpus};
use crate::domain::Episode;
use crate::hash::sha256_hex;
use crate::prompt::render_turn_line;

/// What the annotator sees: two transcripts of the same scenario, labeled A
/// and B with no provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlindedPair {
    pub pair_id: String,
    pub scenario: String,
    pub transcript_a: String,
    pub transcript_b: String,
}

fn transcript(episode: &Episode) -> String {
    episode
        .turns
        .iter()
        .map(|t| render_turn_line(t, &episode.task.participants[t.speaker].name))
        .collect::<Vec<_>>()
        .join("\n")
}

fn task_fingerprint(episode: &Episode) -> String {
    sha256_hex(serde_json::to_string(&episode.task).expect("task serializes").as_bytes())
}

/// Pairs complete episodes from two corpora by task identity, in id order
/// within each task, and assigns sides deterministically: the side flip is
/// derived from a hash of (episode ids, seed), so exports are reproducible
/// but not predictable from position.
pub fn export_annotation_pairs(
    a: &RunCorpus,
    b: &RunCorpus,
    seed: u64,
) -> (Vec<BlindedPair>, Vec<PairKey>) {
    let mut by_task_a: BTreeMap<String, Vec<&Episode>> = BTreeMap::new();
    for episode in a.episodes.iter().filter(|e| e.complete && !e.turns.is_empty()) {
        by_task_a.entry(task_fingerprint(episode)).or_default().push(episode);
    }
    let mut by_task_b: BTreeMap<String, Vec<&Episode>> = BTreeMap::new();
    for episode in b.episodes.iter().filter(|e| e.complete && !e.turns.is_empty()) {
        by_task_b.entry(task_fingerprint(episode)).or_default().push(episode);
    }

    let mut pairs = Vec::new();
    let mut keys = Vec::new();
    for (fingerprint, episodes_a) in &by_task_a {
        let Some(episodes_b) = by_task_b.get(fingerprint) else { continue };
        for (ea, eb) in episodes_a.iter().zip(episodes_b.iter()) {
            let digest = sha256_hex(format!("{}|{}|{seed}", ea.id, eb.id).as_bytes());
            let pair_id = digest[..12].to_string();
            let swap = u8::from_str_radix(&digest[12..14], 16).expect("hex digest") % 2 == 1;
            let (first, second, a_mode, b_mode) = if swap {
                (*eb, *ea, b.mode, a.mode)
            } else {
                (*ea, *eb, a.mode, b.mode)
            };
            pairs.push(BlindedPair {
                pair_id: pair_id.clone(),
                scenario: first.task.scenario.clone(),
                transcript_a: transcript(first),
                transcript_b: transcript(second),
            });
            keys.push(PairKey { pair_id, a_mode, b_mode });
        }
    }
    (pairs, keys)
}
