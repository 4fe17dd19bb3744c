//! Bit-exact prompt rendering for all three simulation modes.
//!
//! Templates here are frozen against the golden fixtures under
//! `fixtures/golden/`; any byte-level change is a breaking change for
//! reproducibility and must be reflected there.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{CharacterProfile, SimulationMode, SocialTask, Turn};
use crate::hash::sha256_hex;

/// Message role for backends that split system/user content.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
}

/// An ordered list of role-tagged prompt segments.
///
/// All builders in this module emit a single user segment; multi-segment
/// prompts exist only for backend configurations that want a role split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptText {
    pub segments: Vec<(Role, String)>,
}

impl PromptText {
    pub fn user(text: String) -> Self {
        PromptText { segments: vec![(Role::User, text)] }
    }

    /// All segment texts concatenated in order.
    pub fn text(&self) -> String {
        self.segments.iter().map(|(_, t)| t.as_str()).collect()
    }

    /// SHA-256 of the concatenated text; the key used by map-mode fixtures.
    pub fn sha256(&self) -> String {
        sha256_hex(self.text().as_bytes())
    }
}

/// How much of each profile a prompt may reveal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileDetail {
    Full,
    NameOnly,
}

/// What the viewer of a prompt is allowed to see.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisibilityPolicy {
    pub show_partner_goal: bool,
    pub show_partner_secret: bool,
    pub show_own_secret: bool,
    pub profile_detail: ProfileDetail,
}

impl VisibilityPolicy {
    /// Agents mode: the partner's goal is hidden, secrets are visible.
    pub fn agents_default() -> Self {
        VisibilityPolicy {
            show_partner_goal: false,
            show_partner_secret: true,
            show_own_secret: true,
            profile_detail: ProfileDetail::Full,
        }
    }

    /// Mindreaders mode: everything visible.
    pub fn mindreaders_default() -> Self {
        VisibilityPolicy {
            show_partner_goal: true,
            show_partner_secret: true,
            show_own_secret: true,
            profile_detail: ProfileDetail::Full,
        }
    }

    /// Default policy for a mode (Script sees everything).
    pub fn for_mode(mode: SimulationMode) -> Self {
        match mode {
            SimulationMode::Agents => Self::agents_default(),
            SimulationMode::Mindreaders | SimulationMode::Script => Self::mindreaders_default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("turn_no {got} does not match history length {expected}")]
    TurnNumberMismatch { expected: usize, got: usize },
    #[error("agent prompts are undefined for Script mode")]
    ScriptMode,
}

/// The JSON schema block quoted verbatim inside every agent prompt. The
/// embedded `\n` is a two-character escape in the prompt text itself.
const ACTION_SCHEMA_JSON: &str = r#"{"description": "An interface for messages.\nThere is only one required method: to_natural_language", "properties": {"action_type": {"title": "Action Type", "description": "whether to speak at this turn or choose to not do anything", "enum": ["none", "speak", "non-verbal communication", "action", "leave"], "type": "string"}, "argument": {"title": "Argument", "description": "the utterance if choose to speak, the expression or gesture if choose non-verbal communication, or the physical action if choose action", "type": "string"}}, "required": ["action_type", "argument"]}"#;

/// Renders one turn in script-line form.
///
/// The output of this function is always parseable back into an equal turn
/// by `script::parse_script_line` (arguments must not contain newlines, and
/// non-Speak arguments must not carry trailing whitespace).
pub fn render_turn_line(turn: &Turn, speaker_name: &str) -> String {
    use crate::domain::ActionType;
    match turn.action {
        ActionType::Speak => format!("{} said: \"{}\"", speaker_name, turn.argument),
        ActionType::Action => format!("{} [action] {}", speaker_name, turn.argument),
        ActionType::NonVerbal => {
            format!("{} [non-verbal communication] {}", speaker_name, turn.argument)
        }
        ActionType::None => format!("{speaker_name} did nothing"),
        ActionType::Leave => format!("{speaker_name} left the conversation"),
    }
}

/// Renders the per-turn prompt for one interactive agent.
///
/// The viewer's own goal is always verbatim; the partner's goal renders as
/// `Unknown` unless `policy.show_partner_goal` is set. `turn_no` must equal
/// `history.len()`.
pub fn build_agent_prompt(
    task: &SocialTask,
    viewer: usize,
    mode: SimulationMode,
    history: &[Turn],
    turn_no: usize,
    policy: &VisibilityPolicy,
) -> Result<PromptText, PromptError> {
    assert!(viewer <= 1, "viewer must be 0 or 1");
    if mode == SimulationMode::Script {
        return Err(PromptError::ScriptMode);
    }
    if turn_no != history.len() {
        return Err(PromptError::TurnNumberMismatch { expected: history.len(), got: turn_no });
    }

    let me = &task.participants[viewer];
    let name = &me.name;
    let mut out = String::new();
    out.push_str(&format!(
        "Imagine you are {name}, your task is to act/speak as {name} would, keeping in mind {name}'s social goal.\n\
         You can find {name}'s goal (or background) in the 'Here is the context of the interaction' field.\n\
         Note that {name}'s goal is only visible to you.\n\
         You should try your best to achieve {name}'s goal in a way that align with their character traits.\n\
         Additionally, maintaining the conversation's naturalness and realism is essential\n\
         (e.g., do not repeat what other people has already said before).\n\
         \n\
         Here is the context of this interaction:\n"
    ));
    out.push_str(&render_context_common(task, viewer, policy));
    out.push_str("Conversation Starts:\n");
    let history_lines: Vec<String> = history
        .iter()
        .map(|t| render_turn_line(t, &task.participants[t.speaker].name))
        .collect();
    out.push_str(&history_lines.join("\n"));
    out.push_str(".\n");
    out.push_str(&format!(
        "You are at Turn #{turn_no}. Your available action types are\n\
         action none non-verbal communication speak leave.\n\
         Note: You can \"leave\" this conversation if 1. you have achieved your social goals, 2. this conversation makes you uncomfortable, 3. you find it uninteresting/you lose your patience, 4. or for other reasons you want to leave.\n\
         \n"
    ));
    out.push_str(
        "Please only generate a JSON string including the action type and the argument.\n\
         Your action should follow the given format:\n\
         The output should be formatted as a JSON instance that conforms to the JSON schema below.\n\
         \n",
    );
    out.push_str(
        r#"As an example, for the schema {"properties": {"foo": {"title": "Foo", "description": "a list of strings", "type": "array", "items": {"type": "string"}}}, "required": ["foo"]}"#,
    );
    out.push('\n');
    out.push_str(
        r#"the object {"foo": ["bar", "baz"]} is a well-formatted instance of the schema. The object {"properties": {"foo": ["bar", "baz"]}} is not well-formatted."#,
    );
    out.push_str("\n\nHere is the output schema:\n```\n");
    out.push_str(ACTION_SCHEMA_JSON);
    out.push_str("\n```");
    Ok(PromptText::user(out))
}

/// Renders the one-shot omniscient Script prompt.
///
/// Both goals and both full backgrounds (secrets included) are always
/// visible to the script writer. `max_turns` fills the turn cap stated in
/// the opening instruction.
pub fn build_script_prompt(task: &SocialTask, max_turns: usize) -> PromptText {
    let omniscient = VisibilityPolicy::mindreaders_default();
    let mut out = String::new();
    out.push_str(&format!(
        "Please write the script between two characters based on their social goals with a maximum of {max_turns} turns.\n\
         Here is the context of this interaction:\n"
    ));
    out.push_str(&render_context_common(task, 0, &omniscient));
    out.push('\n');
    out.push_str(
        "You can use different types of actions in the part, but PLEASE follows the rule STRICTLY. Remember to include the square brackets when doing an action as stated in the instructions.\n\
         1. Use \"did nothing\" if the agent did nothing.\n\
         2. Use \"said: \"{self.argument}\" if the agent want to say, ask or inquire something.\n\
         3. Use \"[non-verbal communication] {self.argument}\" if the agent did non-verbal communication.\n\
         4. Use \"[action] {self.argument}\" if the agent did an action.\n\
         5. Use \"left the conversation\" if the agent left the conversation. And you should stop generation\n\
         \n\
         For example, the following outputs are valid:\n\
         a. Oliver Thompson said: \"What's wrong? You seem upset.\"\n\
         b. Esmeralda Solis [action] moved closer\n\
         c. Oliver Thompson [non-verbal communication] smiled\n\
         e. Esmeralda Solis did nothing\n\
         f. Oliver Thompson left the conversation\n\
         Remember that you are an independent scriptwriter and should finish the script by yourself.\n\
         The output should only contain the script following the format instructions, with no additional comments or text.",
    );
    PromptText::user(out)
}

/// The shared context block: scenario, participants, optional relationship,
/// both backgrounds, both goals. Used by agent and script prompts.
pub(crate) fn render_context_common(
    task: &SocialTask,
    viewer: usize,
    policy: &VisibilityPolicy,
) -> String {
    let p0 = &task.participants[0];
    let p1 = &task.participants[1];
    let secret_visible = |idx: usize| {
        if idx == viewer {
            policy.show_own_secret
        } else {
            policy.show_partner_secret
        }
    };
    let goal_text = |idx: usize| -> &str {
        if idx == viewer || policy.show_partner_goal {
            &task.goals[idx]
        } else {
            "Unknown"
        }
    };

    let mut out = String::new();
    out.push_str(&format!("Scenario: {}\n", task.scenario));
    out.push_str(&format!("Participants: {} and {}\n", p0.name, p1.name));
    if let Some(relationship) = &task.relationship {
        out.push_str(&format!("Relationship: {relationship}\n"));
    }
    out.push_str(&format!(
        "{}'s background: {}\n",
        p0.name,
        render_background(p0, policy.profile_detail, secret_visible(0))
    ));
    out.push_str(&format!(
        "{}'s background: {}\n",
        p1.name,
        render_background(p1, policy.profile_detail, secret_visible(1))
    ));
    out.push_str(&format!("{}'s goal: {}\n", p0.name, goal_text(0)));
    out.push('\n');
    out.push_str(&format!("{}'s goal: {}\n", p1.name, goal_text(1)));
    out
}

/// One-line background blurb for a profile; absent fields drop their
/// segment.
fn render_background(profile: &CharacterProfile, detail: ProfileDetail, show_secret: bool) -> String {
    if detail == ProfileDetail::NameOnly {
        return format!("{} is a person.", profile.name);
    }
    let mut descriptor: Vec<String> = Vec::new();
    if let Some(age) = profile.age {
        descriptor.push(format!("{age}-year-old"));
    }
    if let Some(gender) = &profile.gender {
        descriptor.push(gender.clone());
    }
    if let Some(occupation) = &profile.occupation {
        descriptor.push(occupation.clone());
    }
    let intro = if descriptor.is_empty() {
        format!("{} is a person.", profile.name)
    } else {
        format!("{} is a {}.", profile.name, descriptor.join(" "))
    };

    let mut segments = vec![intro];
    if let Some(pronouns) = &profile.gender_pronouns {
        segments.push(format!("{pronouns} pronouns."));
    }
    if let Some(public_info) = &profile.public_info {
        segments.push(public_info.clone());
    }
    if let Some(personality) = &profile.personality_and_values {
        segments.push(format!("Personality and values description: {personality}"));
    }
    if show_secret {
        if let Some(secret) = &profile.secret {
            segments.push(format!("{}'s secrets: {}", profile.first_name(), secret));
        }
    }
    segments.join(" ")
}

/// Fragments of the partner's goal (sentences and lines of length >= 10)
/// that appear in `rendered` without also being part of what the viewer is
/// legitimately shown (own goal, scenario, both rendered backgrounds).
///
/// Empty result means no leak. Intended for Agents-style policies where the
/// partner goal is hidden.
pub fn partner_goal_leaks(rendered: &str, task: &SocialTask, viewer: usize) -> Vec<String> {
    let partner_goal = &task.goals[1 - viewer];
    let own_policy = VisibilityPolicy::agents_default();
    let mut visible = String::new();
    visible.push_str(&task.scenario);
    visible.push('\n');
    visible.push_str(&task.goals[viewer]);
    visible.push('\n');
    for (idx, profile) in task.participants.iter().enumerate() {
        let show_secret = if idx == viewer {
            own_policy.show_own_secret
        } else {
            own_policy.show_partner_secret
        };
        visible.push_str(&render_background(profile, ProfileDetail::Full, show_secret));
        visible.push('\n');
    }

    let mut leaks = Vec::new();
    for line in partner_goal.lines() {
        for sentence in line.split(". ") {
            let fragment = sentence.trim();
            if fragment.len() < 10 || visible.contains(fragment) {
                continue;
            }
            if rendered.contains(fragment) {
                leaks.push(fragment.to_string());
            }
        }
    }
    leaks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{ActionType, CharacterProfile};
    use std::collections::BTreeSet;

    fn turn(index: usize, speaker: usize, action: ActionType, argument: &str) -> Turn {
        Turn { index, speaker, action, argument: argument.to_string() }
    }

    fn small_task() -> SocialTask {
        SocialTask {
            scenario: "Two colleagues share a taxi.".to_string(),
            participants: [
                CharacterProfile {
                    name: "Ada Smith".to_string(),
                    age: Some(31),
                    gender: Some("female".to_string()),
                    gender_pronouns: Some("She/her".to_string()),
                    occupation: Some("engineer".to_string()),
                    personality_and_values: Some("Ada Smith values precision.".to_string()),
                    public_info: Some("Ada Smith builds bridges.".to_string()),
                    secret: Some("Afraid of heights".to_string()),
                },
                CharacterProfile {
                    name: "Bo Jones".to_string(),
                    age: None,
                    gender: None,
                    gender_pronouns: None,
                    occupation: None,
                    personality_and_values: None,
                    public_info: None,
                    secret: Some("Sold the company car".to_string()),
                },
            ],
            relationship: None,
            goals: [
                "Find out where Bo parked the car.".to_string(),
                "Avoid any talk about the company car.".to_string(),
            ],
            tags: BTreeSet::new(),
            friend_lists: None,
        }
    }

    #[test]
    fn render_turn_line_all_forms() {
        assert_eq!(
            render_turn_line(
                &turn(0, 0, ActionType::Speak, "What's wrong? You seem upset."),
                "Oliver Thompson"
            ),
            "Oliver Thompson said: \"What's wrong? You seem upset.\""
        );
        assert_eq!(
            render_turn_line(&turn(0, 0, ActionType::Action, "moved closer"), "Esmeralda Solis"),
            "Esmeralda Solis [action] moved closer"
        );
        assert_eq!(
            render_turn_line(&turn(0, 0, ActionType::NonVerbal, "smiled"), "Oliver Thompson"),
            "Oliver Thompson [non-verbal communication] smiled"
        );
        assert_eq!(
            render_turn_line(&turn(0, 0, ActionType::None, ""), "Esmeralda Solis"),
            "Esmeralda Solis did nothing"
        );
        assert_eq!(
            render_turn_line(&turn(0, 0, ActionType::Leave, ""), "Oliver Thompson"),
            "Oliver Thompson left the conversation"
        );
    }

    #[test]
    fn agent_prompt_hides_partner_goal_by_default() {
        let task = small_task();
        let policy = VisibilityPolicy::agents_default();
        let text = build_agent_prompt(&task, 0, SimulationMode::Agents, &[], 0, &policy)
            .unwrap()
            .text();
        assert!(text.contains("Ada Smith's goal: Find out where Bo parked the car.\n"));
        assert!(text.contains("Bo Jones's goal: Unknown\n"));
        assert!(!text.contains("Avoid any talk"));
        assert!(partner_goal_leaks(&text, &task, 0).is_empty());
    }

    #[test]
    fn mindreaders_prompt_shows_both_goals_and_differs_only_there() {
        let task = small_task();
        let agents = build_agent_prompt(
            &task,
            0,
            SimulationMode::Agents,
            &[],
            0,
            &VisibilityPolicy::agents_default(),
        )
        .unwrap()
        .text();
        let mindreaders = build_agent_prompt(
            &task,
            0,
            SimulationMode::Mindreaders,
            &[],
            0,
            &VisibilityPolicy::mindreaders_default(),
        )
        .unwrap()
        .text();
        assert!(mindreaders.contains("Bo Jones's goal: Avoid any talk about the company car.\n"));
        let patched = mindreaders.replace(
            "Bo Jones's goal: Avoid any talk about the company car.",
            "Bo Jones's goal: Unknown",
        );
        assert_eq!(patched, agents);
    }

    #[test]
    fn name_only_policy_stubs_backgrounds_but_keeps_goals() {
        let task = small_task();
        let mut policy = VisibilityPolicy::agents_default();
        policy.profile_detail = ProfileDetail::NameOnly;
        let text = build_agent_prompt(&task, 0, SimulationMode::Agents, &[], 0, &policy)
            .unwrap()
            .text();
        assert!(text.contains("Ada Smith's background: Ada Smith is a person.\n"));
        assert!(text.contains("Bo Jones's background: Bo Jones is a person.\n"));
        assert!(text.contains("Ada Smith's goal: Find out where Bo parked the car.\n"));
        assert!(!text.contains("engineer"));
        assert!(!text.contains("Afraid of heights"));
    }

    #[test]
    fn hidden_partner_secret_drops_only_that_segment() {
        let task = small_task();
        let mut policy = VisibilityPolicy::agents_default();
        policy.show_partner_secret = false;
        let text = build_agent_prompt(&task, 0, SimulationMode::Agents, &[], 0, &policy)
            .unwrap()
            .text();
        assert!(!text.contains("Sold the company car"));
        assert!(text.contains("Afraid of heights"));
    }

    #[test]
    fn history_renders_in_script_form_with_turn_banner() {
        let task = small_task();
        let history = vec![
            turn(0, 0, ActionType::Speak, "Morning."),
            turn(1, 1, ActionType::NonVerbal, "nodded"),
        ];
        let text = build_agent_prompt(
            &task,
            0,
            SimulationMode::Agents,
            &history,
            2,
            &VisibilityPolicy::agents_default(),
        )
        .unwrap()
        .text();
        assert!(text.contains(
            "Conversation Starts:\nAda Smith said: \"Morning.\"\nBo Jones [non-verbal communication] nodded.\n"
        ));
        assert!(text.contains("You are at Turn #2. Your available action types are\n"));
    }

    #[test]
    fn empty_history_renders_bare_period() {
        let task = small_task();
        let text = build_agent_prompt(
            &task,
            1,
            SimulationMode::Agents,
            &[],
            0,
            &VisibilityPolicy::agents_default(),
        )
        .unwrap()
        .text();
        assert!(text.contains("Conversation Starts:\n.\nYou are at Turn #0."));
        assert!(text.contains("Imagine you are Bo Jones,"));
        assert!(text.contains("Ada Smith's goal: Unknown\n"));
    }

    #[test]
    fn turn_number_mismatch_rejected() {
        let task = small_task();
        let err = build_agent_prompt(
            &task,
            0,
            SimulationMode::Agents,
            &[],
            3,
            &VisibilityPolicy::agents_default(),
        )
        .unwrap_err();
        assert!(matches!(err, PromptError::TurnNumberMismatch { expected: 0, got: 3 }));
    }

    #[test]
    fn script_mode_rejected_for_agent_prompt() {
        let task = small_task();
        let err = build_agent_prompt(
            &task,
            0,
            SimulationMode::Script,
            &[],
            0,
            &VisibilityPolicy::mindreaders_default(),
        )
        .unwrap_err();
        assert!(matches!(err, PromptError::ScriptMode));
    }

    #[test]
    fn script_prompt_contains_rules_and_both_goals() {
        let task = small_task();
        let text = build_script_prompt(&task, 20).text();
        assert!(text.starts_with(
            "Please write the script between two characters based on their social goals with a maximum of 20 turns.\n"
        ));
        assert!(text.contains("Find out where Bo parked the car."));
        assert!(text.contains("Avoid any talk about the company car."));
        assert!(text.contains("5. Use \"left the conversation\" if the agent left the conversation. And you should stop generation\n"));
        for rule in ["1. Use", "2. Use", "3. Use", "4. Use", "5. Use"] {
            assert_eq!(text.matches(rule).count(), 1, "missing or duplicated {rule}");
        }
        assert!(text.ends_with("with no additional comments or text."));
    }

    #[test]
    fn script_prompt_tracks_max_turns() {
        let task = small_task();
        let text = build_script_prompt(&task, 8).text();
        assert!(text.contains("with a maximum of 8 turns.\n"));
    }

    #[test]
    fn relationship_line_present_only_when_set() {
        let mut task = small_task();
        let without = build_script_prompt(&task, 20).text();
        assert!(!without.contains("Relationship:"));
        task.relationship = Some("long-time coworkers".to_string());
        let with = build_script_prompt(&task, 20).text();
        assert!(with.contains("Participants: Ada Smith and Bo Jones\nRelationship: long-time coworkers\n"));
        let stripped = with.replace("Relationship: long-time coworkers\n", "");
        assert_eq!(stripped, without);
    }

    #[test]
    fn determinism_identical_inputs_identical_bytes() {
        let task = small_task();
        let policy = VisibilityPolicy::agents_default();
        let a = build_agent_prompt(&task, 0, SimulationMode::Agents, &[], 0, &policy).unwrap();
        let b = build_agent_prompt(&task, 0, SimulationMode::Agents, &[], 0, &policy).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.sha256(), b.sha256());
    }

    #[test]
    fn prompt_text_roles_serialize() {
        let p = PromptText::user("hi".to_string());
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"{"segments":[["user","hi"]]}"#);
        let back: PromptText = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }
}
