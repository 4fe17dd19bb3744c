//! Shared domain types: characters, tasks, turns, episodes, and judge scores.
//!
//! Everything here is an immutable value after construction and is safe to
//! share across concurrently running episodes. The JSON encoding of each type
//! (field names as written) is the canonical on-disk format.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// One participant in a social task.
///
/// Only `name` is required; the remaining fields feed the rendered background
/// blurb and are omitted from it when absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterProfile {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub age: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gender: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gender_pronouns: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occupation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub personality_and_values: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub public_info: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secret: Option<String>,
}

impl CharacterProfile {
    /// First whitespace-separated token of the name, used in possessive
    /// phrases like `Donovan's secrets:`.
    pub fn first_name(&self) -> &str {
        self.name.split_whitespace().next().unwrap_or(&self.name)
    }
}

/// One friend-list entry parsed from a goal text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FriendEntry {
    pub name: String,
    pub hobby: String,
    pub company: String,
}

/// A dyadic social scenario: two characters, two private goals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocialTask {
    pub scenario: String,
    pub participants: [CharacterProfile; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relationship: Option<String>,
    pub goals: [String; 2],
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub tags: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub friend_lists: Option<[Vec<FriendEntry>; 2]>,
}

impl SocialTask {
    /// Stored friend lists if present, otherwise lists parsed out of the two
    /// goal texts.
    pub fn friend_lists_or_parsed(&self) -> [Vec<FriendEntry>; 2] {
        match &self.friend_lists {
            Some(lists) => lists.clone(),
            None => [
                parse_friend_list(&self.goals[0]),
                parse_friend_list(&self.goals[1]),
            ],
        }
    }
}

/// The action vocabulary agents may use on a turn.
///
/// Wire names are exactly `none`, `speak`, `non-verbal communication`,
/// `action`, `leave`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActionType {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "speak")]
    Speak,
    #[serde(rename = "non-verbal communication")]
    NonVerbal,
    #[serde(rename = "action")]
    Action,
    #[serde(rename = "leave")]
    Leave,
}

impl ActionType {
    pub fn wire_name(&self) -> &'static str {
        match self {
            ActionType::None => "none",
            ActionType::Speak => "speak",
            ActionType::NonVerbal => "non-verbal communication",
            ActionType::Action => "action",
            ActionType::Leave => "leave",
        }
    }

    pub fn from_wire_name(name: &str) -> Option<ActionType> {
        match name {
            "none" => Some(ActionType::None),
            "speak" => Some(ActionType::Speak),
            "non-verbal communication" => Some(ActionType::NonVerbal),
            "action" => Some(ActionType::Action),
            "leave" => Some(ActionType::Leave),
            _ => None,
        }
    }

    /// True for turns whose argument must be non-empty.
    pub fn requires_argument(&self) -> bool {
        matches!(
            self,
            ActionType::Speak | ActionType::NonVerbal | ActionType::Action
        )
    }
}

impl fmt::Display for ActionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.wire_name())
    }
}

/// One action taken by one participant.
///
/// `argument` is empty iff `action` is `None` or `Leave`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub index: usize,
    pub speaker: usize,
    pub action: ActionType,
    pub argument: String,
}

/// The three information-asymmetry regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimulationMode {
    Agents,
    Mindreaders,
    Script,
}

impl SimulationMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SimulationMode::Agents => "agents",
            SimulationMode::Mindreaders => "mindreaders",
            SimulationMode::Script => "script",
        }
    }
}

impl fmt::Display for SimulationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SimulationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "agents" => Ok(SimulationMode::Agents),
            "mindreaders" => Ok(SimulationMode::Mindreaders),
            "script" => Ok(SimulationMode::Script),
            other => Err(format!("unknown simulation mode: {other:?}")),
        }
    }
}

/// A script line the parser could not attribute to a turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedLine {
    pub line_no: usize,
    pub text: String,
    pub reason: String,
}

/// One backend request/response, kept for provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CallRecord {
    /// Turn the call was issued for; absent for whole-script and judge calls.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub turn_index: Option<usize>,
    /// 1-based attempt number (retries increment this).
    pub attempt: u32,
    pub prompt_sha256: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
    pub response: String,
    pub latency_ms: u64,
    pub at_ms: u64,
}

/// How an episode was produced: models, sampling, timing, raw outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// Model names, one per backend involved (two for interactive modes).
    pub models: Vec<String>,
    pub temperature: f64,
    pub started_at_ms: u64,
    pub finished_at_ms: u64,
    /// Raw unparsed model output (Script mode only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_output: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub script_skipped_lines: Vec<SkippedLine>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub calls: Vec<CallRecord>,
}

/// One complete simulated interaction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub id: String,
    pub task: SocialTask,
    pub mode: SimulationMode,
    pub turns: Vec<Turn>,
    pub provenance: Provenance,
    /// True iff the episode ended by a Leave or by reaching the turn limit
    /// without an engine error.
    pub complete: bool,
}

/// The seven judge dimensions.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "UPPERCASE")]
pub enum Dimension {
    Bel,
    Rel,
    Kno,
    Sec,
    Soc,
    Fin,
    Goal,
}

impl Dimension {
    pub const ALL: [Dimension; 7] = [
        Dimension::Bel,
        Dimension::Rel,
        Dimension::Kno,
        Dimension::Sec,
        Dimension::Soc,
        Dimension::Fin,
        Dimension::Goal,
    ];

    pub fn wire_name(&self) -> &'static str {
        match self {
            Dimension::Bel => "BEL",
            Dimension::Rel => "REL",
            Dimension::Kno => "KNO",
            Dimension::Sec => "SEC",
            Dimension::Soc => "SOC",
            Dimension::Fin => "FIN",
            Dimension::Goal => "GOAL",
        }
    }

    pub fn from_wire_name(name: &str) -> Option<Dimension> {
        match name {
            "BEL" => Some(Dimension::Bel),
            "REL" => Some(Dimension::Rel),
            "KNO" => Some(Dimension::Kno),
            "SEC" => Some(Dimension::Sec),
            "SOC" => Some(Dimension::Soc),
            "FIN" => Some(Dimension::Fin),
            "GOAL" => Some(Dimension::Goal),
            _ => None,
        }
    }

    /// Inclusive score bounds for the dimension.
    pub fn range(&self) -> (f64, f64) {
        match self {
            Dimension::Bel => (0.0, 10.0),
            Dimension::Rel => (-5.0, 5.0),
            Dimension::Kno => (0.0, 10.0),
            Dimension::Sec => (-10.0, 0.0),
            Dimension::Soc => (-10.0, 0.0),
            Dimension::Fin => (-5.0, 5.0),
            Dimension::Goal => (0.0, 10.0),
        }
    }

    /// Short human description used in the judge rubric.
    pub fn description(&self) -> &'static str {
        match self {
            Dimension::Bel => "believability of the agent's behaviour in character",
            Dimension::Rel => "change in the relationship between the two agents",
            Dimension::Kno => "new and important knowledge the agent gained",
            Dimension::Sec => "how badly the agent's secret or secret intention was exposed",
            Dimension::Soc => "violations of social norms or rules",
            Dimension::Fin => "material or financial gain or loss for the agent",
            Dimension::Goal => "how well the agent achieved its private social goal",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.wire_name())
    }
}

/// Judge output for one dimension of one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionScore {
    pub reasoning: String,
    pub score: f64,
}

/// Judge output for one agent across dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentScores {
    pub name: String,
    pub dims: BTreeMap<Dimension, DimensionScore>,
}

/// Judge output for both agents of one episode.
///
/// `agents[i]` scores `task.participants[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationScores {
    pub agents: [AgentScores; 2],
}

impl EvaluationScores {
    /// Range-validates every present score; one message per violation.
    pub fn validate(&self) -> Vec<String> {
        let mut violations = Vec::new();
        for agent in &self.agents {
            for (dim, cell) in &agent.dims {
                let (lo, hi) = dim.range();
                if !(cell.score >= lo && cell.score <= hi) {
                    violations.push(format!(
                        "{}.{} = {} outside [{}, {}]",
                        agent.name, dim, cell.score, lo, hi
                    ));
                }
            }
        }
        violations
    }

    /// Scores for one dimension, one sample per agent that has it.
    pub fn dimension_samples(&self, dim: Dimension) -> Vec<f64> {
        self.agents
            .iter()
            .filter_map(|a| a.dims.get(&dim).map(|c| c.score))
            .collect()
    }
}

/// Checks every `SocialTask` invariant; returns one description per
/// violation, empty when the task is well-formed.
pub fn validate_task(task: &SocialTask) -> Vec<String> {
    let mut violations = Vec::new();
    for (i, participant) in task.participants.iter().enumerate() {
        if participant.name.trim().is_empty() {
            violations.push(format!("participants[{i}].name is empty"));
        }
    }
    if task.participants[0].name == task.participants[1].name {
        violations.push("participants.name duplicate".to_string());
    }
    if let Some(lists) = &task.friend_lists {
        for (i, list) in lists.iter().enumerate() {
            for (j, entry) in list.iter().enumerate() {
                if entry.name.trim().is_empty() {
                    violations.push(format!("friend_lists[{i}][{j}].name is empty"));
                }
            }
        }
    }
    if task.tags.contains("mutualfriends") {
        let [a, b] = task.friend_lists_or_parsed();
        if a.is_empty() || b.is_empty() {
            violations.push("friend_lists missing (tag \"mutualfriends\")".to_string());
        } else if mutual_friends(&a, &b).is_empty() {
            violations.push("friend_lists intersection empty".to_string());
        }
    }
    violations
}

/// Extracts friend-list entries from a goal text.
///
/// Matches lines of the form `<Name>: Hobby: <hobby>  Company: <company>`,
/// tolerating variable internal whitespace; the company keeps a trailing
/// period verbatim. Non-matching lines are ignored.
pub fn parse_friend_list(goal_text: &str) -> Vec<FriendEntry> {
    let line_re = friend_line_regex();
    goal_text
        .lines()
        .filter_map(|line| {
            line_re.captures(line).map(|caps| FriendEntry {
                name: caps["name"].to_string(),
                hobby: caps["hobby"].to_string(),
                company: caps["company"].to_string(),
            })
        })
        .collect()
}

fn friend_line_regex() -> &'static regex::Regex {
    use std::sync::OnceLock;
    static RE: OnceLock<regex::Regex> = OnceLock::new();
    RE.get_or_init(|| {
        regex::Regex::new(r"^\s*(?P<name>[^:]+?)\s*:\s*Hobby:\s*(?P<hobby>.*?)\s+Company:\s*(?P<company>.*?)\s*$")
            .expect("friend-list regex is valid")
    })
}

/// Names present in both lists (case-sensitive exact match), sorted.
pub fn mutual_friends(list_a: &[FriendEntry], list_b: &[FriendEntry]) -> Vec<String> {
    let names_a: BTreeSet<&str> = list_a.iter().map(|e| e.name.as_str()).collect();
    let names_b: BTreeSet<&str> = list_b.iter().map(|e| e.name.as_str()).collect();
    names_a
        .intersection(&names_b)
        .map(|n| n.to_string())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(name: &str) -> CharacterProfile {
        CharacterProfile {
            name: name.to_string(),
            age: None,
            gender: None,
            gender_pronouns: None,
            occupation: None,
            personality_and_values: None,
            public_info: None,
            secret: None,
        }
    }

    fn entry(name: &str) -> FriendEntry {
        FriendEntry {
            name: name.to_string(),
            hobby: "Surfing".to_string(),
            company: "BP".to_string(),
        }
    }

    fn basic_task() -> SocialTask {
        SocialTask {
            scenario: "Two strangers meet.".to_string(),
            participants: [profile("Ada Smith"), profile("Bo Jones")],
            relationship: None,
            goals: ["goal a".to_string(), "goal b".to_string()],
            tags: BTreeSet::new(),
            friend_lists: None,
        }
    }

    #[test]
    fn well_formed_task_has_no_violations() {
        assert!(validate_task(&basic_task()).is_empty());
    }

    #[test]
    fn duplicate_names_reported() {
        let mut task = basic_task();
        task.participants[1].name = task.participants[0].name.clone();
        let violations = validate_task(&task);
        assert!(violations.iter().any(|v| v.contains("duplicate")), "{violations:?}");
    }

    #[test]
    fn empty_name_reported() {
        let mut task = basic_task();
        task.participants[0].name = "  ".to_string();
        let violations = validate_task(&task);
        assert!(violations.iter().any(|v| v.contains("participants[0].name")));
    }

    #[test]
    fn mutualfriends_tag_requires_lists() {
        let mut task = basic_task();
        task.tags.insert("mutualfriends".to_string());
        let violations = validate_task(&task);
        assert!(violations.iter().any(|v| v.contains("friend_lists missing")));
    }

    #[test]
    fn mutualfriends_tag_requires_nonempty_intersection() {
        let mut task = basic_task();
        task.tags.insert("mutualfriends".to_string());
        task.friend_lists = Some([vec![entry("A"), entry("B")], vec![entry("C")]]);
        let violations = validate_task(&task);
        assert_eq!(violations, vec!["friend_lists intersection empty".to_string()]);

        task.friend_lists = Some([vec![entry("A"), entry("B")], vec![entry("B")]]);
        assert!(validate_task(&task).is_empty());
    }

    #[test]
    fn parse_friend_list_single_line() {
        let entries =
            parse_friend_list("Chris: Hobby: Mountain biking  Company: Henry Schein, Inc.");
        assert_eq!(
            entries,
            vec![FriendEntry {
                name: "Chris".to_string(),
                hobby: "Mountain biking".to_string(),
                company: "Henry Schein, Inc.".to_string(),
            }]
        );
    }

    #[test]
    fn parse_friend_list_empty_input() {
        assert!(parse_friend_list("").is_empty());
    }

    #[test]
    fn parse_friend_list_full_goal_text() {
        let goal = "You are trying to figure out whether you have a mutual friend with the other person. You should not simply list their names.\nYou know the following friends: \nChris: Hobby: Mountain biking  Company: Henry Schein, Inc.  \nChester: Hobby: Surfing  Company: Maxim Integrated  \nWendell: Hobby: Surfing  Company: Maxim Integrated  \nDemetrius: Hobby: Mountain biking  Company: Maxim Integrated  \nJacob: Hobby: Shooting sport  Company: Maxim Integrated  \n";
        let entries = parse_friend_list(goal);
        assert_eq!(entries.len(), 5);
        assert_eq!(
            entries[4],
            FriendEntry {
                name: "Jacob".to_string(),
                hobby: "Shooting sport".to_string(),
                company: "Maxim Integrated".to_string(),
            }
        );
        assert_eq!(entries[0].company, "Henry Schein, Inc.");
    }

    #[test]
    fn parse_friend_list_ignores_prose_lines() {
        let entries = parse_friend_list("no structure here\nAlso not a friend line");
        assert!(entries.is_empty());
    }

    #[test]
    fn mutual_friends_sorted_intersection() {
        let a = vec![entry("Chris"), entry("Jacob"), entry("Wendell")];
        let b = vec![entry("Jacob"), entry("Murray"), entry("Chris")];
        assert_eq!(mutual_friends(&a, &b), vec!["Chris".to_string(), "Jacob".to_string()]);
        assert_eq!(mutual_friends(&a, &b), mutual_friends(&b, &a));
    }

    #[test]
    fn mutual_friends_disjoint_and_identical() {
        let a = vec![entry("A"), entry("B")];
        let c = vec![entry("C")];
        assert!(mutual_friends(&a, &c).is_empty());
        assert_eq!(mutual_friends(&a, &a), vec!["A".to_string(), "B".to_string()]);
    }

    #[test]
    fn action_type_wire_names_round_trip() {
        for action in [
            ActionType::None,
            ActionType::Speak,
            ActionType::NonVerbal,
            ActionType::Action,
            ActionType::Leave,
        ] {
            assert_eq!(ActionType::from_wire_name(action.wire_name()), Some(action));
        }
        assert_eq!(ActionType::NonVerbal.wire_name(), "non-verbal communication");
        assert_eq!(ActionType::from_wire_name("dance"), None);
    }

    #[test]
    fn task_serialization_round_trips() {
        let mut task = basic_task();
        task.tags.insert("mutualfriends".to_string());
        task.friend_lists = Some([vec![entry("A")], vec![entry("A")]]);
        task.relationship = Some("old friends".to_string());
        let json = serde_json::to_string(&task).unwrap();
        let back: SocialTask = serde_json::from_str(&json).unwrap();
        assert_eq!(back, task);
    }

    #[test]
    fn scores_serialization_round_trips_with_dimension_keys() {
        let mut dims = BTreeMap::new();
        dims.insert(
            Dimension::Goal,
            DimensionScore { reasoning: "did well".to_string(), score: 8.0 },
        );
        dims.insert(
            Dimension::Sec,
            DimensionScore { reasoning: "kept secret".to_string(), score: 0.0 },
        );
        let scores = EvaluationScores {
            agents: [
                AgentScores { name: "Ada Smith".to_string(), dims: dims.clone() },
                AgentScores { name: "Bo Jones".to_string(), dims },
            ],
        };
        let json = serde_json::to_string(&scores).unwrap();
        assert!(json.contains("\"GOAL\""));
        let back: EvaluationScores = serde_json::from_str(&json).unwrap();
        assert_eq!(back, scores);
    }

    #[test]
    fn score_range_validation() {
        let mut dims = BTreeMap::new();
        dims.insert(
            Dimension::Goal,
            DimensionScore { reasoning: String::new(), score: 14.0 },
        );
        let scores = EvaluationScores {
            agents: [
                AgentScores { name: "Ada Smith".to_string(), dims },
                AgentScores { name: "Bo Jones".to_string(), dims: BTreeMap::new() },
            ],
        };
        let violations = scores.validate();
        assert_eq!(violations.len(), 1);
        assert!(violations[0].contains("GOAL"));

        for dim in Dimension::ALL {
            let (lo, hi) = dim.range();
            assert!(lo < hi);
        }
    }

    #[test]
    fn episode_serialization_round_trips() {
        let episode = Episode {
            id: "000-deadbeef-00".to_string(),
            task: basic_task(),
            mode: SimulationMode::Agents,
            turns: vec![
                Turn {
                    index: 0,
                    speaker: 0,
                    action: ActionType::Speak,
                    argument: "hi".to_string(),
                },
                Turn { index: 1, speaker: 1, action: ActionType::Leave, argument: String::new() },
            ],
            provenance: Provenance {
                models: vec!["fixture".to_string(), "fixture".to_string()],
                temperature: 0.7,
                started_at_ms: 0,
                finished_at_ms: 0,
                raw_output: None,
                script_skipped_lines: Vec::new(),
                calls: vec![CallRecord {
                    turn_index: Some(0),
                    attempt: 1,
                    prompt_sha256: "ab".to_string(),
                    prompt: None,
                    response: "{}".to_string(),
                    latency_ms: 0,
                    at_ms: 0,
                }],
            },
            complete: true,
        };
        let json = serde_json::to_string(&episode).unwrap();
        let back: Episode = serde_json::from_str(&json).unwrap();
        assert_eq!(back, episode);
        assert!(json.contains("\"mode\":\"agents\""));
    }
}
