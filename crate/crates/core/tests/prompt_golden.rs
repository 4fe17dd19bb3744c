//! Byte-exact golden checks for the three prompt flavors, plus the
//! visibility leak suite over every bundled task.

use std::fs;
use std::path::PathBuf;

use dyadsim_core::domain::{SimulationMode, SocialTask};
use dyadsim_core::prompt::{
    build_agent_prompt, build_script_prompt, partner_goal_leaks, ProfileDetail, VisibilityPolicy,
};

fn fixture_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

fn bundled_tasks() -> Vec<SocialTask> {
    let raw = fs::read_to_string(fixture_path("tasks/bundled_tasks.json")).unwrap();
    serde_json::from_str(&raw).unwrap()
}

fn golden(name: &str) -> String {
    fs::read_to_string(fixture_path(&format!("golden/{name}"))).unwrap()
}

fn party_task() -> SocialTask {
    bundled_tasks().into_iter().next().unwrap()
}

#[test]
fn agents_turn0_prompt_matches_golden_bytes() {
    let task = party_task();
    let text = build_agent_prompt(
        &task,
        0,
        SimulationMode::Agents,
        &[],
        0,
        &VisibilityPolicy::agents_default(),
    )
    .unwrap()
    .text();
    assert_eq!(text, golden("agents_prompt_turn0.txt"));
}

#[test]
fn mindreaders_turn0_prompt_matches_golden_bytes() {
    let task = party_task();
    let text = build_agent_prompt(
        &task,
        0,
        SimulationMode::Mindreaders,
        &[],
        0,
        &VisibilityPolicy::mindreaders_default(),
    )
    .unwrap()
    .text();
    assert_eq!(text, golden("mindreaders_prompt_turn0.txt"));
}

#[test]
fn script_prompt_matches_golden_bytes() {
    let task = party_task();
    assert_eq!(build_script_prompt(&task, 20).text(), golden("script_prompt.txt"));
}

#[test]
fn goldens_differ_exactly_in_the_partner_goal_block() {
    let task = party_task();
    let agents = golden("agents_prompt_turn0.txt");
    let mindreaders = golden("mindreaders_prompt_turn0.txt");
    assert!(agents.contains("Benjamin Jackson's goal: Unknown"));
    assert!(!mindreaders.contains("Unknown"));
    let patched = agents.replace(
        "Benjamin Jackson's goal: Unknown",
        &format!("Benjamin Jackson's goal: {}", task.goals[1]),
    );
    assert_eq!(patched, mindreaders);
}

#[test]
fn agents_prompts_leak_nothing_across_all_bundled_tasks() {
    for (i, task) in bundled_tasks().iter().enumerate() {
        for viewer in 0..2 {
            let text = build_agent_prompt(
                task,
                viewer,
                SimulationMode::Agents,
                &[],
                0,
                &VisibilityPolicy::agents_default(),
            )
            .unwrap()
            .text();
            let leaks = partner_goal_leaks(&text, task, viewer);
            assert!(leaks.is_empty(), "task {i} viewer {viewer} leaked: {leaks:?}");
            let partner = &task.participants[1 - viewer].name;
            assert!(text.contains(&format!("{partner}'s goal: Unknown")));
        }
    }
}

#[test]
fn mindreaders_prompts_show_both_goals_across_all_bundled_tasks() {
    for (i, task) in bundled_tasks().iter().enumerate() {
        for viewer in 0..2 {
            let text = build_agent_prompt(
                task,
                viewer,
                SimulationMode::Mindreaders,
                &[],
                0,
                &VisibilityPolicy::mindreaders_default(),
            )
            .unwrap()
            .text();
            for goal in &task.goals {
                assert!(text.contains(goal.as_str()), "task {i} viewer {viewer} misses a goal");
            }
        }
    }
}

#[test]
fn script_prompts_show_both_goals_across_all_bundled_tasks() {
    for task in &bundled_tasks() {
        let text = build_script_prompt(task, 20).text();
        for goal in &task.goals {
            assert!(text.contains(goal.as_str()));
        }
    }
}

#[test]
fn name_only_detail_drops_profile_facts() {
    let task = party_task();
    let mut policy = VisibilityPolicy::agents_default();
    policy.profile_detail = ProfileDetail::NameOnly;
    let text = build_agent_prompt(&task, 0, SimulationMode::Agents, &[], 0, &policy)
        .unwrap()
        .text();
    assert!(text.contains("Donovan Reeves's background: Donovan Reeves is a person."));
    assert!(text.contains("Benjamin Jackson's background: Benjamin Jackson is a person."));
    assert!(!text.contains("software developer"));
    assert!(!text.contains("environmental activist"));
    assert!(!text.contains("secrets:"));
}

#[test]
fn hiding_partner_secret_keeps_own_secret() {
    let task = party_task();
    let mut policy = VisibilityPolicy::agents_default();
    policy.show_partner_secret = false;
    let text = build_agent_prompt(&task, 0, SimulationMode::Agents, &[], 0, &policy)
        .unwrap()
        .text();
    assert!(text.contains("Donovan's secrets: Secretly releasing"));
    assert!(!text.contains("Benjamin's secrets:"));
}
