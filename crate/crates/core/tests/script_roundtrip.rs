//! Property tests for the script grammar: any episode rendered through
//! `render_turn_line` parses back into exactly the same turns.

use dyadsim_core::domain::{ActionType, Turn};
use dyadsim_core::prompt::render_turn_line;
use dyadsim_core::script::{parse_script, parse_script_strict};
use proptest::prelude::*;

const NAMES: [&str; 2] = ["Oliver Thompson", "Esmeralda Solis"];

fn speak_argument() -> impl Strategy<Value = String> {
    // Anything except quotes and newlines; inner and edge whitespace survive
    // the quoted form.
    proptest::string::string_regex("[a-zA-Z0-9 ,.!?'()-]{1,60}").unwrap()
}

fn bare_argument() -> impl Strategy<Value = String> {
    // Unquoted forms are trimmed by the parser, so the generated argument
    // must carry no edge whitespace.
    proptest::string::string_regex("[a-zA-Z0-9,.!?'()-][a-zA-Z0-9 ,.!?'()-]{0,58}[a-zA-Z0-9,.!?'()-]|[a-zA-Z0-9,.!?'()-]")
        .unwrap()
}

fn body_turn() -> impl Strategy<Value = (usize, ActionType, String)> {
    prop_oneof![
        (0..2usize, Just(ActionType::Speak), speak_argument()),
        (0..2usize, Just(ActionType::Action), bare_argument()),
        (0..2usize, Just(ActionType::NonVerbal), bare_argument()),
        (0..2usize, Just(ActionType::None), Just(String::new())),
    ]
}

fn episode_turns() -> impl Strategy<Value = Vec<Turn>> {
    (proptest::collection::vec(body_turn(), 1..30), 0..2usize, any::<bool>()).prop_map(
        |(body, last_speaker, ends_with_leave)| {
            let mut turns: Vec<Turn> = body
                .into_iter()
                .enumerate()
                .map(|(index, (speaker, action, argument))| Turn { index, speaker, action, argument })
                .collect();
            if ends_with_leave {
                turns.push(Turn {
                    index: turns.len(),
                    speaker: last_speaker,
                    action: ActionType::Leave,
                    argument: String::new(),
                });
            }
            turns
        },
    )
}

fn render(turns: &[Turn]) -> String {
    turns
        .iter()
        .map(|t| render_turn_line(t, NAMES[t.speaker]))
        .collect::<Vec<_>>()
        .join("\n")
}

proptest! {
    #[test]
    fn render_then_parse_is_identity(turns in episode_turns()) {
        let text = render(&turns);
        let report = parse_script(&text, NAMES);
        prop_assert_eq!(&report.turns, &turns);
        prop_assert!(report.skipped_lines.is_empty(), "skipped: {:?}", report.skipped_lines);
        prop_assert!(!report.truncated_at_leave);
    }

    #[test]
    fn strict_parse_accepts_every_rendered_episode(turns in episode_turns()) {
        let text = render(&turns);
        let report = parse_script_strict(&text, NAMES).unwrap();
        prop_assert_eq!(report.turns, turns);
    }

    #[test]
    fn trailing_lines_after_leave_are_dropped(turns in episode_turns()) {
        let mut with_leave = turns.clone();
        if with_leave.last().map(|t| t.action) != Some(ActionType::Leave) {
            with_leave.push(Turn {
                index: with_leave.len(),
                speaker: 0,
                action: ActionType::Leave,
                argument: String::new(),
            });
        }
        let text = format!("{}\n{} said: \"But wait!\"", render(&with_leave), NAMES[1]);
        let report = parse_script(&text, NAMES);
        prop_assert_eq!(report.turns, with_leave);
        prop_assert!(report.truncated_at_leave);
    }
}
