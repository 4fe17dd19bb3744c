//! Corpus comparison metrics: verbosity, first-mention position, deal rate,
//! naturalness win rate, and pairwise Welch significance tests rendered as
//! markdown + JSON reports.

use std::collections::BTreeMap;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{ActionType, Dimension, Episode, SimulationMode};
use crate::judge::{DealJudgment, DealRecord, ScoreRecord};
use crate::stats::{mean, one_sample_t_test, sample_std, welch_t_test, StatsError, TTestResult};

/// Stars in reports mean p below this threshold.
pub const SIGNIFICANCE_THRESHOLD: f64 = 0.001;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("episode {episode_id} has no counted turns")]
    NoCountedTurns { episode_id: String },
    #[error("choice references pair {pair_id:?} absent from the labeling")]
    UnknownPair { pair_id: String },
    #[error(transparent)]
    Stats(#[from] StatsError),
}

fn counted(action: ActionType, speak_only: bool) -> bool {
    match action {
        ActionType::Speak => true,
        ActionType::NonVerbal | ActionType::Action => !speak_only,
        ActionType::None | ActionType::Leave => false,
    }
}

/// Mean whitespace-token count per counted turn. Speak turns always count;
/// non-verbal and action turns count unless `speak_only`; None and Leave
/// turns never count.
pub fn verbosity(episode: &Episode, speak_only: bool) -> Result<f64, AnalysisError> {
    let counts: Vec<f64> = episode
        .turns
        .iter()
        .filter(|t| counted(t.action, speak_only))
        .map(|t| t.argument.split_whitespace().count() as f64)
        .collect();
    if counts.is_empty() {
        return Err(AnalysisError::NoCountedTurns { episode_id: episode.id.clone() });
    }
    Ok(mean(&counts))
}

/// Where `name` first appears as a case-insensitive whole word, scaled to
/// [0, 1] over the episode (0 = first turn, 1 = last); `None` when the name
/// is never mentioned.
///
/// Word boundaries are non-alphanumeric characters, so "Ann" does not match
/// inside "Anna".
pub fn first_mention_position(episode: &Episode, name: &str) -> Option<f64> {
    assert!(!episode.turns.is_empty(), "first_mention_position needs at least one turn");
    let pattern = format!("(?i)(^|[^a-zA-Z0-9]){}([^a-zA-Z0-9]|$)", regex::escape(name));
    let re = Regex::new(&pattern).expect("escaped name always forms a valid pattern");
    let denominator = 1.0_f64.max(episode.turns.len() as f64 - 1.0);
    episode
        .turns
        .iter()
        .position(|t| re.is_match(&t.argument))
        .map(|i| i as f64 / denominator)
}

/// Fraction of judgments with answer = yes.
pub fn deal_rate(judgments: &[DealJudgment]) -> f64 {
    assert!(!judgments.is_empty(), "deal_rate needs at least one judgment");
    let yes = judgments.iter().filter(|j| j.answer).count();
    yes as f64 / judgments.len() as f64
}

/// Counts per bin over 10 equal-width bins of [0, 1]; the last bin is
/// right-closed so 1.0 lands in bin 9.
pub fn first_mention_histogram(values: &[f64]) -> [usize; 10] {
    let mut bins = [0usize; 10];
    for &v in values {
        assert!((0.0..=1.0).contains(&v), "histogram value {v} outside [0, 1]");
        let idx = ((v * 10.0).floor() as usize).min(9);
        bins[idx] += 1;
    }
    bins
}

/// Renders histogram bins as `bin_start,bin_end,count` CSV.
pub fn histogram_csv(bins: &[usize; 10]) -> String {
    let mut out = String::from("bin_start,bin_end,count\n");
    for (i, count) in bins.iter().enumerate() {
        out.push_str(&format!("{:.1},{:.1},{}\n", i as f64 / 10.0, (i + 1) as f64 / 10.0, count));
    }
    out
}

/// Which blinded side an annotator preferred.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

/// One imported annotation decision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationChoice {
    pub pair_id: String,
    pub winner: Side,
}

/// Unblinding key for one pair: which mode produced each side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairKey {
    pub pair_id: String,
    pub a_mode: SimulationMode,
    pub b_mode: SimulationMode,
}

/// Unblinded naturalness outcome. `t_test` is a one-sample t-test of
/// `reference_mode`'s win indicators against 0.5; the p-value is identical
/// for the other mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaturalnessReport {
    pub n: usize,
    pub rates: BTreeMap<SimulationMode, f64>,
    pub reference_mode: SimulationMode,
    pub t_test: TTestResult,
}

/// Unblinds annotation choices against the labeling and computes per-mode
/// win rates with significance against the 0.5 null.
pub fn naturalness_win_rate(
    choices: &[AnnotationChoice],
    labeling: &BTreeMap<String, PairKey>,
) -> Result<NaturalnessReport, AnalysisError> {
    let mut wins: BTreeMap<SimulationMode, usize> = BTreeMap::new();
    let mut modes: Vec<SimulationMode> = Vec::new();
    for choice in choices {
        let key = labeling
            .get(&choice.pair_id)
            .ok_or_else(|| AnalysisError::UnknownPair { pair_id: choice.pair_id.clone() })?;
        for mode in [key.a_mode, key.b_mode] {
            if !modes.contains(&mode) {
                modes.push(mode);
            }
        }
        let winner = match choice.winner {
            Side::A => key.a_mode,
            Side::B => key.b_mode,
        };
        *wins.entry(winner).or_insert(0) += 1;
    }
    modes.sort();
    let reference_mode = *modes.first().expect("at least one labeled mode");
    let n = choices.len();
    let rates: BTreeMap<SimulationMode, f64> = modes
        .iter()
        .map(|m| (*m, *wins.get(m).unwrap_or(&0) as f64 / n as f64))
        .collect();
    let indicators: Vec<f64> = choices
        .iter()
        .map(|choice| {
            let key = &labeling[&choice.pair_id];
            let winner = match choice.winner {
                Side::A => key.a_mode,
                Side::B => key.b_mode,
            };
            if winner == reference_mode {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let t_test = one_sample_t_test(&indicators, 0.5)?;
    Ok(NaturalnessReport { n, rates, reference_mode, t_test })
}

/// One run's loaded artifacts, ready for metric computation.
#[derive(Debug, Clone)]
pub struct RunCorpus {
    pub run_id: String,
    pub label: String,
    pub mode: SimulationMode,
    pub episodes: Vec<Episode>,
    pub scores: Vec<ScoreRecord>,
    pub deals: Vec<DealRecord>,
}

/// Metric knobs shared by the report commands.
#[derive(Debug, Clone, Default)]
pub struct AnalysisOptions {
    pub speak_only: bool,
    pub mention_name: Option<String>,
}

/// Mean, sample standard deviation, and sample count of one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

/// Serializable per-run metric table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub run_id: String,
    pub label: String,
    pub mode: SimulationMode,
    pub episodes: usize,
    pub complete_episodes: usize,
    pub summaries: BTreeMap<String, MetricSummary>,
    pub deal_yes: usize,
    pub deal_n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deal_rate: Option<f64>,
    pub first_mention_absent: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_mention_bins: Option<[usize; 10]>,
}

/// One run's metrics plus the raw per-sample vectors backing them (kept out
/// of the serialized report; needed for pairwise tests).
#[derive(Debug, Clone)]
pub struct RunAnalysis {
    pub metrics: RunMetrics,
    pub samples: BTreeMap<String, Vec<f64>>,
}

/// One pairwise Welch test between the same metric of two runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseTest {
    pub metric: String,
    pub run_a: String,
    pub run_b: String,
    pub result: TTestResult,
    pub significant: bool,
}

/// The full comparison artifact: per-run metric tables, the pairwise test
/// matrix, and the optional unblinded naturalness outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub runs: Vec<RunMetrics>,
    pub tests: Vec<PairwiseTest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub naturalness: Option<NaturalnessReport>,
}

/// Computes every metric for one run. Only complete episodes enter metric
/// samples; partial episodes are counted but not measured.
pub fn analyze_run(corpus: &RunCorpus, options: &AnalysisOptions) -> RunAnalysis {
    let complete: Vec<&Episode> = corpus.episodes.iter().filter(|e| e.complete).collect();
    let mut samples: BTreeMap<String, Vec<f64>> = BTreeMap::new();

    let verbosity_samples: Vec<f64> = complete
        .iter()
        .filter_map(|e| verbosity(e, options.speak_only).ok())
        .collect();
    if !verbosity_samples.is_empty() {
        samples.insert("verbosity".to_string(), verbosity_samples);
    }

    let mut first_mention_absent = 0;
    let mut first_mention_bins = None;
    if let Some(name) = &options.mention_name {
        let mut positions = Vec::new();
        for episode in &complete {
            if episode.turns.is_empty() {
                continue;
            }
            match first_mention_position(episode, name) {
                Some(pos) => positions.push(pos),
                None => first_mention_absent += 1,
            }
        }
        if !positions.is_empty() {
            first_mention_bins = Some(first_mention_histogram(&positions));
            samples.insert("first_mention".to_string(), positions);
        }
    }

    for dim in Dimension::ALL {
        let values: Vec<f64> = corpus
            .scores
            .iter()
            .flat_map(|record| record.scores.dimension_samples(dim))
            .collect();
        if !values.is_empty() {
            samples.insert(dim.wire_name().to_string(), values);
        }
    }

    let deal_yes = corpus.deals.iter().filter(|d| d.judgment.answer).count();
    let deal_n = corpus.deals.len();
    let deal_rate = if deal_n > 0 {
        let judgments: Vec<DealJudgment> =
            corpus.deals.iter().map(|d| d.judgment.clone()).collect();
        Some(self::deal_rate(&judgments))
    } else {
        None
    };

    let summaries = samples
        .iter()
        .map(|(name, values)| {
            let summary =
                MetricSummary { mean: mean(values), std: sample_std(values), n: values.len() };
            (name.clone(), summary)
        })
        .collect();

    RunAnalysis {
        metrics: RunMetrics {
            run_id: corpus.run_id.clone(),
            label: corpus.label.clone(),
            mode: corpus.mode,
            episodes: corpus.episodes.len(),
            complete_episodes: complete.len(),
            summaries,
            deal_yes,
            deal_n,
            deal_rate,
            first_mention_absent,
            first_mention_bins,
        },
        samples,
    }
}

/// Builds the full comparison report: metrics per run plus a Welch test for
/// every metric shared by a pair of runs with at least two samples each
/// side.
pub fn compare_runs(
    corpora: &[RunCorpus],
    options: &AnalysisOptions,
    naturalness: Option<NaturalnessReport>,
) -> ComparisonReport {
    let analyses: Vec<RunAnalysis> = corpora.iter().map(|c| analyze_run(c, options)).collect();
    let mut tests = Vec::new();
    for i in 0..analyses.len() {
        for j in i + 1..analyses.len() {
            let (a, b) = (&analyses[i], &analyses[j]);
            for (metric, sa) in &a.samples {
                let Some(sb) = b.samples.get(metric) else { continue };
                if sa.len() < 2 || sb.len() < 2 {
                    continue;
                }
                let result = welch_t_test(sa, sb)
                    .expect("both samples checked for the minimum size");
                tests.push(PairwiseTest {
                    metric: metric.clone(),
                    run_a: a.metrics.label.clone(),
                    run_b: b.metrics.label.clone(),
                    significant: result.p_two_sided < SIGNIFICANCE_THRESHOLD,
                    result,
                });
            }
        }
    }
    ComparisonReport {
        runs: analyses.into_iter().map(|a| a.metrics).collect(),
        tests,
        naturalness,
    }
}

fn format_p(p: f64) -> String {
    if p >= 0.001 {
        format!("{p:.4}")
    } else {
        format!("{p:.2e}")
    }
}

impl ComparisonReport {
    /// Markdown rendering of the report. Stars are derived from the stored
    /// p-values, never entered by hand.
    pub fn to_markdown(&self) -> String {
        let mut out = String::from("# Simulation comparison\n\n## Runs\n\n");
        out.push_str("| label | run id | mode | episodes | complete |\n|---|---|---|---|---|\n");
        for run in &self.runs {
            out.push_str(&format!(
                "| {} | {} | {} | {} | {} |\n",
                run.label,
                run.run_id,
                serde_json::to_value(run.mode).expect("mode serializes").as_str().unwrap(),
                run.episodes,
                run.complete_episodes
            ));
        }

        let mut metric_names: Vec<String> = Vec::new();
        for run in &self.runs {
            for name in run.summaries.keys() {
                if !metric_names.contains(name) {
                    metric_names.push(name.clone());
                }
            }
        }
        metric_names.sort();
        out.push_str("\n## Metrics (mean ± std (n))\n\n| metric |");
        for run in &self.runs {
            out.push_str(&format!(" {} |", run.label));
        }
        out.push_str("\n|---|");
        out.push_str(&"---|".repeat(self.runs.len()));
        out.push('\n');
        for name in &metric_names {
            out.push_str(&format!("| {name} |"));
            for run in &self.runs {
                match run.summaries.get(name) {
                    Some(s) => {
                        out.push_str(&format!(" {:.4} ± {:.4} ({}) |", s.mean, s.std, s.n))
                    }
                    None => out.push_str(" - |"),
                }
            }
            out.push('\n');
        }
        if self.runs.iter().any(|r| r.deal_n > 0) {
            out.push_str("| deal_rate |");
            for run in &self.runs {
                match run.deal_rate {
                    Some(rate) => {
                        out.push_str(&format!(" {:.4} ({}/{}) |", rate, run.deal_yes, run.deal_n))
                    }
                    None => out.push_str(" - |"),
                }
            }
            out.push('\n');
        }
        for run in &self.runs {
            if run.first_mention_absent > 0 {
                out.push_str(&format!(
                    "\nFirst mention absent in {} episodes of {}.\n",
                    run.first_mention_absent, run.label
                ));
            }
        }

        if !self.tests.is_empty() {
            out.push_str(
                "\n## Pairwise Welch t-tests (two-sided; * = p < 0.001)\n\n\
                 | metric | A | B | t | df | p | sig |\n|---|---|---|---|---|---|---|\n",
            );
            for test in &self.tests {
                let star = if test.significant { "*" } else { "" };
                out.push_str(&format!(
                    "| {} | {} | {} | {:.4} | {:.2} | {} | {} |\n",
                    test.metric,
                    test.run_a,
                    test.run_b,
                    test.result.t,
                    test.result.df,
                    format_p(test.result.p_two_sided),
                    star
                ));
            }
        }

        if let Some(naturalness) = &self.naturalness {
            out.push_str("\n## Naturalness win rate\n\n| mode | win rate |\n|---|---|\n");
            for (mode, rate) in &naturalness.rates {
                out.push_str(&format!(
                    "| {} | {:.4} |\n",
                    serde_json::to_value(mode).expect("mode serializes").as_str().unwrap(),
                    rate
                ));
            }
            out.push_str(&format!(
                "\nOne-sample t-test vs 0.5 over {} choices: t = {:.4}, p = {}.\n",
                naturalness.n,
                naturalness.t_test.t,
                format_p(naturalness.t_test.p_two_sided)
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{CharacterProfile, Provenance, SocialTask, Turn};
    use std::collections::BTreeSet;

    fn episode_with_args(args: &[(ActionType, &str)]) -> Episode {
        let task = SocialTask {
            scenario: "s".to_string(),
            participants: [
                CharacterProfile {
                    name: "A One".to_string(),
                    age: None,
                    gender: None,
                    gender_pronouns: None,
                    occupation: None,
                    personality_and_values: None,
                    public_info: None,
                    secret: None,
                },
                CharacterProfile {
                    name: "B Two".to_string(),
                    age: None,
                    gender: None,
                    gender_pronouns: None,
                    occupation: None,
                    personality_and_values: None,
                    public_info: None,
                    secret: None,
                },
            ],
            relationship: None,
            goals: ["g0".to_string(), "g1".to_string()],
            tags: BTreeSet::new(),
            friend_lists: None,
        };
        Episode {
            id: "ep-analysis".to_string(),
            task,
            mode: SimulationMode::Agents,
            turns: args
                .iter()
                .enumerate()
                .map(|(i, (action, argument))| Turn {
                    index: i,
                    speaker: i % 2,
                    action: *action,
                    argument: argument.to_string(),
                })
                .collect(),
            provenance: Provenance {
                models: vec!["fixture".to_string()],
                temperature: 0.0,
                started_at_ms: 0,
                finished_at_ms: 0,
                raw_output: None,
                script_skipped_lines: Vec::new(),
                calls: Vec::new(),
            },
            complete: true,
        }
    }

    #[test]
    fn verbosity_counts_whitespace_tokens() {
        let ep = episode_with_args(&[(ActionType::Speak, "hello there")]);
        assert_eq!(verbosity(&ep, false).unwrap(), 2.0);

        let ep = episode_with_args(&[(ActionType::Speak, "a b c"), (ActionType::Leave, "")]);
        assert_eq!(verbosity(&ep, false).unwrap(), 3.0);
    }

    #[test]
    fn verbosity_speak_only_flag_excludes_nonverbal() {
        let ep = episode_with_args(&[
            (ActionType::Speak, "one two three four"),
            (ActionType::NonVerbal, "nods"),
            (ActionType::Action, "sips coffee slowly"),
            (ActionType::None, ""),
        ]);
        assert_eq!(verbosity(&ep, false).unwrap(), (4.0 + 1.0 + 3.0) / 3.0);
        assert_eq!(verbosity(&ep, true).unwrap(), 4.0);
    }

    #[test]
    fn verbosity_errors_without_counted_turns() {
        let ep = episode_with_args(&[(ActionType::Leave, "")]);
        assert!(matches!(
            verbosity(&ep, false),
            Err(AnalysisError::NoCountedTurns { .. })
        ));
    }

    #[test]
    fn verbosity_ignores_punctuation_changes() {
        let a = episode_with_args(&[(ActionType::Speak, "well, that went fine!")]);
        let b = episode_with_args(&[(ActionType::Speak, "well that went fine")]);
        assert_eq!(verbosity(&a, false).unwrap(), verbosity(&b, false).unwrap());
    }

    #[test]
    fn first_mention_scales_by_episode_length() {
        let mut args = vec![(ActionType::Speak, "nothing yet"); 16];
        args[2] = (ActionType::Speak, "do you know Jacob from work?");
        let ep = episode_with_args(&args);
        let pos = first_mention_position(&ep, "Jacob").unwrap();
        assert!((pos - 2.0 / 15.0).abs() < 1e-12);

        let mut args = vec![(ActionType::Speak, "x"); 16];
        args[0] = (ActionType::Speak, "Jacob!");
        let ep = episode_with_args(&args);
        assert_eq!(first_mention_position(&ep, "jacob").unwrap(), 0.0);
    }

    #[test]
    fn first_mention_absent_and_single_turn() {
        let ep = episode_with_args(&[(ActionType::Speak, "no names here")]);
        assert_eq!(first_mention_position(&ep, "Jacob"), None);

        let ep = episode_with_args(&[(ActionType::Speak, "Jacob is here")]);
        assert_eq!(first_mention_position(&ep, "Jacob"), Some(0.0));
    }

    #[test]
    fn first_mention_requires_whole_word() {
        let ep = episode_with_args(&[
            (ActionType::Speak, "Anna and Annabelle arrived"),
            (ActionType::Speak, "then Ann arrived"),
        ]);
        assert_eq!(first_mention_position(&ep, "Ann").unwrap(), 1.0);
    }

    #[test]
    fn deal_rate_is_yes_fraction() {
        let judgment = |answer| DealJudgment { reasoning: String::new(), answer };
        assert_eq!(
            deal_rate(&[judgment(true), judgment(true), judgment(false), judgment(true)]),
            0.75
        );
        assert_eq!(deal_rate(&[judgment(false), judgment(false), judgment(false)]), 0.0);
        let mut fifty: Vec<DealJudgment> = (0..47).map(|_| judgment(true)).collect();
        fifty.extend((0..3).map(|_| judgment(false)));
        assert_eq!(deal_rate(&fifty), 0.94);
    }

    #[test]
    fn histogram_bins_and_csv() {
        assert_eq!(first_mention_histogram(&[0.0])[0], 1);
        assert_eq!(first_mention_histogram(&[1.0])[9], 1);
        let grid: Vec<f64> = (0..10).map(|i| i as f64 / 10.0 + 0.05).collect();
        let bins = first_mention_histogram(&grid);
        assert!(bins.iter().all(|&c| c == 1));
        let csv = histogram_csv(&bins);
        assert_eq!(csv.lines().count(), 11);
        assert!(csv.starts_with("bin_start,bin_end,count\n0.0,0.1,1\n"));
        assert!(csv.ends_with("0.9,1.0,1\n"));
    }

    fn labeling(n: usize) -> BTreeMap<String, PairKey> {
        (0..n)
            .map(|i| {
                let pair_id = format!("pair-{i}");
                let key = PairKey {
                    pair_id: pair_id.clone(),
                    a_mode: SimulationMode::Agents,
                    b_mode: SimulationMode::Script,
                };
                (pair_id, key)
            })
            .collect()
    }

    fn choices(script_wins: usize, agents_wins: usize) -> Vec<AnnotationChoice> {
        (0..script_wins + agents_wins)
            .map(|i| AnnotationChoice {
                pair_id: format!("pair-{i}"),
                winner: if i < script_wins { Side::B } else { Side::A },
            })
            .collect()
    }

    #[test]
    fn naturalness_unanimous_and_split() {
        let labeling = labeling(30);
        let report = naturalness_win_rate(&choices(30, 0), &labeling).unwrap();
        assert_eq!(report.rates[&SimulationMode::Script], 1.0);
        assert_eq!(report.rates[&SimulationMode::Agents], 0.0);
        assert!(report.t_test.p_two_sided < 1e-200);

        let report = naturalness_win_rate(&choices(15, 15), &labeling).unwrap();
        assert_eq!(report.rates[&SimulationMode::Script], 0.5);
        assert_eq!(report.t_test.p_two_sided, 1.0);
        assert_eq!(report.t_test.t, 0.0);
    }

    #[test]
    fn naturalness_majority_is_significant() {
        let report = naturalness_win_rate(&choices(24, 6), &labeling(30)).unwrap();
        assert_eq!(report.rates[&SimulationMode::Script], 0.8);
        assert_eq!(report.reference_mode, SimulationMode::Agents);
        assert!(report.t_test.p_two_sided < 0.05);
    }

    #[test]
    fn naturalness_rejects_unknown_pair() {
        let err = naturalness_win_rate(
            &[AnnotationChoice { pair_id: "ghost".to_string(), winner: Side::A }],
            &labeling(1),
        )
        .unwrap_err();
        assert!(matches!(err, AnalysisError::UnknownPair { .. }));
    }

    fn corpus(label: &str, words_per_turn: usize, episodes: usize) -> RunCorpus {
        let text = vec!["w"; words_per_turn].join(" ");
        RunCorpus {
            run_id: format!("run-{label}"),
            label: label.to_string(),
            mode: SimulationMode::Agents,
            episodes: (0..episodes)
                .map(|i| {
                    let extra = if i % 2 == 0 { " extra" } else { "" };
                    let line = format!("{text}{extra}");
                    let mut ep = episode_with_args(&[
                        (ActionType::Speak, line.as_str()),
                        (ActionType::Speak, text.as_str()),
                    ]);
                    ep.id = format!("ep-{label}-{i}");
                    ep
                })
                .collect(),
            scores: Vec::new(),
            deals: Vec::new(),
        }
    }

    #[test]
    fn compare_runs_tests_shared_metrics_and_renders() {
        let a = corpus("short", 5, 8);
        let b = corpus("long", 30, 8);
        let report = compare_runs(&[a, b], &AnalysisOptions::default(), None);
        assert_eq!(report.runs.len(), 2);
        let verbosity_test =
            report.tests.iter().find(|t| t.metric == "verbosity").expect("verbosity tested");
        assert!(verbosity_test.result.p_two_sided < SIGNIFICANCE_THRESHOLD);
        assert!(verbosity_test.significant);

        let markdown = report.to_markdown();
        assert!(markdown.contains("| verbosity |"));
        assert!(markdown.contains("| short |"));
        assert!(markdown.contains("* = p < 0.001"));

        let json = serde_json::to_string_pretty(&report).unwrap();
        let parsed: ComparisonReport = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, report);
    }

    #[test]
    fn stars_match_stored_p_values() {
        let a = corpus("one", 10, 6);
        let b = corpus("two", 11, 6);
        let report = compare_runs(&[a, b], &AnalysisOptions::default(), None);
        for test in &report.tests {
            assert_eq!(test.significant, test.result.p_two_sided < SIGNIFICANCE_THRESHOLD);
        }
    }
}
