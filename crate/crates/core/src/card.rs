//! Simulation-card generation: a five-section markdown report documenting
//! how a run was configured, with the mechanical fields auto-filled from
//! the run manifest.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::SimulationMode;
use crate::run::RunManifest;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CardError {
    #[error("required card section {section:?} is missing")]
    MissingSection { section: String },
}

/// Free-text card inputs. Everything else on the card is derived from the
/// manifest; these are the judgment calls only a human can make.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardSections {
    #[serde(default)]
    pub targeted_domain: Option<String>,
    #[serde(default)]
    pub other_features: Option<String>,
    #[serde(default)]
    pub intended_use_primary: Option<String>,
    #[serde(default)]
    pub intended_use_other: Option<String>,
    #[serde(default)]
    pub metrics_fidelity: Option<String>,
    #[serde(default)]
    pub metrics_goal_achievement: Option<String>,
    #[serde(default)]
    pub metrics_norms_safety: Option<String>,
    #[serde(default)]
    pub ethical_considerations: Option<String>,
    #[serde(default)]
    pub caveats_and_recommendations: Option<String>,
    /// Set when imported human annotations exist for this run.
    #[serde(default)]
    pub humans_in_loop: bool,
}

fn asymmetry_line(manifest: &RunManifest) -> String {
    match manifest.config.mode {
        SimulationMode::Script => {
            "None at generation time: a single omniscient generator produces the whole \
             transcript from a third-person view."
                .to_string()
        }
        mode => {
            let policy = &manifest.config.policy;
            let detail = match policy.profile_detail {
                crate::prompt::ProfileDetail::Full => "full profiles",
                crate::prompt::ProfileDetail::NameOnly => "names only",
            };
            format!(
                "{} mode: each agent is prompted separately; partner goal {}, partner secret {}, \
                 own secret {}; backgrounds rendered as {}.",
                mode,
                if policy.show_partner_goal { "visible" } else { "hidden" },
                if policy.show_partner_secret { "visible" } else { "hidden" },
                if policy.show_own_secret { "visible" } else { "hidden" },
                detail
            )
        }
    }
}

fn free(text: &Option<String>, fallback: &str) -> String {
    text.clone().unwrap_or_else(|| fallback.to_string())
}

/// Renders the five-section simulation card. With `strict`, the free-text
/// sections that cannot be auto-filled (primary intended use, ethical
/// considerations, caveats) must be present.
pub fn render_simulation_card(
    manifest: &RunManifest,
    sections: &CardSections,
    strict: bool,
) -> Result<String, CardError> {
    if strict {
        for (section, value) in [
            ("intended_use_primary", &sections.intended_use_primary),
            ("ethical_considerations", &sections.ethical_considerations),
            ("caveats_and_recommendations", &sections.caveats_and_recommendations),
        ] {
            if value.as_deref().map(str::trim).filter(|s| !s.is_empty()).is_none() {
                return Err(CardError::MissingSection { section: section.to_string() });
            }
        }
    }

    let complete = manifest.episodes.iter().filter(|e| e.complete).count();
    let mut out = format!("# Simulation card: run {}\n\n", manifest.run_id);

    out.push_str("## Simulation details\n\n");
    out.push_str("- Single or multi-agent: multi-agent (dyadic)\n");
    out.push_str(&format!("- Information asymmetry: {}\n", asymmetry_line(manifest)));
    out.push_str(&format!(
        "- Agent type: prompt-based LLM agents (profile: {}; models: {})\n",
        manifest.config.profile,
        manifest.models.join(", ")
    ));
    out.push_str("- Modalities: text\n");
    out.push_str(&format!(
        "- Humans in the loop: {}\n",
        if sections.humans_in_loop { "yes (imported pairwise annotations)" } else { "no" }
    ));
    out.push_str(&format!(
        "- Platform: {} {}\n",
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION")
    ));
    out.push_str(&format!(
        "- Targeted domain: {}\n",
        free(&sections.targeted_domain, "goal-driven everyday social interaction")
    ));
    if let Some(other) = &sections.other_features {
        out.push_str(&format!("- Other features: {other}\n"));
    }
    out.push_str(&format!(
        "- Scale: {} episodes ({} complete), {} per task, max {} turns, temperature {}, seed {}\n",
        manifest.episodes.len(),
        complete,
        manifest.config.episodes_per_task,
        manifest.config.engine.max_turns,
        manifest.config.engine.temperature,
        manifest.config.seed
    ));

    out.push_str("\n## Intended use\n\n");
    out.push_str(&format!(
        "- Primary: {}\n",
        free(&sections.intended_use_primary, "_Not provided._")
    ));
    out.push_str(&format!("- Other: {}\n", free(&sections.intended_use_other, "none stated")));

    out.push_str("\n## Metrics\n\n");
    out.push_str(&format!(
        "- Fidelity: {}\n",
        free(
            &sections.metrics_fidelity,
            "turn alternation, turn caps, and schema-validated actions are enforced \
             mechanically; per-episode statuses are listed in the manifest"
        )
    ));
    out.push_str(&format!(
        "- Goal achievement: {}\n",
        free(
            &sections.metrics_goal_achievement,
            &format!(
                "LLM-judge rubric {} scores seven dimensions including GOAL; records under scores/",
                manifest.rubric_version
            )
        )
    ));
    out.push_str(&format!(
        "- Norms and safety: {}\n",
        free(
            &sections.metrics_norms_safety,
            "the SOC and SEC rubric dimensions track norm violations and secret leakage"
        )
    ));

    out.push_str("\n## Ethical considerations\n\n");
    out.push_str(&free(&sections.ethical_considerations, "_Not provided._"));
    out.push('\n');

    out.push_str("\n## Caveats and recommendations\n\n");
    out.push_str(&free(&sections.caveats_and_recommendations, "_Not provided._"));
    out.push('\n');

    Ok(out)
}
