//! Batch simulator and analysis toolkit for dyadic, goal-driven social
//! interactions under three information-asymmetry regimes: `agents` (each
//! side sees only its permitted context), `mindreaders` (partner goals
//! visible), and `script` (one omniscient generation parsed into turns).
//!
//! The crate covers the full pipeline: task modeling and validation
//! ([`domain`]), byte-stable prompt rendering with visibility policies
//! ([`prompt`]), the interactive turn engine ([`engine`]) and script-mode
//! transcript grammar ([`script`]), chat-completions and fixture backends
//! ([`backend`]), LLM-judge scoring and deal judgments ([`judge`]),
//! comparison metrics with Welch t-tests ([`analysis`], [`stats`]),
//! supervised-finetune export ([`finetune`]), run orchestration and
//! persistence ([`run`]), blinded pairwise annotation ([`annotate`]), and
//! simulation cards ([`card`]).

pub mod analysis;
pub mod annotate;
pub mod backend;
pub mod card;
pub mod domain;
pub mod engine;
pub mod finetune;
pub mod hash;
pub mod judge;
pub mod prompt;
pub mod run;
pub mod script;
pub mod stats;
