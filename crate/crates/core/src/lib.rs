//! Engine for a question-gated snakes-and-ladders game for practising
//! number patterns.
//!
//! * [`pattern_bank`] generates the multiple-choice sequence questions.
//! * [`board`] and [`gameplay`] hold the board topology and the turn state
//!   machine.
//! * [`economy`] covers points, energy, daily quests and the avatar shop.
//! * [`persistence`] stores profiles and in-flight sessions.
//! * [`evaluator`] scores the 4-point Likert survey.
//! * [`simulator`] plays bot games and solves the exact expected game length.
//!
//! All randomness comes from [`prng::SplitMix64`]; the same seeds give the
//! same cards, rolls and transcripts on every platform.

pub mod board;
pub mod economy;
pub mod evaluator;
pub mod gameplay;
pub mod par;
pub mod pattern_bank;
pub mod persistence;
pub mod prng;
pub mod simulator;

pub use board::{apply_move, BoardSpec, Tile};
pub use gameplay::{Feedback, GameError, GameSession, Phase, SessionRules, SessionSetup, TurnRecord};
pub use pattern_bank::{generate_question, next_term, Difficulty, GeneratorConfig, PatternKind, QuestionCard};
pub use prng::SplitMix64;
