//! The question-gated race.
//!
//! A turn is a roll followed by an answer. The roll draws the die face and a
//! card seed from the session's [`SplitMix64`] (in that order); the answer
//! either moves the token by the die (correct) or costs a lifeline (wrong).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::board::{apply_move, BoardSpec, Tile, DICE_FACES};
use crate::pattern_bank::{generate_question, Difficulty, GeneratorConfig, QuestionCard, CHOICE_COUNT};
use crate::prng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    AwaitingRoll,
    AwaitingAnswer,
    Victory,
    GameOver,
}

impl Phase {
    pub fn is_terminal(self) -> bool {
        matches!(self, Phase::Victory | Phase::GameOver)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Feedback {
    GoodJob,
    Ooppss,
    Victory,
    GameOver,
}

impl Feedback {
    pub const ALL: [Feedback; 4] = [
        Feedback::GoodJob,
        Feedback::Ooppss,
        Feedback::Victory,
        Feedback::GameOver,
    ];

    /// The text shown to the player.
    pub fn message(self) -> &'static str {
        match self {
            Feedback::GoodJob => "Good job!",
            Feedback::Ooppss => "Ooppss!",
            Feedback::Victory => "Victory",
            Feedback::GameOver => "Game Over",
        }
    }
}

/// Lifeline and scoring parameters fixed when a session starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionRules {
    pub starting_lifelines: u32,
    pub lifeline_cap: u32,
    /// Every this many consecutive correct answers earns a lifeline.
    pub streak_for_lifeline: u32,
    pub points_per_correct: u64,
    pub victory_bonus: u64,
}

impl Default for SessionRules {
    fn default() -> Self {
        Self {
            starting_lifelines: 3,
            lifeline_cap: 5,
            streak_for_lifeline: 5,
            points_per_correct: 10,
            victory_bonus: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pending {
    pub dice: u8,
    pub card: QuestionCard,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub turn: u32,
    pub dice: u8,
    pub card_id: String,
    pub answer_index: u8,
    pub correct: bool,
    pub position_before: Tile,
    pub position_after: Tile,
    pub lifelines_after: u32,
    pub feedback: Feedback,
    pub points_delta: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GameError {
    #[error("action needs phase {expected} but session is in {actual}")]
    IllegalPhase { expected: Phase, actual: Phase },
    #[error("choice {0} is outside 0..{CHOICE_COUNT}")]
    ChoiceOutOfRange(usize),
}

/// Everything needed to start (or replay) a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionSetup {
    pub session_id: String,
    pub player_id: String,
    pub board: BoardSpec,
    pub difficulty: Difficulty,
    pub rules: SessionRules,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameSession {
    pub session_id: String,
    pub player_id: String,
    pub board: BoardSpec,
    pub difficulty: Difficulty,
    pub rules: SessionRules,
    pub seed: u64,
    position: Tile,
    lifelines: u32,
    phase: Phase,
    pending: Option<Pending>,
    consecutive_correct: u32,
    prng: SplitMix64,
    transcript: Vec<TurnRecord>,
}

impl GameSession {
    /// A fresh session at tile 0. Energy must already have been debited.
    pub fn start(setup: SessionSetup) -> Self {
        let SessionSetup {
            session_id,
            player_id,
            board,
            difficulty,
            rules,
            seed,
        } = setup;
        Self {
            session_id,
            player_id,
            board,
            difficulty,
            rules,
            seed,
            position: 0,
            lifelines: rules.starting_lifelines.clamp(1, rules.lifeline_cap.max(1)),
            phase: Phase::AwaitingRoll,
            pending: None,
            consecutive_correct: 0,
            prng: SplitMix64::new(seed),
            transcript: Vec::new(),
        }
    }

    pub fn position(&self) -> Tile {
        self.position
    }

    pub fn lifelines(&self) -> u32 {
        self.lifelines
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn pending(&self) -> Option<&Pending> {
        self.pending.as_ref()
    }

    pub fn consecutive_correct(&self) -> u32 {
        self.consecutive_correct
    }

    pub fn transcript(&self) -> &[TurnRecord] {
        &self.transcript
    }

    pub fn total_points(&self) -> u64 {
        self.transcript.iter().map(|r| r.points_delta).sum()
    }

    fn require(&self, expected: Phase) -> Result<(), GameError> {
        if self.phase == expected {
            Ok(())
        } else {
            Err(GameError::IllegalPhase {
                expected,
                actual: self.phase,
            })
        }
    }

    pub fn roll(&mut self, config: &GeneratorConfig) -> Result<&Pending, GameError> {
        self.require(Phase::AwaitingRoll)?;
        let dice = 1 + self.prng.below(DICE_FACES as u64) as u8;
        let card_seed = self.prng.next_u64();
        let card = generate_question(card_seed, self.difficulty, config);
        self.phase = Phase::AwaitingAnswer;
        Ok(self.pending.insert(Pending { dice, card }))
    }

    pub fn answer(&mut self, choice_index: usize) -> Result<&TurnRecord, GameError> {
        self.require(Phase::AwaitingAnswer)?;
        if choice_index >= CHOICE_COUNT {
            return Err(GameError::ChoiceOutOfRange(choice_index));
        }
        let Pending { dice, card } = self.pending.take().expect("pending while awaiting answer");
        let correct = card.is_correct(choice_index);
        let position_before = self.position;
        let mut points_delta = 0;
        let feedback = if correct {
            self.position = apply_move(self.position, dice as u32, &self.board);
            self.consecutive_correct += 1;
            points_delta += self.rules.points_per_correct;
            if self.rules.streak_for_lifeline > 0
                && self.consecutive_correct.is_multiple_of(self.rules.streak_for_lifeline)
            {
                self.lifelines = (self.lifelines + 1).min(self.rules.lifeline_cap);
            }
            if self.position == self.board.finish_tile() {
                points_delta += self.rules.victory_bonus;
                self.phase = Phase::Victory;
                Feedback::Victory
            } else {
                self.phase = Phase::AwaitingRoll;
                Feedback::GoodJob
            }
        } else {
            self.lifelines -= 1;
            self.consecutive_correct = 0;
            if self.lifelines == 0 {
                self.phase = Phase::GameOver;
                Feedback::GameOver
            } else {
                self.phase = Phase::AwaitingRoll;
                Feedback::Ooppss
            }
        };
        self.transcript.push(TurnRecord {
            turn: self.transcript.len() as u32 + 1,
            dice,
            card_id: card.id,
            answer_index: choice_index as u8,
            correct,
            position_before,
            position_after: self.position,
            lifelines_after: self.lifelines,
            feedback,
            points_delta,
        });
        Ok(self.transcript.last().unwrap())
    }
}

/// Re-executes `answers` (one roll before each) from a fresh session.
/// Stops early once the game ends.
pub fn replay(setup: SessionSetup, config: &GeneratorConfig, answers: &[usize]) -> Result<GameSession, GameError> {
    let mut session = GameSession::start(setup);
    for &choice in answers {
        if session.phase().is_terminal() {
            break;
        }
        session.roll(config)?;
        session.answer(choice)?;
    }
    Ok(session)
}
