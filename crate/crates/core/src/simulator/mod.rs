//! Headless bot games for balance checks.
//!
//! Game `i` of a run seeded with `master` uses the session seed
//! `stream_at(master, 2i)` and the bot seed `stream_at(master, 2i + 1)`
//! (see [`crate::prng::stream_at`]), so any single game can be replayed in
//! isolation and the result does not depend on how games are scheduled.
//! Aggregates are exact integer sums.

pub mod oracle;

use serde::Serialize;

use crate::board::BoardSpec;
use crate::gameplay::{GameSession, Phase, SessionRules, SessionSetup};
use crate::pattern_bank::{Difficulty, GeneratorConfig, CHOICE_COUNT};
use crate::prng::{stream_at, SplitMix64};

pub use oracle::{expected_turns, expected_turns_oracle, OracleError, OracleReport, OracleResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BotPolicy {
    accuracy: f64,
    pub seed: u64,
}

impl BotPolicy {
    pub fn new(accuracy: f64, seed: u64) -> Result<Self, SimError> {
        if !(0.0..=1.0).contains(&accuracy) {
            return Err(SimError::InvalidAccuracy(accuracy));
        }
        Ok(Self { accuracy, seed })
    }

    pub fn accuracy(&self) -> f64 {
        self.accuracy
    }

    /// Decides correctness first, then picks the right choice or a uniformly
    /// drawn wrong one.
    fn choose(&self, correct_index: usize, rng: &mut SplitMix64) -> usize {
        let answer_right = rng.unit_f64() < self.accuracy;
        if answer_right {
            correct_index
        } else {
            let k = rng.below(CHOICE_COUNT as u64 - 1) as usize;
            if k >= correct_index {
                k + 1
            } else {
                k
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("accuracy {0} outside [0, 1]")]
    InvalidAccuracy(f64),
    #[error("need at least one game")]
    NoGames,
}

#[derive(Debug, Clone)]
pub struct SimSetup {
    pub board: BoardSpec,
    pub rules: SessionRules,
    pub generator: GeneratorConfig,
    pub difficulty: Difficulty,
}

impl SimSetup {
    pub fn new(board: BoardSpec, rules: SessionRules) -> Self {
        Self {
            board,
            rules,
            generator: GeneratorConfig::default(),
            difficulty: Difficulty::Easy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GameOutcome {
    pub victory: bool,
    pub turns: u64,
    pub points: u64,
    pub final_position: u32,
    pub final_lifelines: u32,
}

/// Plays one complete game through the real session state machine.
pub fn play_game(setup: &SimSetup, policy: &BotPolicy, session_seed: u64, bot_seed: u64) -> GameOutcome {
    let mut session = GameSession::start(SessionSetup {
        session_id: format!("sim-{session_seed:016x}"),
        player_id: "bot".into(),
        board: setup.board.clone(),
        difficulty: setup.difficulty,
        rules: setup.rules,
        seed: session_seed,
    });
    let mut bot = SplitMix64::new(bot_seed);
    while !session.phase().is_terminal() {
        let pending = session.roll(&setup.generator).expect("roll in AwaitingRoll");
        let choice = policy.choose(pending.card.correct_index as usize, &mut bot);
        session.answer(choice).expect("answer in AwaitingAnswer");
    }
    GameOutcome {
        victory: session.phase() == Phase::Victory,
        turns: session.transcript().len() as u64,
        points: session.total_points(),
        final_position: session.position(),
        final_lifelines: session.lifelines(),
    }
}

pub fn game_seeds(master: u64, game: u64) -> (u64, u64) {
    (stream_at(master, 2 * game), stream_at(master, 2 * game + 1))
}

/// Exact running sums; merging is associative and commutative.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub games: u64,
    pub victories: u64,
    pub game_overs: u64,
    pub turns: u128,
    pub turns_squared: u128,
    pub points: u128,
}

impl Tally {
    fn of(outcome: &GameOutcome) -> Self {
        Self {
            games: 1,
            victories: outcome.victory as u64,
            game_overs: !outcome.victory as u64,
            turns: outcome.turns as u128,
            turns_squared: (outcome.turns as u128).pow(2),
            points: outcome.points as u128,
        }
    }

    fn merge(self, o: Self) -> Self {
        Self {
            games: self.games + o.games,
            victories: self.victories + o.victories,
            game_overs: self.game_overs + o.game_overs,
            turns: self.turns + o.turns,
            turns_squared: self.turns_squared + o.turns_squared,
            points: self.points + o.points,
        }
    }
}

impl std::iter::Sum for Tally {
    fn sum<I: Iterator<Item = Tally>>(iter: I) -> Self {
        iter.fold(Tally::default(), Tally::merge)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub games: u64,
    pub accuracy: f64,
    pub seed: u64,
    pub victories: u64,
    pub game_overs: u64,
    pub victory_rate: f64,
    pub lifelines_exhausted_rate: f64,
    pub mean_turns: f64,
    pub turns_stddev: f64,
    /// Standard error of `mean_turns`.
    pub turns_stderr: f64,
    pub mean_points: f64,
}

impl SimReport {
    fn from_tally(t: Tally, policy: &BotPolicy) -> Self {
        let n = t.games as f64;
        // n * sum(x^2) - (sum x)^2 is exact in integers.
        let spread = t.games as u128 * t.turns_squared - t.turns * t.turns;
        let variance = if t.games > 1 {
            spread as f64 / (n * (n - 1.0))
        } else {
            0.0
        };
        let stddev = variance.sqrt();
        Self {
            games: t.games,
            accuracy: policy.accuracy,
            seed: policy.seed,
            victories: t.victories,
            game_overs: t.game_overs,
            victory_rate: t.victories as f64 / n,
            lifelines_exhausted_rate: t.game_overs as f64 / n,
            mean_turns: t.turns as f64 / n,
            turns_stddev: stddev,
            turns_stderr: stddev / n.sqrt(),
            mean_points: t.points as f64 / n,
        }
    }
}

fn tally_range(setup: &SimSetup, policy: &BotPolicy, games: u64) -> Tally {
    use crate::par::*;
    (0..games)
        .into_par_iter()
        .map(|i| {
            let (s, b) = game_seeds(policy.seed, i);
            Tally::of(&play_game(setup, policy, s, b))
        })
        .sum()
}

/// Runs `games` independent games, in parallel when the `parallel` feature
/// is enabled.
pub fn run_games(setup: &SimSetup, policy: &BotPolicy, games: u64) -> Result<SimReport, SimError> {
    if games == 0 {
        return Err(SimError::NoGames);
    }
    Ok(SimReport::from_tally(tally_range(setup, policy, games), policy))
}

/// Single-threaded reference; produces the same report as [`run_games`].
pub fn run_games_sequential(setup: &SimSetup, policy: &BotPolicy, games: u64) -> Result<SimReport, SimError> {
    if games == 0 {
        return Err(SimError::NoGames);
    }
    let tally = (0..games)
        .map(|i| {
            let (s, b) = game_seeds(policy.seed, i);
            Tally::of(&play_game(setup, policy, s, b))
        })
        .fold(Tally::default(), Tally::merge);
    Ok(SimReport::from_tally(tally, policy))
}
