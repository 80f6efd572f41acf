//! Response bodies. Field names here are the wire format documented in
//! `docs/api.md`.

use std::collections::BTreeSet;

use chrono::{DateTime, NaiveDate, Utc};
use patternquest_core::economy::{Economy, QuestId, QuestState, Wallet};
use patternquest_core::gameplay::Pending;
use patternquest_core::persistence::{GameSummary, PlayerProfile, Settings, Stats};
use patternquest_core::{
    BoardSpec, Difficulty, Feedback, GameSession, PatternKind, Phase, QuestionCard, Tile, TurnRecord,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalletView {
    pub points: u64,
    pub energy: u32,
    pub energy_max: u32,
    pub energy_last_refill: DateTime<Utc>,
    /// Seconds until the next energy point, absent when energy is full.
    pub next_energy_in_seconds: Option<u64>,
    pub owned_avatars: BTreeSet<String>,
    pub active_avatar: String,
    pub premium: bool,
}

impl WalletView {
    pub fn new(wallet: &Wallet, economy: &Economy, now: DateTime<Utc>) -> Self {
        let energy_max = economy.energy_max(wallet);
        let next_energy_in_seconds = (wallet.energy < energy_max).then(|| {
            let due = wallet.energy_last_refill
                + chrono::Duration::minutes(economy.config.energy_regen_minutes as i64);
            (due - now).num_seconds().max(0) as u64
        });
        Self {
            points: wallet.points,
            energy: wallet.energy,
            energy_max,
            energy_last_refill: wallet.energy_last_refill,
            next_energy_in_seconds,
            owned_avatars: wallet.owned_avatars.clone(),
            active_avatar: wallet.active_avatar.clone(),
            premium: economy.is_premium(wallet),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestView {
    pub id: QuestId,
    pub target: u32,
    pub progress: u32,
    pub claimed: bool,
    pub reward: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestsView {
    pub day_key: NaiveDate,
    pub quests: Vec<QuestView>,
}

impl QuestsView {
    /// `state` must already be rolled over to today.
    pub fn new(state: &QuestState, economy: &Economy) -> Self {
        let reward = economy.config.quest_reward;
        let quest = |id, target: u32, progress: u32| QuestView {
            id,
            target,
            progress: progress.min(target),
            claimed: state.claimed.contains(&id),
            reward,
        };
        Self {
            day_key: state.day_key,
            quests: vec![
                quest(
                    QuestId::CorrectAnswers10,
                    economy.config.quest_correct_target,
                    state.correct_answers,
                ),
                quest(QuestId::FinishOneGame, 1, state.games_finished),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerView {
    pub player_id: String,
    pub name: String,
    pub settings: Settings,
    pub wallet: WalletView,
    pub quests: QuestsView,
    pub stats: Stats,
    pub history: Vec<GameSummary>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

impl PlayerView {
    /// `profile` must already have regenerated energy and rolled-over quests.
    pub fn new(profile: &PlayerProfile, economy: &Economy, now: DateTime<Utc>) -> Self {
        Self {
            player_id: profile.player_id.clone(),
            name: profile.name.clone(),
            settings: profile.settings,
            wallet: WalletView::new(&profile.wallet, economy, now),
            quests: QuestsView::new(&profile.quests, economy),
            stats: profile.stats,
            history: profile.history.clone(),
            created_at: profile.created_at,
            updated_at: profile.updated_at,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoardView {
    pub name: String,
    pub tile_count: Tile,
    /// `[from, to]` pairs; `to < from` is a snake.
    pub jumps: Vec<[Tile; 2]>,
}

impl From<&BoardSpec> for BoardView {
    fn from(b: &BoardSpec) -> Self {
        Self {
            name: b.name().to_string(),
            tile_count: b.tile_count(),
            jumps: b.jumps().iter().map(|(&f, &t)| [f, t]).collect(),
        }
    }
}

/// A question as the player sees it: without the answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardView {
    pub id: String,
    pub kind: PatternKind,
    pub difficulty: Difficulty,
    pub stem: Vec<i64>,
    pub choices: Vec<i64>,
}

impl From<&QuestionCard> for CardView {
    fn from(c: &QuestionCard) -> Self {
        Self {
            id: c.id.clone(),
            kind: c.kind,
            difficulty: c.difficulty,
            stem: c.stem.to_vec(),
            choices: c.choices.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingView {
    pub dice: u8,
    pub card: CardView,
}

impl From<&Pending> for PendingView {
    fn from(p: &Pending) -> Self {
        Self {
            dice: p.dice,
            card: CardView::from(&p.card),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub player_id: String,
    pub board: BoardView,
    pub difficulty: Difficulty,
    pub phase: Phase,
    pub position: Tile,
    pub lifelines: u32,
    pub consecutive_correct: u32,
    pub pending: Option<PendingView>,
    pub total_points: u64,
    pub transcript: Vec<TurnRecord>,
    /// Only reported in test mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl SessionView {
    pub fn new(s: &GameSession, show_seed: bool) -> Self {
        Self {
            session_id: s.session_id.clone(),
            player_id: s.player_id.clone(),
            board: BoardView::from(&s.board),
            difficulty: s.difficulty,
            phase: s.phase(),
            position: s.position(),
            lifelines: s.lifelines(),
            consecutive_correct: s.consecutive_correct(),
            pending: s.pending().map(PendingView::from),
            total_points: s.total_points(),
            transcript: s.transcript().to_vec(),
            seed: show_seed.then_some(s.seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RollView {
    pub dice: u8,
    pub card: CardView,
    pub session: SessionView,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackView {
    pub tag: Feedback,
    pub message: String,
}

impl From<Feedback> for FeedbackView {
    fn from(f: Feedback) -> Self {
        Self {
            tag: f,
            message: f.message().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerView {
    pub record: TurnRecord,
    pub feedback: FeedbackView,
    pub session: SessionView,
    pub player: PlayerView,
}
