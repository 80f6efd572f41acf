//! Request handling independent of HTTP. Every operation reads what it
//! needs from the store and writes its result back before returning, so a
//! fresh [`Service`] over the same data directory continues exactly where
//! the previous one stopped.

use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use chrono::{DateTime, Utc};
use patternquest_core::economy::{AvatarCatalog, QuestEvent};
use patternquest_core::persistence::{GameSummary, PlayerProfile, Settings, Store};
use patternquest_core::prng::stream_at;
use patternquest_core::{Difficulty, GameSession, Phase, SessionSetup};

use crate::clock::Clock;
use crate::config::ServiceConfig;
use crate::error::ApiError;
use crate::views::{AnswerView, FeedbackView, PlayerView, QuestsView, RollView, SessionView};

/// Finished games kept in a profile's history, newest last.
pub const HISTORY_LIMIT: usize = 100;

/// Where session seeds come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedPolicy {
    /// System entropy; client-supplied seeds are refused.
    Entropy,
    /// Client seeds accepted. Without one, seeds are drawn from `base`
    /// (or entropy when `base` is `None`).
    TestMode { base: Option<u64> },
}

pub struct Service {
    store: Store,
    config: ServiceConfig,
    clock: Arc<dyn Clock>,
    seeds: SeedPolicy,
    sessions_started: AtomicU64,
}

impl Service {
    pub fn open(
        data_dir: impl Into<PathBuf>,
        config: ServiceConfig,
        clock: Arc<dyn Clock>,
        seeds: SeedPolicy,
    ) -> Result<Self, ApiError> {
        Ok(Self {
            store: Store::open(data_dir)?,
            config,
            clock,
            seeds,
            sessions_started: AtomicU64::new(0),
        })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn test_mode(&self) -> bool {
        matches!(self.seeds, SeedPolicy::TestMode { .. })
    }

    fn now(&self) -> DateTime<Utc> {
        self.clock.now()
    }

    /// Brings time-dependent state (energy, quest day) up to `now`.
    fn refresh(&self, profile: &mut PlayerProfile, now: DateTime<Utc>) {
        let eco = &self.config.economy;
        profile.wallet = eco.regenerate(&profile.wallet, now);
        if profile.quests.day_key != now.date_naive() {
            profile.quests = patternquest_core::economy::QuestState::fresh(now);
        }
    }

    fn view(&self, profile: &PlayerProfile, now: DateTime<Utc>) -> PlayerView {
        PlayerView::new(profile, &self.config.economy, now)
    }

    /// Runs `f` on the refreshed profile under the player's write lock.
    fn update_player<T>(
        &self,
        player_id: &str,
        f: impl FnOnce(&mut PlayerProfile, DateTime<Utc>) -> Result<T, ApiError>,
    ) -> Result<T, ApiError> {
        let now = self.now();
        self.store.with_player(player_id, |p| {
            self.refresh(p, now);
            let out = f(p, now)?;
            p.updated_at = now;
            Ok(out)
        })
    }

    pub fn register(&self, name: &str) -> Result<PlayerView, ApiError> {
        let now = self.now();
        let profile = self.store.register(name, now, &self.config.economy)?;
        Ok(self.view(&profile, now))
    }

    pub fn player(&self, player_id: &str) -> Result<PlayerView, ApiError> {
        let now = self.now();
        let mut profile = self.store.load_profile_at(player_id, now)?;
        self.refresh(&mut profile, now);
        Ok(self.view(&profile, now))
    }

    pub fn update_settings(&self, player_id: &str, settings: Settings) -> Result<PlayerView, ApiError> {
        settings.validate()?;
        self.update_player(player_id, |p, now| {
            p.settings = settings;
            Ok(self.view(p, now))
        })
    }

    pub fn catalog(&self) -> &AvatarCatalog {
        &self.config.economy.catalog
    }

    pub fn purchase(&self, player_id: &str, avatar_id: &str) -> Result<PlayerView, ApiError> {
        self.update_player(player_id, |p, now| {
            p.wallet = self.config.economy.purchase_avatar(&p.wallet, avatar_id)?;
            Ok(self.view(p, now))
        })
    }

    pub fn equip(&self, player_id: &str, avatar_id: &str) -> Result<PlayerView, ApiError> {
        self.update_player(player_id, |p, now| {
            p.wallet = self.config.economy.equip_avatar(&p.wallet, avatar_id)?;
            Ok(self.view(p, now))
        })
    }

    pub fn quests(&self, player_id: &str) -> Result<QuestsView, ApiError> {
        Ok(self.player(player_id)?.quests)
    }

    fn session_seed(&self, requested: Option<u64>) -> Result<u64, ApiError> {
        let n = self.sessions_started.fetch_add(1, Ordering::Relaxed);
        match (self.seeds, requested) {
            (SeedPolicy::Entropy, Some(_)) => Err(ApiError::new(
                "SeedNotAllowed",
                400,
                "session seeds are only accepted in test mode",
            )),
            (SeedPolicy::TestMode { .. }, Some(seed)) => Ok(seed),
            (SeedPolicy::TestMode { base: Some(base) }, None) => Ok(stream_at(base, n)),
            (_, None) => Ok(rand::random()),
        }
    }

    /// Spends one energy and creates a session with rules fixed by the
    /// player's current avatar.
    pub fn start_session(
        &self,
        player_id: &str,
        difficulty: Difficulty,
        seed: Option<u64>,
    ) -> Result<SessionView, ApiError> {
        let seed = self.session_seed(seed)?;
        let session = self.update_player(player_id, |p, now| {
            let eco = &self.config.economy;
            p.wallet = eco.consume_energy(&p.wallet, now)?;
            let session = GameSession::start(SessionSetup {
                session_id: uuid::Uuid::new_v4().simple().to_string(),
                player_id: p.player_id.clone(),
                board: self.config.board.clone(),
                difficulty,
                rules: eco.session_rules(&p.wallet),
                seed,
            });
            // Saved inside the player lock: if this fails the energy is not
            // spent either.
            self.store.save_session(&session)?;
            Ok(session)
        })?;
        Ok(SessionView::new(&session, self.test_mode()))
    }

    pub fn session(&self, session_id: &str) -> Result<SessionView, ApiError> {
        let session = self.store.load_session(session_id)?;
        Ok(SessionView::new(&session, self.test_mode()))
    }

    pub fn roll(&self, session_id: &str) -> Result<RollView, ApiError> {
        self.store.with_session(session_id, |s| {
            let pending = s.roll(&self.config.generator)?.clone();
            Ok(RollView {
                dice: pending.dice,
                card: (&pending.card).into(),
                session: SessionView::new(s, self.test_mode()),
            })
        })
    }

    /// Applies the answer, then credits the turn's points, quest progress,
    /// stats and (for a finished game) history to the player.
    pub fn answer(&self, session_id: &str, choice: usize) -> Result<AnswerView, ApiError> {
        self.store.with_session(session_id, |s| {
            let record = s.answer(choice)?.clone();
            let finished = s.phase().is_terminal();
            let eco = &self.config.economy;
            let player = self.update_player(&s.player_id, |p, now| {
                // Points follow the session's own rules so the wallet always
                // matches the transcript, even if the avatar changed mid-game.
                p.wallet.points += record.points_delta;
                p.stats.questions_answered += 1;
                if record.correct {
                    p.stats.correct_answers += 1;
                    (p.quests, p.wallet) =
                        eco.record_quest_progress(&p.quests, QuestEvent::CorrectAnswer, now, &p.wallet);
                }
                if finished {
                    let victory = s.phase() == Phase::Victory;
                    p.stats.games_played += 1;
                    p.stats.victories += victory as u64;
                    (p.quests, p.wallet) =
                        eco.record_quest_progress(&p.quests, QuestEvent::GameFinished, now, &p.wallet);
                    p.history.push(GameSummary {
                        session_id: s.session_id.clone(),
                        victory,
                        turns: s.transcript().len() as u32,
                        points: s.total_points(),
                        finished_at: now,
                    });
                    let excess = p.history.len().saturating_sub(HISTORY_LIMIT);
                    p.history.drain(..excess);
                }
                Ok(self.view(p, now))
            })?;
            Ok(AnswerView {
                feedback: FeedbackView::from(record.feedback),
                record,
                session: SessionView::new(s, self.test_mode()),
                player,
            })
        })
    }

    pub fn flush(&self) -> Result<(), ApiError> {
        Ok(self.store.flush()?)
    }
}
