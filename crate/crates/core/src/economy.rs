//! Points, energy, daily quests and the avatar shop.
//!
//! Every operation is a value transformation: it borrows the current wallet
//! (and quest state) and returns the next one, so a failed operation leaves
//! the caller's copy untouched.

use std::collections::BTreeSet;
use std::path::Path;

use chrono::{DateTime, Duration, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::gameplay::SessionRules;

/// Missing keys in a config file fall back to these defaults.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EconomyConfig {
    pub points_per_correct: u64,
    pub victory_bonus: u64,
    pub quest_reward: u64,
    pub energy_max_base: u32,
    pub energy_regen_minutes: u32,
    pub premium_energy_max: u32,
    pub premium_per_correct_bonus: u64,
    pub lifeline_cap: u32,
    pub starting_lifelines: u32,
    pub streak_for_lifeline: u32,
    pub quest_correct_target: u32,
}

impl Default for EconomyConfig {
    fn default() -> Self {
        Self {
            points_per_correct: 10,
            victory_bonus: 50,
            quest_reward: 25,
            energy_max_base: 5,
            energy_regen_minutes: 20,
            premium_energy_max: 7,
            premium_per_correct_bonus: 2,
            lifeline_cap: 5,
            starting_lifelines: 3,
            streak_for_lifeline: 5,
            quest_correct_target: 10,
        }
    }
}

impl EconomyConfig {
    pub fn session_rules(&self, premium: bool) -> SessionRules {
        let bonus = if premium { self.premium_per_correct_bonus } else { 0 };
        SessionRules {
            starting_lifelines: self.starting_lifelines,
            lifeline_cap: self.lifeline_cap,
            streak_for_lifeline: self.streak_for_lifeline,
            points_per_correct: self.points_per_correct + bonus,
            victory_bonus: self.victory_bonus,
        }
    }

    pub fn validate(&self) -> Result<(), EconomyError> {
        let positive = [
            ("points_per_correct", self.points_per_correct),
            ("victory_bonus", self.victory_bonus),
            ("quest_reward", self.quest_reward),
            ("energy_max_base", self.energy_max_base as u64),
            ("energy_regen_minutes", self.energy_regen_minutes as u64),
            ("premium_energy_max", self.premium_energy_max as u64),
            ("premium_per_correct_bonus", self.premium_per_correct_bonus),
            ("lifeline_cap", self.lifeline_cap as u64),
            ("starting_lifelines", self.starting_lifelines as u64),
            ("streak_for_lifeline", self.streak_for_lifeline as u64),
            ("quest_correct_target", self.quest_correct_target as u64),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(EconomyError::InvalidConfig(format!("{name} must be positive")));
        }
        if self.premium_energy_max < self.energy_max_base {
            return Err(EconomyError::InvalidConfig(
                "premium_energy_max must be at least energy_max_base".into(),
            ));
        }
        if self.starting_lifelines > self.lifeline_cap {
            return Err(EconomyError::InvalidConfig(
                "starting_lifelines exceeds lifeline_cap".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Perk {
    None,
    Premium,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Avatar {
    pub id: String,
    pub display_name: String,
    pub price_points: u64,
    pub perk: Perk,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AvatarCatalog {
    entries: Vec<Avatar>,
}

impl AvatarCatalog {
    /// Requires unique ids, exactly one free starter, and exactly one
    /// premium avatar priced strictly above every other entry.
    pub fn new(entries: Vec<Avatar>) -> Result<Self, EconomyError> {
        let invalid = |m: &str| Err(EconomyError::InvalidCatalog(m.to_string()));
        let ids: BTreeSet<&str> = entries.iter().map(|a| a.id.as_str()).collect();
        if ids.len() != entries.len() {
            return invalid("avatar ids must be unique");
        }
        if entries.iter().filter(|a| a.price_points == 0).count() != 1 {
            return invalid("exactly one avatar must be free");
        }
        let premium: Vec<&Avatar> = entries.iter().filter(|a| a.perk == Perk::Premium).collect();
        let [premium] = premium.as_slice() else {
            return invalid("exactly one avatar must carry the premium perk");
        };
        if entries
            .iter()
            .any(|a| a.id != premium.id && a.price_points >= premium.price_points)
        {
            return invalid("the premium avatar must be strictly the most expensive");
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[Avatar] {
        &self.entries
    }

    pub fn get(&self, id: &str) -> Option<&Avatar> {
        self.entries.iter().find(|a| a.id == id)
    }

    pub fn starter(&self) -> &Avatar {
        self.entries
            .iter()
            .find(|a| a.price_points == 0)
            .expect("catalog invariant")
    }

    pub fn premium(&self) -> &Avatar {
        self.entries
            .iter()
            .find(|a| a.perk == Perk::Premium)
            .expect("catalog invariant")
    }
}

impl Default for AvatarCatalog {
    fn default() -> Self {
        let avatar = |id: &str, name: &str, price, perk| Avatar {
            id: id.into(),
            display_name: name.into(),
            price_points: price,
            perk,
        };
        Self::new(vec![
            avatar("starter", "Starter", 0, Perk::None),
            avatar("scholar", "Scholar", 100, Perk::None),
            avatar("wizard", "Wizard", 250, Perk::None),
            avatar("dragon", "Dragon", 600, Perk::Premium),
        ])
        .expect("bundled catalog is valid")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wallet {
    pub points: u64,
    pub energy: u32,
    pub energy_last_refill: DateTime<Utc>,
    pub owned_avatars: BTreeSet<String>,
    pub active_avatar: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QuestId {
    CorrectAnswers10,
    FinishOneGame,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuestEvent {
    CorrectAnswer,
    /// Any game reaching Victory or Game Over.
    GameFinished,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestState {
    pub day_key: NaiveDate,
    pub correct_answers: u32,
    pub games_finished: u32,
    pub claimed: BTreeSet<QuestId>,
}

impl QuestState {
    pub fn fresh(now: DateTime<Utc>) -> Self {
        Self {
            day_key: now.date_naive(),
            correct_answers: 0,
            games_finished: 0,
            claimed: BTreeSet::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EconomyError {
    #[error("not enough points: need {price}, have {available}")]
    InsufficientPoints { price: u64, available: u64 },
    #[error("avatar {0} is already owned")]
    AlreadyOwned(String),
    #[error("avatar {0} is not owned")]
    NotOwned(String),
    #[error("unknown avatar {0}")]
    UnknownAvatar(String),
    #[error("no energy left; next point in {minutes_to_next} min")]
    EnergyDepleted { minutes_to_next: u64 },
    #[error("invalid economy config: {0}")]
    InvalidConfig(String),
    #[error("invalid avatar catalog: {0}")]
    InvalidCatalog(String),
    #[error("cannot read economy config: {0}")]
    Load(String),
}

/// Config and catalog together; the operations need both.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Economy {
    pub config: EconomyConfig,
    pub catalog: AvatarCatalog,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EconomyFile {
    #[serde(default)]
    economy: Option<EconomyConfig>,
    #[serde(default)]
    avatars: Option<Vec<Avatar>>,
}

impl Economy {
    pub fn new(config: EconomyConfig, catalog: AvatarCatalog) -> Result<Self, EconomyError> {
        config.validate()?;
        Ok(Self { config, catalog })
    }

    /// TOML with an optional `[economy]` table and optional `[[avatars]]`
    /// entries; anything omitted keeps the bundled default.
    pub fn from_toml_str(text: &str) -> Result<Self, EconomyError> {
        let file: EconomyFile =
            toml::from_str(text).map_err(|e| EconomyError::Load(e.to_string()))?;
        let catalog = match file.avatars {
            Some(entries) => AvatarCatalog::new(entries)?,
            None => AvatarCatalog::default(),
        };
        Self::new(file.economy.unwrap_or_default(), catalog)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EconomyError> {
        let text = std::fs::read_to_string(path).map_err(|e| EconomyError::Load(e.to_string()))?;
        Self::from_toml_str(&text)
    }

    pub fn new_wallet(&self, now: DateTime<Utc>) -> Wallet {
        let starter = self.catalog.starter().id.clone();
        Wallet {
            points: 0,
            energy: self.config.energy_max_base,
            energy_last_refill: now,
            owned_avatars: BTreeSet::from([starter.clone()]),
            active_avatar: starter,
        }
    }

    pub fn is_premium(&self, wallet: &Wallet) -> bool {
        self.catalog
            .get(&wallet.active_avatar)
            .is_some_and(|a| a.perk == Perk::Premium)
    }

    pub fn energy_max(&self, wallet: &Wallet) -> u32 {
        if self.is_premium(wallet) {
            self.config.premium_energy_max
        } else {
            self.config.energy_max_base
        }
    }

    pub fn points_for_correct(&self, wallet: &Wallet) -> u64 {
        let bonus = if self.is_premium(wallet) {
            self.config.premium_per_correct_bonus
        } else {
            0
        };
        self.config.points_per_correct + bonus
    }

    /// Rules for a session started by the owner of `wallet`.
    pub fn session_rules(&self, wallet: &Wallet) -> SessionRules {
        self.config.session_rules(self.is_premium(wallet))
    }

    pub fn award_answer(&self, wallet: &Wallet, correct: bool) -> Wallet {
        let mut next = wallet.clone();
        if correct {
            next.points += self.points_for_correct(wallet);
        }
        next
    }

    pub fn award_victory(&self, wallet: &Wallet) -> Wallet {
        let mut next = wallet.clone();
        next.points += self.config.victory_bonus;
        next
    }

    /// Buys `avatar_id` and equips it. All-or-nothing.
    pub fn purchase_avatar(&self, wallet: &Wallet, avatar_id: &str) -> Result<Wallet, EconomyError> {
        let avatar = self
            .catalog
            .get(avatar_id)
            .ok_or_else(|| EconomyError::UnknownAvatar(avatar_id.to_string()))?;
        if wallet.owned_avatars.contains(avatar_id) {
            return Err(EconomyError::AlreadyOwned(avatar_id.to_string()));
        }
        let points = wallet
            .points
            .checked_sub(avatar.price_points)
            .ok_or(EconomyError::InsufficientPoints {
                price: avatar.price_points,
                available: wallet.points,
            })?;
        let mut next = wallet.clone();
        next.points = points;
        next.owned_avatars.insert(avatar.id.clone());
        next.active_avatar = avatar.id.clone();
        next.energy = next.energy.min(self.energy_max(&next));
        Ok(next)
    }

    /// Switches to an owned avatar; energy above the new cap is clipped.
    pub fn equip_avatar(&self, wallet: &Wallet, avatar_id: &str) -> Result<Wallet, EconomyError> {
        if self.catalog.get(avatar_id).is_none() {
            return Err(EconomyError::UnknownAvatar(avatar_id.to_string()));
        }
        if !wallet.owned_avatars.contains(avatar_id) {
            return Err(EconomyError::NotOwned(avatar_id.to_string()));
        }
        let mut next = wallet.clone();
        next.active_avatar = avatar_id.to_string();
        next.energy = next.energy.min(self.energy_max(&next));
        Ok(next)
    }

    /// Lazy regeneration: one energy per whole regen interval since
    /// `energy_last_refill`, capped at the effective max. The refill stamp
    /// advances by every whole interval elapsed, including ones lost to the
    /// cap, so splitting the elapsed time across calls changes nothing.
    pub fn regenerate(&self, wallet: &Wallet, now: DateTime<Utc>) -> Wallet {
        let mut next = wallet.clone();
        let interval = Duration::minutes(self.config.energy_regen_minutes as i64);
        let elapsed = now.signed_duration_since(wallet.energy_last_refill);
        if elapsed < interval {
            return next;
        }
        let intervals = elapsed.num_seconds() / interval.num_seconds();
        let max = self.energy_max(wallet);
        let gained = intervals.min(max as i64) as u32;
        next.energy = wallet.energy.saturating_add(gained).min(max).max(wallet.energy);
        next.energy_last_refill =
            wallet.energy_last_refill + Duration::seconds(interval.num_seconds() * intervals);
        next
    }

    /// Regenerates, then spends one energy to start a game.
    pub fn consume_energy(&self, wallet: &Wallet, now: DateTime<Utc>) -> Result<Wallet, EconomyError> {
        let mut next = self.regenerate(wallet, now);
        if next.energy == 0 {
            let interval = Duration::minutes(self.config.energy_regen_minutes as i64);
            let due = next.energy_last_refill + interval;
            let minutes_to_next = ((due - now).num_seconds().max(0) as u64).div_ceil(60);
            return Err(EconomyError::EnergyDepleted { minutes_to_next });
        }
        next.energy -= 1;
        Ok(next)
    }

    /// Applies `event` to today's quests, rolling over to a fresh day first
    /// if `now` falls on a later UTC date. A quest pays out the first time
    /// its target is reached on a given day.
    pub fn record_quest_progress(
        &self,
        quests: &QuestState,
        event: QuestEvent,
        now: DateTime<Utc>,
        wallet: &Wallet,
    ) -> (QuestState, Wallet) {
        let mut q = if now.date_naive() != quests.day_key {
            QuestState::fresh(now)
        } else {
            quests.clone()
        };
        let mut w = wallet.clone();
        let completed = match event {
            QuestEvent::CorrectAnswer => {
                q.correct_answers += 1;
                (q.correct_answers >= self.config.quest_correct_target)
                    .then_some(QuestId::CorrectAnswers10)
            }
            QuestEvent::GameFinished => {
                q.games_finished += 1;
                Some(QuestId::FinishOneGame)
            }
        };
        if let Some(id) = completed {
            if q.claimed.insert(id) {
                w.points += self.config.quest_reward;
            }
        }
        (q, w)
    }
}
