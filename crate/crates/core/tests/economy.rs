use std::collections::BTreeMap;

use chrono::{DateTime, Duration, NaiveDate, TimeZone, Utc};
use patternquest_core::economy::{Economy, EconomyError, QuestEvent, QuestState, Wallet};
use patternquest_core::prng::SplitMix64;
use proptest::prelude::*;

fn t0() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2025, 1, 31, 22, 0, 0).unwrap()
}

fn check_wallet(eco: &Economy, w: &Wallet) {
    assert!(w.energy <= eco.energy_max(w), "{w:?}");
    assert!(w.owned_avatars.contains(&w.active_avatar), "{w:?}");
}

/// Random interleavings of every wallet operation while the clock moves
/// forward by random amounts.
#[test]
fn fuzz_operation_sequences() {
    let eco = Economy::default();
    let ids: Vec<String> = eco.catalog.entries().iter().map(|a| a.id.clone()).collect();
    let mut rng = SplitMix64::new(77);
    for _ in 0..100_000 {
        let mut now = t0() + Duration::minutes(rng.below(60 * 24 * 30) as i64);
        let mut w = eco.new_wallet(now);
        w.points = rng.below(800);
        let mut q = QuestState::fresh(now);
        let mut quest_income: BTreeMap<NaiveDate, u64> = BTreeMap::new();
        for _ in 0..1 + rng.below(30) {
            now += Duration::minutes(rng.below(200) as i64);
            let before = w.clone();
            match rng.below(7) {
                0 | 1 => w = eco.award_answer(&w, rng.below(2) == 0),
                2 => w = eco.award_victory(&w),
                3 => {
                    let id = &ids[rng.below(ids.len() as u64) as usize];
                    match eco.purchase_avatar(&w, id) {
                        Ok(next) => {
                            let price = eco.catalog.get(id).unwrap().price_points;
                            assert_eq!(next.points, before.points - price);
                            assert!(next.owned_avatars.contains(id));
                            w = next;
                        }
                        Err(EconomyError::InsufficientPoints { price, available }) => {
                            assert!(price > available);
                            assert_eq!(available, w.points);
                        }
                        Err(EconomyError::AlreadyOwned(_)) => assert!(w.owned_avatars.contains(id)),
                        Err(e) => panic!("unexpected {e}"),
                    }
                    if !w.owned_avatars.contains(id) || before.owned_avatars.contains(id) {
                        // Failed purchase: bit-identical wallet.
                        assert_eq!(serde_json::to_vec(&before).unwrap(), serde_json::to_vec(&w).unwrap());
                    }
                }
                4 => {
                    let id = &ids[rng.below(ids.len() as u64) as usize];
                    if let Ok(next) = eco.equip_avatar(&w, id) {
                        w = next;
                    } else {
                        assert!(!w.owned_avatars.contains(id));
                    }
                }
                5 => match eco.consume_energy(&w, now) {
                    Ok(next) => {
                        assert!(next.energy < eco.energy_max(&next));
                        w = next;
                    }
                    Err(EconomyError::EnergyDepleted { minutes_to_next }) => {
                        assert!((1..=20).contains(&minutes_to_next));
                        assert_eq!(eco.regenerate(&w, now).energy, 0);
                    }
                    Err(e) => panic!("unexpected {e}"),
                },
                _ => {
                    let event = if rng.below(4) == 0 {
                        QuestEvent::GameFinished
                    } else {
                        QuestEvent::CorrectAnswer
                    };
                    let (nq, nw) = eco.record_quest_progress(&q, event, now, &w);
                    assert!(nw.points >= w.points);
                    *quest_income.entry(now.date_naive()).or_default() += nw.points - w.points;
                    assert_eq!(nq.day_key, now.date_naive());
                    q = nq;
                    w = nw;
                }
            }
            check_wallet(&eco, &w);
        }
        for income in quest_income.values() {
            assert!(*income <= 2 * eco.config.quest_reward);
        }
    }
}

#[test]
fn failed_purchase_leaves_wallet_identical() {
    let eco = Economy::default();
    let mut w = eco.new_wallet(t0());
    w.points = 599;
    let snapshot = serde_json::to_vec(&w).unwrap();
    assert_eq!(
        eco.purchase_avatar(&w, "dragon"),
        Err(EconomyError::InsufficientPoints {
            price: 600,
            available: 599
        })
    );
    assert_eq!(eco.purchase_avatar(&w, "starter"), Err(EconomyError::AlreadyOwned("starter".into())));
    assert_eq!(eco.purchase_avatar(&w, "unicorn"), Err(EconomyError::UnknownAvatar("unicorn".into())));
    assert_eq!(serde_json::to_vec(&w).unwrap(), snapshot);
}

#[test]
fn premium_is_the_most_expensive_avatar() {
    let eco = Economy::default();
    let max = eco.catalog.entries().iter().max_by_key(|a| a.price_points).unwrap();
    assert_eq!(max.id, eco.catalog.premium().id);
}

#[test]
fn quest_rewards_reset_each_utc_day() {
    let eco = Economy::default();
    let mut w = eco.new_wallet(t0());
    let mut q = QuestState::fresh(t0());
    (q, w) = eco.record_quest_progress(&q, QuestEvent::GameFinished, t0(), &w);
    (q, w) = eco.record_quest_progress(&q, QuestEvent::GameFinished, t0(), &w);
    assert_eq!(w.points, 25);
    // 22:00 + 2h is the next UTC day.
    let tomorrow = t0() + Duration::hours(2);
    (q, w) = eco.record_quest_progress(&q, QuestEvent::GameFinished, tomorrow, &w);
    assert_eq!(w.points, 50);
    assert_eq!(q.games_finished, 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn regeneration_ignores_call_frequency(
        energy in 0u32..=5,
        start_offset in 0i64..100_000,
        split in 0i64..10_000,
        rest in 0i64..10_000,
        premium in any::<bool>(),
    ) {
        let eco = Economy::default();
        let mut w = eco.new_wallet(t0());
        if premium {
            w.points = 600;
            w = eco.purchase_avatar(&w, "dragon").unwrap();
        }
        w.energy = energy;
        w.energy_last_refill = t0() + Duration::seconds(start_offset);
        let mid = w.energy_last_refill + Duration::seconds(split);
        let end = mid + Duration::seconds(rest);
        let once = eco.regenerate(&w, end);
        let twice = eco.regenerate(&eco.regenerate(&w, mid), end);
        prop_assert_eq!(&once, &twice);
        prop_assert!(once.energy <= eco.energy_max(&once));
    }

    #[test]
    fn answers_never_reduce_points(points in 0u64..1_000_000, correct in any::<bool>()) {
        let eco = Economy::default();
        let mut w = eco.new_wallet(t0());
        w.points = points;
        let next = eco.award_answer(&w, correct);
        prop_assert_eq!(next.points, points + if correct { 10 } else { 0 });
    }
}
