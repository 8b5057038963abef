use std::collections::BTreeMap;

use fedtoken::contribution::IncentiveMethod;
use fedtoken::ledger::{
    Account, Asset, ClientId, LedgerError, RewardSchedule, ScenarioId, ScenarioSpec, TokenId,
    TokenLedger,
};
use proptest::prelude::*;

const SUPPLY: u64 = 1_000;

fn spec(clients: u32) -> ScenarioSpec {
    ScenarioSpec {
        id: ScenarioId("mnist".into()),
        use_case: "digits".into(),
        reward: RewardSchedule::PreEstablished {
            total: 1_000_000,
            rounds: 10,
        },
        clients,
        aggregation: "fedavg".into(),
        incentive: IncentiveMethod::Equal,
        token_supply_per_client: SUPPLY,
        metadata: BTreeMap::new(),
    }
}

fn joined(clients: u32) -> (TokenLedger, ScenarioId) {
    let mut l = TokenLedger::new();
    let id = l.register_scenario(spec(clients)).unwrap();
    for c in 0..clients {
        l.join_scenario(&id, ClientId(c), true).unwrap();
    }
    (l, id)
}

fn accounts() -> impl Strategy<Value = Account> {
    prop_oneof![
        (0u32..3).prop_map(Account::Client),
        (0u32..3).prop_map(Account::Investor),
        Just(Account::Pool),
        Just(Account::LiquidityProvider),
    ]
}

#[derive(Debug, Clone)]
enum Op {
    Move {
        client: u32,
        from: Account,
        to: Account,
        amount: u64,
    },
    Pay {
        amounts: Vec<u64>,
    },
}

fn ops() -> impl Strategy<Value = Vec<Op>> {
    let op = prop_oneof![
        (0u32..3, accounts(), accounts(), 0u64..600).prop_map(|(client, from, to, amount)| {
            Op::Move {
                client,
                from,
                to,
                amount,
            }
        }),
        prop::collection::vec(0u64..50_000, 3).prop_map(|amounts| Op::Pay { amounts }),
    ];
    prop::collection::vec(op, 0..40)
}

fn run(ops: &[Op]) -> (TokenLedger, u128) {
    let (mut l, id) = joined(3);
    let mut paid = 0u128;
    for (round, op) in ops.iter().enumerate() {
        match op {
            Op::Move {
                client,
                from,
                to,
                amount,
            } => {
                let t = TokenId::new(&id, ClientId(*client));
                let _ = l.transfer(&t, *from, *to, *amount);
            }
            Op::Pay { amounts } => {
                let rewards = amounts
                    .iter()
                    .enumerate()
                    .map(|(c, a)| (ClientId(c as u32), *a))
                    .collect();
                let records = l.distribute_reward(&id, round as u32, &rewards).unwrap();
                paid += records.iter().map(|r| r.amount as u128).sum::<u128>();
            }
        }
    }
    (l, paid)
}

#[test]
fn join_twice_conflicts() {
    let (mut l, id) = joined(2);
    assert!(matches!(
        l.join_scenario(&id, ClientId(0), true),
        Err(LedgerError::Conflict(_))
    ));
    assert!(l.join_scenario(&id, ClientId(5), true).is_err());
}

#[test]
fn holders_split_rewards_pro_rata() {
    let (mut l, id) = joined(1);
    let t = TokenId::new(&id, ClientId(0));
    l.transfer(&t, Account::Client(0), Account::Investor(0), 250)
        .unwrap();
    l.transfer(&t, Account::Client(0), Account::Investor(1), 250)
        .unwrap();
    let rewards = BTreeMap::from([(ClientId(0), 1_000)]);
    let records = l.distribute_reward(&id, 1, &rewards).unwrap();
    let by_account: BTreeMap<Account, u64> =
        records.iter().map(|r| (r.account, r.amount)).collect();
    assert_eq!(by_account[&Account::Client(0)], 500);
    assert_eq!(by_account[&Account::Investor(0)], 250);
    assert_eq!(by_account[&Account::Investor(1)], 250);
}

#[test]
fn odd_rewards_round_toward_the_lowest_account() {
    let (mut l, id) = joined(1);
    let t = TokenId::new(&id, ClientId(0));
    l.transfer(&t, Account::Client(0), Account::Investor(0), 500)
        .unwrap();
    let records = l
        .distribute_reward(&id, 1, &BTreeMap::from([(ClientId(0), 3)]))
        .unwrap();
    let amounts: Vec<(Account, u64)> = records.iter().map(|r| (r.account, r.amount)).collect();
    assert_eq!(
        amounts,
        vec![(Account::Client(0), 2), (Account::Investor(0), 1)]
    );
}

#[test]
fn non_minting_clients_are_paid_directly() {
    let mut l = TokenLedger::new();
    let id = l.register_scenario(spec(1)).unwrap();
    assert_eq!(l.join_scenario(&id, ClientId(0), false).unwrap(), 0);
    let records = l
        .distribute_reward(&id, 1, &BTreeMap::from([(ClientId(0), 77)]))
        .unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(l.holdings().numeraire_balance(Account::Client(0)), 77);
    assert_eq!(l.holdings().supply(&TokenId::new(&id, ClientId(0))), None);
}

#[test]
fn overdraft_is_rejected_atomically() {
    let (mut l, id) = joined(1);
    let before = l.clone();
    let t = TokenId::new(&id, ClientId(0));
    let err = l
        .transfer(&t, Account::Investor(0), Account::Client(0), 1)
        .unwrap_err();
    assert!(matches!(err, LedgerError::InsufficientFunds { .. }));
    assert_eq!(l, before);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn supply_and_numeraire_are_conserved(ops in ops()) {
        let (l, paid) = run(&ops);
        let h = l.holdings();
        for t in h.tokens() {
            prop_assert_eq!(h.circulating(t), SUPPLY as u128);
            prop_assert_eq!(h.supply(t), Some(SUPPLY));
        }
        prop_assert_eq!(h.total_numeraire(), paid);
    }

    #[test]
    fn every_reward_is_paid_in_full(ops in ops(), amounts in prop::collection::vec(0u64..1_000_000, 3)) {
        let (mut l, _) = run(&ops);
        let id = ScenarioId("mnist".into());
        let rewards: BTreeMap<ClientId, u64> =
            amounts.iter().enumerate().map(|(c, a)| (ClientId(c as u32), *a)).collect();
        let records = l.distribute_reward(&id, 99, &rewards).unwrap();
        for (client, reward) in &rewards {
            let got: u64 = records.iter().filter(|r| r.token.client == *client).map(|r| r.amount).sum();
            prop_assert_eq!(got, *reward);
        }
    }

    #[test]
    fn larger_holders_never_get_less(ops in ops(), reward in 0u64..1_000_000) {
        let (mut l, _) = run(&ops);
        let id = ScenarioId("mnist".into());
        let t = TokenId::new(&id, ClientId(0));
        let holders: Vec<(Account, u64)> = l.holdings().holders(&t).collect();
        let records = l.distribute_reward(&id, 99, &BTreeMap::from([(ClientId(0), reward)])).unwrap();
        let paid = |a: Account| records.iter().find(|r| r.account == a).map_or(0, |r| r.amount);
        for &(a, ba) in &holders {
            for &(b, bb) in &holders {
                if ba > bb {
                    prop_assert!(paid(a) >= paid(b));
                }
            }
            let exact = reward as f64 * ba as f64 / SUPPLY as f64;
            prop_assert!((paid(a) as f64 - exact).abs() < 1.0);
        }
    }

    #[test]
    fn same_operations_give_the_same_ledger(ops in ops()) {
        let (a, _) = run(&ops);
        let (b, _) = run(&ops);
        prop_assert_eq!(&a, &b);
        let json = serde_json::to_string(&a).unwrap();
        let back: TokenLedger = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn asset_strings_round_trip(client in 0u32..1000) {
        let asset = Asset::Token(TokenId::new(&ScenarioId("x".into()), ClientId(client)));
        let json = serde_json::to_string(&asset).unwrap();
        prop_assert_eq!(&json, &format!("\"x/{client}\""));
        prop_assert_eq!(serde_json::from_str::<Asset>(&json).unwrap(), asset);
    }
}
