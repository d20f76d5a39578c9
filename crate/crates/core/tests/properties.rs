mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rayon::prelude::*;
use timed_tx::chain::{encode, encode_call, GasSchedule, WEI_PER_ETHER};
use timed_tx::contracts::proxy::FollowArgs;
use timed_tx::contracts::{sel, signatures as sig, Economics, Payload, ServiceState};
use timed_tx::crypto::{KeyKind, KeyPair};
use timed_tx::protocol::{FollowerSpec, Path, PayloadSpec, Simulation};

use common::*;

fn honest_variant(seed: u64) -> timed_tx::protocol::Scenario {
    let shapes = [(1, 1, 1), (1, 1, 3), (2, 2, 3), (2, 1, 2), (1, 2, 4)];
    let (l, t, n) = shapes[(seed % shapes.len() as u64) as usize];
    let mut sc = honest(l, t, n, (l * n) as usize + (seed % 4) as usize, seed);
    for i in 0..(seed / 5 % 3) {
        let payload = if i % 2 == 0 {
            PayloadSpec::Transfer { value: 1000 + i as u128 }
        } else {
            PayloadSpec::Invoke { value: 0, set: seed }
        };
        sc.followers.push(FollowerSpec { fund: WEI_PER_ETHER / 10, fee: None, payload });
    }
    sc
}

#[test]
fn honest_runs_convict_nobody() {
    let failures: Vec<u64> = (0..1000u64)
        .into_par_iter()
        .filter(|&seed| {
            let sim = run(honest_variant(seed));
            let s = sim.summary();
            let ok = s.convictions.is_empty()
                && s.terminal == ServiceState::Success
                && s.path.current == Path::Opt
                && s.conserved
                && s.executed_payloads == s.total_payloads
                && sim.ledger.balance(&sim.bulletin) >= sim.board().required_balance();
            !ok
        })
        .collect();
    assert!(failures.is_empty(), "seeds with a bad honest run: {failures:?}");
}

#[test]
fn optimistic_op_count() {
    for followers in 0..4u64 {
        let mut sc = honest(2, 2, 3, 8, 40 + followers);
        for _ in 0..followers {
            sc.followers.push(FollowerSpec { fund: 0, fee: None, payload: PayloadSpec::Transfer { value: 0 } });
        }
        let s = run(sc).summary();
        let mut want = BTreeMap::from([
            ("deploy_proxy".to_string(), 1),
            ("lead".to_string(), 1),
            ("execute".to_string(), 1 + followers),
        ]);
        if followers > 0 {
            want.insert("follow".to_string(), followers);
        }
        assert_eq!(s.service_ops, want);
    }
}

#[test]
fn same_seed_same_everything() {
    for seed in [1, 2, 3] {
        let sc = honest_variant(seed)
            .with_injection(timed_tx::protocol::InjectionTarget::Slot(0), timed_tx::protocol::Misbehavior::Fake);
        let (a, b) = (run(sc.clone()), run(sc));
        assert_eq!(a.ledger.trace_text(), b.ledger.trace_text());
        assert_eq!(a.summary(), b.summary());
        assert_eq!(a.bus.messages(), b.bus.messages());
    }
}

fn contains(hay: &[u8], needle: &[u8]) -> bool {
    hay.windows(needle.len()).any(|w| w == needle)
}

#[test]
fn payloads_stay_hidden_until_execution() {
    let marker: u64 = 0x5eed_f00d_cafe_beef;
    let mut sc = honest(2, 2, 3, 8, 50);
    sc.leader.payload = PayloadSpec::Invoke { value: 0, set: marker };
    sc.followers.push(FollowerSpec { fund: 0, fee: None, payload: PayloadSpec::Invoke { value: 0, set: marker + 1 } });
    let sim = run(sc);
    let needles: Vec<Vec<u8>> = [marker, marker + 1]
        .iter()
        .flat_map(|m| {
            let call = encode_call(sel(sig::SET), m);
            vec![encode(&Payload::call(sim.target, 0, call.clone())), call, m.to_le_bytes().to_vec()]
        })
        .collect();
    let first_exec = sim.ledger.log().iter().position(|(_, r)| r.function == "execute").expect("executed");
    for (tx, _) in &sim.ledger.log()[..first_exec] {
        for n in &needles {
            assert!(!contains(&tx.data, n), "payload bytes in a pre-execution transaction");
        }
    }
    let trace = sim.ledger.trace_text();
    for n in &needles {
        assert!(!trace.contains(&hex::encode(n)));
    }
    for m in sim.bus.messages() {
        let body = sim.bus.get(&m.body_digest).unwrap();
        for n in &needles {
            assert!(!contains(body, n), "plaintext payload on the off-chain channel");
        }
    }
}

#[test]
fn coalitions_below_threshold_learn_too_few_shares() {
    for (l, t, n) in [(2, 2, 3), (3, 2, 3), (2, 3, 4), (1, 3, 5)] {
        assert!(worst_coalition(l, t, n, 60) < t as usize, "{{{l},{t},{n}}}");
    }
}

#[test]
fn misbehavior_matrix_convicts_only_offenders() {
    for cell in misbehavior_matrix(70) {
        assert!(cell.path_ok(), "slot {} {:?}: {:?}", cell.slot, cell.offense, cell.summary.path);
        assert!(cell.conviction_ok(), "slot {} {:?}: {:?}", cell.slot, cell.offense, cell.summary.convictions);
        assert!(cell.summary.conserved);
    }
}

#[test]
fn pairs_of_offenders_are_both_convicted() {
    use timed_tx::protocol::{InjectionTarget, Misbehavior};
    let offenses = MATRIX_OFFENSES;
    for (i, a) in offenses.iter().enumerate() {
        for b in &offenses[i..] {
            let sc = honest(2, 2, 3, 8, 80)
                .with_injection(InjectionTarget::Slot(1), *a)
                .with_injection(InjectionTarget::Slot(4), *b);
            let s = run(sc).summary();
            let got: Vec<_> = s
                .convictions
                .iter()
                .map(|c| (c.slot, c.offense))
                .collect::<std::collections::BTreeSet<_>>()
                .into_iter()
                .collect();
            assert_eq!(got, vec![(1, expected_offense(*a)), (4, expected_offense(*b))], "{a:?} {b:?}");
            assert!(s.conserved);
            let _ = Misbehavior::ALL;
        }
    }
}

#[test]
fn offline_members_can_still_fail_safely() {
    for seed in 0..40 {
        let mut sc = honest(2, 2, 3, 8, 90 + seed);
        sc.online_probability = 0.6;
        let sim = run(sc);
        let s = sim.summary();
        assert!(s.conserved);
        assert!(s.terminal.is_terminal());
        // Anyone convicted failed to publish a genuine key on chain.
        for c in &s.convictions {
            assert_eq!(c.offense, timed_tx::contracts::Offense::Missing);
        }
    }
}

#[derive(Clone, Debug)]
enum Action {
    Advance(u8),
    Follow(u8, u8),
    Leak(u8, bool),
    Execute(u8),
    Deploy(u8),
    Reveal(u8, bool),
    Report(u8, u8, bool),
    Settle,
    Invalid(u8, u8),
    Withdraw(u8),
}

fn action() -> impl Strategy<Value = Action> {
    prop_oneof![
        (1u8..6).prop_map(Action::Advance),
        (any::<u8>(), any::<u8>()).prop_map(|(a, b)| Action::Follow(a, b)),
        (any::<u8>(), any::<bool>()).prop_map(|(a, b)| Action::Leak(a, b)),
        any::<u8>().prop_map(Action::Execute),
        any::<u8>().prop_map(Action::Deploy),
        (any::<u8>(), any::<bool>()).prop_map(|(a, b)| Action::Reveal(a, b)),
        (any::<u8>(), any::<u8>(), any::<bool>()).prop_map(|(a, b, c)| Action::Report(a, b, c)),
        Just(Action::Settle),
        (any::<u8>(), any::<u8>()).prop_map(|(a, b)| Action::Invalid(a, b)),
        any::<u8>().prop_map(Action::Withdraw),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// Random call sequences either transition or revert, and never break
    /// conservation or escrow.
    #[test]
    fn random_calls_keep_invariants(seed in 0u64..1000, actions in proptest::collection::vec(action(), 1..40)) {
        let mut sim = Simulation::setup(honest(1, 2, 3, 5, seed), Economics::default(), GasSchedule::default()).unwrap();
        sim.leader_schedule().unwrap();
        let proxy = sim.schedule.as_ref().unwrap().proxy;
        let nl = 3usize;
        let bundle = sim.bundle();
        let mut rng = timed_tx::crypto::seeded_rng(seed);
        let stray = *KeyPair::generate(KeyKind::Service, &mut rng).secret();
        let mut outcome = None;
        for a in actions {
            let actor = |i: u8| sim.member_key(i as usize % nl);
            let r = match a {
                Action::Advance(k) => { sim.ledger.advance_block(k as u64); None }
                Action::Follow(i, fee) => {
                    let f = sim.leader.clone();
                    let args = FollowArgs { commitment: timed_tx::crypto::hash(&[i]), fee: fee as u128 * 1_000_000_000_000_000 / 16 };
                    let _ = i;
                    Some(sim.tx(&f, Some(proxy), args.fee + 1, encode_call(sel(sig::FOLLOW), &args)))
                }
                Action::Leak(i, real) => {
                    let slot = i as usize % nl;
                    let sk = if real { sim.member_secret(slot) } else { stray };
                    let pk = sim.schedule.as_ref().unwrap().committee_pks[slot];
                    let o = sim.observer.clone();
                    Some(sim.tx(&o, Some(proxy), 0, encode_call(sel(sig::LEAK), &(sk, pk))))
                }
                Action::Execute(i) => {
                    let k = actor(i);
                    let sched = sim.schedule.as_ref().unwrap();
                    let pt = timed_tx::crypto::decrypt(sched.service_key.secret(), &bundle.payload_ct).unwrap();
                    let s: timed_tx::protocol::sim::SealedPayload = bincode::deserialize(&pt).unwrap();
                    let args = timed_tx::contracts::proxy::ExecuteArgs { payload: s.payload, salt: s.salt, entry: s.entry, sig: s.sig };
                    Some(sim.tx(&k, Some(proxy), 0, encode_call(sel(sig::EXECUTE), &args)))
                }
                Action::Deploy(i) => {
                    let k = actor(i);
                    let args = timed_tx::contracts::proxy::DeployArgs { proxy, code: bundle.supplemental_code.clone(), sig: bundle.vrs_u };
                    Some(sim.tx(&k, Some(proxy), 0, encode_call(sel(sig::DEPLOY), &args)))
                }
                Action::Reveal(i, real) => match sim.proxy().unwrap().supplemental() {
                    None => None,
                    Some(cs) => {
                        let slot = i as usize % nl;
                        let sk = if real { sim.member_secret(slot) } else { stray };
                        let k = actor(i);
                        Some(sim.tx(&k, Some(cs), 0, encode_call(sel(sig::REVEAL), &sk)))
                    }
                },
                Action::Report(i, j, fake) => match sim.proxy().unwrap().supplemental() {
                    None => None,
                    Some(cs) => {
                        let target = sim.schedule.as_ref().unwrap().committee[j as usize % nl];
                        let k = actor(i);
                        let f = if fake { sig::FAKE } else { sig::MISSING };
                        Some(sim.tx(&k, Some(cs), 0, encode_call(sel(f), &target)))
                    }
                },
                Action::Settle => {
                    let l = sim.leader.clone();
                    let b = sim.bulletin;
                    Some(sim.tx(&l, Some(b), 0, encode_call(sel(sig::SETTLE), &proxy)))
                }
                Action::Invalid(i, j) => {
                    let k = actor(i);
                    let b = sim.bulletin;
                    Some(sim.tx(&k, Some(b), 0, encode_call(sel(sig::INVALID), &(proxy, j as u32 % 5))))
                }
                Action::Withdraw(i) => {
                    let k = actor(i);
                    let b = sim.bulletin;
                    Some(sim.tx(&k, Some(b), 0, encode_call(sel(sig::WITHDRAW), &(Economics::default().delta_d))))
                }
            };
            if let Some(r) = r {
                // Only balance shortfalls may be rejected outright.
                match r {
                    Ok(_) => {}
                    Err(timed_tx::protocol::SimError::Chain(timed_tx::chain::ChainError::InsufficientBalance { .. })) => {}
                    Err(e) => prop_assert!(false, "unexpected rejection {e}"),
                }
            }
            prop_assert_eq!(sim.ledger.conserved_total(), sim.ledger.total_supply());
            prop_assert!(sim.ledger.balance(&sim.bulletin) >= sim.board().required_balance());
            prop_assert!(sim.ledger.balance(&proxy) >= sim.proxy().unwrap().required_balance());
            let now = sim.service().unwrap().outcome;
            if outcome.is_some() {
                prop_assert_eq!(now, outcome);
            }
            outcome = now;
        }
    }
}
