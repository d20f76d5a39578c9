use std::any::Any;
use std::sync::Arc;

use timed_tx::chain::{
    decode_args, encode_call, parse_trace, CallContext, Contract, ContractFactory, Env, GasSchedule, Ledger, Revert,
    Selector, Transaction, Wei, MAX_CALL_DEPTH, WEI_PER_ETHER,
};
use timed_tx::contracts::{code, sel, signatures, StandardFactory, Target, TAG_TARGET};
use timed_tx::crypto::{seeded_rng, Address, KeyKind, KeyPair};

const RELAY_TAG: &[u8; 4] = b"RLY\0";

fn relay_sel() -> Selector {
    Selector::of("relay(address[])")
}

fn fail_sel() -> Selector {
    Selector::of("fail()")
}

/// Forwards along `route`, bumping a counter at every hop.
#[derive(Clone, Debug, Default)]
struct Relay {
    hits: u64,
}

impl Contract for Relay {
    fn kind(&self) -> &'static str {
        "relay"
    }

    fn function_name(&self, s: Selector) -> Option<&'static str> {
        (s == relay_sel() || s == fail_sel()).then_some("set")
    }

    fn call(&mut self, env: &mut Env<'_>, ctx: &CallContext, s: Selector, args: &[u8]) -> Result<Vec<u8>, Revert> {
        self.hits += 1;
        if s == fail_sel() {
            return Err(Revert::code("boom"));
        }
        let route: Vec<Address> = decode_args(args)?;
        if let Some((next, rest)) = route.split_first() {
            env.call(ctx, next, relay_sel(), &bincode::serialize(&rest.to_vec()).unwrap(), 0)?;
        }
        Ok(Vec::new())
    }

    fn clone_box(&self) -> Box<dyn Contract> {
        Box::new(self.clone())
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

struct Factory;

impl ContractFactory for Factory {
    fn creation_function(&self, code: &[u8]) -> Option<&'static str> {
        if code.starts_with(RELAY_TAG) {
            Some("deploy_target")
        } else {
            StandardFactory.creation_function(code)
        }
    }

    fn instantiate(&self, code: &[u8]) -> Result<Box<dyn Contract>, Revert> {
        if code.starts_with(RELAY_TAG) {
            Ok(Box::new(Relay::default()))
        } else {
            StandardFactory.instantiate(code)
        }
    }
}

struct World {
    ledger: Ledger,
    alice: KeyPair,
    bob: KeyPair,
}

fn world() -> World {
    let mut rng = seeded_rng(5);
    let alice = KeyPair::generate(KeyKind::Account, &mut rng);
    let bob = KeyPair::generate(KeyKind::Account, &mut rng);
    let ledger = Ledger::new(
        GasSchedule::default(),
        Arc::new(Factory),
        &[(alice.address(), 100 * WEI_PER_ETHER), (bob.address(), WEI_PER_ETHER)],
    );
    World { ledger, alice, bob }
}

impl World {
    fn send(&mut self, to: Option<Address>, value: Wei, data: Vec<u8>) -> timed_tx::chain::Receipt {
        let nonce = self.ledger.nonce(&self.alice.address());
        self.ledger.submit_tx(Transaction::signed(&self.alice, to, value, nonce, data)).unwrap()
    }

    fn relay(&mut self) -> Address {
        self.send(None, 0, RELAY_TAG.to_vec()).created.unwrap()
    }

    fn hits(&self, a: &Address) -> u64 {
        self.ledger.view::<Relay>(a).unwrap().hits
    }
}

#[test]
fn plain_transfer() {
    let mut w = world();
    let to = w.bob.address();
    let r = w.send(Some(to), WEI_PER_ETHER, Vec::new());
    assert!(r.is_success());
    assert_eq!(r.gas_used, 21000);
    assert_eq!(r.fee_wei, 21000 * 22_900_000_000);
    assert_eq!(w.ledger.balance(&to), 2 * WEI_PER_ETHER);
    assert_eq!(w.ledger.balance(&w.alice.address()), 99 * WEI_PER_ETHER - r.fee_wei);
    assert_eq!(w.ledger.burned(), r.fee_wei);
    assert_eq!(w.ledger.conserved_total(), w.ledger.total_supply());
}

#[test]
fn unknown_selector_reverts_and_keeps_state() {
    let mut w = world();
    let target = w.send(None, 0, code(TAG_TARGET, &())).created.unwrap();
    let before = w.ledger.balance(&w.alice.address());
    let r = w.send(Some(target), 0, encode_call(Selector::of("nope()"), &()));
    assert_eq!(r.status.revert_code(), Some("unknown-recipient-function"));
    assert_eq!(r.gas_used, 21000);
    assert_eq!(w.ledger.balance(&w.alice.address()), before - r.fee_wei);
    assert_eq!(w.ledger.view::<Target>(&target).unwrap().writes, 0);
    let ok = w.send(Some(target), 0, encode_call(sel(signatures::SET), &9u64));
    assert!(ok.is_success());
    assert_eq!(ok.gas_used, 43000);
    assert_eq!(w.ledger.view::<Target>(&target).unwrap().value, 9);
}

#[test]
fn revert_rolls_back_value_and_state() {
    let mut w = world();
    let a = w.relay();
    let before = w.ledger.balance(&w.alice.address());
    let r = w.send(Some(a), 5, encode_call(fail_sel(), &()));
    assert!(!r.is_success());
    assert_eq!(w.hits(&a), 0);
    assert_eq!(w.ledger.balance(&a), 0);
    assert_eq!(w.ledger.balance(&w.alice.address()), before - r.fee_wei);
    assert_eq!(w.ledger.nonce(&w.alice.address()), 2);
}

#[test]
fn nested_revert_propagates() {
    let mut w = world();
    let a = w.relay();
    let b = w.relay();
    // b is asked to relay on to an address without code.
    let r = w.send(Some(a), 0, encode_call(relay_sel(), &vec![b, w.bob.address()]));
    assert_eq!(r.status.revert_code(), Some("unknown-recipient-function"));
    assert_eq!((w.hits(&a), w.hits(&b)), (0, 0));
}

#[test]
fn reentrancy_is_rejected() {
    let mut w = world();
    let a = w.relay();
    let b = w.relay();
    let r = w.send(Some(a), 0, encode_call(relay_sel(), &vec![b, a]));
    assert_eq!(r.status.revert_code(), Some("reentrant-call"));
    let ok = w.send(Some(a), 0, encode_call(relay_sel(), &vec![b]));
    assert!(ok.is_success());
    assert_eq!((w.hits(&a), w.hits(&b)), (1, 1));
}

#[test]
fn depth_limit() {
    let mut w = world();
    let relays: Vec<Address> = (0..=MAX_CALL_DEPTH).map(|_| w.relay()).collect();
    let fits = w.send(Some(relays[0]), 0, encode_call(relay_sel(), &relays[1..MAX_CALL_DEPTH].to_vec()));
    assert!(fits.is_success());
    let deep = w.send(Some(relays[0]), 0, encode_call(relay_sel(), &relays[1..].to_vec()));
    assert_eq!(deep.status.revert_code(), Some("call-depth"));
}

#[test]
fn rejected_transactions_leave_no_trace() {
    let mut w = world();
    let stale = Transaction::signed(&w.alice, Some(w.bob.address()), 1, 7, Vec::new());
    assert!(w.ledger.submit_tx(stale).is_err());
    let broke = Transaction::signed(&w.bob, Some(w.alice.address()), 2 * WEI_PER_ETHER, 0, Vec::new());
    assert!(w.ledger.submit_tx(broke).is_err());
    let mut forged = Transaction::signed(&w.alice, Some(w.bob.address()), 1, 0, Vec::new());
    forged.value = 2;
    assert!(w.ledger.submit_tx(forged).is_err());
    assert!(w.ledger.trace().is_empty());
}

#[test]
fn proxy_deployment_gas_and_trace_round_trip() {
    use timed_tx::contracts::bulletin::BulletinInit;
    use timed_tx::contracts::{Economics, ProxyInit, Timer, TAG_BULLETIN};
    let mut w = world();
    let bulletin = w.send(None, 0, code(TAG_BULLETIN, &BulletinInit { economics: Economics::default() }));
    assert_eq!(bulletin.gas_used, 3_200_000);
    let init = ProxyInit {
        bulletin: bulletin.created.unwrap(),
        timer: Timer::new(10, 20),
        leader_commitment: timed_tx::crypto::hash(b"c"),
        supplemental_code_hash: timed_tx::crypto::hash(b"s"),
    };
    let r = w.send(None, WEI_PER_ETHER, code(timed_tx::contracts::TAG_PROXY, &init));
    assert!(r.is_success(), "{:?}", r.status);
    assert_eq!(r.gas_used, 1_114_612);
    assert_eq!(w.ledger.balance(&r.created.unwrap()), WEI_PER_ETHER);
    let text = w.ledger.trace_text();
    assert_eq!(parse_trace(&text).unwrap(), w.ledger.trace());
    assert!(text.lines().all(|l| l.split('|').count() == 7));
    assert!(text.lines().nth(1).unwrap().contains("|-|create|"));
}
