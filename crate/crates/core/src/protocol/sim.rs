//! Drives one service end to end over the simulated ledger and off-chain bus.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::chain::{encode, encode_call, ChainError, GasSchedule, Ledger, Receipt, Transaction, Wei, WEI_PER_ETHER};
use crate::contracts::bulletin::{vrf_message, BulletinInit, LeadArgs, RegisterArgs};
use crate::contracts::params::ConfigError;
use crate::contracts::proxy::{DeployArgs, ExecuteArgs, FollowArgs};
use crate::contracts::{
    code, deployment_digest, execution_digest, sel, select_committee, signatures as sig, verify_slot, BulletinBoard,
    Economics, Payload, Proxy, ProxyInit, ServiceRecord, ServiceState, StandardFactory, Supplemental, SupplementalInit,
    Timer, TAG_BULLETIN, TAG_PROXY, TAG_SUPPLEMENTAL, TAG_TARGET,
};
use crate::crypto::{
    decrypt, encrypt, hash, hash_concat, onion_peel, onion_wrap, public_key_of, sign, ss_restore, ss_split, vrf_eval,
    vrf_verify, Address, CryptoError, DetRng, Digest32, FieldElement, KeyKind, KeyPair, Onion, PublicKey, Share,
    Signature,
};

use super::bus::{OffchainBus, Step};
use super::scenario::{Injection, InjectionTarget, LeaderTamper, Misbehavior, PayloadSpec, Scenario};
use super::summary::{Conviction, PartyFees, PathState, RunSummary};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("transaction rejected: {0}")]
    Chain(#[from] ChainError),
    #[error("{function} reverted: {code} {detail}")]
    Reverted { function: String, code: String, detail: String },
    #[error("scenario infeasible: {0}")]
    Infeasible(String),
    #[error("unknown injection target: {0}")]
    UnknownTarget(String),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
}

/// Independent RNG stream per purpose, so adding one draw does not shift others.
pub fn stream(seed: u64, label: &str) -> DetRng {
    DetRng::from_seed(hash_concat(&[&seed.to_be_bytes(), label.as_bytes()]).0)
}

#[derive(Clone, Debug)]
pub struct ExecutorActor {
    pub index: usize,
    pub account: KeyPair,
    pub whisper: KeyPair,
    pub service_keys: Vec<KeyPair>,
}

impl ExecutorActor {
    pub fn address(&self) -> Address {
        self.account.address()
    }

    pub fn service_secret(&self, pk: &PublicKey) -> Option<FieldElement> {
        self.service_keys.iter().find(|k| k.public() == pk).map(|k| *k.secret())
    }
}

/// A payload with what `execute` needs, as sealed under the service key.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SealedPayload {
    pub payload: Payload,
    pub salt: [u8; 32],
    pub entry: u32,
    pub sig: Signature,
}

/// Step-4 delivery body.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScheduleBundle {
    pub proxy: Address,
    pub supplemental_code: Vec<u8>,
    pub vrs_u: Signature,
    pub onions: Vec<Onion>,
    pub payload_ct: Vec<u8>,
}

/// Step-7 delivery body.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FollowBundle {
    pub proxy: Address,
    pub payload_ct: Vec<u8>,
}

/// The leader's private view of a scheduled service.
#[derive(Clone, Debug)]
pub struct LeaderSchedule {
    pub service_key: KeyPair,
    pub proxy: Address,
    pub bn: u64,
    pub timer: Timer,
    pub committee: Vec<Address>,
    pub committee_pks: Vec<PublicKey>,
    pub shares: Vec<Share>,
    pub onions: Vec<Onion>,
    pub bundle: Digest32,
    pub supplemental_code: Vec<u8>,
}

#[derive(Clone, Debug, Default)]
pub struct Progress {
    pub cancelled: bool,
    pub rejected_followers: usize,
    /// Keys disclosed to an outside party before the timer, by slot.
    pub leaked: BTreeMap<usize, FieldElement>,
    pub epoch1_keys: BTreeMap<usize, FieldElement>,
    pub epoch1_shares: usize,
    /// Slots whose epoch-1 key was absent or wrong.
    pub detected: BTreeSet<usize>,
    pub fake_keys: BTreeMap<usize, FieldElement>,
    pub watchdog_slot: Option<usize>,
    pub supplemental: Option<Address>,
    pub epoch2_shares: Option<usize>,
    pub executed_epoch: Option<u8>,
    pub executed_entries: BTreeSet<u32>,
}

pub struct Simulation {
    pub scenario: Scenario,
    pub economics: Economics,
    pub ledger: Ledger,
    pub bus: OffchainBus,
    pub operator: KeyPair,
    pub observer: KeyPair,
    pub leader: KeyPair,
    pub followers: Vec<KeyPair>,
    pub executors: Vec<ExecutorActor>,
    pub bulletin: Address,
    pub target: Address,
    pub schedule: Option<LeaderSchedule>,
    /// Injected behaviour by committee slot.
    pub behaviour: BTreeMap<usize, Misbehavior>,
    /// Injections with their resolved committee slot.
    pub injections: Vec<(usize, Injection)>,
    pub path: PathState,
    pub progress: Progress,
    setup_txs: usize,
    rng: DetRng,
    availability: DetRng,
}

fn reverted(r: &Receipt) -> SimError {
    SimError::Reverted {
        function: r.function.clone(),
        code: r.status.revert_code().unwrap_or_default().to_string(),
        detail: match &r.status {
            crate::chain::Status::Revert { detail, .. } => detail.clone(),
            _ => String::new(),
        },
    }
}

fn must(r: Receipt) -> Result<Receipt, SimError> {
    if r.is_success() {
        Ok(r)
    } else {
        Err(reverted(&r))
    }
}

impl Simulation {
    /// Creates accounts, deploys the bulletin board and registers every executor.
    pub fn setup(scenario: Scenario, economics: Economics, schedule: GasSchedule) -> Result<Simulation, SimError> {
        scenario.validate()?;
        economics.validate()?;
        schedule.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let mut rng = stream(scenario.seed, "keys");
        let gen = |rng: &mut DetRng, kind| KeyPair::generate(kind, rng);
        let operator = gen(&mut rng, KeyKind::Account);
        let observer = gen(&mut rng, KeyKind::Account);
        let leader = gen(&mut rng, KeyKind::Account);
        let followers: Vec<KeyPair> = scenario.followers.iter().map(|_| gen(&mut rng, KeyKind::Account)).collect();
        let executors: Vec<ExecutorActor> = (0..scenario.executors)
            .map(|index| ExecutorActor {
                index,
                account: gen(&mut rng, KeyKind::Account),
                whisper: gen(&mut rng, KeyKind::Service),
                service_keys: (0..scenario.keys_per_executor).map(|_| gen(&mut rng, KeyKind::Service)).collect(),
            })
            .collect();

        let ether = WEI_PER_ETHER;
        let deposit = scenario.deposit_units as Wei * economics.delta_d;
        let mut genesis = vec![
            (operator.address(), 10 * ether),
            (observer.address(), ether),
            (leader.address(), scenario.leader.fund + economics.leader_deposit + 10 * ether),
        ];
        for (k, f) in followers.iter().zip(&scenario.followers) {
            genesis.push((k.address(), f.fund + f.fee.unwrap_or(0) + economics.min_follow_fee() + ether));
        }
        for e in &executors {
            genesis.push((e.address(), deposit + ether));
        }
        let ledger = Ledger::new(schedule, Arc::new(StandardFactory), &genesis);

        let mut sim = Simulation {
            availability: stream(scenario.seed, "availability"),
            scenario,
            economics,
            ledger,
            bus: OffchainBus::new(),
            operator,
            observer,
            leader,
            followers,
            executors,
            bulletin: Address::ZERO,
            target: Address::ZERO,
            schedule: None,
            behaviour: BTreeMap::new(),
            injections: Vec::new(),
            path: PathState::default(),
            progress: Progress::default(),
            setup_txs: 0,
            rng: stream(0, "placeholder"),
        };
        sim.rng = stream(sim.scenario.seed, "protocol");

        let op = sim.operator.clone();
        let init = BulletinInit { economics: sim.economics.clone() };
        sim.bulletin = must(sim.tx(&op, None, 0, code(TAG_BULLETIN, &init))?)?.created.expect("created");
        sim.target = must(sim.tx(&op, None, 0, code(TAG_TARGET, &()))?)?.created.expect("created");
        sim.ledger.advance_block(1);
        for e in sim.executors.clone() {
            let args = RegisterArgs {
                whisper_pk: *e.whisper.public(),
                service_pks: e.service_keys.iter().map(|k| *k.public()).collect(),
            };
            must(sim.tx(&e.account, Some(sim.bulletin), deposit, encode_call(sel(sig::REGISTER), &args))?)?;
        }
        sim.ledger.advance_block(1);
        sim.setup_txs = sim.ledger.log().len();
        Ok(sim)
    }

    /// Runs every phase in order.
    pub fn run(scenario: Scenario, economics: Economics, schedule: GasSchedule) -> Result<Simulation, SimError> {
        let mut sim = Simulation::setup(scenario, economics, schedule)?;
        sim.leader_schedule()?;
        sim.verify_committee()?;
        if !sim.progress.cancelled {
            sim.follower_join()?;
            sim.waiting()?;
            sim.epoch1_run()?;
            sim.epoch2_run()?;
        }
        sim.settle()?;
        Ok(sim)
    }

    pub fn tx(&mut self, key: &KeyPair, to: Option<Address>, value: Wei, data: Vec<u8>) -> Result<Receipt, SimError> {
        let nonce = self.ledger.nonce(&key.address());
        Ok(self.ledger.submit_tx(Transaction::signed(key, to, value, nonce, data))?)
    }

    pub fn board(&self) -> &BulletinBoard {
        self.ledger.view(&self.bulletin).expect("bulletin deployed")
    }

    pub fn proxy(&self) -> Option<&Proxy> {
        self.ledger.view(&self.schedule.as_ref()?.proxy)
    }

    pub fn service(&self) -> Option<&ServiceRecord> {
        self.board().service(&self.schedule.as_ref()?.proxy)
    }

    fn sched(&self) -> &LeaderSchedule {
        self.schedule.as_ref().expect("service scheduled")
    }

    fn committee_len(&self) -> usize {
        self.scenario.params.committee_size()
    }

    fn actor_of(&self, a: &Address) -> &ExecutorActor {
        self.executors.iter().find(|e| e.address() == *a).expect("committee member is a known executor")
    }

    pub fn member_key(&self, slot: usize) -> KeyPair {
        self.actor_of(&self.sched().committee[slot]).account.clone()
    }

    pub fn member_secret(&self, slot: usize) -> FieldElement {
        let s = self.sched();
        self.actor_of(&s.committee[slot]).service_secret(&s.committee_pks[slot]).expect("member holds its consumed key")
    }

    fn behaviour_of(&self, slot: usize) -> Option<Misbehavior> {
        self.behaviour.get(&slot).copied()
    }

    /// Member that follows the protocol exactly.
    pub fn is_honest(&self, slot: usize) -> bool {
        self.behaviour_of(slot).is_none()
    }

    fn has_bundle(&self, slot: usize) -> bool {
        !self.scenario.leader.omit_delivery.contains(&slot)
    }

    fn online(&mut self) -> bool {
        let p = self.scenario.online_probability;
        p >= 1.0 || self.availability.gen::<f64>() < p
    }

    fn realize(&mut self, spec: &PayloadSpec, owner: &str) -> Payload {
        match spec {
            PayloadSpec::Transfer { value } => {
                let d = hash_concat(&[b"recipient", self.scenario.name.as_bytes(), owner.as_bytes()]);
                let mut a = [0u8; 20];
                a.copy_from_slice(&d.0[12..]);
                Payload::transfer(Address(a), *value)
            }
            PayloadSpec::Invoke { value, set } => Payload::call(self.target, *value, encode_call(sel(sig::SET), set)),
            PayloadSpec::Create { value } => Payload::create(code(TAG_TARGET, &()), *value),
        }
    }

    fn seal(&mut self, owner: &KeyPair, proxy: &Address, payload: Payload, entry: u32) -> (Digest32, SealedPayload) {
        let salt: [u8; 32] = self.rng.gen();
        let commitment = payload.commitment(&salt);
        let sig = sign(owner.secret(), &execution_digest(proxy, &commitment)).expect("account key signs");
        (commitment, SealedPayload { payload, salt, entry, sig })
    }

    /// Steps 1 to 4: deploy the proxy, select and announce the committee,
    /// share and wrap the service key and deliver everything off-chain.
    pub fn leader_schedule(&mut self) -> Result<(), SimError> {
        let leader = self.leader.clone();
        let sc = self.scenario.clone();
        let b = self.ledger.block();
        let proxy = Address::for_contract(&leader.address(), self.ledger.nonce(&leader.address()));
        let service_key = KeyPair::generate(KeyKind::UserService, &mut self.rng);
        let timer = Timer::new(b + sc.delay, b + sc.delay + sc.length - 1);

        let payload = self.realize(&sc.leader.payload, "leader");
        let (commitment, sealed) = self.seal(&leader, &proxy, payload, 0);
        let reveal_window = self.economics.reveal_window.unwrap_or((timer.epoch2_len() / 2).max(1));
        let cs_init = SupplementalInit {
            proxy,
            bulletin: self.bulletin,
            reveal_window,
            priority_delay: self.economics.priority_delay,
        };
        let supplemental_code = code(TAG_SUPPLEMENTAL, &cs_init);
        let vrs_u = sign(leader.secret(), &deployment_digest(&proxy, &supplemental_code))?;
        let init = ProxyInit {
            bulletin: self.bulletin,
            timer,
            leader_commitment: commitment,
            supplemental_code_hash: hash(&supplemental_code),
        };
        let r = must(self.tx(&leader, None, sc.leader.fund, code(TAG_PROXY, &init))?)?;
        debug_assert_eq!(r.created, Some(proxy));

        let reg = self.board().registration(&proxy).cloned().expect("proxy notified");
        let mut vrf = vrf_eval(service_key.secret(), &vrf_message(&self.bulletin, reg.bn))?;
        let nl = sc.params.committee_size();
        let mut committee =
            select_committee(&reg.snapshot, &vrf.r, nl).map_err(|e| SimError::Infeasible(e.to_string()))?;
        match sc.leader.tamper {
            LeaderTamper::None => {}
            LeaderTamper::SubstituteSlot => {
                let outsider = reg
                    .snapshot
                    .iter()
                    .find(|e| e.available && !committee.contains(&e.addr))
                    .ok_or_else(|| SimError::Infeasible("no executor left to substitute".into()))?;
                committee[sc.leader.tamper_slot] = outsider.addr;
            }
            LeaderTamper::ForgeProof => vrf.proof[40] ^= 0x01,
        }
        let committee_pks: Vec<PublicKey> =
            committee.iter().map(|m| self.board().executor(m).expect("registered").service_pks[0]).collect();

        let payment = self.board().lead_payment(&committee);
        let args = LeadArgs {
            timer,
            pk_u: *service_key.public(),
            vrf,
            bn: reg.bn,
            params: sc.params,
            proxy,
            committee: committee.clone(),
        };
        must(self.tx(&leader, Some(self.bulletin), payment, encode_call(sel(sig::LEAD), &args))?)?;

        let p = sc.params;
        let shares = ss_split(*service_key.secret(), p.t as usize, p.n as usize, &mut self.rng)?;
        let mut onions = Vec::with_capacity(shares.len());
        for s in &shares {
            // Wrapped so the group's first member holds the outermost layer.
            let group: Vec<PublicKey> = committee_pks[p.group(s.index)].iter().rev().copied().collect();
            onions.push(onion_wrap(s, &group, &mut self.rng)?);
        }
        let payload_ct = encrypt(service_key.public(), &encode(&sealed), &mut self.rng)?;
        let bundle = ScheduleBundle {
            proxy,
            supplemental_code: supplemental_code.clone(),
            vrs_u,
            onions: onions.clone(),
            payload_ct,
        };
        let handle = self.bus.put(encode(&bundle));
        let block = self.ledger.block();
        for (slot, m) in committee.iter().enumerate() {
            if !sc.leader.omit_delivery.contains(&slot) {
                self.bus.send(Step::Schedule, block, leader.address(), *m, handle);
            }
        }

        self.schedule = Some(LeaderSchedule {
            service_key,
            proxy,
            bn: reg.bn,
            timer,
            committee,
            committee_pks,
            shares,
            onions,
            bundle: handle,
            supplemental_code,
        });
        self.resolve_injections()?;
        Ok(())
    }

    fn resolve_injections(&mut self) -> Result<(), SimError> {
        let committee = self.sched().committee.clone();
        let mut out = BTreeMap::new();
        let mut resolved = Vec::new();
        for inj in &self.scenario.injections {
            let slot = match inj.target {
                InjectionTarget::Slot(s) => s,
                InjectionTarget::Executor(e) => {
                    let a = self.executors[e].address();
                    committee
                        .iter()
                        .position(|m| *m == a)
                        .ok_or_else(|| SimError::UnknownTarget(format!("executor {e} is not in the committee")))?
                }
            };
            if out.insert(slot, inj.offense).is_some() {
                return Err(SimError::UnknownTarget(format!("slot {slot} has two injections")));
            }
            resolved.push((slot, inj.clone()));
        }
        self.behaviour = out;
        self.injections = resolved;
        Ok(())
    }

    /// Step 5: the first honest member checks the VRF and every slot, and
    /// reports the first invalid one.
    pub fn verify_committee(&mut self) -> Result<(), SimError> {
        self.ledger.advance_block(1);
        let s = self.service().cloned().expect("service led");
        let reg = self.board().registration(&s.proxy).cloned().expect("registered");
        let Some(checker) = (0..s.committee.len()).find(|i| self.is_honest(*i)) else {
            return Ok(());
        };
        let msg = vrf_message(&self.bulletin, s.bn);
        let r_ok = matches!(vrf_verify(&s.pk_u, &msg, &s.vrf.proof), Ok(r) if r == s.vrf.r);
        let bad = if !r_ok {
            Some(1)
        } else {
            (1..=s.committee.len()).find(|j| !verify_slot(&reg.snapshot, &s.vrf.r, &s.committee, *j))
        };
        if let Some(j) = bad {
            let key = self.member_key(checker);
            let data = encode_call(sel(sig::INVALID), &(s.proxy, j as u32));
            must(self.tx(&key, Some(self.bulletin), 0, data)?)?;
            self.progress.cancelled = true;
        }
        Ok(())
    }

    /// Steps 6 and 7 for every configured follower.
    pub fn follower_join(&mut self) -> Result<(), SimError> {
        self.ledger.advance_block(1);
        let proxy = self.sched().proxy;
        let pk_u = *self.sched().service_key.public();
        let committee = self.sched().committee.clone();
        let specs = self.scenario.followers.clone();
        for (i, spec) in specs.iter().enumerate() {
            let key = self.followers[i].clone();
            let entry = self.proxy().expect("proxy").entries().len() as u32;
            let payload = self.realize(&spec.payload, &format!("follower-{i}"));
            let (commitment, sealed) = self.seal(&key, &proxy, payload, entry);
            let fee = spec.fee.unwrap_or(self.economics.min_follow_fee());
            let data = encode_call(sel(sig::FOLLOW), &FollowArgs { commitment, fee });
            let r = self.tx(&key, Some(proxy), spec.fund + fee, data)?;
            if !r.is_success() {
                self.progress.rejected_followers += 1;
                continue;
            }
            self.path.attach_pool();
            let payload_ct = encrypt(&pk_u, &encode(&sealed), &mut self.rng)?;
            let handle = self.bus.put(encode(&FollowBundle { proxy, payload_ct }));
            let block = self.ledger.block();
            for m in &committee {
                self.bus.send(Step::Follow, block, key.address(), *m, handle);
            }
        }
        Ok(())
    }

    /// Step 8: early disclosures during the waiting phase, and their reports.
    pub fn waiting(&mut self) -> Result<(), SimError> {
        let default_at = self.sched().bn + 1 + self.economics.verification_window;
        let start = self.sched().timer.start;
        let mut events: Vec<(u64, usize, Misbehavior)> = self
            .injections
            .iter()
            .filter(|(_, i)| matches!(i.offense, Misbehavior::Leak | Misbehavior::PrematureReveal))
            .map(|(slot, i)| (i.at.unwrap_or(default_at), *slot, i.offense))
            .collect();
        events.sort();
        for (at, slot, m) in events {
            if at >= start {
                return Err(SimError::Infeasible(format!("waiting-phase offense at block {at} is not before {start}")));
            }
            self.ledger.advance_to(at);
            let sk = self.member_secret(slot);
            let pk = self.sched().committee_pks[slot];
            let proxy = self.sched().proxy;
            let reporter = match m {
                Misbehavior::Leak => self.observer.clone(),
                _ => {
                    let from = self.sched().committee[slot];
                    let body = self.bus.put(encode(&(proxy, sk)));
                    self.bus.broadcast(Step::Premature, self.ledger.block(), from, body);
                    match (0..self.committee_len()).find(|i| self.is_honest(*i)) {
                        Some(h) => self.member_key(h),
                        None => continue,
                    }
                }
            };
            // The reporter checks the key before paying for the report.
            if public_key_of(&sk)? != pk {
                continue;
            }
            let data = encode_call(sel(sig::LEAK), &(sk, pk));
            must(self.tx(&reporter, Some(proxy), 0, data)?)?;
            self.progress.leaked.insert(slot, sk);
            self.path.switch_to_pes();
        }
        Ok(())
    }

    pub fn bundle(&self) -> ScheduleBundle {
        let raw = self.bus.get(&self.sched().bundle).expect("bundle stored");
        bincode::deserialize(raw).expect("bundle decodes")
    }

    /// Shares recoverable from `keys` (slot to secret).
    pub fn peel_with(&self, keys: &BTreeMap<usize, FieldElement>) -> Vec<Share> {
        let p = self.scenario.params;
        let onions = &self.bundle().onions;
        let mut out = Vec::new();
        for share in 1..=p.n {
            let slots = p.group(share);
            let sks: Option<Vec<FieldElement>> = slots.map(|s| keys.get(&s).copied()).collect();
            if let Some(sks) = sks {
                if let Ok(s) = onion_peel(&onions[share as usize - 1], &sks) {
                    out.push(s);
                }
            }
        }
        out
    }

    fn genuine(&self, slot: usize, sk: &FieldElement) -> bool {
        public_key_of(sk).ok() == Some(self.sched().committee_pks[slot])
    }

    fn fake_key(&mut self, slot: usize) -> FieldElement {
        if let Some(k) = self.progress.fake_keys.get(&slot) {
            return *k;
        }
        let k = *KeyPair::generate(KeyKind::Service, &mut self.rng).secret();
        self.progress.fake_keys.insert(slot, k);
        k
    }

    /// Restores the service key and executes every decryptable payload not yet run.
    fn execute_all(&mut self, executor: &KeyPair, shares: &[Share]) -> Result<bool, SimError> {
        let t = self.scenario.params.t as usize;
        if shares.len() < t {
            return Ok(false);
        }
        let sk_u = ss_restore(shares, t)?;
        if public_key_of(&sk_u)? != *self.sched().service_key.public() {
            return Ok(false);
        }
        let proxy = self.sched().proxy;
        let mut sealed = Vec::new();
        if let Ok(pt) = decrypt(&sk_u, &self.bundle().payload_ct) {
            sealed.extend(bincode::deserialize::<SealedPayload>(&pt).ok());
        }
        let me = executor.address();
        let handles: Vec<Digest32> = self.bus.inbox(&me, Step::Follow).map(|m| m.body_digest).collect();
        for h in handles {
            let f: Option<FollowBundle> = self.bus.get(&h).and_then(|b| bincode::deserialize(b).ok());
            if let Some(pt) = f.filter(|f| f.proxy == proxy).and_then(|f| decrypt(&sk_u, &f.payload_ct).ok()) {
                sealed.extend(bincode::deserialize::<SealedPayload>(&pt).ok());
            }
        }
        let mut leader_done = false;
        for s in sealed {
            if self.progress.executed_entries.contains(&s.entry) {
                continue;
            }
            let args = ExecuteArgs { payload: s.payload, salt: s.salt, entry: s.entry, sig: s.sig };
            let data = encode_call(sel(sig::EXECUTE), &args);
            let r = self.tx(executor, Some(proxy), 0, data)?;
            if r.is_success() {
                self.progress.executed_entries.insert(s.entry);
                leader_done |= s.entry == 0;
            }
        }
        Ok(leader_done || self.progress.executed_entries.contains(&0))
    }

    /// Steps 9 to 11: off-chain key exchange, restoration and execution.
    pub fn epoch1_run(&mut self) -> Result<(), SimError> {
        self.ledger.advance_to(self.sched().timer.start);
        let block = self.ledger.block();
        let proxy = self.sched().proxy;
        let committee = self.sched().committee.clone();
        let nl = committee.len();
        let mut sent = BTreeMap::new();
        for slot in 0..nl {
            let key = match self.behaviour_of(slot) {
                Some(Misbehavior::Withhold) | Some(Misbehavior::OfflineEpoch1) => None,
                Some(Misbehavior::Fake) => Some(self.fake_key(slot)),
                _ if !self.online() => None,
                _ => Some(self.member_secret(slot)),
            };
            let Some(sk) = key else { continue };
            let body = self.bus.put(encode(&(proxy, sk)));
            for (peer, m) in committee.iter().enumerate() {
                if peer != slot {
                    self.bus.send(Step::KeyExchange, block, committee[slot], *m, body);
                }
            }
            sent.insert(slot, sk);
        }

        let mut valid = BTreeMap::new();
        for slot in 0..nl {
            match sent.get(&slot) {
                Some(sk) if self.genuine(slot, sk) => {
                    valid.insert(slot, *sk);
                }
                _ => {
                    self.progress.detected.insert(slot);
                }
            }
        }
        self.progress.epoch1_keys = sent;
        let shares = self.peel_with(&valid);
        self.progress.epoch1_shares = shares.len();

        let executor = (0..nl).find(|s| self.is_honest(*s) && self.has_bundle(*s) && valid.contains_key(s));
        if let Some(slot) = executor {
            let key = self.member_key(slot);
            if self.execute_all(&key, &shares)? {
                self.progress.executed_epoch = Some(1);
            }
        }
        Ok(())
    }

    /// Steps 12 to 16: supplemental deployment, on-chain reveal, reports and
    /// a second execution attempt. Runs when epoch 1 failed or saw misbehaviour.
    pub fn epoch2_run(&mut self) -> Result<(), SimError> {
        let executed = self.progress.executed_entries.contains(&0);
        if executed && self.progress.detected.is_empty() {
            return Ok(());
        }
        let timer = self.sched().timer;
        self.ledger.advance_to(timer.epoch2_start());
        let nl = self.committee_len();
        let Some(w) = (0..nl).find(|s| self.is_honest(*s) && self.has_bundle(*s)) else {
            return Ok(());
        };
        let watchdog = self.member_key(w);
        let bundle = self.bundle();
        let proxy = self.sched().proxy;
        let args = DeployArgs { proxy, code: bundle.supplemental_code.clone(), sig: bundle.vrs_u };
        let r = must(self.tx(&watchdog, Some(proxy), 0, encode_call(sel(sig::DEPLOY), &args))?)?;
        let cs = Address(r.output[..20].try_into().expect("address output"));
        self.progress.watchdog_slot = Some(w);
        self.progress.supplemental = Some(cs);
        self.path.switch_to_pes();

        for slot in 0..nl {
            let key = match self.behaviour_of(slot) {
                Some(Misbehavior::Withhold) => None,
                Some(Misbehavior::Fake) => Some(self.fake_key(slot)),
                _ if !self.online() => None,
                _ => Some(self.member_secret(slot)),
            };
            if let Some(sk) = key {
                let member = self.member_key(slot);
                must(self.tx(&member, Some(cs), 0, encode_call(sel(sig::REVEAL), &sk))?)?;
            }
        }

        let window = self.ledger.view::<Supplemental>(&cs).expect("supplemental").reveal_window();
        self.ledger.advance_to(window.end + 1);
        let revealed = self.ledger.view::<Supplemental>(&cs).expect("supplemental").revealed().clone();
        let committee = self.sched().committee.clone();
        let mut valid = BTreeMap::new();
        for (slot, m) in committee.iter().enumerate() {
            if self.service().expect("service").convicted.contains_key(m) {
                if let Some(sk) = revealed.get(m).filter(|k| self.genuine(slot, k)) {
                    valid.insert(slot, *sk);
                }
                continue;
            }
            let call = match revealed.get(m) {
                None => Some(sig::MISSING),
                Some(sk) if !self.genuine(slot, sk) => Some(sig::FAKE),
                Some(sk) => {
                    valid.insert(slot, *sk);
                    None
                }
            };
            if let Some(f) = call {
                must(self.tx(&watchdog, Some(cs), 0, encode_call(sel(f), m))?)?;
            }
        }

        let shares = self.peel_with(&valid);
        self.progress.epoch2_shares = Some(shares.len());
        if !executed && self.execute_all(&watchdog, &shares)? {
            self.progress.executed_epoch = Some(2);
        }
        Ok(())
    }

    /// Settles the service once it is terminal.
    pub fn settle(&mut self) -> Result<(), SimError> {
        let Some(s) = self.schedule.as_ref() else {
            return Ok(());
        };
        let proxy = s.proxy;
        if !self.progress.cancelled {
            self.ledger.advance_to(s.timer.end + 1);
        }
        let leader = self.leader.clone();
        must(self.tx(&leader, Some(self.bulletin), 0, encode_call(sel(sig::SETTLE), &proxy))?)?;
        let state = self.service().and_then(|s| s.outcome).expect("settled");
        self.path.finish(state);
        Ok(())
    }

    pub fn summary(&self) -> RunSummary {
        let sched = self.schedule.as_ref();
        let committee: Vec<Address> = sched.map(|s| s.committee.clone()).unwrap_or_default();
        let mut convictions = Vec::new();
        for (_, r) in self.ledger.log() {
            for e in r.events_with("Convicted") {
                let executor = Address::from_hex(e.field("executor").unwrap_or_default()).expect("address field");
                convictions.push(Conviction {
                    slot: committee.iter().position(|m| *m == executor).unwrap_or(usize::MAX),
                    executor,
                    offense: match e.field("offense") {
                        Some("LEAK") => crate::contracts::Offense::Leak,
                        Some("MISSING") => crate::contracts::Offense::Missing,
                        _ => crate::contracts::Offense::Fake,
                    },
                    reporter: Address::from_hex(e.field("reporter").unwrap_or_default()).expect("address field"),
                });
            }
        }
        let mut service_ops = BTreeMap::new();
        let mut service_fee_wei = 0;
        for (_, r) in &self.ledger.log()[self.setup_txs..] {
            if r.is_success() && r.function != "settle" {
                *service_ops.entry(r.function.clone()).or_insert(0u64) += 1;
                service_fee_wei += r.fee_wei;
            }
        }
        let mut fees = PartyFees::default();
        let followers: BTreeSet<Address> = self.followers.iter().map(|k| k.address()).collect();
        let executors: BTreeSet<Address> = self.executors.iter().map(|e| e.address()).collect();
        for (tx, r) in &self.ledger.log()[self.setup_txs..] {
            let slot = if tx.from == self.leader.address() {
                &mut fees.leader
            } else if followers.contains(&tx.from) {
                &mut fees.followers
            } else if executors.contains(&tx.from) {
                &mut fees.executors
            } else {
                &mut fees.others
            };
            *slot += r.fee_wei;
        }
        let terminal = self.path.terminal.unwrap_or(if self.progress.cancelled {
            ServiceState::Cancelled
        } else {
            ServiceState::Failure
        });
        RunSummary {
            name: self.scenario.name.clone(),
            seed: self.scenario.seed,
            params: self.scenario.params,
            committee_size: committee.len(),
            registry_size: self.executors.len(),
            path: self.path,
            terminal,
            executed_epoch: self.progress.executed_epoch,
            executed_payloads: self.progress.executed_entries.len(),
            total_payloads: 1 + self.scenario.followers.len() - self.progress.rejected_followers,
            rejected_followers: self.progress.rejected_followers,
            epoch1_shares: self.progress.epoch1_shares,
            epoch2_shares: self.progress.epoch2_shares,
            watchdog: self.progress.watchdog_slot.map(|s| committee[s]),
            convictions,
            service_ops,
            service_fee_wei,
            fees,
            offchain: self.bus.audit(),
            conserved: self.ledger.conserved_total() == self.ledger.total_supply(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contracts::{Offense, ProtocolParams};
    use crate::protocol::Path;

    fn run(sc: Scenario) -> Simulation {
        Simulation::run(sc, Economics::default(), GasSchedule::default()).unwrap()
    }

    fn small(seed: u64) -> Scenario {
        Scenario::honest("t", ProtocolParams::new(2, 2, 3), 8, seed)
    }

    #[test]
    fn honest_run_is_optimistic() {
        let sim = run(small(1));
        let s = sim.summary();
        assert_eq!(s.terminal, ServiceState::Success);
        assert_eq!(s.path.current, Path::Opt);
        assert_eq!(s.executed_epoch, Some(1));
        assert_eq!(s.epoch1_shares, 3);
        assert!(s.convictions.is_empty());
        assert!(s.conserved);
        assert_eq!(s.service_ops.get("deploy_proxy"), Some(&1));
        assert_eq!(s.service_ops.get("lead"), Some(&1));
        assert_eq!(s.service_ops.get("execute"), Some(&1));
        assert_eq!(s.service_ops.len(), 3);
    }

    #[test]
    fn withholder_is_convicted_in_epoch_two() {
        let sc = small(2).with_injection(InjectionTarget::Slot(1), Misbehavior::Withhold);
        let s = run(sc).summary();
        assert_eq!(s.path.current, Path::Pes);
        assert_eq!(s.terminal, ServiceState::Success);
        assert_eq!(s.executed_epoch, Some(1));
        assert_eq!(s.convictions.len(), 1);
        assert_eq!(s.convictions[0].slot, 1);
        assert_eq!(s.convictions[0].offense, Offense::Missing);
    }

    #[test]
    fn faker_and_leaker() {
        let sc = small(3)
            .with_injection(InjectionTarget::Slot(0), Misbehavior::Fake)
            .with_injection(InjectionTarget::Slot(5), Misbehavior::Leak);
        let s = run(sc).summary();
        let mut got: Vec<(usize, Offense)> = s.convictions.iter().map(|c| (c.slot, c.offense)).collect();
        got.sort();
        assert_eq!(got, vec![(0, Offense::Fake), (5, Offense::Leak)]);
        assert_eq!(s.terminal, ServiceState::Success);
    }

    #[test]
    fn premature_reveal_is_reported_by_a_member() {
        let sc = small(4).with_injection(InjectionTarget::Slot(2), Misbehavior::PrematureReveal);
        let sim = run(sc);
        let s = sim.summary();
        assert_eq!(s.convictions.len(), 1);
        assert_eq!(s.convictions[0].offense, Offense::Leak);
        assert!(s.offchain.messages(Step::Premature) > 0);
    }

    #[test]
    fn offline_in_epoch_one_recovers_in_epoch_two() {
        let mut sc = small(5);
        for s in [0, 2, 4] {
            sc = sc.with_injection(InjectionTarget::Slot(s), Misbehavior::OfflineEpoch1);
        }
        let s = run(sc).summary();
        assert_eq!(s.executed_epoch, Some(2));
        assert_eq!(s.terminal, ServiceState::Success);
        assert!(s.convictions.is_empty());
    }

    #[test]
    fn too_many_withholders_fail() {
        let mut sc = small(6);
        for s in [0, 2, 4] {
            sc = sc.with_injection(InjectionTarget::Slot(s), Misbehavior::Withhold);
        }
        let s = run(sc).summary();
        assert_eq!(s.terminal, ServiceState::Failure);
        assert_eq!(s.convictions.len(), 3);
        assert!(s.conserved);
    }

    #[test]
    fn forged_proof_cancels() {
        let mut sc = small(7);
        sc.leader.tamper = LeaderTamper::ForgeProof;
        let s = run(sc).summary();
        assert_eq!(s.terminal, ServiceState::Cancelled);
        assert_eq!(s.executed_payloads, 0);
    }

    #[test]
    fn foreign_executor_injection_is_rejected() {
        let probe = run(small(8));
        let outsider = (0..8).find(|i| !probe.sched().committee.contains(&probe.executors[*i].address())).unwrap();
        let sc = small(8).with_injection(InjectionTarget::Executor(outsider), Misbehavior::Withhold);
        let err = Simulation::run(sc, Economics::default(), GasSchedule::default()).err().unwrap();
        assert!(matches!(err, SimError::UnknownTarget(_)));
    }

    #[test]
    fn same_seed_same_trace() {
        let a = run(small(9)).ledger.trace_text();
        let b = run(small(9)).ledger.trace_text();
        assert_eq!(a, b);
    }
}
