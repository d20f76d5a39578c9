use std::any::Any;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::chain::{decode_args, encode, ensure, CallContext, Contract, Env, Revert, Selector, Wei};
use crate::crypto::{vrf_verify, Address, PublicKey, VrfEvidence};

use super::params::Economics;
use super::proxy::Proxy;
use super::selection::{verify_slot, RegistryEntry};
use super::{resolve, sel, signatures as sig, Offense, ProtocolParams, Timer};

const FUNCTIONS: &[(&str, &str)] = &[
    (sig::REGISTER, "register"),
    (sig::TOP_UP, "top_up"),
    (sig::ADD_KEYS, "add_keys"),
    (sig::WITHDRAW, "withdraw"),
    (sig::NOTIFY, "notify"),
    (sig::LEAD, "lead"),
    (sig::INVALID, "invalid"),
    (sig::CONVICT, "convict"),
    (sig::BIND, "bind"),
    (sig::SETTLE, "settle"),
];
static TABLE: OnceLock<Vec<(Selector, &'static str)>> = OnceLock::new();

/// VRF input binding a leader's randomness to this board and a block.
pub fn vrf_message(bulletin: &Address, bn: u64) -> Vec<u8> {
    let mut m = bulletin.0.to_vec();
    m.extend_from_slice(&bn.to_be_bytes());
    m
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutorRecord {
    pub addr: Address,
    pub whisper_pk: PublicKey,
    pub deposit: Wei,
    pub locked: u32,
    /// Unused service keys, consumed front first.
    pub service_pks: Vec<PublicKey>,
    pub reputation: u32,
    pub tau: u32,
    pub successes: u32,
    pub blacklisted: bool,
}

impl ExecutorRecord {
    /// Deposit units not tied to a running service.
    pub fn free_units(&self, delta_d: Wei) -> u64 {
        ((self.deposit / delta_d) as u64).saturating_sub(self.locked as u64)
    }

    pub fn capacity(&self, delta_d: Wei) -> u64 {
        self.free_units(delta_d).min(self.service_pks.len() as u64)
    }

    pub fn unlocked(&self, delta_d: Wei) -> Wei {
        self.deposit.saturating_sub(self.locked as Wei * delta_d)
    }

    pub fn is_available(&self, delta_d: Wei) -> bool {
        !self.blacklisted && self.capacity(delta_d) > 0
    }
}

/// Applies one credited success.
pub fn update_reputation(rec: &mut ExecutorRecord, econ: &Economics) {
    rec.successes += 1;
    if rec.successes >= rec.tau {
        rec.reputation = (rec.reputation + econ.delta_r).min(econ.r_u);
        rec.tau += 1;
        rec.successes = 0;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ServiceState {
    Scheduled,
    Waiting,
    Epoch1,
    Epoch2,
    Success,
    Failure,
    Cancelled,
}

impl ServiceState {
    pub fn is_terminal(&self) -> bool {
        matches!(self, ServiceState::Success | ServiceState::Failure | ServiceState::Cancelled)
    }
}

/// What the board learned when a proxy announced itself.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProxyRegistration {
    pub leader: Address,
    pub bn: u64,
    pub snapshot: Vec<RegistryEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceRecord {
    pub leader: Address,
    pub timer: Timer,
    pub pk_u: PublicKey,
    pub vrf: VrfEvidence,
    pub bn: u64,
    pub params: ProtocolParams,
    pub proxy: Address,
    pub committee: Vec<Address>,
    /// Service key consumed from each member, by slot.
    pub committee_pks: Vec<PublicKey>,
    /// Member reputation when the service was led, by slot.
    pub member_reputation: Vec<u32>,
    pub remuneration_pool: Wei,
    pub leader_deposit: Wei,
    pub leader_deposit_held: bool,
    pub lead_block: u64,
    pub supplemental: Option<Address>,
    pub convicted: BTreeMap<Address, Offense>,
    pub cancelled: bool,
    pub locks_released: bool,
    pub outcome: Option<ServiceState>,
}

impl ServiceRecord {
    pub fn slot_of(&self, a: &Address) -> Option<usize> {
        self.committee.iter().position(|m| m == a)
    }

    pub fn slot_of_pk(&self, pk: &PublicKey) -> Option<usize> {
        self.committee_pks.iter().position(|p| p == pk)
    }

    pub fn is_member(&self, a: &Address) -> bool {
        self.slot_of(a).is_some()
    }

    /// Service state at `block`; `leader_executed` reports the proxy's view.
    pub fn state_at(&self, block: u64, verification_window: u64, leader_executed: bool) -> ServiceState {
        if self.cancelled {
            return ServiceState::Cancelled;
        }
        if let Some(o) = self.outcome {
            return o;
        }
        if block < self.timer.start {
            if block < self.lead_block + verification_window {
                ServiceState::Scheduled
            } else {
                ServiceState::Waiting
            }
        } else if block <= self.timer.epoch1_end() {
            ServiceState::Epoch1
        } else if block <= self.timer.end {
            ServiceState::Epoch2
        } else if leader_executed {
            ServiceState::Success
        } else {
            ServiceState::Failure
        }
    }

    /// Remuneration owed to each member on success.
    pub fn member_pay(&self, econ: &Economics) -> Wei {
        self.member_reputation.iter().map(|r| *r as Wei * econ.delta_p).sum()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BulletinInit {
    pub economics: Economics,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegisterArgs {
    pub whisper_pk: PublicKey,
    pub service_pks: Vec<PublicKey>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LeadArgs {
    pub timer: Timer,
    pub pk_u: PublicKey,
    pub vrf: VrfEvidence,
    pub bn: u64,
    pub params: ProtocolParams,
    pub proxy: Address,
    pub committee: Vec<Address>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvictArgs {
    pub service: Address,
    pub executor: Address,
    pub offense: Offense,
    pub reporter: Address,
    /// Extra cost reimbursed to the reporter before the split.
    pub extra_reimbursement: Wei,
}

/// How a confiscated deposit is divided.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Confiscation {
    pub total: Wei,
    pub reimbursement: Wei,
    pub reporter_share: Wei,
    pub leader_share: Wei,
}

pub fn split_confiscation(total: Wei, costs: Wei, reporter_bps: u32) -> Confiscation {
    let reimbursement = costs.min(total);
    let rest = total - reimbursement;
    let reporter_share = rest * reporter_bps as Wei / 10_000;
    Confiscation { total, reimbursement, reporter_share, leader_share: rest - reporter_share }
}

/// Registry of executors, their deposits and reputation, and every service led through it.
#[derive(Clone, Debug)]
pub struct BulletinBoard {
    econ: Economics,
    registry: Vec<Address>,
    executors: BTreeMap<Address, ExecutorRecord>,
    used_keys: BTreeSet<PublicKey>,
    registrations: BTreeMap<Address, ProxyRegistration>,
    services: BTreeMap<Address, ServiceRecord>,
    blacklisted_leaders: BTreeSet<Address>,
}

impl BulletinBoard {
    pub fn new(init: BulletinInit) -> BulletinBoard {
        BulletinBoard {
            econ: init.economics,
            registry: Vec::new(),
            executors: BTreeMap::new(),
            used_keys: BTreeSet::new(),
            registrations: BTreeMap::new(),
            services: BTreeMap::new(),
            blacklisted_leaders: BTreeSet::new(),
        }
    }

    pub fn economics(&self) -> &Economics {
        &self.econ
    }

    pub fn registry(&self) -> &[Address] {
        &self.registry
    }

    pub fn executor(&self, a: &Address) -> Option<&ExecutorRecord> {
        self.executors.get(a)
    }

    pub fn executors(&self) -> impl Iterator<Item = &ExecutorRecord> {
        self.registry.iter().map(|a| &self.executors[a])
    }

    /// Ordered registry with current availability.
    pub fn snapshot(&self) -> Vec<RegistryEntry> {
        self.executors().map(|e| RegistryEntry { addr: e.addr, available: e.is_available(self.econ.delta_d) }).collect()
    }

    pub fn registration(&self, proxy: &Address) -> Option<&ProxyRegistration> {
        self.registrations.get(proxy)
    }

    pub fn service(&self, proxy: &Address) -> Option<&ServiceRecord> {
        self.services.get(proxy)
    }

    pub fn services(&self) -> impl Iterator<Item = &ServiceRecord> {
        self.services.values()
    }

    pub fn is_leader_blacklisted(&self, a: &Address) -> bool {
        self.blacklisted_leaders.contains(a)
    }

    /// Total payment `lead` requires for the given committee.
    pub fn lead_payment(&self, committee: &[Address]) -> Wei {
        let pay: Wei = committee
            .iter()
            .map(|a| self.executors.get(a).map_or(self.econ.r_l, |e| e.reputation) as Wei * self.econ.delta_p)
            .sum();
        self.econ.leader_deposit + pay + self.econ.zeta
    }

    /// Balance the board must hold: deposits plus undistributed service funds.
    pub fn required_balance(&self) -> Wei {
        let deposits: Wei = self.executors.values().map(|e| e.deposit).sum();
        let services: Wei = self
            .services
            .values()
            .filter(|s| s.outcome.is_none())
            .map(|s| s.remuneration_pool + if s.leader_deposit_held { s.leader_deposit } else { 0 })
            .sum();
        deposits + services
    }

    fn service_mut(&mut self, proxy: &Address) -> Result<&mut ServiceRecord, Revert> {
        self.services.get_mut(proxy).ok_or_else(|| Revert::code("unknown-service"))
    }

    fn leader_executor(env: &Env<'_>, proxy: &Address) -> Option<Address> {
        env.view::<Proxy>(proxy).and_then(|p| p.leader_executor())
    }

    fn register(&mut self, env: &mut Env<'_>, ctx: &CallContext, args: RegisterArgs) -> Result<Vec<u8>, Revert> {
        ensure(!self.executors.contains_key(&ctx.sender), "already-registered")?;
        ensure(ctx.value > 0 && ctx.value.is_multiple_of(self.econ.delta_d), "deposit-not-multiple-of-delta-d")?;
        ensure(!args.service_pks.is_empty(), "no-service-keys")?;
        self.check_fresh_keys(&args.service_pks)?;
        self.used_keys.extend(args.service_pks.iter().copied());
        let rec = ExecutorRecord {
            addr: ctx.sender,
            whisper_pk: args.whisper_pk,
            deposit: ctx.value,
            locked: 0,
            service_pks: args.service_pks,
            reputation: self.econ.r_l,
            tau: 1,
            successes: 0,
            blacklisted: false,
        };
        env.emit(
            ctx.this,
            "Registered",
            vec![("executor", ctx.sender.to_string()), ("capacity", rec.capacity(self.econ.delta_d).to_string())],
        );
        self.executors.insert(ctx.sender, rec);
        self.registry.push(ctx.sender);
        Ok(Vec::new())
    }

    fn check_fresh_keys(&self, pks: &[PublicKey]) -> Result<(), Revert> {
        let mut seen = BTreeSet::new();
        for pk in pks {
            ensure(!self.used_keys.contains(pk) && seen.insert(*pk), "key-reused")?;
        }
        Ok(())
    }

    fn top_up(&mut self, ctx: &CallContext) -> Result<Vec<u8>, Revert> {
        let d = self.econ.delta_d;
        let rec = self.executors.get_mut(&ctx.sender).ok_or_else(|| Revert::code("not-registered"))?;
        ensure(ctx.value > 0 && ctx.value.is_multiple_of(d), "deposit-not-multiple-of-delta-d")?;
        rec.deposit += ctx.value;
        Ok(Vec::new())
    }

    fn add_keys(&mut self, ctx: &CallContext, pks: Vec<PublicKey>) -> Result<Vec<u8>, Revert> {
        ensure(self.executors.contains_key(&ctx.sender), "not-registered")?;
        ensure(!pks.is_empty(), "no-service-keys")?;
        self.check_fresh_keys(&pks)?;
        self.used_keys.extend(pks.iter().copied());
        self.executors.get_mut(&ctx.sender).expect("checked").service_pks.extend(pks);
        Ok(Vec::new())
    }

    fn withdraw(&mut self, env: &mut Env<'_>, ctx: &CallContext, amount: Wei) -> Result<Vec<u8>, Revert> {
        let d = self.econ.delta_d;
        let rec = self.executors.get_mut(&ctx.sender).ok_or_else(|| Revert::code("not-registered"))?;
        ensure(amount <= rec.unlocked(d), "locked-funds")?;
        rec.deposit -= amount;
        env.pay(ctx, &ctx.sender, amount)?;
        Ok(Vec::new())
    }

    fn notify(&mut self, env: &mut Env<'_>, ctx: &CallContext) -> Result<Vec<u8>, Revert> {
        ensure(env.is_contract(&ctx.sender), "not-a-proxy")?;
        ensure(!self.registrations.contains_key(&ctx.sender), "already-notified")?;
        let reg = ProxyRegistration { leader: ctx.origin, bn: env.block(), snapshot: self.snapshot() };
        env.emit(ctx.this, "ProxyNotified", vec![("proxy", ctx.sender.to_string()), ("bn", reg.bn.to_string())]);
        self.registrations.insert(ctx.sender, reg);
        Ok(Vec::new())
    }

    fn lead(&mut self, env: &mut Env<'_>, ctx: &CallContext, a: LeadArgs) -> Result<Vec<u8>, Revert> {
        let reg = self.registrations.get(&a.proxy).ok_or_else(|| Revert::code("proxy-not-notified"))?;
        ensure(reg.leader == ctx.sender, "not-proxy-owner")?;
        ensure(!self.services.contains_key(&a.proxy), "already-led")?;
        ensure(!self.blacklisted_leaders.contains(&ctx.sender), "leader-blacklisted")?;
        ensure(a.params.is_valid(), "bad-params")?;
        ensure(a.committee.len() == a.params.committee_size(), "committee-size-mismatch")?;
        ensure(a.timer.len() >= 2 && a.timer.start > env.block(), "bad-timer")?;
        ensure(a.bn == reg.bn, "bad-bn")?;
        let proxy = env.view::<Proxy>(&a.proxy).ok_or_else(|| Revert::code("not-a-proxy"))?;
        ensure(proxy.timer() == a.timer, "timer-mismatch")?;

        let d = self.econ.delta_d;
        let mut seen = BTreeSet::new();
        for m in &a.committee {
            ensure(seen.insert(*m), "duplicate-member")?;
            let rec = self.executors.get(m).ok_or_else(|| Revert::new("unknown-executor", m.to_string()))?;
            ensure(!rec.blacklisted, "blacklisted-member")?;
            ensure(rec.capacity(d) > 0, "member-at-capacity")?;
        }
        let required = self.lead_payment(&a.committee);
        if ctx.value < required {
            return Err(Revert::new("insufficient-payment", format!("need {required}, got {}", ctx.value)));
        }

        let mut pks = Vec::with_capacity(a.committee.len());
        let mut reps = Vec::with_capacity(a.committee.len());
        for m in &a.committee {
            let rec = self.executors.get_mut(m).expect("checked");
            pks.push(rec.service_pks.remove(0));
            reps.push(rec.reputation);
            rec.locked += 1;
        }
        let leader_deposit = self.econ.leader_deposit;
        let record = ServiceRecord {
            leader: ctx.sender,
            timer: a.timer,
            pk_u: a.pk_u,
            vrf: a.vrf,
            bn: a.bn,
            params: a.params,
            proxy: a.proxy,
            committee: a.committee,
            committee_pks: pks,
            member_reputation: reps,
            remuneration_pool: ctx.value - leader_deposit,
            leader_deposit,
            leader_deposit_held: true,
            lead_block: env.block(),
            supplemental: None,
            convicted: BTreeMap::new(),
            cancelled: false,
            locks_released: false,
            outcome: None,
        };
        env.emit(
            ctx.this,
            "Lead",
            vec![("proxy", a.proxy.to_string()), ("committee", record.committee.len().to_string())],
        );
        self.services.insert(a.proxy, record);
        Ok(Vec::new())
    }

    fn release_locks(&mut self, proxy: &Address) {
        let s = self.services.get_mut(proxy).expect("service exists");
        if s.locks_released {
            return;
        }
        s.locks_released = true;
        for m in &s.committee {
            if !s.convicted.contains_key(m) {
                let rec = self.executors.get_mut(m).expect("member registered");
                rec.locked = rec.locked.saturating_sub(1);
            }
        }
    }

    fn invalid(&mut self, env: &mut Env<'_>, ctx: &CallContext, proxy: Address, j: u32) -> Result<Vec<u8>, Revert> {
        let vw = self.econ.verification_window;
        let leader_executed = Self::leader_executor(env, &proxy).is_some();
        let s = self.services.get(&proxy).ok_or_else(|| Revert::code("unknown-service"))?;
        let state = s.state_at(env.block(), vw, leader_executed);
        ensure(matches!(state, ServiceState::Scheduled | ServiceState::Waiting), "wrong-state")?;
        ensure(s.is_member(&ctx.sender), "not-committee-member")?;
        ensure(j >= 1 && j as usize <= s.committee.len(), "bad-index")?;

        let reg = &self.registrations[&proxy];
        let msg = vrf_message(&ctx.this, s.bn);
        let r_ok = matches!(vrf_verify(&s.pk_u, &msg, &s.vrf.proof), Ok(r) if r == s.vrf.r);
        let slot_ok = r_ok && verify_slot(&reg.snapshot, &s.vrf.r, &s.committee, j as usize);
        if r_ok && slot_ok {
            env.emit(ctx.this, "Verdict", vec![("result", "VALID".into()), ("slot", j.to_string())]);
            return Ok(encode(&true));
        }

        let leader = s.leader;
        let deposit = s.leader_deposit;
        let s = self.service_mut(&proxy)?;
        s.cancelled = true;
        s.leader_deposit_held = false;
        self.blacklisted_leaders.insert(leader);
        self.release_locks(&proxy);
        env.pay(ctx, &ctx.sender, deposit)?;
        env.emit(
            ctx.this,
            "Verdict",
            vec![
                ("result", "INVALID".into()),
                ("slot", j.to_string()),
                ("reason", if r_ok { "committee" } else { "vrf" }.into()),
                ("reporter", ctx.sender.to_string()),
            ],
        );
        Ok(encode(&false))
    }

    fn convict(&mut self, env: &mut Env<'_>, ctx: &CallContext, a: ConvictArgs) -> Result<Vec<u8>, Revert> {
        let s = self.services.get(&a.service).ok_or_else(|| Revert::code("unknown-service"))?;
        let authorised = match a.offense {
            Offense::Leak => ctx.sender == s.proxy,
            Offense::Missing | Offense::Fake => s.supplemental == Some(ctx.sender),
        };
        ensure(authorised, "unauthorized")?;
        ensure(!s.cancelled && s.outcome.is_none(), "service-closed")?;
        ensure(s.is_member(&a.executor), "not-committee-member")?;
        ensure(!s.convicted.contains_key(&a.executor), "already-convicted")?;
        let leader = s.leader;

        let econ = self.econ.clone();
        let rec = self.executors.get_mut(&a.executor).expect("member registered");
        let taken = econ.delta_d.min(rec.deposit);
        rec.deposit -= taken;
        rec.locked = rec.locked.saturating_sub(1);
        rec.blacklisted = true;
        rec.reputation = econ.r_l;
        rec.tau = 1;
        rec.successes = 0;
        self.service_mut(&a.service)?.convicted.insert(a.executor, a.offense);

        let split = split_confiscation(taken, env.tx_fee() + a.extra_reimbursement, econ.reporter_share_bps);
        env.pay(ctx, &a.reporter, split.reimbursement + split.reporter_share)?;
        env.pay(ctx, &leader, split.leader_share)?;
        env.emit(
            ctx.this,
            "Convicted",
            vec![
                ("executor", a.executor.to_string()),
                ("offense", a.offense.to_string()),
                ("reporter", a.reporter.to_string()),
                ("reimbursed", split.reimbursement.to_string()),
                ("reporter_share", split.reporter_share.to_string()),
                ("leader_share", split.leader_share.to_string()),
            ],
        );
        Ok(Vec::new())
    }

    fn bind(&mut self, ctx: &CallContext, service: Address, supplemental: Address) -> Result<Vec<u8>, Revert> {
        let s = self.service_mut(&service)?;
        ensure(ctx.sender == s.proxy, "unauthorized")?;
        ensure(s.supplemental.is_none(), "already-bound")?;
        s.supplemental = Some(supplemental);
        Ok(Vec::new())
    }

    fn settle(&mut self, env: &mut Env<'_>, ctx: &CallContext, proxy: Address) -> Result<Vec<u8>, Revert> {
        let executor = Self::leader_executor(env, &proxy);
        let s = self.services.get(&proxy).ok_or_else(|| Revert::code("unknown-service"))?;
        ensure(s.outcome.is_none(), "already-settled")?;
        ensure(s.cancelled || env.block() > s.timer.end, "not-terminal")?;
        let outcome = if s.cancelled {
            ServiceState::Cancelled
        } else if executor.is_some() {
            ServiceState::Success
        } else {
            ServiceState::Failure
        };

        let econ = self.econ.clone();
        let s = s.clone();
        let mut pool = s.remuneration_pool;
        if outcome == ServiceState::Success {
            for (slot, m) in s.committee.iter().enumerate() {
                if s.convicted.contains_key(m) {
                    continue;
                }
                let pay = s.member_reputation[slot] as Wei * econ.delta_p;
                pool -= pay;
                env.pay(ctx, m, pay)?;
                update_reputation(self.executors.get_mut(m).expect("member registered"), &econ);
            }
            let zeta = econ.zeta.min(pool);
            pool -= zeta;
            env.pay(ctx, &executor.expect("success has an executor"), zeta)?;
        }
        env.pay(ctx, &s.leader, pool)?;
        if s.leader_deposit_held {
            env.pay(ctx, &s.leader, s.leader_deposit)?;
        }
        self.release_locks(&proxy);
        let rec = self.service_mut(&proxy)?;
        rec.remuneration_pool = 0;
        rec.leader_deposit_held = false;
        rec.outcome = Some(outcome);
        env.call(ctx, &proxy, sel(sig::FINALIZE), &[], 0)?;
        env.emit(
            ctx.this,
            "Settled",
            vec![("proxy", proxy.to_string()), ("outcome", format!("{outcome:?}").to_uppercase())],
        );
        Ok(Vec::new())
    }
}

impl Contract for BulletinBoard {
    fn kind(&self) -> &'static str {
        "bulletin"
    }

    fn function_name(&self, s: Selector) -> Option<&'static str> {
        resolve(&TABLE, FUNCTIONS, s)
    }

    fn gas_scale(&self, s: Selector, args: &[u8]) -> u64 {
        if s == sel(sig::LEAD) {
            decode_args::<LeadArgs>(args).map_or(0, |a| a.committee.len() as u64)
        } else if s == sel(sig::SETTLE) {
            decode_args::<Address>(args)
                .ok()
                .and_then(|p| self.services.get(&p))
                .map_or(0, |s| s.committee.len() as u64)
        } else {
            0
        }
    }

    fn call(&mut self, env: &mut Env<'_>, ctx: &CallContext, s: Selector, args: &[u8]) -> Result<Vec<u8>, Revert> {
        let name = self.function_name(s).expect("dispatcher checked the selector");
        if ctx.value > 0 && !matches!(name, "register" | "top_up" | "lead") {
            return Err(Revert::code("not-payable"));
        }
        match name {
            "register" => self.register(env, ctx, decode_args(args)?),
            "top_up" => self.top_up(ctx),
            "add_keys" => self.add_keys(ctx, decode_args(args)?),
            "withdraw" => self.withdraw(env, ctx, decode_args(args)?),
            "notify" => self.notify(env, ctx),
            "lead" => self.lead(env, ctx, decode_args(args)?),
            "invalid" => {
                let (proxy, j) = decode_args(args)?;
                self.invalid(env, ctx, proxy, j)
            }
            "convict" => self.convict(env, ctx, decode_args(args)?),
            "bind" => {
                let (service, cs) = decode_args(args)?;
                self.bind(ctx, service, cs)
            }
            "settle" => self.settle(env, ctx, decode_args(args)?),
            _ => unreachable!("function table and dispatch agree"),
        }
    }

    fn clone_box(&self) -> Box<dyn Contract> {
        Box::new(self.clone())
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}
