use std::any::Any;
use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::chain::{decode_args, encode_call, ensure, split_call, CallContext, Contract, Env, Revert, Selector, Wei};
use crate::crypto::{hash, public_key_of, verify, Address, Digest32, FieldElement, PublicKey, Signature};

use super::bulletin::{BulletinBoard, ConvictArgs, ServiceRecord};
use super::supplemental::Supplemental;
use super::{deployment_digest, execution_digest, resolve, sel, signatures as sig, Offense, Payload, Timer};

const FUNCTIONS: &[(&str, &str)] = &[
    (sig::FOLLOW, "follow"),
    (sig::LEAK, "leak"),
    (sig::EXECUTE, "execute"),
    (sig::DEPLOY, "deploy"),
    (sig::FINALIZE, "finalize"),
];
static TABLE: OnceLock<Vec<(Selector, &'static str)>> = OnceLock::new();

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProxyInit {
    pub bulletin: Address,
    pub timer: Timer,
    pub leader_commitment: Digest32,
    pub supplemental_code_hash: Digest32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub owner: Address,
    pub commitment: Digest32,
    pub fund: Wei,
    pub fee: Wei,
    pub executed_by: Option<Address>,
    pub spent: Wei,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FollowArgs {
    pub commitment: Digest32,
    pub fee: Wei,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExecuteArgs {
    pub payload: Payload,
    pub salt: [u8; 32],
    /// 0 for the leader, `i` for the i-th follower.
    pub entry: u32,
    pub sig: Signature,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeployArgs {
    pub proxy: Address,
    pub code: Vec<u8>,
    pub sig: Signature,
}

/// Escrow for the leader's and followers' funds; enforces the timer.
#[derive(Clone, Debug)]
pub struct Proxy {
    init: ProxyInit,
    leader: Address,
    zeta: Wei,
    min_fee: Wei,
    /// Index 0 is the leader.
    entries: Vec<Entry>,
    supplemental: Option<Address>,
    watchdog: Option<Address>,
    leaked: BTreeMap<PublicKey, FieldElement>,
    finalized: bool,
}

impl Proxy {
    pub fn new(init: ProxyInit) -> Proxy {
        Proxy {
            init,
            leader: Address::ZERO,
            zeta: 0,
            min_fee: 0,
            entries: Vec::new(),
            supplemental: None,
            watchdog: None,
            leaked: BTreeMap::new(),
            finalized: false,
        }
    }

    pub fn timer(&self) -> Timer {
        self.init.timer
    }

    pub fn bulletin(&self) -> Address {
        self.init.bulletin
    }

    pub fn leader(&self) -> Address {
        self.leader
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn followers(&self) -> &[Entry] {
        self.entries.get(1..).unwrap_or(&[])
    }

    pub fn leader_executor(&self) -> Option<Address> {
        self.entries.first().and_then(|e| e.executed_by)
    }

    pub fn supplemental(&self) -> Option<Address> {
        self.supplemental
    }

    pub fn watchdog(&self) -> Option<Address> {
        self.watchdog
    }

    pub fn leaked(&self) -> &BTreeMap<PublicKey, FieldElement> {
        &self.leaked
    }

    pub fn is_finalized(&self) -> bool {
        self.finalized
    }

    /// Balance the proxy must hold: unspent funds and unreleased fees.
    pub fn required_balance(&self) -> Wei {
        if self.finalized {
            return 0;
        }
        self.entries
            .iter()
            .map(|e| {
                let fee = if e.executed_by.is_some() { e.fee.saturating_sub(self.zeta) } else { e.fee };
                e.fund - e.spent + fee
            })
            .sum()
    }

    fn service(&self, env: &Env<'_>, this: &Address) -> Result<ServiceRecord, Revert> {
        env.view::<BulletinBoard>(&self.init.bulletin)
            .and_then(|b| b.service(this))
            .cloned()
            .ok_or_else(|| Revert::code("not-led"))
    }

    fn follow(&mut self, env: &mut Env<'_>, ctx: &CallContext, a: FollowArgs) -> Result<Vec<u8>, Revert> {
        let s = self.service(env, &ctx.this)?;
        ensure(!s.cancelled, "service-cancelled")?;
        ensure(env.block() < self.init.timer.start, "window-closed")?;
        ensure(a.fee >= self.min_fee, "fee-too-low")?;
        ensure(ctx.value >= a.fee, "insufficient-value")?;
        self.entries.push(Entry {
            owner: ctx.sender,
            commitment: a.commitment,
            fund: ctx.value - a.fee,
            fee: a.fee,
            executed_by: None,
            spent: 0,
        });
        env.emit(
            ctx.this,
            "Follow",
            vec![("follower", ctx.sender.to_string()), ("entry", (self.entries.len() - 1).to_string())],
        );
        Ok(Vec::new())
    }

    fn leak(
        &mut self,
        env: &mut Env<'_>,
        ctx: &CallContext,
        sk: FieldElement,
        pk: PublicKey,
    ) -> Result<Vec<u8>, Revert> {
        ensure(env.block() < self.init.timer.start, "not-waiting")?;
        let s = self.service(env, &ctx.this)?;
        let slot = s.slot_of_pk(&pk).ok_or_else(|| Revert::code("unknown-pk"))?;
        ensure(public_key_of(&sk).ok() == Some(pk), "key-mismatch")?;
        let args = ConvictArgs {
            service: ctx.this,
            executor: s.committee[slot],
            offense: Offense::Leak,
            reporter: ctx.sender,
            extra_reimbursement: 0,
        };
        env.call(ctx, &self.init.bulletin, sel(sig::CONVICT), &crate::chain::encode(&args), 0)?;
        self.leaked.insert(pk, sk);
        Ok(Vec::new())
    }

    fn execute(&mut self, env: &mut Env<'_>, ctx: &CallContext, a: ExecuteArgs) -> Result<Vec<u8>, Revert> {
        ensure(self.init.timer.contains(env.block()), "outside-timer")?;
        ensure(!self.finalized, "finalized")?;
        let s = self.service(env, &ctx.this)?;
        ensure(!s.cancelled, "service-cancelled")?;
        if let (Some(cs), Some(w)) = (self.supplemental, self.watchdog) {
            if ctx.sender != w {
                let until = env.view::<Supplemental>(&cs).map_or(0, |c| c.priority_until());
                ensure(env.block() > until, "watchdog-priority")?;
            }
        }
        let idx = a.entry as usize;
        let entry = self.entries.get(idx).ok_or_else(|| Revert::code("unknown-entry"))?;
        ensure(entry.executed_by.is_none(), "replay")?;
        ensure(a.payload.commitment(&a.salt) == entry.commitment, "bad-commitment")?;
        let signer = verify(&execution_digest(&ctx.this, &entry.commitment), &a.sig).ok();
        ensure(signer == Some(entry.owner), "bad-signature")?;
        ensure(a.payload.value <= entry.fund, "insufficient-escrow")?;
        ensure(a.payload.value <= env.balance(&ctx.this), "insufficient-escrow")?;

        let e = &mut self.entries[idx];
        e.executed_by = Some(ctx.sender);
        e.spent = a.payload.value;
        let p = &a.payload;
        let mut created = None;
        match p.to {
            None => created = Some(env.create(ctx, &p.data, p.value)?),
            Some(to) if env.is_contract(&to) => {
                let (s, args) = split_call(&p.data).ok_or_else(|| Revert::code("unknown-recipient-function"))?;
                env.call(ctx, &to, s, args, p.value)?;
            }
            Some(to) => env.pay(ctx, &to, p.value)?,
        }
        if idx > 0 {
            env.pay(ctx, &ctx.sender, self.zeta.min(self.entries[idx].fee))?;
        }
        let mut fields = vec![("entry", idx.to_string()), ("executor", ctx.sender.to_string())];
        if let Some(c) = created {
            fields.push(("created", c.to_string()));
        }
        env.emit(ctx.this, "Executed", fields);
        Ok(Vec::new())
    }

    fn deploy(&mut self, env: &mut Env<'_>, ctx: &CallContext, a: DeployArgs) -> Result<Vec<u8>, Revert> {
        ensure(a.proxy == ctx.this, "wrong-proxy")?;
        ensure(self.supplemental.is_none(), "already-deployed")?;
        let s = self.service(env, &ctx.this)?;
        ensure(!s.cancelled, "service-cancelled")?;
        ensure(s.is_member(&ctx.sender), "not-committee-member")?;
        ensure(env.block() > self.init.timer.epoch1_end(), "epoch1-still-open")?;
        ensure(env.block() <= self.init.timer.end, "outside-timer")?;
        let signer = verify(&deployment_digest(&ctx.this, &a.code), &a.sig).ok();
        ensure(hash(&a.code) == self.init.supplemental_code_hash && signer == Some(self.leader), "bad-signature")?;

        let cs = env.create(ctx, &a.code, 0)?;
        env.call(ctx, &self.init.bulletin, sel(sig::BIND), &crate::chain::encode(&(ctx.this, cs)), 0)?;
        self.supplemental = Some(cs);
        self.watchdog = Some(ctx.sender);
        env.emit(
            ctx.this,
            "SupplementalDeployed",
            vec![("supplemental", cs.to_string()), ("watchdog", ctx.sender.to_string())],
        );
        Ok(cs.0.to_vec())
    }

    fn finalize(&mut self, env: &mut Env<'_>, ctx: &CallContext) -> Result<Vec<u8>, Revert> {
        ensure(ctx.sender == self.init.bulletin, "unauthorized")?;
        ensure(!self.finalized, "finalized")?;
        self.finalized = true;
        let mut to_leader: Wei = 0;
        for (i, e) in self.entries.clone().iter().enumerate() {
            let left = e.fund - e.spent;
            if e.executed_by.is_some() {
                to_leader += e.fee.saturating_sub(self.zeta);
                if i == 0 {
                    to_leader += left;
                } else {
                    env.pay(ctx, &e.owner, left)?;
                }
            } else if i == 0 {
                to_leader += left;
            } else {
                env.pay(ctx, &e.owner, left + e.fee)?;
            }
        }
        env.pay(ctx, &self.leader, to_leader)?;
        let rest = env.balance(&ctx.this);
        env.pay(ctx, &self.leader, rest)?;
        Ok(Vec::new())
    }
}

impl Contract for Proxy {
    fn kind(&self) -> &'static str {
        "proxy"
    }

    fn function_name(&self, s: Selector) -> Option<&'static str> {
        resolve(&TABLE, FUNCTIONS, s)
    }

    fn on_create(&mut self, env: &mut Env<'_>, ctx: &CallContext) -> Result<(), Revert> {
        let b = env.view::<BulletinBoard>(&self.init.bulletin).ok_or_else(|| Revert::code("no-bulletin"))?;
        self.zeta = b.economics().zeta;
        self.min_fee = b.economics().min_follow_fee();
        self.leader = ctx.origin;
        self.entries.push(Entry {
            owner: ctx.origin,
            commitment: self.init.leader_commitment,
            fund: ctx.value,
            fee: 0,
            executed_by: None,
            spent: 0,
        });
        env.call(ctx, &self.init.bulletin, sel(sig::NOTIFY), &[], 0)?;
        Ok(())
    }

    fn call(&mut self, env: &mut Env<'_>, ctx: &CallContext, s: Selector, args: &[u8]) -> Result<Vec<u8>, Revert> {
        let name = self.function_name(s).expect("dispatcher checked the selector");
        if ctx.value > 0 && name != "follow" {
            return Err(Revert::code("not-payable"));
        }
        match name {
            "follow" => self.follow(env, ctx, decode_args(args)?),
            "leak" => {
                let (sk, pk) = decode_args(args)?;
                self.leak(env, ctx, sk, pk)
            }
            "execute" => self.execute(env, ctx, decode_args(args)?),
            "deploy" => self.deploy(env, ctx, decode_args(args)?),
            "finalize" => self.finalize(env, ctx),
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

/// Call data for `execute`.
pub fn execute_call(args: &ExecuteArgs) -> Vec<u8> {
    encode_call(sel(sig::EXECUTE), args)
}
