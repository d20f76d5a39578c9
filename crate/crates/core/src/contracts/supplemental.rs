use std::any::Any;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::chain::{decode_args, encode, ensure, CallContext, Contract, Env, Revert, Selector, Wei};
use crate::crypto::{public_key_of, Address, FieldElement};

use super::bulletin::{BulletinBoard, ConvictArgs, ServiceRecord};
use super::{resolve, sel, signatures as sig, Offense, Timer};

const FUNCTIONS: &[(&str, &str)] = &[(sig::REVEAL, "reveal"), (sig::MISSING, "missing"), (sig::FAKE, "fake")];
static TABLE: OnceLock<Vec<(Selector, &'static str)>> = OnceLock::new();

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupplementalInit {
    pub proxy: Address,
    pub bulletin: Address,
    pub reveal_window: u64,
    pub priority_delay: u64,
}

/// On-chain key reveal and reporting of missing or fake keys.
#[derive(Clone, Debug)]
pub struct Supplemental {
    init: SupplementalInit,
    watchdog: Address,
    window: Timer,
    deploy_fee: Wei,
    deploy_reimbursed: bool,
    revealed: BTreeMap<Address, FieldElement>,
    reported: BTreeSet<(Address, Offense)>,
}

impl Supplemental {
    pub fn new(init: SupplementalInit) -> Supplemental {
        Supplemental {
            init,
            watchdog: Address::ZERO,
            window: Timer::new(0, 0),
            deploy_fee: 0,
            deploy_reimbursed: false,
            revealed: BTreeMap::new(),
            reported: BTreeSet::new(),
        }
    }

    pub fn watchdog(&self) -> Address {
        self.watchdog
    }

    pub fn proxy(&self) -> Address {
        self.init.proxy
    }

    pub fn reveal_window(&self) -> Timer {
        self.window
    }

    /// Last block on which only the watchdog may report or execute.
    pub fn priority_until(&self) -> u64 {
        self.window.end + self.init.priority_delay
    }

    pub fn revealed(&self) -> &BTreeMap<Address, FieldElement> {
        &self.revealed
    }

    pub fn reported(&self) -> &BTreeSet<(Address, Offense)> {
        &self.reported
    }

    fn service(&self, env: &Env<'_>) -> Result<ServiceRecord, Revert> {
        env.view::<BulletinBoard>(&self.init.bulletin)
            .and_then(|b| b.service(&self.init.proxy))
            .cloned()
            .ok_or_else(|| Revert::code("not-led"))
    }

    fn reveal(&mut self, env: &mut Env<'_>, ctx: &CallContext, sk: FieldElement) -> Result<Vec<u8>, Revert> {
        ensure(self.window.contains(env.block()), "window-closed")?;
        ensure(self.service(env)?.is_member(&ctx.sender), "not-member")?;
        self.revealed.insert(ctx.sender, sk);
        Ok(Vec::new())
    }

    fn report(
        &mut self,
        env: &mut Env<'_>,
        ctx: &CallContext,
        executor: Address,
        offense: Offense,
    ) -> Result<Vec<u8>, Revert> {
        ensure(env.block() > self.window.end, "window-open")?;
        ensure(ctx.sender == self.watchdog || env.block() > self.priority_until(), "watchdog-priority")?;
        let s = self.service(env)?;
        let slot = s.slot_of(&executor).ok_or_else(|| Revert::code("not-member"))?;
        ensure(!self.reported.contains(&(executor, offense)), "already-reported")?;
        match offense {
            Offense::Missing => ensure(!self.revealed.contains_key(&executor), "key-was-revealed")?,
            Offense::Fake => {
                let sk = self.revealed.get(&executor).ok_or_else(|| Revert::code("no-key-revealed"))?;
                let genuine = public_key_of(sk).ok() == Some(s.committee_pks[slot]);
                ensure(!genuine, "key-genuine")?;
            }
            Offense::Leak => return Err(Revert::code("unknown-offense")),
        }
        let extra = if ctx.sender == self.watchdog && !self.deploy_reimbursed {
            self.deploy_reimbursed = true;
            self.deploy_fee
        } else {
            0
        };
        let args = ConvictArgs {
            service: self.init.proxy,
            executor,
            offense,
            reporter: ctx.sender,
            extra_reimbursement: extra,
        };
        env.call(ctx, &self.init.bulletin, sel(sig::CONVICT), &encode(&args), 0)?;
        self.reported.insert((executor, offense));
        Ok(Vec::new())
    }
}

impl Contract for Supplemental {
    fn kind(&self) -> &'static str {
        "supplemental"
    }

    fn function_name(&self, s: Selector) -> Option<&'static str> {
        resolve(&TABLE, FUNCTIONS, s)
    }

    fn on_create(&mut self, env: &mut Env<'_>, ctx: &CallContext) -> Result<(), Revert> {
        ensure(ctx.sender == self.init.proxy, "wrong-proxy")?;
        ensure(self.init.reveal_window >= 1, "bad-window")?;
        self.watchdog = ctx.origin;
        let b = env.block();
        self.window = Timer::new(b, b + self.init.reveal_window - 1);
        self.deploy_fee = env.tx_fee();
        Ok(())
    }

    fn call(&mut self, env: &mut Env<'_>, ctx: &CallContext, s: Selector, args: &[u8]) -> Result<Vec<u8>, Revert> {
        ensure(ctx.value == 0, "not-payable")?;
        match self.function_name(s).expect("dispatcher checked the selector") {
            "reveal" => self.reveal(env, ctx, decode_args(args)?),
            "missing" => self.report(env, ctx, decode_args(args)?, Offense::Missing),
            "fake" => self.report(env, ctx, decode_args(args)?, Offense::Fake),
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
