use std::any::Any;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::crypto::{Address, Digest32};

use super::abi::{split_call, Selector};
use super::gas::GasSchedule;
use super::trace::TraceRecord;
use super::tx::Transaction;
use super::{ChainError, Revert, Wei};

/// Nested CALL/CREATE depth limit.
pub const MAX_CALL_DEPTH: usize = 8;

/// Contract logic hosted by the ledger.
///
/// A contract that receives a revert from a nested call must propagate it:
/// nested calls are not individually rolled back, only the whole transaction.
pub trait Contract: Any + Send + Sync + fmt::Debug {
    fn kind(&self) -> &'static str;

    /// Schedule name of the function behind `selector`.
    fn function_name(&self, selector: Selector) -> Option<&'static str>;

    /// Committee size the call handles, for per-executor gas entries.
    fn gas_scale(&self, _selector: Selector, _args: &[u8]) -> u64 {
        0
    }

    fn on_create(&mut self, _env: &mut Env<'_>, _ctx: &CallContext) -> Result<(), Revert> {
        Ok(())
    }

    fn call(
        &mut self,
        env: &mut Env<'_>,
        ctx: &CallContext,
        selector: Selector,
        args: &[u8],
    ) -> Result<Vec<u8>, Revert>;

    fn clone_box(&self) -> Box<dyn Contract>;

    fn as_any(&self) -> &dyn Any;
}

/// Turns creation code into contract instances.
pub trait ContractFactory: Send + Sync {
    /// Schedule name charged when `code` is deployed by a top-level transaction.
    fn creation_function(&self, code: &[u8]) -> Option<&'static str>;

    fn instantiate(&self, code: &[u8]) -> Result<Box<dyn Contract>, Revert>;
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub emitter: Address,
    pub topic: String,
    pub fields: Vec<(String, String)>,
}

impl Event {
    pub fn field(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Success,
    Revert { code: String, detail: String },
}

impl Status {
    pub fn is_success(&self) -> bool {
        matches!(self, Status::Success)
    }

    pub fn revert_code(&self) -> Option<&str> {
        match self {
            Status::Revert { code, .. } => Some(code),
            Status::Success => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Receipt {
    pub tx_hash: Digest32,
    pub function: String,
    pub gas_used: u64,
    pub fee_wei: Wei,
    pub block: u64,
    pub status: Status,
    pub events: Vec<Event>,
    pub created: Option<Address>,
    pub output: Vec<u8>,
}

impl Receipt {
    pub fn is_success(&self) -> bool {
        self.status.is_success()
    }

    pub fn events_with(&self, topic: &str) -> impl Iterator<Item = &Event> {
        let topic = topic.to_string();
        self.events.iter().filter(move |e| e.topic == topic)
    }
}

/// Per-call view passed to contract code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CallContext {
    pub this: Address,
    pub sender: Address,
    pub origin: Address,
    pub value: Wei,
    pub depth: usize,
}

#[derive(Default)]
struct WorldState {
    block: u64,
    balances: BTreeMap<Address, Wei>,
    nonces: BTreeMap<Address, u64>,
    // `None` while the contract is executing.
    contracts: BTreeMap<Address, Option<Box<dyn Contract>>>,
    burned: Wei,
}

impl Clone for WorldState {
    fn clone(&self) -> Self {
        WorldState {
            block: self.block,
            balances: self.balances.clone(),
            nonces: self.nonces.clone(),
            contracts: self.contracts.iter().map(|(a, c)| (*a, c.as_ref().map(|c| c.clone_box()))).collect(),
            burned: self.burned,
        }
    }
}

impl WorldState {
    fn balance(&self, a: &Address) -> Wei {
        self.balances.get(a).copied().unwrap_or(0)
    }

    fn move_value(&mut self, from: &Address, to: &Address, amount: Wei) -> Result<(), Revert> {
        if amount == 0 {
            return Ok(());
        }
        let have = self.balance(from);
        if have < amount {
            return Err(Revert::new("insufficient-balance", format!("{from} holds {have}, needs {amount}")));
        }
        self.balances.insert(*from, have - amount);
        *self.balances.entry(*to).or_insert(0) += amount;
        Ok(())
    }

    fn bump_nonce(&mut self, a: &Address) -> u64 {
        let n = self.nonces.entry(*a).or_insert(0);
        let cur = *n;
        *n += 1;
        cur
    }
}

/// Handle contract code uses to reach the ledger during a call.
pub struct Env<'a> {
    state: &'a mut WorldState,
    factory: &'a dyn ContractFactory,
    events: &'a mut Vec<Event>,
    tx_fee: Wei,
}

impl<'a> Env<'a> {
    pub fn block(&self) -> u64 {
        self.state.block
    }

    /// Fee charged for the enclosing top-level transaction.
    pub fn tx_fee(&self) -> Wei {
        self.tx_fee
    }

    pub fn balance(&self, a: &Address) -> Wei {
        self.state.balance(a)
    }

    pub fn is_contract(&self, a: &Address) -> bool {
        self.state.contracts.contains_key(a)
    }

    /// Read-only access to another contract's state. Returns `None` for a
    /// contract that is currently executing.
    pub fn view<T: Contract>(&self, a: &Address) -> Option<&T> {
        self.state.contracts.get(a)?.as_ref()?.as_any().downcast_ref::<T>()
    }

    pub fn emit(&mut self, emitter: Address, topic: &str, fields: Vec<(&str, String)>) {
        self.events.push(Event {
            emitter,
            topic: topic.to_string(),
            fields: fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        });
    }

    /// Plain value transfer out of the executing contract.
    pub fn pay(&mut self, ctx: &CallContext, to: &Address, amount: Wei) -> Result<(), Revert> {
        if amount > 0 && self.state.contracts.contains_key(to) {
            return Err(Revert::new("pay-to-contract", to.to_string()));
        }
        self.state.move_value(&ctx.this, to, amount)
    }

    /// Nested CALL from the executing contract.
    pub fn call(
        &mut self,
        ctx: &CallContext,
        to: &Address,
        selector: Selector,
        args: &[u8],
        value: Wei,
    ) -> Result<Vec<u8>, Revert> {
        self.dispatch(ctx.this, ctx.origin, ctx.depth + 1, to, selector, args, value)
    }

    /// Nested CREATE from the executing contract.
    pub fn create(&mut self, ctx: &CallContext, code: &[u8], value: Wei) -> Result<Address, Revert> {
        self.create_from(ctx.this, ctx.origin, ctx.depth + 1, code, value, None)
    }

    #[allow(clippy::too_many_arguments)]
    fn dispatch(
        &mut self,
        sender: Address,
        origin: Address,
        depth: usize,
        to: &Address,
        selector: Selector,
        args: &[u8],
        value: Wei,
    ) -> Result<Vec<u8>, Revert> {
        if depth > MAX_CALL_DEPTH {
            return Err(Revert::new("call-depth", format!("depth {depth}")));
        }
        let mut contract = match self.state.contracts.get_mut(to) {
            None => return Err(Revert::new("unknown-recipient-function", format!("{to} has no code"))),
            Some(slot) => slot.take().ok_or_else(|| Revert::new("reentrant-call", to.to_string()))?,
        };
        let ctx = CallContext { this: *to, sender, origin, value, depth };
        let result = if contract.function_name(selector).is_none() {
            Err(Revert::new(
                "unknown-recipient-function",
                format!("selector {} on {}", selector.to_hex(), contract.kind()),
            ))
        } else {
            self.state.move_value(&sender, to, value).and_then(|_| contract.call(self, &ctx, selector, args))
        };
        self.state.contracts.insert(*to, Some(contract));
        result
    }

    fn create_from(
        &mut self,
        creator: Address,
        origin: Address,
        depth: usize,
        code: &[u8],
        value: Wei,
        tx_nonce: Option<u64>,
    ) -> Result<Address, Revert> {
        if depth > MAX_CALL_DEPTH {
            return Err(Revert::new("call-depth", format!("depth {depth}")));
        }
        let mut contract = self.factory.instantiate(code)?;
        let nonce = match tx_nonce {
            Some(n) => n,
            None => self.state.bump_nonce(&creator),
        };
        let addr = Address::for_contract(&creator, nonce);
        if self.state.contracts.contains_key(&addr) {
            return Err(Revert::new("address-collision", addr.to_string()));
        }
        self.state.contracts.insert(addr, None);
        self.state.move_value(&creator, &addr, value)?;
        let ctx = CallContext { this: addr, sender: creator, origin, value, depth };
        contract.on_create(self, &ctx)?;
        let kind = contract.kind().to_string();
        self.state.contracts.insert(addr, Some(contract));
        self.emit(addr, "Created", vec![("kind", kind)]);
        Ok(addr)
    }
}

/// The single simulated ledger.
pub struct Ledger {
    state: WorldState,
    schedule: GasSchedule,
    factory: Arc<dyn ContractFactory>,
    trace: Vec<TraceRecord>,
    log: Vec<(Transaction, Receipt)>,
    total_supply: Wei,
}

impl fmt::Debug for Ledger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Ledger")
            .field("block", &self.state.block)
            .field("accounts", &self.state.balances.len())
            .field("contracts", &self.state.contracts.len())
            .field("txs", &self.log.len())
            .finish()
    }
}

impl Ledger {
    pub fn new(schedule: GasSchedule, factory: Arc<dyn ContractFactory>, genesis: &[(Address, Wei)]) -> Ledger {
        let mut state = WorldState::default();
        let mut total_supply = 0;
        for (a, v) in genesis {
            *state.balances.entry(*a).or_insert(0) += *v;
            total_supply += *v;
        }
        Ledger { state, schedule, factory, trace: Vec::new(), log: Vec::new(), total_supply }
    }

    pub fn block(&self) -> u64 {
        self.state.block
    }

    pub fn advance_block(&mut self, k: u64) -> u64 {
        self.state.block += k;
        self.state.block
    }

    /// Advances to `target` if it lies in the future.
    pub fn advance_to(&mut self, target: u64) -> u64 {
        if target > self.state.block {
            self.state.block = target;
        }
        self.state.block
    }

    pub fn balance(&self, a: &Address) -> Wei {
        self.state.balance(a)
    }

    pub fn nonce(&self, a: &Address) -> u64 {
        self.state.nonces.get(a).copied().unwrap_or(0)
    }

    pub fn is_contract(&self, a: &Address) -> bool {
        self.state.contracts.contains_key(a)
    }

    pub fn view<T: Contract>(&self, a: &Address) -> Option<&T> {
        self.state.contracts.get(a)?.as_ref()?.as_any().downcast_ref::<T>()
    }

    pub fn schedule(&self) -> &GasSchedule {
        &self.schedule
    }

    pub fn burned(&self) -> Wei {
        self.state.burned
    }

    pub fn total_supply(&self) -> Wei {
        self.total_supply
    }

    pub fn sum_of_balances(&self) -> Wei {
        self.state.balances.values().sum()
    }

    /// Balances plus burned fees; equals the genesis supply on every trace.
    pub fn conserved_total(&self) -> Wei {
        self.sum_of_balances() + self.state.burned
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    pub fn trace_text(&self) -> String {
        let mut out = String::new();
        for r in &self.trace {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out
    }

    pub fn log(&self) -> &[(Transaction, Receipt)] {
        &self.log
    }

    /// Gas that a transaction would be charged, and the schedule name used.
    fn meter(&self, tx: &Transaction) -> (String, u64) {
        match &tx.to {
            None => match self.factory.creation_function(&tx.data) {
                Some(name) => (name.to_string(), self.schedule.gas_for(name, 0)),
                None => ("create".to_string(), self.schedule.base_tx_gas),
            },
            Some(to) => match self.state.contracts.get(to) {
                Some(Some(c)) => match split_call(&tx.data) {
                    Some((sel, args)) => match c.function_name(sel) {
                        Some(name) => (name.to_string(), self.schedule.gas_for(name, c.gas_scale(sel, args))),
                        None => ("-".to_string(), self.schedule.base_tx_gas),
                    },
                    None => ("-".to_string(), self.schedule.base_tx_gas),
                },
                _ => ("transfer".to_string(), self.schedule.base_tx_gas),
            },
        }
    }

    pub fn submit_tx(&mut self, tx: Transaction) -> Result<Receipt, ChainError> {
        let signer = tx.recover_sender().map_err(|_| ChainError::BadSignature)?;
        if signer != tx.from {
            return Err(ChainError::BadSignature);
        }
        let expected = self.nonce(&tx.from);
        if tx.nonce != expected {
            return Err(ChainError::BadNonce { expected, got: tx.nonce });
        }
        if self.state.contracts.contains_key(&tx.from) {
            return Err(ChainError::BadSignature);
        }
        let (function, gas) = self.meter(&tx);
        let fee = self.schedule.fee_wei(gas);
        let have = self.balance(&tx.from);
        let need = fee + tx.value;
        if have < need {
            return Err(ChainError::InsufficientBalance { need, have });
        }

        let snapshot = self.state.clone();
        let mut events = Vec::new();
        self.charge(&tx.from, fee);
        let outcome = self.execute(&tx, fee, &mut events);
        let (status, created, output) = match outcome {
            Ok((created, output)) => (Status::Success, created, output),
            Err(r) => {
                self.state = snapshot;
                self.charge(&tx.from, fee);
                events.clear();
                (Status::Revert { code: r.code, detail: r.detail }, None, Vec::new())
            }
        };
        let receipt = Receipt {
            tx_hash: tx.hash(),
            function,
            gas_used: gas,
            fee_wei: fee,
            block: self.state.block,
            status,
            events,
            created,
            output,
        };
        let selector = match (&tx.to, split_call(&tx.data)) {
            (None, _) => "create".to_string(),
            (Some(to), Some((sel, _))) if self.is_contract(to) => sel.to_hex(),
            _ => "-".to_string(),
        };
        self.trace.push(TraceRecord {
            block: receipt.block,
            from: tx.from,
            to: tx.to,
            selector,
            value_wei: tx.value,
            gas_used: gas,
            success: receipt.is_success(),
        });
        self.log.push((tx, receipt.clone()));
        Ok(receipt)
    }

    fn charge(&mut self, from: &Address, fee: Wei) {
        let bal = self.state.balance(from);
        self.state.balances.insert(*from, bal - fee);
        self.state.burned += fee;
        self.state.bump_nonce(from);
    }

    fn execute(
        &mut self,
        tx: &Transaction,
        fee: Wei,
        events: &mut Vec<Event>,
    ) -> Result<(Option<Address>, Vec<u8>), Revert> {
        let factory = Arc::clone(&self.factory);
        let mut env = Env { state: &mut self.state, factory: factory.as_ref(), events, tx_fee: fee };
        match &tx.to {
            None => {
                if tx.data.is_empty() {
                    return Err(Revert::new("empty-creation", String::new()));
                }
                let addr = env.create_from(tx.from, tx.from, 1, &tx.data, tx.value, Some(tx.nonce))?;
                Ok((Some(addr), Vec::new()))
            }
            Some(to) if env.is_contract(to) => {
                let (sel, args) = split_call(&tx.data)
                    .ok_or_else(|| Revert::new("unknown-recipient-function", "missing selector".into()))?;
                let out = env.dispatch(tx.from, tx.from, 1, to, sel, args, tx.value)?;
                Ok((None, out))
            }
            Some(to) => {
                env.state.move_value(&tx.from, to, tx.value)?;
                Ok((None, Vec::new()))
            }
        }
    }
}
