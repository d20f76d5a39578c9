//! Off-chain channel model. Bodies live in a content store; each transmitted
//! message costs one 32-byte handle.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::crypto::{hash, Address, Digest32};

pub const HANDLE_BYTES: u64 = 32;

/// Protocol step a message belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Step {
    /// Leader to each member: proxy, supplemental code, signature, onions, payload.
    Schedule,
    /// Follower to each member: encrypted payload.
    Follow,
    /// Early key disclosure outside the protocol.
    Premature,
    /// Member to member: service key during epoch 1.
    KeyExchange,
}

impl Step {
    pub fn number(&self) -> u8 {
        match self {
            Step::Schedule => 4,
            Step::Follow => 7,
            Step::Premature => 8,
            Step::KeyExchange => 9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Channel {
    Broadcast,
    Private(Address),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OffchainMessage {
    pub step: Step,
    pub block: u64,
    pub sender: Address,
    pub channel: Channel,
    pub body_digest: Digest32,
}

#[derive(Clone, Debug, Default)]
pub struct OffchainBus {
    store: BTreeMap<Digest32, Vec<u8>>,
    messages: Vec<OffchainMessage>,
}

impl OffchainBus {
    pub fn new() -> OffchainBus {
        OffchainBus::default()
    }

    /// Stores `body` and returns its handle.
    pub fn put(&mut self, body: Vec<u8>) -> Digest32 {
        let d = hash(&body);
        self.store.insert(d, body);
        d
    }

    pub fn get(&self, d: &Digest32) -> Option<&[u8]> {
        self.store.get(d).map(Vec::as_slice)
    }

    pub fn send(&mut self, step: Step, block: u64, sender: Address, to: Address, body: Digest32) {
        self.messages.push(OffchainMessage { step, block, sender, channel: Channel::Private(to), body_digest: body });
    }

    pub fn broadcast(&mut self, step: Step, block: u64, sender: Address, body: Digest32) {
        self.messages.push(OffchainMessage { step, block, sender, channel: Channel::Broadcast, body_digest: body });
    }

    pub fn messages(&self) -> &[OffchainMessage] {
        &self.messages
    }

    /// Messages addressed to `who`, including broadcasts from others.
    pub fn inbox<'a>(&'a self, who: &'a Address, step: Step) -> impl Iterator<Item = &'a OffchainMessage> + 'a {
        self.messages.iter().filter(move |m| {
            m.step == step
                && match m.channel {
                    Channel::Private(to) => to == *who,
                    Channel::Broadcast => m.sender != *who,
                }
        })
    }

    pub fn audit(&self) -> OffchainAudit {
        offchain_audit(&self.messages)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OffchainAudit {
    pub bytes_by_step: BTreeMap<u8, u64>,
    pub message_counts: BTreeMap<u8, u64>,
}

impl OffchainAudit {
    pub fn bytes(&self, step: Step) -> u64 {
        self.bytes_by_step.get(&step.number()).copied().unwrap_or(0)
    }

    pub fn messages(&self, step: Step) -> u64 {
        self.message_counts.get(&step.number()).copied().unwrap_or(0)
    }

    /// Bytes of the optimistic path: schedule deliveries plus key exchange.
    pub fn opt_bytes(&self) -> u64 {
        self.bytes(Step::Schedule) + self.bytes(Step::KeyExchange)
    }

    pub fn total_bytes(&self) -> u64 {
        self.bytes_by_step.values().sum()
    }
}

pub fn offchain_audit(messages: &[OffchainMessage]) -> OffchainAudit {
    let mut a = OffchainAudit::default();
    for m in messages {
        *a.bytes_by_step.entry(m.step.number()).or_insert(0) += HANDLE_BYTES;
        *a.message_counts.entry(m.step.number()).or_insert(0) += 1;
    }
    a
}
