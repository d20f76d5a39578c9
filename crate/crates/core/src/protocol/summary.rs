use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::chain::Wei;
use crate::contracts::{Offense, ProtocolParams, ServiceState};
use crate::crypto::Address;

use super::bus::OffchainAudit;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Path {
    Opt,
    Pes,
}

/// Execution path of a run; only ever moves from OPT to PES.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathState {
    pub current: Path,
    pub pooled: bool,
    pub terminal: Option<ServiceState>,
}

impl Default for PathState {
    fn default() -> Self {
        PathState { current: Path::Opt, pooled: false, terminal: None }
    }
}

impl PathState {
    pub fn switch_to_pes(&mut self) {
        self.current = Path::Pes;
    }

    pub fn attach_pool(&mut self) {
        self.pooled = true;
    }

    pub fn finish(&mut self, s: ServiceState) {
        debug_assert!(s.is_terminal());
        self.terminal = Some(s);
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conviction {
    pub slot: usize,
    pub executor: Address,
    pub offense: Offense,
    pub reporter: Address,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartyFees {
    pub leader: Wei,
    pub followers: Wei,
    pub executors: Wei,
    pub others: Wei,
}

impl PartyFees {
    pub fn total(&self) -> Wei {
        self.leader + self.followers + self.executors + self.others
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    pub seed: u64,
    pub params: ProtocolParams,
    pub committee_size: usize,
    pub registry_size: usize,
    pub path: PathState,
    pub terminal: ServiceState,
    /// Epoch in which the leader payload ran.
    pub executed_epoch: Option<u8>,
    pub executed_payloads: usize,
    pub total_payloads: usize,
    pub rejected_followers: usize,
    pub epoch1_shares: usize,
    pub epoch2_shares: Option<usize>,
    pub watchdog: Option<Address>,
    pub convictions: Vec<Conviction>,
    /// Successful service transactions by function, settlement excluded.
    pub service_ops: BTreeMap<String, u64>,
    /// Fees of the transactions counted in `service_ops`.
    pub service_fee_wei: Wei,
    pub fees: PartyFees,
    pub offchain: OffchainAudit,
    pub conserved: bool,
}

impl RunSummary {
    pub fn convicted_slots(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.convictions.iter().map(|c| c.slot).collect();
        v.sort_unstable();
        v
    }
}
