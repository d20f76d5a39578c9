//! Actor orchestration: scheduling, pooling, both execution epochs and the
//! off-chain channel.

pub mod bundled;
pub mod bus;
pub mod scenario;
pub mod sim;
pub mod summary;

pub use crate::contracts::selection::{select_committee, select_with, verify_slot, RegistryEntry};
pub use bus::{offchain_audit, Channel, OffchainAudit, OffchainBus, OffchainMessage, Step, HANDLE_BYTES};
pub use scenario::{
    FollowerSpec, Injection, InjectionTarget, LeaderSpec, LeaderTamper, Misbehavior, PayloadSpec, Scenario,
    UnknownOffense,
};
pub use sim::{SimError, Simulation};
pub use summary::{Conviction, PartyFees, Path, PathState, RunSummary};
