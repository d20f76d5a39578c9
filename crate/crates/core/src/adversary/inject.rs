use std::collections::BTreeMap;

use crate::crypto::{FieldElement, Share};
use crate::protocol::scenario::{Injection, InjectionTarget, Misbehavior, Scenario, UnknownOffense};
use crate::protocol::Simulation;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InjectError {
    #[error(transparent)]
    UnknownOffense(#[from] UnknownOffense),
    #[error("unknown target: {0}")]
    UnknownTarget(String),
}

/// Schedules `offense` for one committee member. Registry targets are
/// checked for membership when the run selects its committee.
pub fn inject_misbehavior(
    scenario: &mut Scenario,
    who: InjectionTarget,
    offense: &str,
    when: Option<u64>,
) -> Result<(), InjectError> {
    let offense: Misbehavior = offense.parse()?;
    match who {
        InjectionTarget::Slot(s) if s >= scenario.params.committee_size() => {
            return Err(InjectError::UnknownTarget(format!(
                "slot {s} outside a committee of {}",
                scenario.params.committee_size()
            )));
        }
        InjectionTarget::Executor(e) if e >= scenario.executors => {
            return Err(InjectError::UnknownTarget(format!("executor {e} is not registered")));
        }
        _ => {}
    }
    if scenario.injections.iter().any(|i| i.target == who) {
        return Err(InjectError::UnknownTarget(format!("{who:?} already has an injection")));
    }
    scenario.injections.push(Injection { target: who, offense, at: when });
    Ok(())
}

/// Shares a coalition of committee slots can open, from its members' service
/// keys plus whatever keys became public during the run.
pub fn coalition_shares(sim: &Simulation, coalition: &[usize]) -> Vec<Share> {
    let sched = sim.schedule.as_ref().expect("service scheduled");
    let mut keys: BTreeMap<usize, FieldElement> = sim.progress.leaked.clone();
    for &slot in coalition {
        let actor = sim.executors.iter().find(|e| e.address() == sched.committee[slot]).expect("member");
        keys.insert(slot, actor.service_secret(&sched.committee_pks[slot]).expect("member key"));
    }
    sim.peel_with(&keys)
}
