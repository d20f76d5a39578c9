//! Committee selection: slot `i` starts at `H(r ‖ i) mod |R|` and takes the
//! first available entry scanning forward with wraparound.

use crate::crypto::{hash_concat, Address, Digest32};

/// One registry entry as seen at the notification block.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct RegistryEntry {
    pub addr: Address,
    pub available: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("insufficient executors: {available} available, {needed} needed")]
pub struct InsufficientExecutors {
    pub available: usize,
    pub needed: usize,
}

/// Start index for slot `i` (1-based).
pub fn slot_start(r: &Digest32, i: u32, registry_len: usize) -> usize {
    hash_concat(&[&r.0, &i.to_be_bytes()]).mod_u64(registry_len as u64) as usize
}

/// Fills one slot given the members already chosen.
pub fn pick_from(registry: &[RegistryEntry], start: usize, chosen: &[Address]) -> Option<Address> {
    let len = registry.len();
    (0..len)
        .map(|off| &registry[(start + off) % len])
        .find(|e| e.available && !chosen.contains(&e.addr))
        .map(|e| e.addr)
}

/// Selection with an arbitrary start-index oracle.
pub fn select_with<F: FnMut(u32) -> usize>(
    registry: &[RegistryEntry],
    size: usize,
    mut start: F,
) -> Result<Vec<Address>, InsufficientExecutors> {
    let available = registry.iter().filter(|e| e.available).count();
    if available < size {
        return Err(InsufficientExecutors { available, needed: size });
    }
    let mut chosen = Vec::with_capacity(size);
    for i in 1..=size as u32 {
        let s = start(i) % registry.len();
        let pick = pick_from(registry, s, &chosen).expect("enough available entries");
        chosen.push(pick);
    }
    Ok(chosen)
}

pub fn select_committee(
    registry: &[RegistryEntry],
    r: &Digest32,
    size: usize,
) -> Result<Vec<Address>, InsufficientExecutors> {
    let len = registry.len();
    select_with(registry, size, |i| slot_start(r, i, len.max(1)))
}

/// Re-derives slot `j` (1-based) from the published prefix.
pub fn verify_slot(registry: &[RegistryEntry], r: &Digest32, committee: &[Address], j: usize) -> bool {
    if j == 0 || j > committee.len() || registry.is_empty() {
        return false;
    }
    let start = slot_start(r, j as u32, registry.len());
    pick_from(registry, start, &committee[..j - 1]) == Some(committee[j - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg(n: u8) -> Vec<RegistryEntry> {
        (0..n).map(|i| RegistryEntry { addr: Address([i; 20]), available: true }).collect()
    }

    #[test]
    fn forced_collision_skips_taken_entry() {
        let r = reg(5);
        let starts = [2usize, 2, 4];
        let sel = select_with(&r, 3, |i| starts[i as usize - 1]).unwrap();
        assert_eq!(sel, vec![r[2].addr, r[3].addr, r[4].addr]);
    }

    #[test]
    fn wraps_and_skips_unavailable() {
        let mut r = reg(4);
        r[0].available = false;
        let sel = select_with(&r, 2, |_| 3).unwrap();
        assert_eq!(sel, vec![r[3].addr, r[1].addr]);
    }

    #[test]
    fn too_few_available() {
        let mut r = reg(3);
        r[1].available = false;
        assert_eq!(select_committee(&r, &Digest32::ZERO, 3), Err(InsufficientExecutors { available: 2, needed: 3 }));
    }

    #[test]
    fn every_slot_verifies() {
        let r = reg(20);
        let rnd = crate::crypto::hash(b"seed");
        let c = select_committee(&r, &rnd, 12).unwrap();
        for j in 1..=12 {
            assert!(verify_slot(&r, &rnd, &c, j));
        }
        let mut bad = c.clone();
        bad[5] = r.iter().map(|e| e.addr).find(|a| !c.contains(a)).unwrap();
        assert!(!verify_slot(&r, &rnd, &bad, 6));
        assert!(!verify_slot(&r, &rnd, &c, 0));
        assert!(!verify_slot(&r, &rnd, &c, 13));
    }
}
