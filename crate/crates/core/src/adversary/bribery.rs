use serde::{Deserialize, Serialize};

use crate::chain::Wei;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BriberyParams {
    /// Reputation of each bribed executor.
    pub target_reputations: Vec<u64>,
    pub delta_d: Wei,
    pub delta_r: u64,
    pub delta_p: Wei,
    pub r_l: u64,
    pub r_u: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BriberyError {
    #[error("reputation {0} outside [{1}, {2}]")]
    OutOfRange(u64, u64, u64),
    #[error("reputation {0} is not r_l plus a multiple of {1}")]
    OffStep(u64, u64),
    #[error("delta_r must be positive")]
    ZeroStep,
}

impl BriberyParams {
    pub fn validate(&self) -> Result<(), BriberyError> {
        if self.delta_r == 0 {
            return Err(BriberyError::ZeroStep);
        }
        for &r in &self.target_reputations {
            if r < self.r_l || r > self.r_u {
                return Err(BriberyError::OutOfRange(r, self.r_l, self.r_u));
            }
            if !(r - self.r_l).is_multiple_of(self.delta_r) {
                return Err(BriberyError::OffStep(r, self.delta_r));
            }
        }
        Ok(())
    }
}

/// Remuneration an executor forgoes while rebuilding reputation from `r_l` back to `r`.
pub fn reputation_loss(r: u64, r_l: u64, delta_r: u64, delta_p: Wei) -> Wei {
    let k = ((r - r_l) / delta_r) as u128;
    // sum_{i=0..k} i (k - i + 1) = k (k + 1) (k + 2) / 6
    k * (k + 1) * (k + 2) / 6 * delta_r as u128 * delta_p
}

/// Ether needed to bribe every listed executor: each loses its deposit plus
/// the reputation it has to rebuild.
pub fn bribery_budget(p: &BriberyParams) -> Result<Wei, BriberyError> {
    p.validate()?;
    Ok(p.target_reputations.iter().map(|&r| p.delta_d + reputation_loss(r, p.r_l, p.delta_r, p.delta_p)).sum())
}
