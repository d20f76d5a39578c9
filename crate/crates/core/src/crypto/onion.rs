//! Layered wrapping of a share under several service keys.

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use super::field::FieldElement;
use super::keys::{decrypt, encrypt, PublicKey};
use super::shamir::Share;
use super::CryptoError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Onion {
    pub share_index: u16,
    pub layers: u8,
    pub ciphertext: Vec<u8>,
}

impl Onion {
    /// `share index (2 bytes BE) || layer count (1 byte) || ciphertext`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(3 + self.ciphertext.len());
        out.extend_from_slice(&self.share_index.to_be_bytes());
        out.push(self.layers);
        out.extend_from_slice(&self.ciphertext);
        out
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self, CryptoError> {
        if b.len() < 3 {
            return Err(CryptoError::Malformed("onion length"));
        }
        Ok(Onion { share_index: u16::from_be_bytes([b[0], b[1]]), layers: b[2], ciphertext: b[3..].to_vec() })
    }
}

/// Encrypts `share` under `pks[0]` first and `pks[l-1]` last (outermost).
pub fn onion_wrap<R: RngCore + CryptoRng>(
    share: &Share<FieldElement>,
    pks: &[PublicKey],
    rng: &mut R,
) -> Result<Onion, CryptoError> {
    if pks.is_empty() {
        return Err(CryptoError::EmptyKeyList);
    }
    if pks.len() > u8::MAX as usize {
        return Err(CryptoError::Malformed("too many onion layers"));
    }
    for (i, a) in pks.iter().enumerate() {
        if pks[..i].contains(a) {
            return Err(CryptoError::Malformed("duplicate layer key"));
        }
    }
    let mut ct = share.to_bytes().to_vec();
    for pk in pks {
        ct = encrypt(pk, &ct, rng)?;
    }
    Ok(Onion { share_index: share.index, layers: pks.len() as u8, ciphertext: ct })
}

/// Peels `onion` with `sks` given outermost first, i.e. the reverse of the
/// wrap order. A failure reports the position in `sks` that did not open.
pub fn onion_peel(onion: &Onion, sks: &[FieldElement]) -> Result<Share<FieldElement>, CryptoError> {
    if sks.len() < onion.layers as usize {
        return Err(CryptoError::InsufficientKeys { have: sks.len(), need: onion.layers as usize });
    }
    if sks.len() > onion.layers as usize {
        return Err(CryptoError::Malformed("more keys than layers"));
    }
    let mut ct = onion.ciphertext.clone();
    for (layer, sk) in sks.iter().enumerate() {
        ct = decrypt(sk, &ct).map_err(|_| CryptoError::DecryptionFailed { layer })?;
    }
    let share = Share::from_bytes(&ct)?;
    if share.index != onion.share_index {
        return Err(CryptoError::Malformed("share index mismatch"));
    }
    Ok(share)
}

/// Peels with the group's keys in wrap order (`sks[i]` matches `pks[i]`).
pub fn onion_peel_group(onion: &Onion, group_sks: &[FieldElement]) -> Result<Share<FieldElement>, CryptoError> {
    let reversed: Vec<FieldElement> = group_sks.iter().rev().copied().collect();
    onion_peel(onion, &reversed)
}
