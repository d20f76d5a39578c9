use serde::{Deserialize, Serialize};

use crate::crypto::{hash, hash_concat, sign, verify, Address, CryptoError, Digest32, KeyPair, Signature};

use super::Wei;

/// A signed ledger message `<to, value, data, sig>`; `to = None` creates a contract.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    pub from: Address,
    pub to: Option<Address>,
    pub value: Wei,
    pub nonce: u64,
    pub data: Vec<u8>,
    pub sig: Signature,
}

/// Digest the sender signs: everything but the signature.
pub fn signing_digest(to: Option<&Address>, value: Wei, nonce: u64, data: &[u8]) -> Digest32 {
    let to_bytes: &[u8] = match to {
        Some(a) => &a.0,
        None => &[],
    };
    hash_concat(&[
        b"timed-tx/tx/v1",
        &[to.is_some() as u8],
        to_bytes,
        &value.to_be_bytes(),
        &nonce.to_be_bytes(),
        &hash(data).0,
    ])
}

impl Transaction {
    pub fn signed(key: &KeyPair, to: Option<Address>, value: Wei, nonce: u64, data: Vec<u8>) -> Transaction {
        let digest = signing_digest(to.as_ref(), value, nonce, &data);
        let sig = sign(key.secret(), &digest).expect("account keys are valid signing keys");
        Transaction { from: key.address(), to, value, nonce, data, sig }
    }

    pub fn digest(&self) -> Digest32 {
        signing_digest(self.to.as_ref(), self.value, self.nonce, &self.data)
    }

    pub fn hash(&self) -> Digest32 {
        hash_concat(&[&self.digest().0, &self.sig.to_bytes()])
    }

    pub fn recover_sender(&self) -> Result<Address, CryptoError> {
        verify(&self.digest(), &self.sig)
    }
}
