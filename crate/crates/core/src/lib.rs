pub mod adversary;
pub mod chain;
pub mod contracts;
pub mod crypto;
pub mod econ;
pub mod protocol;
