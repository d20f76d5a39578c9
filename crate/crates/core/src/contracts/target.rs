use std::any::Any;
use std::sync::OnceLock;

use crate::chain::{decode_args, CallContext, Contract, Env, Revert, Selector};
use crate::crypto::Address;

use super::{resolve, signatures as sig};

const FUNCTIONS: &[(&str, &str)] = &[(sig::SET, "set")];
static TABLE: OnceLock<Vec<(Selector, &'static str)>> = OnceLock::new();

/// A one-slot register, used as the destination of invocation payloads.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Target {
    pub value: u64,
    pub writes: u64,
    pub last_writer: Option<Address>,
}

impl Contract for Target {
    fn kind(&self) -> &'static str {
        "target"
    }

    fn function_name(&self, s: Selector) -> Option<&'static str> {
        resolve(&TABLE, FUNCTIONS, s)
    }

    fn call(&mut self, env: &mut Env<'_>, ctx: &CallContext, _s: Selector, args: &[u8]) -> Result<Vec<u8>, Revert> {
        self.value = decode_args(args)?;
        self.writes += 1;
        self.last_writer = Some(ctx.sender);
        env.emit(ctx.this, "Set", vec![("value", self.value.to_string())]);
        Ok(Vec::new())
    }

    fn clone_box(&self) -> Box<dyn Contract> {
        Box::new(self.clone())
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}
