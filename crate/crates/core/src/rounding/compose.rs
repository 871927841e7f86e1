use super::marking::Marking;
use super::policy::{BlockPolicy, Guard, PricingPolicy};
use crate::error::{Error, Result};
use crate::model::{BinId, BlockScope, LaminarInstance};

/// Dispatches each arrival to the policy of its block and guards every large bin with a hard
/// counter at its original capacity.
pub fn compose_policies(inst: &LaminarInstance, mk: &Marking, policies: Vec<BlockPolicy>) -> Result<PricingPolicy> {
    let has = |scope: BlockScope| policies.iter().any(|p| p.block().scope() == scope);
    for &b in mk.small_maximal() {
        if !has(BlockScope::Bin(b)) {
            let e = inst.bin(b).members[0];
            return Err(Error::PolicyMismatch(format!(
                "element {e} not covered by any small bin policy (bin {b} has none)"
            )));
        }
    }
    for &e in mk.singletons() {
        if !has(BlockScope::Element(e)) {
            return Err(Error::PolicyMismatch(format!("element {e} not covered by any policy")));
        }
    }
    let guards = mk
        .large()
        .iter()
        .map(|&b| Guard {
            bin: b,
            capacity: inst.bin(b).capacity,
            members: inst.bin(b).members.clone(),
        })
        .collect();
    PricingPolicy::new(inst.num_elements(), policies, guards)
}

/// Guard on the whole element set, e.g. a shipping capacity enforced at run time.
pub fn root_guard(inst: &LaminarInstance, capacity: u32) -> Guard {
    Guard {
        bin: BinId(0),
        capacity,
        members: inst.bin(inst.root()).members.clone(),
    }
}
