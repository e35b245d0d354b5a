//! The correlated catalyst and the three processes that return it.
//!
//! With `Ξ = Λ(ρ^{⊗n})` and `Ξ_i` its marginal on the first `i` copies, the
//! catalyst is `c = (1/n) Σ_k ρ^{⊗k-1} ⊗ Ξ_{n-k} ⊗ |k⟩⟨k|`. The label-`k` block
//! of `ρ ⊗ c` is `ρ^{⊗k} ⊗ Ξ_{n-k}`; applying `Λ` on label `n`, relabelling
//! `k → k+1` and moving the last copy to the system slot leaves the catalyst
//! exactly in `c` and the system in the average single-copy marginal of `Ξ`.

use crate::channel::{BlockChannel, LabelControlled, LabeledState};
use crate::error::{Error, Result};

use super::register::Register;

#[derive(Clone, Debug)]
pub struct CatalystState<B> {
    pub n: usize,
    /// Label `k` (index `k-1`) holds `ρ^{⊗k-1} ⊗ Ξ_{n-k}` on `n-1` slots.
    pub labels: LabeledState<B>,
}

/// `head` is the single-slot input `ρ` (with `|a⟩` in the cq case) and `xi`
/// the `n`-slot output of the channel.
pub fn build_catalyst<B: Register>(head: &B, xi: &B, n: usize, cap: usize) -> Result<CatalystState<B>> {
    if n == 0 || xi.slots() != n {
        return Err(Error::dim(format!("Ξ has {} slots, expected n = {n} >= 1", xi.slots())));
    }
    if head.slots() != 1 {
        return Err(Error::dim("the system occupies exactly one slot"));
    }
    let blocks = (1..=n)
        .map(|k| {
            let mut b = xi.keep_first(n - k)?;
            for _ in 1..k {
                b = b.prepend(head, cap)?;
            }
            Ok(b)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CatalystState { n, labels: LabeledState::uniform(blocks)? })
}

/// `ρ ⊗ c`, blockwise.
pub fn attach<B: Register>(head: &B, catalyst: &CatalystState<B>, cap: usize) -> Result<LabeledState<B>> {
    catalyst.labels.map_blocks(|_, b| b.prepend(head, cap))
}

/// Processes I-III applied to `ρ ⊗ c`. Slot 0 of every output block is the
/// system.
pub fn catalytic_convert<B, C>(head: &B, catalyst: &CatalystState<B>, channel: &C, cap: usize) -> Result<LabeledState<B>>
where
    B: Register,
    C: BlockChannel<B> + ?Sized,
{
    let joint = attach(head, catalyst, cap)?;
    let n = catalyst.n;
    let processed = LabelControlled::new(channel, n, n - 1)?.apply(&joint)?;
    processed.rotate_labels().map_blocks(|_, b| b.rotate_last_to_front())
}
