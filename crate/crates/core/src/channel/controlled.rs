//! Label-controlled maps on states that are block diagonal in a classical
//! label register. Blocks are kept separately and never assembled densely.

use super::lemma2::TernaryChannel;
use super::measure_prepare::{IdentityMap, LinearMap, MeasurePrepareChannel};
use crate::error::{Error, Result};
use crate::qops::{CqOperator, DensityOperator, Operator};

/// `Σ_k w_k X_k ⊗ |k⟩⟨k|`, label index `k` counted from zero.
#[derive(Clone, Debug)]
pub struct LabeledState<B> {
    pub weights: Vec<f64>,
    pub blocks: Vec<B>,
}

impl<B> LabeledState<B> {
    pub fn new(weights: Vec<f64>, blocks: Vec<B>) -> Result<Self> {
        if weights.len() != blocks.len() || weights.is_empty() {
            return Err(Error::dim(format!("{} weights for {} blocks", weights.len(), blocks.len())));
        }
        if weights.iter().any(|&w| !(w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::arg("label weights must form a probability vector"));
        }
        Ok(LabeledState { weights, blocks })
    }

    pub fn uniform(blocks: Vec<B>) -> Result<Self> {
        let n = blocks.len();
        Self::new(vec![1.0 / n.max(1) as f64; n], blocks)
    }

    pub fn label_dim(&self) -> usize {
        self.blocks.len()
    }

    /// Relabels `k → k+1` and the last label to the first.
    pub fn rotate_labels(mut self) -> Self {
        self.weights.rotate_right(1);
        self.blocks.rotate_right(1);
        self
    }

    pub fn map_blocks<C>(&self, f: impl Fn(usize, &B) -> Result<C>) -> Result<LabeledState<C>> {
        let blocks = self.blocks.iter().enumerate().map(|(k, b)| f(k, b)).collect::<Result<Vec<_>>>()?;
        Ok(LabeledState { weights: self.weights.clone(), blocks })
    }

    /// Shannon entropy of the label distribution.
    pub fn label_entropy(&self) -> f64 {
        self.weights.iter().filter(|&&w| w > 0.0).map(|&w| -w * w.ln()).sum()
    }
}

/// A map acting on one label block.
pub trait BlockChannel<B> {
    fn apply_block(&self, x: &B) -> Result<B>;
}

impl BlockChannel<DensityOperator> for MeasurePrepareChannel {
    fn apply_block(&self, x: &DensityOperator) -> Result<DensityOperator> {
        self.apply(x)
    }
}

impl BlockChannel<DensityOperator> for IdentityMap {
    fn apply_block(&self, x: &DensityOperator) -> Result<DensityOperator> {
        if x.dim() != self.input_dim() {
            return Err(Error::dim(format!("identity on dimension {} applied to {}", self.input_dim(), x.dim())));
        }
        Ok(x.clone())
    }
}

impl BlockChannel<CqOperator> for TernaryChannel {
    fn apply_block(&self, x: &CqOperator) -> Result<CqOperator> {
        self.apply(x)
    }
}

/// Applies `channel` to the block with label `active` and the identity to
/// all others.
pub struct LabelControlled<'a, C: ?Sized> {
    channel: &'a C,
    label_dim: usize,
    active: usize,
}

impl<'a, C: ?Sized> LabelControlled<'a, C> {
    pub fn new(channel: &'a C, label_dim: usize, active: usize) -> Result<Self> {
        if active >= label_dim {
            return Err(Error::arg(format!("active label {active} out of range for {label_dim} labels")));
        }
        Ok(LabelControlled { channel, label_dim, active })
    }

    pub fn apply<B: Clone>(&self, x: &LabeledState<B>) -> Result<LabeledState<B>>
    where
        C: BlockChannel<B>,
    {
        if x.label_dim() != self.label_dim {
            return Err(Error::dim(format!("{} labels, controller expects {}", x.label_dim(), self.label_dim)));
        }
        let mut out = x.clone();
        out.blocks[self.active] = self.channel.apply_block(&x.blocks[self.active])?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qops::trace_distance;

    fn two_labels() -> LabeledState<DensityOperator> {
        LabeledState::new(vec![0.25, 0.75], vec![DensityOperator::basis(2, 0), DensityOperator::plus()]).unwrap()
    }

    #[test]
    fn single_label_reduces_to_the_channel() {
        let ch = MeasurePrepareChannel::constant(vec![2], DensityOperator::basis(2, 1));
        let x = LabeledState::uniform(vec![DensityOperator::plus()]).unwrap();
        let y = LabelControlled::new(&ch, 1, 0).unwrap().apply(&x).unwrap();
        assert_eq!(y.blocks[0], DensityOperator::basis(2, 1));
    }

    #[test]
    fn inactive_blocks_are_untouched() {
        let ch = MeasurePrepareChannel::constant(vec![2], DensityOperator::basis(2, 1));
        let x = two_labels();
        let y = LabelControlled::new(&ch, 2, 1).unwrap().apply(&x).unwrap();
        assert!(trace_distance(&y.blocks[0], &x.blocks[0]).unwrap() < 1e-12);
        assert_eq!(y.blocks[1], DensityOperator::basis(2, 1));
        assert_eq!(y.weights, x.weights);
        assert!(LabelControlled::new(&ch, 2, 2).is_err());
    }

    #[test]
    fn rotation_moves_the_last_label_first() {
        let x = two_labels().rotate_labels();
        assert_eq!(x.weights, vec![0.75, 0.25]);
        assert_eq!(x.blocks[0], DensityOperator::plus());
    }
}
