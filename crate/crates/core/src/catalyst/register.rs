//! Copy registers: the operations the catalyst pipeline needs from a block,
//! for plain states on `S^{⊗k}` and for cq states on `(S⊗W)^{⊗k}`.
//!
//! A slot is one copy of the system (together with one storage site in the
//! cq case). Slot 0 is the most significant factor.

use crate::channel::LabeledState;
use crate::divergences::entropy;
use crate::error::{Error, Result};
use crate::qops::linalg::{self, CMatrix};
use crate::qops::{
    cyclic_shift_perm, partial_trace, permute_subsystems, tensor_capped, trace_distance, CqOperator, DensityOperator,
    Operator,
};

pub trait Register: Clone + Send + Sync {
    /// The register with no slots, a 1x1 operator of trace one.
    fn empty() -> Self;
    fn slots(&self) -> usize;
    /// `head ⊗ self`; `head` occupies one slot.
    fn prepend(&self, head: &Self, cap: usize) -> Result<Self>;
    /// Last slot moves to position 0.
    fn rotate_last_to_front(&self) -> Result<Self>;
    /// Marginal on slots `0..k`.
    fn keep_first(&self, k: usize) -> Result<Self>;
    /// Marginal on slots `1..`.
    fn drop_first(&self) -> Result<Self>;
    fn entropy(&self) -> f64;
    fn distance(&self, other: &Self) -> Result<f64>;
    /// `Σ w_i X_i` over operators of one shape.
    fn combine(parts: &[(f64, &Self)]) -> Result<Self>;
}

fn is_empty_density(x: &DensityOperator) -> bool {
    x.dims() == [1]
}

impl Register for DensityOperator {
    fn empty() -> Self {
        DensityOperator::basis(1, 0)
    }

    fn slots(&self) -> usize {
        if is_empty_density(self) {
            0
        } else {
            self.dims().len()
        }
    }

    fn prepend(&self, head: &Self, cap: usize) -> Result<Self> {
        if is_empty_density(self) {
            return Ok(head.clone());
        }
        tensor_capped(&[head, self], cap)
    }

    fn rotate_last_to_front(&self) -> Result<Self> {
        match self.slots() {
            0 | 1 => Ok(self.clone()),
            k => permute_subsystems(self, &cyclic_shift_perm(k)),
        }
    }

    fn keep_first(&self, k: usize) -> Result<Self> {
        if k > self.slots() {
            return Err(Error::dim(format!("marginal on {k} of {} slots", self.slots())));
        }
        if k == self.slots() {
            return Ok(self.clone());
        }
        partial_trace(self, &(0..k).collect::<Vec<_>>())
    }

    fn drop_first(&self) -> Result<Self> {
        let k = self.slots();
        if k == 0 {
            return Err(Error::dim("no slot to trace out"));
        }
        partial_trace(self, &(1..k).collect::<Vec<_>>())
    }

    fn entropy(&self) -> f64 {
        entropy(self)
    }

    fn distance(&self, other: &Self) -> Result<f64> {
        trace_distance(self, other)
    }

    fn combine(parts: &[(f64, &Self)]) -> Result<Self> {
        let (_, first) = parts.first().ok_or_else(|| Error::arg("nothing to combine"))?;
        let mut m = CMatrix::zeros(first.dim(), first.dim());
        for (w, x) in parts {
            if x.dim() != first.dim() {
                return Err(Error::dim("combined blocks differ in dimension"));
            }
            m += x.matrix().scale(*w);
        }
        Ok(DensityOperator::from_raw(first.dims().to_vec(), linalg::hermitize(&m)))
    }
}

impl Register for CqOperator {
    fn empty() -> Self {
        CqOperator::classical_product(&[])
    }

    fn slots(&self) -> usize {
        self.w_sites()
    }

    fn prepend(&self, head: &Self, cap: usize) -> Result<Self> {
        if head.w_sites() != 1 || head.s_dims().len() != 1 {
            return Err(Error::dim("a cq slot is one system factor and one storage site"));
        }
        head.tensor(self, cap)
    }

    fn rotate_last_to_front(&self) -> Result<Self> {
        match self.slots() {
            0 | 1 => Ok(self.clone()),
            k => self.permute(&cyclic_shift_perm(k), &cyclic_shift_perm(k)),
        }
    }

    fn keep_first(&self, k: usize) -> Result<Self> {
        if k > self.slots() {
            return Err(Error::dim(format!("marginal on {k} of {} slots", self.slots())));
        }
        if k == self.slots() {
            return Ok(self.clone());
        }
        let keep: Vec<usize> = (0..k).collect();
        self.partial_trace(&keep, &keep)
    }

    fn drop_first(&self) -> Result<Self> {
        let k = self.slots();
        if k == 0 {
            return Err(Error::dim("no slot to trace out"));
        }
        let keep: Vec<usize> = (1..k).collect();
        self.partial_trace(&keep, &keep)
    }

    fn entropy(&self) -> f64 {
        self.spectrum().into_iter().filter(|&x| x > 0.0).map(|x| -x * x.ln()).sum()
    }

    fn distance(&self, other: &Self) -> Result<f64> {
        self.trace_distance(other)
    }

    fn combine(parts: &[(f64, &Self)]) -> Result<Self> {
        let (_, first) = parts.first().ok_or_else(|| Error::arg("nothing to combine"))?;
        let mut acc = first.scale(0.0);
        for (w, x) in parts {
            acc = acc.add_scaled(*w, x)?;
        }
        Ok(acc)
    }
}

/// `S(Σ_k w_k X_k ⊗ |k⟩⟨k|) = H(w) + Σ_k w_k S(X_k)`.
pub fn labeled_entropy<B: Register>(x: &LabeledState<B>) -> f64 {
    x.label_entropy() + x.weights.iter().zip(&x.blocks).map(|(w, b)| w * b.entropy()).sum::<f64>()
}

/// Trace distance of two labelled states with equal label weights.
pub fn labeled_distance<B: Register>(a: &LabeledState<B>, b: &LabeledState<B>) -> Result<f64> {
    if a.label_dim() != b.label_dim() {
        return Err(Error::dim("label registers differ"));
    }
    let mut total = 0.0;
    for k in 0..a.label_dim() {
        let (wa, wb) = (a.weights[k], b.weights[k]);
        if (wa - wb).abs() > 1e-15 {
            return Err(Error::arg("labelled distance needs equal label weights"));
        }
        total += wa * a.blocks[k].distance(&b.blocks[k])?;
    }
    Ok(total)
}

/// Marginal on slot 0 with the label register traced out.
pub fn system_marginal<B: Register>(x: &LabeledState<B>) -> Result<B> {
    let firsts = x.blocks.iter().map(|b| b.keep_first(1)).collect::<Result<Vec<_>>>()?;
    let parts: Vec<(f64, &B)> = x.weights.iter().copied().zip(&firsts).collect();
    B::combine(&parts)
}

/// Marginal on slots `1..` together with the label register.
pub fn catalyst_marginal<B: Register>(x: &LabeledState<B>) -> Result<LabeledState<B>> {
    x.map_blocks(|_, b| b.drop_first())
}

/// `I(S:C)` between slot 0 and the rest (slots `1..` and the label).
pub fn slot_mutual_information<B: Register>(x: &LabeledState<B>) -> Result<f64> {
    let s = system_marginal(x)?.entropy();
    let c = labeled_entropy(&catalyst_marginal(x)?);
    Ok((s + c - labeled_entropy(x)).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergences::mutual_information;
    use crate::qops::random::random_state;
    use crate::qops::tensor;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn density_slots_and_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_state(&mut rng, 2);
        let b = random_state(&mut rng, 2);
        let e = DensityOperator::empty();
        assert_eq!(e.slots(), 0);
        assert_eq!(e.prepend(&a, 4096).unwrap(), a);
        let ab = b.prepend(&a, 4096).unwrap();
        assert_eq!(ab.slots(), 2);
        let ba = ab.rotate_last_to_front().unwrap();
        assert!(trace_distance(&ba, &tensor(&[&b, &a]).unwrap()).unwrap() < 1e-15);
        assert!(trace_distance(&ab.keep_first(1).unwrap(), &a).unwrap() < 1e-14);
        assert!(trace_distance(&ab.drop_first().unwrap(), &b).unwrap() < 1e-14);
        assert_eq!(a.drop_first().unwrap().slots(), 0);
    }

    #[test]
    fn cq_slots_move_together() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = CqOperator::with_label(&random_state(&mut rng, 2), 1, 0);
        let b = CqOperator::with_label(&random_state(&mut rng, 2), 1, 1);
        let ab = b.prepend(&a, 4096).unwrap();
        let ba = ab.rotate_last_to_front().unwrap();
        let expect = a.prepend(&b, 4096).unwrap();
        assert!(ba.distance(&expect).unwrap() < 1e-15);
        assert!(ab.drop_first().unwrap().distance(&b).unwrap() < 1e-14);
        assert_eq!(CqOperator::empty().prepend(&a, 4096).unwrap().slots(), 1);
    }

    #[test]
    fn single_label_mutual_information_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_state(&mut rng, 4).with_dims(vec![2, 2]).unwrap();
        let labeled = LabeledState::uniform(vec![x.clone()]).unwrap();
        let direct = mutual_information(&x, &[0]).unwrap();
        assert!((slot_mutual_information(&labeled).unwrap() - direct).abs() < 1e-12);
    }
}
