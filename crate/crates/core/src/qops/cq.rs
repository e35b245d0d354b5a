//! Classical-quantum operators: a dense part on quantum subsystems `S`,
//! block-diagonal in the computational basis of `w` classical qubits `W`.
//!
//! The block for bit string `y` sits at index `y`, with site 0 as the most
//! significant bit. Work registers stay diagonal under every map used here,
//! which keeps their cost linear in the number of blocks instead of quadratic.

use super::linalg::{self, CMatrix};
use super::operator::{partial_trace, permute_subsystems, DensityOperator, HermitianOperator, Operator};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct CqOperator {
    s_dims: Vec<usize>,
    w_sites: usize,
    blocks: Vec<CMatrix>,
}

fn bit(y: usize, site: usize, w: usize) -> usize {
    (y >> (w - 1 - site)) & 1
}

impl CqOperator {
    pub fn new(s_dims: Vec<usize>, w_sites: usize, blocks: Vec<CMatrix>) -> Result<Self> {
        let d: usize = s_dims.iter().product();
        if blocks.len() != 1 << w_sites {
            return Err(Error::dim(format!("{} blocks for {w_sites} classical sites", blocks.len())));
        }
        if blocks.iter().any(|b| b.nrows() != d || b.ncols() != d) {
            return Err(Error::dim(format!("blocks must be {d}x{d} for S dims {s_dims:?}")));
        }
        Ok(CqOperator { s_dims, w_sites, blocks })
    }

    pub fn from_operator(op: &impl Operator) -> Self {
        CqOperator { s_dims: op.dims().to_vec(), w_sites: 0, blocks: vec![op.matrix().clone()] }
    }

    /// `X ⊗ |y⟩⟨y|` on `w_sites` classical sites.
    pub fn with_label(op: &impl Operator, w_sites: usize, y: usize) -> Self {
        let d = op.dim();
        let mut blocks = vec![CMatrix::zeros(d, d); 1 << w_sites];
        blocks[y] = op.matrix().clone();
        CqOperator { s_dims: op.dims().to_vec(), w_sites, blocks }
    }

    /// Product of diagonal qubit states on classical sites only.
    pub fn classical_product(sites: &[[f64; 2]]) -> Self {
        let w = sites.len();
        let blocks = (0..1usize << w)
            .map(|y| {
                let p: f64 = (0..w).map(|i| sites[i][bit(y, i, w)]).product();
                CMatrix::from_element(1, 1, linalg::c(p))
            })
            .collect();
        CqOperator { s_dims: vec![], w_sites: w, blocks }
    }

    pub fn s_dims(&self) -> &[usize] {
        &self.s_dims
    }

    pub fn s_dim(&self) -> usize {
        self.s_dims.iter().product()
    }

    pub fn w_sites(&self) -> usize {
        self.w_sites
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block(&self, y: usize) -> &CMatrix {
        &self.blocks[y]
    }

    pub fn map_blocks(&self, f: impl Fn(usize, &CMatrix) -> CMatrix) -> Self {
        CqOperator {
            s_dims: self.s_dims.clone(),
            w_sites: self.w_sites,
            blocks: self.blocks.iter().enumerate().map(|(y, b)| f(y, b)).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        self.blocks.iter().map(linalg::trace_re).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_blocks(|_, b| b.scale(s))
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.s_dim() != other.s_dim() || self.w_sites != other.w_sites {
            return Err(Error::dim(format!(
                "cq shapes differ: S {:?}/W {} vs S {:?}/W {}",
                self.s_dims, self.w_sites, other.s_dims, other.w_sites
            )));
        }
        Ok(())
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, s: f64, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.map_blocks(|y, b| b + other.blocks[y].scale(s)))
    }

    /// `self ⊗ other`, with S parts and W parts each concatenated in order.
    pub fn tensor(&self, other: &Self, cap: usize) -> Result<Self> {
        let d = self.s_dim() * other.s_dim();
        if d > cap {
            return Err(Error::SizeCap { dim: d, cap });
        }
        let mut blocks = Vec::with_capacity(self.blocks.len() * other.blocks.len());
        for a in &self.blocks {
            for b in &other.blocks {
                blocks.push(linalg::kron(a, b));
            }
        }
        let mut s_dims = self.s_dims.clone();
        s_dims.extend_from_slice(&other.s_dims);
        Ok(CqOperator { s_dims, w_sites: self.w_sites + other.w_sites, blocks })
    }

    /// Keeps the listed S subsystems and W sites (each in increasing order).
    pub fn partial_trace(&self, keep_s: &[usize], keep_w: &[usize]) -> Result<Self> {
        let mut keep_w = keep_w.to_vec();
        keep_w.sort_unstable();
        keep_w.dedup();
        if keep_w.iter().any(|&k| k >= self.w_sites) {
            return Err(Error::dim(format!("W sites {keep_w:?} out of range")));
        }
        let kw = keep_w.len();
        let d = self.s_dim();
        let mut summed = vec![CMatrix::zeros(d, d); 1 << kw];
        for (y, b) in self.blocks.iter().enumerate() {
            let mut z = 0usize;
            for &site in &keep_w {
                z = (z << 1) | bit(y, site, self.w_sites);
            }
            summed[z] += b;
        }
        let (s_dims, blocks) = if keep_s.is_empty() {
            let blocks = summed.iter().map(|b| CMatrix::from_element(1, 1, linalg::trace(b))).collect();
            (vec![], blocks)
        } else if self.s_dims.is_empty() {
            return Err(Error::dim("no S subsystems to keep"));
        } else {
            let mut dims = None;
            let mut blocks = Vec::with_capacity(summed.len());
            for b in summed {
                let h = partial_trace(&HermitianOperator::from_raw(self.s_dims.clone(), b), keep_s)?;
                dims = Some(h.dims().to_vec());
                blocks.push(h.into_matrix());
            }
            (dims.expect("at least one block"), blocks)
        };
        Ok(CqOperator { s_dims, w_sites: kw, blocks })
    }

    /// Output S subsystem `j` is input `s_perm[j]`; likewise for W sites.
    pub fn permute(&self, s_perm: &[usize], w_perm: &[usize]) -> Result<Self> {
        let w = self.w_sites;
        let mut seen = vec![false; w];
        if w_perm.len() != w || w_perm.iter().any(|&p| p >= w || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::arg(format!("{w_perm:?} is not a permutation of {w} sites")));
        }
        let mut blocks = vec![CMatrix::zeros(0, 0); 1 << w];
        let mut s_dims = self.s_dims.clone();
        for (y, b) in self.blocks.iter().enumerate() {
            let mut z = 0usize;
            for &src in w_perm {
                z = (z << 1) | bit(y, src, w);
            }
            let h = if self.s_dims.len() > 1 {
                let h = permute_subsystems(&HermitianOperator::from_raw(self.s_dims.clone(), b.clone()), s_perm)?;
                s_dims = h.dims().to_vec();
                h.into_matrix()
            } else {
                if s_perm.len() != self.s_dims.len() {
                    return Err(Error::arg("S permutation length mismatch"));
                }
                b.clone()
            };
            blocks[z] = h;
        }
        Ok(CqOperator { s_dims, w_sites: w, blocks })
    }

    /// `½ Σ_y ‖X_y - Y_y‖₁`.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(0.5
            * self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| linalg::trace_norm_hermitian(&(a - b)))
                .sum::<f64>())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.blocks.iter().map(linalg::min_eigenvalue).fold(f64::INFINITY, f64::min)
    }

    /// Eigenvalues of all blocks, concatenated.
    pub fn spectrum(&self) -> Vec<f64> {
        self.blocks.iter().flat_map(linalg::eigvalsh).collect()
    }

    /// Dense matrix on `S ⊗ W` (W least significant).
    pub fn to_dense(&self) -> CMatrix {
        let d = self.s_dim();
        let nb = self.blocks.len();
        let mut out = CMatrix::zeros(d * nb, d * nb);
        for (y, b) in self.blocks.iter().enumerate() {
            for j in 0..d {
                for i in 0..d {
                    out[(i * nb + y, j * nb + y)] = b[(i, j)];
                }
            }
        }
        out
    }

    pub fn dense_dims(&self) -> Vec<usize> {
        let mut dims = self.s_dims.clone();
        dims.extend(std::iter::repeat_n(2, self.w_sites));
        if dims.is_empty() {
            dims.push(1);
        }
        dims
    }

    /// Validates and converts to a density operator on `S ⊗ W`.
    pub fn to_density(&self) -> Result<DensityOperator> {
        DensityOperator::new(self.dense_dims(), self.to_dense())
    }

    /// The S part when there are no classical sites.
    pub fn quantum_part(&self) -> Result<DensityOperator> {
        if self.w_sites != 0 {
            return Err(Error::dim("operator still carries classical sites"));
        }
        Ok(DensityOperator::from_raw(self.s_dims.clone(), self.blocks[0].clone()))
    }
}
