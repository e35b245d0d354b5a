use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::qops::json::MatrixJson;
use crate::qops::linalg::{self, CMatrix, ZERO};
use crate::qops::{DensityOperator, HermitianOperator, Operator};

/// A linear map between operator spaces, given by its action on matrices.
pub trait LinearMap {
    fn input_dims(&self) -> &[usize];
    fn output_dims(&self) -> &[usize];
    fn apply_matrix(&self, x: &CMatrix) -> CMatrix;

    fn input_dim(&self) -> usize {
        self.input_dims().iter().product()
    }

    fn output_dim(&self) -> usize {
        self.output_dims().iter().product()
    }
}

/// The identity channel on a fixed space.
#[derive(Clone, Debug)]
pub struct IdentityMap {
    dims: Vec<usize>,
}

impl IdentityMap {
    pub fn new(dims: Vec<usize>) -> Self {
        IdentityMap { dims }
    }
}

impl LinearMap for IdentityMap {
    fn input_dims(&self) -> &[usize] {
        &self.dims
    }
    fn output_dims(&self) -> &[usize] {
        &self.dims
    }
    fn apply_matrix(&self, x: &CMatrix) -> CMatrix {
        x.clone()
    }
}

#[derive(Clone, Debug)]
pub struct Branch {
    pub effect: HermitianOperator,
    pub prep: DensityOperator,
}

/// `X ↦ Σ_i Tr[E_i X] σ_i`.
#[derive(Clone, Debug)]
pub struct MeasurePrepareChannel {
    input_dims: Vec<usize>,
    output_dims: Vec<usize>,
    branches: Vec<Branch>,
}

impl MeasurePrepareChannel {
    /// Checks shapes only; use [`verify_cptp`](super::verify_cptp) for the
    /// operator inequalities.
    pub fn new(input_dims: Vec<usize>, output_dims: Vec<usize>, branches: Vec<Branch>) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::arg("a measure-and-prepare channel needs at least one branch"));
        }
        let din: usize = input_dims.iter().product();
        let dout: usize = output_dims.iter().product();
        for (i, b) in branches.iter().enumerate() {
            if b.effect.dim() != din || b.prep.dim() != dout {
                return Err(Error::dim(format!(
                    "branch {i}: effect {} / prep {} against input {din} / output {dout}",
                    b.effect.dim(),
                    b.prep.dim()
                )));
            }
        }
        Ok(MeasurePrepareChannel { input_dims, output_dims, branches })
    }

    /// The map `X ↦ Tr[X] σ`.
    pub fn constant(input_dims: Vec<usize>, prep: DensityOperator) -> Self {
        let output_dims = prep.dims().to_vec();
        let effect = HermitianOperator::identity(input_dims.clone());
        MeasurePrepareChannel { input_dims, output_dims, branches: vec![Branch { effect, prep }] }
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// Outcome probabilities `Tr[E_i ρ]`.
    pub fn probabilities(&self, state: &impl Operator) -> Result<Vec<f64>> {
        self.check_input(state)?;
        Ok(self.branches.iter().map(|b| linalg::trace_product(b.effect.matrix(), state.matrix()).re).collect())
    }

    fn check_input(&self, state: &impl Operator) -> Result<()> {
        if state.dim() != self.input_dim() {
            return Err(Error::dim(format!("channel input {} vs state {}", self.input_dim(), state.dim())));
        }
        Ok(())
    }

    fn combine(&self, probs: &[f64]) -> CMatrix {
        let d = self.output_dim();
        let mut out = CMatrix::zeros(d, d);
        for (p, b) in probs.iter().zip(&self.branches) {
            out += b.prep.matrix().scale(*p);
        }
        out
    }

    pub fn apply(&self, state: &DensityOperator) -> Result<DensityOperator> {
        let p = self.probabilities(state)?;
        Ok(DensityOperator::from_raw(self.output_dims.clone(), self.combine(&p)))
    }

    /// Action on an arbitrary Hermitian operator (linear extension).
    pub fn apply_operator(&self, op: &HermitianOperator) -> Result<HermitianOperator> {
        let p = self.probabilities(op)?;
        Ok(HermitianOperator::from_raw(self.output_dims.clone(), self.combine(&p)))
    }

    pub fn to_json(&self) -> ChannelJson {
        ChannelJson {
            input_dims: self.input_dims.clone(),
            output_dims: self.output_dims.clone(),
            branches: self
                .branches
                .iter()
                .map(|b| BranchJson { effect: MatrixJson::from_operator(&b.effect), prep: MatrixJson::from_operator(&b.prep) })
                .collect(),
        }
    }

    pub fn from_json(j: &ChannelJson, tol: &Tolerances) -> Result<Self> {
        let branches = j
            .branches
            .iter()
            .map(|b| Ok(Branch { effect: b.effect.to_hermitian(tol)?, prep: b.prep.to_density(tol)? }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(j.input_dims.clone(), j.output_dims.clone(), branches)
    }
}

impl LinearMap for MeasurePrepareChannel {
    fn input_dims(&self) -> &[usize] {
        &self.input_dims
    }
    fn output_dims(&self) -> &[usize] {
        &self.output_dims
    }
    fn apply_matrix(&self, x: &CMatrix) -> CMatrix {
        let d = self.output_dim();
        let mut out = CMatrix::zeros(d, d);
        for b in &self.branches {
            let w = linalg::trace_product(b.effect.matrix(), x);
            out += b.prep.matrix().map(|z| z * w);
        }
        out
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchJson {
    pub effect: MatrixJson,
    pub prep: MatrixJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelJson {
    pub input_dims: Vec<usize>,
    pub output_dims: Vec<usize>,
    pub branches: Vec<BranchJson>,
}

/// Unnormalized Choi matrix `Σ_{ij} |i⟩⟨j| ⊗ Λ(|i⟩⟨j|)`, input factor first.
pub fn choi(map: &(impl LinearMap + Sync), tol: &Tolerances) -> Result<CMatrix> {
    let din = map.input_dim();
    let dout = map.output_dim();
    if din > tol.max_choi_input {
        return Err(Error::SizeCap { dim: din, cap: tol.max_choi_input });
    }
    if din * dout > tol.max_dim {
        return Err(Error::SizeCap { dim: din * dout, cap: tol.max_dim });
    }
    let blocks: Vec<(usize, usize, CMatrix)> = (0..din * din)
        .into_par_iter()
        .map(|ij| {
            let (i, j) = (ij / din, ij % din);
            let mut e = CMatrix::zeros(din, din);
            e[(i, j)] = linalg::ONE;
            (i, j, map.apply_matrix(&e))
        })
        .collect();
    let mut out = CMatrix::from_element(din * dout, din * dout, ZERO);
    for (i, j, b) in blocks {
        out.view_mut((i * dout, j * dout), (dout, dout)).copy_from(&b);
    }
    Ok(out)
}
