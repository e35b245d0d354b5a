//! Hermitian and density operators on a tensor product of finite subsystems.
//!
//! Subsystem 0 is the most significant digit of the row-major basis index.

use nalgebra::DVector;

use super::linalg::{self, c, CMatrix, C64};
use crate::config::Tolerances;
use crate::error::{Error, Result, Violation};

/// Common shape of operators that carry a subsystem layout.
pub trait Operator: Clone {
    fn dims(&self) -> &[usize];
    fn matrix(&self) -> &CMatrix;

    /// Rebuilds an operator of the same kind without validation. Used by the
    /// structural maps in this module, all of which preserve the invariants.
    #[doc(hidden)]
    fn from_raw(dims: Vec<usize>, matrix: CMatrix) -> Self;

    fn dim(&self) -> usize {
        self.matrix().nrows()
    }

    fn eigh(&self) -> linalg::Eigen {
        linalg::eigh(self.matrix())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    dims: Vec<usize>,
    matrix: CMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    dims: Vec<usize>,
    matrix: CMatrix,
}

impl Operator for HermitianOperator {
    fn dims(&self) -> &[usize] {
        &self.dims
    }
    fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
    fn from_raw(dims: Vec<usize>, matrix: CMatrix) -> Self {
        HermitianOperator { dims, matrix }
    }
}

impl Operator for DensityOperator {
    fn dims(&self) -> &[usize] {
        &self.dims
    }
    fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
    fn from_raw(dims: Vec<usize>, matrix: CMatrix) -> Self {
        DensityOperator { dims, matrix }
    }
}

fn check_shape(dims: &[usize], m: &CMatrix) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::dim(format!("subsystem dimensions must be positive, got {dims:?}")));
    }
    let total = dims.iter().try_fold(1usize, |a, &d| a.checked_mul(d));
    match total {
        Some(t) if t == m.nrows() && t == m.ncols() => Ok(()),
        _ => Err(Error::dim(format!(
            "dims {dims:?} do not match a {}x{} matrix",
            m.nrows(),
            m.ncols()
        ))),
    }
}

fn check_hermitian(m: &CMatrix, tol: &Tolerances) -> Result<()> {
    let defect = linalg::hermiticity_defect(m);
    if defect > tol.hermitian * linalg::max_abs(m).max(1.0) {
        return Err(Error::Invariant(Violation::NotHermitian(defect)));
    }
    Ok(())
}

impl HermitianOperator {
    pub fn new(dims: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        Self::new_with(dims, matrix, &Tolerances::DEFAULT)
    }

    pub fn new_with(dims: Vec<usize>, matrix: CMatrix, tol: &Tolerances) -> Result<Self> {
        check_shape(&dims, &matrix)?;
        check_hermitian(&matrix, tol)?;
        Ok(HermitianOperator { dims, matrix: linalg::hermitize(&matrix) })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        HermitianOperator { dims: vec![values.len()], matrix: linalg::diag(values) }
    }

    pub fn identity(dims: Vec<usize>) -> Self {
        let d = dims.iter().product();
        HermitianOperator { dims, matrix: CMatrix::identity(d, d) }
    }

    pub fn zeros(dims: Vec<usize>) -> Self {
        let d = dims.iter().product();
        HermitianOperator { dims, matrix: CMatrix::zeros(d, d) }
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn scale(&self, s: f64) -> Self {
        HermitianOperator { dims: self.dims.clone(), matrix: self.matrix.scale(s) }
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, s: f64, other: &impl Operator) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::dim(format!("{} vs {}", self.dim(), other.dim())));
        }
        Ok(HermitianOperator {
            dims: self.dims.clone(),
            matrix: &self.matrix + other.matrix().scale(s),
        })
    }

    pub fn trace(&self) -> f64 {
        linalg::trace_re(&self.matrix)
    }

    /// Validates this operator as a state (Hermitian, unit trace, PSD).
    pub fn to_density(&self, tol: &Tolerances) -> Result<DensityOperator> {
        DensityOperator::new_with(self.dims.clone(), self.matrix.clone(), tol)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.matrix)
    }
}

impl DensityOperator {
    pub fn new(dims: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        Self::new_with(dims, matrix, &Tolerances::DEFAULT)
    }

    /// Checks shape, hermiticity, trace and positivity in that order and
    /// reports the first invariant that fails.
    pub fn new_with(dims: Vec<usize>, matrix: CMatrix, tol: &Tolerances) -> Result<Self> {
        check_shape(&dims, &matrix)?;
        check_hermitian(&matrix, tol)?;
        let tr = linalg::trace_re(&matrix);
        if (tr - 1.0).abs() > tol.trace {
            return Err(Error::Invariant(Violation::NotNormalized(tr)));
        }
        let m = linalg::hermitize(&matrix);
        let (lmin, norm) = linalg::psd_margin(&m);
        if lmin < -tol.psd * norm.max(1.0) {
            return Err(Error::Invariant(Violation::NotPositive(lmin)));
        }
        Ok(DensityOperator { dims, matrix: m })
    }

    /// Normalizes a PSD matrix to unit trace, validating positivity.
    pub fn from_psd(dims: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        let tr = linalg::trace_re(&matrix);
        if !(tr > 0.0) {
            return Err(Error::Invariant(Violation::NotNormalized(tr)));
        }
        Self::new(dims, matrix.unscale(tr))
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(vec![probs.len()], linalg::diag(probs))
    }

    pub fn pure(dims: Vec<usize>, psi: &DVector<C64>) -> Result<Self> {
        let n = psi.norm();
        if !(n > 0.0) {
            return Err(Error::arg("zero vector"));
        }
        let v = psi.unscale(n);
        Self::new(dims, linalg::outer(&v))
    }

    pub fn basis(d: usize, k: usize) -> Self {
        let mut p = vec![0.0; d];
        p[k] = 1.0;
        DensityOperator { dims: vec![d], matrix: linalg::diag(&p) }
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        DensityOperator { dims, matrix: CMatrix::identity(d, d).unscale(d as f64) }
    }

    /// `|+⟩⟨+|` on one qubit.
    pub fn plus() -> Self {
        DensityOperator { dims: vec![2], matrix: CMatrix::from_element(2, 2, c(0.5)) }
    }

    pub fn as_hermitian(&self) -> HermitianOperator {
        HermitianOperator { dims: self.dims.clone(), matrix: self.matrix.clone() }
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Convex combination `(1-s) self + s other`.
    pub fn mix(&self, s: f64, other: &DensityOperator) -> Result<Self> {
        if self.dim() != other.dim() || !(0.0..=1.0).contains(&s) {
            return Err(Error::arg("mix needs equal dimensions and s in [0,1]"));
        }
        Ok(DensityOperator {
            dims: self.dims.clone(),
            matrix: self.matrix.scale(1.0 - s) + other.matrix.scale(s),
        })
    }

    /// Expectation `Tr[A ρ]` for Hermitian `A`.
    pub fn expectation(&self, a: &CMatrix) -> f64 {
        linalg::trace_product(a, &self.matrix).re
    }

    pub fn with_dims(&self, dims: Vec<usize>) -> Result<Self> {
        check_shape(&dims, &self.matrix)?;
        Ok(DensityOperator { dims, matrix: self.matrix.clone() })
    }
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Full-space offsets of all basis states of the listed subsystems, in
/// row-major order over `subset`.
fn subset_offsets(dims: &[usize], strides: &[usize], subset: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &k in subset {
        let mut next = Vec::with_capacity(out.len() * dims[k]);
        for &base in &out {
            for v in 0..dims[k] {
                next.push(base + v * strides[k]);
            }
        }
        out = next;
    }
    out
}

fn product_dim(dims: &[usize], cap: usize) -> Result<usize> {
    let mut d = 1usize;
    for &x in dims {
        d = d.checked_mul(x).filter(|&v| v <= cap).ok_or(Error::SizeCap {
            dim: d.saturating_mul(x),
            cap,
        })?;
    }
    Ok(d)
}

/// Tensor product, refusing anything above the default dimension cap.
pub fn tensor<T: Operator>(ops: &[&T]) -> Result<T> {
    tensor_capped(ops, Tolerances::DEFAULT.max_dim)
}

pub fn tensor_capped<T: Operator>(ops: &[&T], cap: usize) -> Result<T> {
    let first = ops.first().ok_or_else(|| Error::arg("empty tensor product"))?;
    let dims: Vec<usize> = ops.iter().flat_map(|o| o.dims().iter().copied()).collect();
    product_dim(&dims, cap)?;
    let mut m = first.matrix().clone();
    for o in &ops[1..] {
        m = linalg::kron(&m, o.matrix());
    }
    Ok(T::from_raw(dims, m))
}

pub fn tensor_power<T: Operator>(op: &T, n: usize) -> Result<T> {
    if n == 0 {
        return Err(Error::arg("tensor power needs n >= 1"));
    }
    let refs: Vec<&T> = std::iter::repeat_n(op, n).collect();
    tensor(&refs)
}

/// Traces out every subsystem not listed in `keep`. Kept subsystems appear
/// in increasing order regardless of the order given; keeping nothing leaves
/// the trace as a 1x1 operator.
pub fn partial_trace<T: Operator>(op: &T, keep: &[usize]) -> Result<T> {
    let dims = op.dims();
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::dim(format!("keep {keep:?} out of range for {} subsystems", dims.len())));
    }
    if keep.is_empty() {
        let t = linalg::trace(op.matrix());
        return Ok(T::from_raw(vec![1], CMatrix::from_element(1, 1, t)));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let st = strides(dims);
    let ko = subset_offsets(dims, &st, &keep);
    let to = subset_offsets(dims, &st, &traced);
    let m = op.matrix();
    let dk = ko.len();
    let mut out = CMatrix::zeros(dk, dk);
    for j in 0..dk {
        for i in 0..dk {
            let mut s = linalg::ZERO;
            for &t in &to {
                s += m[(ko[i] + t, ko[j] + t)];
            }
            out[(i, j)] = s;
        }
    }
    Ok(T::from_raw(keep.iter().map(|&k| dims[k]).collect(), out))
}

/// Reorders subsystems so that output subsystem `j` is input subsystem `perm[j]`.
pub fn permute_subsystems<T: Operator>(op: &T, perm: &[usize]) -> Result<T> {
    let dims = op.dims();
    let n = dims.len();
    let mut seen = vec![false; n];
    if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
        return Err(Error::arg(format!("{perm:?} is not a permutation of {n} subsystems")));
    }
    let map = subset_offsets(dims, &strides(dims), perm);
    let m = op.matrix();
    let d = map.len();
    let out = CMatrix::from_fn(d, d, |i, j| m[(map[i], map[j])]);
    Ok(T::from_raw(perm.iter().map(|&p| dims[p]).collect(), out))
}

/// Cyclic shift used by the catalyst relabelling: the last subsystem moves to
/// the front and everything else moves one place right.
pub fn cyclic_shift_perm(n: usize) -> Vec<usize> {
    (0..n).map(|j| if j == 0 { n - 1 } else { j - 1 }).collect()
}

/// `½‖a - b‖₁` between operators of equal total dimension.
pub fn trace_distance(a: &impl Operator, b: &impl Operator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::dim(format!("trace distance of {} and {}", a.dim(), b.dim())));
    }
    Ok(0.5 * linalg::trace_norm_hermitian(&(a.matrix() - b.matrix())))
}
