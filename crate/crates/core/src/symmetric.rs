//! Permutation-invariant operators on `n` qubits via Schur-Weyl duality.
//!
//! `(C²)^{⊗n} ≅ ⊕_r Sym^{n-2r}(C²) ⊗ C^{m_r}` with `m_r = C(n,r) - C(n,r-1)`,
//! so an operator commuting with all copy permutations is a list of small
//! blocks, one per `r = 0..=n/2`, each repeated `m_r` times. Block `r` of
//! `A^{⊗n}` is `det(A)^r Sym^{n-2r}(A)`.
//!
//! `Sym^k` is never formed from polynomial coefficients, which cancel badly
//! for large `k`. Instead every block is a function of the Lie-algebra image
//! `dπ_k(|v⟩⟨v|)`, whose eigenvalues are the exact integers `0..=k`.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::qops::linalg::{self, c, CMatrix, Eigen, C64};
use crate::qops::Operator;

pub type Qubit = Matrix2<C64>;

pub fn qubit(op: &impl Operator) -> Result<Qubit> {
    let m = op.matrix();
    if m.nrows() != 2 {
        return Err(Error::dim(format!("expected a qubit operator, got dimension {}", m.nrows())));
    }
    Ok(Qubit::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]))
}

pub fn to_dense(q: &Qubit) -> CMatrix {
    CMatrix::from_fn(2, 2, |i, j| q[(i, j)])
}

pub fn multiplicity(n: usize, r: usize) -> f64 {
    if r == 0 {
        1.0
    } else {
        linalg::binomial(n, r) - linalg::binomial(n, r - 1)
    }
}

/// Hermitian eigenpairs of a 2x2 Hermitian matrix, largest first.
fn eig2(a: &Qubit) -> ([f64; 2], [Vector2<C64>; 2]) {
    let e = linalg::eigh(&to_dense(a));
    let v = |j: usize| Vector2::new(e.vectors[(0, j)], e.vectors[(1, j)]);
    ([e.values[1], e.values[0]], [v(1), v(0)])
}

/// `dπ_k(H) = Σ_l H_l` restricted to the symmetric subspace, in the Dicke
/// basis indexed by the number of `|1⟩` factors.
pub fn lie_image(h: &Qubit, k: usize) -> CMatrix {
    let mut m = CMatrix::zeros(k + 1, k + 1);
    for i in 0..=k {
        m[(i, i)] = h[(0, 0)] * (k - i) as f64 + h[(1, 1)] * i as f64;
        if i < k {
            let s = (((k - i) * (i + 1)) as f64).sqrt();
            m[(i + 1, i)] = h[(1, 0)] * s;
            m[(i, i + 1)] = h[(0, 1)] * s;
        }
    }
    m
}

/// Eigenbasis of `dπ_k(|v⟩⟨v|)`; eigenvalue `μ` counts the factors along `v`.
fn counting_basis(v: &Vector2<C64>, k: usize) -> Eigen {
    let p = v * v.adjoint();
    let mut e = linalg::eigh(&lie_image(&p, k));
    for x in &mut e.values {
        *x = x.round();
    }
    e
}

/// `Sym^k(A)` for Hermitian `A`.
pub fn sym_power(a: &Qubit, k: usize) -> CMatrix {
    let (lam, vecs) = eig2(a);
    if k == 0 {
        return CMatrix::from_element(1, 1, linalg::ONE);
    }
    counting_basis(&vecs[0], k).map(|mu| {
        let m = mu as i32;
        lam[0].powi(m) * lam[1].powi(k as i32 - m)
    })
}

/// Irrep blocks of a permutation-invariant operator on `n` qubits.
#[derive(Clone, Debug)]
pub struct SymOp {
    n: usize,
    blocks: Vec<CMatrix>,
}

impl SymOp {
    pub fn new(n: usize, blocks: Vec<CMatrix>) -> Result<Self> {
        if blocks.len() != n / 2 + 1 || blocks.iter().enumerate().any(|(r, b)| b.nrows() != n - 2 * r + 1) {
            return Err(Error::dim(format!("wrong irrep block shapes for {n} qubits")));
        }
        Ok(SymOp { n, blocks })
    }

    /// Blocks of `A^{⊗n}` for Hermitian `A`.
    pub fn power(a: &Qubit, n: usize) -> Self {
        let det = (a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)]).re;
        let blocks = (0..=n / 2).map(|r| sym_power(a, n - 2 * r).scale(det.powi(r as i32))).collect();
        SymOp { n, blocks }
    }

    pub fn copies(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn multiplicities(&self) -> Vec<f64> {
        (0..self.blocks.len()).map(|r| multiplicity(self.n, r)).collect()
    }

    pub fn trace(&self) -> f64 {
        self.weighted(linalg::trace_re)
    }

    fn weighted(&self, f: impl Fn(&CMatrix) -> f64) -> f64 {
        self.blocks.iter().enumerate().map(|(r, b)| multiplicity(self.n, r) * f(b)).sum()
    }

    pub fn trace_norm(&self) -> f64 {
        self.weighted(linalg::trace_norm_hermitian)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.blocks.iter().map(linalg::min_eigenvalue).fold(f64::INFINITY, f64::min)
    }

    pub fn sub(&self, other: &SymOp) -> Result<SymOp> {
        if self.n != other.n {
            return Err(Error::dim("copy counts differ"));
        }
        Ok(SymOp { n: self.n, blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a - b).collect() })
    }

    /// `Tr[A B]` for a second operator with the same block structure.
    pub fn trace_product(&self, other: &SymOp) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .enumerate()
            .map(|(r, (a, b))| multiplicity(self.n, r) * linalg::trace_product(a, b).re)
            .sum()
    }

    /// Eigenvalues with multiplicities `(value, count)`.
    pub fn spectrum(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for (r, b) in self.blocks.iter().enumerate() {
            let m = multiplicity(self.n, r);
            out.extend(linalg::eigvalsh(b).into_iter().map(|x| (x, m)));
        }
        out
    }
}

/// Operators of the form `F^{⊗n} (Σ_a f_a P_a) F^{†⊗n}` with `F = η^{1/2} [u₁ u₂]`
/// and `P_a` the projector onto strings with `a` factors along the first
/// frame vector. Powers of `η` and of any `ρ` with `η^{-1/2}ρη^{-1/2}` diagonal
/// in `{u₁,u₂}` have this form, and so do all their mixtures.
#[derive(Clone, Debug)]
pub struct TypeDiagonal {
    eta_sqrt: Qubit,
    frame: [Vector2<C64>; 2],
    weights: Vec<f64>,
}

impl TypeDiagonal {
    /// `weights[a]` multiplies the class with `a` factors along `frame[0]`.
    pub fn new(eta: &Qubit, frame: [Vector2<C64>; 2], weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::arg("type-diagonal operator needs at least one copy"));
        }
        let (lam, vecs) = eig2(eta);
        if lam[1] < 0.0 {
            return Err(Error::arg("frame operator must be positive semidefinite"));
        }
        let p0 = vecs[0] * vecs[0].adjoint();
        let p1 = vecs[1] * vecs[1].adjoint();
        let eta_sqrt = p0 * c(lam[0].sqrt()) + p1 * c(lam[1].sqrt());
        Ok(TypeDiagonal { eta_sqrt, frame, weights })
    }

    /// Frame from a pair `(ρ, η)` with `η` full rank: returns the frame and the
    /// eigenvalues `γ` of `η^{-1/2}ρη^{-1/2}`, largest first.
    pub fn frame_of(rho: &Qubit, eta: &Qubit) -> Result<([Vector2<C64>; 2], [f64; 2])> {
        let (lam, vecs) = eig2(eta);
        if !(lam[1] > 0.0) {
            return Err(Error::arg("symmetric backend needs a full-rank reference state"));
        }
        let inv = |v: &Vector2<C64>, l: f64| (v * v.adjoint()) * c(1.0 / l.sqrt());
        let w = inv(&vecs[0], lam[0]) + inv(&vecs[1], lam[1]);
        let gamma = w * rho * w;
        let (g, u) = eig2(&gamma);
        Ok((u, g))
    }

    pub fn copies(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn with_weights(&self, weights: Vec<f64>) -> Self {
        TypeDiagonal { eta_sqrt: self.eta_sqrt, frame: self.frame, weights }
    }

    /// `⟨u_s|η|u_s⟩`, the trace of one frame projector pushed through `F`.
    pub fn frame_traces(&self) -> [f64; 2] {
        let eta = self.eta_sqrt * self.eta_sqrt;
        let t = |v: &Vector2<C64>| (v.adjoint() * eta * v)[(0, 0)].re;
        [t(&self.frame[0]), t(&self.frame[1])]
    }

    fn pushed_projector(&self, s: usize) -> Qubit {
        let v = self.eta_sqrt * self.frame[s];
        v * v.adjoint()
    }

    pub fn trace(&self) -> f64 {
        let n = self.copies();
        let [h0, h1] = self.frame_traces();
        (0..=n)
            .map(|a| self.weights[a] * linalg::binomial(n, a) * h0.powi(a as i32) * h1.powi((n - a) as i32))
            .sum()
    }

    /// Reduced operator on the first `j` copies.
    pub fn marginal(&self, j: usize) -> Result<Self> {
        let n = self.copies();
        if j == 0 || j > n {
            return Err(Error::arg(format!("marginal on {j} of {n} copies")));
        }
        let [h0, h1] = self.frame_traces();
        let rest = n - j;
        let weights = (0..=j)
            .map(|b| {
                (0..=rest)
                    .map(|c| {
                        self.weights[b + c]
                            * linalg::binomial(rest, c)
                            * h0.powi(c as i32)
                            * h1.powi((rest - c) as i32)
                    })
                    .sum()
            })
            .collect();
        Ok(self.with_weights(weights))
    }

    /// The single-copy operator.
    pub fn single(&self) -> Result<Qubit> {
        let m = self.marginal(1)?;
        Ok(self.pushed_projector(0) * c(m.weights[1]) + self.pushed_projector(1) * c(m.weights[0]))
    }

    /// Irrep blocks on all copies.
    pub fn blocks(&self) -> SymOp {
        let n = self.copies();
        let sym_sqrt: Vec<CMatrix> = (0..=n / 2).map(|r| sym_power(&self.eta_sqrt, n - 2 * r)).collect();
        let det = (self.eta_sqrt[(0, 0)] * self.eta_sqrt[(1, 1)] - self.eta_sqrt[(0, 1)] * self.eta_sqrt[(1, 0)]).re;
        let blocks = (0..=n / 2)
            .map(|r| {
                let k = n - 2 * r;
                let mid = if k == 0 {
                    CMatrix::from_element(1, 1, c(self.weights[r]))
                } else {
                    counting_basis(&self.frame[0], k).map(|mu| self.weights[r + mu as usize])
                };
                let s = &sym_sqrt[r];
                (s * mid * s).scale(det.powi(2 * r as i32))
            })
            .collect();
        SymOp { n, blocks }
    }

    /// Von Neumann entropy, from the irrep spectrum.
    pub fn entropy(&self) -> f64 {
        self.blocks().spectrum().into_iter().filter(|&(x, _)| x > 0.0).map(|(x, m)| -m * x * x.ln()).sum()
    }

    /// The operator on `(C²)^{⊗n}`, copy 0 most significant.
    pub fn to_dense(&self, cap: usize) -> Result<CMatrix> {
        let n = self.copies();
        let d = 1usize.checked_shl(n as u32).filter(|&d| d <= cap).ok_or(Error::SizeCap { dim: usize::MAX, cap })?;
        let f = to_dense(&(self.eta_sqrt * Qubit::from_columns(&self.frame)));
        let mut fn_ = CMatrix::from_element(1, 1, linalg::ONE);
        for _ in 0..n {
            fn_ = linalg::kron(&fn_, &f);
        }
        let diag: Vec<f64> = (0..d).map(|x| self.weights[n - (x as u32).count_ones() as usize]).collect();
        Ok(linalg::hermitize(&(&fn_ * linalg::diag(&diag) * fn_.adjoint())))
    }

    /// Splits off the first copy: `X = Σ_s P_s ⊗ X_s` with `P_s` the pushed
    /// frame projectors.
    pub fn split_first(&self) -> Result<[(Qubit, TypeDiagonal); 2]> {
        let n = self.copies();
        if n < 2 {
            return Err(Error::arg("need at least two copies to split"));
        }
        let along = self.with_weights(self.weights[1..].to_vec());
        let across = self.with_weights(self.weights[..n].to_vec());
        Ok([(self.pushed_projector(0), along), (self.pushed_projector(1), across)])
    }

    /// Blocks of the operator seen as (first copy) ⊗ (remaining `n-1` copies),
    /// indexed by the irreps of the remaining copies. Each block has the
    /// first copy as its most significant factor.
    pub fn joint_blocks(&self) -> Result<SymOp2> {
        let [(p0, x0), (p1, x1)] = self.split_first()?;
        let b0 = x0.blocks();
        let b1 = x1.blocks();
        let blocks = b0
            .blocks()
            .iter()
            .zip(b1.blocks())
            .map(|(a, b)| linalg::kron(&to_dense(&p0), a) + linalg::kron(&to_dense(&p1), b))
            .collect();
        Ok(SymOp2 { rest: self.copies() - 1, blocks })
    }
}

/// Operators on `C² ⊗ (C²)^{⊗m}` invariant under permutations of the last `m`
/// copies; block `r` lives on `C² ⊗ Sym^{m-2r}` with multiplicity `m_r(m)`.
#[derive(Clone, Debug)]
pub struct SymOp2 {
    rest: usize,
    blocks: Vec<CMatrix>,
}

impl SymOp2 {
    /// `A ⊗ X` for a single-copy `A` and a permutation-invariant `X`.
    pub fn product(a: &Qubit, x: &SymOp) -> Self {
        SymOp2 { rest: x.copies(), blocks: x.blocks().iter().map(|b| linalg::kron(&to_dense(a), b)).collect() }
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn multiplicities(&self) -> Vec<f64> {
        (0..self.blocks.len()).map(|r| multiplicity(self.rest, r)).collect()
    }
}
