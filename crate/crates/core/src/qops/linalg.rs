//! Dense Hermitian linear algebra on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Eigen-decomposition with eigenvalues sorted ascending.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V f(Λ) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let d = self.dim();
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        let mut scaled = self.vectors.clone();
        for j in 0..d {
            let s = fv[j];
            for i in 0..d {
                scaled[(i, j)] *= s;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    pub fn column(&self, j: usize) -> nalgebra::DVector<C64> {
        self.vectors.column(j).into_owned()
    }

    pub fn spectral_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

pub fn is_diagonal(m: &CMatrix) -> bool {
    let n = m.nrows();
    (0..n).all(|j| (0..n).all(|i| i == j || m[(i, j)] == ZERO))
}

/// Hermitian eigen-decomposition. Exactly diagonal input skips the solver so
/// that diagonal states keep their entries bit for bit.
pub fn eigh(m: &CMatrix) -> Eigen {
    let n = m.nrows();
    let (values, vectors) = if is_diagonal(m) {
        let vals: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
        (vals, CMatrix::identity(n, n))
    } else {
        let e = hermitize(m).symmetric_eigen();
        (e.eigenvalues.iter().copied().collect::<Vec<f64>>(), e.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut sorted = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        sorted.set_column(dst, &vectors.column(src));
    }
    Eigen { values: order.iter().map(|&i| values[i]).collect(), vectors: sorted }
}

pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = if is_diagonal(m) {
        (0..m.nrows()).map(|i| m[(i, i)].re).collect()
    } else {
        hermitize(m).symmetric_eigenvalues().iter().copied().collect()
    };
    v.sort_by(f64::total_cmp);
    v
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |a, z| a.max(z.norm()))
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    eigvalsh(m).first().copied().unwrap_or(0.0)
}

/// Smallest eigenvalue relative to the spectral norm (zero for the zero matrix).
pub fn psd_margin(m: &CMatrix) -> (f64, f64) {
    let v = eigvalsh(m);
    let norm = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    (v.first().copied().unwrap_or(0.0), norm)
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

pub fn trace_re(m: &CMatrix) -> f64 {
    trace(m).re
}

/// `Tr[AB]` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut s = ZERO;
    for i in 0..n {
        for k in 0..n {
            s += a[(i, k)] * b[(k, i)];
        }
    }
    s
}

/// `Σ|λ|` of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &CMatrix) -> f64 {
    eigvalsh(m).iter().map(|x| x.abs()).sum()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn diag(values: &[f64]) -> CMatrix {
    let n = values.len();
    CMatrix::from_fn(n, n, |i, j| if i == j { c(values[i]) } else { ZERO })
}

pub fn outer(v: &nalgebra::DVector<C64>) -> CMatrix {
    v * v.adjoint()
}

/// Projector onto eigenvectors with eigenvalue above `cutoff * ||M||`.
pub fn support_projector(e: &Eigen, cutoff: f64) -> CMatrix {
    let thr = cutoff * e.spectral_norm();
    e.map(|x| if x > thr { 1.0 } else { 0.0 })
}

/// Pseudo-inverse square root on the support.
pub fn inv_sqrt_on_support(e: &Eigen, cutoff: f64) -> CMatrix {
    let thr = cutoff * e.spectral_norm();
    e.map(|x| if x > thr { 1.0 / x.sqrt() } else { 0.0 })
}

pub fn sqrt_psd(e: &Eigen) -> CMatrix {
    e.map(|x| x.max(0.0).sqrt())
}

/// Binomial coefficient as a float; exact for all values below 2^53.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    if acc < 9.0e15 {
        acc.round()
    } else {
        acc
    }
}

/// `ln k!` for k = 0..=n.
pub fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0f64;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Binary entropy in nats.
pub fn binary_entropy(p: f64) -> f64 {
    let h = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    h(p) + h(1.0 - p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CMatrix {
        CMatrix::from_row_slice(
            3,
            3,
            &[
                c(2.0),
                C64::new(0.5, 0.25),
                c(0.0),
                C64::new(0.5, -0.25),
                c(1.0),
                C64::new(0.0, 0.3),
                c(0.0),
                C64::new(0.0, -0.3),
                c(-1.0),
            ],
        )
    }

    #[test]
    fn eigh_reconstructs_and_sorts() {
        let m = sample();
        let e = eigh(&m);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let back = e.map(|x| x);
        assert!(max_abs(&(back - &m)) < 1e-12);
    }

    #[test]
    fn diagonal_fast_path_is_exact() {
        let m = diag(&[0.25, 0.75]);
        let e = eigh(&m);
        assert_eq!(e.values, vec![0.25, 0.75]);
        assert_eq!(e.map(|x| x)[(1, 1)].re, 0.75);
    }

    #[test]
    fn trace_product_matches_multiplication() {
        let a = sample();
        let b = sample().map(|z| z * C64::new(0.3, 0.1));
        assert!((trace_product(&a, &b) - trace(&(&a * &b))).norm() < 1e-13);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(8, 0), 1.0);
        assert_eq!(binomial(8, 2), 28.0);
        assert_eq!(binomial(40, 20), 137846528820.0);
        assert_eq!(binomial(3, 5), 0.0);
    }

    #[test]
    fn binary_entropy_value() {
        assert!((binary_entropy(0.01) - 0.056001534354847345).abs() < 1e-15);
        assert_eq!(binary_entropy(0.0), 0.0);
    }
}
