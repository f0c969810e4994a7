//! Dense complex linear algebra: the numerical substrate for every other
//! module. Matrices are row-major over `Complex<f64>` and sized for desk-scale
//! work (nothing here is tuned beyond a few thousand rows).

use num_complex::Complex;
use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type C64 = Complex<f64>;

/// Tolerance for accepting a matrix as Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Rank tolerance for Gram–Schmidt and null-space extraction.
pub const RANK_TOL: f64 = 1e-10;
/// Tolerance for accepting a matrix as unitary.
pub const UNITARITY_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not unitary (max residual {0:.3e})")]
    NotUnitary(f64),
    #[error("non-finite entry produced in {0}")]
    NonFinite(&'static str),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Dense complex vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector {
    pub data: Vec<C64>,
}

impl ComplexVector {
    pub fn new(data: Vec<C64>) -> Self {
        Self { data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { data: vec![C64::new(0.0, 0.0); dim] }
    }

    pub fn from_real(entries: &[f64]) -> Self {
        Self { data: entries.iter().map(|&r| C64::new(r, 0.0)).collect() }
    }

    /// Computational basis vector `|index⟩` in `dim` dimensions.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[index] = C64::new(1.0, 0.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    /// Inner product `⟨self, other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &ComplexVector) -> C64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: C64) -> ComplexVector {
        ComplexVector::new(self.data.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &ComplexVector) -> ComplexVector {
        ComplexVector::new(
            self.data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &ComplexVector) -> ComplexVector {
        ComplexVector::new(
            self.data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn normalized(&self) -> ComplexVector {
        let n = self.norm();
        if n < RANK_TOL {
            return self.clone();
        }
        self.scale(C64::new(1.0 / n, 0.0))
    }

    /// Kronecker product of two vectors.
    pub fn kron(&self, other: &ComplexVector) -> ComplexVector {
        let mut data = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.data {
            for b in &other.data {
                data.push(a * b);
            }
        }
        ComplexVector::new(data)
    }

    /// Outer product `|self⟩⟨other|`.
    pub fn outer(&self, other: &ComplexVector) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim(), other.dim());
        for i in 0..self.dim() {
            for j in 0..other.dim() {
                m.set(i, j, self.data[i] * other.data[j].conj());
            }
        }
        m
    }
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, C64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let converted: Vec<Vec<C64>> = rows
            .iter()
            .map(|row| row.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&converted)
    }

    pub fn diag(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m.set(i, i, e);
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn add(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, s: C64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            self.cols, other.rows,
            "matmul: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &ComplexVector) -> ComplexVector {
        assert_eq!(self.cols, v.dim());
        let mut out = ComplexVector::zeros(self.rows);
        for i in 0..self.rows {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..self.cols {
                acc += self.get(i, j) * v.data[j];
            }
            out.data[i] = acc;
        }
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    /// Entrywise complex conjugate (no transpose).
    pub fn conjugate(&self) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|c| c.conj()).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.sub(&self.dagger()).max_abs()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermiticity_defect() < tol
    }

    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.dagger()
            .matmul(self)
            .sub(&ComplexMatrix::identity(self.rows))
            .max_abs()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square() && self.unitarity_defect() < tol
    }

    pub fn column(&self, j: usize) -> ComplexVector {
        ComplexVector::new((0..self.rows).map(|i| self.get(i, j)).collect())
    }
}

/// Kronecker product, `kron(a, b)[i·q + k, j·q + l] = a[i,j]·b[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.rows * b.rows, a.cols * b.cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let av = a.get(i, j);
            if av.norm_sqr() == 0.0 {
                continue;
            }
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out.set(i * b.rows + k, j * b.cols + l, av * b.get(k, l));
                }
            }
        }
    }
    out
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all(factors: &[&ComplexMatrix]) -> ComplexMatrix {
    assert!(!factors.is_empty());
    let mut acc = factors[0].clone();
    for f in &factors[1..] {
        acc = kron(&acc, f);
    }
    acc
}

/// Commutator `ab − ba`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() || !b.is_square() || a.rows != b.rows {
        return Err(LinalgError::DimensionMismatch(format!(
            "commutator of {}x{} and {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    Ok(a.matmul(b).sub(&b.matmul(a)))
}

/// Anticommutator `ab + ba`.
pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.matmul(b).add(&b.matmul(a))
}

/// Partial trace of `rho` over the subsystems not listed in `keep`.
///
/// `dims` are the tensor factor dimensions in kron order and `keep` lists the
/// factor indices to retain (order preserved as in `dims`).
pub fn partial_trace(
    rho: &ComplexMatrix,
    dims: &[usize],
    keep: &[usize],
) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if !rho.is_square() || rho.rows != total {
        return Err(LinalgError::DimensionMismatch(format!(
            "partial_trace: rho is {}x{}, dims product {}",
            rho.rows, rho.cols, total
        )));
    }
    if keep.iter().any(|&k| k >= dims.len()) {
        return Err(LinalgError::DimensionMismatch(
            "partial_trace: keep index out of range".into(),
        ));
    }
    let mut keep_sorted: Vec<usize> = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep_sorted.contains(i)).collect();

    let kept_dim: usize = keep_sorted.iter().map(|&i| dims[i]).product();
    let traced_dim: usize = traced.iter().map(|&i| dims[i]).product();
    let mut out = ComplexMatrix::zeros(kept_dim.max(1), kept_dim.max(1));

    // Mixed-radix digit helpers over the factor list.
    let to_full = |kept_idx: usize, traced_idx: usize| -> usize {
        let mut digits = vec![0usize; dims.len()];
        let mut k = kept_idx;
        for &f in keep_sorted.iter().rev() {
            digits[f] = k % dims[f];
            k /= dims[f];
        }
        let mut t = traced_idx;
        for &f in traced.iter().rev() {
            digits[f] = t % dims[f];
            t /= dims[f];
        }
        let mut idx = 0usize;
        for (f, &d) in digits.iter().enumerate() {
            idx = idx * dims[f] + d;
        }
        idx
    };

    for a in 0..kept_dim.max(1) {
        for b in 0..kept_dim.max(1) {
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..traced_dim.max(1) {
                acc += rho.get(to_full(a, t), to_full(b, t));
            }
            out.set(a, b, acc);
        }
    }
    Ok(out)
}

/// Eigendecomposition of a Hermitian matrix.
///
/// `eigenvalues` ascending; `eigenvectors` holds the matching orthonormal
/// eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    /// Reconstruct `Σ_k λ_k |v_k⟩⟨v_k|`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for k in 0..n {
            let v = self.eigenvectors.column(k);
            out = out.add(&v.outer(&v).scale(C64::new(self.eigenvalues[k], 0.0)));
        }
        out
    }
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix.
///
/// Input must be Hermitian within [`HERMITICITY_TOL`]; reconstruction error
/// stays near machine precision at the dimensions used here.
pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<HermitianEigen> {
    if !a.is_square() {
        return Err(LinalgError::DimensionMismatch(format!(
            "hermitian_eigen on {}x{}",
            a.rows, a.cols
        )));
    }
    let defect = a.hermiticity_defect();
    if defect >= HERMITICITY_TOL {
        return Err(LinalgError::NotHermitian(defect));
    }
    let n = a.rows;
    if n == 0 {
        return Err(LinalgError::Empty("hermitian_eigen"));
    }
    // Work on the exactly-Hermitian average to kill tolerated asymmetry.
    let mut m = a.add(&a.dagger()).scale(C64::new(0.5, 0.0));
    let mut v = ComplexMatrix::identity(n);

    let off = |m: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += m.get(i, j).norm_sqr();
            }
        }
        s.sqrt()
    };

    let max_sweeps = 60;
    let mut converged = false;
    for _sweep in 0..max_sweeps {
        if off(&m) < 1e-14 * (1.0 + m.max_abs()) {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq.norm() < 1e-300 {
                    continue;
                }
                // Phase factor making the pivot real, then a real rotation
                // annihilating it: U columns are u_p = c·e_p + su·e_q,
                // u_q = −conj(su)·e_p + c·e_q with su = s·conj(phase).
                let beta = apq.norm();
                let phase = apq / beta;
                let app = m.get(p, p).re;
                let aqq = m.get(q, q).re;
                let tau = (aqq - app) / (2.0 * beta);
                let t = -tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let cp = C64::new(c, 0.0);
                let su = phase.conj() * s;
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, mkp * cp + mkq * su);
                    m.set(k, q, mkq * cp - mkp * su.conj());
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, mpk * cp + mqk * su.conj());
                    m.set(q, k, mqk * cp - mpk * su);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, vkp * cp + vkq * su);
                    v.set(k, q, vkq * cp - vkp * su.conj());
                }
            }
        }
    }
    if !converged && off(&m) >= 1e-12 * (1.0 + m.max_abs()) {
        return Err(LinalgError::NoConvergence(max_sweeps));
    }

    let mut order: Vec<usize> = (0..n).collect();
    let evals: Vec<f64> = (0..n).map(|i| m.get(i, i).re).collect();
    order.sort_by(|&i, &j| evals[i].partial_cmp(&evals[j]).unwrap());

    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = ComplexMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        eigenvalues.push(evals[src]);
        for row in 0..n {
            eigenvectors.set(row, col, v.get(row, src));
        }
    }
    Ok(HermitianEigen { eigenvalues, eigenvectors })
}

/// Matrix exponential by scaling-and-squaring with a Taylor kernel.
///
/// Relative accuracy around 1e-12 for norms up to a few tens, which covers
/// everything this crate feeds it.
pub fn matrix_exp(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(LinalgError::DimensionMismatch(format!(
            "matrix_exp on {}x{}",
            a.rows, a.cols
        )));
    }
    let n = a.rows;
    let norm = a.max_abs() * n as f64;
    let squarings = if norm > 0.5 {
        ((norm / 0.5).log2().ceil() as u32).min(60)
    } else {
        0
    };
    let scaled = a.scale(C64::new(1.0 / 2f64.powi(squarings as i32), 0.0));

    let mut result = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=40 {
        term = term.matmul(&scaled).scale(C64::new(1.0 / k as f64, 0.0));
        result = result.add(&term);
        if term.max_abs() < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    if !result.all_finite() {
        return Err(LinalgError::NonFinite("matrix_exp"));
    }
    Ok(result)
}

/// Orthogonal projector onto the span of `vs` (Gram–Schmidt, vectors kept in
/// input order, norms below [`RANK_TOL`] dropped).
pub fn projector_from_vectors(vs: &[ComplexVector]) -> Result<ComplexMatrix> {
    let dim = vs.first().map(|v| v.dim()).unwrap_or(0);
    if dim == 0 {
        return Err(LinalgError::Empty("projector_from_vectors"));
    }
    let mut basis: Vec<ComplexVector> = Vec::new();
    for v in vs {
        if v.dim() != dim {
            return Err(LinalgError::DimensionMismatch(
                "projector_from_vectors: inconsistent vector dims".into(),
            ));
        }
        let mut w = v.clone();
        for b in &basis {
            let c = b.inner(&w);
            w = w.sub(&b.scale(c));
        }
        // Second pass for numerical orthogonality.
        for b in &basis {
            let c = b.inner(&w);
            w = w.sub(&b.scale(c));
        }
        if w.norm() > RANK_TOL {
            basis.push(w.normalized());
        }
    }
    let mut p = ComplexMatrix::zeros(dim, dim);
    for b in &basis {
        p = p.add(&b.outer(b));
    }
    Ok(p)
}

/// Moore–Penrose pseudoinverse via `(A†A)⁺ A†` on the Hermitian eigenbasis.
pub fn pinv(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let ata = a.dagger().matmul(a);
    let eig = hermitian_eigen(&ata)?;
    let n = ata.rows;
    let scale = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let mut inv = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = eig.eigenvalues[k];
        if lambda > RANK_TOL * (1.0 + scale) {
            let v = eig.eigenvectors.column(k);
            inv = inv.add(&v.outer(&v).scale(C64::new(1.0 / lambda, 0.0)));
        }
    }
    Ok(inv.matmul(&a.dagger()))
}

/// Pauli matrices and friends used all over the tests and fixtures.
pub mod gates {
    use super::{C64, ComplexMatrix};

    pub fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])
    }

    pub fn sigma_y() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[
            vec![C64::new(0.0, 0.0), C64::new(0.0, -1.0)],
            vec![C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
        ])
    }

    pub fn sigma_z() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]])
    }

    pub fn hadamard() -> ComplexMatrix {
        let h = 1.0 / 2f64.sqrt();
        ComplexMatrix::from_real_rows(&[vec![h, h], vec![h, -h]])
    }

    /// Qubit lowering operator `|0⟩⟨1|` (ground index 0).
    pub fn lowering() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]])
    }

    /// Truncated bosonic annihilation operator on `dim` levels.
    pub fn annihilation(dim: usize) -> ComplexMatrix {
        let mut a = ComplexMatrix::zeros(dim, dim);
        for n in 1..dim {
            a.set(n - 1, n, C64::new((n as f64).sqrt(), 0.0));
        }
        a
    }
}
